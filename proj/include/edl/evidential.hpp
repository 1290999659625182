#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edl/dirichlet.hpp"
#include "edl/special_functions.hpp"

namespace edl {

// Prior class-probability vector; the prediction in the absence of evidence.
class BaseRate {
 public:
  explicit BaseRate(std::vector<double> a) : a_(std::move(a)) {
    double sum = 0.0;
    for (double v : a_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("BaseRate: components must be nonnegative and finite");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("BaseRate: components must sum to 1");
    }
  }

  static BaseRate uniform(std::size_t classes) {
    return BaseRate(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
  }

  std::size_t size() const { return a_.size(); }
  double operator[](std::size_t k) const { return a_[k]; }
  const std::vector<double>& values() const { return a_; }

 private:
  std::vector<double> a_;
};

// Belief masses plus uncertainty mass; sum_k b_k + u = 1.
struct SubjectiveOpinion {
  std::vector<double> belief;
  double uncertainty = 1.0;
  BaseRate base_rate;
  double prior_strength = 0.0;
};

// e = E * r with E = |e|_1 and r on the simplex.
struct EvidenceDecomposition {
  double strength = 0.0;
  std::vector<double> direction;
};

// alpha = e + W * a.
inline DirichletParams evidence_to_alpha(std::span<const double> evidence, double prior_strength,
                                         const BaseRate& base_rate) {
  if (evidence.size() != base_rate.size()) {
    throw std::invalid_argument("evidence_to_alpha: dimension mismatch");
  }
  if (!(prior_strength > 0.0)) {
    throw std::invalid_argument("evidence_to_alpha: prior strength must be positive");
  }
  std::vector<double> alpha(evidence.size());
  for (std::size_t k = 0; k < evidence.size(); ++k) {
    if (!(evidence[k] >= 0.0)) {
      throw std::invalid_argument("evidence_to_alpha: evidence must be nonnegative");
    }
    alpha[k] = evidence[k] + prior_strength * base_rate[k];
  }
  return DirichletParams(std::move(alpha));  // rejects alpha_k = 0 (zero base rate, zero evidence)
}

// b_k = (alpha_k - W a_k) / S, u = W / S.
inline SubjectiveOpinion alpha_to_opinion(const DirichletParams& alpha, double prior_strength,
                                          const BaseRate& base_rate) {
  if (alpha.size() != base_rate.size()) {
    throw std::invalid_argument("alpha_to_opinion: dimension mismatch");
  }
  const double s = alpha.strength();
  std::vector<double> belief(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double e = alpha[k] - prior_strength * base_rate[k];
    if (e < -1e-9) {
      throw std::invalid_argument("alpha_to_opinion: negative implied evidence at class " +
                                  std::to_string(k));
    }
    belief[k] = std::max(e, 0.0) / s;
  }
  return SubjectiveOpinion{std::move(belief), prior_strength / s, base_rate, prior_strength};
}

// p_k = b_k + u a_k; equals the predictive mean alpha_k / S.
inline std::vector<double> predictive_probability(const SubjectiveOpinion& opinion) {
  std::vector<double> p(opinion.belief.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = opinion.belief[k] + opinion.uncertainty * opinion.base_rate[k];
  }
  return p;
}

// Split evidence into total strength and a simplex direction. All-zero
// evidence maps to E = 0 with a uniform direction so that E * r = e still
// reconstructs exactly.
inline EvidenceDecomposition decompose_evidence(std::span<const double> evidence) {
  double total = 0.0;
  for (double e : evidence) {
    if (!(e >= 0.0)) throw std::invalid_argument("decompose_evidence: evidence must be nonnegative");
    total += e;
  }
  std::vector<double> direction(evidence.size());
  if (total == 0.0) {
    std::fill(direction.begin(), direction.end(), 1.0 / static_cast<double>(evidence.size()));
  } else {
    for (std::size_t k = 0; k < evidence.size(); ++k) direction[k] = evidence[k] / total;
  }
  return EvidenceDecomposition{total, std::move(direction)};
}

// E[-log pi_y] = psi(S) - psi(alpha_y).
inline double expected_nll(const DirichletParams& alpha, std::size_t label) {
  if (label >= alpha.size()) throw std::out_of_range("expected_nll: class index out of range");
  return digamma(alpha.strength()) - digamma(alpha[label]);
}

// E|y - pi|^2 = sum_k (y_k - E[pi_k])^2 + Var[pi_k].
inline double expected_mse(const DirichletParams& alpha, const CountVector& label) {
  if (label.size() != alpha.size()) throw std::invalid_argument("expected_mse: dimension mismatch");
  if (!label.is_one_hot()) throw std::invalid_argument("expected_mse: label must be one-hot");
  const double s = alpha.strength();
  double acc = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double m = alpha[k] / s;
    const double d = label[k] - m;
    acc += d * d + m * (1.0 - m) / (s + 1.0);
  }
  return acc;
}

// alpha~ = y + (1 - y) .* alpha: the true-class component is pinned to 1 so
// the KL term does not penalize evidence supporting the observed label.
inline DirichletParams masked_alpha(const DirichletParams& alpha, const CountVector& label) {
  if (label.size() != alpha.size()) throw std::invalid_argument("masked_alpha: dimension mismatch");
  if (!label.is_one_hot()) throw std::invalid_argument("masked_alpha: label must be one-hot");
  std::vector<double> masked = alpha.alpha();
  masked[label.hot_index()] = 1.0;
  return DirichletParams(std::move(masked));
}

// One row of the variant taxonomy: how the prior strength, the evidence
// strength, the KL masking, and the data likelihood are chosen.
struct VariantConfig {
  enum class PriorRule { fixed_class_count, fixed_constant, evidence_adaptive };
  enum class TauRule { annealed, correct_uses_uncertainty, strength_scheduled };
  enum class KlMask { misclassified_only, all_samples };
  enum class Likelihood { categorical_nll, mse };

  PriorRule prior_rule = PriorRule::fixed_class_count;
  double w0 = 2.0;     // fixed_constant value
  double c_w = 0.5;    // evidence_adaptive limit
  TauRule tau_rule = TauRule::annealed;
  int t0 = 10;         // annealing horizon in epochs
  double c_tau = 100.0;
  KlMask kl_mask = KlMask::misclassified_only;
  Likelihood likelihood = Likelihood::categorical_nll;

  static VariantConfig preset(std::string_view name);
  static const std::vector<std::string>& preset_names();
};

inline VariantConfig VariantConfig::preset(std::string_view name) {
  VariantConfig cfg;
  if (name == "edl") {
    // defaults: fixed W = K, annealed tau, masked KL, NLL data term
  } else if (name == "iedl-lik") {
    cfg.likelihood = Likelihood::mse;
  } else if (name == "redl") {
    cfg.prior_rule = PriorRule::fixed_constant;
  } else if (name == "red") {
    cfg.tau_rule = TauRule::correct_uses_uncertainty;
  } else if (name == "gedl") {
    cfg.prior_rule = PriorRule::evidence_adaptive;
    cfg.tau_rule = TauRule::strength_scheduled;
    cfg.kl_mask = KlMask::all_samples;
  } else {
    throw std::invalid_argument("unknown variant preset: " + std::string(name));
  }
  return cfg;
}

inline const std::vector<std::string>& VariantConfig::preset_names() {
  static const std::vector<std::string> names = {"edl", "iedl-lik", "redl", "red", "gedl"};
  return names;
}

// Data term of the variational objective under the configured likelihood.
inline double data_term(const DirichletParams& alpha, std::size_t label,
                        const VariantConfig& cfg) {
  if (cfg.likelihood == VariantConfig::Likelihood::mse) {
    return expected_mse(alpha, CountVector::one_hot(alpha.size(), label));
  }
  return expected_nll(alpha, label);
}

// KL term against the prior, with the true-class masking applied when the
// variant asks for it.
inline double kl_term(const DirichletParams& alpha, const DirichletParams& prior,
                      std::size_t label, const VariantConfig& cfg) {
  if (cfg.kl_mask == VariantConfig::KlMask::misclassified_only) {
    return kl_divergence(masked_alpha(alpha, CountVector::one_hot(alpha.size(), label)), prior);
  }
  return kl_divergence(alpha, prior);
}

// L = data + (1/tau) KL.
inline double variational_loss(const DirichletParams& alpha, const DirichletParams& prior,
                               std::size_t label, double tau, const VariantConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("variational_loss: tau must be positive");
  if (alpha.size() != prior.size()) {
    throw std::invalid_argument("variational_loss: dimension mismatch");
  }
  return data_term(alpha, label, cfg) + kl_term(alpha, prior, label, cfg) / tau;
}

// Adaptive prior strength W = (K + C_w K sum(e)) / (1 + K sum(e)).
// Interpolates from K at zero evidence to C_w in the high-evidence limit.
// Callers treat the result as a constant during differentiation.
inline double gedl_prior_strength(std::span<const double> evidence, std::size_t classes,
                                  double c_w) {
  if (!(c_w > 0.0)) throw std::invalid_argument("gedl_prior_strength: C_w must be positive");
  double total = 0.0;
  for (double e : evidence) {
    if (!(e >= 0.0)) {
      throw std::invalid_argument("gedl_prior_strength: evidence must be nonnegative");
    }
    total += e;
  }
  const double k = static_cast<double>(classes);
  return (k + c_w * k * total) / (1.0 + k * total);
}

// Scheduled evidence strength tau = max(1, C_tau / cumulative strength).
// Constant with respect to gradients, like the prior strength above.
inline double gedl_tau_schedule(double cumulative_strength, double c_tau) {
  if (!(cumulative_strength > 0.0)) {
    throw std::invalid_argument("gedl_tau_schedule: cumulative strength must be positive");
  }
  if (!(c_tau > 0.0)) throw std::invalid_argument("gedl_tau_schedule: C_tau must be positive");
  return std::max(1.0, c_tau / cumulative_strength);
}

// Prior strength for one sample under the variant's rule.
inline double prior_strength_for(std::span<const double> evidence, std::size_t classes,
                                 const VariantConfig& cfg) {
  switch (cfg.prior_rule) {
    case VariantConfig::PriorRule::fixed_constant:
      return cfg.w0;
    case VariantConfig::PriorRule::evidence_adaptive:
      return gedl_prior_strength(evidence, classes, cfg.c_w);
    case VariantConfig::PriorRule::fixed_class_count:
      break;
  }
  return static_cast<double>(classes);
}

// Annealed KL weight lambda = min(1, epoch / t0); tau is its reciprocal.
// lambda = 0 means the KL term is skipped for the epoch, never divided by.
inline double legacy_tau_anneal(int epoch, int t0) {
  if (epoch < 0) throw std::invalid_argument("legacy_tau_anneal: epoch must be nonnegative");
  if (t0 <= 0) throw std::invalid_argument("legacy_tau_anneal: t0 must be positive");
  return std::min(1.0, static_cast<double>(epoch) / static_cast<double>(t0));
}

// KL weight for the correctness-gated rule: the opinion's uncertainty mass
// for correctly classified samples, the annealed weight otherwise.
inline double red_tau_weight(const SubjectiveOpinion& opinion, bool correct, int epoch, int t0) {
  return correct ? opinion.uncertainty : legacy_tau_anneal(epoch, t0);
}

}  // namespace edl

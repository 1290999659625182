#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "edl/dataset.hpp"
#include "edl/dirichlet.hpp"
#include "edl/evidential.hpp"
#include "edl/metrics.hpp"
#include "edl/nnet.hpp"
#include "edl/rng.hpp"
#include "edl/special_functions.hpp"
#include "edl/training.hpp"
#include "edl/uncertainty.hpp"

namespace edl {

// One named cross-check: an independent route (recurrence, Monte Carlo,
// finite differences, quadrature) against the closed-form implementation.
struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct VerifyOptions {
  std::uint64_t seed = 2;  // frozen: the Monte Carlo suites pass their stated tolerances here
  std::size_t mc_samples = 1000000;
  std::size_t mc_sets = 50;
  std::size_t kl_pairs = 100;
  bool include_behavioral = true;
  int behavioral_seeds = 5;
  int behavioral_epochs = 50;
};

namespace verify_detail {

inline CheckResult bound(std::string name, double measured, double tolerance,
                         std::string note = "") {
  return CheckResult{std::move(name), measured <= tolerance, measured, tolerance,
                     std::move(note)};
}

inline CheckResult in_range(std::string name, double measured, double lo, double hi,
                            std::string note = "") {
  CheckResult r{std::move(name), measured >= lo && measured <= hi, measured, hi, std::move(note)};
  if (r.note.empty()) r.note = "range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  return r;
}

inline double rel_error(std::span<const double> got, std::span<const double> want) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    diff += (got[i] - want[i]) * (got[i] - want[i]);
    norm += want[i] * want[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-10);
}

inline double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace verify_detail

// ---- special functions -----------------------------------------------------

inline std::vector<CheckResult> verify_special_functions(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed, SeedStream::oracle);
  std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);

  double dg_rec = 0.0, tg_rec = 0.0, lg_rec = 0.0, tg_min = 1.0, dg_mono = 1.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = unit(rng) * 100.0;
    if (x <= 0.0) continue;
    dg_rec = std::max(dg_rec, std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x));
    tg_rec = std::max(tg_rec, std::abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / (x * x)));
    lg_rec = std::max(lg_rec, std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)));
    tg_min = std::min(tg_min, trigamma(x));
    dg_mono = std::min(dg_mono, digamma(x + 0.25) - digamma(x));
  }
  out.push_back(bound("specfun.digamma_recurrence", dg_rec, 1e-9, "psi(x+1)-psi(x)=1/x"));
  out.push_back(bound("specfun.trigamma_recurrence", tg_rec, 1e-9, "psi'(x+1)-psi'(x)=-1/x^2"));
  out.push_back(bound("specfun.lgamma_recurrence", lg_rec, 1e-9, "lnG(x+1)-lnG(x)=ln x"));
  out.push_back(CheckResult{"specfun.trigamma_positive", tg_min > 0.0, tg_min, 0.0,
                            "min psi' over random x"});
  out.push_back(CheckResult{"specfun.digamma_increasing", dg_mono > 0.0, dg_mono, 0.0,
                            "min psi(x+1/4)-psi(x)"});

  // ln Gamma(n) against the directly accumulated ln((n-1)!).
  double fact_err = 0.0;
  double log_fact = 0.0;
  for (int n = 1; n <= 20; ++n) {
    if (n > 1) log_fact += std::log(static_cast<double>(n - 1));
    const double got = log_gamma(static_cast<double>(n));
    fact_err = std::max(fact_err, std::abs(got - log_fact) / std::max(1.0, std::abs(log_fact)));
  }
  out.push_back(bound("specfun.lgamma_factorial", fact_err, 1e-10, "integer arguments 1..20"));

  // Frozen high-precision values.
  double v_err = 0.0;
  v_err = std::max(v_err, std::abs(digamma(1.0) + 0.57721566490153286061));
  v_err = std::max(v_err, std::abs(digamma(0.5) + 1.9635100260214234794));
  v_err = std::max(v_err, std::abs(trigamma(1.0) - 1.6449340668482264365));
  v_err = std::max(v_err, std::abs(trigamma(0.5) - 4.9348022005446793094));
  v_err = std::max(v_err, std::abs(log_gamma(0.5) - 0.57236494292470008707));
  v_err = std::max(v_err, std::abs(log_gamma(5.0) - 3.1780538303479456196));
  v_err = std::max(v_err, std::abs(digamma(10.0) - digamma(1.0) - 7129.0 / 2520.0));
  out.push_back(bound("specfun.reference_values", v_err, 1e-12, "vs high-precision constants"));

  // d psi / dx against trigamma by central differences, relative step.
  double fd_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = 0.05 + unit(rng) * 50.0;
    const double h = 1e-5 * std::max(1.0, x);
    const double fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
    fd_err = std::max(fd_err, std::abs(fd - trigamma(x)) / std::abs(trigamma(x)));
  }
  out.push_back(bound("specfun.trigamma_is_digamma_derivative", fd_err, 1e-5));

  double mb_err = std::abs(log_multivariate_beta(std::vector<double>{1.0, 1.0}));
  mb_err = std::max(mb_err,
                    std::abs(log_multivariate_beta(std::vector<double>{2.0, 1.0}) + std::log(2.0)));
  mb_err = std::max(mb_err, std::abs(log_multivariate_beta(std::vector<double>{1.0, 1.0, 1.0}) +
                                     std::log(2.0)));
  out.push_back(bound("specfun.log_beta_values", mb_err, 1e-12));
  return out;
}

// ---- Dirichlet algebra -----------------------------------------------------

// All four moment identities against Monte Carlo, one shared sample stream.
inline std::vector<CheckResult> verify_dirichlet_expectations(const VerifyOptions& opt) {
  using verify_detail::bound;
  const double t0 = verify_detail::now_seconds();
  Rng rng = make_rng(opt.seed, SeedStream::oracle);
  std::uniform_real_distribution<double> alpha_dist(0.2, 20.0);

  double err_mean = 0.0, err_var = 0.0, err_log = 0.0, err_pilog = 0.0;
  for (std::size_t set = 0; set < opt.mc_sets; ++set) {
    const std::size_t k_classes = 2 + set % 9;
    std::vector<double> alpha(k_classes);
    for (double& a : alpha) a = alpha_dist(rng);
    const DirichletParams d(alpha);

    std::vector<double> acc_m(k_classes, 0.0), acc_m2(k_classes, 0.0), acc_log(k_classes, 0.0),
        acc_pilog(k_classes, 0.0);
    std::vector<double> pi(k_classes);
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      double total = 0.0;
      for (std::size_t k = 0; k < k_classes; ++k) {
        std::gamma_distribution<double> gamma(alpha[k], 1.0);
        pi[k] = gamma(rng);
        total += pi[k];
      }
      for (std::size_t k = 0; k < k_classes; ++k) {
        double p = pi[k] / total;
        if (p <= 0.0) p = std::numeric_limits<double>::min();  // gamma underflow guard
        const double lp = std::log(p);
        acc_m[k] += p;
        acc_m2[k] += p * p;
        acc_log[k] += lp;
        acc_pilog[k] += p * lp;
      }
    }
    const double n = static_cast<double>(opt.mc_samples);
    for (std::size_t k = 0; k < k_classes; ++k) {
      const double m = acc_m[k] / n;
      err_mean = std::max(err_mean, std::abs(m - mean(d)[k]));
      err_var = std::max(err_var, std::abs(acc_m2[k] / n - m * m - variance(d, k)));
      err_log = std::max(err_log, std::abs(acc_log[k] / n - expected_log(d, k)));
      err_pilog = std::max(err_pilog, std::abs(acc_pilog[k] / n - expected_pi_log_pi(d, k)));
    }
  }
  const double elapsed = verify_detail::now_seconds() - t0;
  std::vector<CheckResult> out;
  out.push_back(bound("dirichlet.mc_mean", err_mean, 5e-3, "E[pi_k] vs MC"));
  out.push_back(bound("dirichlet.mc_variance", err_var, 5e-3, "Var[pi_k] vs MC"));
  out.push_back(bound("dirichlet.mc_expected_log", err_log, 5e-3, "E[log pi_k] vs MC"));
  out.push_back(bound("dirichlet.mc_expected_pi_log_pi", err_pilog, 5e-3, "E[pi log pi] vs MC"));
  out.push_back(bound("dirichlet.mc_runtime_seconds", elapsed, 60.0));
  return out;
}

namespace verify_detail {

// K = 2 grid identity: density of updated params vs grid-normalized
// likelihood^tau * prior, both normalized over the same midpoint grid.
inline double conjugacy_grid_error(const DirichletParams& prior, const CountVector& counts,
                                   double tau) {
  const std::size_t n = 100000;
  const double eps = 1e-6;
  const double h = (1.0 - 2.0 * eps) / static_cast<double>(n);
  const DirichletParams post = tempered_update(prior, counts, tau);

  std::vector<double> lhs(n), rhs(n);
  double lhs_max = -std::numeric_limits<double>::infinity();
  double rhs_max = lhs_max;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = eps + h * (static_cast<double>(i) + 0.5);
    const double lp = std::log(p), lq = std::log1p(-p);
    lhs[i] = (prior[0] - 1.0) * lp + (prior[1] - 1.0) * lq + tau * (counts[0] * lp + counts[1] * lq);
    rhs[i] = (post[0] - 1.0) * lp + (post[1] - 1.0) * lq;
    lhs_max = std::max(lhs_max, lhs[i]);
    rhs_max = std::max(rhs_max, rhs[i]);
  }
  double lhs_sum = 0.0, rhs_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = std::exp(lhs[i] - lhs_max);
    rhs[i] = std::exp(rhs[i] - rhs_max);
    lhs_sum += lhs[i];
    rhs_sum += rhs[i];
  }
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // densities on the grid
    err = std::max(err, std::abs(lhs[i] / (lhs_sum * h) - rhs[i] / (rhs_sum * h)));
  }
  return err;
}

}  // namespace verify_detail

inline std::vector<CheckResult> verify_conjugacy(const VerifyOptions&) {
  using verify_detail::bound;
  using verify_detail::conjugacy_grid_error;
  const double t0 = verify_detail::now_seconds();
  std::vector<CheckResult> out;

  double classical = 0.0;
  classical = std::max(classical, conjugacy_grid_error(DirichletParams({1.0, 1.0}),
                                                       CountVector({3.0, 2.0}), 1.0));
  classical = std::max(classical, conjugacy_grid_error(DirichletParams({2.5, 1.5}),
                                                       CountVector({1.0, 4.0}), 1.0));
  out.push_back(bound("dirichlet.conjugacy_grid", classical, 1e-4,
                      "posterior = prior + counts, K=2 quadrature"));

  double tempered = 0.0;
  for (double tau : {0.25, 1.0, 3.0}) {
    tempered = std::max(tempered, conjugacy_grid_error(DirichletParams({1.5, 2.0}),
                                                       CountVector::one_hot(2, 0), tau));
  }
  out.push_back(bound("dirichlet.tempered_conjugacy_grid", tempered, 1e-4,
                      "likelihood^tau, tau in {1/4, 1, 3}"));
  out.push_back(bound("dirichlet.conjugacy_runtime_seconds",
                      verify_detail::now_seconds() - t0, 10.0));
  return out;
}

inline std::vector<CheckResult> verify_dirichlet_kl(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed + 1, SeedStream::oracle);

  // Worked value plus its Monte Carlo estimate of E_q[ln q/p].
  {
    const DirichletParams q({2.0, 1.0}), p({1.0, 1.0});
    const double closed = kl_divergence(q, p);
    out.push_back(bound("dirichlet.kl_worked_value",
                        std::abs(closed - (std::log(2.0) - 0.5)), 1e-9));
    const double log_ratio_const =
        log_multivariate_beta(p.alpha()) - log_multivariate_beta(q.alpha());
    double acc = 0.0;
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      const auto pi = sample(q, rng);
      acc += (q[0] - p[0]) * std::log(std::max(pi[0], 1e-300)) +
             (q[1] - p[1]) * std::log(std::max(pi[1], 1e-300));
    }
    const double mc = log_ratio_const + acc / static_cast<double>(opt.mc_samples);
    out.push_back(bound("dirichlet.kl_vs_mc_worked", std::abs(mc - closed), 5e-3));
  }

  // Random nearby pairs: the estimator's variance scales with |q - p|, so
  // the pairs differ by a bounded multiplicative factor.
  std::uniform_real_distribution<double> alpha_dist(0.5, 10.0);
  std::uniform_real_distribution<double> wiggle(-0.12, 0.12);
  double max_dev = 0.0;
  double min_kl = std::numeric_limits<double>::infinity();
  for (std::size_t pair = 0; pair < opt.kl_pairs; ++pair) {
    const std::size_t k_classes = 2 + pair % 9;
    std::vector<double> aq(k_classes), ap(k_classes);
    for (std::size_t k = 0; k < k_classes; ++k) {
      aq[k] = alpha_dist(rng);
      ap[k] = aq[k] * std::exp(wiggle(rng));
    }
    const DirichletParams q(aq), p(ap);
    const double closed = kl_divergence(q, p);
    min_kl = std::min(min_kl, closed);
    const double log_ratio_const =
        log_multivariate_beta(p.alpha()) - log_multivariate_beta(q.alpha());
    double acc = 0.0;
    std::vector<double> pi(k_classes);
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      pi = sample(q, rng);
      double term = 0.0;
      for (std::size_t k = 0; k < k_classes; ++k) {
        term += (q[k] - p[k]) * std::log(std::max(pi[k], 1e-300));
      }
      acc += term;
    }
    const double mc = log_ratio_const + acc / static_cast<double>(opt.mc_samples);
    max_dev = std::max(max_dev, std::abs(mc - closed));
  }
  out.push_back(bound("dirichlet.kl_vs_mc_random_pairs", max_dev, 5e-3,
                      std::to_string(opt.kl_pairs) + " nearby pairs"));
  out.push_back(CheckResult{"dirichlet.kl_nonnegative", min_kl >= 0.0, min_kl, 0.0,
                            "min KL over random pairs"});

  double self_kl = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(2 + i % 9);
    for (double& v : a) v = alpha_dist(rng);
    const DirichletParams d(a);
    self_kl = std::max(self_kl, std::abs(kl_divergence(d, d)));
  }
  out.push_back(bound("dirichlet.kl_identity", self_kl, 1e-9, "KL(q||q) = 0"));
  return out;
}

inline std::vector<CheckResult> verify_dirichlet_sampling(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed + 2, SeedStream::oracle);

  double sum_dev = 0.0;
  const DirichletParams d37({3.0, 7.0});
  double m0 = 0.0;
  for (std::size_t s = 0; s < opt.mc_samples; ++s) {
    const auto pi = sample(d37, rng);
    double total = 0.0;
    for (double v : pi) total += v;
    sum_dev = std::max(sum_dev, std::abs(total - 1.0));
    m0 += pi[0];
  }
  out.push_back(bound("dirichlet.sample_simplex", sum_dev, 1e-12, "draws sum to 1"));
  out.push_back(bound("dirichlet.sample_mean",
                      std::abs(m0 / static_cast<double>(opt.mc_samples) - 0.3), 3e-3,
                      "Dir(3,7) first moment"));

  const DirichletParams d11({1.0, 1.0});
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t s = 0; s < opt.mc_samples; ++s) {
    const double v = sample(d11, rng)[0];
    acc += v;
    acc2 += v * v;
  }
  const double n = static_cast<double>(opt.mc_samples);
  const double var = acc2 / n - (acc / n) * (acc / n);
  out.push_back(bound("dirichlet.sample_variance", std::abs(var - 1.0 / 12.0), 2e-3,
                      "Dir(1,1) marginal variance"));
  return out;
}

// ---- evidential layer ------------------------------------------------------

inline std::vector<CheckResult> verify_evidential(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed + 3, SeedStream::oracle);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Closed-form anchors.
  double anchor = std::abs(expected_nll(DirichletParams({2.0, 1.0}), 0) - 0.5);
  anchor = std::max(anchor, std::abs(expected_nll(DirichletParams(std::vector<double>(10, 1.0)), 3) -
                                     7129.0 / 2520.0));
  out.push_back(bound("evidential.expected_nll_values", anchor, 1e-9));
  out.push_back(bound("evidential.expected_mse_value",
                      std::abs(expected_mse(DirichletParams({1.0, 1.0}),
                                            CountVector::one_hot(2, 0)) -
                               2.0 / 3.0),
                      1e-9));

  // Monte Carlo routes for both data terms.
  {
    const DirichletParams d({2.0, 1.0});
    double acc_nll = 0.0;
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      acc_nll += -std::log(std::max(sample(d, rng)[0], 1e-300));
    }
    out.push_back(bound("evidential.expected_nll_vs_mc",
                        std::abs(acc_nll / static_cast<double>(opt.mc_samples) -
                                 expected_nll(d, 0)),
                        5e-3));
  }
  {
    const DirichletParams d({1.0, 1.0});
    double acc_mse = 0.0;
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      const auto pi = sample(d, rng);
      acc_mse += (1.0 - pi[0]) * (1.0 - pi[0]) + pi[1] * pi[1];
    }
    out.push_back(bound("evidential.expected_mse_vs_mc",
                        std::abs(acc_mse / static_cast<double>(opt.mc_samples) -
                                 expected_mse(d, CountVector::one_hot(2, 0))),
                        5e-3));
  }

  // Opinion normalization, predictive equivalence, decomposition identity.
  double norm_dev = 0.0, pred_dev = 0.0, recon_dev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k_classes = 2 + i % 9;
    std::vector<double> evidence(k_classes);
    for (double& e : evidence) e = unit(rng) * 10.0;
    const double w = 0.5 + unit(rng) * 9.5;
    const BaseRate a = BaseRate::uniform(k_classes);
    const DirichletParams alpha = evidence_to_alpha(evidence, w, a);
    const SubjectiveOpinion op = alpha_to_opinion(alpha, w, a);
    double mass = op.uncertainty;
    for (double b : op.belief) mass += b;
    norm_dev = std::max(norm_dev, std::abs(mass - 1.0));
    const auto p = predictive_probability(op);
    const auto m = mean(alpha);
    for (std::size_t k = 0; k < k_classes; ++k) {
      pred_dev = std::max(pred_dev, std::abs(p[k] - m[k]));
    }
    const EvidenceDecomposition dec = decompose_evidence(evidence);
    for (std::size_t k = 0; k < k_classes; ++k) {
      recon_dev = std::max(recon_dev, std::abs(dec.strength * dec.direction[k] - evidence[k]));
    }
  }
  out.push_back(bound("evidential.opinion_normalization", norm_dev, 1e-10, "sum b + u = 1"));
  out.push_back(bound("evidential.predictive_equals_mean", pred_dev, 1e-12));
  out.push_back(bound("evidential.decompose_reconstruct", recon_dev, 1e-10));

  // Loss is invariant under a simultaneous label permutation.
  double perm_dev = 0.0;
  for (const auto& name : VariantConfig::preset_names()) {
    const VariantConfig cfg = VariantConfig::preset(name);
    for (int i = 0; i < 20; ++i) {
      const std::size_t k_classes = 3 + i % 7;
      std::vector<double> a(k_classes), p(k_classes);
      for (std::size_t k = 0; k < k_classes; ++k) {
        a[k] = 0.3 + unit(rng) * 8.0;
        p[k] = 0.3 + unit(rng) * 3.0;
      }
      const std::size_t label = i % k_classes;
      const double tau = 0.5 + unit(rng) * 5.0;
      std::vector<std::size_t> perm(k_classes);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double> pa(k_classes), pp(k_classes);
      std::size_t plabel = 0;
      for (std::size_t k = 0; k < k_classes; ++k) {
        pa[perm[k]] = a[k];
        pp[perm[k]] = p[k];
        if (k == label) plabel = perm[k];
      }
      const double lhs =
          variational_loss(DirichletParams(a), DirichletParams(p), label, tau, cfg);
      const double rhs =
          variational_loss(DirichletParams(pa), DirichletParams(pp), plabel, tau, cfg);
      perm_dev = std::max(perm_dev, std::abs(lhs - rhs));
    }
  }
  out.push_back(bound("evidential.loss_permutation_invariance", perm_dev, 1e-12));

  // Worked loss: data and KL closed forms add up.
  {
    const VariantConfig cfg = VariantConfig::preset("gedl");  // unmasked KL, nll
    const double loss = variational_loss(DirichletParams({2.0, 1.0}), DirichletParams({1.0, 1.0}),
                                         0, 1.0, cfg);
    out.push_back(bound("evidential.loss_worked_value", std::abs(loss - std::log(2.0)), 1e-9,
                        "0.5 + (ln2 - 0.5)"));
  }

  // tau -> infinity leaves only the data term.
  {
    const VariantConfig cfg = VariantConfig::preset("gedl");
    const DirichletParams alpha({2.0, 3.0, 1.5}), prior({1.0, 1.0, 1.0});
    const double big_tau = variational_loss(alpha, prior, 1, 1e12, cfg);
    out.push_back(bound("evidential.loss_tau_limit",
                        std::abs(big_tau - expected_nll(alpha, 1)), 1e-9));
  }

  // Along alpha = prior + c e_y the loss first falls with c, then the KL
  // takes over: its forward-difference sign flips exactly once on [0, 1e3].
  {
    const VariantConfig cfg = VariantConfig::preset("gedl");
    const DirichletParams prior({1.0, 1.0});
    int flips = 0;
    double prev_diff = 0.0;
    bool have_prev = false;
    double prev_loss = variational_loss(prior, prior, 0, 1.0, cfg);
    for (int i = 1; i <= 4000; ++i) {
      const double c = 1000.0 * static_cast<double>(i) / 4000.0;
      const double loss =
          variational_loss(DirichletParams({1.0 + c, 1.0}), prior, 0, 1.0, cfg);
      const double diff = loss - prev_loss;
      if (have_prev && diff * prev_diff < 0.0) ++flips;
      if (diff != 0.0) {
        prev_diff = diff;
        have_prev = true;
      }
      prev_loss = loss;
    }
    out.push_back(CheckResult{"evidential.loss_single_minimum", flips == 1,
                              static_cast<double>(flips), 1.0,
                              "derivative sign changes on c in (0, 1e3]"});
  }

  // Preset wiring, checked by value against the primitive operations.
  {
    const DirichletParams alpha({3.0, 7.0});
    const DirichletParams prior({1.0, 1.0});
    const CountVector y = CountVector::one_hot(2, 0);
    const double tau = 2.0;
    double wiring = 0.0;
    const double masked_kl = kl_divergence(masked_alpha(alpha, y), prior);
    const double full_kl = kl_divergence(alpha, prior);
    wiring = std::max(wiring, std::abs(variational_loss(alpha, prior, 0, tau,
                                                        VariantConfig::preset("edl")) -
                                       (expected_nll(alpha, 0) + masked_kl / tau)));
    wiring = std::max(wiring, std::abs(variational_loss(alpha, prior, 0, tau,
                                                        VariantConfig::preset("iedl-lik")) -
                                       (expected_mse(alpha, y) + masked_kl / tau)));
    wiring = std::max(wiring, std::abs(variational_loss(alpha, prior, 0, tau,
                                                        VariantConfig::preset("redl")) -
                                       (expected_nll(alpha, 0) + masked_kl / tau)));
    wiring = std::max(wiring, std::abs(variational_loss(alpha, prior, 0, tau,
                                                        VariantConfig::preset("red")) -
                                       (expected_nll(alpha, 0) + masked_kl / tau)));
    wiring = std::max(wiring, std::abs(variational_loss(alpha, prior, 0, tau,
                                                        VariantConfig::preset("gedl")) -
                                       (expected_nll(alpha, 0) + full_kl / tau)));
    // The masked and unmasked KL genuinely differ here, so the check bites.
    const bool distinct = std::abs(masked_kl - full_kl) > 1e-3;
    out.push_back(CheckResult{"evidential.preset_wiring", wiring <= 1e-12 && distinct, wiring,
                              1e-12, "data term and KL masking per preset"});
  }

  // Schedule shapes.
  {
    const std::vector<double> no_evidence(10, 0.0);
    double sched = std::abs(gedl_prior_strength(no_evidence, 10, 0.5) - 10.0);
    std::vector<double> e(10, 1e5);  // sum 1e6
    sched = std::max(sched, std::abs(gedl_prior_strength(e, 10, 0.5) - 0.5));
    std::vector<double> e1(10, 0.1);  // sum 1
    sched = std::max(sched, std::abs(gedl_prior_strength(e1, 10, 0.5) - 15.0 / 11.0));
    out.push_back(bound("evidential.prior_strength_values", sched, 1e-3,
                        "endpoints and worked value"));

    bool monotone = true, bounded = true;
    for (double c_w : {0.5, 20.0}) {
      double prev = gedl_prior_strength(std::vector<double>{0.0, 0.0}, 10, c_w);
      for (int i = 1; i <= 200; ++i) {
        const double total = 0.05 * static_cast<double>(i * i);
        const double w = gedl_prior_strength(std::vector<double>{total, 0.0}, 10, c_w);
        if (c_w < 10.0 ? w >= prev : w <= prev) monotone = false;
        if (w < std::min(10.0, c_w) - 1e-12 || w > std::max(10.0, c_w) + 1e-12) bounded = false;
        prev = w;
      }
    }
    out.push_back(CheckResult{"evidential.prior_strength_monotone_bounded", monotone && bounded,
                              monotone && bounded ? 1.0 : 0.0, 1.0,
                              "strictly monotone in sum(e), between K and C_w"});

    double tau_vals = std::abs(gedl_tau_schedule(50.0, 100.0) - 2.0);
    tau_vals = std::max(tau_vals, std::abs(gedl_tau_schedule(200.0, 100.0) - 1.0));
    tau_vals = std::max(tau_vals, std::abs(gedl_tau_schedule(100.0, 100.0) - 1.0));
    out.push_back(bound("evidential.tau_schedule_values", tau_vals, 1e-12));

    bool tau_monotone = true;
    double prev_tau = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 500; ++i) {
      const double tau = gedl_tau_schedule(0.5 * static_cast<double>(i), 100.0);
      if (tau > prev_tau + 1e-15 || tau < 1.0) tau_monotone = false;
      prev_tau = tau;
    }
    out.push_back(CheckResult{"evidential.tau_schedule_monotone", tau_monotone,
                              tau_monotone ? 1.0 : 0.0, 1.0, "nonincreasing and >= 1"});

    double anneal = std::abs(legacy_tau_anneal(0, 10) - 0.0);
    anneal = std::max(anneal, std::abs(legacy_tau_anneal(5, 10) - 0.5));
    anneal = std::max(anneal, std::abs(legacy_tau_anneal(25, 10) - 1.0));
    out.push_back(bound("evidential.anneal_values", anneal, 1e-15));
  }
  return out;
}

// ---- uncertainty measures --------------------------------------------------

inline std::vector<CheckResult> verify_uncertainty(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed + 4, SeedStream::oracle);
  std::uniform_real_distribution<double> alpha_dist(0.2, 20.0);

  out.push_back(bound("uncertainty.mi_worked_value",
                      std::abs(mutual_information(DirichletParams({1.0, 1.0})) -
                               (std::log(2.0) - 0.5)),
                      1e-12));

  // Monte Carlo route: H(sample mean) - mean entropy.
  {
    const DirichletParams d({1.0, 1.0});
    double acc_entropy = 0.0, acc_m = 0.0;
    for (std::size_t s = 0; s < opt.mc_samples; ++s) {
      const auto pi = sample(d, rng);
      for (double p : pi) acc_entropy -= p * std::log(std::max(p, 1e-300));
      acc_m += pi[0];
    }
    const double n = static_cast<double>(opt.mc_samples);
    const double m = acc_m / n;
    const double h_mean = -(m * std::log(m) + (1.0 - m) * std::log(1.0 - m));
    const double mc = h_mean - acc_entropy / n;
    out.push_back(bound("uncertainty.mi_vs_mc",
                        std::abs(mc - mutual_information(d)), 5e-3));
  }

  double mi_min = std::numeric_limits<double>::infinity();
  double var_ident = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(2 + i % 9);
    for (double& v : a) v = alpha_dist(rng);
    const DirichletParams d(a);
    mi_min = std::min(mi_min, mutual_information(d));
    double per_component = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) per_component += variance(d, k);
    var_ident = std::max(var_ident, std::abs(per_component - variance_sum(d)));
  }
  out.push_back(CheckResult{"uncertainty.mi_nonnegative", mi_min >= -1e-12, mi_min, 0.0,
                            "min MI over random parameters"});
  out.push_back(bound("uncertainty.variance_sum_identity", var_ident, 1e-12));

  // Asymptotic law: error against (K-1)/(2S) shrinks ~100x per decade of S.
  for (std::size_t k_classes : {std::size_t{2}, std::size_t{10}}) {
    std::vector<double> errors;
    for (double s : {1e2, 1e3, 1e4, 1e5}) {
      const DirichletParams d(
          std::vector<double>(k_classes, s / static_cast<double>(k_classes)));
      errors.push_back(std::abs(mutual_information(d) - asymptotic_mi(d)));
    }
    double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      const double ratio = errors[i] / errors[i + 1];
      ratio_lo = std::min(ratio_lo, ratio);
      ratio_hi = std::max(ratio_hi, ratio);
    }
    out.push_back(verify_detail::in_range(
        "uncertainty.mi_quadratic_decay_k" + std::to_string(k_classes), ratio_lo, 80.0, 120.0,
        "decade error ratios, max " + std::to_string(ratio_hi)));
    if (ratio_hi > 120.0 || ratio_lo < 80.0) out.back().pass = false;
  }
  out.push_back(bound("uncertainty.mi_500_500",
                      std::abs(mutual_information(DirichletParams({500.0, 500.0})) - 5e-4),
                      2e-6));

  // Doubling alpha at S >= 100 halves the total variance to first order.
  {
    double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> a(2 + i % 9);
      for (double& v : a) v = 10.0 + alpha_dist(rng) * 5.0;
      double s = 0.0;
      for (double v : a) s += v;
      const double scale = std::max(1.0, 100.0 / s);
      for (double& v : a) v *= scale;  // force S >= 100
      std::vector<double> a2(a);
      for (double& v : a2) v *= 2.0;
      const double ratio = variance_sum(DirichletParams(a)) / variance_sum(DirichletParams(a2));
      ratio_lo = std::min(ratio_lo, ratio);
      ratio_hi = std::max(ratio_hi, ratio);
    }
    auto check = verify_detail::in_range("uncertainty.variance_scaling", ratio_lo, 1.9, 2.1,
                                         "max ratio " + std::to_string(ratio_hi));
    if (ratio_hi > 2.1) check.pass = false;
    out.push_back(check);
  }

  // um, mi and var_sum rank a strength sweep identically.
  {
    const std::size_t k_classes = 5;
    std::vector<double> direction;
    {
      const DirichletParams flat(std::vector<double>(k_classes, 1.0));
      Rng dir_rng = make_rng(opt.seed + 5, SeedStream::oracle);
      direction = sample(flat, dir_rng);
    }
    const std::size_t n = 1000;
    std::vector<double> um(n), mi(n), vs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s =
          std::pow(10.0, 4.0 * static_cast<double>(i) / static_cast<double>(n - 1));
      std::vector<double> a(k_classes);
      for (std::size_t k = 0; k < k_classes; ++k) a[k] = s * direction[k];
      const DirichletParams d(a);
      const UncertaintyRecord rec = score(d, 3.0);
      um[i] = rec.um;
      mi[i] = rec.mi;
      vs[i] = rec.var_sum;
    }
    auto ranks = [](const std::vector<double>& v) {
      std::vector<std::size_t> idx(v.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
      return idx;
    };
    const auto r_um = ranks(um), r_mi = ranks(mi), r_vs = ranks(vs);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (r_um[i] != r_mi[i] || r_um[i] != r_vs[i]) ++mismatches;
    }
    out.push_back(CheckResult{"uncertainty.rank_agreement", mismatches == 0,
                              static_cast<double>(mismatches), 0.0,
                              "um/mi/var_sum orderings over a strength sweep"});
  }
  return out;
}

// ---- gradients and the network --------------------------------------------

inline std::vector<CheckResult> verify_gradients(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  Rng rng = make_rng(opt.seed + 6, SeedStream::oracle);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // loss_grad_alpha against central differences, per preset.
  for (const auto& name : VariantConfig::preset_names()) {
    const VariantConfig cfg = VariantConfig::preset(name);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t k_classes = 2 + trial % 9;
      const BaseRate a = BaseRate::uniform(k_classes);
      std::vector<double> evidence(k_classes);
      for (double& e : evidence) e = unit(rng) * 5.0;
      const double w = prior_strength_for(evidence, k_classes, cfg);
      const DirichletParams alpha = evidence_to_alpha(evidence, w, a);
      const DirichletParams prior =
          evidence_to_alpha(std::vector<double>(k_classes, 0.0), w, a);
      const std::size_t label = trial % k_classes;
      const double tau = 0.5 + unit(rng) * 19.5;

      const auto analytic = loss_grad_alpha(alpha, prior, label, tau, cfg);
      std::vector<double> fd(k_classes);
      for (std::size_t j = 0; j < k_classes; ++j) {
        const double h = 1e-4 * std::max(1.0, std::abs(alpha[j]));
        std::vector<double> hi = alpha.alpha(), lo = alpha.alpha();
        hi[j] += h;
        lo[j] -= h;
        fd[j] = (variational_loss(DirichletParams(hi), prior, label, tau, cfg) -
                 variational_loss(DirichletParams(lo), prior, label, tau, cfg)) /
                (2.0 * h);
      }
      worst = std::max(worst, verify_detail::rel_error(fd, analytic));
    }
    out.push_back(bound("nnet.loss_grad_alpha_fd." + std::string(name), worst, 1e-3,
                        "100 random cases"));
  }

  // tau -> infinity kills the KL part of the gradient.
  {
    const VariantConfig cfg = VariantConfig::preset("gedl");
    const DirichletParams alpha({2.0, 5.0, 1.0}), prior({0.5, 0.5, 0.5});
    const auto g = loss_grad_alpha(alpha, prior, 0, 1e14, cfg);
    std::vector<double> data_only(3, 0.0);
    const double psi1_s = trigamma(alpha.strength());
    for (auto& v : data_only) v = psi1_s;
    data_only[0] -= trigamma(alpha[0]);
    out.push_back(bound("nnet.loss_grad_tau_limit", verify_detail::rel_error(g, data_only), 1e-9));
  }

  // End-to-end parameter gradients on a small model, every preset.
  for (const auto& name : VariantConfig::preset_names()) {
    const VariantConfig cfg = VariantConfig::preset(name);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Rng model_rng = make_rng(opt.seed + 7 + trial, SeedStream::model_init);
      MlpModel model = MlpModel::init(2, {4}, 3, model_rng);
      const std::vector<double> x = {unit(rng) * 2.0 - 1.0, unit(rng) * 2.0 - 1.0};
      const std::size_t label = trial % 3;
      const double kl_weight = 0.25 + unit(rng) * 0.75;
      const BaseRate a = BaseRate::uniform(3);

      // Stop-gradient: W is computed once from the base evidence and then
      // held fixed for both the analytic path and the finite differences.
      GradientTape tape;
      const auto evidence0 = forward(model, x, &tape);
      const double w = prior_strength_for(evidence0, 3, cfg);
      const DirichletParams prior = evidence_to_alpha(std::vector<double>(3, 0.0), w, a);

      auto loss_at = [&](const MlpModel& m) {
        const auto e = forward(m, x);
        const DirichletParams alpha = evidence_to_alpha(e, w, a);
        return data_term(alpha, label, cfg) + kl_weight * kl_term(alpha, prior, label, cfg);
      };

      const DirichletParams alpha0 = evidence_to_alpha(evidence0, w, a);
      const auto grad_alpha = weighted_loss_grad_alpha(alpha0, prior, label, kl_weight, cfg);
      const ParamGrads analytic = backward(model, tape, grad_alpha);

      std::vector<double> flat_an, flat_fd;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
          const double h = 1e-4 * std::max(1.0, std::abs(layer.weight.data[i]));
          const double orig = layer.weight.data[i];
          layer.weight.data[i] = orig + h;
          const double up = loss_at(model);
          layer.weight.data[i] = orig - h;
          const double down = loss_at(model);
          layer.weight.data[i] = orig;
          flat_fd.push_back((up - down) / (2.0 * h));
          flat_an.push_back(analytic.weight[l].data[i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          const double h = 1e-4;
          const double orig = layer.bias[i];
          layer.bias[i] = orig + h;
          const double up = loss_at(model);
          layer.bias[i] = orig - h;
          const double down = loss_at(model);
          layer.bias[i] = orig;
          flat_fd.push_back((up - down) / (2.0 * h));
          flat_an.push_back(analytic.bias[l][i]);
        }
      }
      worst = std::max(worst, verify_detail::rel_error(flat_fd, flat_an));
    }
    out.push_back(bound("nnet.model_grad_fd." + std::string(name), worst, 1e-3,
                        "2-4-3 model, 10 random cases"));
  }
  return out;
}

inline std::vector<CheckResult> verify_nnet(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;

  // Softplus tails.
  double sp = std::abs(softplus(31.0) - 31.0);
  sp = std::max(sp, std::abs(softplus(1e4) - 1e4));
  bool sp_ok = std::isfinite(softplus(1e4)) && std::isfinite(softplus(-1e4)) &&
               softplus(-1e4) >= 0.0;
  out.push_back(CheckResult{"nnet.softplus_tails", sp <= 1e-12 && sp_ok, sp, 1e-12,
                            "identity above 30, no overflow at |z| = 1e4"});

  // Zeroed model emits softplus(0) = ln 2 everywhere.
  {
    Rng rng = make_rng(opt.seed, SeedStream::model_init);
    MlpModel model = MlpModel::init(2, {4}, 3, rng);
    for (auto& layer : model.layers) {
      std::fill(layer.weight.data.begin(), layer.weight.data.end(), 0.0);
      std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    const auto e = forward(model, std::vector<double>{0.7, -0.3});
    double dev = 0.0;
    for (double v : e) dev = std::max(dev, std::abs(v - std::log(2.0)));
    out.push_back(bound("nnet.forward_zero_model", dev, 1e-15));
  }

  // Backward is linear in the upstream gradient.
  {
    Rng rng = make_rng(opt.seed + 8, SeedStream::model_init);
    MlpModel model = MlpModel::init(2, {4}, 3, rng);
    GradientTape tape;
    forward(model, std::vector<double>{0.4, -1.2}, &tape);
    const std::vector<double> g = {0.3, -0.7, 1.1};
    std::vector<double> g2(g);
    for (double& v : g2) v *= 2.0;
    const ParamGrads once = backward(model, tape, g);
    const ParamGrads twice = backward(model, tape, g2);
    const ParamGrads zero = backward(model, tape, std::vector<double>{0.0, 0.0, 0.0});
    double dev = 0.0, zero_dev = 0.0;
    for (std::size_t l = 0; l < once.weight.size(); ++l) {
      for (std::size_t i = 0; i < once.weight[l].data.size(); ++i) {
        dev = std::max(dev, std::abs(twice.weight[l].data[i] - 2.0 * once.weight[l].data[i]));
        zero_dev = std::max(zero_dev, std::abs(zero.weight[l].data[i]));
      }
    }
    out.push_back(bound("nnet.backward_linearity", std::max(dev, zero_dev), 1e-15));
  }

  // Adam: zero gradient is a fixed point; steady constant-gradient steps
  // approach the learning rate; the first step is -lr * sign(g).
  {
    Rng rng = make_rng(opt.seed + 9, SeedStream::model_init);
    MlpModel model = MlpModel::init(2, {2}, 2, rng);
    const MlpModel before = model;
    AdamState adam = AdamState::init(model, 1e-3);
    adam_step(adam, model, ParamGrads::zeros_like(model));
    double dev = 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      for (std::size_t i = 0; i < model.layers[l].weight.data.size(); ++i) {
        dev = std::max(dev, std::abs(model.layers[l].weight.data[i] -
                                     before.layers[l].weight.data[i]));
      }
    }
    out.push_back(bound("nnet.adam_zero_grad_fixed_point", dev, 0.0));

    adam = AdamState::init(model, 1e-3);  // fresh moments for the first-step check
    ParamGrads constant = ParamGrads::zeros_like(model);
    for (auto& w : constant.weight) std::fill(w.data.begin(), w.data.end(), 0.37);
    for (auto& b : constant.bias) std::fill(b.begin(), b.end(), 0.37);
    const double w_before_first = model.layers[0].weight.data[0];
    adam_step(adam, model, constant);
    const double first_step = model.layers[0].weight.data[0] - w_before_first;
    out.push_back(bound("nnet.adam_first_step",
                        std::abs(first_step + adam.learning_rate), 1e-6 * adam.learning_rate,
                        "delta = -lr sign(g)"));
    double last_step = 0.0;
    for (int i = 0; i < 400; ++i) {
      const double w0 = model.layers[0].weight.data[0];
      adam_step(adam, model, constant);
      last_step = model.layers[0].weight.data[0] - w0;
    }
    out.push_back(bound("nnet.adam_steady_step",
                        std::abs(std::abs(last_step) - adam.learning_rate),
                        0.05 * adam.learning_rate, "|delta| -> lr under constant gradient"));
  }

  // Stop-gradient contract: parameter gradients at fixed W match the
  // adaptive-W pipeline gradients bit for bit at the same W value.
  {
    Rng rng = make_rng(opt.seed + 10, SeedStream::model_init);
    MlpModel model = MlpModel::init(2, {4}, 3, rng);
    const std::vector<double> x = {0.9, -0.5};
    const BaseRate a = BaseRate::uniform(3);
    GradientTape tape;
    const auto evidence = forward(model, x, &tape);

    const VariantConfig adaptive = VariantConfig::preset("gedl");
    const double w = prior_strength_for(evidence, 3, adaptive);
    VariantConfig frozen = adaptive;
    frozen.prior_rule = VariantConfig::PriorRule::fixed_constant;
    frozen.w0 = w;

    auto grads_for = [&](const VariantConfig& cfg) {
      const double w_used = prior_strength_for(evidence, 3, cfg);
      const DirichletParams alpha = evidence_to_alpha(evidence, w_used, a);
      const DirichletParams prior = evidence_to_alpha(std::vector<double>(3, 0.0), w_used, a);
      return backward(model, tape, weighted_loss_grad_alpha(alpha, prior, 1, 0.5, cfg));
    };
    const ParamGrads g_adaptive = grads_for(adaptive);
    const ParamGrads g_frozen = grads_for(frozen);
    double dev = 0.0;
    for (std::size_t l = 0; l < g_adaptive.weight.size(); ++l) {
      for (std::size_t i = 0; i < g_adaptive.weight[l].data.size(); ++i) {
        dev = std::max(dev, std::abs(g_adaptive.weight[l].data[i] - g_frozen.weight[l].data[i]));
      }
    }
    out.push_back(bound("nnet.stop_gradient_contract", dev, 0.0,
                        "adaptive W contributes no derivative terms"));
  }

  // Same seed, same trajectory.
  {
    RunConfig cfg;
    cfg.preset = "edl";
    cfg.variant = VariantConfig::preset("edl");
    cfg.epochs = 3;
    cfg.seed = opt.seed;
    cfg.hidden = {8};
    cfg.blobs.n_train = 120;
    cfg.blobs.n_val = 30;
    cfg.blobs.n_test = 30;
    cfg.ring.n = 30;
    cfg.dataset = "blobs";
    const SyntheticDataset ds = cfg.make_dataset();
    const TrainResult a = train(cfg, ds);
    const TrainResult b = train(cfg, ds);
    double dev = 0.0;
    for (std::size_t l = 0; l < a.model.layers.size(); ++l) {
      for (std::size_t i = 0; i < a.model.layers[l].weight.data.size(); ++i) {
        dev = std::max(dev, std::abs(a.model.layers[l].weight.data[i] -
                                     b.model.layers[l].weight.data[i]));
      }
    }
    out.push_back(bound("nnet.training_determinism", dev, 0.0, "bit-identical reruns"));
  }
  return out;
}

// ---- behavioral end-to-end -------------------------------------------------

inline std::vector<CheckResult> verify_behavioral(const VerifyOptions& opt) {
  using verify_detail::bound;
  std::vector<CheckResult> out;
  const double t0 = verify_detail::now_seconds();

  const auto& presets = VariantConfig::preset_names();
  std::vector<std::vector<MetricsReport>> reports(presets.size());
  std::vector<std::vector<TrainResult>> results(presets.size());

  for (std::size_t p = 0; p < presets.size(); ++p) {
    for (int s = 0; s < opt.behavioral_seeds; ++s) {
      RunConfig cfg;
      cfg.preset = presets[p];
      cfg.variant = VariantConfig::preset(presets[p]);
      cfg.epochs = opt.behavioral_epochs;
      cfg.seed = static_cast<std::uint64_t>(s + 1);
      const SyntheticDataset ds = cfg.make_dataset();
      TrainResult result = train(cfg, ds);
      reports[p].push_back(evaluate(result.model, cfg.variant, ds.test_x, ds.test_y, ds.ood_x));
      results[p].push_back(std::move(result));
    }
  }

  std::size_t gedl_idx = 0, edl_idx = 0;
  for (std::size_t p = 0; p < presets.size(); ++p) {
    if (presets[p] == "gedl") gedl_idx = p;
    if (presets[p] == "edl") edl_idx = p;
  }

  for (std::size_t p = 0; p < presets.size(); ++p) {
    double min_acc = 1.0;
    double min_um_gap = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opt.behavioral_seeds; ++s) {
      min_acc = std::min(min_acc, reports[p][s].accuracy);
      double um_id = 0.0, um_ood = 0.0;
      std::size_t n_id = 0, n_ood = 0;
      for (const auto& rec : reports[p][s].records) {
        if (rec.is_ood) {
          um_ood += rec.scores.um;
          ++n_ood;
        } else {
          um_id += rec.scores.um;
          ++n_id;
        }
      }
      min_um_gap = std::min(min_um_gap, um_ood / static_cast<double>(n_ood) -
                                            um_id / static_cast<double>(n_id));
    }
    out.push_back(CheckResult{"behavioral.accuracy." + presets[p], min_acc >= 0.95, min_acc,
                              0.95, "min ID accuracy over seeds (>= tolerance)"});
    out.push_back(CheckResult{"behavioral.um_separation." + presets[p], min_um_gap > 0.0,
                              min_um_gap, 0.0, "min mean UM(OOD) - mean UM(ID)"});
  }

  int wins = 0;
  for (int s = 0; s < opt.behavioral_seeds; ++s) {
    if (reports[gedl_idx][s].ood_um_aupr >= reports[edl_idx][s].ood_um_aupr) ++wins;
  }
  out.push_back(CheckResult{"behavioral.gedl_vs_edl_um_aupr",
                            wins >= opt.behavioral_seeds - 1, static_cast<double>(wins),
                            static_cast<double>(opt.behavioral_seeds - 1),
                            "seeds where GEDL UM-AUPR >= EDL (>= tolerance)"});

  // KL weight caps and the scheduled-tau shape, asserted on the logs.
  double max_weight = 0.0;
  bool tau_ok = true;
  for (std::size_t p = 0; p < presets.size(); ++p) {
    for (const auto& result : results[p]) {
      double prev_tau = std::numeric_limits<double>::infinity();
      for (const auto& e : result.log) {
        max_weight = std::max(max_weight, e.kl_weight);
        if (presets[p] == "gedl") {
          if (e.tau > prev_tau + 1e-12 || e.tau < 1.0 - 1e-12) tau_ok = false;
          prev_tau = e.tau;
        }
      }
    }
  }
  out.push_back(bound("behavioral.kl_weight_cap", max_weight, 1.0 + 1e-12,
                      "per-epoch KL weight never exceeds 1"));
  out.push_back(CheckResult{"behavioral.gedl_tau_log", tau_ok, tau_ok ? 1.0 : 0.0, 1.0,
                            "tau nonincreasing and >= 1 on the training log"});

  // Annealed presets contribute no KL at epoch 0.
  double epoch0_kl = 0.0;
  for (std::size_t p = 0; p < presets.size(); ++p) {
    if (presets[p] == "gedl") continue;
    for (const auto& result : results[p]) {
      if (presets[p] == "red") continue;  // correct samples may carry weight u
      epoch0_kl = std::max(epoch0_kl, std::abs(result.log.front().kl_term));
    }
  }
  out.push_back(bound("behavioral.epoch0_kl_disabled", epoch0_kl, 0.0,
                      "annealed schedule contributes zero KL at epoch 0"));

  out.push_back(bound("behavioral.runtime_seconds", verify_detail::now_seconds() - t0,
                      120.0 * static_cast<double>(opt.behavioral_seeds)));
  return out;
}

inline std::vector<CheckResult> run_verification(const VerifyOptions& opt = {}) {
  std::vector<CheckResult> all;
  auto absorb = [&all](std::vector<CheckResult> group) {
    for (auto& c : group) all.push_back(std::move(c));
  };
  absorb(verify_special_functions(opt));
  absorb(verify_dirichlet_expectations(opt));
  absorb(verify_conjugacy(opt));
  absorb(verify_dirichlet_kl(opt));
  absorb(verify_dirichlet_sampling(opt));
  absorb(verify_evidential(opt));
  absorb(verify_uncertainty(opt));
  absorb(verify_gradients(opt));
  absorb(verify_nnet(opt));
  if (opt.include_behavioral) absorb(verify_behavioral(opt));
  return all;
}

}  // namespace edl

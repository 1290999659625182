#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edl/rng.hpp"
#include "edl/special_functions.hpp"

namespace edl {

// Concentration vector of a Dirichlet distribution. Every component is
// strictly positive and K >= 2; both are enforced at construction so the
// closed forms below never see a pole.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.size() < 2) {
      throw std::invalid_argument("DirichletParams: need at least two components");
    }
    for (double a : alpha_) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("DirichletParams: concentrations must be positive and finite");
      }
    }
  }

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t k) const { return alpha_[k]; }
  const std::vector<double>& alpha() const { return alpha_; }

  double strength() const {
    double s = 0.0;
    for (double a : alpha_) s += a;
    return s;
  }

  bool operator==(const DirichletParams& other) const { return alpha_ == other.alpha_; }

 private:
  std::vector<double> alpha_;
};

// Nonnegative pseudo-counts per class. A one-hot label is the special case
// with a single unit entry.
class CountVector {
 public:
  explicit CountVector(std::vector<double> counts) : n_(std::move(counts)) {
    for (double c : n_) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("CountVector: counts must be nonnegative and finite");
      }
    }
  }

  static CountVector one_hot(std::size_t classes, std::size_t k) {
    if (k >= classes) throw std::out_of_range("CountVector::one_hot: class index out of range");
    std::vector<double> n(classes, 0.0);
    n[k] = 1.0;
    return CountVector(std::move(n));
  }

  std::size_t size() const { return n_.size(); }
  double operator[](std::size_t k) const { return n_[k]; }
  const std::vector<double>& values() const { return n_; }

  bool is_one_hot() const {
    std::size_t ones = 0;
    for (double c : n_) {
      if (c == 1.0) {
        ++ones;
      } else if (c != 0.0) {
        return false;
      }
    }
    return ones == 1;
  }

  // Index of the unit entry; only meaningful for one-hot vectors.
  std::size_t hot_index() const {
    if (!is_one_hot()) throw std::invalid_argument("CountVector: not a one-hot vector");
    for (std::size_t k = 0; k < n_.size(); ++k) {
      if (n_[k] == 1.0) return k;
    }
    return 0;  // unreachable
  }

 private:
  std::vector<double> n_;
};

namespace detail {

inline void require_index(const DirichletParams& d, std::size_t k, const char* fn) {
  if (k >= d.size()) throw std::out_of_range(std::string(fn) + ": class index out of range");
}

inline void require_same_size(std::size_t a, std::size_t b, const char* fn) {
  if (a != b) throw std::invalid_argument(std::string(fn) + ": dimension mismatch");
}

}  // namespace detail

// E[pi] = alpha / S.
inline std::vector<double> mean(const DirichletParams& d) {
  const double s = d.strength();
  std::vector<double> m(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) m[k] = d[k] / s;
  return m;
}

// Var[pi_k] = alpha_k (S - alpha_k) / (S^2 (S + 1)).
inline double variance(const DirichletParams& d, std::size_t k) {
  detail::require_index(d, k, "variance");
  const double s = d.strength();
  return d[k] * (s - d[k]) / (s * s * (s + 1.0));
}

// E[log pi_k] = psi(alpha_k) - psi(S); always negative.
inline double expected_log(const DirichletParams& d, std::size_t k) {
  detail::require_index(d, k, "expected_log");
  return digamma(d[k]) - digamma(d.strength());
}

// E[pi_k log pi_k] = (alpha_k / S) (psi(alpha_k + 1) - psi(S + 1)).
inline double expected_pi_log_pi(const DirichletParams& d, std::size_t k) {
  detail::require_index(d, k, "expected_pi_log_pi");
  const double s = d.strength();
  return d[k] / s * (digamma(d[k] + 1.0) - digamma(s + 1.0));
}

// KL(q || p) = ln B(alpha_p)/B(alpha_q) + sum_k (alpha_q,k - alpha_p,k)(psi(alpha_q,k) - psi(S_q)).
inline double kl_divergence(const DirichletParams& q, const DirichletParams& p) {
  detail::require_same_size(q.size(), p.size(), "kl_divergence");
  const double sq = q.strength();
  const double psi_sq = digamma(sq);
  double acc = log_multivariate_beta(p.alpha()) - log_multivariate_beta(q.alpha());
  for (std::size_t k = 0; k < q.size(); ++k) {
    acc += (q[k] - p[k]) * (digamma(q[k]) - psi_sq);
  }
  return acc;
}

// One draw from Dir(alpha): K independent Gamma(alpha_k, 1) variates,
// normalized. Covers all alpha > 0.
inline std::vector<double> sample(const DirichletParams& d, Rng& rng) {
  std::vector<double> pi(d.size());
  double total = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::gamma_distribution<double> gamma(d[k], 1.0);
    pi[k] = gamma(rng);
    total += pi[k];
  }
  // A zero total is possible only when every gamma draw underflows; retry.
  if (total <= 0.0) return sample(d, rng);
  for (double& v : pi) v /= total;
  return pi;
}

// Posterior alpha = alpha_0 + n.
inline DirichletParams conjugate_update(const DirichletParams& prior, const CountVector& counts) {
  detail::require_same_size(prior.size(), counts.size(), "conjugate_update");
  std::vector<double> alpha(prior.size());
  for (std::size_t k = 0; k < prior.size(); ++k) alpha[k] = prior[k] + counts[k];
  return DirichletParams(std::move(alpha));
}

// Tempered posterior alpha = alpha_0 + tau * n; tau = 1 is the classical update.
inline DirichletParams tempered_update(const DirichletParams& prior, const CountVector& label,
                                       double tau) {
  detail::require_same_size(prior.size(), label.size(), "tempered_update");
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("tempered_update: tau must be positive and finite");
  }
  std::vector<double> alpha(prior.size());
  for (std::size_t k = 0; k < prior.size(); ++k) alpha[k] = prior[k] + tau * label[k];
  return DirichletParams(std::move(alpha));
}

}  // namespace edl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "edl/dirichlet.hpp"

namespace edl {

// Per-sample uncertainty scores. mp is the max predictive probability,
// um the uncertainty mass W/S, mi the label/probability mutual information
// in nats, var_sum the total marginal variance.
struct UncertaintyRecord {
  double mp = 0.0;
  double um = 0.0;
  double mi = 0.0;
  double var_sum = 0.0;
};

// I(y; pi) = H(E[pi]) - E[H(pi)], both entropies in nats. The expected
// entropy uses the closed form E[pi_k log pi_k]; no sampling involved.
inline double mutual_information(const DirichletParams& alpha) {
  const double s = alpha.strength();
  double acc = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double m = alpha[k] / s;
    acc += -m * std::log(m) + expected_pi_log_pi(alpha, k);
  }
  return acc;
}

// Leading term (K - 1) / (2S) of the mutual information as S grows.
inline double asymptotic_mi(const DirichletParams& alpha) {
  return (static_cast<double>(alpha.size()) - 1.0) / (2.0 * alpha.strength());
}

// sum_k Var[pi_k] = sum_k m_k (1 - m_k) / (S + 1).
inline double variance_sum(const DirichletParams& alpha) {
  const double s = alpha.strength();
  double acc = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double m = alpha[k] / s;
    acc += m * (1.0 - m) / (s + 1.0);
  }
  return acc;
}

inline UncertaintyRecord score(const DirichletParams& alpha, double prior_strength) {
  const double s = alpha.strength();
  double mp = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) mp = std::max(mp, alpha[k] / s);
  return UncertaintyRecord{mp, prior_strength / s, mutual_information(alpha),
                           variance_sum(alpha)};
}

}  // namespace edl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "edl/uncertainty.hpp"

namespace edl {

// Area under the precision-recall curve: step interpolation over the list
// ranked by descending score, with tied scores entering as one group.
inline double aupr(std::span<const double> scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) throw std::invalid_argument("aupr: size mismatch");
  std::size_t total_pos = 0;
  for (bool p : positives) total_pos += p ? 1 : 0;
  if (total_pos == 0 || total_pos == scores.size()) {
    throw std::invalid_argument("aupr: need at least one positive and one negative");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (positives[order[j]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

// Expected calibration error over equal-width confidence bins on the max
// predictive probability.
inline double ece(std::span<const std::vector<double>> probs, std::span<const int> labels,
                  std::size_t bins = 15) {
  if (probs.size() != labels.size()) throw std::invalid_argument("ece: size mismatch");
  if (probs.empty()) throw std::invalid_argument("ece: empty input");
  if (bins == 0) throw std::invalid_argument("ece: need at least one bin");
  std::vector<double> bin_conf(bins, 0.0), bin_acc(bins, 0.0);
  std::vector<std::size_t> bin_count(bins, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& p = probs[i];
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    const double conf = p[pred];
    std::size_t b = static_cast<std::size_t>(conf * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;  // conf == 1.0 lands in the top bin
    bin_conf[b] += conf;
    bin_acc[b] += pred == static_cast<std::size_t>(labels[i]) ? 1.0 : 0.0;
    bin_count[b] += 1;
  }
  double acc = 0.0;
  const double n = static_cast<double>(probs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    if (bin_count[b] == 0) continue;
    const double c = static_cast<double>(bin_count[b]);
    acc += (c / n) * std::abs(bin_acc[b] / c - bin_conf[b] / c);
  }
  return acc;
}

// Mean over samples of sum_k (p_k - y_k)^2.
inline double brier(std::span<const std::vector<double>> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("brier: size mismatch");
  if (probs.empty()) throw std::invalid_argument("brier: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t k = 0; k < probs[i].size(); ++k) {
      const double y = static_cast<std::size_t>(labels[i]) == k ? 1.0 : 0.0;
      const double d = probs[i][k] - y;
      acc += d * d;
    }
  }
  return acc / static_cast<double>(probs.size());
}

// One scored sample, as written to records.csv.
struct SampleRecord {
  UncertaintyRecord scores;
  int label = -1;  // -1 for OOD rows
  bool is_ood = false;
};

struct MetricsReport {
  double accuracy = 0.0;
  double conf_mp_aupr = 0.0;  // ID only: correct = positive, MP = score
  double ood_mp_aupr = 0.0;   // ID = positive, MP = score
  double ood_um_aupr = 0.0;   // ID = positive, 1 - UM = score
  double ece = 0.0;
  double brier = 0.0;
  std::vector<SampleRecord> records;
};

}  // namespace edl

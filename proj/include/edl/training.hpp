#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edl/dataset.hpp"
#include "edl/evidential.hpp"
#include "edl/metrics.hpp"
#include "edl/nnet.hpp"
#include "edl/rng.hpp"
#include "edl/uncertainty.hpp"

namespace edl {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 128;
};

struct RunConfig {
  std::string preset = "gedl";
  VariantConfig variant = VariantConfig::preset("gedl");
  int epochs = 50;
  std::uint64_t seed = 1;
  std::string dataset = "bench-v1";  // bench-v1 | blobs | moons
  BlobsSpec blobs;
  RingSpec ring;
  MoonsSpec moons;
  std::vector<std::size_t> hidden = {64, 64};
  OptimizerConfig optimizer;
  std::string out_dir = "out";

  void validate() const {
    if (epochs <= 0) throw std::invalid_argument("config: epochs must be positive");
    if (optimizer.batch_size == 0) throw std::invalid_argument("config: batch size must be positive");
    if (!(optimizer.learning_rate > 0.0)) {
      throw std::invalid_argument("config: learning rate must be positive");
    }
    if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
        !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
      throw std::invalid_argument("config: Adam betas must lie in [0, 1)");
    }
    if (dataset != "bench-v1" && dataset != "blobs" && dataset != "moons") {
      throw std::invalid_argument("config: unknown dataset '" + dataset + "'");
    }
    if (!(variant.c_w > 0.0) || !(variant.c_tau > 0.0) || !(variant.w0 > 0.0) || variant.t0 <= 0) {
      throw std::invalid_argument("config: schedule constants must be positive");
    }
  }

  SyntheticDataset make_dataset() const {
    if (dataset == "bench-v1") return bench_v1(seed);
    if (dataset == "moons") return make_moons_with_ring(moons, ring, seed);
    return make_blobs_with_ring(blobs, ring, seed);
  }
};

struct EpochLog {
  int epoch = 0;
  double data_term = 0.0;  // mean data term
  double kl_term = 0.0;    // mean weighted KL contribution
  double total = 0.0;
  double kl_weight = 0.0;  // mean over samples (constant within epoch except for red)
  double tau = 0.0;        // inf when the KL term was disabled
  double w_mean = 0.0, w_min = 0.0, w_max = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLog> log;
};

namespace detail {

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

[[noreturn]] inline void abort_on_nan(const char* what, int epoch, std::size_t batch_start,
                                      double data_sum, double kl_sum, double mean_strength,
                                      double kl_weight) {
  std::ostringstream msg;
  msg << "train: non-finite " << what << " at epoch " << epoch << ", batch offset " << batch_start
      << " (data=" << data_sum << ", kl=" << kl_sum << ", mean S=" << mean_strength
      << ", kl weight=" << kl_weight << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace detail

// Mini-batch training of the evidential head. The scheduled-tau accumulator
// adds the batch-mean Dirichlet strength once per optimizer step, and both
// the prior strength and tau enter the gradients as constants.
inline TrainResult train(const RunConfig& cfg, const SyntheticDataset& ds) {
  cfg.validate();
  if (ds.train_x.rows == 0) throw std::invalid_argument("train: empty training split");

  Rng init_rng = make_rng(cfg.seed, SeedStream::model_init);
  MlpModel model = MlpModel::init(ds.dim, cfg.hidden, ds.classes, init_rng);
  AdamState adam = AdamState::init(model, cfg.optimizer.learning_rate);
  adam.beta1 = cfg.optimizer.beta1;
  adam.beta2 = cfg.optimizer.beta2;
  adam.epsilon = cfg.optimizer.epsilon;

  Rng shuffle_rng = make_rng(cfg.seed, SeedStream::shuffle);
  const BaseRate base_rate = BaseRate::uniform(ds.classes);
  const VariantConfig& variant = cfg.variant;
  const bool scheduled = variant.tau_rule == VariantConfig::TauRule::strength_scheduled;

  std::vector<std::size_t> order(ds.train_x.rows);
  std::iota(order.begin(), order.end(), 0);

  double cumulative_strength = 0.0;  // sum over steps of batch-mean S
  std::vector<EpochLog> log;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double annealed_weight = legacy_tau_anneal(epoch, variant.t0);

    EpochLog entry;
    entry.epoch = epoch;
    entry.w_min = std::numeric_limits<double>::infinity();
    entry.w_max = -std::numeric_limits<double>::infinity();
    double epoch_weight_sum = 0.0;
    double epoch_tau = std::numeric_limits<double>::infinity();
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.optimizer.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.optimizer.batch_size);
      const std::size_t batch = end - start;

      // Forward pass for the whole batch first: the scheduled tau depends on
      // the batch-mean strength before any gradient is formed.
      std::vector<GradientTape> tapes(batch);
      std::vector<DirichletParams> alphas;
      std::vector<double> strengths(batch), weights(batch);
      alphas.reserve(batch);
      double strength_sum = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t i = order[start + b];
        const auto evidence = forward(model, ds.train_x.row(i), &tapes[b]);
        for (double e : evidence) {
          if (!std::isfinite(e)) {
            detail::abort_on_nan("evidence", epoch, start, e, 0.0, strength_sum, annealed_weight);
          }
        }
        weights[b] = prior_strength_for(evidence, ds.classes, variant);
        alphas.push_back(evidence_to_alpha(evidence, weights[b], base_rate));
        strengths[b] = alphas[b].strength();
        strength_sum += strengths[b];
        entry.w_mean += weights[b];
        entry.w_min = std::min(entry.w_min, weights[b]);
        entry.w_max = std::max(entry.w_max, weights[b]);
      }
      const double mean_strength = strength_sum / static_cast<double>(batch);

      double batch_weight = annealed_weight;
      if (scheduled) {
        cumulative_strength += mean_strength;
        epoch_tau = gedl_tau_schedule(cumulative_strength, variant.c_tau);
        batch_weight = 1.0 / epoch_tau;
      }

      ParamGrads grads = ParamGrads::zeros_like(model);
      double data_sum = 0.0, kl_sum = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t i = order[start + b];
        const std::size_t label = static_cast<std::size_t>(ds.train_y[i]);
        const DirichletParams& alpha = alphas[b];
        const DirichletParams prior =
            evidence_to_alpha(std::vector<double>(ds.classes, 0.0), weights[b], base_rate);

        const std::vector<double> predictive = mean(alpha);
        const bool hit = detail::argmax(predictive) == label;
        correct += hit ? 1 : 0;

        double kl_weight = batch_weight;
        if (variant.tau_rule == VariantConfig::TauRule::correct_uses_uncertainty) {
          const SubjectiveOpinion opinion = alpha_to_opinion(alpha, weights[b], base_rate);
          kl_weight = red_tau_weight(opinion, hit, epoch, variant.t0);
        }
        epoch_weight_sum += kl_weight;

        data_sum += data_term(alpha, label, variant);
        if (kl_weight > 0.0) kl_sum += kl_weight * kl_term(alpha, prior, label, variant);

        const std::vector<double> grad_alpha =
            weighted_loss_grad_alpha(alpha, prior, label, kl_weight, variant);
        grads.add(backward(model, tapes[b], grad_alpha));
      }
      if (!std::isfinite(data_sum) || !std::isfinite(kl_sum)) {
        detail::abort_on_nan("loss", epoch, start, data_sum, kl_sum, mean_strength, batch_weight);
      }
      grads.scale(1.0 / static_cast<double>(batch));
      adam_step(adam, model, grads);

      entry.data_term += data_sum;
      entry.kl_term += kl_sum;
    }

    const double n = static_cast<double>(order.size());
    entry.data_term /= n;
    entry.kl_term /= n;
    entry.total = entry.data_term + entry.kl_term;
    entry.w_mean /= n;
    entry.kl_weight = epoch_weight_sum / n;
    entry.tau = scheduled ? epoch_tau
                          : (entry.kl_weight > 0.0 ? 1.0 / entry.kl_weight
                                                   : std::numeric_limits<double>::infinity());
    entry.train_accuracy = static_cast<double>(correct) / n;
    log.push_back(entry);
  }
  return TrainResult{std::move(model), std::move(log)};
}

// Scores one dataset split through the trained model: alpha, the record, and
// the predictive vector per sample.
inline std::vector<SampleRecord> score_split(const MlpModel& model, const VariantConfig& variant,
                                             const DataMatrix& x, const std::vector<int>* labels,
                                             bool is_ood,
                                             std::vector<std::vector<double>>* probs_out = nullptr) {
  const BaseRate base_rate = BaseRate::uniform(model.classes);
  std::vector<SampleRecord> records;
  records.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto evidence = forward(model, x.row(i));
    const double w = prior_strength_for(evidence, model.classes, variant);
    const DirichletParams alpha = evidence_to_alpha(evidence, w, base_rate);
    SampleRecord rec;
    rec.scores = score(alpha, w);
    rec.label = labels ? (*labels)[i] : -1;
    rec.is_ood = is_ood;
    records.push_back(rec);
    if (probs_out) probs_out->push_back(mean(alpha));
  }
  return records;
}

// Metrics per the usual OOD protocol: in-distribution samples are the
// positive class, and scores are oriented so larger means "more ID"
// (MP directly, 1 - UM for the uncertainty-mass column).
inline MetricsReport evaluate(const MlpModel& model, const VariantConfig& variant,
                              const DataMatrix& id_x, const std::vector<int>& id_y,
                              const DataMatrix& ood_x) {
  if (id_x.rows == 0 || ood_x.rows == 0) throw std::invalid_argument("evaluate: empty split");
  MetricsReport report;
  std::vector<std::vector<double>> id_probs;
  report.records = score_split(model, variant, id_x, &id_y, false, &id_probs);
  const std::vector<SampleRecord> ood_records = score_split(model, variant, ood_x, nullptr, true);
  report.records.insert(report.records.end(), ood_records.begin(), ood_records.end());

  std::size_t correct = 0;
  std::vector<bool> id_correct(id_x.rows);
  for (std::size_t i = 0; i < id_x.rows; ++i) {
    const bool hit = detail::argmax(id_probs[i]) == static_cast<std::size_t>(id_y[i]);
    id_correct[i] = hit;
    correct += hit ? 1 : 0;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(id_x.rows);
  report.ece = ece(id_probs, id_y);
  report.brier = brier(id_probs, id_y);

  // Confidence quality on ID alone: correctly classified = positive.
  if (correct == 0 || correct == id_x.rows) {
    report.conf_mp_aupr = correct == 0 ? 0.0 : 1.0;  // degenerate: precision is constant
  } else {
    std::vector<double> scores(id_x.rows);
    std::vector<bool> positives(id_x.rows);
    for (std::size_t i = 0; i < id_x.rows; ++i) {
      scores[i] = report.records[i].scores.mp;
      positives[i] = id_correct[i];
    }
    report.conf_mp_aupr = aupr(scores, positives);
  }

  std::vector<double> mp_scores, um_scores;
  std::vector<bool> is_id;
  for (const auto& rec : report.records) {
    mp_scores.push_back(rec.scores.mp);
    um_scores.push_back(1.0 - rec.scores.um);
    is_id.push_back(!rec.is_ood);
  }
  report.ood_mp_aupr = aupr(mp_scores, is_id);
  report.ood_um_aupr = aupr(um_scores, is_id);
  return report;
}

struct SeverityRow {
  double severity = 0.0;
  double mean_um = 0.0;
  double mean_mi = 0.0;
  double mean_var_sum = 0.0;
};

// Mean uncertainty on the test split under increasing feature noise.
// Severity 0 reuses the clean features bit for bit.
inline std::vector<SeverityRow> severity_study(const MlpModel& model,
                                               const VariantConfig& variant,
                                               const SyntheticDataset& ds,
                                               std::span<const double> severities,
                                               std::uint64_t seed) {
  std::vector<SeverityRow> rows;
  for (std::size_t s = 0; s < severities.size(); ++s) {
    Rng rng = make_rng(seed + s, SeedStream::noise);
    const DataMatrix perturbed = perturb(ds.test_x, severities[s], rng);
    const auto records = score_split(model, variant, perturbed, &ds.test_y, false);
    SeverityRow row;
    row.severity = severities[s];
    for (const auto& rec : records) {
      row.mean_um += rec.scores.um;
      row.mean_mi += rec.scores.mi;
      row.mean_var_sum += rec.scores.var_sum;
    }
    const double n = static_cast<double>(records.size());
    row.mean_um /= n;
    row.mean_mi /= n;
    row.mean_var_sum /= n;
    rows.push_back(row);
  }
  return rows;
}

struct SweepRow {
  double c_w = 0.0;
  double c_tau = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  MetricsReport report;
};

// One train+evaluate per grid cell; a failing cell is recorded and skipped,
// the rest of the grid still runs.
inline std::vector<SweepRow> sweep(const RunConfig& base, std::span<const double> c_w_grid,
                                   std::span<const double> c_tau_grid) {
  if (c_w_grid.empty() || c_tau_grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  std::size_t cell = 0;
  for (double c_w : c_w_grid) {
    for (double c_tau : c_tau_grid) {
      SweepRow row;
      row.c_w = c_w;
      row.c_tau = c_tau;
      row.seed = base.seed + cell;
      try {
        RunConfig cfg = base;
        cfg.seed = row.seed;
        cfg.variant.c_w = c_w;
        cfg.variant.c_tau = c_tau;
        const SyntheticDataset ds = cfg.make_dataset();
        const TrainResult result = train(cfg, ds);
        row.report = evaluate(result.model, cfg.variant, ds.test_x, ds.test_y, ds.ood_x);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
      ++cell;
    }
  }
  return rows;
}

// ---- run artifacts -------------------------------------------------------

inline void write_training_log_csv(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,data_term,kl_term,total,kl_weight,tau,w_mean,w_min,w_max,train_accuracy\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << e.data_term << ',' << e.kl_term << ',' << e.total << ','
        << e.kl_weight << ',' << e.tau << ',' << e.w_mean << ',' << e.w_min << ',' << e.w_max
        << ',' << e.train_accuracy << '\n';
  }
}

inline void write_records_csv(const std::string& path, const std::vector<SampleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "mp,um,mi,var_sum,label,is_ood\n";
  out.precision(12);
  for (const auto& rec : records) {
    out << rec.scores.mp << ',' << rec.scores.um << ',' << rec.scores.mi << ','
        << rec.scores.var_sum << ',' << rec.label << ',' << (rec.is_ood ? 1 : 0) << '\n';
  }
}

inline nlohmann::json metrics_to_json(const MetricsReport& report) {
  return nlohmann::json{{"accuracy", report.accuracy},
                        {"conf_mp_aupr", report.conf_mp_aupr},
                        {"ood_mp_aupr", report.ood_mp_aupr},
                        {"ood_um_aupr", report.ood_um_aupr},
                        {"ece", report.ece},
                        {"brier", report.brier}};
}

inline void write_metrics_json(const std::string& path, const MetricsReport& report,
                               const nlohmann::json& meta = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  nlohmann::json j = metrics_to_json(report);
  if (!meta.is_null()) j["run"] = meta;
  out << j.dump(1) << "\n";
}

inline void write_severity_csv(const std::string& path, const std::vector<SeverityRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "severity,mean_um,mean_mi,mean_var_sum\n";
  out.precision(12);
  for (const auto& row : rows) {
    out << row.severity << ',' << row.mean_um << ',' << row.mean_mi << ',' << row.mean_var_sum
        << '\n';
  }
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "c_w,c_tau,seed,status,accuracy,conf_mp_aupr,ood_mp_aupr,ood_um_aupr,ece,brier\n";
  for (const auto& row : rows) {
    out << row.c_w << ',' << row.c_tau << ',' << row.seed << ','
        << (row.failed ? "failed" : "ok") << ',';
    if (row.failed) {
      out << ",,,,,\n";
    } else {
      const auto& r = row.report;
      out << r.accuracy << ',' << r.conf_mp_aupr << ',' << r.ood_mp_aupr << ',' << r.ood_um_aupr
          << ',' << r.ece << ',' << r.brier << '\n';
    }
  }
}

}  // namespace edl

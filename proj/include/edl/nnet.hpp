#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "edl/evidential.hpp"
#include "edl/rng.hpp"
#include "edl/special_functions.hpp"

namespace edl {

// Overflow-safe softplus; softplus(z) = z to within 1e-13 for z > 30.
inline double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

// d softplus / dz, evaluated without overflow on either tail.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Activation { relu, identity };

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::relu;
};

// Dense net with ReLU hidden layers, an identity output layer, and a
// softplus evidence head on top.
struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t classes = 0;
  std::vector<DenseLayer> layers;

  // He-style uniform init, limit sqrt(6 / fan_in); biases start at zero.
  static MlpModel init(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                       std::size_t classes, Rng& rng) {
    if (input_dim == 0 || classes < 2) {
      throw std::invalid_argument("MlpModel::init: need input_dim >= 1 and classes >= 2");
    }
    MlpModel model;
    model.input_dim = input_dim;
    model.classes = classes;
    std::size_t fan_in = input_dim;
    auto add_layer = [&](std::size_t out, Activation act) {
      DenseLayer layer;
      layer.weight = Matrix(out, fan_in);
      layer.bias.assign(out, 0.0);
      layer.activation = act;
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      for (double& w : layer.weight.data) w = uniform(rng);
      model.layers.push_back(std::move(layer));
      fan_in = out;
    };
    for (std::size_t h : hidden) add_layer(h, Activation::relu);
    add_layer(classes, Activation::identity);
    return model;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weight.data.size() + layer.bias.size();
    return n;
  }
};

// Activations recorded by one forward pass; consumed by backward().
struct GradientTape {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // z_l per layer
  std::vector<std::vector<double>> post;  // act(z_l) per layer
  std::vector<double> evidence;           // softplus of the last pre
};

// Evidence vector e(x) >= 0. Pass a tape to record activations for backward.
inline std::vector<double> forward(const MlpModel& model, std::span<const double> x,
                                   GradientTape* tape = nullptr) {
  if (x.size() != model.input_dim) throw std::invalid_argument("forward: input dimension mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input");
  }
  std::vector<double> current(x.begin(), x.end());
  if (tape) {
    tape->input = current;
    tape->pre.clear();
    tape->post.clear();
  }
  for (const auto& layer : model.layers) {
    std::vector<double> z(layer.bias);
    for (std::size_t r = 0; r < layer.weight.rows; ++r) {
      double acc = z[r];
      const double* wrow = &layer.weight.data[r * layer.weight.cols];
      for (std::size_t c = 0; c < layer.weight.cols; ++c) acc += wrow[c] * current[c];
      z[r] = acc;
    }
    std::vector<double> a(z);
    if (layer.activation == Activation::relu) {
      for (double& v : a) v = v > 0.0 ? v : 0.0;
    }
    if (tape) {
      tape->pre.push_back(z);
      tape->post.push_back(a);
    }
    current = std::move(a);
  }
  std::vector<double> evidence(current.size());
  for (std::size_t k = 0; k < current.size(); ++k) evidence[k] = softplus(current[k]);
  if (tape) tape->evidence = evidence;
  return evidence;
}

struct ParamGrads {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  static ParamGrads zeros_like(const MlpModel& model) {
    ParamGrads g;
    for (const auto& layer : model.layers) {
      g.weight.emplace_back(layer.weight.rows, layer.weight.cols);
      g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
  }

  void add(const ParamGrads& other) {
    for (std::size_t l = 0; l < weight.size(); ++l) {
      for (std::size_t i = 0; i < weight[l].data.size(); ++i) {
        weight[l].data[i] += other.weight[l].data[i];
      }
      for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
    }
  }

  void scale(double factor) {
    for (auto& w : weight) {
      for (double& v : w.data) v *= factor;
    }
    for (auto& b : bias) {
      for (double& v : b) v *= factor;
    }
  }
};

// Chain rule from d loss / d evidence back to every weight and bias.
inline ParamGrads backward(const MlpModel& model, const GradientTape& tape,
                           std::span<const double> grad_evidence) {
  if (grad_evidence.size() != model.classes) {
    throw std::invalid_argument("backward: gradient dimension mismatch");
  }
  if (tape.pre.size() != model.layers.size()) {
    throw std::invalid_argument("backward: tape does not match model");
  }
  ParamGrads grads = ParamGrads::zeros_like(model);

  // Through the softplus head: d e_k / d z_k = sigmoid(z_k).
  const std::vector<double>& head_pre = tape.pre.back();
  std::vector<double> delta(model.classes);
  for (std::size_t k = 0; k < model.classes; ++k) {
    delta[k] = grad_evidence[k] * sigmoid(head_pre[k]);
  }

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    const std::vector<double>& below = l == 0 ? tape.input : tape.post[l - 1];
    for (std::size_t r = 0; r < layer.weight.rows; ++r) {
      grads.bias[l][r] += delta[r];
      double* grow = &grads.weight[l].data[r * layer.weight.cols];
      for (std::size_t c = 0; c < layer.weight.cols; ++c) grow[c] += delta[r] * below[c];
    }
    if (l == 0) break;
    std::vector<double> next(layer.weight.cols, 0.0);
    for (std::size_t r = 0; r < layer.weight.rows; ++r) {
      const double* wrow = &layer.weight.data[r * layer.weight.cols];
      for (std::size_t c = 0; c < layer.weight.cols; ++c) next[c] += wrow[c] * delta[r];
    }
    // ReLU gate of the layer below.
    if (model.layers[l - 1].activation == Activation::relu) {
      const std::vector<double>& z = tape.pre[l - 1];
      for (std::size_t c = 0; c < next.size(); ++c) {
        if (z[c] <= 0.0) next[c] = 0.0;
      }
    }
    delta = std::move(next);
  }
  return grads;
}

// Adam with the standard bias correction.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Matrix> m_weight, v_weight;
  std::vector<std::vector<double>> m_bias, v_bias;

  static AdamState init(const MlpModel& model, double learning_rate = 1e-3) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& layer : model.layers) {
      state.m_weight.emplace_back(layer.weight.rows, layer.weight.cols);
      state.v_weight.emplace_back(layer.weight.rows, layer.weight.cols);
      state.m_bias.emplace_back(layer.bias.size(), 0.0);
      state.v_bias.emplace_back(layer.bias.size(), 0.0);
    }
    return state;
  }
};

inline void adam_step(AdamState& state, MlpModel& model, const ParamGrads& grads) {
  if (state.m_weight.size() != model.layers.size()) {
    throw std::invalid_argument("adam_step: state does not match model");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](double& param, double g, double& m, double& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    param -= state.learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
      update(layer.weight.data[i], grads.weight[l].data[i], state.m_weight[l].data[i],
             state.v_weight[l].data[i]);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      update(layer.bias[i], grads.bias[l][i], state.m_bias[l][i], state.v_bias[l][i]);
    }
  }
}

namespace detail {

// d/d alpha_j of E[-log pi_y] = psi'(S) - [j == y] psi'(alpha_y).
inline void add_nll_grad(const DirichletParams& alpha, std::size_t label,
                         std::vector<double>& grad) {
  const double psi1_s = trigamma(alpha.strength());
  for (std::size_t j = 0; j < alpha.size(); ++j) grad[j] += psi1_s;
  grad[label] -= trigamma(alpha[label]);
}

// d/d alpha_j of sum_k (y_k - m_k)^2 + m_k (1 - m_k) / (S + 1).
inline void add_mse_grad(const DirichletParams& alpha, std::size_t label,
                         std::vector<double>& grad) {
  const double s = alpha.strength();
  double sum_m2 = 0.0;
  double cross = 0.0;  // sum_k (y_k - m_k) m_k
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double m = alpha[k] / s;
    sum_m2 += m * m;
    cross += ((k == label ? 1.0 : 0.0) - m) * m;
  }
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const double m_j = alpha[j] / s;
    const double y_j = j == label ? 1.0 : 0.0;
    const double d_sq = -(2.0 / s) * ((y_j - m_j) - cross);
    const double d_var =
        2.0 * (sum_m2 - m_j) / (s * (s + 1.0)) - (1.0 - sum_m2) / ((s + 1.0) * (s + 1.0));
    grad[j] += d_sq + d_var;
  }
}

// d/d alpha_j of KL(q || p) with q = Dir(alpha_eff): the true-class slot is
// frozen under masking and contributes no derivative.
inline void add_kl_grad(const DirichletParams& alpha, const DirichletParams& prior,
                        std::size_t label, const VariantConfig& cfg, double weight,
                        std::vector<double>& grad) {
  const bool masked = cfg.kl_mask == VariantConfig::KlMask::misclassified_only;
  const DirichletParams effective =
      masked ? masked_alpha(alpha, CountVector::one_hot(alpha.size(), label)) : alpha;
  const double s = effective.strength();
  const double s0 = prior.strength();
  const double tail = (s - s0) * trigamma(s);
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (masked && j == label) continue;
    grad[j] += weight * ((effective[j] - prior[j]) * trigamma(effective[j]) - tail);
  }
}

}  // namespace detail

// Gradient of data + kl_weight * KL with respect to alpha; kl_weight = 0
// drops the KL term entirely (the "KL disabled" epochs of the annealed rule).
inline std::vector<double> weighted_loss_grad_alpha(const DirichletParams& alpha,
                                                    const DirichletParams& prior,
                                                    std::size_t label, double kl_weight,
                                                    const VariantConfig& cfg) {
  if (alpha.size() != prior.size()) {
    throw std::invalid_argument("loss_grad_alpha: dimension mismatch");
  }
  if (label >= alpha.size()) throw std::out_of_range("loss_grad_alpha: class index out of range");
  if (!(kl_weight >= 0.0)) throw std::invalid_argument("loss_grad_alpha: negative KL weight");
  std::vector<double> grad(alpha.size(), 0.0);
  if (cfg.likelihood == VariantConfig::Likelihood::mse) {
    detail::add_mse_grad(alpha, label, grad);
  } else {
    detail::add_nll_grad(alpha, label, grad);
  }
  if (kl_weight > 0.0) detail::add_kl_grad(alpha, prior, label, cfg, kl_weight, grad);
  return grad;
}

// Analytic gradient of variational_loss with respect to alpha. tau and the
// prior are constants here; gradients reach the network only through alpha,
// and d alpha / d evidence is the identity.
inline std::vector<double> loss_grad_alpha(const DirichletParams& alpha,
                                           const DirichletParams& prior, std::size_t label,
                                           double tau, const VariantConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("loss_grad_alpha: tau must be positive");
  return weighted_loss_grad_alpha(alpha, prior, label, 1.0 / tau, cfg);
}

}  // namespace edl

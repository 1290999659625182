#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <random>

#include "edl/model_io.hpp"
#include "edl/nnet.hpp"

using Catch::Matchers::WithinAbs;
using edl::BaseRate;
using edl::DirichletParams;
using edl::MlpModel;
using edl::VariantConfig;

TEST_CASE("softplus") {
  REQUIRE_THAT(edl::softplus(3.0), WithinAbs(3.0485873515737421, 1e-12));
  REQUIRE_THAT(edl::softplus(-3.0), WithinAbs(0.04858735157374206, 1e-12));
  REQUIRE_THAT(edl::softplus(31.0), WithinAbs(31.0, 1e-12));
  REQUIRE(std::isfinite(edl::softplus(1e4)));
  REQUIRE(std::isfinite(edl::softplus(-1e4)));
  REQUIRE(edl::softplus(-1e4) >= 0.0);
  REQUIRE_THAT(edl::sigmoid(0.0), WithinAbs(0.5, 1e-15));
  REQUIRE(std::isfinite(edl::sigmoid(-1e4)));
}

TEST_CASE("forward") {
  std::mt19937_64 rng(16);
  MlpModel model = MlpModel::init(2, {4}, 3, rng);
  for (auto& layer : model.layers) {
    std::fill(layer.weight.data.begin(), layer.weight.data.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  const auto e = forward(model, std::vector<double>{1.0, -2.0});
  for (double v : e) REQUIRE_THAT(v, WithinAbs(std::log(2.0), 1e-15));

  // single identity layer, W = I, b = 0
  MlpModel linear;
  linear.input_dim = 2;
  linear.classes = 2;
  edl::DenseLayer layer;
  layer.weight = edl::Matrix(2, 2);
  layer.weight.at(0, 0) = 1.0;
  layer.weight.at(1, 1) = 1.0;
  layer.bias = {0.0, 0.0};
  layer.activation = edl::Activation::identity;
  linear.layers.push_back(layer);
  const auto ev = forward(linear, std::vector<double>{3.0, -3.0});
  REQUIRE_THAT(ev[0], WithinAbs(3.0485873515737421, 1e-12));
  REQUIRE_THAT(ev[1], WithinAbs(0.04858735157374206, 1e-12));

  for (double v : forward(model, std::vector<double>{0.3, 0.4})) REQUIRE(v >= 0.0);
  REQUIRE_THROWS_AS(forward(model, std::vector<double>{1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(forward(model, std::vector<double>{1.0, std::nan("")}),
                    std::invalid_argument);
}

TEST_CASE("backward matches finite differences") {
  std::mt19937_64 rng(17);
  MlpModel model = MlpModel::init(2, {4}, 3, rng);
  const std::vector<double> x = {0.8, -0.6};
  const std::vector<double> upstream = {0.4, -1.2, 0.9};

  edl::GradientTape tape;
  forward(model, x, &tape);
  const edl::ParamGrads grads = backward(model, tape, upstream);

  auto scalar_loss = [&](const MlpModel& m) {
    const auto e = forward(m, x);
    double acc = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) acc += upstream[k] * e[k];
    return acc;
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
      const double orig = layer.weight.data[i];
      const double h = 1e-5;
      layer.weight.data[i] = orig + h;
      const double up = scalar_loss(model);
      layer.weight.data[i] = orig - h;
      const double down = scalar_loss(model);
      layer.weight.data[i] = orig;
      const double fd = (up - down) / (2.0 * h);
      REQUIRE_THAT(grads.weight[l].data[i],
                   WithinAbs(fd, 1e-4 * std::max(1.0, std::abs(fd))));
    }
  }
}

TEST_CASE("backward linearity") {
  std::mt19937_64 rng(18);
  MlpModel model = MlpModel::init(3, {5}, 2, rng);
  edl::GradientTape tape;
  forward(model, std::vector<double>{0.1, 0.2, -0.3}, &tape);

  const edl::ParamGrads zero = backward(model, tape, std::vector<double>{0.0, 0.0});
  for (const auto& w : zero.weight) {
    for (double v : w.data) REQUIRE(v == 0.0);
  }
  const edl::ParamGrads g1 = backward(model, tape, std::vector<double>{1.0, -2.0});
  const edl::ParamGrads g2 = backward(model, tape, std::vector<double>{2.0, -4.0});
  for (std::size_t l = 0; l < g1.weight.size(); ++l) {
    for (std::size_t i = 0; i < g1.weight[l].data.size(); ++i) {
      REQUIRE_THAT(g2.weight[l].data[i], WithinAbs(2.0 * g1.weight[l].data[i], 1e-14));
    }
  }
  REQUIRE_THROWS_AS(backward(model, tape, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("loss gradient wrt alpha") {
  const VariantConfig gedl = VariantConfig::preset("gedl");
  // symmetric alpha = prior, data term only: psi'(S) everywhere, extra -psi'(alpha_y) at y
  const DirichletParams alpha({2.0, 2.0, 2.0});
  const auto g = edl::loss_grad_alpha(alpha, alpha, 1, 1e12, gedl);
  const double base = edl::trigamma(6.0);
  REQUIRE_THAT(g[0], WithinAbs(base, 1e-9));
  REQUIRE_THAT(g[2], WithinAbs(base, 1e-9));
  REQUIRE_THAT(g[1], WithinAbs(base - edl::trigamma(2.0), 1e-9));

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& name : VariantConfig::preset_names()) {
    const VariantConfig cfg = VariantConfig::preset(name);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t k_classes = 2 + trial % 6;
      const BaseRate a = BaseRate::uniform(k_classes);
      std::vector<double> evidence(k_classes);
      for (double& e : evidence) e = unit(rng) * 5.0;
      const double w = edl::prior_strength_for(evidence, k_classes, cfg);
      const DirichletParams al = edl::evidence_to_alpha(evidence, w, a);
      const DirichletParams prior =
          edl::evidence_to_alpha(std::vector<double>(k_classes, 0.0), w, a);
      const std::size_t label = trial % k_classes;
      const double tau = 0.5 + unit(rng) * 10.0;
      const auto analytic = edl::loss_grad_alpha(al, prior, label, tau, cfg);
      for (std::size_t j = 0; j < k_classes; ++j) {
        const double h = 1e-4 * std::max(1.0, al[j]);
        std::vector<double> hi = al.alpha(), lo = al.alpha();
        hi[j] += h;
        lo[j] -= h;
        const double fd = (edl::variational_loss(DirichletParams(hi), prior, label, tau, cfg) -
                           edl::variational_loss(DirichletParams(lo), prior, label, tau, cfg)) /
                          (2.0 * h);
        REQUIRE_THAT(analytic[j], WithinAbs(fd, 1e-3 * std::max(0.05, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("adam") {
  std::mt19937_64 rng(20);
  MlpModel model = MlpModel::init(2, {3}, 2, rng);
  const MlpModel before = model;
  edl::AdamState adam = edl::AdamState::init(model, 2e-3);

  adam_step(adam, model, edl::ParamGrads::zeros_like(model));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    REQUIRE(model.layers[l].weight.data == before.layers[l].weight.data);
    REQUIRE(model.layers[l].bias == before.layers[l].bias);
  }

  adam = edl::AdamState::init(model, 2e-3);
  edl::ParamGrads constant = edl::ParamGrads::zeros_like(model);
  for (auto& w : constant.weight) std::fill(w.data.begin(), w.data.end(), -1.7);
  const double w00 = model.layers[0].weight.data[0];
  adam_step(adam, model, constant);
  // first bias-corrected step is -lr sign(g)
  REQUIRE_THAT(model.layers[0].weight.data[0] - w00, WithinAbs(2e-3, 1e-8));

  double last = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double prev = model.layers[0].weight.data[0];
    adam_step(adam, model, constant);
    last = model.layers[0].weight.data[0] - prev;
  }
  REQUIRE_THAT(std::abs(last), WithinAbs(2e-3, 1e-4));
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(21);
  const MlpModel model = MlpModel::init(3, {4, 5}, 2, rng);
  const auto j = edl::model_to_json(model);
  const MlpModel loaded = edl::model_from_json(j);
  REQUIRE(loaded.input_dim == model.input_dim);
  REQUIRE(loaded.classes == model.classes);
  REQUIRE(loaded.layers.size() == model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    REQUIRE(loaded.layers[l].weight.data == model.layers[l].weight.data);
    REQUIRE(loaded.layers[l].bias == model.layers[l].bias);
    REQUIRE(loaded.layers[l].activation == model.layers[l].activation);
  }
  const auto x = std::vector<double>{0.2, -0.4, 1.0};
  REQUIRE(forward(loaded, x) == forward(model, x));

  nlohmann::json bad = j;
  bad["format"] = "something-else";
  REQUIRE_THROWS_AS(edl::model_from_json(bad), std::invalid_argument);
}

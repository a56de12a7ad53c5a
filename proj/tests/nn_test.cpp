#include "losscurv/nn.hpp"

#include <cmath>
#include <numbers>
#include <span>

#include <doctest.h>

#include "losscurv/errors.hpp"
#include "losscurv/rng.hpp"
#include "oracles.hpp"

using namespace losscurv;

namespace {

// Random parameter point kept away from relu kinks: every preactivation
// magnitude must exceed the margin for all samples.
bool away_from_kinks(const ScalarField& field, std::span<const double> theta,
                     double margin) {
  // Probe smoothness indirectly: compare forward/backward difference slopes
  // along each coordinate; near a kink they disagree strongly.
  const double h = 1e-7;
  Vec xp(theta.begin(), theta.end());
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = field.value(xp);
    xp[i] = xi - h;
    const double fm = field.value(xp);
    xp[i] = xi;
    const double f0 = field.value(xp);
    const double fwd = (fp - f0) / h;
    const double bwd = (f0 - fm) / h;
    if (std::abs(fwd - bwd) > margin) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("MlpSpec: parameter counting and validation") {
  const MlpSpec spec = make_mlp_spec({1, 16, 8, 1}, Activation::kTanh);
  CHECK(spec.param_count() == 32 + 136 + 9);

  CHECK_THROWS_AS(make_mlp_spec({1}, Activation::kTanh), InvalidInput);
  CHECK_THROWS_AS(make_mlp_spec({1, 0, 1}, Activation::kTanh), InvalidInput);
  CHECK_THROWS_AS(make_mlp_spec({1, 2000, 1}, Activation::kTanh),
                  InvalidInput);  // over the dense budget

  MlpSpec bad = spec;
  bad.activations.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("make_sine_dataset: deterministic, sorted, exact sine when noiseless") {
  const Dataset a = make_sine_dataset(50, 0.0, 7);
  const Dataset b = make_sine_dataset(50, 0.0, 7);
  for (int i = 0; i < 50; ++i) {
    CHECK(a.inputs(i, 0) == b.inputs(i, 0));
    CHECK(a.targets(i, 0) == b.targets(i, 0));
    CHECK(a.targets(i, 0) == std::sin(a.inputs(i, 0)));
    if (i > 0) CHECK(a.inputs(i, 0) >= a.inputs(i - 1, 0));
    CHECK(a.inputs(i, 0) >= -std::numbers::pi);
    CHECK(a.inputs(i, 0) <= std::numbers::pi);
  }
  const Dataset c = make_sine_dataset(50, 0.1, 7);
  bool any_noise = false;
  for (int i = 0; i < 50; ++i)
    if (c.targets(i, 0) != std::sin(c.inputs(i, 0))) any_noise = true;
  CHECK(any_noise);
}

TEST_CASE("split_contiguous: 70 points into 7 batches of 10") {
  const Dataset data = make_sine_dataset(70, 0.0, 3);
  const auto batches = split_contiguous(data, 7);
  CHECK(batches.size() == 7);
  for (const auto& b : batches) CHECK(b.size() == 10);
  // Contiguous phase: batch b covers inputs [b*10, b*10+10).
  for (int b = 0; b < 7; ++b)
    for (int i = 0; i < 10; ++i)
      CHECK(batches[static_cast<std::size_t>(b)].inputs(i, 0) ==
            data.inputs(b * 10 + i, 0));
  CHECK_THROWS_AS(split_contiguous(data, 3), InvalidInput);  // 70 % 3 != 0
}

TEST_CASE("mlp_loss_field: zero parameters and zero targets give zero loss") {
  const MlpSpec spec = make_mlp_spec({1, 4, 1}, Activation::kTanh);
  Dataset data = make_sine_dataset(10, 0.0, 5);
  for (int i = 0; i < data.size(); ++i) data.targets(i, 0) = 0.0;
  const auto field = make_mlp_loss_field(spec, data);
  const Vec zero(static_cast<std::size_t>(spec.param_count()), 0.0);
  CHECK(field->value(zero) == doctest::Approx(0.0));
  for (double g : field->gradient(zero)) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("mlp_loss_field: linear least squares Hessian matches the Gram form") {
  const MlpSpec spec = make_mlp_spec({1, 1}, Activation::kTanh);  // no hidden
  const Dataset data = make_sine_dataset(25, 0.1, 11);
  const auto field = make_mlp_loss_field(spec, data);

  Vec xs(25);
  for (int i = 0; i < 25; ++i) xs[static_cast<std::size_t>(i)] = data.inputs(i, 0);
  const SymMatrix expected = testing::linear_lsq_hessian(xs);

  SplitMix64 rng(31);
  for (int rep = 0; rep < 3; ++rep) {
    const Vec theta = testing::random_point(rng, 2, 1.0);
    const SymMatrix h = field->hessian(theta);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(std::abs(h(i, j) - expected(i, j)) <=
              1e-6 * std::max(1.0, std::sqrt(expected.sum_sq())));
  }
}

TEST_CASE("mlp_loss_field: reverse-mode gradient matches finite differences") {
  SplitMix64 rng(37);
  const std::vector<MlpSpec> specs = {
      make_mlp_spec({1, 8, 1}, Activation::kTanh),
      make_mlp_spec({1, 16, 8, 1}, Activation::kTanh),
      make_mlp_spec({2, 4, 2}, Activation::kRelu),
  };
  for (const auto& spec : specs) {
    Dataset data;
    if (spec.layer_widths.front() == 1) {
      data = make_sine_dataset(20, 0.05, 13);
    } else {
      data = Dataset{Matrix(20, 2), Matrix(20, 2)};
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) {
          data.inputs(i, j) = 2.0 * rng.uniform01() - 1.0;
          data.targets(i, j) = 2.0 * rng.uniform01() - 1.0;
        }
    }
    const auto field = make_mlp_loss_field(spec, data);
    const bool relu = !field->capabilities().smooth;
    CHECK(field->capabilities().exact_grad);

    int checked = 0;
    for (int attempt = 0; attempt < 200 && checked < 20; ++attempt) {
      const Vec theta = testing::random_point(rng, spec.param_count(), 1.0);
      if (relu && !away_from_kinks(*field, theta, 1e-3)) continue;
      ++checked;
      const Vec g = field->gradient(theta);
      const Vec g_fd = finite_diff_gradient(*field, theta);
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(g[i] - g_fd[i]) <= 1e-6 * (1.0 + std::abs(g[i])));
    }
    CHECK(checked == 20);
  }
}

TEST_CASE("mlp_loss_field: HVP agrees with the assembled Hessian") {
  const MlpSpec spec = make_mlp_spec({1, 8, 4, 1}, Activation::kTanh);
  const Dataset data = make_sine_dataset(15, 0.02, 19);
  const auto field = make_mlp_loss_field(spec, data);
  SplitMix64 rng(41);
  const Vec theta = testing::random_point(rng, spec.param_count(), 0.5);
  const SymMatrix h = field->hessian(theta);
  for (int rep = 0; rep < 5; ++rep) {
    Vec v(static_cast<std::size_t>(spec.param_count()));
    for (auto& vi : v) vi = 2.0 * rng.uniform01() - 1.0;
    const Vec hv = field->hvp(theta, v);
    const Vec hv_dense = h.multiply(v);
    for (std::size_t i = 0; i < hv.size(); ++i)
      CHECK(std::abs(hv[i] - hv_dense[i]) <= 1e-5 * (1.0 + std::abs(hv[i])));
  }
}

TEST_CASE("mlp_loss_field: relu spec is flagged non-smooth") {
  const MlpSpec relu = make_mlp_spec({1, 4, 1}, Activation::kRelu);
  const auto field = make_mlp_loss_field(relu, make_sine_dataset(8, 0.0, 1));
  CHECK_FALSE(field->capabilities().smooth);
  const MlpSpec smooth = make_mlp_spec({1, 4, 1}, Activation::kTanh);
  const auto f2 = make_mlp_loss_field(smooth, make_sine_dataset(8, 0.0, 1));
  CHECK(f2->capabilities().smooth);
}

TEST_CASE("train: linear model converges on linear data") {
  // Targets generated by a fixed affine rule; the quadratic-equivalent
  // [1,1] model must drive the loss to ~0.
  Dataset data{Matrix(30, 1), Matrix(30, 1)};
  SplitMix64 rng(43);
  for (int i = 0; i < 30; ++i) {
    const double x = 2.0 * rng.uniform01() - 1.0;
    data.inputs(i, 0) = x;
    data.targets(i, 0) = 2.0 * x + 1.0;
  }
  const MlpSpec spec = make_mlp_spec({1, 1}, Activation::kTanh);
  TrainConfig cfg;
  cfg.steps = 5000;
  cfg.learning_rate = 1e-2;
  cfg.seed = 3;
  const TrainResult result = train(spec, data, cfg);
  CHECK(result.final_loss <= 1e-6);
  CHECK(result.trace.size() == 5000);
}

TEST_CASE("train: steps and batch-size contracts") {
  const Dataset data = make_sine_dataset(10, 0.0, 5);
  const MlpSpec spec = make_mlp_spec({1, 2, 1}, Activation::kTanh);
  TrainConfig cfg;
  cfg.steps = 0;
  CHECK_THROWS_AS(train(spec, data, cfg), InvalidInput);

  cfg.steps = 1;
  cfg.batch_size = 11;  // exceeds the dataset size
  CHECK_THROWS_AS(train(spec, data, cfg), InvalidInput);
  cfg.batch_size = 0;

  cfg.steps = 1;
  const TrainResult one = train(spec, data, cfg);
  CHECK(one.trace.size() == 1);
  // One update: parameters must differ from the initialization.
  const Vec theta0 = init_params(spec, cfg.seed);
  bool moved = false;
  for (std::size_t i = 0; i < theta0.size(); ++i)
    if (one.params[i] != theta0[i]) moved = true;
  CHECK(moved);
}

TEST_CASE("train: bit-identical trajectories for identical configs") {
  const Dataset data = make_sine_dataset(24, 0.05, 9);
  const MlpSpec spec = make_mlp_spec({1, 6, 1}, Activation::kTanh);
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.batch_size = 8;
  cfg.seed = 12;
  const TrainResult a = train(spec, data, cfg);
  const TrainResult b = train(spec, data, cfg);
  CHECK(a.params == b.params);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].loss == b.trace[i].loss);
    CHECK(a.trace[i].grad_norm == b.trace[i].grad_norm);
  }
}

TEST_CASE("train: diverging configuration raises DivergedTraining") {
  Dataset data{Matrix(4, 1), Matrix(4, 1)};
  for (int i = 0; i < 4; ++i) {
    data.inputs(i, 0) = 1e150;
    data.targets(i, 0) = -1e150;
  }
  const MlpSpec spec = make_mlp_spec({1, 1}, Activation::kTanh);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::kSgd;
  cfg.learning_rate = 10.0;
  cfg.steps = 50;
  try {
    train(spec, data, cfg);
    FAIL("expected DivergedTraining");
  } catch (const DivergedTraining& e) {
    CHECK(e.step >= 1);
  }
}

TEST_CASE("train: two seeds reach distinct minima") {
  const Dataset data = make_sine_dataset(40, 0.05, 21);
  const MlpSpec spec = make_mlp_spec({1, 6, 1}, Activation::kTanh);
  TrainConfig cfg;
  cfg.steps = 1500;
  cfg.learning_rate = 1e-2;
  cfg.seed = 100;
  const TrainResult a = train(spec, data, cfg);
  cfg.seed = 200;
  const TrainResult b = train(spec, data, cfg);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    max_diff = std::max(max_diff, std::abs(a.params[i] - b.params[i]));
  CHECK(max_diff > 1e-3);
}

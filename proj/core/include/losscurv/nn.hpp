#ifndef LOSSCURV_NN_HPP_
#define LOSSCURV_NN_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "losscurv/field.hpp"
#include "losscurv/linalg.hpp"

namespace losscurv {

// Tiny fully-connected regressors over flat parameter vectors, provided as
// ScalarField oracles so the geometry and estimator modules can treat their
// losses like any other analytic field.

enum class Activation { kTanh, kRelu, kIdentity };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct MlpSpec {
  std::vector<int> layer_widths;        // input, hidden..., output
  std::vector<Activation> activations;  // one per hidden layer

  int param_count() const;
  // Throws InvalidInput unless widths are positive, the activation count
  // matches the hidden-layer count, and param_count() <= 2000 (the dense
  // Hessian budget).
  void validate() const;
};

// Convenience: same activation after every hidden layer.
MlpSpec make_mlp_spec(std::vector<int> layer_widths, Activation activation);

struct Dataset {
  Matrix inputs;   // n x d
  Matrix targets;  // n x o
  int size() const { return inputs.rows(); }
  int input_dim() const { return inputs.cols(); }
  int target_dim() const { return targets.cols(); }
};

// n points with inputs uniform on [-pi, pi] (sorted ascending) and targets
// sin(x) + N(0, noise_sigma^2). Deterministic per seed.
Dataset make_sine_dataset(int n, double noise_sigma, std::uint64_t seed);

// Splits into k batches of contiguous index ranges (contiguous phase when
// the inputs are sorted). Requires n % k == 0 so the mean of batch Hessians
// equals the full-data Hessian exactly.
std::vector<Dataset> split_contiguous(const Dataset& data, int k);

// Loss field over the flattened parameters:
//   f(theta) = 1/(2n) sum_i ||net(x_i; theta) - y_i||^2.
// Gradient is exact reverse-mode backpropagation; the Hessian is assembled
// by central differences of that gradient (exact_grad = true,
// exact_hess = false). Relu specs are flagged non-smooth.
std::unique_ptr<ScalarField> make_mlp_loss_field(const MlpSpec& spec,
                                                 Dataset data);

// Seeded uniform [-r, r] initialization with r = 1/sqrt(fan_in) per layer.
Vec init_params(const MlpSpec& spec, std::uint64_t seed);

enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-2;
  int steps = 1000;
  int batch_size = 0;  // 0 or >= n means full batch
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct TrainRecord {
  int step;          // 1-based, recorded after the update
  double loss;       // full-dataset loss
  double grad_norm;  // full-dataset gradient norm
};

struct TrainResult {
  Vec params;
  std::vector<TrainRecord> trace;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
};

// Deterministic for fixed (spec, data, cfg): the seed drives both the
// initialization and the per-epoch batch shuffle. Throws DivergedTraining
// (with the step index) if the loss goes non-finite.
TrainResult train(const MlpSpec& spec, const Dataset& data,
                  const TrainConfig& cfg);

}  // namespace losscurv

#endif  // LOSSCURV_NN_HPP_

#include "losscurv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "losscurv/errors.hpp"
#include "losscurv/rng.hpp"

namespace losscurv {

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw InvalidInput("unknown activation: " + name);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

int MlpSpec::param_count() const {
  int q = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
    q += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
  return q;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2)
    throw InvalidInput("MlpSpec: need at least input and output widths");
  for (int w : layer_widths)
    if (w < 1) throw InvalidInput("MlpSpec: layer widths must be positive");
  const std::size_t hidden = layer_widths.size() - 2;
  if (activations.size() != hidden)
    throw InvalidInput("MlpSpec: need one activation per hidden layer");
  if (param_count() > 2000)
    throw InvalidInput("MlpSpec: parameter count exceeds the dense budget (2000)");
}

MlpSpec make_mlp_spec(std::vector<int> layer_widths, Activation activation) {
  MlpSpec spec;
  spec.layer_widths = std::move(layer_widths);
  if (spec.layer_widths.size() >= 2)
    spec.activations.assign(spec.layer_widths.size() - 2, activation);
  spec.validate();
  return spec;
}

Dataset make_sine_dataset(int n, double noise_sigma, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("make_sine_dataset: n must be >= 1");
  if (noise_sigma < 0.0)
    throw InvalidInput("make_sine_dataset: noise_sigma must be >= 0");
  SplitMix64 rng(seed);
  Vec xs(static_cast<std::size_t>(n));
  for (auto& x : xs)
    x = -std::numbers::pi + 2.0 * std::numbers::pi * rng.uniform01();
  std::sort(xs.begin(), xs.end());

  Dataset data{Matrix(n, 1), Matrix(n, 1)};
  for (int i = 0; i < n; ++i) {
    data.inputs(i, 0) = xs[static_cast<std::size_t>(i)];
    const double noise = noise_sigma > 0.0 ? noise_sigma * rng.normal() : 0.0;
    data.targets(i, 0) = std::sin(xs[static_cast<std::size_t>(i)]) + noise;
  }
  return data;
}

std::vector<Dataset> split_contiguous(const Dataset& data, int k) {
  const int n = data.size();
  if (k < 2) throw InvalidInput("split_contiguous: k must be >= 2");
  if (n % k != 0)
    throw InvalidInput("split_contiguous: batch count must divide the dataset size");
  const int per = n / k;
  std::vector<Dataset> batches;
  batches.reserve(static_cast<std::size_t>(k));
  for (int b = 0; b < k; ++b) {
    Dataset batch{Matrix(per, data.input_dim()), Matrix(per, data.target_dim())};
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < data.input_dim(); ++j)
        batch.inputs(i, j) = data.inputs(b * per + i, j);
      for (int j = 0; j < data.target_dim(); ++j)
        batch.targets(i, j) = data.targets(b * per + i, j);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

//--------------------------------------------------------------------------
// Loss field

namespace {

double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kIdentity: return z;
  }
  return z;
}

double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

class MlpLossField final : public ScalarField {
 public:
  MlpLossField(MlpSpec spec, Dataset data)
      : ScalarField(spec.param_count(),
                    {.exact_grad = true,
                     .exact_hess = false,
                     .exact_hvp = false,
                     .smooth = std::none_of(spec.activations.begin(),
                                            spec.activations.end(),
                                            [](Activation a) {
                                              return a == Activation::kRelu;
                                            })}),
        spec_(std::move(spec)),
        data_(std::move(data)) {}

  double value(std::span<const double> theta) const override {
    check_point(theta);
    return forward_loss(theta, nullptr);
  }

  Vec gradient(std::span<const double> theta) const override {
    check_point(theta);
    Vec grad(theta.size(), 0.0);
    forward_loss(theta, &grad);
    return grad;
  }

 private:
  // Forward pass over all samples; accumulates backprop gradients when
  // grad_out is non-null. Loss is 1/(2n) sum ||prediction - target||^2.
  double forward_loss(std::span<const double> theta, Vec* grad_out) const {
    const int n = data_.size();
    const int n_layers = static_cast<int>(spec_.layer_widths.size()) - 1;
    const double inv_n = 1.0 / n;

    // Per-layer parameter offsets into theta.
    std::vector<int> w_offset(static_cast<std::size_t>(n_layers));
    std::vector<int> b_offset(static_cast<std::size_t>(n_layers));
    int offset = 0;
    for (int l = 0; l < n_layers; ++l) {
      const int in = spec_.layer_widths[static_cast<std::size_t>(l)];
      const int out = spec_.layer_widths[static_cast<std::size_t>(l) + 1];
      w_offset[static_cast<std::size_t>(l)] = offset;
      offset += in * out;
      b_offset[static_cast<std::size_t>(l)] = offset;
      offset += out;
    }

    // Activations a[l] and pre-activations z[l] per layer for one sample.
    std::vector<Vec> a(static_cast<std::size_t>(n_layers) + 1);
    std::vector<Vec> z(static_cast<std::size_t>(n_layers));

    double loss = 0.0;
    for (int s = 0; s < n; ++s) {
      const auto x = data_.inputs.row(s);
      a[0].assign(x.begin(), x.end());
      for (int l = 0; l < n_layers; ++l) {
        const int in = spec_.layer_widths[static_cast<std::size_t>(l)];
        const int out = spec_.layer_widths[static_cast<std::size_t>(l) + 1];
        const double* w = theta.data() + w_offset[static_cast<std::size_t>(l)];
        const double* b = theta.data() + b_offset[static_cast<std::size_t>(l)];
        auto& zl = z[static_cast<std::size_t>(l)];
        zl.assign(static_cast<std::size_t>(out), 0.0);
        const auto& prev = a[static_cast<std::size_t>(l)];
        for (int o = 0; o < out; ++o) {
          double acc = b[o];
          const double* w_row = w + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i)
            acc += w_row[i] * prev[static_cast<std::size_t>(i)];
          zl[static_cast<std::size_t>(o)] = acc;
        }
        auto& next = a[static_cast<std::size_t>(l) + 1];
        next.resize(static_cast<std::size_t>(out));
        const bool last = l == n_layers - 1;
        for (int o = 0; o < out; ++o)
          next[static_cast<std::size_t>(o)] =
              last ? zl[static_cast<std::size_t>(o)]
                   : apply_activation(spec_.activations[static_cast<std::size_t>(l)],
                                      zl[static_cast<std::size_t>(o)]);
      }

      const auto y = data_.targets.row(s);
      const auto& pred = a[static_cast<std::size_t>(n_layers)];
      Vec delta(pred.size());
      for (std::size_t o = 0; o < pred.size(); ++o) {
        const double residual = pred[o] - y[o];
        loss += 0.5 * inv_n * residual * residual;
        delta[o] = inv_n * residual;
      }

      if (grad_out == nullptr) continue;

      // Reverse pass: delta holds dLoss/dz for the current layer.
      for (int l = n_layers - 1; l >= 0; --l) {
        const int in = spec_.layer_widths[static_cast<std::size_t>(l)];
        const int out = spec_.layer_widths[static_cast<std::size_t>(l) + 1];
        const double* w = theta.data() + w_offset[static_cast<std::size_t>(l)];
        double* gw = grad_out->data() + w_offset[static_cast<std::size_t>(l)];
        double* gb = grad_out->data() + b_offset[static_cast<std::size_t>(l)];
        const auto& prev = a[static_cast<std::size_t>(l)];
        for (int o = 0; o < out; ++o) {
          const double d = delta[static_cast<std::size_t>(o)];
          gb[o] += d;
          double* gw_row = gw + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i)
            gw_row[i] += d * prev[static_cast<std::size_t>(i)];
        }
        if (l == 0) break;
        Vec next_delta(static_cast<std::size_t>(in), 0.0);
        for (int o = 0; o < out; ++o) {
          const double d = delta[static_cast<std::size_t>(o)];
          const double* w_row = w + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i)
            next_delta[static_cast<std::size_t>(i)] += w_row[i] * d;
        }
        const Activation act = spec_.activations[static_cast<std::size_t>(l) - 1];
        const auto& z_prev = z[static_cast<std::size_t>(l) - 1];
        for (int i = 0; i < in; ++i)
          next_delta[static_cast<std::size_t>(i)] *=
              activation_derivative(act, z_prev[static_cast<std::size_t>(i)]);
        delta = std::move(next_delta);
      }
    }
    return loss;
  }

  MlpSpec spec_;
  Dataset data_;
};

}  // namespace

std::unique_ptr<ScalarField> make_mlp_loss_field(const MlpSpec& spec,
                                                 Dataset data) {
  spec.validate();
  if (data.size() < 1) throw InvalidInput("make_mlp_loss_field: empty dataset");
  if (data.input_dim() != spec.layer_widths.front() ||
      data.target_dim() != spec.layer_widths.back())
    throw InvalidInput("make_mlp_loss_field: dataset dims do not match spec");
  return std::make_unique<MlpLossField>(spec, std::move(data));
}

Vec init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitMix64 rng(seed);
  Vec theta(static_cast<std::size_t>(spec.param_count()));
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double r = 1.0 / std::sqrt(static_cast<double>(in));
    for (int k = 0; k < in * out + out; ++k)
      theta[pos++] = r * (2.0 * rng.uniform01() - 1.0);
  }
  return theta;
}

//--------------------------------------------------------------------------
// Training

namespace {

Dataset gather(const Dataset& data, std::span<const int> indices) {
  Dataset out{Matrix(static_cast<int>(indices.size()), data.input_dim()),
              Matrix(static_cast<int>(indices.size()), data.target_dim())};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (int j = 0; j < data.input_dim(); ++j)
      out.inputs(static_cast<int>(i), j) = data.inputs(indices[i], j);
    for (int j = 0; j < data.target_dim(); ++j)
      out.targets(static_cast<int>(i), j) = data.targets(indices[i], j);
  }
  return out;
}

}  // namespace

TrainResult train(const MlpSpec& spec, const Dataset& data,
                  const TrainConfig& cfg) {
  spec.validate();
  if (cfg.steps < 1) throw InvalidInput("train: steps must be >= 1");
  const int n = data.size();
  if (cfg.batch_size < 0 || cfg.batch_size > n)
    throw InvalidInput("train: batch_size must lie in [1, n] (0 = full batch)");
  const int batch = cfg.batch_size == 0 ? n : cfg.batch_size;

  const auto full_field = make_mlp_loss_field(spec, data);
  Vec theta = init_params(spec, cfg.seed);

  const bool full_batch = batch == n;
  SplitMix64 shuffle_rng = substream(cfg.seed, 1);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  int cursor = n;  // forces a shuffle before the first minibatch

  const std::size_t q = theta.size();
  Vec adam_m(q, 0.0), adam_v(q, 0.0);

  TrainResult result;
  result.trace.reserve(static_cast<std::size_t>(cfg.steps));

  for (int step = 1; step <= cfg.steps; ++step) {
    Vec grad;
    if (full_batch) {
      grad = full_field->gradient(theta);
    } else {
      if (cursor + batch > n) {
        for (int i = n - 1; i > 0; --i) {
          const int j = static_cast<int>(
              shuffle_rng.below(static_cast<std::uint64_t>(i) + 1));
          std::swap(order[static_cast<std::size_t>(i)],
                    order[static_cast<std::size_t>(j)]);
        }
        cursor = 0;
      }
      const Dataset mini = gather(
          data, std::span<const int>(order.data() + cursor,
                                     static_cast<std::size_t>(batch)));
      cursor += batch;
      const auto mini_field = make_mlp_loss_field(spec, mini);
      grad = mini_field->gradient(theta);
    }

    if (cfg.optimizer == OptimizerKind::kAdam) {
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step);
      for (std::size_t i = 0; i < q; ++i) {
        adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * grad[i];
        adam_v[i] =
            cfg.adam_beta2 * adam_v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
        theta[i] -= cfg.learning_rate * (adam_m[i] / bc1) /
                    (std::sqrt(adam_v[i] / bc2) + cfg.adam_epsilon);
      }
    } else {
      for (std::size_t i = 0; i < q; ++i)
        theta[i] -= cfg.learning_rate * grad[i];
    }

    const double loss = full_field->value(theta);
    if (!std::isfinite(loss))
      throw DivergedTraining("train: non-finite loss", step);
    const double grad_norm = norm2(full_field->gradient(theta));
    result.trace.push_back({step, loss, grad_norm});
  }

  result.params = std::move(theta);
  result.final_loss = result.trace.back().loss;
  result.final_grad_norm = result.trace.back().grad_norm;
  return result;
}

}  // namespace losscurv

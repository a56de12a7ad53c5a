// losscurv command line: curvature analyses of loss-surface fields with
// seeded, file-backed, reproducible outputs. Every subcommand writes CSV
// and/or JSON artifacts into --out and prints a one-line summary.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "losscurv/errors.hpp"
#include "losscurv/estimators.hpp"
#include "losscurv/experiments.hpp"
#include "losscurv/field.hpp"
#include "losscurv/geometry.hpp"
#include "losscurv/io.hpp"
#include "losscurv/nn.hpp"

namespace {

using namespace losscurv;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 1;
  std::string format = "both";
};

void add_global_options(CLI::App* cmd, GlobalOpts& opts) {
  cmd->add_option("--seed", opts.seed, "RNG seed echoed into every output");
  cmd->add_option("--out", opts.out, "Output directory")
      ->capture_default_str();
  cmd->add_option("--threads", opts.threads, "Worker threads for inner loops")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", opts.format, "Artifact format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
}

//--------------------------------------------------------------------------
// Small parsers

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    values.push_back(std::stod(item, &used));
    if (used != item.size())
      throw InvalidInput("cannot parse number '" + item + "'");
  }
  if (values.empty()) throw InvalidInput("empty number list");
  return values;
}

// start:stop:count inclusive linspace; count == 1 collapses to {start}.
std::vector<double> parse_range(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3)
    throw InvalidInput("range must be start:stop:count, got '" + text + "'");
  const double start = std::stod(parts[0]);
  const double stop = std::stod(parts[1]);
  const int count = std::stoi(parts[2]);
  if (count < 1) throw InvalidInput("range count must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(count));
  if (count == 1) {
    values[0] = start;
  } else {
    const double step = (stop - start) / (count - 1);
    for (int i = 0; i < count; ++i) values[static_cast<std::size_t>(i)] = start + i * step;
  }
  return values;
}

// Rows split by ';', entries by ','; must be square and symmetric.
SymMatrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';'))
    if (!row.empty()) rows.push_back(parse_list(row));
  const int q = static_cast<int>(rows.size());
  if (q == 0) throw InvalidInput("empty matrix literal");
  SymMatrix a(q);
  for (int i = 0; i < q; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != q)
      throw InvalidInput("matrix literal is not square");
    for (int j = i; j < q; ++j) {
      const double upper = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const double mirrored = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      if (std::abs(upper - mirrored) > 1e-12 * (1.0 + std::abs(upper)))
        throw InvalidInput("matrix literal is not symmetric");
      a.set(i, j, upper);
    }
  }
  return a;
}

std::string join_doubles(std::span<const double> values) {
  std::string text;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text += ",";
    text += format_float(values[i]);
  }
  return text;
}

//--------------------------------------------------------------------------
// Field selection

struct FieldOpts {
  std::string field = "quadratic";
  std::string diag;
  std::string matrix;
  std::string center;
  std::string at;
  std::string model;
  double c = 0.1;
  int dim = 2;
};

void add_field_options(CLI::App* cmd, FieldOpts& opts) {
  cmd->add_option("--field", opts.field,
                  "Built-in field: quadratic|paraboloid|saddle|flat|model")
      ->check(CLI::IsMember({"quadratic", "paraboloid", "saddle", "flat", "model"}))
      ->capture_default_str();
  cmd->add_option("--diag", opts.diag, "Quadratic: diagonal entries a,b,...");
  cmd->add_option("--matrix", opts.matrix,
                  "Quadratic: full symmetric matrix 'a,b;b,c'");
  cmd->add_option("--center", opts.center, "Quadratic: center point");
  cmd->add_option("--c", opts.c, "Saddle decay constant")
      ->capture_default_str();
  cmd->add_option("--dim", opts.dim, "Dimension for paraboloid/flat")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--model", opts.model, "Trained-model JSON (field=model)");
  cmd->add_option("--at", opts.at,
                  "Evaluation point x,y,... (default: origin, or the stored "
                  "parameters for field=model)");
}

struct SelectedField {
  std::unique_ptr<ScalarField> field;
  Vec at;
  ConfigEcho echo;
};

SelectedField build_field(const FieldOpts& opts) {
  SelectedField sel;
  sel.echo.emplace_back("field", opts.field);
  if (opts.field == "quadratic") {
    QuadraticFieldParams p;
    if (!opts.matrix.empty()) {
      p.a = parse_matrix(opts.matrix);
      sel.echo.emplace_back("matrix", opts.matrix);
    } else if (!opts.diag.empty()) {
      const Vec d = parse_list(opts.diag);
      p.a = SymMatrix::diagonal(d);
      sel.echo.emplace_back("diag", opts.diag);
    } else {
      throw InvalidInput("quadratic field needs --diag or --matrix");
    }
    if (!opts.center.empty()) {
      p.center = parse_list(opts.center);
      sel.echo.emplace_back("center", opts.center);
    }
    sel.field = make_quadratic_field(p);
  } else if (opts.field == "paraboloid") {
    QuadraticFieldParams p;
    p.a = SymMatrix::identity(opts.dim);
    sel.field = make_quadratic_field(p);
    sel.echo.emplace_back("dim", std::to_string(opts.dim));
  } else if (opts.field == "saddle") {
    sel.field = make_saddle_field({.c = opts.c});
    sel.echo.emplace_back("c", format_float(opts.c));
  } else if (opts.field == "flat") {
    sel.field = make_constant_field({.dim = opts.dim});
    sel.echo.emplace_back("dim", std::to_string(opts.dim));
  } else if (opts.field == "model") {
    if (opts.model.empty()) throw InvalidInput("field=model needs --model");
    const ModelSnapshot snapshot = load_model_json(opts.model);
    const Dataset data =
        make_sine_dataset(snapshot.dataset.n, snapshot.dataset.noise_sigma,
                          snapshot.dataset.seed);
    sel.field = make_mlp_loss_field(snapshot.spec, data);
    sel.at = snapshot.params;
    sel.echo.emplace_back("model", opts.model);
  }

  if (!opts.at.empty()) sel.at = parse_list(opts.at);
  if (sel.at.empty())
    sel.at.assign(static_cast<std::size_t>(sel.field->dim()), 0.0);
  if (static_cast<int>(sel.at.size()) != sel.field->dim())
    throw InvalidInput("--at has wrong dimension for the selected field");
  sel.echo.emplace_back("at", join_doubles(sel.at));
  return sel;
}

//--------------------------------------------------------------------------
// Output plumbing

void echo_globals(ConfigEcho& echo, const GlobalOpts& g) {
  echo.emplace_back("seed", std::to_string(g.seed));
  echo.emplace_back("threads", std::to_string(g.threads));
}

template <typename Report>
void emit(const GlobalOpts& g, const std::string& name, const Report& report,
          const ConfigEcho& echo) {
  std::filesystem::create_directories(g.out);
  const auto base = std::filesystem::path(g.out) / name;
  if (g.format == "csv" || g.format == "both") {
    std::ofstream os(base.string() + ".csv");
    if (!os) throw Error("cannot open " + base.string() + ".csv");
    write_csv(os, report, echo);
  }
  if (g.format == "json" || g.format == "both") {
    std::ofstream os(base.string() + ".json");
    if (!os) throw Error("cannot open " + base.string() + ".json");
    os << to_json(report, echo) << "\n";
  }
}

// Tensor outputs have no JSON summary beyond the echo; reuse write_csv only.
template <typename Tensor>
void emit_csv_only(const GlobalOpts& g, const std::string& name,
                   const Tensor& tensor, const ConfigEcho& echo) {
  std::filesystem::create_directories(g.out);
  const auto base = std::filesystem::path(g.out) / name;
  std::ofstream os(base.string() + ".csv");
  if (!os) throw Error("cannot open " + base.string() + ".csv");
  write_csv(os, tensor, echo);
}

//--------------------------------------------------------------------------
// Subcommands

void run_curvature(const GlobalOpts& g, const FieldOpts& f) {
  SelectedField sel = build_field(f);
  ConfigEcho echo = sel.echo;
  echo_globals(echo, g);
  const CurvatureReport report = scalar_curvature_at(*sel.field, sel.at);
  emit(g, "curvature", report, echo);
  std::cout << "Sc = " << format_float(report.scalar_curvature)
            << (report.at_critical_point ? " (critical point)" : "")
            << (report.smoothness_warning ? " [non-smooth field]" : "") << "\n";
}

void run_christoffel(const GlobalOpts& g, const FieldOpts& f) {
  SelectedField sel = build_field(f);
  ConfigEcho echo = sel.echo;
  echo_globals(echo, g);
  const ChristoffelTensor gamma = christoffel_at(*sel.field, sel.at);
  emit_csv_only(g, "christoffel", gamma, echo);
  double max_abs = 0.0;
  for (int i = 0; i < gamma.dim(); ++i)
    for (int k = 0; k < gamma.dim(); ++k)
      for (int l = 0; l < gamma.dim(); ++l)
        max_abs = std::max(max_abs, std::abs(gamma(i, k, l)));
  std::cout << "christoffel: dim=" << gamma.dim()
            << " max|Gamma|=" << format_float(max_abs) << "\n";
}

void run_riemann(const GlobalOpts& g, const FieldOpts& f) {
  SelectedField sel = build_field(f);
  ConfigEcho echo = sel.echo;
  echo_globals(echo, g);
  const RiemannTensor riemann = riemann_at(*sel.field, sel.at);
  emit_csv_only(g, "riemann", riemann, echo);
  double max_abs = 0.0;
  for (int i = 0; i < riemann.dim(); ++i)
    for (int j = 0; j < riemann.dim(); ++j)
      for (int k = 0; k < riemann.dim(); ++k)
        for (int m = 0; m < riemann.dim(); ++m)
          max_abs = std::max(max_abs, std::abs(riemann(i, j, k, m)));
  std::cout << "riemann: dim=" << riemann.dim()
            << " max|R|=" << format_float(max_abs) << "\n";
}

void run_saddle_grid(const GlobalOpts& g, double c, const std::string& u_text,
                     const std::string& v_text) {
  const std::vector<double> u = parse_range(u_text);
  const std::vector<double> v = parse_range(v_text);
  if (u.size() < 2 || v.size() < 2)
    throw InvalidInput("saddle-grid needs at least 2 nodes per axis");
  const SaddleGridResult grid =
      saddle_grid(c, {u.front(), u.back(), static_cast<int>(u.size())},
                  {v.front(), v.back(), static_cast<int>(v.size())});
  ConfigEcho echo{{"c", format_float(c)}, {"u", u_text}, {"v", v_text}};
  echo_globals(echo, g);
  emit(g, "saddle_grid", grid, echo);
  std::cout << "saddle-grid: " << grid.records.size() << " nodes (c="
            << format_float(c) << ")\n";
}

void run_ball_volume(const GlobalOpts& g, const FieldOpts& f,
                     const std::string& r_text, int directions,
                     int radial_intervals) {
  SelectedField sel = build_field(f);
  const std::vector<double> radii = parse_range(r_text);
  QuadratureSpec quad;
  quad.n_directions = directions;
  quad.radial_intervals = radial_intervals;
  quad.seed = g.seed;
  quad.threads = g.threads;
  ConfigEcho echo = sel.echo;
  echo.emplace_back("r", r_text);
  echo.emplace_back("directions", std::to_string(directions));
  echo.emplace_back("radial_intervals", std::to_string(radial_intervals));
  echo_globals(echo, g);
  const DeficitFit fit =
      volume_deficit_coefficient(*sel.field, sel.at, radii, quad);
  emit(g, "ball_volume", fit, echo);
  std::cout << "ball-volume: Sc_estimate = " << format_float(fit.sc_estimate)
            << (fit.fit_warning ? " [expansion fit warning]" : "") << "\n";
}

void run_perturb(const GlobalOpts& g, const FieldOpts& f, double epsilon,
                 int directions, const std::string& mode, double slack,
                 int probes) {
  SelectedField sel = build_field(f);
  PerturbationConfig cfg;
  cfg.epsilon = epsilon;
  cfg.n_directions = directions;
  cfg.mode = mode == "gaussian" ? PerturbationMode::kGaussian
                                : PerturbationMode::kUnitSphere;
  cfg.slack = slack;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.trace_probes = probes;
  ConfigEcho echo = sel.echo;
  echo.emplace_back("epsilon", format_float(epsilon));
  echo.emplace_back("directions", std::to_string(directions));
  echo.emplace_back("mode", mode);
  echo_globals(echo, g);
  const PerturbationReport report = perturbation_sweep(*sel.field, sel.at, cfg);
  emit(g, "perturb", report, echo);
  std::cout << "perturb: mean_delta = " << format_float(report.mean_delta)
            << " max_delta = " << format_float(report.max_delta)
            << " violations = " << report.violations << "/"
            << report.n_directions << "\n";
}

void run_escape(const GlobalOpts& g, const std::string& diag,
                const std::string& matrix, double t, double dt, int paths) {
  SymMatrix h(1);
  ConfigEcho echo;
  if (!matrix.empty()) {
    h = parse_matrix(matrix);
    echo.emplace_back("matrix", matrix);
  } else if (!diag.empty()) {
    const Vec d = parse_list(diag);
    h = SymMatrix::diagonal(d);
    echo.emplace_back("diag", diag);
  } else {
    throw InvalidInput("escape needs --diag or --matrix");
  }
  EscapeConfig cfg;
  cfg.t = t;
  cfg.dt = dt;
  cfg.n_paths = paths;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  echo.emplace_back("t", format_float(t));
  echo.emplace_back("dt", format_float(dt));
  echo.emplace_back("paths", std::to_string(paths));
  echo_globals(echo, g);
  const EscapeReport report = ou_escape(h, cfg);
  emit(g, "escape", report, echo);
  std::cout << "escape: empirical = " << format_float(report.empirical_escape)
            << " predicted = " << format_float(report.predicted)
            << " rel_error = " << format_float(report.rel_error) << "\n";
}

void run_minibatch(const GlobalOpts& g, const std::string& hessians,
                   const std::string& model, int k) {
  std::vector<SymMatrix> batches;
  ConfigEcho echo;
  if (!hessians.empty()) {
    std::stringstream ss(hessians);
    std::string item;
    while (std::getline(ss, item, '|'))
      if (!item.empty()) batches.push_back(parse_matrix(item));
    echo.emplace_back("hessians", hessians);
  } else if (!model.empty()) {
    if (k < 2) throw InvalidInput("minibatch --model needs --k >= 2");
    const ModelSnapshot snapshot = load_model_json(model);
    const Dataset data =
        make_sine_dataset(snapshot.dataset.n, snapshot.dataset.noise_sigma,
                          snapshot.dataset.seed);
    for (const Dataset& batch : split_contiguous(data, k))
      batches.push_back(make_mlp_loss_field(snapshot.spec, batch)
                            ->hessian(snapshot.params));
    echo.emplace_back("model", model);
    echo.emplace_back("k", std::to_string(k));
  } else {
    throw InvalidInput("minibatch needs --hessians or --model");
  }
  echo_globals(echo, g);
  const MinibatchReport report = minibatch_analysis(batches);
  emit(g, "minibatch", report, echo);
  std::cout << "minibatch: trace_gap = " << format_float(report.trace_gap)
            << " sc_gap = " << format_float(report.sc_gap) << "\n";
}

void run_train(const GlobalOpts& g, const std::string& widths_text,
               const std::string& activation, int n, double noise,
               std::uint64_t data_seed, const std::string& optimizer,
               double lr, int steps, int batch_size,
               const std::string& model_out, bool save_data) {
  std::vector<int> widths;
  for (double w : parse_list(widths_text)) widths.push_back(static_cast<int>(w));
  const MlpSpec spec = make_mlp_spec(widths, activation_from_string(activation));
  const Dataset data = make_sine_dataset(n, noise, data_seed);

  TrainConfig cfg;
  cfg.optimizer =
      optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
  cfg.learning_rate = lr;
  cfg.steps = steps;
  cfg.batch_size = batch_size;
  cfg.seed = g.seed;
  const TrainResult result = train(spec, data, cfg);

  ConfigEcho echo{{"widths", widths_text}, {"activation", activation},
                  {"n", std::to_string(n)}, {"noise", format_float(noise)},
                  {"data_seed", std::to_string(data_seed)},
                  {"optimizer", optimizer}, {"lr", format_float(lr)},
                  {"steps", std::to_string(steps)},
                  {"batch_size", std::to_string(batch_size)}};
  echo_globals(echo, g);
  emit(g, "train_trace", result.trace, echo);

  std::filesystem::create_directories(g.out);
  ModelSnapshot snapshot;
  snapshot.spec = spec;
  snapshot.dataset = {.n = n, .noise_sigma = noise, .seed = data_seed};
  snapshot.train_config = cfg;
  snapshot.params = result.params;
  snapshot.final_loss = result.final_loss;
  snapshot.final_grad_norm = result.final_grad_norm;
  const std::string path =
      (std::filesystem::path(g.out) / model_out).string();
  save_model_json(path, snapshot);
  if (save_data)
    save_dataset_json((std::filesystem::path(g.out) / "dataset.json").string(),
                      data);
  std::cout << "train: final_loss = " << format_float(result.final_loss)
            << " final_grad_norm = " << format_float(result.final_grad_norm)
            << " model = " << path << "\n";
}

void run_estimate(const GlobalOpts& g, const FieldOpts& f, int probes) {
  SelectedField sel = build_field(f);
  ConfigEcho echo = sel.echo;
  echo.emplace_back("probes", std::to_string(probes));
  echo_globals(echo, g);
  const ScMinEstimate estimate =
      sc_min_estimate(*sel.field, sel.at, probes, g.seed, g.threads);
  emit(g, "estimate", estimate, echo);
  std::cout << "estimate: sc = " << format_float(estimate.sc)
            << " trace = " << format_float(estimate.trace_est.mean)
            << " trace_h2 = " << format_float(estimate.trace2_est.mean)
            << (estimate.near_critical ? "" : " [not critical]") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic curvature analyses of loss-surface graphs"};
  app.require_subcommand(1);

  GlobalOpts g_curv, g_chris, g_riem, g_grid, g_ball, g_pert, g_esc, g_mini,
      g_train, g_est;
  FieldOpts f_curv, f_chris, f_riem, f_ball, f_pert, f_est;

  auto* curvature =
      app.add_subcommand("curvature", "Scalar curvature report at a point");
  add_global_options(curvature, g_curv);
  add_field_options(curvature, f_curv);

  auto* christoffel =
      app.add_subcommand("christoffel", "Christoffel symbols at a point");
  add_global_options(christoffel, g_chris);
  add_field_options(christoffel, f_chris);

  auto* riemann =
      app.add_subcommand("riemann", "Riemann curvature tensor at a point");
  add_global_options(riemann, g_riem);
  add_field_options(riemann, f_riem);

  auto* grid = app.add_subcommand(
      "saddle-grid", "Value/trace/curvature grid of the saddle surface");
  double grid_c = 0.1;
  std::string grid_u = "0:6.283:61", grid_v = "0:6.283:61";
  add_global_options(grid, g_grid);
  grid->add_option("--c", grid_c, "Decay constant")->capture_default_str();
  grid->add_option("--u", grid_u, "u range start:stop:count")
      ->capture_default_str();
  grid->add_option("--v", grid_v, "v range start:stop:count")
      ->capture_default_str();

  auto* ball = app.add_subcommand(
      "ball-volume", "Geodesic-ball volume deficit and Sc estimate");
  std::string ball_r = "0.05:0.3:6";
  int ball_directions = 0, ball_intervals = 16;
  add_global_options(ball, g_ball);
  add_field_options(ball, f_ball);
  ball->add_option("--r", ball_r, "Radii start:stop:count")
      ->capture_default_str();
  ball->add_option("--directions", ball_directions,
                   "Direction count (0 = dimension default)");
  ball->add_option("--radial-intervals", ball_intervals,
                   "Simpson intervals per radius")
      ->capture_default_str();

  auto* perturb = app.add_subcommand(
      "perturb", "Squared loss deltas under weight perturbations");
  double pert_eps = 0.01, pert_slack = -1.0;
  int pert_dirs = 1000, pert_probes = 0;
  std::string pert_mode = "unit-sphere";
  add_global_options(perturb, g_pert);
  add_field_options(perturb, f_pert);
  perturb->add_option("--epsilon", pert_eps, "Radius (or sigma for gaussian)")
      ->capture_default_str();
  perturb->add_option("--directions", pert_dirs, "Number of perturbations")
      ->capture_default_str();
  perturb->add_option("--mode", pert_mode, "unit-sphere|gaussian")
      ->check(CLI::IsMember({"unit-sphere", "gaussian"}))
      ->capture_default_str();
  perturb->add_option("--slack", pert_slack,
                      "Violation slack (default 10*epsilon)");
  perturb->add_option("--probes", pert_probes,
                      "Estimate tr(H^2) with this many probes (0 = dense)");

  auto* escape = app.add_subcommand(
      "escape", "Ornstein-Uhlenbeck escape efficiency around a minimum");
  std::string esc_diag, esc_matrix;
  double esc_t = 0.005, esc_dt = 5e-4;
  int esc_paths = 100000;
  add_global_options(escape, g_esc);
  escape->add_option("--diag", esc_diag, "Hessian diagonal a,b,...");
  escape->add_option("--matrix", esc_matrix, "Full symmetric Hessian");
  escape->add_option("--t", esc_t, "Horizon")->capture_default_str();
  escape->add_option("--dt", esc_dt, "Step size")->capture_default_str();
  escape->add_option("--paths", esc_paths, "Path count")->capture_default_str();

  auto* minibatch = app.add_subcommand(
      "minibatch", "Trace linearity vs curvature gap over batch Hessians");
  std::string mini_hessians, mini_model;
  int mini_k = 0;
  add_global_options(minibatch, g_mini);
  minibatch->add_option("--hessians", mini_hessians,
                        "Batch Hessians 'a,b;b,c|d,e;e,f'");
  minibatch->add_option("--model", mini_model,
                        "Trained-model JSON; batches its dataset");
  minibatch->add_option("--k", mini_k, "Batch count for --model");

  auto* train_cmd =
      app.add_subcommand("train", "Train a tiny MLP on a sine dataset");
  std::string train_widths = "1,16,8,1", train_act = "tanh",
              train_opt = "adam", train_model_out = "model.json";
  int train_n = 70, train_steps = 5000, train_batch = 0;
  double train_noise = 0.05, train_lr = 1e-2;
  std::uint64_t train_data_seed = 0;
  add_global_options(train_cmd, g_train);
  train_cmd->add_option("--widths", train_widths, "Layer widths")
      ->capture_default_str();
  train_cmd->add_option("--activation", train_act, "tanh|relu|identity")
      ->check(CLI::IsMember({"tanh", "relu", "identity"}))
      ->capture_default_str();
  train_cmd->add_option("--n", train_n, "Dataset size")->capture_default_str();
  train_cmd->add_option("--noise", train_noise, "Target noise sigma")
      ->capture_default_str();
  train_cmd->add_option("--data-seed", train_data_seed, "Dataset seed");
  train_cmd->add_option("--optimizer", train_opt, "adam|sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  train_cmd->add_option("--lr", train_lr, "Learning rate")
      ->capture_default_str();
  train_cmd->add_option("--steps", train_steps, "Optimizer steps")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train_batch,
                        "Minibatch size (0 = full batch)");
  train_cmd->add_option("--model-out", train_model_out, "Snapshot file name")
      ->capture_default_str();
  bool train_save_data = false;
  train_cmd->add_flag("--save-data", train_save_data,
                      "Also dump the dataset arrays to dataset.json");

  auto* estimate = app.add_subcommand(
      "estimate", "Stochastic trace/curvature estimates at a point");
  int est_probes = 10000;
  add_global_options(estimate, g_est);
  add_field_options(estimate, f_est);
  estimate->add_option("--probes", est_probes, "Probe count")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (curvature->parsed()) run_curvature(g_curv, f_curv);
    if (christoffel->parsed()) run_christoffel(g_chris, f_chris);
    if (riemann->parsed()) run_riemann(g_riem, f_riem);
    if (grid->parsed()) run_saddle_grid(g_grid, grid_c, grid_u, grid_v);
    if (ball->parsed())
      run_ball_volume(g_ball, f_ball, ball_r, ball_directions, ball_intervals);
    if (perturb->parsed())
      run_perturb(g_pert, f_pert, pert_eps, pert_dirs, pert_mode, pert_slack,
                  pert_probes);
    if (escape->parsed())
      run_escape(g_esc, esc_diag, esc_matrix, esc_t, esc_dt, esc_paths);
    if (minibatch->parsed())
      run_minibatch(g_mini, mini_hessians, mini_model, mini_k);
    if (train_cmd->parsed())
      run_train(g_train, train_widths, train_act, train_n, train_noise,
                train_data_seed, train_opt, train_lr, train_steps, train_batch,
                train_model_out, train_save_data);
    if (estimate->parsed()) run_estimate(g_est, f_est, est_probes);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

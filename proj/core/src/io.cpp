#include "losscurv/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "losscurv/errors.hpp"

namespace losscurv {

using nlohmann::json;

std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

void write_preamble(std::ostream& os, const ConfigEcho& config) {
  for (const auto& [key, value] : config) os << "# " << key << "=" << value << "\n";
}

json config_object(const ConfigEcho& config) {
  json obj = json::object();
  for (const auto& [key, value] : config) obj[key] = value;
  return obj;
}

}  // namespace

//--------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& os, const PerturbationReport& report,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "direction,delta\n";
  for (std::size_t d = 0; d < report.deltas.size(); ++d)
    os << d << "," << format_float(report.deltas[d]) << "\n";
}

void write_csv(std::ostream& os, const EscapeReport& report,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "path,escape\n";
  for (std::size_t p = 0; p < report.per_path_escape.size(); ++p)
    os << p << "," << format_float(report.per_path_escape[p]) << "\n";
}

void write_csv(std::ostream& os, const MinibatchReport& report,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "batch,trace,sc\n";
  for (int b = 0; b < report.k; ++b)
    os << b << ","
       << format_float(report.per_batch_traces[static_cast<std::size_t>(b)])
       << ","
       << format_float(report.per_batch_sc[static_cast<std::size_t>(b)])
       << "\n";
}

void write_csv(std::ostream& os, const SaddleGridResult& grid,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "u,v,f,trace,sc\n";
  for (const auto& rec : grid.records)
    os << format_float(rec.u) << "," << format_float(rec.v) << ","
       << format_float(rec.f) << "," << format_float(rec.trace_h) << ","
       << format_float(rec.sc) << "\n";
}

void write_csv(std::ostream& os, const DeficitFit& fit,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "r,volume,ratio,std_error\n";
  for (std::size_t i = 0; i < fit.radii.size(); ++i)
    os << format_float(fit.radii[i]) << "," << format_float(fit.volumes[i])
       << "," << format_float(fit.ratios[i]) << ","
       << format_float(fit.std_errors[i]) << "\n";
}

void write_csv(std::ostream& os, const CurvatureReport& report,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "beta,grad_norm,trace_h,trace_h2,nuclear_h,frobenius_h,"
        "scalar_curvature,at_critical_point\n";
  os << format_float(report.beta) << "," << format_float(report.grad_norm)
     << "," << format_float(report.trace_h) << ","
     << format_float(report.trace_h2) << "," << format_float(report.nuclear_h)
     << "," << format_float(report.frobenius_h) << ","
     << format_float(report.scalar_curvature) << ","
     << (report.at_critical_point ? 1 : 0) << "\n";
}

void write_csv(std::ostream& os, const ChristoffelTensor& gamma,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "i,k,l,value\n";
  const int q = gamma.dim();
  for (int i = 0; i < q; ++i)
    for (int k = 0; k < q; ++k)
      for (int l = 0; l < q; ++l)
        os << i << "," << k << "," << l << "," << format_float(gamma(i, k, l))
           << "\n";
}

void write_csv(std::ostream& os, const RiemannTensor& riemann,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "i,j,k,m,value\n";
  const int q = riemann.dim();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k)
        for (int m = 0; m < q; ++m)
          os << i << "," << j << "," << k << "," << m << ","
             << format_float(riemann(i, j, k, m)) << "\n";
}

void write_csv(std::ostream& os, const std::vector<TrainRecord>& trace,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "step,loss,grad_norm\n";
  for (const auto& rec : trace)
    os << rec.step << "," << format_float(rec.loss) << ","
       << format_float(rec.grad_norm) << "\n";
}

void write_csv(std::ostream& os, const ScMinEstimate& estimate,
               const ConfigEcho& config) {
  write_preamble(os, config);
  os << "quantity,mean,std_error,n_probes,seed\n";
  os << "trace," << format_float(estimate.trace_est.mean) << ","
     << format_float(estimate.trace_est.std_error) << ","
     << estimate.trace_est.n_probes << "," << estimate.trace_est.seed << "\n";
  os << "trace_h2," << format_float(estimate.trace2_est.mean) << ","
     << format_float(estimate.trace2_est.std_error) << ","
     << estimate.trace2_est.n_probes << "," << estimate.trace2_est.seed
     << "\n";
}

//--------------------------------------------------------------------------
// JSON

namespace {

json trace_estimate_json(const TraceEstimate& est) {
  return {{"mean", est.mean},
          {"std_error", est.std_error},
          {"n_probes", est.n_probes},
          {"seed", est.seed}};
}

}  // namespace

std::string to_json(const PerturbationReport& report,
                    const ConfigEcho& config) {
  json j{{"experiment", "perturbation_sweep"},
         {"config", config_object(config)},
         {"epsilon", report.epsilon},
         {"n_directions", report.n_directions},
         {"seed", report.seed},
         {"mode", report.mode},
         {"bound", report.bound},
         {"trace_h2", report.trace_h2},
         {"violations", report.violations},
         {"mean_delta", report.mean_delta},
         {"max_delta", report.max_delta},
         {"grad_norm", report.grad_norm},
         {"failures", report.failures}};
  return j.dump(2);
}

std::string to_json(const EscapeReport& report, const ConfigEcho& config) {
  json j{{"experiment", "ou_escape"},
         {"config", config_object(config)},
         {"t", report.t},
         {"dt", report.dt},
         {"n_paths", report.n_paths},
         {"seed", report.seed},
         {"empirical_escape", report.empirical_escape},
         {"std_error", report.std_error},
         {"predicted", report.predicted},
         {"rel_error", report.rel_error},
         {"clamped", report.clamped}};
  return j.dump(2);
}

std::string to_json(const MinibatchReport& report, const ConfigEcho& config) {
  json j{{"experiment", "minibatch_analysis"},
         {"config", config_object(config)},
         {"k", report.k},
         {"per_batch_traces", report.per_batch_traces},
         {"per_batch_sc", report.per_batch_sc},
         {"full_trace", report.full_trace},
         {"full_sc", report.full_sc},
         {"mean_batch_trace", report.mean_batch_trace},
         {"mean_batch_sc", report.mean_batch_sc},
         {"trace_gap", report.trace_gap},
         {"sc_gap", report.sc_gap}};
  return j.dump(2);
}

std::string to_json(const SaddleGridResult& grid, const ConfigEcho& config) {
  json j{{"experiment", "saddle_grid"},
         {"config", config_object(config)},
         {"c", grid.c},
         {"u", {{"min", grid.u_axis.min},
                {"max", grid.u_axis.max},
                {"count", grid.u_axis.count}}},
         {"v", {{"min", grid.v_axis.min},
                {"max", grid.v_axis.max},
                {"count", grid.v_axis.count}}},
         {"n_records", grid.records.size()}};
  return j.dump(2);
}

std::string to_json(const DeficitFit& fit, const ConfigEcho& config) {
  json j{{"experiment", "volume_deficit"},
         {"config", config_object(config)},
         {"sc_estimate", fit.sc_estimate},
         {"coefficient", fit.coefficient},
         {"max_residual", fit.max_residual},
         {"fit_warning", fit.fit_warning},
         {"radii", fit.radii},
         {"volumes", fit.volumes},
         {"ratios", fit.ratios},
         {"std_errors", fit.std_errors}};
  return j.dump(2);
}

std::string to_json(const CurvatureReport& report, const ConfigEcho& config) {
  json j{{"experiment", "curvature"},
         {"config", config_object(config)},
         {"point", report.point},
         {"beta", report.beta},
         {"grad_norm", report.grad_norm},
         {"trace_h", report.trace_h},
         {"trace_h2", report.trace_h2},
         {"nuclear_h", report.nuclear_h},
         {"frobenius_h", report.frobenius_h},
         {"scalar_curvature", report.scalar_curvature},
         {"at_critical_point", report.at_critical_point},
         {"smoothness_warning", report.smoothness_warning}};
  return j.dump(2);
}

std::string to_json(const ScMinEstimate& estimate, const ConfigEcho& config) {
  json j{{"experiment", "sc_min_estimate"},
         {"config", config_object(config)},
         {"sc", estimate.sc},
         {"trace", trace_estimate_json(estimate.trace_est)},
         {"trace_h2", trace_estimate_json(estimate.trace2_est)},
         {"grad_norm", estimate.grad_norm},
         {"near_critical", estimate.near_critical}};
  return j.dump(2);
}

std::string to_json(const std::vector<TrainRecord>& trace,
                    const ConfigEcho& config) {
  json j{{"experiment", "train"},
         {"config", config_object(config)},
         {"steps", trace.size()}};
  if (!trace.empty()) {
    j["final_loss"] = trace.back().loss;
    j["final_grad_norm"] = trace.back().grad_norm;
  }
  return j.dump(2);
}

//--------------------------------------------------------------------------
// Model snapshots

namespace {

json spec_json(const MlpSpec& spec) {
  std::vector<std::string> acts;
  for (Activation a : spec.activations) acts.push_back(to_string(a));
  return {{"layer_widths", spec.layer_widths}, {"activations", acts}};
}

MlpSpec spec_from_json(const json& j) {
  MlpSpec spec;
  spec.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  for (const auto& name : j.at("activations"))
    spec.activations.push_back(activation_from_string(name.get<std::string>()));
  spec.validate();
  return spec;
}

}  // namespace

void save_model_json(const std::string& path, const ModelSnapshot& snapshot) {
  json j{{"mlp_spec", spec_json(snapshot.spec)},
         {"dataset",
          {{"n", snapshot.dataset.n},
           {"noise_sigma", snapshot.dataset.noise_sigma},
           {"seed", snapshot.dataset.seed}}},
         {"train_config",
          {{"optimizer", snapshot.train_config.optimizer == OptimizerKind::kAdam
                             ? "adam"
                             : "sgd"},
           {"learning_rate", snapshot.train_config.learning_rate},
           {"steps", snapshot.train_config.steps},
           {"batch_size", snapshot.train_config.batch_size},
           {"seed", snapshot.train_config.seed}}},
         {"params", snapshot.params},
         {"final_loss", snapshot.final_loss},
         {"final_grad_norm", snapshot.final_grad_norm}};
  std::ofstream os(path);
  if (!os) throw Error("save_model_json: cannot open " + path);
  os << j.dump(2) << "\n";
}

ModelSnapshot load_model_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("load_model_json: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error("load_model_json: parse failure in " + path + ": " + e.what());
  }
  ModelSnapshot snapshot;
  try {
    snapshot.spec = spec_from_json(j.at("mlp_spec"));
    const auto& data = j.at("dataset");
    snapshot.dataset.n = data.at("n").get<int>();
    snapshot.dataset.noise_sigma = data.at("noise_sigma").get<double>();
    snapshot.dataset.seed = data.at("seed").get<std::uint64_t>();
    const auto& cfg = j.at("train_config");
    snapshot.train_config.optimizer =
        cfg.at("optimizer").get<std::string>() == "sgd" ? OptimizerKind::kSgd
                                                        : OptimizerKind::kAdam;
    snapshot.train_config.learning_rate = cfg.at("learning_rate").get<double>();
    snapshot.train_config.steps = cfg.at("steps").get<int>();
    snapshot.train_config.batch_size = cfg.at("batch_size").get<int>();
    snapshot.train_config.seed = cfg.at("seed").get<std::uint64_t>();
    snapshot.params = j.at("params").get<Vec>();
    snapshot.final_loss = j.at("final_loss").get<double>();
    snapshot.final_grad_norm = j.at("final_grad_norm").get<double>();
  } catch (const json::exception& e) {
    throw Error("load_model_json: malformed snapshot " + path + ": " +
                e.what());
  }
  if (static_cast<int>(snapshot.params.size()) != snapshot.spec.param_count())
    throw Error("load_model_json: parameter count does not match the architecture");
  return snapshot;
}

void save_dataset_json(const std::string& path, const Dataset& data) {
  json inputs = json::array(), targets = json::array();
  for (int i = 0; i < data.size(); ++i) {
    json xi = json::array(), yi = json::array();
    for (int j = 0; j < data.input_dim(); ++j) xi.push_back(data.inputs(i, j));
    for (int j = 0; j < data.target_dim(); ++j)
      yi.push_back(data.targets(i, j));
    inputs.push_back(xi);
    targets.push_back(yi);
  }
  json j{{"n", data.size()},
         {"input_dim", data.input_dim()},
         {"target_dim", data.target_dim()},
         {"inputs", inputs},
         {"targets", targets}};
  std::ofstream os(path);
  if (!os) throw Error("save_dataset_json: cannot open " + path);
  os << j.dump(2) << "\n";
}

}  // namespace losscurv

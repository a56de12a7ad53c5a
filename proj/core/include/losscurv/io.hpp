#ifndef LOSSCURV_IO_HPP_
#define LOSSCURV_IO_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "losscurv/estimators.hpp"
#include "losscurv/experiments.hpp"
#include "losscurv/geometry.hpp"
#include "losscurv/nn.hpp"

namespace losscurv {

// Serialization of experiment reports. CSV files carry a `# key=value`
// preamble with the resolved configuration, a header row and one record per
// direction/path/grid node; floats are printed with 17 significant digits
// so re-running a configuration reproduces the bytes. JSON summaries hold
// the scalar report fields plus the config echo and seed.

// %.17g rendering used for every CSV float.
std::string format_float(double x);

// Key/value pairs echoed into both formats (resolved CLI config, seeds).
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_csv(std::ostream& os, const PerturbationReport& report,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const EscapeReport& report,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const MinibatchReport& report,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const SaddleGridResult& grid,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const DeficitFit& fit,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const CurvatureReport& report,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const ChristoffelTensor& gamma,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const RiemannTensor& riemann,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const std::vector<TrainRecord>& trace,
               const ConfigEcho& config = {});
void write_csv(std::ostream& os, const ScMinEstimate& estimate,
               const ConfigEcho& config = {});

std::string to_json(const PerturbationReport& report,
                    const ConfigEcho& config = {});
std::string to_json(const EscapeReport& report, const ConfigEcho& config = {});
std::string to_json(const MinibatchReport& report,
                    const ConfigEcho& config = {});
std::string to_json(const SaddleGridResult& grid,
                    const ConfigEcho& config = {});
std::string to_json(const DeficitFit& fit, const ConfigEcho& config = {});
std::string to_json(const CurvatureReport& report,
                    const ConfigEcho& config = {});
std::string to_json(const ScMinEstimate& estimate,
                    const ConfigEcho& config = {});
std::string to_json(const std::vector<TrainRecord>& trace,
                    const ConfigEcho& config = {});

// Trained-model snapshot: spec echo, flat parameter array, the seeds and
// the final metrics. The dataset is stored as its generator configuration.
struct DatasetConfig {
  int n = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct ModelSnapshot {
  MlpSpec spec;
  DatasetConfig dataset;
  TrainConfig train_config;
  Vec params;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
};

void save_model_json(const std::string& path, const ModelSnapshot& snapshot);
ModelSnapshot load_model_json(const std::string& path);

// Full dataset dump (inputs and targets as arrays).
void save_dataset_json(const std::string& path, const Dataset& data);

}  // namespace losscurv

#endif  // LOSSCURV_IO_HPP_

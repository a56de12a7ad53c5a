// End-to-end checks of the command-line tool: exit codes, artifact layout
// and byte-level reproducibility. Each case runs the real binary in a
// scratch directory.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

namespace fs = std::filesystem;

namespace {

const char* kCliPath = LOSSCURV_CLI_PATH;

struct TempDir {
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("losscurv_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const std::string command = std::string(kCliPath) + " " + args + " > " +
                              out_file.string() + " 2> " +
                              (dir / "stderr.txt").string();
  const int status = std::system(command.c_str());
  std::ifstream is(out_file);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return {WEXITSTATUS(status), buffer.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("cli: --help exits 0 and lists every subcommand") {
  TempDir dir;
  const RunResult r = run_cli("--help", dir.path);
  CHECK(r.exit_code == 0);
  for (const char* name :
       {"curvature", "christoffel", "riemann", "saddle-grid", "ball-volume",
        "perturb", "escape", "minibatch", "train", "estimate"})
    CHECK(r.stdout_text.find(name) != std::string::npos);
}

TEST_CASE("cli: unknown subcommand and bad flags exit 2") {
  TempDir dir;
  CHECK(run_cli("no-such-command", dir.path).exit_code == 2);
  CHECK(run_cli("curvature --no-such-flag", dir.path).exit_code == 2);
  // Usage-level semantic error: quadratic without a matrix.
  CHECK(run_cli("curvature --field quadratic", dir.path).exit_code == 2);
}

TEST_CASE("cli: curvature prints Sc = 2 for diag(1,1) at the origin") {
  TempDir dir;
  const RunResult r = run_cli(
      "curvature --field quadratic --diag 1,1 --at 0,0 --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("Sc = 2") != std::string::npos);
  CHECK(fs::exists(dir.path / "curvature.json"));
  CHECK(fs::exists(dir.path / "curvature.csv"));
  const std::string json = slurp(dir.path / "curvature.json");
  CHECK(json.find("\"scalar_curvature\": 2") != std::string::npos);
  CHECK(json.find("\"seed\"") != std::string::npos);
}

TEST_CASE("cli: saddle-grid writes the full grid with header") {
  TempDir dir;
  const RunResult r = run_cli(
      "saddle-grid --c 0.1 --u 0:6:121 --v 0:6.283:121 --format csv --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir.path / "saddle_grid.csv");
  CHECK(csv.find("u,v,f,trace,sc\n") != std::string::npos);
  // 121x121 data rows besides the header and config comments.
  std::size_t data_rows = 0;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'u') ++data_rows;
  CHECK(data_rows == 14641);
  CHECK_FALSE(fs::exists(dir.path / "saddle_grid.json"));  // csv-only run
}

TEST_CASE("cli: ball-volume recovers Sc ~ 2 for the paraboloid") {
  TempDir dir;
  const RunResult r = run_cli(
      "ball-volume --field paraboloid --r 0.05:0.3:6 --directions 64 "
      "--threads 4 --format json --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("Sc_estimate") != std::string::npos);
  const std::string json = slurp(dir.path / "ball_volume.json");
  const auto pos = json.find("\"sc_estimate\": ");
  REQUIRE(pos != std::string::npos);
  const double sc = std::stod(json.substr(pos + 15));
  CHECK(std::abs(sc - 2.0) <= 0.1);
}

TEST_CASE("cli: escape run matches the analytic prediction") {
  TempDir dir;
  const RunResult r = run_cli(
      "escape --diag 1,2 --t 0.005 --dt 0.0005 --paths 20000 --seed 9 "
      "--threads 2 --format json --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 0);
  const std::string json = slurp(dir.path / "escape.json");
  CHECK(json.find("\"predicted\": 0.0125") != std::string::npos);
}

TEST_CASE("cli: minibatch literal Hessians reproduce the counterexample") {
  TempDir dir;
  const RunResult r = run_cli(
      "minibatch --hessians \"2,0;0,0|0,0;0,2\" --format json --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("sc_gap = 2") != std::string::npos);
  const std::string json = slurp(dir.path / "minibatch.json");
  CHECK(json.find("\"trace_gap\": 0.0") != std::string::npos);
  CHECK(json.find("\"sc_gap\": 2.0") != std::string::npos);
}

TEST_CASE("cli: train then reuse the model for estimate and perturb") {
  TempDir dir;
  const RunResult train = run_cli(
      "train --widths 1,6,1 --n 30 --noise 0.05 --steps 400 --seed 4 "
      "--data-seed 11 --save-data --format csv --out " +
          dir.path.string(),
      dir.path);
  CHECK(train.exit_code == 0);
  CHECK(fs::exists(dir.path / "model.json"));
  CHECK(fs::exists(dir.path / "dataset.json"));
  CHECK(fs::exists(dir.path / "train_trace.csv"));
  const std::string trace = slurp(dir.path / "train_trace.csv");
  CHECK(trace.find("step,loss,grad_norm\n") != std::string::npos);
  CHECK(count_lines(trace) >= 400);

  const std::string model_arg =
      " --field model --model " + (dir.path / "model.json").string();
  const RunResult est = run_cli(
      "estimate" + model_arg + " --probes 500 --seed 3 --format json --out " +
          dir.path.string(),
      dir.path);
  CHECK(est.exit_code == 0);
  CHECK(fs::exists(dir.path / "estimate.json"));

  const RunResult pert = run_cli(
      "perturb" + model_arg +
          " --mode gaussian --epsilon 0.1 --directions 50 --seed 5 "
          "--format json --out " +
          dir.path.string(),
      dir.path);
  CHECK(pert.exit_code == 0);
  CHECK(fs::exists(dir.path / "perturb.json"));
}

TEST_CASE("cli: reruns with the same config are byte-identical") {
  TempDir dir_a, dir_b;
  const std::string args =
      "perturb --field quadratic --diag 1,2 --at 0,0 --epsilon 0.01 "
      "--directions 200 --seed 42 --format csv --out ";
  CHECK(run_cli(args + dir_a.path.string(), dir_a.path).exit_code == 0);
  CHECK(run_cli(args + dir_b.path.string(), dir_b.path).exit_code == 0);
  const std::string body_a = slurp(dir_a.path / "perturb.csv");
  CHECK_FALSE(body_a.empty());
  // Bodies are identical up to the --out line in the config echo; strip
  // comments before comparing, then also compare the non-path comments.
  auto strip = [](const std::string& text) {
    std::istringstream is(text);
    std::string line, out;
    while (std::getline(is, line))
      if (line.rfind("# ", 0) != 0) out += line + "\n";
    return out;
  };
  CHECK(strip(body_a) == strip(slurp(dir_b.path / "perturb.csv")));

  // Same directory rerun: full file including the echo must match.
  const std::string again = dir_a.path.string();
  CHECK(run_cli(args + again, dir_a.path).exit_code == 0);
  CHECK(body_a == slurp(dir_a.path / "perturb.csv"));
}

TEST_CASE("cli: christoffel and riemann emit index/value tables") {
  TempDir dir;
  const RunResult r1 = run_cli(
      "christoffel --field paraboloid --at 1,0 --format csv --out " +
          dir.path.string(),
      dir.path);
  CHECK(r1.exit_code == 0);
  const std::string gamma = slurp(dir.path / "christoffel.csv");
  CHECK(gamma.find("i,k,l,value\n") != std::string::npos);

  const RunResult r2 = run_cli(
      "riemann --field paraboloid --at 0,0 --format csv --out " +
          dir.path.string(),
      dir.path);
  CHECK(r2.exit_code == 0);
  const std::string riemann = slurp(dir.path / "riemann.csv");
  CHECK(riemann.find("i,j,k,m,value\n") != std::string::npos);
  CHECK(riemann.find("0,1,0,1,1\n") != std::string::npos);  // R^1_{212} = 1
}

TEST_CASE("cli: runtime failures exit 1") {
  TempDir dir;
  // Indefinite Hessian for the OU process: NotPositiveSemidefinite.
  const RunResult r = run_cli(
      "escape --diag 1,-1 --t 0.01 --dt 0.001 --paths 10 --out " +
          dir.path.string(),
      dir.path);
  CHECK(r.exit_code == 1);
}

#include <doctest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bpalm/cli.hpp"
#include "bpalm/matrix_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bpalm");
  std::ostringstream out, err;
  Run r;
  r.code = bpalm::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bpalm_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream s(text);
  for (std::string line; std::getline(s, line);) out.push_back(line);
  return out;
}

/// phi column of the data rows of a trace CSV.
std::vector<double> phi_column(const std::string& csv) {
  std::vector<double> phi;
  const auto lines = lines_of(csv);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto a = lines[i].find(',');
    phi.push_back(std::stod(lines[i].substr(a + 1, lines[i].find(',', a + 1) - a - 1)));
  }
  return phi;
}

/// The trace with its last column (wall time) removed from every row.
std::string without_wall_time(const std::string& csv) {
  std::string out;
  for (const auto& line : lines_of(csv)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

std::string value_of(const std::string& summary, const std::string& key) {
  for (const auto& line : lines_of(summary))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate: shapes, exactness and determinism") {
  TempDir dir;
  auto r = cli({"generate", "--m", "200", "--n", "2000", "--r", "10", "--noise", "0.05", "--seed",
                "1", "--out-x", dir / "x.csv"});
  REQUIRE(r.code == 0);
  const auto X = bpalm::io::read_matrix(dir / "x.csv");
  CHECK(X.rows() == 200);
  CHECK(X.cols() == 2000);

  r = cli({"generate", "--m", "8", "--n", "20", "--r", "3", "--noise", "0", "--seed", "2",
           "--out-x", dir / "x0.bplm", "--out-u", dir / "u0.bplm", "--out-v", dir / "v0.bplm",
           "--format", "bplm"});
  REQUIRE(r.code == 0);
  const auto X0 = bpalm::io::read_matrix(dir / "x0.bplm");
  const auto UV = oracle::product(bpalm::io::read_matrix(dir / "u0.bplm"),
                                  bpalm::io::read_matrix(dir / "v0.bplm"));
  double diff = 0.0;
  for (std::size_t j = 0; j < UV.size(); ++j) diff += std::abs(X0.values()[j] - UV.values()[j]);
  CHECK(diff <= 1e-13);

  for (const char* name : {"a.csv", "b.csv"})
    REQUIRE(cli({"generate", "--m", "8", "--n", "20", "--r", "3", "--seed", "9", "--out-x",
                 dir / name})
                .code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("solve: summary, trace and determinism") {
  TempDir dir;
  REQUIRE(cli({"generate", "--m", "30", "--n", "80", "--r", "4", "--seed", "3", "--out-x",
               dir / "x.csv"})
              .code == 0);
  std::vector<std::string> traces;
  for (const char* name : {"t1.csv", "t2.csv"}) {
    const auto r = cli({"--threads", "1", "solve", "--x", dir / "x.csv", "--r", "4", "--alg",
                        "abpalm2", "--max-iters", "150", "--trace-out", dir / name,
                        "--result-out", dir / "summary.txt"});
    REQUIRE(r.code == 0);
    for (const char* key : {"algorithm", "lambda_final", "iterations", "phi_final", "f_error",
                            "o_error", "oracle_calls", "wall_time_s"})
      CHECK_FALSE(value_of(r.out, key).empty());
    CHECK(value_of(r.out, "algorithm") == "abpalm2");
    CHECK(value_of(r.out, "iterations") == "150");
    CHECK(slurp(dir / "summary.txt") == r.out);
    traces.push_back(slurp(dir / name));
  }
  CHECK(without_wall_time(traces[0]) == without_wall_time(traces[1]));
  const auto phi = phi_column(traces[0]);
  REQUIRE(phi.size() == 151);
  for (std::size_t k = 1; k < phi.size(); ++k) CHECK(phi[k] <= phi[k - 1]);
}

TEST_CASE("solve: iteration-budget continuation") {
  TempDir dir;
  REQUIRE(cli({"generate", "--m", "20", "--n", "60", "--r", "3", "--seed", "4", "--out-x",
               dir / "x.csv"})
              .code == 0);
  const auto r = cli({"solve", "--x", dir / "x.csv", "--r", "3", "--alg", "bpalm",
                      "--continuation", "--lambda0", "10", "--factor", "1.5", "--stage-iters",
                      "20", "--max-iters", "100", "--trace-out", dir / "t.csv"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "lambda_final") == "50.625");
  CHECK(value_of(r.out, "iterations") == "100");
  std::vector<std::string> markers;
  for (const auto& line : lines_of(slurp(dir / "t.csv")))
    if (line.rfind("# stage=", 0) == 0) markers.push_back(line);
  REQUIRE(markers.size() == 5);
  CHECK(markers[0] == "# stage=0 lambda=10");
  CHECK(markers[4] == "# stage=4 lambda=50.625");
}

TEST_CASE("solve: errors map to exit codes and leave no partial output") {
  TempDir dir;
  auto r = cli({"solve", "--x", dir / "missing.csv", "--r", "2", "--trace-out", dir / "t.csv"});
  CHECK(r.code == bpalm::cli::kIoError);
  CHECK_FALSE(fs::exists(dir / "t.csv"));

  REQUIRE(cli({"generate", "--m", "5", "--n", "8", "--r", "2", "--out-x", dir / "x.csv"}).code ==
          0);
  r = cli({"solve", "--x", dir / "x.csv", "--r", "2", "--alg", "palm"});
  CHECK(r.code == bpalm::cli::kConfigError);
  r = cli({"solve", "--x", dir / "x.csv", "--r", "2", "--lambda", "0"});
  CHECK(r.code == bpalm::cli::kConfigError);
  r = cli({"solve", "--x", dir / "x.csv"});  // missing --r
  CHECK(r.code == bpalm::cli::kConfigError);
  r = cli({"solve", "--x", dir / "x.csv", "--r", "2", "--continuation", "--stage-seconds", "1"});
  CHECK(r.code == bpalm::cli::kConfigError);
  r = cli({});
  CHECK(r.code == bpalm::cli::kConfigError);
  r = cli({"--help"});
  CHECK(r.code == 0);
}

TEST_CASE("check: constants and falsification") {
  auto r = cli({"check"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "L1") == "2");
  CHECK(value_of(r.out, "L2") == "120");
  CHECK(value_of(r.out, "certified") == "true");

  r = cli({"check", "--lambda", "1"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "L2") == "12");

  r = cli({"check", "--l2-override", "6"});
  CHECK(r.code == bpalm::cli::kCheckFailed);
  CHECK(std::stod(value_of(r.out, "max_violation_V")) > 0.0);

  r = cli({"check", "--synthetic", "10", "20", "3", "--samples", "100"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "samples") == "100");
}

TEST_CASE("the executable runs the published recipes") {
  TempDir dir;
  const std::string bin = BPALM_CLI_PATH;
  REQUIRE(shell(bin + " generate --m 200 --n 2000 --r 10 --noise 0.05 --seed 1 --out-x " +
                (dir / "x.bplm") + " --format bplm > /dev/null") == 0);

  REQUIRE(shell(bin + " solve --x " + (dir / "x.bplm") +
                " --alg bpalm --lambda 10 --r 10 --eps 1e-9 --max-seconds 15 --trace-out " +
                (dir / "fixed.csv") + " > /dev/null") == 0);
  const auto phi = phi_column(slurp(dir / "fixed.csv"));
  REQUIRE(phi.size() > 1);
  for (std::size_t k = 1; k < phi.size(); ++k) CHECK(phi[k] <= phi[k - 1]);

  REQUIRE(shell(bin + " solve --x " + (dir / "x.bplm") +
                " --r 10 --alg abpalm1 --continuation --lambda0 10 --factor 1.5"
                " --stage-seconds 3 --max-seconds 15 --trace-out " +
                (dir / "cont.csv") + " > /dev/null") == 0);
  std::size_t markers = 0;
  for (const auto& line : lines_of(slurp(dir / "cont.csv")))
    if (line.rfind("# stage=", 0) == 0) ++markers;
  CHECK(markers == 5);

  CHECK(shell(bin + " solve --x " + (dir / "nope.csv") + " --r 2 --trace-out " +
              (dir / "partial.csv") + " 2> /dev/null") == 1);
  CHECK_FALSE(fs::exists(dir / "partial.csv"));
  CHECK(shell(bin + " check --l2-override 6 > /dev/null") == 4);
}

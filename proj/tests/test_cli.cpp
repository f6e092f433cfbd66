#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "helpers.hpp"

using algsample::cli::run_cli;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return testing_support::data_path(name); }

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "algsample_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Data rows of a CSV document, without metadata and header.
std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

}  // namespace

TEST_CASE("plan reports both rules") {
  const Run r = run({"plan", "--degree", "4", "--C", "8", "--n", "1", "--K", "1", "--eps", "0.1", "--confidence", "0.9"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["confidence_rule"] == 1421224);
  CHECK(j["result"]["strict_rule"] == 12791008);
  CHECK(j["result"]["variance_bound"].get<double>() == doctest::Approx(12791.0073).epsilon(1e-9));
  CHECK(j["config"]["confidence"] == 0.9);
}

TEST_CASE("volume output is deterministic and embeds the configuration") {
  const std::vector<std::string> args = {"volume", data("circle.txt"), "--k", "2000", "--seed", "5"};
  const Run a = run(args);
  const Run b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["config"]["seed"] == 5);
  CHECK(j["config"]["k"] == 2000);
  CHECK(j["config"]["manifold"]["equations"][0] == "x^2 + y^2 - 1");
  CHECK(j["result"]["mean"].get<double>() == doctest::Approx(2 * 3.14159265358979).epsilon(0.05));
  CHECK(j["result"]["unreliable"] == false);
}

TEST_CASE("outputs do not depend on the worker count") {
  const auto dir = scratch_dir();
  const std::vector<std::vector<std::string>> jobs = {
      {"volume", data("eq1.txt"), "--k", "300"},
      {"integrate", data("circle.txt"), "--k", "300", "--integrand", "x^2", "--format", "csv"},
      {"sample", data("eq1.txt"), "--count", "20", "--density", "exp(2*y)", "--explore", "200", "--project", "2"},
      {"compare-baseline", data("ellipse.txt"), "--k", "300", "--R", "3"},
  };
  for (const auto& job : jobs) {
    std::string first;
    for (const char* workers : {"1", "2", "8"}) {
      const std::string path = (dir / (std::string("w") + workers)).string();
      auto args = job;
      args.insert(args.end(), {"--seed", "11", "--workers", workers, "--out", path});
      const Run r = run(args);
      CAPTURE(job[0]);
      REQUIRE(r.code == 0);
      CHECK(r.out.empty());
      const std::string text = read_file(path);
      if (first.empty())
        first = text;
      else
        CHECK(text == first);
    }
  }
}

TEST_CASE("integrate with the zero function is exactly zero") {
  const Run r = run({"integrate", data("eq1.txt"), "--k", "200", "--integrand", "0"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["mean"].get<double>() == 0.0);
  CHECK(j["result"]["variance"].get<double>() == 0.0);
}

TEST_CASE("projective volume is pi") {
  const Run r = run({"volume", data("projective_line.txt"), "--k", "50", "--projective"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["mean"].get<double>() == 3.141592653589793);
  CHECK(j["config"]["manifold"]["projective"] == true);
}

TEST_CASE("sample writes one row per point with variable, alpha and residual columns") {
  const Run r = run({"sample", data("circle.txt"), "--count", "25", "--K", "1", "--C", "1", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\nx,y,alpha,residual\n") != std::string::npos);
  CHECK(r.out.find("# acceptance_rate: ") != std::string::npos);
  CHECK(r.out.find("# kappa: ") != std::string::npos);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 25);
  for (const auto& row : rows) {
    double x = 0, y = 0;
    char comma = 0;
    std::istringstream(row) >> x >> comma >> y;
    CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-10));
  }
  const Run j = run({"sample", data("circle.txt"), "--count", "5", "--K", "1", "--C", "1", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["columns"] == nlohmann::json::array({"x", "y", "alpha", "residual"}));
  CHECK(doc["rows"].size() == 5);
}

TEST_CASE("physics table has mu2 positive wherever mu1 is") {
  // On the unit circle the angle acos(x) is uniform, so rho is constant.
  const Run r = run({"physics", data("circle.txt"), "--k", "2000", "--quantity", "acos(x)*180/pi", "--weight", "2",
                     "--theta-min", "0", "--theta-max", "180", "--theta-step", "30", "--dtheta", "15"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 7);
  for (const auto& row : rows) {
    double t = 0, mu1 = 0, mu2 = 0;
    char comma = 0;
    std::istringstream in(row);
    in >> t >> comma >> mu1 >> comma >> mu2;
    if (mu1 > 0) CHECK(mu2 > 0);
    CHECK(mu1 == doctest::Approx(2 * mu2));
  }
  CHECK(r.out.find("theta0,mu1,mu2,rho") != std::string::npos);
}

TEST_CASE("compare-baseline columns") {
  const Run r = run({"compare-baseline", data("ellipse.txt"), "--k", "100", "--R", "3", "--reference", "13.3649"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\nk,gaussian_slice_estimate,sphere_baseline_estimate,reference\n") != std::string::npos);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 4);  // 10, 20, 50, 100
  CHECK(rows.back().rfind("100,", 0) == 0);
  CHECK(rows.back().substr(rows.back().rfind(',') + 1) == "13.3649");
}

TEST_CASE("exit codes per error family") {
  CHECK(run({}).code == algsample::cli::kUsage);
  CHECK(run({"volume"}).code == algsample::cli::kUsage);
  CHECK(run({"volume", data("circle.txt"), "--format", "xml"}).code == algsample::cli::kUsage);
  CHECK(run({"--help"}).code == algsample::cli::kOk);

  const Run parse = run({"volume", write_file("bad.txt", "vars: x y\ndim: 1\neq: x^2 + * y\n")});
  CHECK(parse.code == algsample::cli::kParse);
  CHECK(parse.err.find("bad.txt:3:11:") != std::string::npos);
  const Run expr = run({"integrate", data("circle.txt"), "--integrand", "x +"});
  CHECK(expr.code == algsample::cli::kParse);
  CHECK(expr.err.find("--integrand:4:") != std::string::npos);
  CHECK(run({"volume", data("circle.txt"), "--box", "z in [0, 1]"}).code == algsample::cli::kParse);

  const Run degree = run({"volume", write_file("low_degree.txt", "vars: x y\ndim: 1\ndegree: 1\neq: x^2 + y^2 - 1\n"),
                          "--k", "200"});
  CHECK(degree.code == algsample::cli::kSolver);

  const Run bounds = run({"sample", data("circle.txt"), "--count", "10", "--kappa", "100"});
  CHECK(bounds.code == algsample::cli::kAcceptance);
  const Run floor = run({"sample", data("circle.txt"), "--count", "10", "--K", "1e6", "--C", "1",
                         "--acceptance-floor", "0.01"});
  CHECK(floor.code == algsample::cli::kAcceptance);

  CHECK(run({"volume", "/nonexistent/manifold.txt"}).code == algsample::cli::kIo);
  CHECK(run({"volume", data("circle.txt"), "--k", "10", "--out", "/nonexistent/dir/out.json"}).code ==
        algsample::cli::kIo);

  const Run domain = run({"integrate", data("circle.txt"), "--k", "50", "--integrand", "log(x)"});
  CHECK(domain.code == algsample::cli::kDomain);
  CHECK(domain.err.find(" at (") != std::string::npos);
  CHECK(run({"compare-baseline", data("eq1.txt"), "--k", "100", "--R", "1"}).code == algsample::cli::kDomain);

  CHECK(run({"sample", data("projective_line.txt"), "--count", "1"}).code == algsample::cli::kUsage);
}

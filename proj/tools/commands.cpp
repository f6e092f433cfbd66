#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "algsample/error.hpp"
#include "algsample/estimators.hpp"
#include "algsample/manifold_file.hpp"
#include "algsample/rng.hpp"

namespace algsample::cli {

namespace {

using Json = nlohmann::ordered_json;

// Stream purpose for the visualization projection; the estimators use 0-3.
constexpr std::uint32_t kProjectPurpose = 4;

struct JobConfig {
  std::string command;
  std::string manifold_path;
  std::size_t k = 10000;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_path;
  std::string format;
  double eps = 0.1;
  double confidence = 0.9;
  std::string integrand = "1";
  std::optional<double> kappa;
  std::optional<double> K;
  std::optional<double> C;
  std::size_t explore = 1000;
  std::optional<double> acceptance_floor;
  std::size_t project = 0;
  std::string box;
  bool projective = false;
  bool explicit_slices = false;
  std::string quantity = "theta";
  std::string weight = "f";
  double theta_min = 60.0;
  double theta_max = 180.0;
  double theta_step = 3.0;
  double dtheta = 3.0;
  double radius = 0.0;
  std::optional<double> reference;
  std::size_t degree = 1;
  std::size_t n = 1;
};

// ParseError together with the input it came from.
struct SourcedParseError {
  std::string source;
  ParseError error;
  // Command-line text has no line numbers worth printing.
  bool has_lines = true;
};

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Result document: resolved configuration, scalar metadata and a table.
struct Document {
  Json config = Json::object();
  Json metadata = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  // A single row rendered as a JSON object under "result".
  bool single_record = false;

  std::string render(const std::string& format) const {
    return format == "json" ? render_json() : render_csv();
  }

 private:
  static std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  std::string render_json() const {
    Json doc = Json::object();
    doc["config"] = config;
    for (const auto& [key, value] : metadata.items()) doc[key] = value;
    if (single_record) {
      Json result = Json::object();
      for (std::size_t i = 0; i < columns.size(); ++i) result[columns[i]] = rows.at(0)[i];
      doc["result"] = result;
    } else {
      doc["columns"] = columns;
      doc["rows"] = rows;
    }
    return doc.dump(2) + "\n";
  }

  std::string render_csv() const {
    std::string s = "# config: " + config.dump() + "\n";
    for (const auto& [key, value] : metadata.items()) s += "# " + key + ": " + cell(value) + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + cell(row[i]);
      s += "\n";
    }
    return s;
  }
};

template <typename F>
auto with_source(const std::string& source, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    throw SourcedParseError{source, e, false};
  }
}

ManifoldFile load(const JobConfig& c, bool force_projective = false) {
  ManifoldOverrides o;
  if (c.projective || force_projective) o.projective = true;
  if (!c.box.empty()) o.box = c.box;
  try {
    return load_manifold(c.manifold_path, o);
  } catch (const ParseError& e) {
    if (e.line() == 0) throw SourcedParseError{"--box", e, false};
    throw SourcedParseError{c.manifold_path, e};
  }
}

ScalarExpression expression(const std::string& text, const ManifoldFile& mf, const std::string& source) {
  return with_source(source, [&] { return parse_scalar_expression(text, mf.variables(), mf.definitions); });
}

EstimatorOptions options(const JobConfig& c) {
  EstimatorOptions o;
  o.workers = c.workers;
  o.explicit_slices = c.explicit_slices;
  return o;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Everything that determines the output. The worker count and output path
// are left out so files agree byte for byte across them.
Json base_config(const JobConfig& c, const ManifoldFile* mf) {
  Json j = Json::object();
  j["command"] = c.command;
  if (mf) {
    Json m = Json::object();
    m["path"] = c.manifold_path;
    m["variables"] = mf->variables();
    m["dimension"] = mf->spec.dimension;
    m["degree_bound"] = mf->spec.degree_bound;
    m["projective"] = mf->spec.projective;
    m["equations"] = mf->equations;
    m["definitions"] = mf->definition_order;
    if (mf->spec.region) {
      Json box = Json::object();
      const auto& iv = mf->spec.region->intervals();
      for (std::size_t i = 0; i < iv.size(); ++i)
        if (std::isfinite(iv[i].lower) || std::isfinite(iv[i].upper))
          box[mf->variables()[i]] = {std::isfinite(iv[i].lower) ? Json(iv[i].lower) : Json(nullptr),
                                     std::isfinite(iv[i].upper) ? Json(iv[i].upper) : Json(nullptr)};
      m["box"] = box;
    }
    if (mf->spec.shift) m["shift"] = std::vector<double>(mf->spec.shift->begin(), mf->spec.shift->end());
    j["manifold"] = m;
    j["seed"] = c.seed;
    j["explicit_slices"] = c.explicit_slices;
  }
  j["format"] = c.format;
  return j;
}

void add_report(Document& d, const EstimatorReport& r, double eps) {
  d.single_record = true;
  d.columns = {"mean",          "variance",       "standard_error", "k",
               "eps",           "chebyshev_bound", "variance_bound", "path_failures",
               "failing_slices", "empty_slices",   "points_total",   "rejected_by_region",
               "rejected_by_residual", "unreliable"};
  d.rows = {{r.mean, r.variance, r.standard_error(), r.k, eps, r.chebyshev_bound(eps),
             optional_number(r.deterministic_variance_bound), r.path_failures, r.failing_slices, r.empty_slices,
             r.points_total, r.rejected_by_region, r.rejected_by_residual, r.unreliable}};
}

int cmd_integrate(const JobConfig& c, Document& d) {
  const ManifoldFile mf = load(c);
  const ScalarExpression f = expression(c.integrand, mf, "--integrand");
  const EstimatorReport r = estimate_integral(mf.spec, f, c.k, c.seed, options(c));
  d.config = base_config(c, &mf);
  d.config["integrand"] = c.integrand;
  d.config["k"] = c.k;
  add_report(d, r, c.eps);
  return r.unreliable ? kSolver : kOk;
}

int cmd_sample(const JobConfig& c, Document& d, bool projective) {
  const ManifoldFile mf = load(c, projective);
  if (!projective && mf.spec.projective)
    throw DimensionError("the manifold is projective; use sample-projective");
  const ScalarExpression f = expression(c.integrand, mf, "--density");
  const EstimatorOptions opt = options(c);
  const std::size_t deg = mf.spec.degree_bound;

  RejectionConfig rc;
  std::optional<ExplorationResult> explored;
  if (c.kappa) {
    if (!(*c.kappa > 0.0)) throw InvalidBoundsError("kappa must be positive");
    rc.kappa = *c.kappa;
    rc.d = deg;
    rc.K = c.K.value_or(0.0);
    rc.C = c.C.value_or(0.0);
  } else {
    if (!c.K || (!projective && !c.C))
      explored = estimate_bounds_by_exploration(mf.spec, f, c.explore, c.seed, opt);
    const double K = c.K ? *c.K : explored->K_hat;
    const double C = c.C ? *c.C : (explored ? explored->C_hat : 0.0);
    rc = projective ? RejectionConfig::projective(deg, K) : RejectionConfig::from_bounds(deg, K, C, mf.spec.dimension);
  }
  if (c.acceptance_floor) rc.acceptance_floor = *c.acceptance_floor;

  const Sample s = projective ? sample_points_projective(mf.spec, f, c.count, rc, c.seed, opt)
                              : sample_points(mf.spec, f, c.count, rc, c.seed, opt);

  d.config = base_config(c, &mf);
  d.config["density"] = c.integrand;
  d.config["count"] = c.count;
  d.config["kappa"] = optional_number(c.kappa);
  d.config["K"] = optional_number(c.K);
  d.config["C"] = optional_number(c.C);
  d.config["explore"] = explored ? Json(c.explore) : Json(nullptr);
  d.config["acceptance_floor"] = rc.acceptance_floor;
  d.config["project"] = c.project;

  d.metadata["kappa"] = s.kappa;
  d.metadata["K"] = rc.K;
  if (!projective) d.metadata["C"] = rc.C;
  if (explored) d.metadata["exploration_points"] = explored->points_seen;
  d.metadata["trials"] = s.trials;
  d.metadata["accepted"] = s.accepted;
  d.metadata["acceptance_rate"] = s.acceptance_rate();
  d.metadata["path_failures"] = s.path_failures;

  const std::size_t N = mf.spec.ambient_dimension();
  d.columns = mf.variables();
  d.columns.push_back("alpha");
  d.columns.push_back("residual");
  Eigen::MatrixXd G;
  if (c.project > 0) {
    RandomStream rng = RandomStream::substream(c.seed, 0, kProjectPurpose);
    G.resize(static_cast<Eigen::Index>(c.project), static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < G.cols(); ++j) G(i, j) = rng.gaussian();
    for (std::size_t i = 0; i < c.project; ++i) d.columns.push_back("proj_" + std::to_string(i + 1));
    d.metadata["projection"] =
        "proj columns are G x with G a seeded standard Gaussian matrix; the projected points are not uniform on the "
        "image";
  }
  for (const auto& p : s.points) {
    std::vector<Json> row(p.coordinates.begin(), p.coordinates.end());
    row.emplace_back(p.alpha);
    row.emplace_back(p.residual);
    if (c.project > 0) {
      const Eigen::VectorXd y = G * p.coordinates;
      row.insert(row.end(), y.begin(), y.end());
    }
    d.rows.push_back(std::move(row));
  }
  return kOk;
}

int cmd_physics(const JobConfig& c, Document& d) {
  const ManifoldFile mf = load(c);
  expression(c.quantity, mf, "--quantity");
  expression(c.weight, mf, "--weight");
  if (!(c.theta_step > 0.0) || !(c.dtheta > 0.0) || !(c.theta_min <= c.theta_max))
    throw DimensionError("the theta grid needs step > 0, dtheta > 0 and min <= max");

  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double t = c.theta_min + static_cast<double>(i) * c.theta_step;
    if (t > c.theta_max + 1e-9 * c.theta_step) break;
    grid.push_back(t);
  }
  std::vector<ScalarExpression> integrands;
  auto window = [&](double t) {
    return "(abs((" + c.quantity + ") - (" + format_number(t) + ")) < " + format_number(c.dtheta) + ")";
  };
  for (double t : grid) integrands.push_back(expression("(" + c.weight + ") * " + window(t), mf, "--weight"));
  for (double t : grid) integrands.push_back(expression(window(t), mf, "--quantity"));

  const auto reports = estimate_integrals(mf.spec, integrands, c.k, c.seed, options(c));

  d.config = base_config(c, &mf);
  d.config["k"] = c.k;
  d.config["quantity"] = c.quantity;
  d.config["weight"] = c.weight;
  d.config["theta_min"] = c.theta_min;
  d.config["theta_max"] = c.theta_max;
  d.config["theta_step"] = c.theta_step;
  d.config["dtheta"] = c.dtheta;

  d.columns = {"theta0", "mu1", "mu2", "rho", "mu1_standard_error", "mu2_standard_error"};
  bool unreliable = false;
  std::optional<double> best_rho, argmax;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const EstimatorReport& r1 = reports[i];
    const EstimatorReport& r2 = reports[i + grid.size()];
    unreliable = unreliable || r1.unreliable || r2.unreliable;
    Json rho = nullptr;
    if (r2.mean > 0.0) {
      const double value = r1.mean / r2.mean;
      rho = value;
      if (!best_rho || value > *best_rho) {
        best_rho = value;
        argmax = grid[i];
      }
    }
    d.rows.push_back({grid[i], r1.mean, r2.mean, rho, r1.standard_error(), r2.standard_error()});
  }
  d.metadata["argmax_theta0"] = optional_number(argmax);
  d.metadata["path_failures"] = reports.empty() ? 0 : reports.front().path_failures;
  d.metadata["unreliable"] = unreliable;
  return unreliable ? kSolver : kOk;
}

std::vector<std::size_t> checkpoints(std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t p = 10; p <= k; p *= 10)
    for (std::size_t m : {1, 2, 5})
      if (m * p <= k) out.push_back(m * p);
  if (out.empty() || out.back() != k) out.push_back(k);
  return out;
}

int cmd_compare_baseline(const JobConfig& c, Document& d) {
  const ManifoldFile mf = load(c);
  EstimatorOptions opt = options(c);
  opt.keep_values = true;
  const EstimatorReport slices = estimate_integral(mf.spec, expression("1", mf, "1"), c.k, c.seed, opt);
  const EstimatorReport baseline = baseline_sphere_estimate(mf.spec, c.radius, c.k, c.seed, opt);
  const auto cps = checkpoints(c.k);
  const auto m1 = running_means(slices.values, cps);
  const auto m2 = running_means(baseline.values, cps);

  d.config = base_config(c, &mf);
  d.config["k"] = c.k;
  d.config["R"] = c.radius;
  d.config["reference"] = optional_number(c.reference);

  d.metadata["gaussian_slice_standard_error"] = slices.standard_error();
  d.metadata["sphere_baseline_standard_error"] = baseline.standard_error();
  d.metadata["unreliable"] = slices.unreliable || baseline.unreliable;
  d.columns = {"k", "gaussian_slice_estimate", "sphere_baseline_estimate", "reference"};
  for (std::size_t i = 0; i < cps.size(); ++i) d.rows.push_back({cps[i], m1[i], m2[i], optional_number(c.reference)});
  return slices.unreliable || baseline.unreliable ? kSolver : kOk;
}

int cmd_plan(const JobConfig& c, Document& d) {
  if (!c.C || !c.K) throw DimensionError("plan needs --C and --K");
  const double bound = variance_bound(static_cast<double>(c.degree), *c.C, c.n, *c.K);
  const SamplePlan plan = plan_sample_size(bound, c.eps, c.confidence);
  d.config = base_config(c, nullptr);
  d.config["degree"] = c.degree;
  d.config["C"] = *c.C;
  d.config["n"] = c.n;
  d.config["K"] = *c.K;
  d.config["eps"] = c.eps;
  d.config["confidence"] = c.confidence;
  d.single_record = true;
  d.columns = {"variance_bound", "confidence_rule", "strict_rule"};
  d.rows = {{bound, plan.confidence_rule, plan.strict_rule}};
  return kOk;
}

void write_output(const JobConfig& c, const std::string& text, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(c.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open output file '" + c.out_path + "'");
  file << text;
  file.close();
  if (!file) throw IoError("failed to write output file '" + c.out_path + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  JobConfig c;
  CLI::App app{"Sampling and integration on algebraic manifolds via random linear slices", "algsample"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out_path, "Output file (default: standard output)");
  };
  auto manifold_options = [&](CLI::App* sub) {
    sub->add_option("manifold", c.manifold_path, "Manifold description file")->required();
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--workers", c.workers, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--box", c.box, "Region override, e.g. \"x in [-1.5, 1.5]; y in [-1.5, 1.5]\"");
    sub->add_flag("--explicit", c.explicit_slices, "Draw slices through the explicit parametrization");
  };

  CLI::App* volume = app.add_subcommand("volume", "Estimate the volume of the manifold");
  CLI::App* integrate = app.add_subcommand("integrate", "Estimate the integral of a function over the manifold");
  for (CLI::App* sub : {volume, integrate}) {
    manifold_options(sub);
    sub->add_option("--k", c.k, "Number of random slices")->check(CLI::PositiveNumber);
    sub->add_option("--eps", c.eps, "Accuracy for the Chebyshev certificate")->check(CLI::PositiveNumber);
    sub->add_flag("--projective", c.projective, "Treat the system as projective");
  }
  integrate->add_option("--integrand", c.integrand, "Integrand expression")->required();

  CLI::App* sample = app.add_subcommand("sample", "Rejection-sample points from a density on the manifold");
  CLI::App* sample_proj =
      app.add_subcommand("sample-projective", "Rejection-sample points on a projective manifold");
  for (CLI::App* sub : {sample, sample_proj}) {
    manifold_options(sub);
    sub->add_option("--count", c.count, "Number of points")->check(CLI::PositiveNumber);
    sub->add_option("--density", c.integrand, "Unnormalized density expression");
    sub->add_option("--kappa", c.kappa, "Rejection constant; overrides K and C");
    sub->add_option("--K", c.K, "Upper bound of the density on the manifold");
    sub->add_option("--explore", c.explore, "Exploration slices used for missing bounds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--acceptance-floor", c.acceptance_floor, "Abort below this acceptance rate");
    sub->add_option("--project", c.project, "Append a random Gaussian projection to this many coordinates");
  }
  sample->add_option("--C", c.C, "Upper bound of |x - shift|^2 on the manifold");

  CLI::App* physics = app.add_subcommand("physics", "Windowed ratio rho(theta0) = mu1 / mu2 over a grid");
  manifold_options(physics);
  physics->add_option("--k", c.k, "Random slices per integral")->check(CLI::PositiveNumber);
  physics->add_option("--quantity", c.quantity, "Observable whose distribution is computed");
  physics->add_option("--weight", c.weight, "Weight function, e.g. a Boltzmann factor");
  physics->add_option("--theta-min", c.theta_min, "First grid value");
  physics->add_option("--theta-max", c.theta_max, "Last grid value");
  physics->add_option("--theta-step", c.theta_step, "Grid spacing");
  physics->add_option("--dtheta", c.dtheta, "Half-width of the window");

  CLI::App* compare =
      app.add_subcommand("compare-baseline", "Running estimates of slice and baseline volume estimators");
  manifold_options(compare);
  compare->add_option("--k", c.k, "Number of slices and of baseline lines")->check(CLI::PositiveNumber);
  compare->add_option("--R", c.radius, "Radius of the disc containing the curve")->required();
  compare->add_option("--reference", c.reference, "Reference value written alongside the estimates");

  CLI::App* plan = app.add_subcommand("plan", "Sample size from the deterministic variance bound");
  plan->add_option("--degree", c.degree, "Degree of the manifold")->required()->check(CLI::PositiveNumber);
  plan->add_option("--C", c.C, "Upper bound of |x|^2 on the manifold")->required();
  plan->add_option("--n", c.n, "Dimension of the manifold")->check(CLI::PositiveNumber);
  plan->add_option("--K", c.K, "Upper bound of the integrand")->required();
  plan->add_option("--eps", c.eps, "Accuracy")->check(CLI::PositiveNumber);
  plan->add_option("--confidence", c.confidence, "Confidence level");

  for (CLI::App* sub : {volume, integrate, sample, sample_proj, physics, compare, plan}) common(sub);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  c.command = chosen->get_name();
  // Reports default to JSON, point sets and tables to CSV.
  if (c.format.empty())
    c.format = (chosen == sample || chosen == sample_proj || chosen == physics || chosen == compare) ? "csv" : "json";

  try {
    Document d;
    int code = kOk;
    if (chosen == volume) {
      c.integrand = "1";
      code = cmd_integrate(c, d);
    } else if (chosen == integrate) {
      code = cmd_integrate(c, d);
    } else if (chosen == sample) {
      code = cmd_sample(c, d, false);
    } else if (chosen == sample_proj) {
      code = cmd_sample(c, d, true);
    } else if (chosen == physics) {
      code = cmd_physics(c, d);
    } else if (chosen == compare) {
      code = cmd_compare_baseline(c, d);
    } else {
      code = cmd_plan(c, d);
    }
    write_output(c, d.render(c.format), out);
    if (code == kSolver) err << "warning: too many slices had failed paths; the estimate is unreliable\n";
    return code;
  } catch (const SourcedParseError& e) {
    err << "error: " << e.source << ":";
    if (e.has_lines) err << e.error.line() << ":";
    err << e.error.column() << ": " << e.error.detail() << "\n";
    return kParse;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DegreeBoundExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const SingularPointError& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const AcceptanceFloorError& e) {
    err << "error: " << e.what() << "\n";
    return kAcceptance;
  } catch (const InvalidBoundsError& e) {
    err << "error: " << e.what() << "\n";
    return kAcceptance;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  }
}

}  // namespace algsample::cli

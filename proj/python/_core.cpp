#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "algsample/error.hpp"
#include "algsample/estimators.hpp"
#include "algsample/manifold_file.hpp"
#include "algsample/solvers.hpp"

namespace py = pybind11;
using namespace algsample;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ScalarExpression expression(const ManifoldFile& m, const std::string& text) {
  return parse_scalar_expression(text, m.variables(), m.definitions);
}

EstimatorOptions options(std::size_t workers, bool explicit_slices) {
  EstimatorOptions o;
  o.workers = workers;
  o.explicit_slices = explicit_slices;
  return o;
}

py::dict report_dict(const EstimatorReport& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["variance"] = r.variance;
  d["standard_error"] = r.standard_error();
  d["k"] = r.k;
  d["variance_bound"] = r.deterministic_variance_bound ? py::cast(*r.deterministic_variance_bound) : py::none();
  d["path_failures"] = r.path_failures;
  d["failing_slices"] = r.failing_slices;
  d["empty_slices"] = r.empty_slices;
  d["points_total"] = r.points_total;
  d["rejected_by_region"] = r.rejected_by_region;
  d["rejected_by_residual"] = r.rejected_by_residual;
  d["unreliable"] = r.unreliable;
  return d;
}

RowMatrix stack(const std::vector<Eigen::VectorXd>& points, std::size_t columns) {
  RowMatrix m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(columns));
  for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return m;
}

// Accepts a single point of shape (N,) or a stack of shape (m, N).
py::object alpha(const ManifoldFile& m, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
  const auto N = static_cast<py::ssize_t>(m.spec.ambient_dimension());
  if (x.ndim() == 1) {
    if (x.shape(0) != N) throw DimensionError("point has the wrong number of coordinates");
    return py::float_(alpha_weight(m.spec, Eigen::Map<const Eigen::VectorXd>(x.data(), N)));
  }
  if (x.ndim() != 2 || x.shape(1) != N) throw DimensionError("points must have shape (N,) or (m, N)");
  py::array_t<double> out(x.shape(0));
  auto o = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < x.shape(0); ++i)
    o(i) = alpha_weight(m.spec, Eigen::Map<const Eigen::VectorXd>(x.data(i, 0), N));
  return std::move(out);
}

py::dict sample(const ManifoldFile& m, const std::string& density, std::size_t count, std::uint64_t seed,
                std::optional<double> K, std::optional<double> C, std::optional<double> kappa_value,
                std::size_t explore, std::size_t workers) {
  const ScalarExpression f = expression(m, density);
  const EstimatorOptions opt = options(workers, false);
  const bool projective = m.spec.projective;
  RejectionConfig rc;
  if (kappa_value) {
    rc.kappa = *kappa_value;
    rc.d = m.spec.degree_bound;
  } else {
    std::optional<ExplorationResult> ex;
    if (!K || (!projective && !C)) ex = estimate_bounds_by_exploration(m.spec, f, explore, seed, opt);
    const double k_bound = K ? *K : ex->K_hat;
    const double c_bound = C ? *C : (ex ? ex->C_hat : 0.0);
    rc = projective ? RejectionConfig::projective(m.spec.degree_bound, k_bound)
                    : RejectionConfig::from_bounds(m.spec.degree_bound, k_bound, c_bound, m.spec.dimension);
  }
  Sample s;
  {
    py::gil_scoped_release release;
    s = projective ? sample_points_projective(m.spec, f, count, rc, seed, opt)
                   : sample_points(m.spec, f, count, rc, seed, opt);
  }
  std::vector<Eigen::VectorXd> coords;
  std::vector<double> alphas, residuals;
  for (const auto& p : s.points) {
    coords.push_back(p.coordinates);
    alphas.push_back(p.alpha);
    residuals.push_back(p.residual);
  }
  py::dict d;
  d["points"] = stack(coords, m.spec.ambient_dimension());
  d["alpha"] = py::array_t<double>(static_cast<py::ssize_t>(alphas.size()), alphas.data());
  d["residual"] = py::array_t<double>(static_cast<py::ssize_t>(residuals.size()), residuals.data());
  d["trials"] = s.trials;
  d["accepted"] = s.accepted;
  d["acceptance_rate"] = s.acceptance_rate();
  d["kappa"] = s.kappa;
  d["path_failures"] = s.path_failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Sampling and integration on algebraic manifolds";

  auto base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(mod, "ParseError", base.ptr());
  py::register_exception<DomainError>(mod, "DomainError", base.ptr());
  py::register_exception<DimensionError>(mod, "DimensionError", base.ptr());
  py::register_exception<SingularPointError>(mod, "SingularPointError", base.ptr());
  py::register_exception<DegreeBoundExceeded>(mod, "DegreeBoundExceeded", base.ptr());
  py::register_exception<SolverError>(mod, "SolverError", base.ptr());
  py::register_exception<InvalidBoundsError>(mod, "InvalidBoundsError", base.ptr());
  py::register_exception<IoError>(mod, "IoError", base.ptr());
  py::register_exception<AcceptanceFloorError>(mod, "AcceptanceFloorError", base.ptr());

  py::class_<ManifoldFile>(mod, "Manifold")
      .def_property_readonly("variables", &ManifoldFile::variables)
      .def_property_readonly("dimension", [](const ManifoldFile& m) { return m.spec.dimension; })
      .def_property_readonly("ambient_dimension", [](const ManifoldFile& m) { return m.spec.ambient_dimension(); })
      .def_property_readonly("degree_bound", [](const ManifoldFile& m) { return m.spec.degree_bound; })
      .def_property_readonly("projective", [](const ManifoldFile& m) { return m.spec.projective; })
      .def_readonly("equations", &ManifoldFile::equations)
      .def_readonly("definitions", &ManifoldFile::definition_order)
      .def("__repr__", [](const ManifoldFile& m) {
        return "<Manifold dim=" + std::to_string(m.spec.dimension) + " in " +
               std::to_string(m.spec.ambient_dimension()) + " variables>";
      });

  mod.def("load_manifold", [](const std::string& path) { return load_manifold(path); }, py::arg("path"),
          "Reads a manifold description file.");
  mod.def("parse_manifold", [](const std::string& text) { return parse_manifold(text); }, py::arg("text"),
          "Parses a manifold description from a string.");

  mod.def(
      "estimate_integral",
      [](const ManifoldFile& m, const std::string& integrand, std::size_t k, std::uint64_t seed, std::size_t workers,
         bool explicit_slices) {
        const ScalarExpression f = expression(m, integrand);
        EstimatorReport r;
        {
          py::gil_scoped_release release;
          r = estimate_integral(m.spec, f, k, seed, options(workers, explicit_slices));
        }
        return report_dict(r);
      },
      py::arg("manifold"), py::arg("integrand") = "1", py::arg("k") = 10000, py::arg("seed") = 0,
      py::arg("workers") = 1, py::arg("explicit_slices") = false,
      "Estimates the integral of an expression over the manifold from k random slices.");

  mod.def(
      "estimate_integrals",
      [](const ManifoldFile& m, const std::vector<std::string>& integrands, std::size_t k, std::uint64_t seed,
         std::size_t workers) {
        std::vector<ScalarExpression> fs;
        for (const auto& t : integrands) fs.push_back(expression(m, t));
        std::vector<EstimatorReport> rs;
        {
          py::gil_scoped_release release;
          rs = estimate_integrals(m.spec, fs, k, seed, options(workers, false));
        }
        py::list out;
        for (const auto& r : rs) out.append(report_dict(r));
        return out;
      },
      py::arg("manifold"), py::arg("integrands"), py::arg("k") = 10000, py::arg("seed") = 0, py::arg("workers") = 1,
      "Several integrals over one shared set of slices.");

  mod.def("sample", &sample, py::arg("manifold"), py::arg("density") = "1", py::arg("count") = 100,
          py::arg("seed") = 0, py::arg("K") = py::none(), py::arg("C") = py::none(), py::arg("kappa") = py::none(),
          py::arg("explore") = 1000, py::arg("workers") = 1,
          "Rejection-samples points from density / integral(density). Missing bounds are explored.");

  mod.def(
      "intersect",
      [](const ManifoldFile& m, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::uint64_t seed) {
        RandomStream rng(seed);
        const WeightedIntersection wi = intersect(m.spec, AffineSlice{A, b}, rng);
        std::vector<Eigen::VectorXd> coords;
        std::vector<double> alphas;
        for (const auto& p : wi.points) {
          coords.push_back(p.coordinates);
          alphas.push_back(p.alpha);
        }
        py::dict d;
        d["points"] = stack(coords, m.spec.ambient_dimension());
        d["alpha"] = py::array_t<double>(static_cast<py::ssize_t>(alphas.size()), alphas.data());
        d["path_failures"] = wi.path_failures;
        d["paths_total"] = wi.paths_total;
        return d;
      },
      py::arg("manifold"), py::arg("A"), py::arg("b"), py::arg("seed") = 0,
      "Real intersection points of the manifold with {x : A x = b}.");

  mod.def("alpha_weight", &alpha, py::arg("manifold"), py::arg("points"),
          "Slice weight at one point (shape (N,)) or at each row of an (m, N) array.");

  mod.def("variance_bound", &variance_bound, py::arg("degree"), py::arg("sup_norm_sq"), py::arg("n"),
          py::arg("sup_f"));
  mod.def(
      "plan_sample_size",
      [](double bound, double eps, double confidence) {
        const SamplePlan p = plan_sample_size(bound, eps, confidence);
        return py::make_tuple(p.confidence_rule, p.strict_rule);
      },
      py::arg("variance_bound"), py::arg("eps"), py::arg("confidence"),
      "Returns (confidence_rule, strict_rule) sample sizes.");
  mod.def(
      "kappa", [](double d, double K, double C, std::size_t n) { return kappa(d, K, C, n); }, py::arg("degree"),
      py::arg("K"), py::arg("C"), py::arg("n"));

  mod.def(
      "solve_system",
      [](const std::vector<std::string>& equations, const std::vector<std::string>& variables) {
        std::vector<Polynomial> polys;
        for (const auto& e : equations) polys.push_back(parse_polynomial(e, variables));
        const PolynomialSystem sys(std::move(polys));
        const TrackReport report = track_total_degree(sys);
        return stack(filter_real(report.solutions), variables.size());
      },
      py::arg("equations"), py::arg("variables"), "Real solutions of a square system by total-degree homotopy.");
}

#include "algsample/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

namespace algsample {

namespace {

constexpr double kPivotRatio = 1e-10;
// Coordinates of a unit representative below this count as zero when
// choosing its sign.
constexpr double kProjectiveZero = 1e-12;

std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

Eigen::MatrixXd gaussian_matrix(RandomStream& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major draw order so the stream layout matches the written shape.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

unsigned max_degree(const PolynomialSystem& system) {
  unsigned d = 0;
  for (const auto& p : system.polynomials()) d = std::max(d, p.total_degree());
  return d;
}

// Solution set {x : C x = e} written as x0 + Z t.
struct AffineParametrization {
  Eigen::VectorXd offset;
  Eigen::MatrixXd basis;
};

AffineParametrization parametrize(const Eigen::MatrixXd& C, const Eigen::VectorXd& e) {
  const Eigen::Index N = C.cols();
  const Eigen::Index k = C.rows();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  double lead = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) lead = std::max(lead, std::fabs(R(i, i)));
  for (Eigen::Index i = 0; i < k; ++i)
    if (!(std::fabs(R(i, i)) > kPivotRatio * lead)) throw SolverError("slice equations are linearly dependent");
  const Eigen::VectorXd y = R.transpose().triangularView<Eigen::Lower>().solve(e);
  return {Q.leftCols(k) * y, Q.rightCols(N - k)};
}

std::vector<std::string> parameter_names(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m; ++i) names.push_back("t" + std::to_string(i + 1));
  return names;
}

struct Candidates {
  std::vector<Eigen::VectorXd> points;  // ambient coordinates
  std::size_t paths_total = 0;
  std::size_t path_failures = 0;
};

// Real solutions of F(offset + basis * t) = 0.
Candidates solve_restricted(const ManifoldSpec& manifold, const AffineParametrization& param, RandomStream& rng,
                            const IntersectOptions& options) {
  SolverSettings settings = options.solver;
  settings.gamma = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  settings.patch_seed = rng.bits();

  const std::size_t m = static_cast<std::size_t>(param.basis.cols());
  const PolynomialSystem restricted = manifold.system.substitute_affine(param.offset, param.basis, parameter_names(m));
  const std::size_t r = restricted.num_equations();
  if (r < m)
    throw DimensionError("manifold has " + std::to_string(r) + " equations but the slice leaves " + std::to_string(m) +
                         " unknowns");

  PolynomialSystem square = restricted;
  if (r > m) {
    const Eigen::MatrixXd mix = gaussian_matrix(rng, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r));
    std::vector<Polynomial> combined;
    for (std::size_t i = 0; i < m; ++i) {
      Polynomial p(restricted.variables());
      for (std::size_t j = 0; j < r; ++j)
        p += restricted[j] * mix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      combined.push_back(std::move(p));
    }
    square = PolynomialSystem(std::move(combined));
  }

  Candidates out;
  for (const auto& p : square.polynomials()) {
    if (p.is_zero()) {
      // The slice lies inside the variety; it happens with probability zero.
      out.paths_total = out.path_failures = 1;
      return out;
    }
    if (p.is_constant()) return out;
  }

  std::vector<ComplexSolution> solutions;
  if (m == 1 && !options.force_homotopy) {
    const std::vector<double> coefficients = square[0].univariate_coefficients();
    solutions = solve_univariate(coefficients, settings);
    out.paths_total = solutions.size();
    for (const auto& s : solutions)
      if (!s.converged) ++out.path_failures;
  } else {
    TrackReport report = track_total_degree(square, settings);
    out.paths_total = report.paths_total;
    out.path_failures = report.paths_failed;
    solutions = std::move(report.solutions);
  }

  SolverSettings polish = settings;
  polish.residual_tolerance = settings.residual_tolerance * 1e-2;
  polish.newton_max_iters = 8;
  for (const Eigen::VectorXd& t : filter_real(solutions, settings)) {
    const RealNewtonResult refined = newton_refine(t, square, polish);
    const Eigen::VectorXd& tt = std::isfinite(refined.residual) ? refined.point : t;
    out.points.push_back(param.offset + param.basis * tt);
  }
  return out;
}

bool near_any(const std::vector<IntersectionPoint>& points, const Eigen::VectorXd& x, double radius) {
  return std::any_of(points.begin(), points.end(),
                     [&](const IntersectionPoint& p) { return (p.coordinates - x).norm() <= radius; });
}

// Shared tail of the affine intersections: verification, dedup, region, weights.
WeightedIntersection finish_affine(const ManifoldSpec& manifold, Slice slice, Candidates candidates,
                                   const std::function<double(const Eigen::VectorXd&)>& slice_residual,
                                   const IntersectOptions& options) {
  WeightedIntersection result;
  result.slice = std::move(slice);
  result.paths_total = candidates.paths_total;
  result.path_failures = candidates.path_failures;
  const double tol = options.solver.residual_tolerance;
  const Box* region = manifold.region ? &*manifold.region : nullptr;
  for (Eigen::VectorXd& x : candidates.points) {
    if (region && !region->contains(x)) {
      ++result.rejected_by_region;
      continue;
    }
    const double residual =
        std::max(manifold.system.residual(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))),
                 slice_residual(x));
    if (!(residual <= tol)) {
      ++result.rejected_by_residual;
      continue;
    }
    if (near_any(result.points, x, options.solver.dedup_radius)) continue;
    result.points.push_back({std::move(x), 1.0, residual});
  }
  if (result.points.size() > manifold.degree_bound)
    throw DegreeBoundExceeded(result.points.size(), manifold.degree_bound);
  for (auto& p : result.points) p.alpha = alpha_weight(manifold, p.coordinates);
  return result;
}

Eigen::VectorXd shift_of(const ManifoldSpec& manifold) {
  return manifold.shift ? *manifold.shift
                        : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(manifold.ambient_dimension()));
}

void require_affine(const ManifoldSpec& manifold) {
  manifold.validate();
  if (manifold.projective) throw DimensionError("intersect requires an affine manifold");
}

}  // namespace

Box Box::whole_space(std::size_t dimension) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box(std::vector<Interval>(dimension, Interval{-inf, inf}));
}

bool Box::contains(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != intervals_.size()) throw DimensionError("box and point dimensions differ");
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const double v = x(static_cast<Eigen::Index>(i));
    if (!(v >= intervals_[i].lower && v <= intervals_[i].upper)) return false;
  }
  return true;
}

std::size_t ManifoldSpec::slice_unknowns() const noexcept {
  const std::size_t N = ambient_dimension();
  return projective ? N - 1 - dimension : N - dimension;
}

void ManifoldSpec::validate() const {
  const std::size_t N = ambient_dimension();
  if (system.num_equations() == 0) throw DimensionError("manifold has no equations");
  if (projective) {
    if (!(dimension > 0 && dimension + 1 < N))
      throw DimensionError("projective dimension must satisfy 0 < n < N - 1");
    for (const auto& p : system.polynomials())
      if (!p.is_homogeneous()) throw DimensionError("projective manifold requires homogeneous equations");
  } else if (!(dimension > 0 && dimension < N)) {
    throw DimensionError("dimension must satisfy 0 < n < N");
  }
  if (system.num_equations() < slice_unknowns())
    throw DimensionError("manifold of dimension " + std::to_string(dimension) + " needs at least " +
                         std::to_string(slice_unknowns()) + " equations");
  if (degree_bound < 1) throw DimensionError("degree bound must be at least 1");
  if (region && region->dimension() != N) throw DimensionError("region dimension does not match the manifold");
  if (region)
    for (const auto& iv : region->intervals())
      if (!(iv.lower <= iv.upper)) throw DimensionError("region interval has lower bound above upper bound");
  if (shift && static_cast<std::size_t>(shift->size()) != N)
    throw DimensionError("shift dimension does not match the manifold");
  if (shift && projective) throw DimensionError("projective manifolds cannot be shifted");
}

std::size_t default_degree_bound(const PolynomialSystem& system, std::size_t dimension, bool projective) {
  const std::size_t N = system.num_variables();
  const std::size_t c = projective ? N - 1 - dimension : N - dimension;
  const unsigned dmax = max_degree(system);
  if (system.num_equations() == c) return static_cast<std::size_t>(bezout_number(system));
  std::size_t bound = 1;
  for (std::size_t i = 0; i < c; ++i) bound *= dmax;
  return bound;
}

AffineSlice sample_affine_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension) {
  const auto n = static_cast<Eigen::Index>(dimension);
  const auto N = static_cast<Eigen::Index>(ambient_dimension);
  AffineSlice s;
  s.A = gaussian_matrix(rng, n, N);
  s.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.b(i) = rng.gaussian();
  return s;
}

ExplicitSlice sample_explicit_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension,
                                    std::size_t* redraws) {
  const auto N = static_cast<Eigen::Index>(ambient_dimension);
  const Eigen::Index k = N - static_cast<Eigen::Index>(dimension) + 1;
  for (;;) {
    const Eigen::MatrixXd U = gaussian_matrix(rng, k, N + 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(U.transpose());
    const Eigen::MatrixXd R = qr.matrixQR().topRows(k);
    double lead = 0.0, low = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
      lead = std::max(lead, std::fabs(R(i, i)));
      low = std::min(low, std::fabs(R(i, i)));
    }
    // Orthonormal basis of rowspan(U), one vector per column.
    const Eigen::MatrixXd B = qr.householderQ() * Eigen::MatrixXd::Identity(N + 1, k);
    const Eigen::VectorXd w = B.row(N).transpose();
    if (!(low > kPivotRatio * lead) || !(w.norm() > kPivotRatio)) {
      if (redraws) ++*redraws;
      continue;
    }
    // Full QR of w: the trailing columns span its orthogonal complement.
    const Eigen::MatrixXd wm = w;
    Eigen::HouseholderQR<Eigen::MatrixXd> wqr(wm);
    const Eigen::MatrixXd W = wqr.householderQ() * Eigen::MatrixXd::Identity(k, k);
    ExplicitSlice s;
    s.base = (B * (w / w.squaredNorm())).head(N);
    s.directions = (B * W.rightCols(k - 1)).topRows(N);
    return s;
  }
}

AffineSlice to_implicit(const ExplicitSlice& slice) {
  const Eigen::Index N = slice.base.size();
  const Eigen::Index c = slice.directions.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(slice.directions);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  AffineSlice s;
  s.A = Q.rightCols(N - c).transpose();
  s.b = s.A * slice.base;
  return s;
}

ProjectiveSlice sample_projective_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension) {
  return {gaussian_matrix(rng, static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(ambient_dimension))};
}

Eigen::MatrixXd normal_projection(const ManifoldSpec& manifold, const Eigen::VectorXd& x) {
  const std::size_t N = manifold.ambient_dimension();
  if (static_cast<std::size_t>(x.size()) != N) throw DimensionError("point dimension does not match the manifold");
  const Eigen::MatrixXd J = manifold.system.jacobian(std::span<const double>(x.data(), N));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J.transpose());
  const Eigen::MatrixXd& R = qr.matrixQR();
  const Eigen::Index diag = std::min(R.rows(), R.cols());
  const double lead = diag > 0 ? std::fabs(R(0, 0)) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < diag; ++i)
    if (std::fabs(R(i, i)) > kPivotRatio * lead) ++rank;
  const std::size_t codim = manifold.projective ? N - 1 - manifold.dimension : N - manifold.dimension;
  if (lead == 0.0 || static_cast<std::size_t>(rank) != codim)
    throw SingularPointError("Jacobian has rank " + std::to_string(lead == 0.0 ? 0 : rank) + ", expected " +
                                 std::to_string(codim) + " (singular point)",
                             to_std(x));
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N), rank);
  return Q * Q.transpose();
}

double alpha_weight(const ManifoldSpec& manifold, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd P = normal_projection(manifold, x);
  const Eigen::VectorXd y = x - shift_of(manifold);
  const double half = (static_cast<double>(manifold.dimension) + 1.0) / 2.0;
  const double numerator = std::sqrt(1.0 + y.dot(P * y));
  return numerator / std::pow(1.0 + y.squaredNorm(), half) * std::tgamma(half) / std::pow(std::numbers::pi, half);
}

WeightedIntersection intersect(const ManifoldSpec& manifold, const AffineSlice& slice, RandomStream& rng,
                               const IntersectOptions& options) {
  require_affine(manifold);
  const auto N = static_cast<Eigen::Index>(manifold.ambient_dimension());
  const auto n = static_cast<Eigen::Index>(manifold.dimension);
  if (slice.A.rows() != n || slice.A.cols() != N || slice.b.size() != n)
    throw DimensionError("slice shape does not match the manifold");
  const Eigen::VectorXd s = shift_of(manifold);
  AffineParametrization param = parametrize(slice.A, slice.b);
  param.offset += s;
  Candidates candidates = solve_restricted(manifold, param, rng, options);
  auto slice_residual = [&](const Eigen::VectorXd& x) {
    return (slice.A * (x - s) - slice.b).cwiseAbs().maxCoeff();
  };
  return finish_affine(manifold, slice, std::move(candidates), slice_residual, options);
}

WeightedIntersection intersect(const ManifoldSpec& manifold, const ExplicitSlice& slice, RandomStream& rng,
                               const IntersectOptions& options) {
  require_affine(manifold);
  const auto N = static_cast<Eigen::Index>(manifold.ambient_dimension());
  const auto c = N - static_cast<Eigen::Index>(manifold.dimension);
  if (slice.base.size() != N || slice.directions.rows() != N || slice.directions.cols() != c)
    throw DimensionError("slice shape does not match the manifold");
  const AffineParametrization param{slice.base + shift_of(manifold), slice.directions};
  Candidates candidates = solve_restricted(manifold, param, rng, options);
  // Points come out parametrized by the slice, so only F needs checking.
  auto slice_residual = [](const Eigen::VectorXd&) { return 0.0; };
  return finish_affine(manifold, slice, std::move(candidates), slice_residual, options);
}

Eigen::VectorXd normalize_projective(const Eigen::VectorXd& x) {
  const double norm = x.norm();
  if (!(norm > 0.0)) throw DomainError("the zero vector is not a projective point", to_std(x));
  Eigen::VectorXd p = x / norm;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (std::fabs(p(i)) > kProjectiveZero) {
      if (p(i) < 0.0) p = -p;
      break;
    }
  }
  return p;
}

WeightedIntersection intersect_projective(const ManifoldSpec& manifold, const ProjectiveSlice& slice,
                                          RandomStream& rng, const IntersectOptions& options) {
  manifold.validate();
  if (!manifold.projective) throw DimensionError("intersect_projective requires a projective manifold");
  const auto N = static_cast<Eigen::Index>(manifold.ambient_dimension());
  const auto n = static_cast<Eigen::Index>(manifold.dimension);
  if (slice.A.rows() != n || slice.A.cols() != N) throw DimensionError("slice shape does not match the manifold");

  // Affine patch <c, x> = 1 appended to A x = 0.
  Eigen::MatrixXd C(n + 1, N);
  C.topRows(n) = slice.A;
  for (Eigen::Index j = 0; j < N; ++j) C(n, j) = rng.gaussian();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
  e(n) = 1.0;
  Candidates candidates = solve_restricted(manifold, parametrize(C, e), rng, options);

  WeightedIntersection result;
  result.slice = slice;
  result.paths_total = candidates.paths_total;
  result.path_failures = candidates.path_failures;
  const double tol = options.solver.residual_tolerance;
  for (const Eigen::VectorXd& x : candidates.points) {
    const double patch_residual = std::fabs(C.row(n).dot(x) - 1.0);
    const Eigen::VectorXd p = normalize_projective(x);
    const double residual =
        std::max(manifold.system.residual(std::span<const double>(p.data(), static_cast<std::size_t>(N))),
                 n > 0 ? (slice.A * p).cwiseAbs().maxCoeff() : 0.0);
    if (!(std::max(residual, patch_residual) <= tol)) {
      ++result.rejected_by_residual;
      continue;
    }
    if (near_any(result.points, p, options.solver.dedup_radius) ||
        near_any(result.points, -p, options.solver.dedup_radius))
      continue;
    if (manifold.region && !manifold.region->contains(p)) {
      ++result.rejected_by_region;
      continue;
    }
    result.points.push_back({p, 1.0, residual});
  }
  if (result.points.size() > manifold.degree_bound)
    throw DegreeBoundExceeded(result.points.size(), manifold.degree_bound);
  return result;
}

double projective_space_volume(std::size_t n) {
  const double half = (static_cast<double>(n) + 1.0) / 2.0;
  return std::pow(std::numbers::pi, half) / std::tgamma(half);
}

}  // namespace algsample

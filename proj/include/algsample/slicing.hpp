#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "algsample/polynomial.hpp"
#include "algsample/rng.hpp"
#include "algsample/solvers.hpp"

namespace algsample {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Axis-aligned box with closed intervals.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {}

  static Box whole_space(std::size_t dimension);

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  std::size_t dimension() const noexcept { return intervals_.size(); }
  bool contains(const Eigen::VectorXd& x) const;

 private:
  std::vector<Interval> intervals_;
};

// An algebraic manifold: the nonsingular real points of the system,
// optionally restricted to a box. For projective manifolds the system is
// homogeneous and `dimension` is the projective dimension.
struct ManifoldSpec {
  PolynomialSystem system;
  std::size_t dimension = 0;
  std::size_t degree_bound = 1;
  std::optional<Box> region;
  bool projective = false;
  // Translation preconditioner: slices are drawn in coordinates y = x - shift.
  std::optional<Eigen::VectorXd> shift;

  std::size_t ambient_dimension() const noexcept { return system.num_variables(); }
  // Number of unknowns left after intersecting with a complementary slice.
  std::size_t slice_unknowns() const noexcept;
  void validate() const;
};

// Bezout number of the square system obtained after slicing (the total
// degree of the tracked homotopy); an upper bound for the degree.
std::size_t default_degree_bound(const PolynomialSystem& system, std::size_t dimension, bool projective = false);

// L = {x : A x = b}
struct AffineSlice {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// L = {u + sum_i t_i v_i}; directions are the columns v_i.
struct ExplicitSlice {
  Eigen::VectorXd base;
  Eigen::MatrixXd directions;
};

// L = {x in P^{N-1} : A x = 0}
struct ProjectiveSlice {
  Eigen::MatrixXd A;
};

using Slice = std::variant<AffineSlice, ExplicitSlice, ProjectiveSlice>;

struct IntersectionPoint {
  Eigen::VectorXd coordinates;
  double alpha = 1.0;
  double residual = 0.0;
};

struct WeightedIntersection {
  Slice slice;
  std::vector<IntersectionPoint> points;
  std::size_t rejected_by_region = 0;
  // Real candidates that failed the residual check on the full system.
  std::size_t rejected_by_residual = 0;
  std::size_t path_failures = 0;
  std::size_t paths_total = 0;

  bool all_paths_failed() const noexcept { return paths_total > 0 && path_failures == paths_total; }
};

struct IntersectOptions {
  SolverSettings solver;
  // Use homotopy continuation even when the univariate fast path applies.
  bool force_homotopy = false;
};

AffineSlice sample_affine_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension);

// Gaussian U in R^{(N-n+1) x (N+1)}; u and the v_i are the row-space
// vectors with last coordinate 1 and 0. Rank-deficient draws are redrawn
// and counted in *redraws.
ExplicitSlice sample_explicit_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension,
                                    std::size_t* redraws = nullptr);

// Implicit description {A x = b} of an explicit slice.
AffineSlice to_implicit(const ExplicitSlice& slice);

ProjectiveSlice sample_projective_slice(RandomStream& rng, std::size_t ambient_dimension, std::size_t dimension);

// Orthogonal projection onto the normal space at x: Q Q^T with Q the
// orthonormal factor of a rank-revealing QR of J(x)^T.
Eigen::MatrixXd normal_projection(const ManifoldSpec& manifold, const Eigen::VectorXd& x);

// sqrt(1 + <y, P y>) / (1 + |y|^2)^((n+1)/2) * Gamma((n+1)/2) / pi^((n+1)/2),
// with y = x - shift and P the normal projection.
double alpha_weight(const ManifoldSpec& manifold, const Eigen::VectorXd& x);

WeightedIntersection intersect(const ManifoldSpec& manifold, const AffineSlice& slice, RandomStream& rng,
                               const IntersectOptions& options = {});
WeightedIntersection intersect(const ManifoldSpec& manifold, const ExplicitSlice& slice, RandomStream& rng,
                               const IntersectOptions& options = {});
WeightedIntersection intersect_projective(const ManifoldSpec& manifold, const ProjectiveSlice& slice,
                                          RandomStream& rng, const IntersectOptions& options = {});

// Unit representative with its first nonzero coordinate positive; entries
// of magnitude at most 1e-12 count as zero.
Eigen::VectorXd normalize_projective(const Eigen::VectorXd& x);

// vol(P^n) = pi^((n+1)/2) / Gamma((n+1)/2)
double projective_space_volume(std::size_t n);

}  // namespace algsample

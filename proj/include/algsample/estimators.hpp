#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "algsample/expression.hpp"
#include "algsample/slicing.hpp"

namespace algsample {

struct EstimatorOptions {
  IntersectOptions intersect;
  // Slices processed concurrently; results do not depend on it.
  std::size_t workers = 1;
  // Reports are flagged unreliable when more than this fraction of slices
  // had at least one failed path.
  double unreliable_fraction = 0.01;
  // Draw slices through the explicit parametrization instead of (A, b).
  bool explicit_slices = false;
  // Keep the per-slice values in the report.
  bool keep_values = false;
};

struct EstimatorReport {
  double mean = 0.0;
  // Unbiased sample variance of the per-slice values.
  double variance = 0.0;
  std::size_t k = 0;
  std::optional<double> deterministic_variance_bound;
  std::size_t path_failures = 0;
  // Slices with at least one failed path.
  std::size_t failing_slices = 0;
  std::size_t empty_slices = 0;
  std::size_t rejected_by_region = 0;
  std::size_t rejected_by_residual = 0;
  std::size_t points_total = 0;
  bool unreliable = false;
  std::vector<double> values;

  // Chebyshev certificate s^2 / (eps^2 k).
  double chebyshev_bound(double eps) const { return variance / (eps * eps * static_cast<double>(k)); }
  double standard_error() const { return std::sqrt(variance / static_cast<double>(k)); }
};

// Sum of f(x)/alpha(x) over the intersection (sum of f(x) when projective).
double fbar(const ManifoldSpec& manifold, const ScalarExpression& f, const WeightedIntersection& wi);

// Estimates the integral of f over the manifold from k random slices.
// Projective manifolds are scaled by vol(P^n).
EstimatorReport estimate_integral(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t k,
                                  std::uint64_t seed, const EstimatorOptions& options = {});

// Several integrands over one set of slices. Each report equals what
// estimate_integral returns for that integrand with the same seed.
std::vector<EstimatorReport> estimate_integrals(const ManifoldSpec& manifold,
                                                const std::vector<ScalarExpression>& integrands, std::size_t k,
                                                std::uint64_t seed, const EstimatorOptions& options = {});

// d^2 (1 + C)^(n+1) pi^(n+1) / Gamma((n+1)/2)^2 * K^2
double variance_bound(double d, double sup_norm_sq, std::size_t n, double sup_f);

struct SamplePlan {
  // ceil(bound / (eps^2 * confidence))
  std::uint64_t confidence_rule = 0;
  // ceil(bound / (eps^2 * (1 - confidence)))
  std::uint64_t strict_rule = 0;
};

SamplePlan plan_sample_size(double variance_bound_value, double eps, double confidence);

// 1/(dK) * Gamma((n+1)/2) / pi^((n+1)/2) / (1 + C)^((n+1)/2)
double kappa(double d, double K, double C, std::size_t n);

struct RejectionConfig {
  double kappa = 0.0;
  double K = 0.0;
  double C = 0.0;
  std::size_t d = 1;
  // Abort when accepted/trials falls below this once enough trials ran.
  double acceptance_floor = 1e-6;

  static RejectionConfig from_bounds(std::size_t d, double K, double C, std::size_t n);
  // kappa = 1/(dK) for projective manifolds.
  static RejectionConfig projective(std::size_t d, double K);
};

struct ExplorationResult {
  double K_hat = 0.0;
  double C_hat = 0.0;
  std::size_t points_seen = 0;
};

// Maxima of f and |x - shift|^2 over the points of `trials` random slices,
// each multiplied by `safety`.
ExplorationResult estimate_bounds_by_exploration(const ManifoldSpec& manifold, const ScalarExpression& f,
                                                 std::size_t trials, std::uint64_t seed,
                                                 const EstimatorOptions& options = {}, double safety = 1.2);

struct SamplePoint {
  Eigen::VectorXd coordinates;
  double alpha = 1.0;
  double residual = 0.0;
};

struct Sample {
  std::vector<SamplePoint> points;
  std::size_t trials = 0;
  std::size_t accepted = 0;
  std::size_t path_failures = 0;
  double kappa = 0.0;

  double acceptance_rate() const { return trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0; }
};

// Rejection sampler for the density f / integral(f) on the manifold.
Sample sample_points(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t count,
                     const RejectionConfig& config, std::uint64_t seed, const EstimatorOptions& options = {});

Sample sample_points_projective(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t count,
                                const RejectionConfig& config, std::uint64_t seed,
                                const EstimatorOptions& options = {});

// Lines with uniform angle and signed offset in [-R, R]; the per-line value
// is pi R h_i, so the mean is (h / 2k) * 2 pi R.
EstimatorReport baseline_sphere_estimate(const ManifoldSpec& manifold, double radius, std::size_t k,
                                         std::uint64_t seed, const EstimatorOptions& options = {});

// Running means of the values after each prefix length in `checkpoints`.
std::vector<double> running_means(const std::vector<double>& values, const std::vector<std::size_t>& checkpoints);

}  // namespace algsample

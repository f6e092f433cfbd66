#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "algsample/polynomial.hpp"

namespace algsample {

struct SolverSettings {
  double residual_tolerance = 1e-10;
  int newton_max_iters = 50;
  double initial_step = 0.1;
  double min_step = 1e-7;
  double real_threshold = 1e-8;
  double dedup_radius = 1e-6;
  // Unit-modulus constant of the start system; callers draw a fresh value per solve.
  std::complex<double> gamma{0.6, 0.8};
  // Seeds the random projective patch used while tracking.
  std::uint64_t patch_seed = 0;
  // Threads used by track_total_degree; results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
};

// residual is max |F_i|. Newton counts as converged once it is below
// residual_tolerance times the system's residual_scale at the point.
struct ComplexSolution {
  Eigen::VectorXcd coordinates;
  double residual = 0.0;
  bool converged = false;
  double condition_estimate = 0.0;
  int iterations = 0;
};

enum class PathOutcome { converged, diverged, failed };

struct TrackReport {
  std::size_t paths_total = 0;
  std::size_t paths_converged = 0;
  std::size_t paths_diverged = 0;
  std::size_t paths_failed = 0;
  // Outcome per start point, ordered by start-point index.
  std::vector<PathOutcome> outcomes;
  // Converged endpoints after deduplication.
  std::vector<ComplexSolution> solutions;
};

// All roots of sum_k coefficients[k] * x^k, with multiplicity. Residuals are
// backward errors |p(z)| / sum |a_k| |z|^k.
std::vector<ComplexSolution> solve_univariate(std::span<const double> coefficients,
                                              const SolverSettings& settings = {});
std::vector<ComplexSolution> solve_univariate(std::span<const std::complex<double>> coefficients,
                                              const SolverSettings& settings = {});

// Tracks the Bezout-many paths of the straight-line homotopy
// (1 - t) * gamma * G + t * F from G = {x_i^{d_i} - 1}.
TrackReport track_total_degree(const PolynomialSystem& target, const SolverSettings& settings = {});

// Real parts of the converged solutions that are numerically real,
// deduplicated within settings.dedup_radius.
std::vector<Eigen::VectorXd> filter_real(std::span<const ComplexSolution> solutions,
                                         const SolverSettings& settings = {});

// Newton's method on a square system.
ComplexSolution newton_refine(const Eigen::VectorXcd& start, const PolynomialSystem& system,
                              const SolverSettings& settings = {});

struct RealNewtonResult {
  Eigen::VectorXd point;
  double residual = 0.0;
  bool converged = false;
  double condition_estimate = 0.0;
  int iterations = 0;
};

RealNewtonResult newton_refine(const Eigen::VectorXd& start, const PolynomialSystem& system,
                               const SolverSettings& settings = {});

}  // namespace algsample

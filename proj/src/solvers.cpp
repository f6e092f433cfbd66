#include "algsample/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "algsample/parallel.hpp"
#include "compiled_polynomial.hpp"

namespace algsample {

using cplx = std::complex<double>;

void SolverSettings::validate() const {
  if (!(residual_tolerance > 0 && initial_step > 0 && min_step > 0 && real_threshold > 0 && dedup_radius > 0))
    throw SolverError("solver tolerances must be strictly positive");
  if (newton_max_iters < 1) throw SolverError("newton_max_iters must be at least 1");
  if (std::fabs(std::abs(gamma) - 1.0) > 1e-12) throw SolverError("gamma must have unit modulus");
}

// ---------------------------------------------------------------------------
// Univariate roots: Aberth-Ehrlich simultaneous iteration.

namespace {

struct HornerResult {
  cplx value;
  cplx derivative;
  double magnitude;  // sum |a_k| |z|^k
};

HornerResult horner(const std::vector<cplx>& a, cplx z) {
  HornerResult r{a.back(), 0.0, std::abs(a.back())};
  const double az = std::abs(z);
  for (std::size_t k = a.size() - 1; k-- > 0;) {
    r.derivative = r.derivative * z + r.value;
    r.value = r.value * z + a[k];
    r.magnitude = r.magnitude * az + std::abs(a[k]);
  }
  return r;
}

double backward_error(const HornerResult& h) {
  return h.magnitude > 0 ? std::abs(h.value) / h.magnitude : std::abs(h.value);
}

std::vector<ComplexSolution> aberth(std::vector<cplx> a, const SolverSettings& settings) {
  while (!a.empty() && a.back() == cplx(0.0)) a.pop_back();
  if (a.empty()) throw SolverError("cannot solve the zero polynomial");
  const std::size_t degree = a.size() - 1;
  if (degree == 0) throw SolverError("polynomial has degree 0");

  // Fujiwara bound on root moduli.
  const double lead = std::abs(a.back());
  double bound = 0.0;
  for (std::size_t k = 1; k <= degree; ++k) {
    double ratio = std::abs(a[degree - k]) / lead;
    if (k == degree) ratio /= 2.0;
    bound = std::max(bound, std::pow(ratio, 1.0 / static_cast<double>(k)));
  }
  bound = 2.0 * bound;
  if (!(bound > 0.0)) bound = 1.0;

  std::vector<cplx> z(degree);
  for (std::size_t k = 0; k < degree; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(degree) + 0.4;
    // Slightly varying radii break symmetric stagnation.
    const double radius = bound * (1.0 - 0.05 * static_cast<double>(k % 3));
    z[k] = std::polar(radius, angle);
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<bool> done(degree, false);
  for (int iter = 0; iter < 800; ++iter) {
    bool all_done = true;
    for (std::size_t k = 0; k < degree; ++k) {
      if (done[k]) continue;
      const HornerResult h = horner(a, z[k]);
      if (backward_error(h) <= 4 * eps) {
        done[k] = true;
        continue;
      }
      all_done = false;
      const cplx ratio = h.value / h.derivative;
      cplx sum = 0.0;
      for (std::size_t j = 0; j < degree; ++j)
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      cplx step = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = ratio;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        // p'(z) = 0 at a non-root: nudge off the critical point.
        z[k] += cplx(1e-3, 1e-3) * (1.0 + std::abs(z[k]));
        continue;
      }
      z[k] -= step;
      if (std::abs(step) <= 2 * eps * std::abs(z[k])) done[k] = true;
    }
    if (all_done) break;
  }

  std::vector<ComplexSolution> roots;
  roots.reserve(degree);
  for (std::size_t k = 0; k < degree; ++k) {
    cplx root = z[k];
    HornerResult h = horner(a, root);
    int iterations = 0;
    // Newton polishing, kept only while it improves the backward error.
    for (int it = 0; it < 5; ++it) {
      if (h.derivative == cplx(0.0)) break;
      const cplx candidate = root - h.value / h.derivative;
      const HornerResult hc = horner(a, candidate);
      if (!(backward_error(hc) < backward_error(h))) break;
      root = candidate;
      h = hc;
      ++iterations;
    }
    ComplexSolution s;
    s.coordinates = Eigen::VectorXcd::Constant(1, root);
    s.residual = backward_error(h);
    s.converged = s.residual <= settings.residual_tolerance;
    s.condition_estimate =
        std::abs(h.derivative) > 0 ? h.magnitude / (std::abs(h.derivative) * std::max(1.0, std::abs(root)))
                                   : std::numeric_limits<double>::infinity();
    s.iterations = iterations;
    roots.push_back(std::move(s));
  }
  return roots;
}

}  // namespace

std::vector<ComplexSolution> solve_univariate(std::span<const double> coefficients, const SolverSettings& settings) {
  return aberth(std::vector<cplx>(coefficients.begin(), coefficients.end()), settings);
}

std::vector<ComplexSolution> solve_univariate(std::span<const cplx> coefficients, const SolverSettings& settings) {
  return aberth(std::vector<cplx>(coefficients.begin(), coefficients.end()), settings);
}

// ---------------------------------------------------------------------------
// Newton refinement.

namespace {

template <typename Scalar>
struct NewtonOutcome {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> point;
  double residual = 0.0;
  bool converged = false;
  double condition = 0.0;
  int iterations = 0;
};

template <typename Scalar>
NewtonOutcome<Scalar> newton(Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x, const PolynomialSystem& system,
                             const SolverSettings& settings) {
  if (!system.is_square()) throw SolverError("newton_refine requires a square system");
  if (static_cast<std::size_t>(x.size()) != system.num_variables())
    throw DimensionError("newton start point has wrong dimension");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const std::size_t n = system.num_variables();

  auto evaluate = [&](const Vec& p, Vec& f) {
    auto values = system.evaluate<Scalar>(std::span<const Scalar>(p.data(), n));
    f = Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(n));
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(f(static_cast<Eigen::Index>(i))));
    return r;
  };

  NewtonOutcome<Scalar> out;
  // One Newton update of p; false when the Jacobian is numerically singular.
  auto step = [&](Vec& p, const Vec& fp) {
    const Mat J = system.jacobian(std::span<const Scalar>(p.data(), n));
    Eigen::PartialPivLU<Mat> lu(J);
    const double rcond = lu.rcond();
    out.condition = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(out.condition < 1e12)) return false;
    p -= lu.solve(fp);
    return true;
  };

  Vec f;
  double residual = evaluate(x, f);
  for (;;) {
    if (residual <= settings.residual_tolerance) {
      out.converged = true;
      break;
    }
    if (residual <= settings.residual_tolerance * system.residual_scale(std::span<const Scalar>(x.data(), n))) {
      // At the rounding floor for this point; one more step may still help.
      Vec candidate = x, fc;
      if (step(candidate, f)) {
        const double rc = evaluate(candidate, fc);
        if (rc < residual) {
          x = std::move(candidate);
          residual = rc;
          ++out.iterations;
        }
      }
      out.converged = true;
      break;
    }
    if (out.iterations >= settings.newton_max_iters || !std::isfinite(residual)) break;
    if (!step(x, f)) break;
    ++out.iterations;
    residual = evaluate(x, f);
  }
  if (out.condition == 0.0) {
    const Mat J = system.jacobian(std::span<const Scalar>(x.data(), n));
    const double rcond = Eigen::PartialPivLU<Mat>(J).rcond();
    out.condition = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  }
  out.point = std::move(x);
  out.residual = residual;
  return out;
}

}  // namespace

ComplexSolution newton_refine(const Eigen::VectorXcd& start, const PolynomialSystem& system,
                              const SolverSettings& settings) {
  auto r = newton<cplx>(start, system, settings);
  ComplexSolution s;
  s.coordinates = std::move(r.point);
  s.residual = r.residual;
  s.converged = r.converged;
  s.condition_estimate = r.condition;
  s.iterations = r.iterations;
  return s;
}

RealNewtonResult newton_refine(const Eigen::VectorXd& start, const PolynomialSystem& system,
                               const SolverSettings& settings) {
  auto r = newton<double>(start, system, settings);
  return {std::move(r.point), r.residual, r.converged, r.condition, r.iterations};
}

// ---------------------------------------------------------------------------
// Total-degree homotopy, tracked on a random affine patch of projective
// space so that paths heading to infinity stay bounded.

namespace {

class ProjectiveHomotopy {
 public:
  ProjectiveHomotopy(const PolynomialSystem& target, cplx gamma, std::uint64_t patch_seed)
      : m_(target.num_variables()), degrees_(target.degrees()), gamma_(gamma) {
    // Unit-size coefficients keep F and the start system on the same scale.
    for (std::size_t i = 0; i < m_; ++i) {
      double largest = 0.0;
      for (const auto& [e, c] : target[i].terms()) largest = std::max(largest, std::fabs(c));
      target_.emplace_back(detail::homogenize(target[i] * (1.0 / largest), degrees_[i]));
    }
    std::mt19937_64 rng(patch_seed);
    std::normal_distribution<double> normal;
    patch_.resize(static_cast<Eigen::Index>(m_ + 1));
    for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(m_); ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      patch_(j) = cplx(re, im);
    }
    patch_ /= patch_.norm();
  }

  std::size_t size() const noexcept { return m_ + 1; }
  const std::vector<unsigned>& degrees() const noexcept { return degrees_; }

  // Start point for a multi-index of roots of unity, scaled onto the patch.
  Eigen::VectorXcd start_point(std::size_t index) const {
    Eigen::VectorXcd z(static_cast<Eigen::Index>(m_ + 1));
    z(0) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const unsigned d = degrees_[i];
      const std::size_t k = index % d;
      index /= d;
      z(static_cast<Eigen::Index>(i + 1)) =
          std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d));
    }
    return z / (patch_.array() * z.array()).sum();
  }

  // H, dH/dz and dH/dt at (z, t).
  void evaluate(const Eigen::VectorXcd& z, double t, Eigen::VectorXcd& H, Eigen::MatrixXcd& J,
                Eigen::VectorXcd* Ht) const {
    const Eigen::Index n = static_cast<Eigen::Index>(m_ + 1);
    H.resize(n);
    J.resize(n, n);
    if (Ht) Ht->resize(n);
    std::vector<cplx> grad(m_ + 1);
    for (std::size_t i = 0; i < m_; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      const cplx f = target_[i].evaluate(z.data(), grad.data());
      const unsigned d = degrees_[i];
      const cplx zi = z(row + 1);
      const cplx z0 = z(0);
      const cplx zi_dm1 = std::pow(zi, static_cast<int>(d - 1));
      const cplx z0_dm1 = std::pow(z0, static_cast<int>(d - 1));
      const cplx g = zi_dm1 * zi - z0_dm1 * z0;
      H(row) = (1.0 - t) * gamma_ * g + t * f;
      for (Eigen::Index j = 0; j < n; ++j) J(row, j) = t * grad[static_cast<std::size_t>(j)];
      J(row, 0) -= (1.0 - t) * gamma_ * static_cast<double>(d) * z0_dm1;
      J(row, row + 1) += (1.0 - t) * gamma_ * static_cast<double>(d) * zi_dm1;
      if (Ht) (*Ht)(row) = f - gamma_ * g;
    }
    H(n - 1) = (patch_.array() * z.array()).sum() - 1.0;
    J.row(n - 1) = patch_.transpose();
    if (Ht) (*Ht)(n - 1) = 0.0;
  }

 private:
  std::size_t m_;
  std::vector<unsigned> degrees_;
  cplx gamma_;
  std::vector<detail::CompiledPolynomial> target_;
  Eigen::VectorXcd patch_;
};

double affine_norm(const Eigen::VectorXcd& z) {
  const double z0 = std::abs(z(0));
  const double rest = z.tail(z.size() - 1).norm();
  return z0 == 0.0 ? std::numeric_limits<double>::infinity() : rest / z0;
}

constexpr double kDivergenceNorm = 1e10;

struct PathResult {
  PathOutcome outcome = PathOutcome::failed;
  Eigen::VectorXcd endpoint;  // projective coordinates
};

PathResult track_path(const ProjectiveHomotopy& h, std::size_t index, const SolverSettings& settings,
                      double max_step) {
  PathResult result;
  Eigen::VectorXcd z = h.start_point(index);
  Eigen::VectorXcd H, Ht, dz, zp, delta;
  Eigen::MatrixXcd J;
  double t = 0.0;
  double dt = std::min(settings.initial_step, max_step);
  int streak = 0;
  constexpr int max_steps = 20000;
  // Loose along the path; endpoints are polished by Newton at t = 1.
  constexpr double corrector_tol = 1e-6;

  auto correct = [&](Eigen::VectorXcd& x, double at, double predictor_size) {
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 3; ++it) {
      h.evaluate(x, at, H, J, nullptr);
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
      delta = lu.solve(H);
      const double size = delta.norm();
      if (!std::isfinite(size)) return false;
      // The first correction must be small next to the predictor move,
      // otherwise the corrector may be converging to a neighbouring path.
      if (it == 0 && size > 0.5 * predictor_size + 1e-8 * (1.0 + x.norm())) return false;
      if (it > 0 && size > 0.5 * previous) return false;
      x -= delta;
      if (size <= corrector_tol * (1.0 + x.norm())) return true;
      previous = size;
    }
    return false;
  };

  bool abandoned = false;
  for (int step = 0; t < 1.0; ++step) {
    if (step >= max_steps) {
      abandoned = true;
      break;
    }
    const double remaining = 1.0 - t;
    const bool last = dt >= remaining;
    const double h_step = last ? remaining : dt;
    const double t_next = last ? 1.0 : t + h_step;
    h.evaluate(z, t, H, J, &Ht);
    dz = -Eigen::PartialPivLU<Eigen::MatrixXcd>(J).solve(Ht);
    zp = z + h_step * dz;
    const double predictor_size = h_step * dz.norm();
    if (std::isfinite(predictor_size) && correct(zp, t_next, predictor_size)) {
      z = zp;
      t = t_next;
      if (++streak >= 4) {
        dt = std::min(2.0 * dt, max_step);
        streak = 0;
      }
      if (affine_norm(z) > kDivergenceNorm) {
        result.outcome = PathOutcome::diverged;
        result.endpoint = z;
        return result;
      }
    } else {
      dt *= 0.5;
      streak = 0;
      if (dt < settings.min_step) {
        abandoned = true;
        break;
      }
    }
  }

  if (abandoned && t < 0.99) {
    result.outcome = PathOutcome::failed;
    result.endpoint = z;
    return result;
  }

  // Newton at t = 1 on the projective system. Endpoints at infinity are
  // typically singular and approached linearly, so allow extra iterations.
  const int end_iters = std::max(2 * settings.newton_max_iters, 100);
  for (int it = 0; it < end_iters; ++it) {
    h.evaluate(z, 1.0, H, J, nullptr);
    delta = Eigen::PartialPivLU<Eigen::MatrixXcd>(J).solve(H);
    if (!std::isfinite(delta.norm())) break;
    z -= delta;
    if (delta.norm() <= 1e-15 * (1.0 + z.norm())) break;
  }
  result.endpoint = z;
  result.outcome = affine_norm(z) > kDivergenceNorm ? PathOutcome::diverged : PathOutcome::converged;
  return result;
}

}  // namespace

TrackReport track_total_degree(const PolynomialSystem& target, const SolverSettings& settings) {
  settings.validate();
  if (!target.is_square())
    throw SolverError("track_total_degree requires a square system, got " + std::to_string(target.num_equations()) +
                      " equations in " + std::to_string(target.num_variables()) + " unknowns");
  if (target.num_variables() == 0) throw SolverError("system has no unknowns");
  for (const auto& p : target.polynomials())
    if (p.total_degree() == 0) throw SolverError("every polynomial of the target system must be nonconstant");

  const ProjectiveHomotopy homotopy(target, settings.gamma, settings.patch_seed);
  const std::size_t total = static_cast<std::size_t>(bezout_number(target));
  const std::size_t m = target.num_variables();

  TrackReport report;
  std::vector<PathResult> paths(total);
  std::vector<ComplexSolution> endpoints(total);

  double max_step = settings.initial_step;
  for (int attempt = 0; attempt < 3; ++attempt) {
    parallel_for(total, settings.workers, [&](std::size_t i) {
      paths[i] = track_path(homotopy, i, settings, max_step);
      ComplexSolution& s = endpoints[i];
      s = ComplexSolution{};
      if (paths[i].outcome != PathOutcome::converged) return;
      const Eigen::VectorXcd& z = paths[i].endpoint;
      Eigen::VectorXcd x = z.tail(static_cast<Eigen::Index>(m)) / z(0);
      s = newton_refine(x, target, settings);
      if (!s.converged) paths[i].outcome = PathOutcome::failed;
    });

    // Two paths landing on the same nonsingular endpoint means one of them
    // jumped; retrack everything with a smaller step cap.
    bool collision = false;
    for (std::size_t i = 0; i < total && !collision; ++i) {
      if (paths[i].outcome != PathOutcome::converged || endpoints[i].condition_estimate > 1e8) continue;
      for (std::size_t j = i + 1; j < total; ++j) {
        if (paths[j].outcome != PathOutcome::converged) continue;
        if ((endpoints[i].coordinates - endpoints[j].coordinates).norm() <= settings.dedup_radius) {
          collision = true;
          break;
        }
      }
    }
    if (!collision) break;
    max_step *= 0.25;
  }

  report.paths_total = total;
  report.outcomes.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    report.outcomes.push_back(paths[i].outcome);
    switch (paths[i].outcome) {
      case PathOutcome::converged: {
        ++report.paths_converged;
        const bool duplicate =
            std::any_of(report.solutions.begin(), report.solutions.end(), [&](const ComplexSolution& s) {
              return (s.coordinates - endpoints[i].coordinates).norm() <= settings.dedup_radius;
            });
        if (!duplicate) report.solutions.push_back(endpoints[i]);
        break;
      }
      case PathOutcome::diverged: ++report.paths_diverged; break;
      case PathOutcome::failed: ++report.paths_failed; break;
    }
  }
  return report;
}

std::vector<Eigen::VectorXd> filter_real(std::span<const ComplexSolution> solutions, const SolverSettings& settings) {
  std::vector<Eigen::VectorXd> real;
  for (const auto& s : solutions) {
    if (!s.converged) continue;
    const Eigen::VectorXcd& x = s.coordinates;
    const double max_imag = x.size() ? x.imag().cwiseAbs().maxCoeff() : 0.0;
    const double max_abs = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    if (max_imag > settings.real_threshold * (1.0 + max_abs)) continue;
    Eigen::VectorXd r = x.real();
    const bool duplicate = std::any_of(real.begin(), real.end(), [&](const Eigen::VectorXd& other) {
      return (other - r).norm() <= settings.dedup_radius;
    });
    if (!duplicate) real.push_back(std::move(r));
  }
  return real;
}

}  // namespace algsample

#include "algsample/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "algsample/parallel.hpp"

namespace algsample {

namespace {

// Substream purposes, so different jobs with one seed use unrelated slices.
enum : std::uint32_t { kIntegrate = 0, kSample = 1, kExplore = 2, kBaseline = 3 };

constexpr std::size_t kBlock = 1024;

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      compensation_ += (sum_ - t) + v;
    else
      compensation_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

WeightedIntersection draw_and_intersect(const ManifoldSpec& manifold, RandomStream& rng,
                                        const EstimatorOptions& options) {
  const std::size_t N = manifold.ambient_dimension();
  if (manifold.projective)
    return intersect_projective(manifold, sample_projective_slice(rng, N, manifold.dimension), rng,
                                options.intersect);
  if (options.explicit_slices)
    return intersect(manifold, sample_explicit_slice(rng, N, manifold.dimension), rng, options.intersect);
  return intersect(manifold, sample_affine_slice(rng, N, manifold.dimension), rng, options.intersect);
}

double evaluate_at(const ScalarExpression& f, const Eigen::VectorXd& x) {
  return f.evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

void require_integrand(const ManifoldSpec& manifold, const ScalarExpression& f) {
  if (f.num_variables() != manifold.ambient_dimension())
    throw DimensionError("integrand has " + std::to_string(f.num_variables()) + " variables, manifold has " +
                         std::to_string(manifold.ambient_dimension()));
}

EstimatorReport summarize(std::vector<double> values, bool keep) {
  EstimatorReport r;
  r.k = values.size();
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  r.mean = sum.value() / static_cast<double>(r.k);
  CompensatedSum squares;
  for (double v : values) squares.add((v - r.mean) * (v - r.mean));
  r.variance = r.k > 1 ? squares.value() / static_cast<double>(r.k - 1) : 0.0;
  if (keep) r.values = std::move(values);
  return r;
}

void require_sampling_density(double value, const Eigen::VectorXd& x) {
  if (value < 0.0)
    throw DomainError("density is negative at an intersection point",
                      std::vector<double>(x.data(), x.data() + x.size()));
}

struct Trial {
  std::vector<IntersectionPoint> points;
  double fbar = 0.0;
  double acceptance = 0.0;  // kappa * fbar
  bool accepted = false;
  std::size_t selected = 0;
  std::size_t path_failures = 0;
  // Raised while processing the trial; rethrown only if the merge reaches it.
  std::exception_ptr error;
};

Sample rejection_sample(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t count,
                        const RejectionConfig& config, std::uint64_t seed, const EstimatorOptions& options) {
  manifold.validate();
  require_integrand(manifold, f);
  if (!(config.kappa > 0.0)) throw InvalidBoundsError("kappa must be positive");
  if (!(config.acceptance_floor >= 0.0 && config.acceptance_floor < 1.0))
    throw InvalidBoundsError("acceptance floor must lie in [0, 1)");

  Sample sample;
  sample.kappa = config.kappa;
  const double check_after =
      config.acceptance_floor > 0.0 ? std::max(1000.0, 3.0 / config.acceptance_floor) : HUGE_VAL;
  std::vector<Trial> block(kBlock);
  for (std::size_t start = 0; sample.points.size() < count; start += kBlock) {
    parallel_for(kBlock, options.workers, [&](std::size_t j) {
      Trial& t = block[j];
      t = Trial{};
      try {
        RandomStream rng = RandomStream::substream(seed, start + j, kSample);
        WeightedIntersection wi = draw_and_intersect(manifold, rng, options);
        t.path_failures = wi.path_failures;
        std::vector<double> weights;
        for (const auto& p : wi.points) {
          const double value = evaluate_at(f, p.coordinates);
          require_sampling_density(value, p.coordinates);
          weights.push_back(value / p.alpha);
          t.fbar += weights.back();
        }
        t.acceptance = config.kappa * t.fbar;
        t.accepted = rng.uniform() < t.acceptance;
        if (t.accepted) {
          const double target = rng.uniform() * t.fbar;
          double cumulative = 0.0;
          t.selected = weights.size() - 1;
          for (std::size_t i = 0; i < weights.size(); ++i) {
            cumulative += weights[i];
            if (target < cumulative) {
              t.selected = i;
              break;
            }
          }
        }
        t.points = std::move(wi.points);
      } catch (...) {
        t.error = std::current_exception();
      }
    });

    for (std::size_t j = 0; j < kBlock && sample.points.size() < count; ++j) {
      const Trial& t = block[j];
      if (t.error) std::rethrow_exception(t.error);
      ++sample.trials;
      sample.path_failures += t.path_failures;
      if (t.acceptance > 1.0)
        throw InvalidBoundsError("kappa * fbar = " + std::to_string(t.acceptance) +
                                 " exceeds 1 on slice " + std::to_string(start + j) +
                                 "; the bounds K or C are too small");
      if (!t.accepted) continue;
      ++sample.accepted;
      const IntersectionPoint& p = t.points[t.selected];
      sample.points.push_back({p.coordinates, p.alpha, p.residual});
    }
    if (sample.points.size() < count && static_cast<double>(sample.trials) >= check_after &&
        sample.acceptance_rate() < config.acceptance_floor)
      throw AcceptanceFloorError("acceptance rate " + std::to_string(sample.acceptance_rate()) +
                                     " fell below the floor after " + std::to_string(sample.trials) +
                                     " trials; translate the manifold towards the origin or tighten C and K",
                                 sample.trials, sample.accepted);
  }
  return sample;
}

}  // namespace

double fbar(const ManifoldSpec& manifold, const ScalarExpression& f, const WeightedIntersection& wi) {
  CompensatedSum sum;
  for (const auto& p : wi.points) {
    const double value = evaluate_at(f, p.coordinates);
    sum.add(manifold.projective ? value : value / p.alpha);
  }
  return sum.value();
}

std::vector<EstimatorReport> estimate_integrals(const ManifoldSpec& manifold,
                                                const std::vector<ScalarExpression>& integrands, std::size_t k,
                                                std::uint64_t seed, const EstimatorOptions& options) {
  manifold.validate();
  if (k < 2) throw DimensionError("at least two slices are required");
  for (const auto& f : integrands) require_integrand(manifold, f);
  const std::size_t m = integrands.size();
  const double scale = manifold.projective ? projective_space_volume(manifold.dimension) : 1.0;

  std::vector<std::vector<double>> values(m, std::vector<double>(k));
  std::vector<std::size_t> failures(k), points(k), region(k), residual(k);
  parallel_for(k, options.workers, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i, kIntegrate);
    const WeightedIntersection wi = draw_and_intersect(manifold, rng, options);
    for (std::size_t j = 0; j < m; ++j) values[j][i] = scale * fbar(manifold, integrands[j], wi);
    failures[i] = wi.path_failures;
    points[i] = wi.points.size();
    region[i] = wi.rejected_by_region;
    residual[i] = wi.rejected_by_residual;
  });

  EstimatorReport counts;
  for (std::size_t i = 0; i < k; ++i) {
    counts.path_failures += failures[i];
    counts.failing_slices += failures[i] > 0;
    counts.empty_slices += points[i] == 0;
    counts.points_total += points[i];
    counts.rejected_by_region += region[i];
    counts.rejected_by_residual += residual[i];
  }
  counts.unreliable =
      static_cast<double>(counts.failing_slices) > options.unreliable_fraction * static_cast<double>(k);

  std::vector<EstimatorReport> reports;
  for (std::size_t j = 0; j < m; ++j) {
    EstimatorReport r = summarize(std::move(values[j]), options.keep_values);
    r.path_failures = counts.path_failures;
    r.failing_slices = counts.failing_slices;
    r.empty_slices = counts.empty_slices;
    r.points_total = counts.points_total;
    r.rejected_by_region = counts.rejected_by_region;
    r.rejected_by_residual = counts.rejected_by_residual;
    r.unreliable = counts.unreliable;
    reports.push_back(std::move(r));
  }
  return reports;
}

EstimatorReport estimate_integral(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t k,
                                  std::uint64_t seed, const EstimatorOptions& options) {
  return std::move(estimate_integrals(manifold, {f}, k, seed, options).front());
}

double variance_bound(double d, double sup_norm_sq, std::size_t n, double sup_f) {
  const double m = static_cast<double>(n) + 1.0;
  const double g = std::tgamma(m / 2.0);
  return d * d * std::pow(1.0 + sup_norm_sq, m) * std::pow(std::numbers::pi, m) / (g * g) * sup_f * sup_f;
}

SamplePlan plan_sample_size(double variance_bound_value, double eps, double confidence) {
  if (!(eps > 0.0)) throw DimensionError("eps must be positive");
  if (!(confidence > 0.0 && confidence <= 1.0)) throw DimensionError("confidence must lie in (0, 1]");
  auto size = [&](double denominator) -> std::uint64_t {
    if (denominator <= 0.0) return 0;
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(variance_bound_value / (eps * eps * denominator))));
  };
  return {size(confidence), size(1.0 - confidence)};
}

double kappa(double d, double K, double C, std::size_t n) {
  const double half = (static_cast<double>(n) + 1.0) / 2.0;
  return 1.0 / (d * K) * std::tgamma(half) / std::pow(std::numbers::pi, half) / std::pow(1.0 + C, half);
}

RejectionConfig RejectionConfig::from_bounds(std::size_t d, double K, double C, std::size_t n) {
  if (!(K > 0.0) || !(C >= 0.0) || d < 1) throw InvalidBoundsError("bounds require d >= 1, K > 0 and C >= 0");
  RejectionConfig c;
  c.d = d;
  c.K = K;
  c.C = C;
  c.kappa = algsample::kappa(static_cast<double>(d), K, C, n);
  return c;
}

RejectionConfig RejectionConfig::projective(std::size_t d, double K) {
  if (!(K > 0.0) || d < 1) throw InvalidBoundsError("bounds require d >= 1 and K > 0");
  RejectionConfig c;
  c.d = d;
  c.K = K;
  c.kappa = 1.0 / (static_cast<double>(d) * K);
  return c;
}

ExplorationResult estimate_bounds_by_exploration(const ManifoldSpec& manifold, const ScalarExpression& f,
                                                 std::size_t trials, std::uint64_t seed,
                                                 const EstimatorOptions& options, double safety) {
  manifold.validate();
  require_integrand(manifold, f);
  if (trials < 1) throw DimensionError("exploration needs at least one trial");
  const Eigen::VectorXd shift = manifold.shift ? *manifold.shift
                                               : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
                                                     manifold.ambient_dimension()));
  std::vector<double> max_f(trials, 0.0), max_c(trials, 0.0);
  std::vector<std::size_t> seen(trials, 0);
  parallel_for(trials, options.workers, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i, kExplore);
    const WeightedIntersection wi = draw_and_intersect(manifold, rng, options);
    for (const auto& p : wi.points) {
      max_f[i] = std::max(max_f[i], evaluate_at(f, p.coordinates));
      max_c[i] = std::max(max_c[i], (p.coordinates - shift).squaredNorm());
    }
    seen[i] = wi.points.size();
  });
  ExplorationResult r;
  for (std::size_t i = 0; i < trials; ++i) {
    r.points_seen += seen[i];
    r.K_hat = std::max(r.K_hat, max_f[i]);
    r.C_hat = std::max(r.C_hat, max_c[i]);
  }
  if (r.points_seen == 0)
    throw SolverError("exploration found no intersection point in " + std::to_string(trials) + " slices");
  r.K_hat *= safety;
  r.C_hat *= safety;
  return r;
}

Sample sample_points(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t count,
                     const RejectionConfig& config, std::uint64_t seed, const EstimatorOptions& options) {
  if (manifold.projective) throw DimensionError("use sample_points_projective for projective manifolds");
  return rejection_sample(manifold, f, count, config, seed, options);
}

Sample sample_points_projective(const ManifoldSpec& manifold, const ScalarExpression& f, std::size_t count,
                                const RejectionConfig& config, std::uint64_t seed, const EstimatorOptions& options) {
  if (!manifold.projective) throw DimensionError("sample_points_projective requires a projective manifold");
  return rejection_sample(manifold, f, count, config, seed, options);
}

EstimatorReport baseline_sphere_estimate(const ManifoldSpec& manifold, double radius, std::size_t k,
                                         std::uint64_t seed, const EstimatorOptions& options) {
  manifold.validate();
  if (manifold.projective || manifold.ambient_dimension() != 2 || manifold.dimension != 1)
    throw DimensionError("the sphere baseline needs a plane curve");
  if (!(radius > 0.0)) throw DimensionError("radius must be positive");
  if (k < 2) throw DimensionError("at least two lines are required");
  ManifoldSpec plain = manifold;
  plain.shift.reset();

  std::vector<double> values(k);
  std::vector<std::size_t> failures(k);
  parallel_for(k, options.workers, [&](std::size_t i) {
    RandomStream rng = RandomStream::substream(seed, i, kBaseline);
    const double angle = std::numbers::pi * rng.uniform();
    AffineSlice line;
    line.A = Eigen::RowVector2d(std::cos(angle), std::sin(angle));
    line.b = Eigen::VectorXd::Constant(1, radius * (2.0 * rng.uniform() - 1.0));
    const WeightedIntersection wi = intersect(plain, line, rng, options.intersect);
    for (const auto& p : wi.points)
      if (p.coordinates.norm() > radius * (1.0 + 1e-9))
        throw DomainError("curve leaves the disc of radius " + std::to_string(radius),
                          std::vector<double>(p.coordinates.data(), p.coordinates.data() + 2));
    values[i] = std::numbers::pi * radius * static_cast<double>(wi.points.size());
    failures[i] = wi.path_failures;
  });
  EstimatorReport r = summarize(values, options.keep_values);
  for (std::size_t i = 0; i < k; ++i) {
    r.path_failures += failures[i];
    r.failing_slices += failures[i] > 0;
    r.empty_slices += values[i] == 0.0;
  }
  r.unreliable = static_cast<double>(r.failing_slices) > options.unreliable_fraction * static_cast<double>(k);
  return r;
}

std::vector<double> running_means(const std::vector<double>& values, const std::vector<std::size_t>& checkpoints) {
  std::vector<double> out;
  CompensatedSum sum;
  std::size_t consumed = 0;
  for (std::size_t c : checkpoints) {
    if (c < consumed || c > values.size() || c == 0) throw DimensionError("checkpoints must increase within range");
    for (; consumed < c; ++consumed) sum.add(values[consumed]);
    out.push_back(sum.value() / static_cast<double>(c));
  }
  return out;
}

}  // namespace algsample

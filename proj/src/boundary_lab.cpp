#include "difflab/boundary_lab.hpp"

#include <algorithm>
#include <cmath>

#include "difflab/parallel.hpp"

namespace difflab {

std::string to_string(BoundaryPolicyKind kind) {
  switch (kind) {
    case BoundaryPolicyKind::RejectResample: return "reject";
    case BoundaryPolicyKind::ClampToBound: return "clamp";
    case BoundaryPolicyKind::ReflectAtBound: return "reflect";
  }
  return {};
}

void BoundaryPolicy::validate() const {
  if (!(x_a > 0.0) || !std::isfinite(x_a)) {
    throw std::invalid_argument("boundary policy: X_A must be > 0");
  }
}

BoundedRun bounded_walk(const StepDistribution& dist, std::uint64_t n,
                        std::size_t n_total, const BoundaryPolicy& policy,
                        std::uint64_t seed) {
  policy.validate();
  if (n_total == 0) {
    throw std::invalid_argument("bounded_walk: N_Total must be >= 1");
  }
  if (n == 0) {
    throw std::invalid_argument("bounded_walk: n must be >= 1");
  }
  const double xa = policy.x_a;
  std::vector<double> values(n_total, 0.0);
  std::vector<BoundedRunDiagnostics> partials(block_count(n_total));

  parallel_blocks(n_total, [&](std::size_t block, std::size_t begin,
                               std::size_t end) {
    BoundedRunDiagnostics& diag = partials[block];
    for (std::size_t i = begin; i < end; ++i) {
      double x = 0.0;
      for (std::uint64_t s = 1; s <= n; ++s) {
        CounterStream stream(seed, i, s);
        double next = x + dist.sample(stream);
        switch (policy.kind) {
          case BoundaryPolicyKind::RejectResample: {
            std::uint64_t redraws = 0;
            while (!(std::abs(next) < xa)) {
              if (++redraws > kMaxRedraws) {
                throw IterationCapError(
                    "bounded_walk: no in-bounds step after " +
                    std::to_string(kMaxRedraws) + " redraws");
              }
              ++diag.n_rejections;
              next = x + dist.sample(stream);
            }
            break;
          }
          case BoundaryPolicyKind::ClampToBound:
            if (next > xa) {
              next = xa;
              ++diag.n_clamps;
            } else if (next < -xa) {
              next = -xa;
              ++diag.n_clamps;
            }
            break;
          case BoundaryPolicyKind::ReflectAtBound:
            while (next > xa || next < -xa) {
              next = next > xa ? 2.0 * xa - next : -2.0 * xa - next;
              ++diag.n_reflections;
            }
            break;
        }
        x = next;
      }
      values[i] = x;
    }
  });

  BoundedRunDiagnostics diag;
  diag.n_total = n_total;
  for (const auto& p : partials) {
    diag.n_rejections += p.n_rejections;
    diag.n_clamps += p.n_clamps;
    diag.n_reflections += p.n_reflections;
  }
  return {Ensemble::from_state(std::move(values), n, dist, seed), policy, diag};
}

DensityCandidate free_space_candidate(const StepDistribution& dist,
                                      std::uint64_t n) {
  const double mean = static_cast<double>(n) * dist.mean();
  const double sd = std::sqrt(static_cast<double>(n) * dist.variance());
  return {"free-space", [mean, sd](double x) { return normal_cdf(x, mean, sd); }};
}

namespace {

Field1D bounded_pde_solution(const StepDistribution& dist, std::uint64_t n,
                             double x_a, std::size_t half_cells,
                             const BoundaryCondition& bc) {
  if (!(x_a > 0.0)) {
    throw std::invalid_argument("bounded PDE: X_A must be > 0");
  }
  if (n == 0) {
    throw std::invalid_argument("bounded PDE: n must be >= 1");
  }
  const double dx = 2.0 * x_a / static_cast<double>(2 * half_cells + 1);
  Field1D field = point_source(dx, half_cells, dist.variance() / 2.0);
  return solve(std::move(field), static_cast<double>(n), bc);
}

}  // namespace

Field1D reflecting_pde_solution(const StepDistribution& dist, std::uint64_t n,
                                double x_a, std::size_t half_cells) {
  return bounded_pde_solution(dist, n, x_a, half_cells,
                              BoundaryCondition::reflecting());
}

Field1D absorbing_pde_solution(const StepDistribution& dist, std::uint64_t n,
                               double x_a, std::size_t half_cells) {
  Field1D f = bounded_pde_solution(dist, n, x_a, half_cells,
                                   BoundaryCondition::absorbing());
  const double survivors = heat_content(f);
  if (!(survivors > 0.0)) {
    throw std::runtime_error("absorbing PDE: no surviving content");
  }
  for (double& v : f.values) v /= survivors;
  return f;
}

DensityCandidate field_candidate(std::string name, Field1D field) {
  return {std::move(name),
          [f = std::move(field)](double x) { return field_cdf(f, x); }};
}

std::vector<double> bias_edges(const StepDistribution& dist, std::uint64_t n,
                               double x_a) {
  if (!(x_a > 0.0)) {
    throw std::invalid_argument("bias_edges: X_A must be > 0");
  }
  if (dist.kind() == StepKind::Rademacher) {
    // Largest reachable |X| not beyond the bound, with the parity of n.
    const auto parity = static_cast<std::int64_t>(n % 2);
    auto k_max = static_cast<std::int64_t>(std::floor(x_a));
    if ((k_max - parity) % 2 != 0) --k_max;
    k_max = std::max(k_max, parity);
    std::vector<double> edges;
    for (std::int64_t k = -k_max - 1; k <= k_max + 1; k += 2) {
      edges.push_back(static_cast<double>(k));
    }
    return edges;
  }
  return uniform_edges(-x_a, x_a, 40);
}

const CandidateDistance& PolicyBias::distance_to(
    const std::string& candidate) const {
  for (const auto& d : distances) {
    if (d.candidate == candidate) return d;
  }
  throw std::out_of_range("PolicyBias: no candidate named " + candidate);
}

BiasReport bias_report(std::span<const BoundedRun> runs,
                       std::span<const DensityCandidate> candidates,
                       std::vector<double> edges) {
  if (runs.empty()) {
    throw std::invalid_argument("bias_report: no runs");
  }
  validate_edges(edges);
  const BoundedRun& first = runs.front();
  for (const auto& run : runs) {
    if (!(run.ensemble.distribution() == first.ensemble.distribution()) ||
        run.ensemble.steps() != first.ensemble.steps() ||
        run.ensemble.size() != first.ensemble.size() ||
        run.policy.x_a != first.policy.x_a) {
      throw std::invalid_argument(
          "bias_report: runs differ in distribution, n, N_Total or X_A");
    }
  }

  BiasReport report;
  report.distribution = first.ensemble.distribution().describe();
  report.n = first.ensemble.steps();
  report.n_total = first.ensemble.size();
  report.x_a = first.policy.x_a;
  report.edges = edges;

  std::vector<std::vector<double>> candidate_density;
  candidate_density.reserve(candidates.size());
  for (const auto& c : candidates) {
    candidate_density.push_back(bin_average_density(edges, c.cdf));
  }

  const double unbounded_variance =
      static_cast<double>(report.n) * first.ensemble.distribution().variance();
  for (const auto& run : runs) {
    PolicyBias pb;
    pb.policy = run.policy.kind;
    pb.diagnostics = run.diagnostics;
    const auto values = run.ensemble.values();
    if (values.size() >= 2) {
      const Moments m = sample_moments(values);
      pb.mean = m.mean;
      pb.variance = m.variance;
    }
    pb.variance_deviation = pb.variance / unbounded_variance - 1.0;
    const auto on_wall = std::count_if(values.begin(), values.end(), [&](double x) {
      return !(std::abs(x) < report.x_a);
    });
    pb.wall_mass = static_cast<double>(on_wall) / static_cast<double>(values.size());
    pb.density = histogram(values, edges);
    // Inside the bound but within one edge-bin width of it; wall atoms excluded.
    const double w_lo = edges[1] - edges[0];
    const double w_hi = edges[edges.size() - 1] - edges[edges.size() - 2];
    const auto adjacent = std::count_if(values.begin(), values.end(), [&](double x) {
      return (x > -report.x_a && x <= -report.x_a + w_lo) ||
             (x < report.x_a && x >= report.x_a - w_hi);
    });
    pb.adjacent_bin_mass = static_cast<double>(adjacent) / static_cast<double>(values.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Distances d = l1_linf_distance(pb.density, candidate_density[c]);
      pb.distances.push_back({candidates[c].name, d.l1, d.linf,
                              ks_statistic(values, candidates[c].cdf)});
    }
    report.policies.push_back(std::move(pb));
  }
  return report;
}

}  // namespace difflab

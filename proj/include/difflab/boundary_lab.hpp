#pragma once

// Walks confined to -X_A < X < X_A. Keeping N_Total fixed while enforcing
// the bound needs some rule for realizations that step outside; each rule
// here distorts the spreading in its own way, and bias_report measures how.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "difflab/ensembles.hpp"
#include "difflab/pde.hpp"
#include "difflab/stats.hpp"

namespace difflab {

enum class BoundaryPolicyKind {
  /// Redraw the offending step until the realization stays strictly inside.
  RejectResample,
  /// Pin the realization to the bound it crossed.
  ClampToBound,
  /// Fold the excess back inside (mirror about the bound).
  ReflectAtBound,
};

std::string to_string(BoundaryPolicyKind kind);

struct BoundaryPolicy {
  BoundaryPolicyKind kind = BoundaryPolicyKind::ReflectAtBound;
  double x_a = 1.0;

  void validate() const;
};

struct BoundedRunDiagnostics {
  std::uint64_t n_rejections = 0;
  std::uint64_t n_clamps = 0;
  std::uint64_t n_reflections = 0;
  std::uint64_t n_total = 0;
};

struct BoundedRun {
  Ensemble ensemble;
  BoundaryPolicy policy;
  BoundedRunDiagnostics diagnostics;
};

/// Redraws allowed per realization and step under RejectResample.
inline constexpr std::uint64_t kMaxRedraws = 10000;

class IterationCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*
 * Evolves N_Total realizations for n steps under the policy. Step s of
 * realization i draws from the same CounterStream(seed, i, s) an unbounded
 * Ensemble would use; redraws continue along that stream. When the bound is
 * never reached the result is bit-identical to init_ensemble + advance.
 *
 * After every step: RejectResample keeps |X| < X_A, ClampToBound and
 * ReflectAtBound keep |X| <= X_A (a clamped realization sits on the bound).
 */
BoundedRun bounded_walk(const StepDistribution& dist, std::uint64_t n,
                        std::size_t n_total, const BoundaryPolicy& policy,
                        std::uint64_t seed);

/// A reference law to compare bounded runs against.
struct DensityCandidate {
  std::string name;
  Cdf cdf;
};

/// Normal law with mean n*mu and variance n*sigma^2 (the unbounded walk).
DensityCandidate free_space_candidate(const StepDistribution& dist,
                                      std::uint64_t n);

/// FTCS solution on (-X_A, X_A) with reflecting ends, point source at 0,
/// D = sigma^2/2, integrated to t = n. `half_cells` sets the resolution.
Field1D reflecting_pde_solution(const StepDistribution& dist, std::uint64_t n,
                                double x_a, std::size_t half_cells = 100);
/// As above with absorbing ends; the surviving content is rescaled to 1.
Field1D absorbing_pde_solution(const StepDistribution& dist, std::uint64_t n,
                               double x_a, std::size_t half_cells = 100);

DensityCandidate field_candidate(std::string name, Field1D field);

/// Bins for comparing bounded runs. Rademacher sums live on a lattice of
/// spacing 2 with the parity of n, so bins of width 2 are centred on the
/// reachable points inside the bound; other laws get 40 equal bins on
/// [-X_A, X_A].
std::vector<double> bias_edges(const StepDistribution& dist, std::uint64_t n,
                               double x_a);

struct CandidateDistance {
  std::string candidate;
  double l1 = 0.0;
  double linf = 0.0;
  double ks = 0.0;
};

struct PolicyBias {
  BoundaryPolicyKind policy = BoundaryPolicyKind::ReflectAtBound;
  BoundedRunDiagnostics diagnostics;
  double mean = 0.0;
  double variance = 0.0;
  /// variance / (n sigma^2) - 1; the unbounded law has 2 D n = n sigma^2.
  double variance_deviation = 0.0;
  /// Fraction of realizations sitting on a bound (|X| >= X_A).
  double wall_mass = 0.0;
  /// Fraction strictly inside the bound but within one edge-bin width of it.
  double adjacent_bin_mass = 0.0;
  std::vector<CandidateDistance> distances;
  EmpiricalDensity density;

  const CandidateDistance& distance_to(const std::string& candidate) const;
};

struct BiasReport {
  std::string distribution;
  std::uint64_t n = 0;
  std::size_t n_total = 0;
  double x_a = 0.0;
  std::vector<double> edges;
  std::vector<PolicyBias> policies;
};

/// Compares every run with every candidate on shared edges. Runs must share
/// distribution, n, N_Total and X_A; throws std::invalid_argument otherwise.
BiasReport bias_report(std::span<const BoundedRun> runs,
                       std::span<const DensityCandidate> candidates,
                       std::vector<double> edges);

}  // namespace difflab

// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "difflab/boundary_lab.hpp"
#include "difflab/einstein_bridge.hpp"
#include "difflab/ensembles.hpp"
#include "difflab/experiments.hpp"
#include "difflab/parallel.hpp"
#include "difflab/pde.hpp"
#include "difflab/stats.hpp"
#include "difflab/walks.hpp"

using namespace difflab;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Rademacher n = 400, N = 1e5: KS < 0.01, variance within 3% of 400, < 5 s.
Outcome clt_convergence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto e = init_ensemble(100000, StepDistribution::rademacher(), kSeed);
  e.advance(400);
  const Moments m = sample_moments(e);
  // Standardize X(400) by sqrt(400) = 20.
  std::vector<double> z(e.values().begin(), e.values().end());
  for (double& x : z) x /= 20.0;
  const Cdf phi = [](double x) { return normal_cdf(x); };
  const double ks = ks_statistic_lattice(z, phi, 0.0, 2.0 / 20.0);
  const double ks_raw = ks_statistic(z, phi);
  const double secs = seconds_since(t0);
  o.check(ks < 0.01, "ks(lattice)=" + num(ks) + " < 0.01 (plain ks=" + num(ks_raw) + ")");
  o.check(std::abs(m.variance / 400.0 - 1.0) < 0.03, "var/400=" + num(m.variance / 400.0));
  o.check(secs < 5.0, "t=" + num(secs) + "s < 5");
  return o;
}

// 2. n <= 12: histogram TV vs exact pmf < 5 sqrt(I/N) at N = 1e5, < 2 s.
Outcome exact_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double big_n = 1e5;
  double worst = 0.0;
  bool ok = true;
  auto e = init_ensemble(100000, StepDistribution::rademacher(), kSeed);
  for (unsigned n = 1; n <= 12; ++n) {
    e.advance(1);
    const auto pmf = exact_pmf_rademacher(n);
    const auto d = histogram(e, lattice_edges(-static_cast<double>(n), 2.0, 0, n));
    double tv = 0.0;
    for (std::size_t k = 0; k <= n; ++k) tv += 0.5 * std::abs(d.mass(k) - pmf.probability(k));
    const double limit = 5.0 * std::sqrt(static_cast<double>(n + 1) / big_n);
    ok = ok && d.in_range() == d.n_total && tv < limit;
    worst = std::max(worst, tv / limit);
  }
  const double secs = seconds_since(t0);
  o.check(ok, "n=1..12 max tv/limit=" + num(worst));
  o.check(secs < 2.0, "t=" + num(secs) + "s < 2");
  return o;
}

// 3. Per-axis D = 1/2, 1/4, 1/6 within 3% at n = 1e3, N = 1e5; isotropy
//    within 5 standard errors; < 30 s total.
Outcome rayleigh() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int dim : {1, 2, 3}) {
    WalkConfig c;
    c.dimension = dim;
    c.rule = dim == 1 ? WalkRule::RademacherPhase
                      : dim == 2 ? WalkRule::UniformPhase2D : WalkRule::UnitVector3D;
    c.n_steps = 1000;
    c.n_particles = 100000;
    c.seed = kSeed;
    const WalkResult r = rayleigh_walk(c);
    const MsdFit fit = msd_fit(r.curve);
    const double expected = 1.0 / (2.0 * dim);
    double worst = 0.0;
    for (int a = 0; a < dim; ++a) {
      worst = std::max(worst, std::abs(fit.d_axis[static_cast<std::size_t>(a)] / expected - 1.0));
    }
    o.check(worst < 0.03, std::to_string(dim) + "D D=" + num(fit.d_axis[0]) + " rel=" + num(worst));
    if (dim > 1) {
      const AxisStatistics st = axis_statistics(r.final_positions, dim);
      const double z = std::max(st.max_variance_z(), st.max_covariance_z());
      o.check(z < 5.0, "iso z=" + num(z));
    }
  }
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "t=" + num(secs) + "s < 30");
  return o;
}

// 4. Mean r^2 / (n l^2) in [0.97, 1.03] at n = 100, N = 1e5.
Outcome pearson() {
  Outcome o;
  WalkConfig c;
  c.dimension = 2;
  c.rule = WalkRule::PearsonFixedStep;
  c.n_steps = 100;
  c.n_particles = 100000;
  c.seed = kSeed;
  const PearsonResult r = pearson_walk(c);
  CompensatedSum s;
  for (double x : r.radii) s.add(x * x);
  const double ratio = s.value() / 1e5 / 100.0;
  o.check(ratio >= 0.97 && ratio <= 1.03, "ratio=" + num(ratio));
  return o;
}

// 5. Gaussian ensemble n = 100 vs Green (D = sigma^2/2): L1 < 0.02; FTCS
//    delta vs Green: Linf rel < 1e-3 at lambda 0.25; FTCS vs sine series on a
//    Dirichlet rod: Linf < 1e-3.
Outcome pde_mc() {
  Outcome o;
  const double d = 0.5;
  const double t = 100.0;
  auto e = init_ensemble(100000, StepDistribution::gaussian(0.0, 1.0), kSeed);
  e.advance(100);
  const double sd = std::sqrt(2.0 * d * t);
  const auto edges = uniform_edges(-5.0 * sd, 5.0 * sd, 20);
  const auto dens = histogram(e, edges);
  const auto green = bin_average_density(edges, [&](double x) { return green_cdf(x, t, d); });
  const double l1 = l1_linf_distance(dens, green).l1;
  o.check(l1 < 0.02, "mc l1=" + num(l1));

  const double dx = 0.01 * std::sqrt(4.0 * d * t);
  const auto half = static_cast<std::size_t>(std::ceil(10.0 * sd / dx));
  const Field1D f = solve(point_source(dx, half, d), t, BoundaryCondition::reflecting(), 0.25);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    err = std::max(err, std::abs(f.values[i] - green_function(f.x(i), t, d)));
  }
  const double rel = err / green_function(0.0, t, d);
  o.check(rel < 1e-3, "ftcs linf rel=" + num(rel));

  const Field1D rod = step_profile(1.0, 200, 1.0);
  const Field1D a = solve(rod, 0.01, BoundaryCondition::dirichlet(0.0, 0.0), 0.25);
  const Field1D b = trig_series_dirichlet(1.0, rod, 1.0, 0.01, 128);
  double rod_err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rod_err = std::max(rod_err, std::abs(a.values[i] - b.values[i]));
  o.check(rod_err < 1e-3, "rod linf=" + num(rod_err));
  return o;
}

// 6. Heat content constant to 1e-12 over 1e4 reflecting FTCS steps; N_Total
//    exactly constant across advances and boundary policies.
Outcome conservation() {
  Outcome o;
  Field1D f = make_field(-1.0, 1.0, 100, 1.0, [](double x) { return std::exp(-8.0 * x * x); });
  const double h0 = heat_content(f);
  const double dt = 0.25 * f.dx * f.dx;
  for (int k = 0; k < 10000; ++k) f = ftcs_step(f, dt, BoundaryCondition::reflecting());
  const double drift = std::abs(heat_content(f) - h0) / h0;
  o.check(drift < 1e-12, "heat drift=" + num(drift));

  bool fixed = true;
  auto e = init_ensemble(10007, StepDistribution::uniform_symmetric(1.0), kSeed);
  for (std::uint64_t dn : {1, 5, 50}) {
    e.advance(dn);
    fixed = fixed && e.size() == 10007;
  }
  for (auto kind : {BoundaryPolicyKind::RejectResample, BoundaryPolicyKind::ClampToBound,
                    BoundaryPolicyKind::ReflectAtBound}) {
    const BoundedRun r = bounded_walk(StepDistribution::rademacher(), 200, 10007, {kind, 5.0}, kSeed);
    fixed = fixed && r.ensemble.size() == 10007 && r.diagnostics.n_total == 10007;
  }
  o.check(fixed, "N_Total fixed");
  return o;
}

// 7. X_A = 5, Rademacher, n = 200, N = 1e5: reflect vs reflecting PDE
//    L1 < 0.02; reject and clamp vs free space L1 > 0.05 and variance off
//    2Dn by more than 5%.
Outcome bounded_bias() {
  Outcome o;
  const auto dist = StepDistribution::rademacher();
  std::vector<BoundedRun> runs;
  for (auto kind : {BoundaryPolicyKind::ReflectAtBound, BoundaryPolicyKind::RejectResample,
                    BoundaryPolicyKind::ClampToBound}) {
    runs.push_back(bounded_walk(dist, 200, 100000, {kind, 5.0}, kSeed));
  }
  const std::vector<DensityCandidate> cands{
      free_space_candidate(dist, 200),
      field_candidate("reflecting-pde", reflecting_pde_solution(dist, 200, 5.0))};
  const BiasReport rep = bias_report(runs, cands, bias_edges(dist, 200, 5.0));
  const double refl = rep.policies[0].distance_to("reflecting-pde").l1;
  o.check(refl < 0.02, "reflect l1=" + num(refl));
  for (std::size_t k = 1; k < 3; ++k) {
    const auto& p = rep.policies[k];
    const double l1 = p.distance_to("free-space").l1;
    o.check(l1 > 0.05 && std::abs(p.variance_deviation) > 0.05,
            to_string(p.policy) + " l1=" + num(l1) + " dvar=" + num(p.variance_deviation));
  }
  return o;
}

// 8. tau D_st = sigma^2/2 to 1e-15; Stokes-Einstein round trip to 1e-12;
//    simulated MSD fit recovers D_M within 3% at N = 1e5.
Outcome einstein() {
  Outcome o;
  double worst = 0.0;
  for (double s2 : {1.0, 4e-13, 7.3e-12, 0.25}) {
    for (double tau : {1e-8, 0.5, 2.0}) {
      const BrownianScales sc(units::Area{s2}, units::Time{tau});
      worst = std::max(worst, std::abs(reduce_to_laplace(d_stochastic(sc), sc.tau).value / (s2 / 2.0) - 1.0));
    }
  }
  o.check(worst <= 1e-15, "identity rel=" + num(worst));

  const PhysicalConstants c;
  const units::Diffusivity d_m = d_macroscopic(c);
  const double rt = std::abs(estimate_avogadro(d_m, c).value / c.avogadro.value - 1.0);
  o.check(rt <= 1e-12, "round trip rel=" + num(rt));

  const units::Time tau{1e-8};
  const BrownianScales sc = scales_for(d_m, tau);
  WalkConfig w;
  w.dimension = 3;
  w.rule = WalkRule::BrownianGaussian;
  w.sigma = std::sqrt(sc.sigma_sq.value);
  w.tau = tau.value;
  w.n_particles = 100000;
  w.seed = kSeed;
  const MsdFit fit = msd_fit(brownian_walk(w, elapsed_time(100, tau).value).curve);
  const double rel = std::abs(fit.d_total / d_m.value - 1.0);
  o.check(rel < 0.03, "fit D rel=" + num(rel));
  return o;
}

// 9. inject_realizations: exact integer ratios that sum to 1.
Outcome renormalization() {
  Outcome o;
  bool ok = true;
  auto e = init_ensemble(1000, StepDistribution::rademacher(), kSeed);
  e.advance(12);
  const auto d = histogram(e, lattice_edges(-12.0, 2.0, 0, 12));
  for (std::size_t j = 1; j <= d.bins(); ++j) {
    for (std::uint64_t extra : {0, 1, 100, 12345}) {
      const auto p = inject_realizations(d, j, extra);
      ok = ok && p.denominator == d.n_total + extra;
      for (std::size_t i = 0; i < d.bins(); ++i) {
        ok = ok && p.numerators[i] == d.counts[i] + (i + 1 == j ? extra : 0);
      }
      ok = ok && p.numerator_sum() == p.denominator;
    }
  }
  o.check(ok, "exact numerators, denominators and unit sum");
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Identical config and seed give byte-identical files across thread counts.
Outcome determinism() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() / "difflab_acceptance";
  std::filesystem::remove_all(root);
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> runs{
      {"clt-convergence", {{"n", "100"}, {"particles", "100000"}}},
      {"rayleigh-coefficients", {{"n", "200"}, {"particles", "20000"}}},
      {"pearson-msd", {}},
      {"brownian-bridge", {}},
      {"pde-vs-mc", {}},
      {"bounded-bias", {}},
      {"einstein-avogadro", {}},
      {"inject-renormalize", {}},
  };
  for (const auto& [name, overrides] : runs) {
    bool same = true;
    std::vector<std::filesystem::path> dirs;
    for (unsigned threads : {1u, 4u, 4u}) {
      ConfigSources s;
      s.seed_flag = std::to_string(kSeed);
      s.overrides = overrides;
      const auto dir = root / (name + "_" + std::to_string(dirs.size()));
      s.out_flag = dir.string();
      const ExperimentConfig cfg = resolve_config(name, s);
      set_thread_count(threads);
      const ExperimentOutput out = run_experiment(cfg);
      emit(out.report, out.tables, cfg.out_dir);
      dirs.push_back(dir);
    }
    set_thread_count(0);
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const std::string ref = slurp(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        same = same && slurp(dirs[k] / entry.path().filename()) == ref;
      }
    }
    o.check(same, name);
  }
  std::filesystem::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"clt-convergence", clt_convergence},
      {"exact-oracle", exact_oracle},
      {"rayleigh-coefficients", rayleigh},
      {"pearson-law", pearson},
      {"pde-mc-unification", pde_mc},
      {"conservation", conservation},
      {"bounded-bias", bounded_bias},
      {"einstein-bridge", einstein},
      {"renormalization", renormalization},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

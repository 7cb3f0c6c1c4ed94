#include "difflab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "difflab/boundary_lab.hpp"
#include "difflab/einstein_bridge.hpp"
#include "difflab/ensembles.hpp"
#include "difflab/parallel.hpp"
#include "difflab/pde.hpp"
#include "difflab/stats.hpp"
#include "difflab/walks.hpp"

namespace difflab {

namespace {

ParamSpec integer(std::string name, ordered_json def, std::string help) {
  return {std::move(name), ParamType::Integer, std::move(def), std::move(help)};
}
ParamSpec real(std::string name, double def, std::string help) {
  return {std::move(name), ParamType::Real, def, std::move(help)};
}
ParamSpec text(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamType::Text, std::move(def), std::move(help)};
}
ParamSpec integer_list(std::string name, std::vector<std::uint64_t> def,
                       std::string help) {
  return {std::move(name), ParamType::IntegerList, def, std::move(help)};
}

ParamSpec seed_param() {
  return integer("seed", nullptr, "64-bit seed (required)");
}

std::vector<ParamSpec> distribution_params(std::string def) {
  return {text("dist", std::move(def), "step law: rademacher, uniform, gaussian"),
          real("dist_a", 1.0, "uniform half-width"),
          real("dist_mu", 0.0, "gaussian mean"),
          real("dist_sigma", 1.0, "gaussian standard deviation")};
}

template <class... Groups>
std::vector<ParamSpec> concat(Groups... groups) {
  std::vector<ParamSpec> out;
  (out.insert(out.end(), groups.begin(), groups.end()), ...);
  return out;
}

std::vector<ExperimentInfo> build_registry() {
  std::vector<ExperimentInfo> r;
  r.push_back({"clt-convergence",
               "Summed increments approach the normal law; variance grows as n sigma^2",
               concat(std::vector<ParamSpec>{seed_param(),
                                             integer("n", 400, "number of summed increments"),
                                             integer("particles", 100000, "N_Total realizations")},
                      distribution_params("rademacher"),
                      std::vector<ParamSpec>{
                          real("ks_max", 0.01, "KS distance threshold vs the normal cdf"),
                          real("variance_rel_tol", 0.03, "relative tolerance on n sigma^2"),
                          real("mean_z_max", 5.0, "mean deviation in standard errors")})});
  r.push_back({"rayleigh-coefficients",
               "Unit-vector compositions in 1/2/3 dimensions give per-axis D = 1/2, 1/4, 1/6",
               {seed_param(), integer("n", 1000, "steps"),
                integer("particles", 100000, "walkers"),
                integer_list("dims", {1, 2, 3}, "dimensions to run"),
                real("rel_tol", 0.03, "relative tolerance on fitted per-axis D"),
                real("isotropy_z_max", 5.0, "isotropy agreement in standard errors")}});
  r.push_back({"pearson-msd", "Fixed-length planar walk: mean r^2 = n l^2",
               {seed_param(), integer("n", 100, "stretches"),
                integer("particles", 100000, "walkers"),
                real("step_length", 1.0, "stretch length l"),
                real("rel_tol", 0.03, "relative tolerance on mean r^2 / (n l^2)")}});
  r.push_back({"brownian-bridge",
               "Gaussian displacements: D_st = sigma^2/(2 tau) and the step-count law coincide",
               {seed_param(), real("sigma", 1.0, "displacement std per interval per axis"),
                real("tau", 0.5, "interval length"),
                integer("intervals", 100, "number of intervals"),
                integer("particles", 100000, "particles"),
                integer("dims", 1, "spatial dimension"),
                real("rel_tol", 0.03, "relative tolerance on MSD and fitted D"),
                real("ks_c", 1.95, "two-sample KS coefficient (1.95 = 0.1% level)")}});
  r.push_back({"pde-vs-mc",
               "Normal-law unification: Monte Carlo, Green's function, FTCS and sine series",
               {seed_param(), integer("n", 100, "summed Gaussian increments"),
                integer("particles", 100000, "realizations"),
                real("step_sigma", 1.0, "increment standard deviation"),
                real("bin_width_sd", 0.5, "histogram bin width in units of sigma sqrt(n)"),
                real("l1_max", 0.02, "L1 threshold MC vs Green's function"),
                real("dx_fraction", 0.01, "FTCS dx as a fraction of sqrt(4 D t)"),
                real("lambda", 0.25, "FTCS stability number"),
                real("ftcs_linf_rel_max", 1e-3, "relative Linf threshold FTCS vs Green"),
                integer("rod_cells", 200, "cells on the Dirichlet rod"),
                integer("rod_terms", 128, "sine-series terms"),
                real("rod_time", 0.01, "rod comparison time (L = eta = 1)"),
                real("rod_linf_max", 1e-3, "Linf threshold FTCS vs sine series"),
                integer("conservation_steps", 10000, "reflecting FTCS steps"),
                real("conservation_max", 1e-12, "relative heat-content drift threshold")}});
  r.push_back({"bounded-bias",
               "Enforcing -X_A < X < X_A by reject/clamp/reflect and the bias it introduces",
               concat(std::vector<ParamSpec>{seed_param(), real("x_a", 5.0, "bound X_A"),
                                             integer("n", 200, "steps"),
                                             integer("particles", 100000, "N_Total")},
                      distribution_params("rademacher"),
                      std::vector<ParamSpec>{
                          integer("pde_half_cells", 100, "PDE resolution (2h+1 cells)"),
                          real("reflect_l1_max", 0.02, "L1 threshold reflect vs reflecting PDE"),
                          real("free_l1_min", 0.05, "minimum L1 of reject/clamp vs free space"),
                          real("variance_dev_min", 0.05,
                               "minimum |variance/(2Dn) - 1| for reject/clamp")})});
  r.push_back({"einstein-avogadro",
               "Stokes-Einstein D_M, simulated Brownian MSD fit and Avogadro inversion",
               {seed_param(), real("gas_constant", codata::kGasConstant, "R [J/(mol K)]"),
                real("avogadro", codata::kAvogadro, "N_Avo [1/mol]"),
                real("viscosity", 1.08e-3, "mu [Pa s]"),
                real("temperature", 290.15, "T [K]"),
                real("radius", 0.5e-6, "particle radius [m]"),
                real("tau", 1e-8, "interval [s]"),
                integer("intervals", 100, "number of intervals"),
                integer("particles", 100000, "particles"),
                integer("dims", 3, "spatial dimension"),
                real("rel_tol", 0.03, "relative tolerance on fitted D"),
                real("ci_z", 5.0, "confidence half-width in standard errors")}});
  r.push_back({"inject-renormalize",
               "Adding realizations to one interval renormalizes every interval",
               concat(std::vector<ParamSpec>{seed_param(), integer("n", 12, "steps"),
                                             integer("particles", 1000, "N_Total")},
                      distribution_params("rademacher"),
                      std::vector<ParamSpec>{
                          integer("interval", 1, "interval j (1-based)"),
                          integer("n_extra", 100, "realizations added to interval j")})});
  return r;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

ordered_json coerce(const ParamSpec& spec, const ordered_json& value) {
  const auto fail = [&]() -> ordered_json {
    throw UsageError("parameter '" + spec.name + "' has an invalid value " + value.dump());
  };
  switch (spec.type) {
    case ParamType::Integer:
      if (value.is_number_unsigned()) return value.get<std::uint64_t>();
      if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(value.get<std::int64_t>());
      }
      if (value.is_number_float()) {
        const double d = value.get<double>();
        if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
      }
      if (value.is_string()) {
        if (auto v = parse_u64(value.get<std::string>())) return *v;
        if (auto d = parse_real(value.get<std::string>());
            d && *d >= 0 && *d == std::floor(*d) && *d < 1.8e19) {
          return static_cast<std::uint64_t>(*d);
        }
      }
      return fail();
    case ParamType::Real:
      if (value.is_number()) return value.get<double>();
      if (value.is_string()) {
        if (auto v = parse_real(value.get<std::string>())) return *v;
      }
      return fail();
    case ParamType::Text:
      if (value.is_string()) return value;
      return fail();
    case ParamType::IntegerList: {
      std::vector<std::uint64_t> out;
      if (value.is_array()) {
        for (const auto& item : value) {
          out.push_back(coerce({spec.name, ParamType::Integer, nullptr, {}}, item)
                            .get<std::uint64_t>());
        }
      } else if (value.is_string()) {
        const std::string s = value.get<std::string>();
        std::size_t start = 0;
        while (start <= s.size()) {
          const auto comma = std::min(s.find(',', start), s.size());
          const auto v = parse_u64(std::string_view(s).substr(start, comma - start));
          if (!v) return fail();
          out.push_back(*v);
          start = comma + 1;
        }
      } else {
        return fail();
      }
      if (out.empty()) return fail();
      return out;
    }
  }
  return fail();
}

const ParamSpec& find_param(const ExperimentInfo& info, const std::string& key) {
  for (const auto& p : info.params) {
    if (p.name == key) return p;
  }
  throw UsageError("unknown parameter '" + key + "' for experiment " + info.name);
}

class Params {
 public:
  explicit Params(const ordered_json& j) : j_(j) {}
  std::uint64_t u64(const char* k) const { return j_.at(k).get<std::uint64_t>(); }
  std::size_t size(const char* k) const { return static_cast<std::size_t>(u64(k)); }
  double real(const char* k) const { return j_.at(k).get<double>(); }
  std::string text(const char* k) const { return j_.at(k).get<std::string>(); }
  std::vector<std::uint64_t> list(const char* k) const {
    return j_.at(k).get<std::vector<std::uint64_t>>();
  }

 private:
  const ordered_json& j_;
};

/// Converts library precondition failures into usage errors so that a bad
/// parameter value is reported as such.
template <class F>
auto checked(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

StepDistribution distribution_from(const Params& p) {
  const std::string kind = p.text("dist");
  return checked([&] {
    if (kind == "rademacher") return StepDistribution::rademacher();
    if (kind == "uniform") return StepDistribution::uniform_symmetric(p.real("dist_a"));
    if (kind == "gaussian") {
      return StepDistribution::gaussian(p.real("dist_mu"), p.real("dist_sigma"));
    }
    throw UsageError("unknown dist '" + kind + "'");
  });
}

void require_at_least(const Params& p, const char* key, std::uint64_t min) {
  if (p.u64(key) < min) {
    throw UsageError("parameter '" + std::string(key) + "' must be >= " +
                     std::to_string(min));
  }
}

double rel_error(double value, double expected) {
  return std::abs(value / expected - 1.0);
}

std::vector<std::uint64_t> ten_checkpoints(std::uint64_t n) {
  std::vector<std::uint64_t> cps;
  if (n < 10) {
    for (std::uint64_t k = 1; k <= n; ++k) cps.push_back(k);
    return cps;
  }
  for (std::uint64_t k = 1; k <= 10; ++k) {
    const std::uint64_t c = (k * n + 5) / 10;
    if (cps.empty() || c > cps.back()) cps.push_back(c);
  }
  return cps;
}

CurvePoint ensemble_point(const Ensemble& e) {
  const Moments m = sample_moments(e);
  CompensatedSum sq;
  for (double x : e.values()) sq.add(x * x);
  return {static_cast<double>(e.steps()), m.mean, m.variance,
          sq.value() / static_cast<double>(e.size())};
}

std::vector<CurvePoint> walk_curve(const MsdCurve& curve) {
  std::vector<CurvePoint> pts;
  const double d = static_cast<double>(curve.dimension);
  for (std::size_t c = 0; c < curve.times.size(); ++c) {
    CurvePoint p;
    p.n = curve.times[c];
    for (std::size_t a = 0; a < static_cast<std::size_t>(curve.dimension); ++a) {
      const double mean = curve.mean_axis.empty() ? 0.0 : curve.mean_axis[c][a];
      p.mean += mean / d;
      p.variance += (curve.msd_axis[c][a] - mean * mean) / d;
      p.msd += curve.msd_axis[c][a];
    }
    pts.push_back(p);
  }
  return pts;
}

/// One width-2 bin per point of {-n, -n+2, ..., n}.
std::vector<double> support_edges(std::uint64_t n) {
  std::vector<double> edges;
  for (std::uint64_t k = 0; k <= n + 1; ++k) {
    edges.push_back(-static_cast<double>(n) - 1.0 + 2.0 * static_cast<double>(k));
  }
  return edges;
}

/// Lattice bins of width 2 over the observed range of a Rademacher sum.
std::vector<double> rademacher_edges(std::span<const double> values, std::uint64_t n) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double parity = static_cast<double>(n % 2);
  const auto k_lo = static_cast<std::int64_t>(std::llround((*lo - parity) / 2.0));
  const auto k_hi = static_cast<std::int64_t>(std::llround((*hi - parity) / 2.0));
  return lattice_edges(parity, 2.0, k_lo, k_hi);
}

ExperimentOutput clt_convergence(const Params& p, Report report) {
  require_at_least(p, "n", 1);
  require_at_least(p, "particles", 2);
  const auto dist = distribution_from(p);
  const std::uint64_t n = p.u64("n");
  Ensemble e(p.size("particles"), dist, p.u64("seed"));
  std::vector<CurvePoint> curve;
  for (auto cp : ten_checkpoints(n)) {
    e.advance(cp - e.steps());
    curve.push_back(ensemble_point(e));
  }
  const Moments m = sample_moments(e);
  const double nd = static_cast<double>(n);
  const double expected_mean = nd * dist.mean();
  const double expected_var = nd * dist.variance();
  const double sd = std::sqrt(expected_var);
  const double big_n = static_cast<double>(e.size());
  const Cdf cdf = [&](double x) { return normal_cdf(x, expected_mean, sd); };
  const bool lattice = dist.kind() == StepKind::Rademacher;
  const double ks_raw = ks_statistic(e.values(), cdf);
  const double ks = lattice
                        ? ks_statistic_lattice(e.values(), cdf, static_cast<double>(n % 2), 2.0)
                        : ks_raw;

  auto& res = report.results;
  res["distribution"] = dist.describe();
  res["n"] = n;
  res["particles"] = e.size();
  res["mean"] = m.mean;
  res["variance"] = m.variance;
  res["expected_mean"] = expected_mean;
  res["expected_variance"] = expected_var;
  res["ks_raw"] = ks_raw;
  res["ks"] = ks;
  res["ks_method"] = lattice ? "lattice-continuity-corrected" : "plain";

  std::vector<double> edges =
      lattice ? rademacher_edges(e.values(), n) : freedman_diaconis_edges(e.values());
  const EmpiricalDensity density = histogram(e, edges);

  report.verdicts.push_back({"ks", ks, Relation::Less, p.real("ks_max")});
  report.verdicts.push_back({"variance_rel_error", rel_error(m.variance, expected_var),
                             Relation::Less, p.real("variance_rel_tol")});
  report.verdicts.push_back({"mean_z", std::abs(m.mean - expected_mean) / std::sqrt(expected_var / big_n),
                             Relation::Less, p.real("mean_z_max")});

  if (lattice && n <= kMaxExactRademacherSteps) {
    const auto pmf = exact_pmf_rademacher(static_cast<unsigned>(n));
    const EmpiricalDensity on_support = histogram(e, support_edges(n));
    double tv = 0.0;
    std::vector<double> observed;
    std::vector<double> expected;
    for (std::size_t k = 0; k < pmf.ways.size(); ++k) {
      tv += std::abs(on_support.mass(k) - pmf.probability(k));
      observed.push_back(static_cast<double>(on_support.counts[k]));
      expected.push_back(big_n * pmf.probability(k));
    }
    tv *= 0.5;
    const ChiSquare chi = chi_square(observed, expected);
    res["tv_exact"] = tv;
    res["chi_square"] = chi.statistic;
    res["chi_square_dof"] = chi.dof;
    const double bins = static_cast<double>(pmf.ways.size());
    report.verdicts.push_back({"tv_exact", tv, Relation::Less, 5.0 * std::sqrt(bins / big_n)});
  }

  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(density_table("density.csv", density));
  out.tables.push_back(curve_table("curve.csv", curve));
  return out;
}

ExperimentOutput rayleigh_coefficients(const Params& p, Report report) {
  require_at_least(p, "n", 3);
  require_at_least(p, "particles", 2);
  ExperimentOutput out;
  auto& res = report.results;
  res["n"] = p.u64("n");
  res["particles"] = p.u64("particles");
  ordered_json per_dim = ordered_json::array();
  for (auto dim : p.list("dims")) {
    WalkConfig cfg;
    cfg.dimension = static_cast<int>(dim);
    switch (dim) {
      case 1: cfg.rule = WalkRule::RademacherPhase; break;
      case 2: cfg.rule = WalkRule::UniformPhase2D; break;
      case 3: cfg.rule = WalkRule::UnitVector3D; break;
      default: throw UsageError("dims entries must be 1, 2 or 3");
    }
    cfg.n_steps = p.u64("n");
    cfg.n_particles = p.size("particles");
    cfg.seed = p.u64("seed");
    const WalkResult walk = rayleigh_walk(cfg);
    const MsdFit fit = msd_fit(walk.curve);
    const AxisStatistics st = axis_statistics(walk.final_positions, cfg.dimension);
    const double expected = 1.0 / (2.0 * static_cast<double>(dim));
    ordered_json j;
    j["dimension"] = dim;
    j["expected_d_axis"] = expected;
    j["d_axis"] = std::vector<double>(fit.d_axis.begin(), fit.d_axis.begin() + static_cast<long>(dim));
    j["d_axis_stderr"] = std::vector<double>(fit.d_axis_stderr.begin(),
                                             fit.d_axis_stderr.begin() + static_cast<long>(dim));
    j["d_total"] = fit.d_total;
    j["total_msd_slope"] = fit.slope_total;
    j["variance_per_step"] = std::vector<double>(st.variance.begin(),
                                                 st.variance.begin() + static_cast<long>(dim));
    for (std::size_t a = 0; a < dim; ++a) {
      report.verdicts.push_back({"d" + std::to_string(dim) + "_axis" + std::to_string(a) + "_rel_error",
                                 rel_error(fit.d_axis[a], expected), Relation::Less,
                                 p.real("rel_tol")});
    }
    if (dim >= 2) {
      j["variance_z"] = st.max_variance_z();
      j["covariance_z"] = st.max_covariance_z();
      report.verdicts.push_back({"d" + std::to_string(dim) + "_variance_z", st.max_variance_z(),
                                 Relation::Less, p.real("isotropy_z_max")});
      report.verdicts.push_back({"d" + std::to_string(dim) + "_covariance_z",
                                 st.max_covariance_z(), Relation::Less,
                                 p.real("isotropy_z_max")});
    }
    per_dim.push_back(std::move(j));
    out.tables.push_back(curve_table("curve_d" + std::to_string(dim) + ".csv", walk_curve(walk.curve)));
  }
  res["dimensions"] = std::move(per_dim);
  out.report = std::move(report);
  return out;
}

ExperimentOutput pearson_msd(const Params& p, Report report) {
  require_at_least(p, "n", 1);
  require_at_least(p, "particles", 1);
  WalkConfig cfg;
  cfg.dimension = 2;
  cfg.rule = WalkRule::PearsonFixedStep;
  cfg.step_length = p.real("step_length");
  cfg.n_steps = p.u64("n");
  cfg.n_particles = p.size("particles");
  cfg.seed = p.u64("seed");
  const PearsonResult pr = checked([&] { return pearson_walk(cfg); });
  CompensatedSum r2;
  for (double r : pr.radii) r2.add(r * r);
  const double mean_r2 = r2.value() / static_cast<double>(pr.radii.size());
  const double expected = static_cast<double>(cfg.n_steps) * cfg.step_length * cfg.step_length;
  report.results["n"] = cfg.n_steps;
  report.results["particles"] = cfg.n_particles;
  report.results["step_length"] = cfg.step_length;
  report.results["mean_r2"] = mean_r2;
  report.results["expected_mean_r2"] = expected;
  report.results["ratio"] = mean_r2 / expected;
  report.verdicts.push_back({"r2_ratio_rel_error", rel_error(mean_r2, expected), Relation::Less,
                             p.real("rel_tol")});
  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(density_table("radius_density.csv",
                                     histogram(pr.radii, freedman_diaconis_edges(pr.radii))));
  out.tables.push_back(curve_table("curve.csv", walk_curve(pr.walk.curve)));
  return out;
}

ExperimentOutput brownian_bridge(const Params& p, Report report) {
  require_at_least(p, "intervals", 3);
  require_at_least(p, "particles", 2);
  const std::uint64_t dims = p.u64("dims");
  if (dims < 1 || dims > 3) throw UsageError("dims must be 1, 2 or 3");
  const double sigma = p.real("sigma");
  const double tau = p.real("tau");
  const BrownianScales scales =
      checked([&] { return BrownianScales(units::Area{sigma * sigma}, units::Time{tau}); });
  const units::Diffusivity d_st = d_stochastic(scales);
  const units::Area laplace = reduce_to_laplace(d_st, scales.tau);
  const std::uint64_t intervals = p.u64("intervals");
  const double total_time = elapsed_time(intervals, scales.tau).value;

  WalkConfig cfg;
  cfg.dimension = static_cast<int>(dims);
  cfg.rule = WalkRule::BrownianGaussian;
  cfg.sigma = sigma;
  cfg.tau = tau;
  cfg.n_particles = p.size("particles");
  cfg.seed = p.u64("seed");
  const WalkResult walk = brownian_walk(cfg, total_time);
  const MsdFit fit = msd_fit(walk.curve);
  const double msd_final = walk.curve.total().back();
  const double t_final = walk.curve.times.back();
  const double expected_msd = 2.0 * static_cast<double>(dims) * d_st.value * t_final;

  // Same law through the step-count route: Gaussian increments of variance
  // sigma^2, counted in steps rather than time, on an independent seed.
  Ensemble e(cfg.n_particles, StepDistribution::gaussian(0.0, sigma), cfg.seed + 1);
  e.advance(walk.n_steps);
  const auto axis0 = walk.axis(0);
  const double ks2 = ks_two_sample(axis0, e.values());
  const double ks_threshold =
      ks_two_sample_threshold(axis0.size(), e.size(), p.real("ks_c"));

  auto& res = report.results;
  res["d_stochastic"] = d_st.value;
  res["d_stochastic_units"] = units::Diffusivity::symbol();
  res["laplace_d"] = laplace.value;
  res["half_sigma_sq"] = scales.sigma_sq.value / 2.0;
  res["steps"] = walk.n_steps;
  res["t_final"] = t_final;
  res["msd_final"] = msd_final;
  res["expected_msd_final"] = expected_msd;
  res["fitted_d"] = fit.d_total;
  res["fitted_d_stderr"] = fit.d_total_stderr;
  res["ks_two_sample"] = ks2;
  res["ks_two_sample_threshold"] = ks_threshold;

  report.verdicts.push_back({"laplace_identity_rel_error",
                             rel_error(laplace.value, scales.sigma_sq.value / 2.0),
                             Relation::LessEqual, 1e-15});
  report.verdicts.push_back({"msd_rel_error", rel_error(msd_final, expected_msd),
                             Relation::Less, p.real("rel_tol")});
  report.verdicts.push_back({"fitted_d_rel_error", rel_error(fit.d_total, d_st.value),
                             Relation::Less, p.real("rel_tol")});
  report.verdicts.push_back({"ks_two_sample", ks2, Relation::Less, ks_threshold});

  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(density_table("density.csv",
                                     histogram(axis0, freedman_diaconis_edges(axis0))));
  out.tables.push_back(curve_table("curve.csv", walk_curve(walk.curve)));
  return out;
}

ExperimentOutput pde_vs_mc(const Params& p, Report report) {
  require_at_least(p, "n", 1);
  require_at_least(p, "particles", 2);
  require_at_least(p, "rod_cells", 2);
  require_at_least(p, "rod_terms", 1);
  const std::uint64_t n = p.u64("n");
  const double step_sigma = p.real("step_sigma");
  const auto dist = checked([&] { return StepDistribution::gaussian(0.0, step_sigma); });
  const double d = dist.variance() / 2.0;
  const double t = static_cast<double>(n);
  auto& res = report.results;

  // Monte Carlo against the Green's function with D = sigma^2/2 at t = n.
  Ensemble e(p.size("particles"), dist, p.u64("seed"));
  std::vector<CurvePoint> curve;
  for (auto cp : ten_checkpoints(n)) {
    e.advance(cp - e.steps());
    curve.push_back(ensemble_point(e));
  }
  const double spread = std::sqrt(2.0 * d * t);
  const double width = p.real("bin_width_sd") * spread;
  if (!(width > 0.0)) throw UsageError("bin_width_sd must be > 0");
  const auto bins = static_cast<std::size_t>(std::ceil(10.0 * spread / width));
  const auto edges = uniform_edges(-0.5 * width * static_cast<double>(bins),
                                   0.5 * width * static_cast<double>(bins), bins);
  const EmpiricalDensity density = histogram(e, edges);
  const auto green = bin_average_density(
      edges, [&](double x) { return green_cdf(x, t, d); });
  const Distances mc = l1_linf_distance(density, green);
  res["mc_l1"] = mc.l1;
  res["mc_linf"] = mc.linf;
  res["mc_ks"] = ks_statistic(e.values(), [&](double x) { return green_cdf(x, t, d); });
  report.verdicts.push_back({"mc_vs_green_l1", mc.l1, Relation::Less, p.real("l1_max")});

  // FTCS from a discrete delta against the Green's function.
  const double lambda = p.real("lambda");
  const double dx = p.real("dx_fraction") * std::sqrt(4.0 * d * t);
  if (!(dx > 0.0)) throw UsageError("dx_fraction must be > 0");
  const auto half_cells = static_cast<std::size_t>(std::ceil(10.0 * spread / dx));
  const Field1D ftcs = checked([&] {
    return solve(point_source(dx, half_cells, d), t, BoundaryCondition::reflecting(), lambda);
  });
  double err = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < ftcs.size(); ++i) {
    const double g = green_function(ftcs.x(i), t, d);
    err = std::max(err, std::abs(ftcs.values[i] - g));
    peak = std::max(peak, g);
  }
  res["ftcs_cells"] = ftcs.size();
  res["ftcs_linf_rel"] = err / peak;
  report.verdicts.push_back({"ftcs_vs_green_linf_rel", err / peak, Relation::Less,
                             p.real("ftcs_linf_rel_max")});

  // Dirichlet rod: FTCS against the sine series from the same initial data.
  const Field1D rod0 = step_profile(1.0, p.size("rod_cells"), 1.0);
  const double rod_t = p.real("rod_time");
  const Field1D rod_ftcs = checked([&] {
    return solve(rod0, rod_t, BoundaryCondition::dirichlet(0.0, 0.0), lambda);
  });
  const Field1D rod_series =
      checked([&] { return trig_series_dirichlet(1.0, rod0, 1.0, rod_t, p.size("rod_terms")); });
  double rod_err = 0.0;
  for (std::size_t i = 0; i < rod_ftcs.size(); ++i) {
    rod_err = std::max(rod_err, std::abs(rod_ftcs.values[i] - rod_series.values[i]));
  }
  res["rod_linf"] = rod_err;
  report.verdicts.push_back({"ftcs_vs_series_linf", rod_err, Relation::Less,
                             p.real("rod_linf_max")});

  // Conservation with reflecting ends.
  Field1D box = make_field(-1.0, 1.0, 100, 1.0, [](double x) { return std::exp(-8.0 * x * x); });
  const double h0 = heat_content(box);
  const double dt_box = lambda * box.dx * box.dx / box.diffusivity;
  const std::uint64_t steps = p.u64("conservation_steps");
  Field1D boxed = checked([&] {
    return solve(box, dt_box * static_cast<double>(steps), BoundaryCondition::reflecting(), lambda);
  });
  const double drift = std::abs(heat_content(boxed) - h0) / h0;
  res["conservation_steps"] = steps;
  res["conservation_rel_drift"] = drift;
  report.verdicts.push_back({"conservation_rel_drift", drift, Relation::Less,
                             p.real("conservation_max")});

  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(density_table("density.csv", density));
  out.tables.push_back(curve_table("curve.csv", curve));
  return out;
}

ExperimentOutput bounded_bias(const Params& p, Report report) {
  require_at_least(p, "n", 1);
  require_at_least(p, "particles", 2);
  require_at_least(p, "pde_half_cells", 1);
  const auto dist = distribution_from(p);
  const std::uint64_t n = p.u64("n");
  const std::size_t particles = p.size("particles");
  const double x_a = p.real("x_a");
  const std::uint64_t seed = p.u64("seed");

  std::vector<BoundedRun> runs;
  for (auto kind : {BoundaryPolicyKind::ReflectAtBound, BoundaryPolicyKind::RejectResample,
                    BoundaryPolicyKind::ClampToBound}) {
    runs.push_back(checked([&] {
      return bounded_walk(dist, n, particles, BoundaryPolicy{kind, x_a}, seed);
    }));
  }
  const std::size_t half_cells = p.size("pde_half_cells");
  std::vector<DensityCandidate> candidates{
      free_space_candidate(dist, n),
      field_candidate("reflecting-pde", reflecting_pde_solution(dist, n, x_a, half_cells)),
      field_candidate("absorbing-pde", absorbing_pde_solution(dist, n, x_a, half_cells))};
  const BiasReport bias = bias_report(runs, candidates, bias_edges(dist, n, x_a));

  auto& res = report.results;
  res["distribution"] = bias.distribution;
  res["n"] = n;
  res["particles"] = particles;
  res["x_a"] = x_a;
  res["unbounded_variance"] = static_cast<double>(n) * dist.variance();
  ordered_json policies = ordered_json::array();
  ExperimentOutput out;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const PolicyBias& pb = bias.policies[k];
    const std::string name = to_string(pb.policy);
    ordered_json j;
    j["policy"] = name;
    j["n_total"] = runs[k].ensemble.size();
    j["rejections"] = pb.diagnostics.n_rejections;
    j["clamps"] = pb.diagnostics.n_clamps;
    j["reflections"] = pb.diagnostics.n_reflections;
    j["mean"] = pb.mean;
    j["variance"] = pb.variance;
    j["variance_deviation"] = pb.variance_deviation;
    j["wall_mass"] = pb.wall_mass;
    j["adjacent_bin_mass"] = pb.adjacent_bin_mass;
    ordered_json dists = ordered_json::object();
    for (const auto& cd : pb.distances) {
      dists[cd.candidate] = {{"l1", cd.l1}, {"linf", cd.linf}, {"ks", cd.ks}};
    }
    j["distances"] = std::move(dists);
    policies.push_back(std::move(j));

    double max_abs = 0.0;
    for (double x : runs[k].ensemble.values()) max_abs = std::max(max_abs, std::abs(x));
    report.verdicts.push_back({name + "_n_total_drift",
                               std::abs(static_cast<double>(runs[k].ensemble.size()) -
                                        static_cast<double>(particles)),
                               Relation::LessEqual, 0.0});
    report.verdicts.push_back({name + "_max_abs_over_x_a", max_abs / x_a,
                               pb.policy == BoundaryPolicyKind::RejectResample
                                   ? Relation::Less
                                   : Relation::LessEqual,
                               1.0});
    if (pb.policy == BoundaryPolicyKind::ReflectAtBound) {
      report.verdicts.push_back({"reflect_l1_vs_reflecting_pde",
                                 pb.distance_to("reflecting-pde").l1, Relation::Less,
                                 p.real("reflect_l1_max")});
    } else {
      report.verdicts.push_back({name + "_l1_vs_free_space", pb.distance_to("free-space").l1,
                                 Relation::Greater, p.real("free_l1_min")});
      report.verdicts.push_back({name + "_variance_deviation", std::abs(pb.variance_deviation),
                                 Relation::Greater, p.real("variance_dev_min")});
    }
    out.tables.push_back(density_table("density_" + name + ".csv", pb.density));
  }
  res["policies"] = std::move(policies);
  out.report = std::move(report);
  return out;
}

ExperimentOutput einstein_avogadro(const Params& p, Report report) {
  require_at_least(p, "intervals", 3);
  require_at_least(p, "particles", 2);
  const std::uint64_t dims = p.u64("dims");
  if (dims < 1 || dims > 3) throw UsageError("dims must be 1, 2 or 3");
  PhysicalConstants c;
  c.gas_constant = units::MolarGasConstant{p.real("gas_constant")};
  c.avogadro = units::PerMole{p.real("avogadro")};
  c.viscosity = units::Viscosity{p.real("viscosity")};
  c.temperature = units::Temperature{p.real("temperature")};
  c.particle_radius = units::Length{p.real("radius")};
  checked([&] { c.validate(); });

  const units::Diffusivity d_m = d_macroscopic(c);
  const units::PerMole n_back = estimate_avogadro(d_m, c);
  const units::Time tau{p.real("tau")};
  const BrownianScales scales = checked([&] { return scales_for(d_m, tau); });
  const units::Diffusivity d_st = d_stochastic(scales);
  const units::Area laplace = reduce_to_laplace(d_st, tau);

  WalkConfig cfg;
  cfg.dimension = static_cast<int>(dims);
  cfg.rule = WalkRule::BrownianGaussian;
  cfg.sigma = std::sqrt(scales.sigma_sq.value);
  cfg.tau = tau.value;
  cfg.n_particles = p.size("particles");
  cfg.seed = p.u64("seed");
  const WalkResult walk =
      brownian_walk(cfg, elapsed_time(p.u64("intervals"), tau).value);
  const MsdFit fit = msd_fit(walk.curve);
  const units::Diffusivity d_fit{fit.d_total};
  const units::PerMole n_est = estimate_avogadro(d_fit, c);
  const double z = p.real("ci_z");
  const double d_lo = fit.d_total - z * fit.d_total_stderr;
  const double d_hi = fit.d_total + z * fit.d_total_stderr;

  auto& res = report.results;
  res["formula"] = "D_M = R*T/(6*pi*N_Avo*mu*r)";
  res["formula_note"] =
      "6*pi in the denominator; a time interval in that position would not give m^2/s";
  res["d_macroscopic"] = d_m.value;
  res["d_units"] = units::Diffusivity::symbol();
  res["sigma_sq"] = scales.sigma_sq.value;
  res["d_stochastic"] = d_st.value;
  res["fitted_d"] = fit.d_total;
  res["fitted_d_stderr"] = fit.d_total_stderr;
  res["avogadro_estimate"] = n_est.value;
  res["avogadro_units"] = units::PerMole::symbol();
  res["avogadro_ci"] = {d_hi > 0 ? estimate_avogadro(units::Diffusivity{d_hi}, c).value : 0.0,
                        d_lo > 0 ? estimate_avogadro(units::Diffusivity{d_lo}, c).value
                                 : std::numeric_limits<double>::infinity()};
  res["avogadro_roundtrip"] = n_back.value;

  report.verdicts.push_back({"laplace_identity_rel_error",
                             rel_error(laplace.value, scales.sigma_sq.value / 2.0),
                             Relation::LessEqual, 1e-15});
  report.verdicts.push_back({"avogadro_roundtrip_rel_error", rel_error(n_back.value, c.avogadro.value),
                             Relation::LessEqual, 1e-12});
  report.verdicts.push_back({"fitted_d_rel_error", rel_error(fit.d_total, d_m.value),
                             Relation::Less, p.real("rel_tol")});
  report.verdicts.push_back({"avogadro_ci_z",
                             std::abs(fit.d_total - d_m.value) / fit.d_total_stderr,
                             Relation::LessEqual, z});

  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(curve_table("curve.csv", walk_curve(walk.curve)));
  return out;
}

ExperimentOutput inject_renormalize(const Params& p, Report report) {
  require_at_least(p, "n", 1);
  require_at_least(p, "particles", 1);
  const auto dist = distribution_from(p);
  const std::uint64_t n = p.u64("n");
  Ensemble e(p.size("particles"), dist, p.u64("seed"));
  e.advance(n);
  const EmpiricalDensity density =
      histogram(e, dist.kind() == StepKind::Rademacher ? support_edges(n)
                                                       : freedman_diaconis_edges(e.values()));
  const std::size_t j = p.size("interval");
  const std::uint64_t extra = p.u64("n_extra");
  const EffectiveProbabilities probs = [&] {
    try {
      return inject_realizations(density, j, extra);
    } catch (const std::out_of_range& ex) {
      throw UsageError(ex.what());
    }
  }();

  std::uint64_t other_error = 0;
  for (std::size_t i = 0; i < density.bins(); ++i) {
    if (i + 1 == j) continue;
    const auto diff = probs.numerators[i] > density.counts[i]
                          ? probs.numerators[i] - density.counts[i]
                          : density.counts[i] - probs.numerators[i];
    other_error = std::max(other_error, diff);
  }
  const std::uint64_t target = density.counts[j - 1] + extra;
  const std::uint64_t j_error = probs.numerators[j - 1] > target
                                    ? probs.numerators[j - 1] - target
                                    : target - probs.numerators[j - 1];
  const std::uint64_t denom_expected = density.n_total + extra;
  const std::uint64_t sum = probs.numerator_sum();
  const std::uint64_t sum_expected = density.in_range() + extra;

  auto& res = report.results;
  res["n_total"] = density.n_total;
  res["interval"] = j;
  res["n_extra"] = extra;
  res["denominator"] = probs.denominator;
  res["numerator_sum"] = sum;
  res["all_in_range"] = density.in_range() == density.n_total;
  res["scale_factor_others"] = static_cast<double>(density.n_total) /
                               static_cast<double>(probs.denominator);

  auto exact = [&](std::string name, std::uint64_t error) {
    report.verdicts.push_back({std::move(name), static_cast<double>(error),
                               Relation::LessEqual, 0.0});
  };
  exact("interval_numerator_error", j_error);
  exact("other_numerators_error", other_error);
  exact("denominator_error", probs.denominator > denom_expected
                                 ? probs.denominator - denom_expected
                                 : denom_expected - probs.denominator);
  exact("numerator_sum_error", sum > sum_expected ? sum - sum_expected : sum_expected - sum);

  ExperimentOutput out{std::move(report), {}};
  out.tables.push_back(density_table("density.csv", density));
  CsvTable t{"effective_probabilities.csv", "interval,count,numerator,denominator,probability", {}};
  for (std::size_t i = 0; i < density.bins(); ++i) {
    t.add_row({std::to_string(i + 1), std::to_string(density.counts[i]),
               std::to_string(probs.numerators[i]), std::to_string(probs.denominator),
               format_double(probs.probability(i))});
  }
  out.tables.push_back(std::move(t));
  return out;
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> registry = build_registry();
  return registry;
}

const ExperimentInfo& find_experiment(std::string_view name) {
  for (const auto& e : experiments()) {
    if (e.name == name) return e;
  }
  throw UsageError("unknown experiment '" + std::string(name) + "'");
}

ExperimentConfig resolve_config(const std::string& experiment,
                                const ConfigSources& sources) {
  const ExperimentInfo& info = find_experiment(experiment);
  std::map<std::string, ordered_json> given;
  std::optional<std::string> out;

  if (sources.file) {
    const ordered_json& doc = *sources.file;
    if (!doc.is_object()) throw UsageError("config: top level must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "experiment") {
        if (!value.is_string() || value.get<std::string>() != experiment) {
          throw UsageError("config: file is for experiment " + value.dump());
        }
      } else if (key == "seed") {
        given["seed"] = value;
      } else if (key == "out") {
        if (!value.is_string()) throw UsageError("config: 'out' must be a string");
        out = value.get<std::string>();
      } else if (key == "params") {
        if (!value.is_object()) throw UsageError("config: 'params' must be an object");
        for (const auto& [pk, pv] : value.items()) {
          find_param(info, pk);
          given[pk] = pv;
        }
      } else {
        throw UsageError("config: unknown key '" + key + "'");
      }
    }
  }
  for (const auto& [key, value] : sources.overrides) {
    find_param(info, key);
    given[key] = value;
  }
  if (sources.seed_flag) given["seed"] = *sources.seed_flag;
  if (sources.seed_env) given["seed"] = *sources.seed_env;
  if (sources.out_flag) out = *sources.out_flag;

  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.params = ordered_json::object();
  for (const auto& spec : info.params) {
    const auto it = given.find(spec.name);
    if (it != given.end()) {
      cfg.params[spec.name] = coerce(spec, it->second);
    } else if (!spec.default_value.is_null()) {
      cfg.params[spec.name] = coerce(spec, spec.default_value);
    } else {
      throw UsageError("missing required parameter '" + spec.name + "'");
    }
  }
  cfg.out_dir = out.value_or(kDefaultOutDir);
  return cfg;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  const ExperimentInfo& info = find_experiment(config.experiment);
  Report report;
  report.experiment = info.name;
  report.config = ordered_json::object();
  report.config["experiment"] = info.name;
  report.config["params"] = config.params;
  const Params p(config.params);
  if (info.name == "clt-convergence") return clt_convergence(p, std::move(report));
  if (info.name == "rayleigh-coefficients") return rayleigh_coefficients(p, std::move(report));
  if (info.name == "pearson-msd") return pearson_msd(p, std::move(report));
  if (info.name == "brownian-bridge") return brownian_bridge(p, std::move(report));
  if (info.name == "pde-vs-mc") return pde_vs_mc(p, std::move(report));
  if (info.name == "bounded-bias") return bounded_bias(p, std::move(report));
  if (info.name == "einstein-avogadro") return einstein_avogadro(p, std::move(report));
  if (info.name == "inject-renormalize") return inject_renormalize(p, std::move(report));
  throw UsageError("experiment '" + info.name + "' has no driver");
}

}  // namespace difflab

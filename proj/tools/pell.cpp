// pell: configuration-driven experiments for the p-ellipticity calculus and
// its discrete verifiers. Subcommands: pcalc, scan, rh, meyers, kernel.
// Exit codes: 0 success, 1 asserted invariant failed, 2 configuration error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "pell/config.hpp"
#include "pell/report.hpp"
#include "pell/verify.hpp"

namespace fs = std::filesystem;
using namespace pell;

namespace {

struct Context {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 1;
  bool failed = false;  // an asserted invariant was violated

  std::string path(const std::string& name) const { return (out / name).string(); }

  void check(bool ok, const std::string& what) {
    if (!ok) {
      std::cerr << "ASSERTION FAILED: " << what << "\n";
      failed = true;
    }
  }
};

CoefficientField field_from_config(const Config& cfg, double contrast = -1.0) {
  std::string kind = cfg.get("field.kind");
  int d = cfg.get_int("field.d", 2);
  if (kind == "constant" || kind == "identity")
    return make_constant(cfg.get_double("field.scale", 1.0) *
                         CMatrix::Identity(d, d));
  if (kind == "scalar_rotation")
    return make_scalar_rotation(cfg.get_double("field.phi"), d);
  if (kind == "checkerboard") {
    double c = contrast > 0.0 ? contrast : cfg.get_double("field.contrast", 10.0);
    int tiling = cfg.get_int("field.tiling", 4);
    std::vector<CMatrix> tiles = {CMatrix::Identity(d, d),
                                  CMatrix(c * CMatrix::Identity(d, d))};
    return make_checkerboard(tiles, tiling, d);
  }
  if (kind == "table") {
    int tiling = cfg.get_int("field.tiling");
    return make_table(load_table_file(cfg.get("field.file"), d), tiling, d);
  }
  throw ConfigError(cfg.line_of("field.kind"),
                    "unknown field kind '" + kind + "'");
}

DomainSpec domain_from_config(const Config& cfg) {
  std::string shape = cfg.get("domain.shape", "box");
  int d = cfg.get_int("field.d", 2);
  DomainSpec spec;
  if (shape == "box") {
    spec = DomainSpec::box(d, false);
  } else if (shape == "lshape") {
    spec = DomainSpec::lshape();
  } else {
    throw ConfigError(cfg.line_of("domain.shape"),
                      "unknown domain shape '" + shape + "'");
  }
  std::string faces = cfg.get("domain.dirichlet", "all");
  if (faces == "all") {
    for (int f = 0; f < spec.n_faces(); ++f) spec.dirichlet_faces.insert(f);
  } else if (faces != "none") {
    std::stringstream ss(faces);
    std::string item;
    while (std::getline(ss, item, ',')) {
      int f = std::stoi(item);
      if (f < 0 || f >= spec.n_faces())
        throw ConfigError(cfg.line_of("domain.dirichlet"),
                          "face id out of range: " + item);
      spec.dirichlet_faces.insert(f);
    }
  }
  spec.chart_constant = cfg.get_double("domain.chart_constant", 1.0);
  return spec;
}

std::vector<int> sizes_from_config(const Config& cfg) {
  std::vector<int> out;
  for (double v : cfg.get_list("grid.sizes")) out.push_back(static_cast<int>(v));
  return out;
}

// ---------------------------------------------------------------------------

int cmd_pcalc(Context& ctx) {
  auto field = field_from_config(ctx.cfg);
  int d = ctx.cfg.get_int("field.d", 2);
  double pmin = ctx.cfg.get_double("pcalc.p_min", 2.0);
  double pmax = ctx.cfg.get_double("pcalc.p_max", 12.0);
  int steps = ctx.cfg.get_int("pcalc.p_steps", 41);
  std::vector<double> p_grid;
  for (int k = 0; k < steps; ++k)
    p_grid.push_back(pmin + (pmax - pmin) * k / std::max(1, steps - 1));
  auto rep = pcalc_report(field, d, p_grid);

  CsvWriter curve(ctx.path("pcalc_delta_curve.csv"), ctx.cfg.echo(),
                  {"p", "delta_p", "delta_p_conjugate"});
  for (const auto& [p, dp] : rep.delta_curve) {
    double dpc = delta_p(field, conjugate_exponent(p));
    curve.write_row({p, dp, dpc});
    ctx.check(std::abs(dp - dpc) < 1e-8, "Delta_p duality at p=" + fmt_num(p));
  }

  CsvWriter summary(
      ctx.path("pcalc_summary.csv"), ctx.cfg.echo(),
      {"delta", "p0", "p0_delta_route", "interval_lower", "interval_upper",
       "eps0_lower", "theta0", "omega", "theta"});
  summary.write_row({rep.delta, rep.p0_value, rep.p0_delta_route,
                     rep.interval.first, rep.interval.second, rep.eps0,
                     rep.angles.theta0, rep.angles.omega, rep.angles.theta});
  ctx.check(!rep.p0_warning, "p0 bisection and delta route agree");
  return 0;
}

int cmd_scan(Context& ctx) {
  auto field = field_from_config(ctx.cfg);
  auto spec = domain_from_config(ctx.cfg);
  auto sizes = sizes_from_config(ctx.cfg);
  double p = ctx.cfg.get_double("scan.p", 2.0);
  int n_lambda = ctx.cfg.get_int("scan.n_lambda", 20);
  int probes = ctx.cfg.get_int("scan.probes", 30);
  if (n_lambda < 1)
    throw ConfigError(ctx.cfg.line_of("scan.n_lambda"), "n_lambda must be >= 1");
  double theta;
  if (ctx.cfg.has("scan.theta")) {
    theta = ctx.cfg.get_double("scan.theta");
  } else {
    double lp = delta_p(field, p);
    theta = sector_angles(field, p, std::max(lp, 1e-12)).theta;
  }

  CsvWriter rows(ctx.path("scan_samples.csv"), ctx.cfg.echo(),
                 {"n", "re_lambda", "im_lambda", "est_resolvent", "est_gradient",
                  "est_div", "probes", "solver_ok"});
  CsvWriter summary(ctx.path("scan_summary.csv"), ctx.cfg.echo(),
                    {"n", "p", "theta", "sup_resolvent", "sup_gradient",
                     "sup_div"});
  for (int n : sizes) {
    Grid g = build_grid(spec, n);
    auto op = assemble(field, g);
    auto res = sector_scan(op, p, theta, n_lambda, probes, ctx.seed);
    for (const auto& s : res.samples) {
      rows.write_row({n, s.lambda.real(), s.lambda.imag(), s.est_resolvent,
                      s.est_gradient, s.est_div, s.probes,
                      s.solver_ok ? 1 : 0});
      ctx.check(s.solver_ok, "solver at lambda=" + fmt_num(s.lambda.real()) +
                                 "+" + fmt_num(s.lambda.imag()) + "i");
    }
    summary.write_row(
        {n, p, theta, res.sup_resolvent, res.sup_gradient, res.sup_div});
  }
  return 0;
}

int cmd_rh(Context& ctx) {
  auto field = field_from_config(ctx.cfg);
  auto spec = domain_from_config(ctx.cfg);
  auto sizes = sizes_from_config(ctx.cfg);
  double p = ctx.cfg.get_double("rh.p", 3.0);
  double c = ctx.cfg.get_double("rh.c", 1.0);
  double q_override = ctx.cfg.get_double("rh.q_override", 0.0);
  Complex lambda(ctx.cfg.get_double("rh.lambda_re", 1.0),
                 ctx.cfg.get_double("rh.lambda_im", 0.0));
  int trials = ctx.cfg.get_int("rh.trials", 10);
  int group = std::max(1, ctx.cfg.get_int("rh.batch", 5));
  double r_lo = ctx.cfg.get_double("rh.r_min", 0.15);
  double r_hi = ctx.cfg.get_double("rh.r_max", 0.25);
  bool assert_stable = ctx.cfg.get_int("rh.assert_stable", 0) != 0;

  // deterministic trial geometry, shared across refinements
  Rng rng(ctx.seed);
  std::uniform_real_distribution<double> uc(0.25, 0.75), ur(r_lo, r_hi);
  std::vector<std::pair<Point, double>> patches;
  int dim = spec.dim();
  for (int t = 0; t < trials; ++t) {
    Point x0 = Point::Zero();
    for (int a = 0; a < dim; ++a) x0(a) = uc(rng);
    if (t % 4 == 3) x0(t % dim) = 1.0;  // some boundary-touching centers
    patches.emplace_back(x0, ur(rng));
  }

  CsvWriter rows(ctx.path("rh_trials.csv"), ctx.cfg.echo(),
                 {"n", "trial", "x0", "x1", "x2", "r", "q", "ratio",
                  "ratio_mean", "degenerate"});
  std::vector<std::vector<double>> ratios(trials);
  for (int n : sizes) {
    Grid g = build_grid(spec, n);
    auto op = assemble(field, g);
    for (int start = 0; start < trials; start += group) {
      int stop = std::min(trials, start + group);
      std::vector<std::pair<Point, double>> batch(patches.begin() + start,
                                                  patches.begin() + stop);
      auto sols = make_local_solutions(op, lambda, batch,
                                       ctx.seed + 1000 + start);
      for (int t = start; t < stop; ++t) {
        auto e = rh_check(sols[t - start], p, c, q_override);
        rows.write_row({n, t, patches[t].first(0), patches[t].first(1),
                        patches[t].first(2), patches[t].second, e.q, e.ratio,
                        e.ratio_mean, e.degenerate ? 1 : 0});
        if (!e.degenerate) ratios[t].push_back(e.ratio);
      }
    }
  }

  CsvWriter summary(ctx.path("rh_summary.csv"), ctx.cfg.echo(),
                    {"trial", "levels", "max_growth", "classification"});
  for (int t = 0; t < trials; ++t) {
    double growth = 0.0;
    for (size_t k = 1; k < ratios[t].size(); ++k)
      growth = std::max(growth, ratios[t][k] / ratios[t][k - 1] - 1.0);
    bool stable = ratios[t].size() >= 2 && growth < 0.10;
    summary.write_row({t, static_cast<int>(ratios[t].size()), growth,
                       ratios[t].size() < 2 ? "degenerate"
                                            : (stable ? "stable" : "growing")});
    if (assert_stable && ratios[t].size() >= 2)
      ctx.check(stable, "rh trial " + std::to_string(t) + " stable");
  }
  return 0;
}

int cmd_meyers(Context& ctx) {
  auto spec = domain_from_config(ctx.cfg);
  auto sizes = sizes_from_config(ctx.cfg);
  auto contrasts = ctx.cfg.get_list("meyers.contrasts");
  auto p_grid = ctx.cfg.get_list("meyers.p_grid");
  Complex lambda(ctx.cfg.get_double("meyers.lambda_re", 1.0),
                 ctx.cfg.get_double("meyers.lambda_im", 0.0));
  int probes = ctx.cfg.get_int("meyers.probes", 40);
  bool assert_monotone = ctx.cfg.get_int("meyers.assert_monotone", 0) != 0;

  CsvWriter rows(ctx.path("meyers_norms.csv"), ctx.cfg.echo(),
                 {"contrast", "p", "n", "estimate", "bounded"});
  CsvWriter summary(ctx.path("meyers_summary.csv"), ctx.cfg.echo(),
                    {"contrast", "eps", "eps_is_max"});
  double prev_eps = -1.0;
  bool first = true;
  for (double contrast : contrasts) {
    auto field = field_from_config(ctx.cfg, contrast);
    auto rep = meyers_sweep(field, spec, p_grid, sizes, lambda, probes,
                            ctx.seed, contrast);
    for (const auto& e : rep.entries)
      for (const auto& [n, est] : e.estimates)
        rows.write_row({contrast, e.p, n, est, e.bounded ? 1 : 0});
    summary.write_row({contrast, rep.eps, rep.eps_is_max ? 1 : 0});
    if (!first && assert_monotone)
      ctx.check(rep.eps <= prev_eps + 1e-12,
                "eps nonincreasing at contrast " + fmt_num(contrast));
    prev_eps = rep.eps;
    first = false;
  }
  return 0;
}

int cmd_kernel(Context& ctx) {
  auto field = field_from_config(ctx.cfg);
  auto spec = domain_from_config(ctx.cfg);
  int n = sizes_from_config(ctx.cfg).front();
  auto times = ctx.cfg.get_list("kernel.times");
  double tau = ctx.cfg.get_double("kernel.substep", 5e-5);
  double floor = ctx.cfg.get_double("kernel.floor", 1e-14);
  bool assert_b = ctx.cfg.get_int("kernel.assert_b", 0) != 0;

  Grid g = build_grid(spec, n);
  auto op = assemble(field, g);
  // deterministic interior sources: near the domain center
  int nsrc = ctx.cfg.get_int("kernel.sources", 1);
  std::vector<int> sources;
  Point center = Point::Zero();
  for (int a = 0; a < g.d; ++a) center(a) = 0.5;
  std::vector<std::pair<double, int>> ranked;
  for (int v : g.free_verts)
    ranked.emplace_back((g.verts[v] - center).norm(), v);
  std::sort(ranked.begin(), ranked.end());
  for (int k = 0; k < nsrc && k < static_cast<int>(ranked.size()); ++k)
    sources.push_back(ranked[k * 37 % ranked.size()].second);

  std::vector<KernelColumn> cols;
  for (double t : times) {
    int m = std::max(32, static_cast<int>(std::ceil(t / tau)));
    auto part = kernel_columns(op, {t}, sources, m);
    cols.insert(cols.end(), part.begin(), part.end());
  }
  auto fit = gaussian_fit(cols, g.d, floor);

  CsvWriter summary(ctx.path("kernel_fit.csv"), ctx.cfg.echo(),
                    {"b", "c", "omega", "samples", "max_residual", "accepted",
                     "envelope"});
  summary.write_row({fit.b, fit.c, fit.omega, fit.samples, fit.max_residual,
                     fit.accepted ? 1 : 0, fit.envelope ? 1 : 0});

  // decay plot: log10 |K| against |x-y|^2/t, with the fitted envelope
  SvgWriter svg;
  double smax = 1e-9, kmin = 0.0, kmax = -300.0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& col : cols) {
    const Point& y = g.verts[col.source_vertex];
    for (size_t v = 0; v < g.verts.size(); ++v) {
      double k = std::abs(col.column.values(v));
      if (k < floor) continue;
      double s = (g.verts[v] - y).squaredNorm() / col.t;
      double lk = std::log10(k);
      pts.emplace_back(s, lk);
      smax = std::max(smax, s);
      kmin = std::min(kmin, lk);
      kmax = std::max(kmax, lk);
    }
  }
  std::sort(pts.begin(), pts.end());
  auto sx = [&](double s) { return 60.0 + 560.0 * s / smax; };
  auto sy = [&](double lk) {
    return 20.0 + 420.0 * (kmax - lk) / std::max(1.0, kmax - kmin);
  };
  svg.line(60, 440, 620, 440);
  svg.line(60, 20, 60, 440);
  std::vector<std::pair<double, double>> poly;
  for (const auto& [s, lk] : pts) poly.emplace_back(sx(s), sy(lk));
  svg.polyline(poly, "steelblue", 0.8);
  std::vector<std::pair<double, double>> env;
  double t0 = times.front();
  for (int k = 0; k <= 40; ++k) {
    double s = smax * k / 40.0;
    double lk = (std::log(fit.c) - 0.5 * g.d * std::log(t0) - fit.b * s +
                 fit.omega * t0) / std::log(10.0);
    env.emplace_back(sx(s), sy(std::min(lk, kmax + 1.0)));
  }
  svg.polyline(env, "firebrick", 1.5);
  svg.text(70, 460, "|x-y|^2/t");
  svg.text(70, 16, "log10 |K_t(x,y)|, envelope b=" + fmt_num(fit.b));
  svg.save(ctx.path("kernel_decay.svg"));

  ctx.check(fit.envelope, "fitted bound is an upper envelope");
  if (assert_b) {
    double b_lo = ctx.cfg.get_double("kernel.b_min", 0.1);
    double b_hi = ctx.cfg.get_double("kernel.b_max", 0.35);
    ctx.check(fit.b >= b_lo && fit.b <= b_hi,
              "b in [" + fmt_num(b_lo) + ", " + fmt_num(b_hi) + "]");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for p-elliptic divergence-form operators"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed override (0 = use config)");
  app.add_option("--threads", threads, "worker threads");
  auto* sub_pcalc = app.add_subcommand("pcalc", "p-ellipticity calculus report");
  auto* sub_scan = app.add_subcommand("scan", "resolvent sector scan");
  auto* sub_rh = app.add_subcommand("rh", "weak reverse Hoelder trials");
  auto* sub_meyers = app.add_subcommand("meyers", "Meyers exponent sweep");
  auto* sub_kernel = app.add_subcommand("kernel", "heat kernel Gaussian fit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx{Config::parse_file(config_path)};
    ctx.out = out_dir;
    fs::create_directories(ctx.out);
    ctx.seed = seed != 0 ? seed
                         : static_cast<std::uint64_t>(ctx.cfg.get_int("seed", 1));
    if (sub_pcalc->parsed()) cmd_pcalc(ctx);
    if (sub_scan->parsed()) cmd_scan(ctx);
    if (sub_rh->parsed()) cmd_rh(ctx);
    if (sub_meyers->parsed()) cmd_meyers(ctx);
    if (sub_kernel->parsed()) cmd_kernel(ctx);
    return ctx.failed ? 1 : 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

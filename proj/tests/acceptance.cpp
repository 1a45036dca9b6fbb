// Acceptance gate: one pass/fail line per criterion, with the tolerances
// pinned in code. Exit status 0 only if every criterion passes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pell/verify.hpp"

using namespace pell;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %-34s %s  (%.1fs)\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename F>
void criterion(const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(name, pass, detail,
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
             .count());
}

CMatrix random_elliptic3(Rng& rng) {
  std::normal_distribution<double> gauss;
  for (;;) {
    CMatrix B(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B(i, j) = Complex(gauss(rng), gauss(rng));
    CMatrix H = (B + B.adjoint()) / 2.0;
    CMatrix S = (B - B.adjoint()) / 2.0;
    CMatrix mu = CMatrix::Identity(3, 3) + 0.3 * H + 0.5 * S;
    if (delta_p_point(mu, 2.0) > 0.05) return mu;
  }
}

double matrix_norm(const CMatrix& nu) {
  return nu.jacobiSvd().singularValues()(0);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

int main() {
  // 1. p0 closed form for scalar rotations, against a brute-force delta oracle
  criterion("p0 closed form", [](std::string& detail) {
    bool ok = true;
    for (double phi : {pi / 6.0, pi / 4.0, pi / 3.0, 1.2}) {
      auto t0 = std::chrono::steady_clock::now();
      CMatrix mu = std::polar(1.0, phi) * CMatrix::Identity(3, 3);
      double brute = delta_mu_bruteforce(mu, 100000);
      ok = ok && std::abs(brute - std::cos(phi)) <= 2e-3;  // oracle agreement
      auto res = p0(make_constant(mu));
      double expect = 2.0 / (1.0 - std::cos(phi));
      double rel = std::abs(res.value - expect) / expect;
      double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      ok = ok && rel <= 1e-3 && secs < 1.0;
      if (phi == 1.2) detail = "worst rel err " + fmt(rel);
    }
    return ok;
  });

  // 2. Delta_p duality and conjugation on random elliptic matrices. The exact
  // invariances are p <-> p' and entrywise conjugation; for the adjoint
  // coefficient only the sign of Delta_p is preserved (p-ellipticity transfers,
  // the constant itself does not), so the adjoint is checked at that level.
  criterion("Delta_p duality/conjugation", [](std::string& detail) {
    Rng rng(11);
    double worst = 0.0;
    bool signs = true;
    for (int t = 0; t < 100; ++t) {
      CMatrix mu = random_elliptic3(rng);
      for (double p : {2.5, 3.0, 4.0, 8.0}) {
        double dp = delta_p_point(mu, p);
        worst = std::max(worst,
                         std::abs(dp - delta_p_point(mu, conjugate_exponent(p))));
        worst = std::max(
            worst, std::abs(dp - delta_p_point(CMatrix(mu.conjugate()), p)));
        signs = signs &&
                (dp > 0.0) == (delta_p_point(CMatrix(mu.adjoint()), p) > 0.0);
      }
    }
    detail = "worst gap " + fmt(worst) +
             (signs ? ", adjoint signs agree" : ", adjoint sign mismatch");
    return worst <= 1e-9 && signs;
  });

  // 3. S_p quadratic form equals Re<mu xi, J_p xi>
  criterion("form identity", [](std::string& detail) {
    Rng rng(13);
    std::uniform_real_distribution<double> up(1.1, 12.0);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      CMatrix mu = random_elliptic3(rng);
      double p = up(rng);
      auto lf = local_form(mu, p);
      RVector a = gaussian_vector(rng, 3), b = gaussian_vector(rng, 3);
      CVector xi(3);
      for (int j = 0; j < 3; ++j) xi(j) = Complex(a(j), b(j));
      double direct = inner(CVector(mu * xi), jp_map(xi, p)).real();
      double rel = std::abs(lf.evaluate(a, b) - direct) /
                   std::max(1.0, std::abs(direct));
      worst = std::max(worst, rel);
    }
    detail = "worst rel err " + fmt(worst);
    return worst <= 1e-12;
  });

  // 4. perturbation bound Delta_p(mu+nu) >= Delta_p(mu) - 2max(1/p,1/p')|nu|
  criterion("perturbation bound", [](std::string& detail) {
    Rng rng(17);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> up(1.1, 12.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      CMatrix mu = random_elliptic3(rng);
      CMatrix nu(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          nu(i, j) = 0.2 * Complex(gauss(rng), gauss(rng));
      double p = up(rng);
      double bound = perturbed_delta_bound(delta_p_point(mu, p), p,
                                           matrix_norm(nu));
      worst = std::max(worst, bound - delta_p_point(CMatrix(mu + nu), p));
    }
    detail = "worst violation " + fmt(worst);
    return worst <= 1e-12;
  });

  // 5. interval and eps0 arithmetic at p0 = 4, d = 3
  criterion("interval/eps0 arithmetic", [](std::string& detail) {
    auto iv = analyticity_interval(4.0, 3);
    double e0 = eps0_lower(4.0, 3);
    double err = std::max({std::abs(iv.first - 12.0 / 11.0),
                           std::abs(iv.second - 12.0),
                           std::abs(e0 - 1.0 / 12.0)});
    detail = "worst err " + fmt(err);
    return err <= 1e-15;
  });

  // 6. manufactured solution converges at second order
  criterion("solver correctness", [](std::string& detail) {
    auto rep = manufactured_check({16, 32, 64}, 2);
    bool ok = true;
    for (double o : rep.orders) ok = ok && std::abs(o - 2.0) <= 0.2;
    detail = "orders";
    for (double o : rep.orders) detail += " " + fmt(o);
    return ok;
  });

  // 7. discrete L2 sectoriality against the Lax-Milgram constant
  criterion("L2 sectoriality", [](std::string& detail) {
    Rng rng(2026);
    std::normal_distribution<double> gauss;
    std::vector<CoefficientField> fields;
    while (fields.size() < 6) {
      bool cplx = fields.size() >= 3;
      CMatrix B(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          B(i, j) = Complex(gauss(rng), cplx ? gauss(rng) : 0.0);
      CMatrix mu = CMatrix::Identity(2, 2) + 0.35 * (B + B.adjoint()) / 2.0 +
                   (cplx ? Complex(0, 0.35) : Complex(0, 0)) *
                       (B - B.adjoint()) / 2.0;
      try {
        auto f = make_constant(mu);
        if (delta_p(f, 2.0) > 0.05) fields.push_back(f);
      } catch (const std::invalid_argument&) {
      }
    }
    bool ok = true;
    double worst_margin = 0.0;
    int idx = 0;
    for (const auto& f : fields) {
      auto ang = sector_angles(f, 2.0, delta_p(f, 2.0));
      double M = lax_milgram_constant(ang.theta, ang.theta0);
      for (int n : {16, 32, 64}) {
        Grid g = build_grid(DomainSpec::box(2), n);
        auto op = assemble(f, g);
        auto res = sector_scan(op, 2.0, ang.theta, 50, 8, 1000 + idx);
        for (const auto& s : res.samples) ok = ok && s.solver_ok;
        ok = ok && res.sup_resolvent <= M * 1.05;
        worst_margin = std::max(worst_margin, res.sup_resolvent / M);
      }
      ++idx;
    }
    detail = "worst sup/M " + fmt(worst_margin);
    return ok;
  });

  // 8. resolvent divergence estimate stable under refinement
  criterion("divergence estimate", [](std::string& detail) {
    auto f = make_scalar_rotation(pi / 3.0, 2);
    auto ang = sector_angles(f, 2.0, delta_p(f, 2.0));
    std::vector<double> sups;
    for (int n : {32, 64}) {
      Grid g = build_grid(DomainSpec::box(2), n);
      auto op = assemble(f, g);
      auto res = sector_scan(op, 2.0, ang.theta, 50, 48, 4242, 1e-2, 1e2);
      for (const auto& s : res.samples)
        if (!s.solver_ok) return false;
      sups.push_back(res.sup_div);
    }
    double variation = std::abs(sups[1] / sups[0] - 1.0);
    detail = "sup " + fmt(sups[0]) + " -> " + fmt(sups[1]) + ", variation " +
             fmt(variation);
    return variation < 0.10;
  });

  // 9. reverse Hoelder ratio stable under refinement, interior and boundary
  criterion("reverse Hoelder stability", [](std::string& detail) {
    auto field = make_constant(
        CMatrix(std::polar(1.0, pi / 3.0) * CMatrix::Identity(3, 3)));
    DomainSpec spec = DomainSpec::box(3);
    Rng rng(2711);
    std::uniform_real_distribution<double> uc(0.3, 0.7), ur(0.18, 0.24);
    std::vector<std::pair<Point, double>> patches;
    for (int t = 0; t < 20; ++t) {
      Point x0 = Point::Zero();
      for (int a = 0; a < 3; ++a) x0(a) = uc(rng);
      if (t % 10 >= 7) x0(t % 3) = (t % 2 == 0) ? 0.0 : 1.0;  // 6 boundary
      patches.emplace_back(x0, ur(rng));
    }
    std::vector<std::vector<double>> ratios(patches.size());
    for (int n : {16, 32, 64}) {
      Grid g = build_grid(spec, n);
      auto op = assemble(field, g);
      for (size_t start = 0; start < patches.size(); start += 5) {
        size_t stop = std::min(patches.size(), start + 5);
        std::vector<std::pair<Point, double>> batch(patches.begin() + start,
                                                    patches.begin() + stop);
        auto sols = make_local_solutions(op, Complex(1, 0), batch,
                                         9000 + start);
        for (size_t t = start; t < stop; ++t) {
          auto e = rh_check(sols[t - start], 3.0, 1.0);
          if (!e.degenerate) ratios[t].push_back(e.ratio);
        }
      }
    }
    int valid = 0;
    double worst = 0.0;
    for (const auto& r : ratios) {
      if (r.size() != 3) continue;  // degenerate at some level: excluded
      ++valid;
      for (size_t k = 1; k < r.size(); ++k)
        worst = std::max(worst, r[k] / r[k - 1] - 1.0);
    }
    detail = std::to_string(valid) + "/20 valid, worst growth " + fmt(worst);
    return valid >= 16 && worst < 0.10;
  });

  // 10. Moser chain bookkeeping and ladder arithmetic
  criterion("Moser chain bookkeeping", [](std::string& detail) {
    auto l18 = moser_ladder(18.0, 3);
    auto l10 = moser_ladder(10.0, 3);
    auto l2 = moser_ladder(2.0, 3);
    bool ladders = l18 == std::vector<double>{2.0, 6.0, 18.0, 54.0} &&
                   l10 == std::vector<double>{2.0, 6.0, 10.0, 30.0} &&
                   l2 == std::vector<double>{2.0, 6.0};

    DomainSpec spec = DomainSpec::box(3);
    Grid g = build_grid(spec, 16);
    auto op = assemble(make_constant(CMatrix::Identity(3, 3)), g);
    auto sol =
        make_local_solution(op, Complex(1, 0), Point(0.5, 0.5, 0.5), 0.2, 31);
    auto rep = moser_chain(sol, 2.0, spec);
    double gap1 = std::abs(rep.chained - rep.product) /
                  std::max(1e-300, rep.chained);
    auto rh = rh_check(sol, 2.0, rep.inner_factor);
    double gap2 =
        std::abs(rep.chained - rh.ratio) / std::max(1e-300, rep.chained);
    detail = "rung-product gap " + fmt(gap1) + ", rh gap " + fmt(gap2);
    return ladders && !rep.degenerate && gap1 <= 1e-12 && gap2 <= 1e-12;
  });

  // 11. Gaussian envelope fit of heat kernel columns
  criterion("Gaussian kernel fit", [](std::string& detail) {
    Grid g = build_grid(DomainSpec::box(2), 64);
    auto op = assemble(make_constant(CMatrix::Identity(2, 2)), g);
    std::vector<Point> wanted = {Point(0.5, 0.5, 0), Point(0.3, 0.55, 0),
                                 Point(0.65, 0.4, 0)};
    std::vector<int> sources;
    for (const Point& w : wanted) {
      int best = -1;
      double bd = 1e300;
      for (int v : g.free_verts) {
        double dist = (g.verts[v] - w).norm();
        if (dist < bd) bd = dist, best = v;
      }
      sources.push_back(best);
    }
    std::vector<KernelColumn> cols;
    for (double t : {0.005, 0.01, 0.02}) {
      int m = static_cast<int>(std::ceil(t / 5e-5));
      auto part = kernel_columns(op, {t}, sources, m);
      cols.insert(cols.end(), part.begin(), part.end());
    }
    auto fit = gaussian_fit(cols, 2);
    detail = "b " + fmt(fit.b) + ", envelope " +
             (fit.envelope ? "yes" : "no");
    return fit.b >= 0.1 && fit.b <= 0.35 && fit.envelope;
  });

  // 12. Meyers exponent nonincreasing in contrast; raw norms archived by the
  // `pell meyers` command
  criterion("Meyers monotonicity", [](std::string& detail) {
    DomainSpec spec = DomainSpec::lshape({0, 1, 2, 3});
    std::vector<double> eps;
    for (double contrast : {1.0, 10.0, 100.0}) {
      CoefficientField field =
          contrast == 1.0
              ? make_constant(CMatrix::Identity(2, 2))
              : make_checkerboard({CMatrix::Identity(2, 2),
                                   CMatrix(contrast * CMatrix::Identity(2, 2))},
                                  4, 2);
      auto rep = meyers_sweep(field, spec, {2.0, 2.5, 3.0, 3.5, 4.0},
                              {16, 32, 64}, Complex(1, 0), 96, 42, contrast);
      eps.push_back(rep.eps);
    }
    bool mono = eps[0] >= eps[1] && eps[1] >= eps[2];
    detail = "eps " + fmt(eps[0]) + ", " + fmt(eps[1]) + ", " + fmt(eps[2]);
    return mono && eps[0] >= 1.0;
  });

  // 13. byte-identical CSVs across repeated CLI runs
  criterion("determinism", [](std::string& detail) {
    fs::path dir = fs::temp_directory_path() / "pell_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "seed = 7\n[field]\nkind = "
                                      "scalar_rotation\nphi = 0.9\nd = 2\n"
                                      "[grid]\nsizes = 8\n[scan]\nn_lambda = "
                                      "6\nprobes = 8\n[pcalc]\np_steps = 5\n";
    auto run = [&](const std::string& sub, const std::string& out) {
      std::string cmd = std::string(PELL_CLI_PATH) + " " + sub + " --config " +
                        (dir / "run.cfg").string() + " --out " +
                        (dir / out).string() + " >/dev/null 2>&1";
      return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    bool ok = run("pcalc", "a") && run("pcalc", "b") && run("scan", "a") &&
              run("scan", "b");
    for (const char* f : {"pcalc_summary.csv", "pcalc_delta_curve.csv",
                          "scan_samples.csv", "scan_summary.csv"})
      ok = ok && !slurp(dir / "a" / f).empty() &&
           slurp(dir / "a" / f) == slurp(dir / "b" / f);
    detail = ok ? "4 CSV pairs byte-identical" : "mismatch";
    return ok;
  });

  std::printf("%d/13 criteria passed\n", 13 - g_failures);
  return g_failures == 0 ? 0 : 1;
}

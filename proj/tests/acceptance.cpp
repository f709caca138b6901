// Acceptance checks; prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gimvi/bench.hpp"
#include "gimvi/gimvi.hpp"

namespace fs = std::filesystem;
using gimvi::VectorXd;
using Op = gimvi::OperatorSpec<double>;

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4e", v);
  return buf;
}

bool within_orders(double got, double want, double orders) {
  return got > 0 && want > 0 && std::abs(std::log10(got) - std::log10(want)) <= orders;
}

// Strictly increasing in the given order of indices means the same ranking.
bool same_ordering(const std::vector<double>& got, const std::vector<double>& want) {
  for (std::size_t i = 0; i < got.size(); ++i)
    for (std::size_t j = 0; j < got.size(); ++j)
      if ((want[i] < want[j]) != (got[i] < got[j])) return false;
  return true;
}

gimvi::Constants paper_constants() { return gimvi::constants_for(gimvi::paper_example_problem()); }

std::vector<double> final_errors(double rho, long iters) {
  const auto p = gimvi::paper_example_problem();
  std::vector<double> out;
  gimvi::SolverConfig cfg;
  cfg.rho = rho;
  cfg.max_iters = iters;
  cfg.counting = gimvi::IterationCounting::kIterateIndex;
  for (double kappa : {0.1, 0.59, 0.9}) {
    cfg.kappa = kappa;
    out.push_back(gimvi::solve_inertial(p, cfg, scalar(100.0), scalar(100.0)).last().error);
  }
  cfg.kappa = 1.0;
  out.push_back(gimvi::solve_projection(p, cfg, scalar(100.0)).last().error);
  return out;
}

Outcome constants_reproduction() {
  const auto c = paper_constants();
  if (std::abs(c.a - 0.00375) > 1e-15) return fail("a = " + gimvi::format_real(c.a));
  if (!c.a_positive()) return fail("a not positive");
  return {true, "a = " + gimvi::format_real(c.a) + " > 0"};
}

Outcome existence_condition() {
  const auto r = gimvi::check_existence_uniqueness(paper_constants());
  const auto* sum = r.find("sqrt(eta^2+beta^2-2alpha) + sqrt(1-2zeta+beta^2) < 1");
  if (!r.satisfied || !sum) return fail("not satisfied");
  if (std::abs(sum->margin - 0.25) > 1e-12) return fail("margin " + gimvi::format_real(sum->margin));
  return {true, "0.75 < 1, margin " + gimvi::format_real(sum->margin)};
}

Outcome table_rho_00019() {
  const std::vector<double> want{1.5856421935e-35, 5.5334312632e-4, 3.6336573415e-2, 8.0263714274e-2};
  const auto got = final_errors(0.0019, 5000);
  std::string detail;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (!within_orders(got[i], want[i], 1.0)) return fail("entry " + std::to_string(i) + ": " + sci(got[i]));
    detail += sci(got[i]) + " ";
  }
  if (!same_ordering(got, want)) return fail("ordering differs");
  return {true, detail + "(ordering matches)"};
}

Outcome table_rho_009() {
  const std::vector<double> want{1.5258126167e-10, 3.5502140699e-28, 8.8911678718e-16, 6.6935161972e-14};
  const auto got = final_errors(0.09, 500);
  std::string detail;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (!within_orders(got[i], want[i], 2.0)) return fail("entry " + std::to_string(i) + ": " + sci(got[i]));
    detail += sci(got[i]) + " ";
  }
  for (long n = 400; n <= 600; ++n)
    if (!same_ordering(final_errors(0.09, n), want)) return fail("ordering differs at " + std::to_string(n));
  return {true, detail + "(ordering holds for 400..600)"};
}

Outcome rate_oracle() {
  const auto p = gimvi::paper_example_problem();
  const double slope = gimvi::local_residual_slope(p, scalar(0.0));
  gimvi::SolverConfig cfg;
  cfg.rho = 0.0019;
  cfg.max_iters = 5000;
  cfg.counting = gimvi::IterationCounting::kIterateIndex;
  std::string detail;
  for (double kappa : {0.1, 0.59, 0.9, 1.0}) {
    cfg.kappa = kappa;
    const auto tr = kappa == 1.0 ? gimvi::solve_projection(p, cfg, scalar(100.0))
                                 : gimvi::solve_inertial(p, cfg, scalar(100.0), scalar(100.0));
    const auto fit = gimvi::fit_linear_rate(tr, scalar(0.0), gimvi::RatePrediction{kappa, 0.0019, slope});
    if (std::abs(fit.rate - *fit.predicted_rate) > 1e-3)
      return fail("kappa " + gimvi::format_real(kappa) + ": fitted " + gimvi::format_real(fit.rate) +
                  " predicted " + gimvi::format_real(*fit.predicted_rate));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f/%.6f ", fit.rate, *fit.predicted_rate);
    detail += buf;
  }
  return {true, "fitted/predicted " + detail};
}

struct ProxCase {
  gimvi::ConvexFunctionSpec<double> f;
  gimvi::FeasibleSetSpec<double> K;
  double gamma;
};

bool prox_suite(const std::function<ProxCase(std::mt19937_64&)>& make, Eigen::Index d, int n, std::mt19937_64& rng,
                std::string& why) {
  std::uniform_real_distribution<double> ux(-100, 100), u01(0, 1);
  for (int i = 0; i < n; ++i) {
    const ProxCase c = make(rng);
    VectorXd x(d), y(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x(j) = ux(rng);
      y(j) = ux(rng);
    }
    const VectorXd px = gimvi::prox(x, c.gamma, c.f, c.K).point;
    const VectorXd py = gimvi::prox(y, c.gamma, c.f, c.K).point;
    if ((px - py).norm() > (x - y).norm() * (1 + 1e-12)) {
      why = "nonexpansiveness";
      return false;
    }
    const VectorXd pn = gimvi::prox_numeric_oracle(x, c.gamma, c.f, c.K, 1e-12).point;
    if ((px - pn).norm() > 1e-8 * (1 + x.norm())) {
      why = "closed form vs golden section: " + sci((px - pn).norm());
      return false;
    }
    std::vector<VectorXd> probes;
    for (int k = 0; k < 100; ++k) {
      VectorXd v(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double lo = std::isinf(c.K.lower()(j)) ? -200.0 : c.K.lower()(j);
        const double hi = std::isinf(c.K.upper()(j)) ? 200.0 : c.K.upper()(j);
        v(j) = lo + (hi - lo) * u01(rng);
      }
      probes.push_back(std::move(v));
    }
    const auto vi = gimvi::check_variational_characterization<double>(x, px, c.gamma, c.f, c.K, probes,
                                                                     1e-9 * (1 + x.squaredNorm()));
    if (!vi.holds) {
      why = "variational characterization: " + sci(vi.worst);
      return false;
    }
  }
  return true;
}

Outcome prox_properties() {
  std::mt19937_64 rng(1);
  std::string why;
  const auto p = gimvi::paper_example_problem();
  const auto paper = [&](std::mt19937_64&) { return ProxCase{p.f, p.K, p.gamma}; };
  if (!prox_suite(paper, 1, 1000, rng, why)) return fail("1-D: " + why);

  const auto random_box = [](std::mt19937_64& g) {
    std::uniform_real_distribution<double> uq(0, 2), ul(-5, 5), ub(-50, 50), ug(0.1, 3), u01(0, 1);
    VectorXd q(8), l(8), lo(8), hi(8);
    for (int j = 0; j < 8; ++j) {
      q(j) = u01(g) < 0.25 ? 0.0 : uq(g);
      l(j) = ul(g);
      double a = ub(g), b = ub(g);
      if (a > b) std::swap(a, b);
      lo(j) = u01(g) < 0.3 ? -std::numeric_limits<double>::infinity() : a;
      hi(j) = u01(g) < 0.3 ? std::numeric_limits<double>::infinity() : b;
    }
    return ProxCase{gimvi::ConvexFunctionSpec<double>::separable_quadratic(q, l),
                    gimvi::FeasibleSetSpec<double>::box(lo, hi), ug(g)};
  };
  if (!prox_suite(random_box, 8, 1000, rng, why)) return fail("8-D: " + why);
  return {true, "1000 1-D + 1000 8-D inputs, 100 probes each"};
}

Outcome estimate_lemma() {
  const auto p = gimvi::paper_example_problem();
  const auto c = paper_constants();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> wide(-1e4, 1e4), narrow(-1, 1);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double w = i % 2 ? wide(rng) : narrow(rng);
    const auto r = gimvi::lemma_bounds_check(p, c, scalar(w), scalar(0.0));
    if (!r.satisfied) return fail("violated at w = " + gimvi::format_real(w));
    for (const auto& d : r.details) worst = std::min(worst, d.margin / (1 + w * w));
  }
  return {true, "10000 points, worst scaled margin " + sci(worst)};
}

Outcome continuous_integrator() {
  // Linear oracle: T = I, g = I, f = 0, K = R, gamma = 1 gives A(w) = w.
  const auto lin = gimvi::Problem::make("linear", Op::identity(), Op::identity(),
                                        gimvi::ConvexFunctionSpec<double>::zero(),
                                        gimvi::FeasibleSetSpec<double>::whole_space(1), 1.0, 1.0, VectorXd::Zero(1));
  const double k = 3.0, q = 1.0, w0 = 1.0, v0 = 0.5, t_end = 2.0;
  const double s = std::sqrt(k * k - 4 * q), r1 = (-k + s) / 2, r2 = (-k - s) / 2;
  const double c1 = (v0 - r2 * w0) / (r1 - r2);
  const double exact = c1 * std::exp(r1 * t_end) + (w0 - c1) * std::exp(r2 * t_end);
  auto err = [&](double h) {
    gimvi::IntegrateOptions o;
    o.h = h;
    o.t_end = t_end;
    const auto tr = gimvi::integrate(lin, gimvi::SchedulePair<double>::constant(k, q), scalar(w0), scalar(v0), o);
    return std::abs(tr.last().w(0) - exact);
  };
  const double ratio = err(0.1) / err(0.05);
  if (ratio < 12) return fail("RK4 ratio " + gimvi::format_real(ratio));

  const auto paper = gimvi::paper_example_problem();
  gimvi::IntegrateOptions eq;
  eq.h = 0.01;
  eq.t_end = 10.0;
  const auto still =
      gimvi::integrate(paper, gimvi::SchedulePair<double>::constant(2.0, 0.5), scalar(0.0), scalar(0.0), eq);
  for (const auto& r : still.rows)
    if (r.w(0) != 0.0 || r.v(0) != 0.0) return fail("equilibrium drifted");

  // A(w) = 100 w in R^2: a = 50, tau = 102; kappa = 40, rho = 3.5 satisfy the continuous conditions.
  const auto syn = gimvi::Problem::make("synthetic", Op::identity(), Op::scalar_linear(100.0),
                                        gimvi::ConvexFunctionSpec<double>::zero(),
                                        gimvi::FeasibleSetSpec<double>::whole_space(2), 1.0, 100.0, VectorXd::Zero(2));
  const auto c = gimvi::constants_for(syn);
  const auto sched = gimvi::SchedulePair<double>::constant(40.0, 3.5);
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.01 * i);
  const auto cond = gimvi::check_continuous_conditions(sched.kappa, sched.rho, std::span<const double>(grid), c, 40.0);
  if (!cond.satisfied) return fail("synthetic conditions not satisfied");
  gimvi::IntegrateOptions o;
  o.h = 1e-3;
  o.t_end = 2.0;
  VectorXd a(2), b(2);
  a << 1.0, -2.0;
  b << 0.5, 0.5;
  const auto tr = gimvi::integrate(syn, sched, a, b, o);
  const auto rep = gimvi::lyapunov_monitor(tr, c, sched);
  if (!rep.energy_nonincreasing) return fail("energy increased by " + sci(rep.worst_increase));
  const auto fit = gimvi::fit_exponential_rate(tr, VectorXd(VectorXd::Zero(2)));
  if (!(fit.rate < 0)) return fail("rate " + gimvi::format_real(fit.rate));
  return {true, "RK4 ratio " + sci(ratio) + ", equilibrium fixed, energy nonincreasing, rate " + sci(fit.rate)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::absolute("acceptance_out");
  fs::remove_all(root);
  for (const char* run : {"first", "second"}) {
    auto plan = gimvi::parse_config_string_unchecked(gimvi::paper_plan_text(), "bundled");
    plan.output = root / run;
    const auto summary = gimvi::run_experiment(plan);
    if (summary.any_failed()) return fail("a run failed");
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "first")) {
    const auto name = entry.path().filename();
    if (name == "timing.csv") continue;
    if (!fs::exists(root / "second" / name)) return fail("missing " + name.string());
    if (slurp(entry.path()) != slurp(root / "second" / name)) return fail(name.string() + " differs");
    ++files;
  }
  fs::remove_all(root);
  return {true, std::to_string(files) + " files byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"constants reproduction", constants_reproduction},
      {"existence condition", existence_condition},
      {"rho=0.0019 table (5000 iterations)", table_rho_00019},
      {"rho=0.09 table (500 iterations)", table_rho_009},
      {"rate oracle agreement", rate_oracle},
      {"prox property suite", prox_properties},
      {"estimate lemma suite", estimate_lemma},
      {"continuous integrator", continuous_integrator},
      {"determinism", determinism},
  };
  int failures = 0;
  int id = 0;
  for (const auto& [name, check] : criteria) {
    ++id;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "resilex/certificate.hpp"
#include "resilex/cli.hpp"
#include "resilex/conditions.hpp"
#include "resilex/engine.hpp"
#include "resilex/error.hpp"
#include "resilex/io.hpp"
#include "scheduler_props.hpp"

using namespace resilex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path scenario_dir() {
  if (const char* env = std::getenv("RESILEX_SCENARIOS")) return env;
  return RESILEX_SCENARIO_DIR;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const Rates kRates{0.18, 1.125};
const TruncatedGaussian kAttack(0, 1, 0.1, 0.1);
const TruncatedGaussian kDetect(0, 1, 0.1, 1);

double residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  return (A.transpose() * P + P * A + I).cwiseAbs().maxCoeff();
}

Outcome certificate_exactness() {
  const auto plant = third_order_model({});
  const CertificateConstants c = build_certificate(*plant, ConstantsMode::PaperConstants, 50.0, 10.0, 10.0);
  const double e1 = std::abs(c.lambda - 0.18), e2 = std::abs(c.lambda_a - 1.125);
  return {e1 <= 1e-12 && e2 <= 1e-12, fmt("lambda=%.15g lambda_a=%.15g", c.lambda, c.lambda_a)};
}

Outcome lyapunov_residual() {
  Eigen::MatrixXd Ac(3, 3);
  Ac << 0, 1, 0, 0, -1, 1, -27, -19, -8;
  double worst = residual(Ac, solve_lyapunov(Ac));
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd A = oracle::random_hurwitz(3, rng);
    worst = std::max(worst, residual(A, solve_lyapunov(A)));
  }
  return {worst <= 1e-10, fmt("max residual %.3g over 101 matrices", worst)};
}

Outcome expectation_oracles() {
  constexpr std::uint64_t N = 10'000'000;
  const double c = kRates.lambda + kRates.lambda_a;
  struct Row {
    const char* name;
    double quad;
    oracle::Estimate mc;
    double reported;
    bool same_side;  // the reported value is unambiguous about which side of 1 it is on
  };
  const double t1 = check_reboot(kRates, kAttack, 1.0, 1.0, 0.01).value;
  const double t2 = check_anomaly(kRates, kAttack, kDetect, 1.0, 1.0, 0.01).value;
  const double t3_4 = check_switching(kRates, kAttack, 4, 1.0, 0.01).value;
  const double t3_11 = check_switching(kRates, kAttack, 11, 1.0, 0.01).value;
  const Row rows[] = {
      {"T1", t1, oracle::mc_clipped_exp(0, 1, 0.1, 0.1, 0.99, c, kRates.lambda_a * 2.0, N, 101), 5.5, true},
      {"T2", t2, oracle::mc_joint({0, 1, 0.1, 0.1}, {0, 1, 0.1, 1}, 1.0, 0.01, 1.0, 0.18, 1.125, N, 102), 4.3,
       true},
      {"T3 n=4", t3_4,
       oracle::mc_clipped_exp(0, 1, 0.1, 0.1, 1.0 / 3.0 - 0.01, c, kRates.lambda_a / 3.0, N, 103), 1.03, true},
      {"T3 n=11", t3_11, oracle::mc_clipped_exp(0, 1, 0.1, 0.1, 0.1 - 0.01, c, kRates.lambda_a * 0.1, N, 104),
       1.0, false},
  };
  bool ok = true;
  std::ostringstream os;
  for (const Row& r : rows) {
    const double rel = std::abs(r.quad - r.mc.mean) / r.mc.mean;
    const bool agree = rel <= 5e-3;
    const bool qualitative = r.same_side ? ((r.quad > 1.0) == (r.reported > 1.0))
                                         : (r.quad <= 2.0 * r.reported && r.quad >= 0.5 * r.reported);
    ok = ok && agree && qualitative;
    os << fmt("%s quad=%.10g mc=%.10g rel=%.2e reported~%g%s; ", r.name, r.quad, r.mc.mean, rel, r.reported,
              qualitative ? "" : " (qualitative mismatch)");
  }
  return {ok, os.str()};
}

Outcome closed_forms() {
  bool ok = true;
  std::ostringstream os;
  double worst = 0.0;
  const double h = 1e-8;
  struct Set {
    double mu_a, mu_d, t_r, t_c;
  };
  for (const Set& s : {Set{0.5, 0.01, 1.0, 0.01}, Set{0.2, 0.05, 1.0, 0.01}, Set{0.8, 0.1, 0.5, 0.02},
                       Set{0.3, 0.0 + 2 * h, 2.0, 0.0}, Set{0.6, 0.3, 0.35, 0.05}}) {
    const TruncatedGaussian da(s.mu_a - h, s.mu_a + h, s.mu_a, 1);
    const TruncatedGaussian dd(s.mu_d - h, s.mu_d + h, s.mu_d, 1);
    const double v = check_anomaly(kRates, da, dd, 5.0, s.t_r, s.t_c).value;
    const double closed = std::exp(-kRates.lambda * s.mu_a + kRates.lambda_a * (s.mu_d + s.t_r + s.t_c));
    worst = std::max(worst, std::abs(v - closed) / closed);
  }
  ok = ok && worst <= 1e-6;
  os << fmt("constant-time rel err %.2e; ", worst);

  const double t_r = 1.0, t_c = 0.01;
  const double flip = t_c + kRates.lambda_a / kRates.lambda * (t_c + t_r);
  auto never = [](double T0) { return TruncatedGaussian(T0, T0 + 1, T0 + 0.5, 1); };
  const bool below = check_reboot(kRates, never(flip - 1e-6), flip - 1e-6, t_r, t_c).satisfied;
  const bool above = check_reboot(kRates, never(flip + 1e-6), flip + 1e-6, t_r, t_c).satisfied;
  ok = ok && !below && above;
  os << fmt("no-attack flip at T0=%.10g: below %s, above %s; ", flip, below ? "satisfied" : "violated",
            above ? "satisfied" : "violated");

  const HealthyBound hb = min_healthy_controllers({0.5, 0.5}, never(1.0), 10, 9.0, 0.0);
  ok = ok && hb.min_healthy_simple == 6;
  os << fmt("equal-rate simple bound %.6g -> %d", hb.simple_bound, hb.min_healthy_simple);
  return {ok, os.str()};
}

Outcome undefended_divergence() {
  Scenario s = load_scenario(scenario_dir() / "third_order_nodefense.json");
  s.runs = 10;
  s.timing.horizon = 10.0;
  const EnsembleResult e = ensemble(s);
  const auto& V = e.mean.V;
  const std::size_t k5 = static_cast<std::size_t>(std::llround(5.0 / s.timing.dt));
  const double ratio = V[k5] / V[0];
  const double slope = log_growth_slope(e.mean.t, V, 0.0, s.timing.horizon);
  const bool ok = ratio >= 10.0 && slope <= kRates.lambda_a + 0.05;
  return {ok, fmt("V(5)/V(0)=%.4g, log-growth slope %.4g (limit %.4g)", ratio, slope, kRates.lambda_a + 0.05)};
}

Outcome defended_boundedness() {
  Scenario s = load_scenario(scenario_dir() / "third_order_detector_n11.json");
  s.runs = 10;
  s.timing.horizon = 20.0;
  const EnsembleResult e = ensemble(s);
  const double slope = log_growth_slope(e.mean.t, e.mean.V, 5.0, 20.0);
  double before = 0.0, window = 0.0;
  for (std::size_t k = 0; k < e.mean.t.size(); ++k) {
    if (e.mean.t[k] <= 5.0) before = std::max(before, e.mean.V[k]);
    if (e.mean.t[k] >= 5.0) window = std::max(window, e.mean.V[k]);
  }
  const bool ok = slope <= 0.01 && window <= before && e.diverged_runs == 0;
  return {ok, fmt("slope %.4g over [5, 20], max V %.4g in window vs %.4g before", slope, window, before)};
}

double smib_final_deviation(Scenario s) {
  const EnsembleResult e = ensemble(s);
  const State eq = make_plant(s.plant)->equilibrium();
  double sum = 0.0;
  int used = 0;
  for (const Trajectory& tr : e.runs) {
    if (tr.diverged) continue;
    const State& x = tr.x.back();
    sum += std::hypot(x(0) - eq(0), x(1) - eq(1));
    ++used;
  }
  return used ? sum / used : std::numeric_limits<double>::infinity();
}

Outcome smib_stabilization() {
  Scenario s = load_scenario(scenario_dir() / "smib_n6.json");
  s.defense = DefenseMode::switching(6);
  s.detector = {};
  s.runs = 10;
  s.timing.horizon = 10.0;
  const double dev = smib_final_deviation(s);
  // Uncounted diagnostic: the same bank with instantaneous authentication.
  Scenario free_auth = s;
  free_auth.timing.t_c = 0.0;
  const double dev0 = smib_final_deviation(free_auth);
  return {dev <= 0.05, fmt("mean |[delta - delta0, omega]| at 10 s = %.4g (limit 0.05); "
                           "info: with t_c = 0 it is %.4g",
                           dev, dev0)};
}

Outcome envelope_dominance() {
  Scenario s;
  s.plant = LinearThirdOrder{};
  s.defense = DefenseMode::reboot(1.0);
  s.timing = {1.0, 0.01, 1e-3, 2.0};
  s.attack.enabled = true;
  s.attack.dist = kAttack;
  s.certificate.mode = ConstantsMode::DerivedConstants;
  s.runs = 1;
  const auto cert = scenario_certificate(s);
  const Eigen::MatrixXd& P = cert->P;
  const auto plant = make_plant(s.plant);
  const auto* lin = &std::get<LinearThirdOrder>(s.plant);
  Eigen::RowVector3d K(lin->K[0], lin->K[1], lin->K[2]);
  // Inside this level set the nominal law stays below u_max / sqrt(2).
  const double v_cap = 0.5 * plant->u_max() * plant->u_max() / (K * P.inverse() * K.transpose())(0, 0);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> level(0.01, 1.0);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
    const Eigen::Vector3d x0 = dir * std::sqrt(level(rng) * v_cap / dir.dot(P * dir));
    LinearThirdOrder p = *lin;
    p.x0 = {x0(0), x0(1), x0(2)};
    s.plant = p;
    const EnvelopeTrace tr = cmd_envelope(s, 1000 + i);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      if (tr.V[k] > tr.V_bar[k] * (1.0 + 1e-6) + 1e-9) ++violations;
      worst_ratio = std::max(worst_ratio, tr.V[k] / tr.V_bar[k]);
    }
  }
  return {violations == 0, fmt("%d violations, max V/V_bar %.4g", violations, worst_ratio)};
}

Outcome scheduler_invariants() {
  std::mt19937_64 rng(2718);
  int violations = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    const auto bad = props::check_scheduler(props::random_scenario(rng), 5000 + i);
    if (!bad.empty() && first.empty()) first = bad.front();
    violations += static_cast<int>(bad.size());
  }
  return {violations == 0, fmt("%d violations over 1000 scenarios%s%s", violations, first.empty() ? "" : "; ",
                               first.c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  Scenario s = load_scenario(scenario_dir() / "third_order_detector_n4.json");
  s.runs = 3;
  const fs::path root = fs::temp_directory_path() / "resilex_acceptance_determinism";
  fs::remove_all(root);
  cmd_simulate(s, root / "a");
  cmd_simulate(s, root / "b");
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    if (slurp(entry.path()) != slurp(root / "b" / entry.path().filename())) ++differ;
  }
  fs::remove_all(root);
  return {files > 0 && differ == 0, fmt("%d files compared, %d differ", files, differ)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"certificate exactness", certificate_exactness},
      {"Lyapunov residual", lyapunov_residual},
      {"expectation oracle equivalence", expectation_oracles},
      {"closed-form cross-checks", closed_forms},
      {"undefended divergence", undefended_divergence},
      {"defended boundedness", defended_boundedness},
      {"SMIB stabilization", smib_stabilization},
      {"envelope dominance", envelope_dominance},
      {"scheduler invariants", scheduler_invariants},
      {"determinism", determinism},
  };
  int failures = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", index, name, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}

#include "resilex/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "resilex/error.hpp"
#include "resilex/io.hpp"

namespace resilex {

using nlohmann::json;

Scenario apply_overrides(Scenario scenario, const Overrides& o, std::vector<std::string>* warnings) {
  if (o.seed) scenario.base_seed = *o.seed;
  if (o.runs) scenario.runs = *o.runs;
  if (o.out) scenario.output_dir = *o.out;
  if (o.dt) scenario.timing.dt = *o.dt;
  const ResolvedTiming timing = validate_scenario(scenario);
  if (warnings) *warnings = timing.warnings;
  return scenario;
}

namespace {

// Stand-in for "no attack": the whole support sits above the clip, so the
// effective attack time is exactly T0 - t_c.
TruncatedGaussian never_lands(double T0) { return TruncatedGaussian(T0, T0 + 1.0, T0 + 0.5, 1.0); }

double switching_period(const Scenario& s) { return s.timing.t_r / (s.defense.n - 1); }

char name_buf[32];
const char* run_name(const char* prefix, std::size_t i, const char* ext) {
  std::snprintf(name_buf, sizeof name_buf, "%s_%03zu.%s", prefix, i, ext);
  return name_buf;
}

}  // namespace

json cmd_check(const Scenario& s, std::uint64_t mc_samples) {
  json report;
  report["defense"] = std::string(to_string(s.defense.kind));
  report["verdicts"] = json::array();

  const auto cert = scenario_certificate(s);
  if (!cert) {
    report["certificate"] = nullptr;
    report["note"] = "no certificate for this plant; conditions need the rates lambda and lambda_a";
    report["remarks"] = {{"max_controllers_exclusive",
                          max_controllers_exclusive(s.timing.t_r, s.timing.t_c)}};
    return report;
  }
  report["certificate"] = certificate_to_json(*cert);
  const Rates rates = cert->rates();
  const double t_r = s.timing.t_r;
  const double t_c = s.timing.t_c;
  const MonteCarloOptions mc{mc_samples, s.base_seed};

  const double T0 = s.defense.is_switching() ? switching_period(s) : s.defense.T0;
  const TruncatedGaussian dist_a =
      s.attack.enabled && s.attack.dist ? *s.attack.dist : never_lands(T0);

  switch (s.defense.kind) {
    case DefenseKind::NoDefense:
      break;
    case DefenseKind::RebootOnly:
      report["verdicts"].push_back(verdict_to_json(check_reboot(rates, dist_a, T0, t_r, t_c, mc)));
      break;
    case DefenseKind::RebootWithDetector:
      report["verdicts"].push_back(verdict_to_json(check_reboot(rates, dist_a, T0, t_r, t_c, mc)));
      if (s.detector.dist) {
        report["verdicts"].push_back(verdict_to_json(
            check_anomaly(rates, dist_a, *s.detector.dist, T0, t_r, t_c, mc)));
      }
      break;
    case DefenseKind::Switching:
    case DefenseKind::SwitchingWithDetector: {
      report["verdicts"].push_back(
          verdict_to_json(check_switching(rates, dist_a, s.defense.n, t_r, t_c, mc)));
      json healthy;
      try {
        const HealthyBound hb = min_healthy_controllers(rates, dist_a, s.defense.n, t_r, t_c);
        healthy = {{"theorem", std::string(to_string(Theorem::T4_MinHealthy))},
                   {"bound", hb.bound},
                   {"min_healthy", hb.min_healthy},
                   {"simple_bound", hb.simple_bound},
                   {"min_healthy_simple", hb.min_healthy_simple},
                   {"expectation", hb.expectation},
                   {"satisfied", hb.min_healthy <= s.defense.n}};
      } catch (const Error& e) {
        if (e.code() != Errc::DenominatorNonpositive) throw;
        healthy = {{"theorem", std::string(to_string(Theorem::T4_MinHealthy))},
                   {"satisfied", false},
                   {"error", e.what()}};
      }
      report["min_healthy"] = healthy;
      break;
    }
  }

  json remarks = {{"reboot_min_period", reboot_min_period(rates, t_r, t_c)},
                  {"max_controllers_exclusive", max_controllers_exclusive(t_r, t_c)},
                  {"persistent_compromise_limit",
                   persistent_compromise_limit(rates, s.defense.controllers())}};
  if (s.attack.enabled && s.attack.dist) {
    remarks["max_constant_detection_time"] =
        max_constant_detection_time(rates, s.attack.dist->mean(), t_r, t_c);
  }
  report["remarks"] = remarks;
  return report;
}

json cmd_simulate(const Scenario& s, const std::filesystem::path& dir) {
  const EnsembleResult result = ensemble(s);
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    write_trajectory_csv(result.runs[i], dir / run_name("run", i, "csv"));
    write_events_jsonl(result.runs[i].events, dir / run_name("events", i, "jsonl"));
  }
  write_mean_csv(result.mean, result.runs.front(), dir / "mean.csv");

  json runs = json::array();
  for (const Trajectory& tr : result.runs) {
    runs.push_back({{"seed", tr.seed},
                    {"diverged", tr.diverged},
                    {"degenerate_steps", tr.degenerate_steps},
                    {"final_V", tr.V.back()}});
  }
  json summary = {{"defense", std::string(to_string(s.defense.kind))},
                  {"runs", runs},
                  {"diverged_runs", result.diverged_runs},
                  {"tail",
                   {{"window_start", result.tail.window_start},
                    {"max_mean_V", result.tail.max_mean_V},
                    {"max_mean_V_before", result.tail.max_mean_V_before},
                    {"mean_mean_V", result.tail.mean_mean_V},
                    {"log_growth_slope", result.tail.log_growth_slope}}},
                  {"bounded", result.tail.bounded},
                  {"scenario", scenario_to_json(s)}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

std::vector<SweepRow> cmd_sweep(const Scenario& s, const std::vector<int>& n_list) {
  if (!s.defense.is_switching()) {
    throw Error(Errc::InvalidArgument, "sweep needs a switching defense scenario");
  }
  const auto cert = scenario_certificate(s);
  if (!cert) throw Error(Errc::UnsupportedPlant, "sweep needs a certified plant");

  std::vector<SweepRow> rows;
  for (int n : n_list) {
    Scenario variant = s;
    variant.defense.n = n;
    validate_scenario(variant);
    const double T0 = switching_period(variant);
    const TruncatedGaussian dist_a =
        s.attack.enabled && s.attack.dist ? *s.attack.dist : never_lands(T0);
    const ConditionVerdict v =
        check_switching(cert->rates(), dist_a, n, s.timing.t_r, s.timing.t_c);
    const EnsembleResult result = ensemble(variant);
    rows.push_back({n, T0, v.value, v.satisfied, result.tail.mean_mean_V});
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::string out = "n,T0,value,satisfied,tail_mean_V\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.n) + "," + format_double(r.T0) + "," + format_double(r.value) + "," +
           (r.satisfied ? "true" : "false") + "," + format_double(r.tail_mean_V) + "\n";
  }
  write_text(path, out);
}

EnvelopeTrace cmd_envelope(const Scenario& s, std::uint64_t seed) {
  const auto cert = scenario_certificate(s);
  if (!cert) throw Error(Errc::UnsupportedPlant, "the envelope needs a certified plant");
  const Trajectory tr = run(s, seed);
  const Envelope env = propagate_envelope(envelope_segments(tr, *cert, s.timing.dt), tr.V.front());
  return {tr.t, tr.V, env.sample(tr.t)};
}

void write_envelope_csv(const EnvelopeTrace& trace, const std::filesystem::path& path) {
  std::string out = "t,V,V_bar\n";
  out.reserve(trace.t.size() * 64);
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    out += format_double(trace.t[k]) + "," + format_double(trace.V[k]) + "," +
           format_double(trace.V_bar[k]) + "\n";
  }
  write_text(path, out);
}

namespace {

void print_check(const json& report) {
  for (const json& v : report["verdicts"]) {
    std::cout << v["theorem"].get<std::string>() << "  value=" << format_double(v["value"])
              << "  " << (v["satisfied"].get<bool>() ? "satisfied" : "NOT satisfied");
    if (v.contains("monte_carlo")) {
      std::cout << "  mc=" << format_double(v["monte_carlo"]["value"]);
    }
    std::cout << "\n";
  }
  if (report.contains("min_healthy")) {
    const json& h = report["min_healthy"];
    if (h.contains("min_healthy")) {
      std::cout << "T4_MinHealthy  bound=" << format_double(h["bound"])
                << "  min_healthy=" << h["min_healthy"].get<int>() << "\n";
    } else {
      std::cout << "T4_MinHealthy  " << h["error"].get<std::string>() << "\n";
    }
  }
  if (report.contains("note")) std::cout << report["note"].get<std::string>() << "\n";
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Resilient control under re-initialisation and controller switching"};
  app.require_subcommand(1);

  std::string config;
  Overrides overrides;
  std::uint64_t mc_samples = 0;
  std::vector<int> n_list{2, 4, 6, 8, 11};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Scenario JSON file")->required();
    sub->add_option("--seed", overrides.seed, "Base seed");
    sub->add_option("--runs", overrides.runs, "Ensemble size")->check(CLI::PositiveNumber);
    sub->add_option("--out", overrides.out, "Output directory");
    sub->add_option("--dt", overrides.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
  };
  CLI::App* check = app.add_subcommand("check", "Evaluate the boundedness conditions");
  add_common(check);
  check->add_option("--mc-samples", mc_samples, "Monte Carlo cross-check samples (0 = off)");
  CLI::App* simulate = app.add_subcommand("simulate", "Run the ensemble and write trajectories");
  add_common(simulate);
  CLI::App* sweep = app.add_subcommand("sweep", "Condition value and tail V across bank sizes");
  add_common(sweep);
  sweep->add_option("--n", n_list, "Bank sizes")->delimiter(',');
  CLI::App* envelope = app.add_subcommand("envelope", "Certificate envelope against one run");
  add_common(envelope);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::string> warnings;
    Scenario scenario = apply_overrides(load_scenario(config, &warnings), overrides, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    const std::filesystem::path out = scenario.output_dir;

    if (check->parsed()) {
      const json report = cmd_check(scenario, mc_samples);
      print_check(report);
      write_text(out / "verdicts.json", report.dump(2) + "\n");
    } else if (simulate->parsed()) {
      const json summary = cmd_simulate(scenario, out);
      std::cout << "runs=" << scenario.runs << "  diverged=" << summary["diverged_runs"].get<int>()
                << "  tail_mean_V=" << format_double(summary["tail"]["mean_mean_V"])
                << "  slope=" << format_double(summary["tail"]["log_growth_slope"])
                << "  bounded=" << (summary["bounded"].get<bool>() ? "true" : "false") << "\n";
    } else if (sweep->parsed()) {
      const auto rows = cmd_sweep(scenario, n_list);
      write_sweep_csv(rows, out / "sweep.csv");
      for (const SweepRow& r : rows) {
        std::cout << "n=" << r.n << "  T0=" << format_double(r.T0)
                  << "  value=" << format_double(r.value)
                  << (r.satisfied ? "  satisfied" : "  NOT satisfied")
                  << "  tail_mean_V=" << format_double(r.tail_mean_V) << "\n";
      }
    } else if (envelope->parsed()) {
      const EnvelopeTrace trace = cmd_envelope(scenario, scenario.base_seed);
      write_envelope_csv(trace, out / "envelope.csv");
      std::cout << "wrote " << (out / "envelope.csv").string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace resilex

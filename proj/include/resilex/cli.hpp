#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resilex/engine.hpp"

namespace resilex {

/// Command-line overrides applied on top of a loaded scenario.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> out;
  std::optional<double> dt;
};

/// Applies overrides and re-validates the result.
Scenario apply_overrides(Scenario scenario, const Overrides& overrides,
                         std::vector<std::string>* warnings = nullptr);

/// Every applicable verdict plus the closed-form remarks, as a JSON report.
/// A disabled attacker is evaluated as one that never lands before T0 - t_c.
nlohmann::json cmd_check(const Scenario& scenario, std::uint64_t mc_samples = 0);

/// Writes run_NNN.csv, events_NNN.jsonl, mean.csv and summary.json into dir.
nlohmann::json cmd_simulate(const Scenario& scenario, const std::filesystem::path& dir);

struct SweepRow {
  int n = 0;
  double T0 = 0.0;
  double value = 0.0;
  bool satisfied = false;
  double tail_mean_V = 0.0;
};

/// Switching condition and simulated tail mean of V for each bank size.
/// The scenario must use a switching defense.
std::vector<SweepRow> cmd_sweep(const Scenario& scenario, const std::vector<int>& n_list);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

struct EnvelopeTrace {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> V_bar;
};

/// Simulates one run and replays its phases through the certificate envelope.
EnvelopeTrace cmd_envelope(const Scenario& scenario, std::uint64_t seed);
void write_envelope_csv(const EnvelopeTrace& trace, const std::filesystem::path& path);

/// Entry point of the resilex executable; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace resilex

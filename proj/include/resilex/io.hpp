#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "resilex/conditions.hpp"
#include "resilex/engine.hpp"

namespace resilex {

/// Parses and validates a scenario document. Unknown keys are rejected with a
/// field-level Error(SchemaError); infeasible timing raises
/// Error(InfeasibleTiming). Grid-rounding notes are appended to warnings.
Scenario parse_scenario(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);
Scenario load_scenario(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

nlohmann::json scenario_to_json(const Scenario& scenario);
void write_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Shortest round-trippable decimal form is not required; 17 significant digits are.
std::string format_double(double value);

std::string trajectory_csv_header(int state_dim);
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);
/// Mean trajectory; the discrete columns are copied from the reference run.
void write_mean_csv(const MeanTrajectory& mean, const Trajectory& reference,
                    const std::filesystem::path& path);
void write_events_jsonl(const std::vector<Event>& events, const std::filesystem::path& path);

nlohmann::json verdict_to_json(const ConditionVerdict& verdict);
nlohmann::json certificate_to_json(const CertificateConstants& cert);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace resilex

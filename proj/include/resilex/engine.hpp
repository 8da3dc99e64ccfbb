#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "resilex/certificate.hpp"
#include "resilex/conditions.hpp"
#include "resilex/models.hpp"
#include "resilex/runtime.hpp"

namespace resilex {

using PlantSpec = std::variant<LinearThirdOrder, SmibParams>;

struct TimingConfig {
  double t_r = 1.0;
  double t_c = 0.01;
  double dt = 1e-3;
  double horizon = 10.0;

  bool operator==(const TimingConfig&) const = default;
};

struct CertificateChoice {
  ConstantsMode mode = ConstantsMode::PaperConstants;
  std::optional<double> eps;  // default: ten times the admissibility threshold
  double eps_a = 10.0;
  double eps_b = 10.0;

  bool operator==(const CertificateChoice&) const = default;
};

struct Scenario {
  PlantSpec plant = LinearThirdOrder{};
  DefenseMode defense;
  TimingConfig timing;
  AttackConfig attack;
  DetectorConfig detector;
  CertificateChoice certificate;
  int runs = 10;
  std::uint64_t base_seed = 1;
  std::string output_dir = "out";

  bool operator==(const Scenario&) const = default;
};

std::shared_ptr<const PlantModel> make_plant(const PlantSpec& spec);

/// Certificate for the scenario's plant, or nullopt for plants without one.
std::optional<CertificateConstants> scenario_certificate(const Scenario& scenario);

/// Scenario timing snapped to the integration grid.
struct ResolvedTiming {
  GridTiming grid;
  std::int64_t steps = 0;  // horizon / dt
  std::vector<std::string> warnings;
};

/// Rounds t_c, t_r and T0 to whole steps. Switching modes derive T0 from
/// t_r / (n - 1), rounded up so the incoming controller is always ready.
/// Throws Error(InfeasibleTiming) or Error(SchemaError) on invalid timing.
ResolvedTiming resolve_timing(const Scenario& scenario);

/// resolve_timing plus the non-timing checks (attack distribution present when
/// enabled, persistent slots inside the bank, runs >= 1).
ResolvedTiming validate_scenario(const Scenario& scenario);

/// Classical RK4 with u and w held over the step. Throws Error(NonFiniteState).
State rk4_step(const PlantModel& model, const State& x, double u, double w, double t, double dt);

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<double> t;
  std::vector<State> x;
  std::vector<double> u;  // applied input over [t_k, t_k + dt)
  std::vector<double> V;
  std::vector<int> active_id;
  std::vector<Gate> gate;
  std::vector<SlotStatus> status;
  std::vector<Event> events;
  bool diverged = false;
  std::int64_t degenerate_steps = 0;  // SMIB steps where the law was undefined
};

/// Monitoring value: x' P x for certified plants, |x - x*|^2 otherwise.
class LyapunovMonitor {
 public:
  explicit LyapunovMonitor(const PlantModel& plant);
  double operator()(const State& x) const;
  const std::optional<Eigen::MatrixXd>& P() const { return P_; }

 private:
  std::optional<Eigen::MatrixXd> P_;
  State reference_;
};

/// One simulation run. Deterministic in (scenario, seed).
Trajectory run(const Scenario& scenario, std::uint64_t seed);

struct TailStats {
  double window_start = 0.0;
  double max_mean_V = 0.0;
  double max_mean_V_before = 0.0;  // peak before the window
  double mean_mean_V = 0.0;
  double log_growth_slope = 0.0;
  bool bounded = true;
};

struct MeanTrajectory {
  std::vector<double> t;
  std::vector<State> x;
  std::vector<double> u;
  std::vector<double> V;
};

struct EnsembleResult {
  MeanTrajectory mean;
  std::vector<std::uint64_t> seeds;
  std::vector<Trajectory> runs;
  int diverged_runs = 0;
  TailStats tail;
};

/// Envelope segments replaying the designated controller's phases along a
/// simulated run: each maximal run of equal status becomes one segment.
std::vector<EnvelopeSegment> envelope_segments(const Trajectory& trajectory,
                                               const CertificateConstants& cert, double dt);

/// Least-squares slope of log(v + 1e-6) against t over [t0, t1].
double log_growth_slope(const std::vector<double>& t, const std::vector<double>& v, double t0,
                        double t1);

/// Runs seeds base_seed + i for i < runs (in parallel, capped by
/// RESILEX_THREADS) and averages pointwise over the runs that did not diverge.
/// Throws Error(AllRunsDiverged) when none completed.
EnsembleResult ensemble(const Scenario& scenario);

}  // namespace resilex

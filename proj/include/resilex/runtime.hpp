#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resilex/stochastics.hpp"

namespace resilex {

enum class DefenseKind { NoDefense, RebootOnly, RebootWithDetector, Switching, SwitchingWithDetector };

std::string_view to_string(DefenseKind kind);

struct DefenseMode {
  DefenseKind kind = DefenseKind::NoDefense;
  double T0 = 0.0;  // working period, single-controller modes only
  int n = 1;        // bank size, switching modes only

  static DefenseMode none() { return {}; }
  static DefenseMode reboot(double T0) { return {DefenseKind::RebootOnly, T0, 1}; }
  static DefenseMode reboot_with_detector(double T0) {
    return {DefenseKind::RebootWithDetector, T0, 1};
  }
  static DefenseMode switching(int n) { return {DefenseKind::Switching, 0.0, n}; }
  static DefenseMode switching_with_detector(int n) {
    return {DefenseKind::SwitchingWithDetector, 0.0, n};
  }

  bool is_switching() const {
    return kind == DefenseKind::Switching || kind == DefenseKind::SwitchingWithDetector;
  }
  bool uses_detector() const {
    return kind == DefenseKind::RebootWithDetector || kind == DefenseKind::SwitchingWithDetector;
  }
  int controllers() const { return is_switching() ? n : 1; }

  bool operator==(const DefenseMode&) const = default;
};

enum class SlotStatus { Authenticating, Active, Compromised, Silenced, Reinitializing, Ready };

std::string_view to_string(SlotStatus status);

struct ControllerSlot {
  int id = 1;
  SlotStatus status = SlotStatus::Ready;
  double phase_started_at = 0.0;
  std::optional<double> pending_attack_at;
  bool persistent_compromised = false;
};

enum class AttackMode { PerCycle, Persistent };

struct AttackConfig {
  bool enabled = false;
  std::optional<TruncatedGaussian> dist;
  AttackMode mode = AttackMode::PerCycle;
  /// Slot ids whose compromise is instantaneous and survives re-initialisation.
  std::vector<int> persistent_slots;

  bool is_persistent(int slot_id) const;
  bool operator==(const AttackConfig&) const = default;
};

struct DetectorConfig {
  std::optional<TruncatedGaussian> dist;

  bool enabled() const { return dist.has_value(); }
  bool operator==(const DetectorConfig&) const = default;
};

enum class Gate { PassNominal, ForceUmax, ForceZero };

std::string_view to_string(Gate gate);

enum class EventKind { Switch, AuthComplete, AttackEffect, Alarm, ReinitStart, ReinitComplete };

std::string_view to_string(EventKind kind);

struct Event {
  std::int64_t tick = 0;
  double t = 0.0;
  int slot = 0;
  EventKind kind = EventKind::Switch;
  std::string detail;
};

/// Durations in whole grid steps. T0 is the working period of one designation.
struct GridTiming {
  double dt = 1e-3;
  std::int64_t t_c = 0;
  std::int64_t t_r = 0;
  std::int64_t T0 = 0;

  double seconds(std::int64_t ticks) const { return static_cast<double>(ticks) * dt; }
  std::int64_t ticks(double seconds) const;
};

/// Effective attack delay after authentication: min(t_a', T0 - t_c). Persistent
/// slots give 0; a disabled attacker gives T0 - t_c (never effective).
double draw_attack_time(const AttackConfig& attack, const ControllerSlot& slot, double T0,
                        double t_c, Rng& rng);

/// Effective compromise duration: min(t_d', T0 - t_a - t_c), or the clip itself
/// when no detector is configured.
double draw_detection_time(const DetectorConfig& detector, double T0, double t_a, double t_c,
                           Rng& rng);

struct SupervisorDecision {
  int designated = 1;
  Gate gate = Gate::PassNominal;
  SlotStatus status = SlotStatus::Active;
};

/// Discrete-event controller bank driven by the engine clock. step() must be
/// called with consecutive ticks starting at 0.
///
/// Single-controller modes cycle authenticate / run / re-initialise, and the
/// plant sees zero input while the only controller re-initialises. With a
/// detector the alarm starts re-initialisation at once. Switching modes rotate
/// through the bank every T0 = t_r / (n - 1); an alarm only silences the
/// output until the scheduled switch.
class Supervisor {
 public:
  Supervisor(DefenseMode mode, AttackConfig attack, DetectorConfig detector, GridTiming timing,
             std::uint64_t seed);

  SupervisorDecision step(std::int64_t tick);

  const std::vector<ControllerSlot>& bank() const { return bank_; }
  const std::vector<Event>& events() const { return events_; }
  int designated() const { return designated_; }

  /// Tick at which the given slot last started re-initialising, if ever.
  std::optional<std::int64_t> reinit_started(int slot_id) const;

 private:
  ControllerSlot& slot(int id) { return bank_[static_cast<std::size_t>(id - 1)]; }
  void emit(std::int64_t tick, int slot_id, EventKind kind, std::string detail = {});
  void begin_designation(std::int64_t tick, int slot_id);
  void begin_reinit(std::int64_t tick, int slot_id);
  bool advance(std::int64_t tick);
  Gate gate_for(SlotStatus status) const;

  DefenseMode mode_;
  AttackConfig attack_;
  DetectorConfig detector_;
  GridTiming timing_;
  Rng rng_;

  std::vector<ControllerSlot> bank_;
  std::vector<std::optional<std::int64_t>> reinit_start_;
  std::vector<Event> events_;
  int designated_ = 1;
  std::int64_t next_tick_ = 0;

  static constexpr std::int64_t kNever = INT64_MAX;
  std::int64_t auth_end_ = kNever;
  std::int64_t period_end_ = kNever;
  std::int64_t attack_tick_ = kNever;
  std::int64_t alarm_tick_ = kNever;
  std::int64_t attack_offset_ = 0;  // t_a in ticks for the current designation
};

}  // namespace resilex

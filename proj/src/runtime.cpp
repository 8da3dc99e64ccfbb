#include "resilex/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resilex/error.hpp"

namespace resilex {

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::NoDefense: return "none";
    case DefenseKind::RebootOnly: return "reboot";
    case DefenseKind::RebootWithDetector: return "reboot_detector";
    case DefenseKind::Switching: return "switching";
    case DefenseKind::SwitchingWithDetector: return "switching_detector";
  }
  return "unknown";
}

std::string_view to_string(SlotStatus status) {
  switch (status) {
    case SlotStatus::Authenticating: return "Authenticating";
    case SlotStatus::Active: return "Active";
    case SlotStatus::Compromised: return "Compromised";
    case SlotStatus::Silenced: return "Silenced";
    case SlotStatus::Reinitializing: return "Reinitializing";
    case SlotStatus::Ready: return "Ready";
  }
  return "unknown";
}

std::string_view to_string(Gate gate) {
  switch (gate) {
    case Gate::PassNominal: return "PassNominal";
    case Gate::ForceUmax: return "ForceUmax";
    case Gate::ForceZero: return "ForceZero";
  }
  return "unknown";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Switch: return "switch";
    case EventKind::AuthComplete: return "auth_complete";
    case EventKind::AttackEffect: return "attack_effect";
    case EventKind::Alarm: return "alarm";
    case EventKind::ReinitStart: return "reinit_start";
    case EventKind::ReinitComplete: return "reinit_complete";
  }
  return "unknown";
}

bool AttackConfig::is_persistent(int slot_id) const {
  return mode == AttackMode::Persistent &&
         std::find(persistent_slots.begin(), persistent_slots.end(), slot_id) !=
             persistent_slots.end();
}

std::int64_t GridTiming::ticks(double seconds) const {
  const double steps = seconds / dt;
  if (!(steps < 1e15)) return std::numeric_limits<std::int64_t>::max();
  return std::llround(steps);
}

double draw_attack_time(const AttackConfig& attack, const ControllerSlot& slot, double T0,
                        double t_c, Rng& rng) {
  const double clip = T0 - t_c;
  if (!attack.enabled || !attack.dist) return clip;
  if (attack.is_persistent(slot.id)) return 0.0;
  return std::min(attack.dist->sample(rng), clip);
}

double draw_detection_time(const DetectorConfig& detector, double T0, double t_a, double t_c,
                           Rng& rng) {
  const double clip = T0 - t_a - t_c;
  if (!detector.enabled()) return clip;
  return std::min(detector.dist->sample(rng), clip);
}

Supervisor::Supervisor(DefenseMode mode, AttackConfig attack, DetectorConfig detector,
                       GridTiming timing, std::uint64_t seed)
    : mode_(mode),
      attack_(std::move(attack)),
      detector_(std::move(detector)),
      timing_(timing),
      rng_(seed) {
  const int n = mode_.controllers();
  if (n < 1) throw Error(Errc::InvalidArgument, "controller bank must not be empty");
  if (mode_.is_switching() && n < 2) {
    throw Error(Errc::InvalidArgument, "switching modes need at least two controllers");
  }
  if (mode_.kind != DefenseKind::NoDefense && timing_.T0 <= timing_.t_c) {
    throw Error(Errc::InfeasibleTiming, "working period must exceed the authentication time");
  }
  bank_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bank_[static_cast<std::size_t>(i)].id = i + 1;
  reinit_start_.resize(static_cast<std::size_t>(n));
}

std::optional<std::int64_t> Supervisor::reinit_started(int slot_id) const {
  return reinit_start_.at(static_cast<std::size_t>(slot_id - 1));
}

void Supervisor::emit(std::int64_t tick, int slot_id, EventKind kind, std::string detail) {
  events_.push_back({tick, timing_.seconds(tick), slot_id, kind, std::move(detail)});
}

void Supervisor::begin_designation(std::int64_t tick, int slot_id) {
  designated_ = slot_id;
  ControllerSlot& s = slot(slot_id);
  s.status = SlotStatus::Authenticating;
  s.phase_started_at = timing_.seconds(tick);
  s.pending_attack_at.reset();
  auth_end_ = tick + timing_.t_c;
  period_end_ = tick + timing_.T0;
  attack_tick_ = kNever;
  alarm_tick_ = kNever;
  emit(tick, slot_id, EventKind::Switch);
}

void Supervisor::begin_reinit(std::int64_t tick, int slot_id) {
  ControllerSlot& s = slot(slot_id);
  s.status = SlotStatus::Reinitializing;
  s.phase_started_at = timing_.seconds(tick);
  s.pending_attack_at.reset();
  reinit_start_[static_cast<std::size_t>(slot_id - 1)] = tick;
  emit(tick, slot_id, EventKind::ReinitStart);
}

bool Supervisor::advance(std::int64_t tick) {
  for (ControllerSlot& s : bank_) {
    const auto& started = reinit_start_[static_cast<std::size_t>(s.id - 1)];
    if (s.status == SlotStatus::Reinitializing && started && *started + timing_.t_r == tick) {
      s.status = SlotStatus::Ready;
      s.phase_started_at = timing_.seconds(tick);
      emit(tick, s.id, EventKind::ReinitComplete);
      // Single-controller modes resume with the freshly re-initialised controller.
      if (!mode_.is_switching()) begin_designation(tick, s.id);
      return true;
    }
  }

  if (tick == period_end_) {
    const int outgoing = designated_;
    begin_reinit(tick, outgoing);
    auth_end_ = attack_tick_ = alarm_tick_ = period_end_ = kNever;
    if (mode_.is_switching()) {
      const int incoming = (outgoing % mode_.n) + 1;
      if (slot(incoming).status != SlotStatus::Ready) {
        throw Error(Errc::ScheduleInfeasible,
                    "slot " + std::to_string(incoming) + " is not ready at tick " +
                        std::to_string(tick));
      }
      begin_designation(tick, incoming);
    }
    return true;
  }

  if (tick == auth_end_) {
    ControllerSlot& s = slot(designated_);
    s.status = SlotStatus::Active;
    s.phase_started_at = timing_.seconds(tick);
    auth_end_ = kNever;
    emit(tick, designated_, EventKind::AuthComplete);

    const double t_a = draw_attack_time(attack_, s, timing_.seconds(timing_.T0),
                                        timing_.seconds(timing_.t_c), rng_);
    attack_offset_ = timing_.ticks(t_a);
    const std::int64_t onset = tick + attack_offset_;
    if (onset < period_end_) {
      attack_tick_ = onset;
      s.pending_attack_at = timing_.seconds(onset);
    }
    return true;
  }

  if (tick == attack_tick_) {
    ControllerSlot& s = slot(designated_);
    s.status = SlotStatus::Compromised;
    s.phase_started_at = timing_.seconds(tick);
    s.pending_attack_at.reset();
    if (attack_.is_persistent(s.id)) s.persistent_compromised = true;
    attack_tick_ = kNever;
    emit(tick, designated_, EventKind::AttackEffect);

    if (mode_.uses_detector() && mode_.kind != DefenseKind::NoDefense) {
      const double t_d = draw_detection_time(detector_, timing_.seconds(timing_.T0),
                                             timing_.seconds(attack_offset_),
                                             timing_.seconds(timing_.t_c), rng_);
      const std::int64_t alarm = tick + timing_.ticks(t_d);
      if (alarm < period_end_) alarm_tick_ = alarm;
    }
    return true;
  }

  if (tick == alarm_tick_) {
    ControllerSlot& s = slot(designated_);
    s.status = SlotStatus::Silenced;
    s.phase_started_at = timing_.seconds(tick);
    alarm_tick_ = kNever;
    emit(tick, designated_, EventKind::Alarm);
    // Without a backup the alarmed controller is re-initialised immediately.
    if (mode_.kind == DefenseKind::RebootWithDetector) period_end_ = tick;
    return true;
  }

  return false;
}

Gate Supervisor::gate_for(SlotStatus status) const {
  switch (status) {
    case SlotStatus::Active: return Gate::PassNominal;
    case SlotStatus::Compromised: return Gate::ForceUmax;
    case SlotStatus::Authenticating:
    case SlotStatus::Silenced:
    case SlotStatus::Reinitializing:
    case SlotStatus::Ready:
      break;
  }
  return Gate::ForceZero;
}

SupervisorDecision Supervisor::step(std::int64_t tick) {
  if (tick != next_tick_) {
    throw Error(Errc::InvalidArgument, "supervisor ticks must be consecutive from 0");
  }
  ++next_tick_;

  if (tick == 0) {
    if (mode_.kind == DefenseKind::NoDefense) {
      ControllerSlot& s = slot(1);
      s.status = SlotStatus::Active;
      const double t_a = draw_attack_time(attack_, s, std::numeric_limits<double>::infinity(),
                                          0.0, rng_);
      attack_tick_ = timing_.ticks(t_a);
      if (attack_tick_ != kNever) s.pending_attack_at = timing_.seconds(attack_tick_);
      emit(0, 1, EventKind::Switch);
    } else {
      begin_designation(0, 1);
    }
  }

  // Zero-length phases collapse onto one tick; every pass consumes a transition.
  for (int guard = 0; advance(tick); ++guard) {
    if (guard > 16 * static_cast<int>(bank_.size()) + 64) {
      throw Error(Errc::ScheduleInfeasible, "supervisor failed to settle at one tick");
    }
  }

  const SlotStatus status = bank_[static_cast<std::size_t>(designated_ - 1)].status;
  return {designated_, gate_for(status), status};
}

}  // namespace resilex

#include "resilex/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "resilex/error.hpp"

namespace resilex {

std::shared_ptr<const PlantModel> make_plant(const PlantSpec& spec) {
  return std::visit(
      [](const auto& params) -> std::shared_ptr<const PlantModel> {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, LinearThirdOrder>) {
          return third_order_model(params);
        } else {
          return smib_model(params);
        }
      },
      spec);
}

std::optional<CertificateConstants> scenario_certificate(const Scenario& scenario) {
  const auto plant = make_plant(scenario.plant);
  if (!plant->linear_structure()) return std::nullopt;
  const auto& c = scenario.certificate;
  return build_certificate(*plant, c.mode, c.eps, c.eps_a, c.eps_b);
}

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::int64_t snap(double seconds, double dt, const char* name, std::vector<std::string>& warnings) {
  const std::int64_t ticks = std::llround(seconds / dt);
  const double snapped = static_cast<double>(ticks) * dt;
  if (std::abs(snapped - seconds) > 1e-9 * dt) {
    warnings.push_back(std::string(name) + " rounded from " + describe(seconds) + " s to " +
                       describe(snapped) + " s on the integration grid");
  }
  return ticks;
}

}  // namespace

ResolvedTiming resolve_timing(const Scenario& scenario) {
  const auto& tm = scenario.timing;
  if (!(tm.dt > 0.0) || !std::isfinite(tm.dt)) throw Error(Errc::SchemaError, "timing.dt must be > 0");
  if (!(tm.horizon > 0.0) || !std::isfinite(tm.horizon)) {
    throw Error(Errc::SchemaError, "timing.horizon must be > 0");
  }
  if (!(tm.t_c >= 0.0) || !(tm.t_r >= 0.0)) {
    throw Error(Errc::SchemaError, "timing.t_c and timing.t_r must be >= 0");
  }

  ResolvedTiming out;
  out.grid.dt = tm.dt;
  out.steps = std::llround(tm.horizon / tm.dt);
  if (std::abs(static_cast<double>(out.steps) * tm.dt - tm.horizon) >
      1e-9 * std::max(1.0, tm.horizon)) {
    throw Error(Errc::SchemaError, "timing.horizon must be a multiple of timing.dt");
  }
  out.grid.t_c = snap(tm.t_c, tm.dt, "t_c", out.warnings);
  out.grid.t_r = snap(tm.t_r, tm.dt, "t_r", out.warnings);

  const auto& mode = scenario.defense;
  switch (mode.kind) {
    case DefenseKind::NoDefense:
      out.grid.T0 = 0;
      break;
    case DefenseKind::RebootOnly:
    case DefenseKind::RebootWithDetector:
      if (!(mode.T0 > 0.0)) throw Error(Errc::SchemaError, "defense.T0 must be > 0");
      out.grid.T0 = snap(mode.T0, tm.dt, "T0", out.warnings);
      break;
    case DefenseKind::Switching:
    case DefenseKind::SwitchingWithDetector: {
      if (mode.n < 2) throw Error(Errc::SchemaError, "switching defense needs n >= 2");
      if (tm.t_c > 0.0 && static_cast<double>(mode.n) >= 1.0 + tm.t_r / tm.t_c) {
        throw Error(Errc::InfeasibleTiming,
                    "n = " + std::to_string(mode.n) + " is not below 1 + t_r / t_c = " +
                        describe(1.0 + tm.t_r / tm.t_c));
      }
      const std::int64_t gaps = mode.n - 1;
      out.grid.T0 = (out.grid.t_r + gaps - 1) / gaps;
      if (out.grid.T0 * gaps != out.grid.t_r) {
        out.warnings.push_back("T0 = t_r / (n - 1) rounded up to " +
                               describe(out.grid.seconds(out.grid.T0)) +
                               " s so every incoming controller has finished re-initialising");
      }
      break;
    }
  }
  if (mode.kind != DefenseKind::NoDefense && out.grid.T0 <= out.grid.t_c) {
    throw Error(Errc::InfeasibleTiming, "working period T0 must exceed t_c on the grid");
  }
  return out;
}

ResolvedTiming validate_scenario(const Scenario& scenario) {
  if (scenario.runs < 1) throw Error(Errc::SchemaError, "ensemble.runs must be >= 1");
  if (scenario.attack.enabled && !scenario.attack.dist) {
    throw Error(Errc::SchemaError, "attack.dist is required when the attack is enabled");
  }
  const int n = scenario.defense.controllers();
  for (int id : scenario.attack.persistent_slots) {
    if (id < 1 || id > n) {
      throw Error(Errc::SchemaError, "attack.persistent_slots entry " + std::to_string(id) +
                                         " is outside 1.." + std::to_string(n));
    }
  }
  make_plant(scenario.plant);
  return resolve_timing(scenario);
}

State rk4_step(const PlantModel& model, const State& x, double u, double w, double t, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "rk4 step needs dt > 0");
  const double half = 0.5 * dt;
  const State k1 = model.derivative(x, u, w, t);
  const State k2 = model.derivative(x + half * k1, u, w, t + half);
  const State k3 = model.derivative(x + half * k2, u, w, t + half);
  const State k4 = model.derivative(x + dt * k3, u, w, t + dt);
  State next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw Error(Errc::NonFiniteState, "state left the finite range");
  return next;
}

LyapunovMonitor::LyapunovMonitor(const PlantModel& plant) : reference_(plant.equilibrium()) {
  if (const auto lin = plant.linear_structure()) P_ = solve_lyapunov(lin->A + lin->B * lin->K);
}

double LyapunovMonitor::operator()(const State& x) const {
  if (P_) return x.dot(*P_ * x);
  return (x - reference_).squaredNorm();
}

Trajectory run(const Scenario& scenario, std::uint64_t seed) {
  const ResolvedTiming timing = validate_scenario(scenario);
  const auto plant = make_plant(scenario.plant);
  const LyapunovMonitor monitor(*plant);
  Supervisor supervisor(scenario.defense, scenario.attack, scenario.detector, timing.grid, seed);

  const double dt = timing.grid.dt;
  const double u_max = plant->u_max();
  const auto points = static_cast<std::size_t>(timing.steps + 1);

  Trajectory traj;
  traj.seed = seed;
  traj.t.reserve(points);
  traj.x.reserve(points);
  traj.u.reserve(points);
  traj.V.reserve(points);
  traj.active_id.reserve(points);
  traj.gate.reserve(points);
  traj.status.reserve(points);

  State x = plant->initial_state();
  for (std::int64_t k = 0; k <= timing.steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const SupervisorDecision decision = supervisor.step(k);

    double u = 0.0;
    switch (decision.gate) {
      case Gate::PassNominal:
        try {
          u = std::clamp(plant->nominal_control(x), -u_max, u_max);
        } catch (const Error& e) {
          if (e.code() != Errc::DegenerateAngle) throw;
          ++traj.degenerate_steps;
        }
        break;
      case Gate::ForceUmax:
        u = u_max;
        break;
      case Gate::ForceZero:
        break;
    }

    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.u.push_back(u);
    traj.V.push_back(monitor(x));
    traj.active_id.push_back(decision.designated);
    traj.gate.push_back(decision.gate);
    traj.status.push_back(decision.status);

    if (k == timing.steps) break;
    try {
      x = rk4_step(*plant, x, u, plant->disturbance(t), t, dt);
    } catch (const Error& e) {
      if (e.code() != Errc::NonFiniteState) throw;
      traj.diverged = true;
      break;
    }
  }
  traj.events = supervisor.events();
  return traj;
}

namespace {

SegmentLabel segment_label(SlotStatus status) {
  switch (status) {
    case SlotStatus::Authenticating: return SegmentLabel::Auth;
    case SlotStatus::Active: return SegmentLabel::Normal;
    case SlotStatus::Compromised: return SegmentLabel::Attacked;
    case SlotStatus::Silenced: return SegmentLabel::Silenced;
    case SlotStatus::Reinitializing:
    case SlotStatus::Ready:
      break;
  }
  return SegmentLabel::Reinit;
}

}  // namespace

std::vector<EnvelopeSegment> envelope_segments(const Trajectory& trajectory,
                                               const CertificateConstants& cert, double dt) {
  std::vector<EnvelopeSegment> segments;
  if (trajectory.status.size() < 2) return segments;
  // Status k holds over [t_k, t_k + dt); the final grid point closes the run.
  std::size_t begin = 0;
  const std::size_t steps = trajectory.status.size() - 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    if (k == steps || trajectory.status[k] != trajectory.status[begin]) {
      const SegmentLabel label = segment_label(trajectory.status[begin]);
      const double duration = static_cast<double>(k - begin) * dt;
      if (!segments.empty() && segments.back().label == label) {
        segments.back().duration += duration;
      } else {
        segments.push_back(make_segment(cert, label, duration));
      }
      begin = k;
    }
  }
  return segments;
}

double log_growth_slope(const std::vector<double>& t, const std::vector<double>& v, double t0,
                        double t1) {
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < std::min(t.size(), v.size()); ++i) {
    if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12) continue;
    const double y = std::log(v[i] + 1e-6);
    n += 1.0;
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2.0 || denom <= 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

namespace {

unsigned worker_count(int runs) {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RESILEX_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return std::min(threads, static_cast<unsigned>(runs));
}

}  // namespace

EnsembleResult ensemble(const Scenario& scenario) {
  const ResolvedTiming timing = validate_scenario(scenario);

  EnsembleResult out;
  out.runs.resize(static_cast<std::size_t>(scenario.runs));
  for (int i = 0; i < scenario.runs; ++i) {
    out.seeds.push_back(scenario.base_seed + static_cast<std::uint64_t>(i));
  }

  // Each worker takes a strided subset of run indices; results land in their
  // own slot so aggregation order is fixed by run index.
  const unsigned workers = worker_count(scenario.runs);
  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < out.runs.size(); i += workers) {
        out.runs[i] = run(scenario, out.seeds[i]);
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const auto points = static_cast<std::size_t>(timing.steps + 1);
  const int dim = make_plant(scenario.plant)->state_dim();
  MeanTrajectory& mean = out.mean;
  mean.t.resize(points);
  mean.x.assign(points, State::Zero(dim));
  mean.u.assign(points, 0.0);
  mean.V.assign(points, 0.0);
  for (std::size_t k = 0; k < points; ++k) mean.t[k] = static_cast<double>(k) * timing.grid.dt;

  int completed = 0;
  for (const Trajectory& tr : out.runs) {
    if (tr.diverged) {
      ++out.diverged_runs;
      continue;
    }
    ++completed;
    for (std::size_t k = 0; k < points; ++k) {
      mean.x[k] += tr.x[k];
      mean.u[k] += tr.u[k];
      mean.V[k] += tr.V[k];
    }
  }
  if (completed == 0) throw Error(Errc::AllRunsDiverged, "every ensemble run diverged");
  const double scale = 1.0 / completed;
  for (std::size_t k = 0; k < points; ++k) {
    mean.x[k] *= scale;
    mean.u[k] *= scale;
    mean.V[k] *= scale;
  }

  const double horizon = mean.t.back();
  TailStats& tail = out.tail;
  tail.window_start = 0.75 * horizon;
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < points; ++k) {
    if (mean.t[k] < tail.window_start - 1e-12) {
      tail.max_mean_V_before = std::max(tail.max_mean_V_before, mean.V[k]);
      continue;
    }
    tail.max_mean_V = std::max(tail.max_mean_V, mean.V[k]);
    sum += mean.V[k];
    ++count;
  }
  tail.mean_mean_V = count > 0 ? sum / count : 0.0;
  tail.log_growth_slope = log_growth_slope(mean.t, mean.V, tail.window_start, horizon);
  // A noisy floor can show a small positive slope; it still counts as bounded
  // while it stays under the transient peak.
  tail.bounded = out.diverged_runs == 0 &&
                 (tail.log_growth_slope <= 0.01 || tail.max_mean_V <= tail.max_mean_V_before);
  return out;
}

}  // namespace resilex

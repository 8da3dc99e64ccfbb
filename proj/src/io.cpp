#include "resilex/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "resilex/error.hpp"

namespace resilex {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw Error(Errc::SchemaError, path + ": " + message);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) schema_error(path + "." + item.key(), "unknown key");
  }
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& required(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  if (!v) schema_error(path + "." + key, "missing required field");
  return *v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  const json* v = find(j, key);
  return v ? number(*v, path + "." + key) : fallback;
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) schema_error(path, "expected true or false");
  return v.get<bool>();
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer");
  return v.get<std::int64_t>();
}

template <std::size_t N>
std::array<double, N> numbers(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != N) schema_error(path, "expected an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

template <std::size_t N>
void numbers_into(const json& j, const std::string& path, const char* key, std::array<double, N>& out) {
  if (const json* v = find(j, key)) out = numbers<N>(*v, path + "." + key);
}

TruncatedGaussian distribution(const json& v, const std::string& path) {
  const auto p = numbers<4>(v, path);
  try {
    return TruncatedGaussian(p[0], p[1], p[2], p[3]);
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

PlantSpec parse_plant(const json& j) {
  const std::string path = "plant";
  require_object(j, path);
  reject_unknown(j, path, {"type", "params"});
  const std::string type = string(required(j, path, "type"), path + ".type");
  const json empty = json::object();
  const json* params = find(j, "params");
  const json& p = params ? *params : empty;
  const std::string pp = path + ".params";
  require_object(p, pp);

  if (type == "third_order") {
    reject_unknown(p, pp, {"A", "B", "K", "x0", "u_max", "w_amplitude", "w_frequency"});
    LinearThirdOrder lt;
    if (const json* a = find(p, "A")) {
      if (!a->is_array() || a->size() != 3) schema_error(pp + ".A", "expected a 3x3 array");
      for (std::size_t r = 0; r < 3; ++r) {
        const auto row = numbers<3>((*a)[r], pp + ".A[" + std::to_string(r) + "]");
        for (std::size_t c = 0; c < 3; ++c) lt.A[r * 3 + c] = row[c];
      }
    }
    numbers_into(p, pp, "B", lt.B);
    numbers_into(p, pp, "K", lt.K);
    numbers_into(p, pp, "x0", lt.x0);
    lt.u_max = number_or(p, pp, "u_max", lt.u_max);
    lt.w_amplitude = number_or(p, pp, "w_amplitude", lt.w_amplitude);
    lt.w_frequency = number_or(p, pp, "w_frequency", lt.w_frequency);
    return lt;
  }
  if (type == "smib") {
    reject_unknown(p, pp, {"P_m0", "omega0", "T_d0", "D", "H", "V_s", "x_d", "x_d1", "x_ds",
                           "x_ds1", "K", "delta0", "u_max", "x0", "disturbance_amplitude"});
    SmibParams s;
    s.P_m0 = number_or(p, pp, "P_m0", s.P_m0);
    s.omega0 = number_or(p, pp, "omega0", s.omega0);
    s.T_d0 = number_or(p, pp, "T_d0", s.T_d0);
    s.D = number_or(p, pp, "D", s.D);
    s.H = number_or(p, pp, "H", s.H);
    s.V_s = number_or(p, pp, "V_s", s.V_s);
    s.x_d = number_or(p, pp, "x_d", s.x_d);
    s.x_d1 = number_or(p, pp, "x_d1", s.x_d1);
    s.x_ds = number_or(p, pp, "x_ds", s.x_ds);
    s.x_ds1 = number_or(p, pp, "x_ds1", s.x_ds1);
    numbers_into(p, pp, "K", s.K);
    s.delta0 = number_or(p, pp, "delta0", s.delta0);
    s.u_max = number_or(p, pp, "u_max", s.u_max);
    numbers_into(p, pp, "x0", s.x0);
    s.disturbance_amplitude = number_or(p, pp, "disturbance_amplitude", s.disturbance_amplitude);
    return s;
  }
  schema_error(path + ".type", "expected \"third_order\" or \"smib\", got \"" + type + "\"");
}

DefenseMode parse_defense(const json& j) {
  const std::string path = "defense";
  require_object(j, path);
  reject_unknown(j, path, {"mode", "n", "T0"});
  const std::string mode = string(required(j, path, "mode"), path + ".mode");
  const json* n = find(j, "n");
  const json* T0 = find(j, "T0");

  if (mode == "none") {
    if (n || T0) schema_error(path, "mode \"none\" takes neither n nor T0");
    return DefenseMode::none();
  }
  if (mode == "reboot" || mode == "reboot_detector") {
    if (n) schema_error(path + ".n", "single-controller modes take T0, not n");
    const double period = number(required(j, path, "T0"), path + ".T0");
    return mode == "reboot" ? DefenseMode::reboot(period) : DefenseMode::reboot_with_detector(period);
  }
  if (mode == "switching" || mode == "switching_detector") {
    if (T0) schema_error(path + ".T0", "switching modes derive T0 = t_r / (n - 1)");
    const std::int64_t count = integer(required(j, path, "n"), path + ".n");
    if (count < 2 || count > 100000) schema_error(path + ".n", "expected 2 <= n");
    const int nn = static_cast<int>(count);
    return mode == "switching" ? DefenseMode::switching(nn) : DefenseMode::switching_with_detector(nn);
  }
  schema_error(path + ".mode", "unknown defense mode \"" + mode + "\"");
}

TimingConfig parse_timing(const json& j) {
  const std::string path = "timing";
  require_object(j, path);
  reject_unknown(j, path, {"t_r", "t_c", "dt", "horizon"});
  TimingConfig t;
  t.t_r = number(required(j, path, "t_r"), path + ".t_r");
  t.t_c = number(required(j, path, "t_c"), path + ".t_c");
  t.dt = number(required(j, path, "dt"), path + ".dt");
  t.horizon = number(required(j, path, "horizon"), path + ".horizon");
  return t;
}

AttackConfig parse_attack(const json& j) {
  const std::string path = "attack";
  require_object(j, path);
  reject_unknown(j, path, {"enabled", "dist", "mode", "persistent_slots"});
  AttackConfig a;
  a.enabled = boolean(required(j, path, "enabled"), path + ".enabled");
  if (const json* d = find(j, "dist")) a.dist = distribution(*d, path + ".dist");
  if (const json* m = find(j, "mode")) {
    const std::string mode = string(*m, path + ".mode");
    if (mode == "per_cycle") {
      a.mode = AttackMode::PerCycle;
    } else if (mode == "persistent") {
      a.mode = AttackMode::Persistent;
    } else {
      schema_error(path + ".mode", "expected \"per_cycle\" or \"persistent\"");
    }
  }
  if (const json* s = find(j, "persistent_slots")) {
    if (!s->is_array()) schema_error(path + ".persistent_slots", "expected an array of slot ids");
    for (std::size_t i = 0; i < s->size(); ++i) {
      a.persistent_slots.push_back(
          static_cast<int>(integer((*s)[i], path + ".persistent_slots[" + std::to_string(i) + "]")));
    }
    if (a.mode != AttackMode::Persistent && !a.persistent_slots.empty()) {
      schema_error(path + ".persistent_slots", "only valid with mode \"persistent\"");
    }
  }
  if (a.enabled && !a.dist) schema_error(path + ".dist", "required when the attack is enabled");
  return a;
}

DetectorConfig parse_detector(const json& j) {
  const std::string path = "detector";
  require_object(j, path);
  reject_unknown(j, path, {"enabled", "dist"});
  DetectorConfig d;
  const bool enabled = boolean(required(j, path, "enabled"), path + ".enabled");
  const json* dist = find(j, "dist");
  if (enabled) {
    if (!dist) schema_error(path + ".dist", "required when the detector is enabled");
    d.dist = distribution(*dist, path + ".dist");
  } else if (dist) {
    schema_error(path + ".dist", "a disabled detector takes no distribution");
  }
  return d;
}

CertificateChoice parse_certificate(const json& j) {
  const std::string path = "certificate";
  require_object(j, path);
  reject_unknown(j, path, {"mode", "eps", "eps_a", "eps_b"});
  CertificateChoice c;
  if (const json* m = find(j, "mode")) {
    const std::string mode = string(*m, path + ".mode");
    if (mode == "paper") {
      c.mode = ConstantsMode::PaperConstants;
    } else if (mode == "derived") {
      c.mode = ConstantsMode::DerivedConstants;
    } else {
      schema_error(path + ".mode", "expected \"paper\" or \"derived\"");
    }
  }
  if (const json* e = find(j, "eps")) c.eps = number(*e, path + ".eps");
  c.eps_a = number_or(j, path, "eps_a", c.eps_a);
  c.eps_b = number_or(j, path, "eps_b", c.eps_b);
  return c;
}

}  // namespace

Scenario parse_scenario(const json& doc, std::vector<std::string>* warnings) {
  require_object(doc, "$");
  reject_unknown(doc, "$", {"plant", "defense", "timing", "attack", "detector", "certificate",
                            "ensemble", "output"});
  Scenario s;
  s.plant = parse_plant(required(doc, "$", "plant"));
  s.defense = parse_defense(required(doc, "$", "defense"));
  s.timing = parse_timing(required(doc, "$", "timing"));
  if (const json* a = find(doc, "attack")) s.attack = parse_attack(*a);
  if (const json* d = find(doc, "detector")) s.detector = parse_detector(*d);
  if (const json* c = find(doc, "certificate")) s.certificate = parse_certificate(*c);
  if (const json* e = find(doc, "ensemble")) {
    require_object(*e, "ensemble");
    reject_unknown(*e, "ensemble", {"runs", "base_seed"});
    if (const json* r = find(*e, "runs")) {
      const std::int64_t runs = integer(*r, "ensemble.runs");
      if (runs < 1 || runs > 1000000) schema_error("ensemble.runs", "expected a positive count");
      s.runs = static_cast<int>(runs);
    }
    if (const json* b = find(*e, "base_seed")) {
      if (!b->is_number_unsigned()) schema_error("ensemble.base_seed", "expected a non-negative integer");
      s.base_seed = b->get<std::uint64_t>();
    }
  }
  if (const json* o = find(doc, "output")) {
    require_object(*o, "output");
    reject_unknown(*o, "output", {"dir"});
    if (const json* d = find(*o, "dir")) s.output_dir = string(*d, "output.dir");
  }

  try {
    make_plant(s.plant);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) schema_error("plant.params", e.what());
    throw;
  }
  const ResolvedTiming timing = validate_scenario(s);
  if (warnings) warnings->insert(warnings->end(), timing.warnings.begin(), timing.warnings.end());
  if (warnings && s.defense.uses_detector() && !s.detector.enabled()) {
    warnings->push_back("defense mode expects a detector but none is enabled; running degraded");
  }
  if (warnings && !s.defense.uses_detector() && s.detector.enabled()) {
    warnings->push_back("detector is configured but the defense mode does not use it");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return parse_scenario(doc, warnings);
}

json scenario_to_json(const Scenario& s) {
  json doc;
  if (const auto* lt = std::get_if<LinearThirdOrder>(&s.plant)) {
    json a = json::array();
    for (std::size_t r = 0; r < 3; ++r) a.push_back({lt->A[r * 3], lt->A[r * 3 + 1], lt->A[r * 3 + 2]});
    doc["plant"] = {{"type", "third_order"},
                    {"params",
                     {{"A", a},
                      {"B", lt->B},
                      {"K", lt->K},
                      {"x0", lt->x0},
                      {"u_max", lt->u_max},
                      {"w_amplitude", lt->w_amplitude},
                      {"w_frequency", lt->w_frequency}}}};
  } else {
    const auto& p = std::get<SmibParams>(s.plant);
    doc["plant"] = {{"type", "smib"},
                    {"params",
                     {{"P_m0", p.P_m0}, {"omega0", p.omega0}, {"T_d0", p.T_d0}, {"D", p.D},
                      {"H", p.H}, {"V_s", p.V_s}, {"x_d", p.x_d}, {"x_d1", p.x_d1},
                      {"x_ds", p.x_ds}, {"x_ds1", p.x_ds1}, {"K", p.K}, {"delta0", p.delta0},
                      {"u_max", p.u_max}, {"x0", p.x0},
                      {"disturbance_amplitude", p.disturbance_amplitude}}}};
  }

  json defense = {{"mode", std::string(to_string(s.defense.kind))}};
  if (s.defense.is_switching()) {
    defense["n"] = s.defense.n;
  } else if (s.defense.kind != DefenseKind::NoDefense) {
    defense["T0"] = s.defense.T0;
  }
  doc["defense"] = defense;
  doc["timing"] = {{"t_r", s.timing.t_r}, {"t_c", s.timing.t_c}, {"dt", s.timing.dt},
                   {"horizon", s.timing.horizon}};

  json attack = {{"enabled", s.attack.enabled},
                 {"mode", s.attack.mode == AttackMode::Persistent ? "persistent" : "per_cycle"}};
  if (s.attack.dist) attack["dist"] = s.attack.dist->params();
  if (s.attack.mode == AttackMode::Persistent) attack["persistent_slots"] = s.attack.persistent_slots;
  doc["attack"] = attack;

  json detector = {{"enabled", s.detector.enabled()}};
  if (s.detector.dist) detector["dist"] = s.detector.dist->params();
  doc["detector"] = detector;

  json cert = {{"mode", s.certificate.mode == ConstantsMode::PaperConstants ? "paper" : "derived"},
               {"eps_a", s.certificate.eps_a},
               {"eps_b", s.certificate.eps_b}};
  if (s.certificate.eps) cert["eps"] = *s.certificate.eps;
  doc["certificate"] = cert;
  doc["ensemble"] = {{"runs", s.runs}, {"base_seed", s.base_seed}};
  doc["output"] = {{"dir", s.output_dir}};
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "failed writing " + path.string());
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_text(path, scenario_to_json(scenario).dump(2) + "\n");
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trajectory_csv_header(int state_dim) {
  std::string header = "t";
  for (int i = 1; i <= state_dim; ++i) header += ",x" + std::to_string(i);
  return header + ",u,V,active_id,gate,status";
}

namespace {

void append_row(std::string& out, double t, const State& x, double u, double V, int id, Gate gate,
                SlotStatus status) {
  out += format_double(t);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out += ',';
    out += format_double(x(i));
  }
  out += ',';
  out += format_double(u);
  out += ',';
  out += format_double(V);
  out += ',';
  out += std::to_string(id);
  out += ',';
  out += to_string(gate);
  out += ',';
  out += to_string(status);
  out += '\n';
}

}  // namespace

void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path) {
  const int dim = tr.x.empty() ? 0 : static_cast<int>(tr.x.front().size());
  std::string out = trajectory_csv_header(dim) + "\n";
  out.reserve(tr.t.size() * 160);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    append_row(out, tr.t[k], tr.x[k], tr.u[k], tr.V[k], tr.active_id[k], tr.gate[k], tr.status[k]);
  }
  write_text(path, out);
}

void write_mean_csv(const MeanTrajectory& mean, const Trajectory& reference,
                    const std::filesystem::path& path) {
  const int dim = mean.x.empty() ? 0 : static_cast<int>(mean.x.front().size());
  std::string out = trajectory_csv_header(dim) + "\n";
  out.reserve(mean.t.size() * 160);
  for (std::size_t k = 0; k < mean.t.size(); ++k) {
    const std::size_t r = std::min(k, reference.t.size() - 1);
    append_row(out, mean.t[k], mean.x[k], mean.u[k], mean.V[k], reference.active_id[r],
               reference.gate[r], reference.status[r]);
  }
  write_text(path, out);
}

void write_events_jsonl(const std::vector<Event>& events, const std::filesystem::path& path) {
  std::string out;
  for (const Event& e : events) {
    // t is written through format_double so the log matches the CSV grid exactly.
    out += "{\"t\":" + format_double(e.t) + ",\"slot\":" + std::to_string(e.slot) +
           ",\"event\":\"" + std::string(to_string(e.kind)) + "\",\"detail\":" +
           json(e.detail).dump() + "}\n";
  }
  write_text(path, out);
}

json verdict_to_json(const ConditionVerdict& v) {
  json j = {{"theorem", std::string(to_string(v.theorem))},
            {"value", v.value},
            {"satisfied", v.satisfied},
            {"method", "quadrature"},
            {"abs_err_est", v.quadrature.abs_err_est},
            {"clip_below_support", v.quadrature.clip_below_support},
            {"inputs",
             {{"T0", v.inputs.T0},
              {"t_r", v.inputs.t_r},
              {"t_c", v.inputs.t_c},
              {"n", v.inputs.n},
              {"lambda", v.inputs.rates.lambda},
              {"lambda_a", v.inputs.rates.lambda_a}}}};
  if (v.monte_carlo) {
    j["monte_carlo"] = {{"value", v.monte_carlo->value},
                        {"abs_err_est", v.monte_carlo->abs_err_est},
                        {"method", "monte_carlo"}};
    j["discrepancy"] = v.discrepancy();
  }
  return j;
}

json certificate_to_json(const CertificateConstants& c) {
  json P = json::array();
  for (Eigen::Index r = 0; r < c.P.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.P.cols(); ++k) row.push_back(c.P(r, k));
    P.push_back(row);
  }
  return {{"mode", c.mode == ConstantsMode::PaperConstants ? "paper" : "derived"},
          {"P", P},
          {"alpha_lo", c.alpha_lo},
          {"alpha_hi", c.alpha_hi},
          {"beta1_bar", c.beta1_bar},
          {"gamma1_bar", c.gamma1_bar},
          {"gamma2_bar", c.gamma2_bar},
          {"beta2_bar", c.beta2_bar},
          {"eps", c.eps},
          {"eps_a", c.eps_a},
          {"eps_b", c.eps_b},
          {"lambda", c.lambda},
          {"lambda_a", c.lambda_a},
          {"w_max", c.w_max},
          {"u_max", c.u_max}};
}

}  // namespace resilex

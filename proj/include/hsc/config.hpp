#pragma once

// Scenario configuration files.
//
// Grammar (one item per line, '#' starts a comment):
//
//   [section]
//   key = value
//
// Sections and keys are fixed (see the tables below); unknown ones are
// rejected. Numbers use C syntax, booleans are true/false. The mode schedule
// is a ';'-separated list of segments
//
//   schedule = t_start b_h k_h cooperation authority ; ...
//
// with cooperation in {cooperative, uncooperative} and authority in
// {autopilot, active_safety, auto}. Weight triples are "w1 w2 w3".
// Overrides "section.key=value" are applied after the text.

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hsc/errors.hpp"
#include "hsc/harness.hpp"

namespace hsc {

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

struct Context {
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line, key, what); }

  double number(const std::string& v) const {
    if (v.empty()) fail("expected a number");
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || errno == ERANGE) fail("'" + v + "' is not a number");
    return d;
  }

  int integer(const std::string& v) const {
    const double d = number(v);
    if (d != static_cast<double>(static_cast<int>(d))) fail("'" + v + "' is not an integer");
    return static_cast<int>(d);
  }

  bool boolean(const std::string& v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("'" + v + "' is not true/false");
  }
};

/// Shortest text that reads back to exactly `v`.
inline std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Cooperation parse_cooperation(const Context& c, const std::string& v) {
  if (v == "cooperative") return Cooperation::cooperative;
  if (v == "uncooperative") return Cooperation::uncooperative;
  c.fail("unknown cooperation '" + v + "'");
}

inline std::optional<Authority> parse_authority(const Context& c, const std::string& v) {
  if (v == "autopilot") return Authority::autopilot;
  if (v == "active_safety") return Authority::active_safety;
  if (v == "auto") return std::nullopt;
  c.fail("unknown authority '" + v + "'");
}

inline std::vector<Segment> parse_schedule(const Context& c, const std::string& v) {
  std::vector<Segment> out;
  for (const std::string& item : split(v, ';')) {
    if (item.empty()) continue;
    const auto f = words(item);
    if (f.size() != 5) c.fail("segment '" + item + "' needs: t_start b_h k_h cooperation authority");
    Segment s;
    s.t_start = c.number(f[0]);
    s.z_h_target = {c.number(f[1]), c.number(f[2])};
    s.cooperation = parse_cooperation(c, f[3]);
    s.authority = parse_authority(c, f[4]);
    out.push_back(s);
  }
  if (out.empty()) c.fail("schedule must list at least one segment");
  return out;
}

inline std::string format_schedule(const std::vector<Segment>& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const Segment& s = schedule[i];
    if (i) out += " ; ";
    out += fmt(s.t_start) + " " + fmt(s.z_h_target.b) + " " + fmt(s.z_h_target.k) + " " +
           to_string(s.cooperation) + " " + (s.authority ? to_string(*s.authority) : std::string("auto"));
  }
  return out;
}

inline CostWeights parse_weights(const Context& c, const std::string& v) {
  const auto f = words(v);
  if (f.size() != 3) c.fail("weights need three numbers");
  return {c.number(f[0]), c.number(f[1]), c.number(f[2])};
}

inline std::string format_weights(const CostWeights& w) {
  return fmt(w.w1) + " " + fmt(w.w2) + " " + fmt(w.w3);
}

struct Field {
  std::function<void(ScenarioConfig&, const Context&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
Field real(T ScenarioConfig::*group, double T::*member) {
  return {[=](ScenarioConfig& c, const Context& ctx, const std::string& v) { (c.*group).*member = ctx.number(v); },
          [=](const ScenarioConfig& c) { return fmt((c.*group).*member); }};
}

template <class T>
Field whole(T ScenarioConfig::*group, int T::*member) {
  return {[=](ScenarioConfig& c, const Context& ctx, const std::string& v) { (c.*group).*member = ctx.integer(v); },
          [=](const ScenarioConfig& c) { return std::to_string((c.*group).*member); }};
}

inline Field top(double ScenarioConfig::*member) {
  return {[=](ScenarioConfig& c, const Context& ctx, const std::string& v) { c.*member = ctx.number(v); },
          [=](const ScenarioConfig& c) { return fmt(c.*member); }};
}

inline Field text(std::string ScenarioConfig::*member) {
  return {[=](ScenarioConfig& c, const Context&, const std::string& v) { c.*member = v; },
          [=](const ScenarioConfig& c) { return c.*member; }};
}

/// Ordered (section, key) -> accessor table; the order is the serialisation order.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ScenarioConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"plant.j_sw", real(&C::plant, &MechanicalParams::j_sw)},
      {"plant.j_s", real(&C::plant, &MechanicalParams::j_s)},
      {"plant.j_m", real(&C::plant, &MechanicalParams::j_m)},
      {"plant.j_h", real(&C::plant, &MechanicalParams::j_h)},
      {"plant.k_t", real(&C::plant, &MechanicalParams::k_t)},
      {"plant.ratio", real(&C::plant, &MechanicalParams::ratio)},
      {"plant.integrator",
       {[](C& c, const Context& ctx, const std::string& v) {
          if (v == "rk4") c.integrator = Integrator::rk4;
          else if (v == "euler") c.integrator = Integrator::euler;
          else ctx.fail("integrator must be rk4 or euler");
        },
        [](const C& c) { return std::string(c.integrator == Integrator::rk4 ? "rk4" : "euler"); }}},
      {"plant.substeps",
       {[](C& c, const Context& ctx, const std::string& v) { c.plant_substeps = ctx.integer(v); },
        [](const C& c) { return std::to_string(c.plant_substeps); }}},

      {"human.alpha_b", real(&C::plant, &MechanicalParams::alpha_bh)},
      {"human.alpha_k", real(&C::plant, &MechanicalParams::alpha_kh)},
      {"human.beta_b", real(&C::plant, &MechanicalParams::beta_bh)},
      {"human.beta_k", real(&C::plant, &MechanicalParams::beta_kh)},
      {"human.t1", real(&C::intent, &IntentProfile::t1)},
      {"human.t2", real(&C::intent, &IntentProfile::t2)},
      {"human.t3", real(&C::intent, &IntentProfile::t3)},
      {"human.amplitude", real(&C::intent, &IntentProfile::w_amp)},
      {"human.period", real(&C::intent, &IntentProfile::period)},

      {"automation.alpha_b", real(&C::plant, &MechanicalParams::alpha_ba)},
      {"automation.alpha_k", real(&C::plant, &MechanicalParams::alpha_ka)},
      {"automation.beta_active", top(&C::beta_active)},
      {"automation.beta_autopilot", top(&C::beta_autopilot)},
      {"automation.k_threshold", top(&C::k_threshold)},
      {"automation.weights_autopilot",
       {[](C& c, const Context& ctx, const std::string& v) { c.weights.autopilot = parse_weights(ctx, v); },
        [](const C& c) { return format_weights(c.weights.autopilot); }}},
      {"automation.weights_active_safety",
       {[](C& c, const Context& ctx, const std::string& v) { c.weights.active_safety = parse_weights(ctx, v); },
        [](const C& c) { return format_weights(c.weights.active_safety); }}},
      {"automation.adaptive",
       {[](C& c, const Context& ctx, const std::string& v) { c.adaptive = ctx.boolean(v); },
        [](const C& c) { return std::string(c.adaptive ? "true" : "false"); }}},
      {"automation.fixed_gains",
       {[](C& c, const Context& ctx, const std::string& v) {
          if (v == "none") {
            c.z_a_fixed.reset();
            return;
          }
          const auto f = words(v);
          if (f.size() != 2) ctx.fail("fixed_gains needs 'b k' or 'none'");
          c.z_a_fixed = GainPair{ctx.number(f[0]), ctx.number(f[1])};
        },
        [](const C& c) {
          return c.z_a_fixed ? fmt(c.z_a_fixed->b) + " " + fmt(c.z_a_fixed->k) : std::string("none");
        }}},

      {"ocp.np_horizon", whole(&C::ocp, &OcpSettings::np_horizon)},
      {"ocp.nc_horizon", whole(&C::ocp, &OcpSettings::nc_horizon)},
      {"ocp.ts", real(&C::ocp, &OcpSettings::ts)},
      {"ocp.r_u", real(&C::ocp, &OcpSettings::r_u)},
      {"ocp.r_s", real(&C::ocp, &OcpSettings::r_s)},
      {"ocp.substeps", whole(&C::ocp, &OcpSettings::substeps)},

      {"solver.zeta", real(&C::solver, &cgmres::SolverSettings::zeta)},
      {"solver.h_fd", real(&C::solver, &cgmres::SolverSettings::h_fd)},
      {"solver.i_max", whole(&C::solver, &cgmres::SolverSettings::i_max)},
      {"solver.gmres_tol", real(&C::solver, &cgmres::SolverSettings::gmres_tol)},
      {"solver.delta", real(&C::solver, &cgmres::SolverSettings::delta)},
      {"solver.init_max_iter", whole(&C::solver, &cgmres::SolverSettings::init_max_iter)},
      {"solver.divergence_bound", real(&C::solver, &cgmres::SolverSettings::divergence_bound)},

      {"scenario.duration", top(&C::duration)},
      {"scenario.ts", top(&C::ts)},
      {"scenario.schedule",
       {[](C& c, const Context& ctx, const std::string& v) { c.schedule = parse_schedule(ctx, v); },
        [](const C& c) { return format_schedule(c.schedule); }}},

      {"output.csv", text(&C::csv_path)},
      {"output.metrics", text(&C::metrics_path)},
  };
  return table;
}

inline const Field* find_field(const std::string& dotted) {
  for (const auto& [name, f] : fields())
    if (name == dotted) return &f;
  return nullptr;
}

inline bool known_section(const std::string& s) {
  for (const char* name : {"plant", "human", "automation", "ocp", "solver", "scenario", "output"})
    if (s == name) return true;
  return false;
}

}  // namespace config_detail

/// Parse a configuration document; `overrides` are "section.key=value" pairs
/// applied after the text. Line 0 in a ParseError refers to an override.
inline ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
  using namespace config_detail;
  ScenarioConfig cfg;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream is{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, line, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) throw ParseError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, line, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, key, "key outside of a section");
    const std::string dotted = section + "." + key;
    const Field* f = find_field(dotted);
    if (!f) throw ParseError(line_no, dotted, "unknown key");
    if (auto [it, fresh] = seen.emplace(dotted, line_no); !fresh)
      throw ParseError(line_no, dotted, "duplicate key (first set on line " + std::to_string(it->second) + ")");
    f->set(cfg, Context{line_no, dotted}, value);
  }

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ParseError(0, ov, "override must be section.key=value");
    const std::string dotted = trim(std::string_view(ov).substr(0, eq));
    const Field* f = find_field(dotted);
    if (!f) throw ParseError(0, dotted, "unknown key");
    f->set(cfg, Context{0, dotted}, trim(std::string_view(ov).substr(eq + 1)));
  }

  cfg.validate();
  return cfg;
}

inline std::string serialize_config(const ScenarioConfig& cfg) {
  using namespace config_detail;
  std::string out;
  std::string section;
  for (const auto& [dotted, f] : fields()) {
    const auto dot = dotted.find('.');
    const std::string sec = dotted.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    const std::string value = f.get(cfg);
    out += dotted.substr(dot + 1) + (value.empty() ? " =" : " = " + value) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- presets

inline ScenarioConfig single_mode_preset(Cooperation c, Authority a) {
  ScenarioConfig cfg;
  // The driver is stiff when the automation should yield and weak when it
  // should take over.
  const GainPair z_h = a == Authority::autopilot ? GainPair{0.5, 1.0} : GainPair{0.1, 0.1};
  cfg.schedule = {Segment{0.0, z_h, c, a}};
  return cfg;
}

/// Cooperative/active safety, uncooperative/autopilot, uncooperative/active
/// safety, cooperative/autopilot; one full maneuver per segment.
inline ScenarioConfig combined_preset() {
  ScenarioConfig cfg;
  const double seg = 15.0;
  cfg.intent.period = seg;
  cfg.duration = 4 * seg;
  cfg.schedule = {Segment{0 * seg, {0.1, 0.1}, Cooperation::cooperative, Authority::active_safety},
                  Segment{1 * seg, {0.5, 1.0}, Cooperation::uncooperative, Authority::autopilot},
                  Segment{2 * seg, {0.1, 0.1}, Cooperation::uncooperative, Authority::active_safety},
                  Segment{3 * seg, {0.5, 1.0}, Cooperation::cooperative, Authority::autopilot}};
  return cfg;
}

struct Preset {
  std::string name;
  std::string description;
  ScenarioConfig config;
};

inline std::vector<Preset> presets() {
  return {
      {"fig4_uncoop_autopilot", "uncooperative intents, stiff driver, automation yields",
       single_mode_preset(Cooperation::uncooperative, Authority::autopilot)},
      {"fig5_uncoop_active", "uncooperative intents, weak driver, automation takes over",
       single_mode_preset(Cooperation::uncooperative, Authority::active_safety)},
      {"fig6_coop_autopilot", "cooperative intents, stiff driver, automation yields",
       single_mode_preset(Cooperation::cooperative, Authority::autopilot)},
      {"fig7_coop_active", "cooperative intents, weak driver, automation assists",
       single_mode_preset(Cooperation::cooperative, Authority::active_safety)},
      {"fig8_combined", "four interaction modes in sequence", combined_preset()},
  };
}

inline std::optional<ScenarioConfig> find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p.config;
  return std::nullopt;
}

// ---------------------------------------------------------------- table 2

struct Table2Row {
  GainPair z_h;
  double paper_mean;
  double paper_std;
};

inline const std::vector<Table2Row>& table2_reference() {
  static const std::vector<Table2Row> rows = {
      {{0.1, 0.1}, 0.2327, 0.1949},
      {{0.3, 0.5}, 0.0777, 0.0651},
      {{0.5, 1.0}, 0.0426, 0.0358},
  };
  return rows;
}

inline constexpr double kTable2Tolerance = 0.20;

struct Table2Result {
  Table2Row reference;
  RunMetrics metrics;
  double seconds = 0.0;

  double mean_deviation() const { return metrics.mean_abs_err / reference.paper_mean - 1.0; }
  double std_deviation() const { return metrics.std_abs_err / reference.paper_std - 1.0; }
  bool within_tolerance() const {
    return std::abs(mean_deviation()) <= kTable2Tolerance && std::abs(std_deviation()) <= kTable2Tolerance;
  }
};

/// Driver-alone runs for every reference row; `base` supplies everything but
/// the driver gains and the automation switch.
inline std::vector<Table2Result> run_table2(const ScenarioConfig& base = {}) {
  std::vector<Table2Result> out;
  for (const Table2Row& row : table2_reference()) {
    ScenarioConfig cfg = base;
    const ScenarioConfig alone = driver_alone_config(row.z_h);
    cfg.schedule = alone.schedule;
    cfg.adaptive = alone.adaptive;
    cfg.z_a_fixed = alone.z_a_fixed;
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationTrace trace = run_scenario(cfg);
    Table2Result r{row, error_stats(trace)};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  return out;
}

}  // namespace hsc

#pragma once

// Command-line front end. Exit codes:
//   0 success, 1 usage error, 2 config error, 3 solver failure,
//   4 table2 finished but a row is outside the reference tolerance.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsc/config.hpp"
#include "hsc/errors.hpp"
#include "hsc/harness.hpp"

namespace hsc {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitOutOfTolerance = 4,
};

namespace cli_detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

/// Writes only once the whole payload exists, so failures leave no partial file.
inline void write_file(const std::string& path, const std::string& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << payload)) throw UsageError("cannot write '" + path + "'");
}

inline std::string csv_text(const SimulationTrace& trace) {
  std::ostringstream ss;
  write_csv(trace, ss);
  return ss.str();
}

inline std::string metrics_text(const RunMetrics& m, const std::string& prefix = "") {
  std::ostringstream ss;
  write_metrics(m, ss, prefix);
  return ss.str();
}

/// CSV to `out_path`, the config's csv path, or stdout; metrics likewise.
inline void emit_trace(const ScenarioConfig& cfg, const SimulationTrace& trace, const std::string& out_path,
                       std::ostream& out) {
  const std::string csv = csv_text(trace);
  const std::string metrics = metrics_text(error_stats(trace));
  const std::string target = out_path.empty() ? cfg.csv_path : out_path;
  if (target.empty() || target == "-") {
    out << csv;
  } else {
    write_file(target, csv);
    out << metrics;
  }
  if (!cfg.metrics_path.empty()) write_file(cfg.metrics_path, metrics);
}

inline int cmd_simulate(const std::string& config, const std::vector<std::string>& sets, const std::string& out_path,
                        std::ostream& out) {
  const ScenarioConfig cfg = load_config(config, sets);
  emit_trace(cfg, run_scenario(cfg), out_path, out);
  return kExitOk;
}

inline int cmd_combined(const std::string& config, const std::vector<std::string>& sets, const std::string& out_path,
                        std::ostream& out) {
  const ScenarioConfig cfg = load_config(config, sets);
  const SimulationTrace trace = combined_sequence(cfg);
  std::ostringstream summary;
  summary << "segment,t_start,mode,mean_b_a,mean_k_a\n";
  for (std::size_t s = 0; s < cfg.schedule.size(); ++s) {
    const double t0 = cfg.schedule[s].t_start;
    const double t1 = s + 1 < cfg.schedule.size() ? cfg.schedule[s + 1].t_start : cfg.duration + cfg.ts;
    double b = 0.0, k = 0.0;
    int n = 0;
    std::string mode;
    for (const TraceRow& r : trace.rows) {
      if (r.t + 1e-9 < t0 || r.t + 1e-9 >= t1) continue;
      b += r.b_a;
      k += r.k_a;
      mode = to_string(r.mode);
      ++n;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.9g,%s,%.9g,%.9g\n", s + 1, t0, mode.c_str(), n ? b / n : 0.0,
                  n ? k / n : 0.0);
    summary << line;
  }
  const std::string target = out_path.empty() ? cfg.csv_path : out_path;
  if (target.empty() || target == "-") {
    out << csv_text(trace);
  } else {
    write_file(target, csv_text(trace));
    out << summary.str();
  }
  if (!cfg.metrics_path.empty()) write_file(cfg.metrics_path, metrics_text(error_stats(trace)));
  return kExitOk;
}

inline int cmd_compare(const std::string& config, const std::vector<std::string>& sets, const std::string& prefix,
                       std::ostream& out) {
  const ScenarioConfig cfg = load_config(config, sets);
  const Comparison c = compare(cfg);
  if (!prefix.empty()) {
    write_file(prefix + "_adaptive.csv", csv_text(c.adaptive_trace));
    write_file(prefix + "_baseline.csv", csv_text(c.baseline_trace));
  }
  out << metrics_text(c.adaptive, "adaptive.") << metrics_text(c.baseline, "baseline.");
  return kExitOk;
}

inline int cmd_table2(const std::string& out_path, std::ostream& out) {
  const std::vector<Table2Result> rows = run_table2();
  bool all_ok = true;
  bool monotone = true;
  std::ostringstream csv;
  csv << "b_h,k_h,mean_abs_err,std_abs_err,paper_mean,paper_std,mean_dev,std_dev,within_tolerance\n";
  out << "   Z_H (b,k)     mu_e      sigma_e   | paper mu   paper sigma | dev mu   dev sigma\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Table2Result& r = rows[i];
    all_ok = all_ok && r.within_tolerance();
    if (i > 0 && !(rows[i].metrics.mean_abs_err < rows[i - 1].metrics.mean_abs_err)) monotone = false;
    char line[200];
    std::snprintf(line, sizeof line, "  (%.1f, %.1f)   %.5f   %.5f   | %.4f     %.4f      | %+6.1f%%  %+6.1f%%%s\n",
                  r.reference.z_h.b, r.reference.z_h.k, r.metrics.mean_abs_err, r.metrics.std_abs_err,
                  r.reference.paper_mean, r.reference.paper_std, 100 * r.mean_deviation(), 100 * r.std_deviation(),
                  r.within_tolerance() ? "" : "  (outside tolerance)");
    out << line;
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", r.reference.z_h.b,
                  r.reference.z_h.k, r.metrics.mean_abs_err, r.metrics.std_abs_err, r.reference.paper_mean,
                  r.reference.paper_std, r.mean_deviation(), r.std_deviation(),
                  r.within_tolerance() ? "true" : "false");
    csv << line;
  }
  out << "monotone ordering: " << (monotone ? "yes" : "no") << "\n";
  if (!out_path.empty()) write_file(out_path, csv.str());
  return all_ok && monotone ? kExitOk : kExitOutOfTolerance;
}

inline int cmd_presets(const std::string& dump, std::ostream& out) {
  if (dump.empty()) {
    for (const Preset& p : presets()) out << std::left << std::setw(24) << p.name << p.description << "\n";
    return kExitOk;
  }
  const auto cfg = find_preset(dump);
  if (!cfg) throw UsageError("unknown preset '" + dump + "'");
  out << serialize_config(*cfg);
  return kExitOk;
}

}  // namespace cli_detail

/// Run the command line `args` (without the program name).
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Adaptive haptic shared control: closed-loop simulation of impedance modulation", "hsc"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 usage error, 2 config error, 3 solver failure,\n"
             "            4 table2 rows outside the reference tolerance.");

  std::string config, out_path, dump;
  std::vector<std::string> sets;

  auto* simulate = app.add_subcommand("simulate", "run one scenario and write its trace CSV");
  simulate->add_option("--config", config, "scenario file")->required();
  simulate->add_option("--out", out_path, "trace CSV path (default: config output.csv, else stdout)");
  simulate->add_option("--set", sets, "override, section.key=value (repeatable)");

  auto* table2 = app.add_subcommand("table2", "driver-alone tracking error against the reference table");
  table2->add_option("--out", out_path, "write the rows as CSV");

  auto* cmp = app.add_subcommand("compare", "adaptive run versus frozen automation gains");
  cmp->add_option("--config", config, "scenario file")->required();
  cmp->add_option("--out", out_path, "prefix for <prefix>_adaptive.csv and <prefix>_baseline.csv");
  cmp->add_option("--set", sets, "override, section.key=value (repeatable)");

  auto* combined = app.add_subcommand("combined", "four-segment mode sequence");
  combined->add_option("--config", config, "scenario file")->required();
  combined->add_option("--out", out_path, "trace CSV path (default: config output.csv, else stdout)");
  combined->add_option("--set", sets, "override, section.key=value (repeatable)");

  auto* list = app.add_subcommand("presets", "list the built-in scenarios or print one as a config file");
  list->add_option("--dump", dump, "preset name to print");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'hsc --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config, sets, out_path, out);
    if (table2->parsed()) return cmd_table2(out_path, out);
    if (cmp->parsed()) return cmd_compare(config, sets, out_path, out);
    if (combined->parsed()) return cmd_combined(config, sets, out_path, out);
    if (list->parsed()) return cmd_presets(dump, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigFileError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const GmresBreakdown& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    // Remaining library errors stem from parameter values (zero activation, degenerate stiffness, ...).
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}

}  // namespace hsc

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "config.hpp"
#include "geovote/error.hpp"
#include "geovote/evaluation.hpp"
#include "geovote/verification.hpp"

namespace geovote::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  unsigned jobs = 1;
  std::size_t count = 0;
  std::string input;
  double alpha = 0.05;
  double threshold = 0.0;
  std::string suite;
  std::size_t cases = 10000;
  std::string matrix;
};

Overrides overrides_from(const CLI::App& cmd, const Options& o) {
  Overrides ov;
  if (cmd.count("--seed")) ov.seed = o.seed;
  if (cmd.count("--limit")) ov.limit = o.limit;
  if (cmd.count("--out")) ov.out = o.out;
  if (cmd.count("--jobs")) ov.jobs = o.jobs;
  return ov;
}

RunConfig load_run_config(const CLI::App& cmd, const Options& o) {
  const fs::path path(o.config);
  return parse_run_config(load_json(path), overrides_from(cmd, o), path.parent_path());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// --------------------------------------------------------------------------

int cmd_generate(const CLI::App& cmd, const Options& o, std::ostream& out) {
  const RunConfig cfg = load_run_config(cmd, o);
  if (o.out.empty()) throw ConfigError("generate needs --out PATH");
  auto stream = make_stream(cfg.stream);
  std::vector<StreamRecord> records;
  records.reserve(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    auto r = stream->next();
    if (!r) break;
    records.push_back(std::move(*r));
  }
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  write_csv(file, stream->n_features(), records);
  file.flush();
  if (!file) throw IoError("write failed for " + path.string());
  out << "fingerprint " << hex64(cfg.stream.fingerprint()) << '\n';
  out << "wrote " << records.size() << " records to " << path.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const CLI::App& cmd, const Options& o, std::ostream& out) {
  const RunConfig cfg = load_run_config(cmd, o);
  if (cfg.sizes.empty()) throw ConfigError("missing required key 'sizes'");
  SweepConfig sweep;
  sweep.dataset = cfg.dataset;
  sweep.stream = cfg.stream;
  sweep.sizes = cfg.sizes;
  sweep.aggregations = cfg.aggregations;
  sweep.ensemble = cfg.ensemble;
  sweep.evaluation = cfg.evaluation;
  sweep.jobs = cfg.jobs;

  const auto result = size_sweep(sweep);
  emit_report(result, cfg.out_dir);

  out << "dataset " << result.dataset << " (p=" << result.n_classes << ")\n";
  for (const auto& run : result.runs) {
    out << "  " << std::left << std::setw(10) << run.method << " accuracy " << format_fixed(run.result.final_accuracy)
        << "  (" << std::fixed << std::setprecision(2) << run.result.wall_seconds << " s)"
        << (run.m == result.n_classes ? "  [m = p]" : "") << '\n';
  }
  out << "report written to " << cfg.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_diversity(const CLI::App& cmd, const Options& o, std::ostream& out) {
  const RunConfig cfg = load_run_config(cmd, o);
  if (!cfg.scenario) throw ConfigError("missing required key 'scenario'");
  auto stream = make_stream(cfg.stream);
  auto model = build_scenario(*cfg.scenario, cfg.scenario_params, stream->n_features(), stream->n_classes());
  const std::size_t instantiated = model.instantiated_components();

  RunResult run;
  run.dataset = cfg.dataset;
  switch (*cfg.scenario) {
    case Scenario::levbag_m:
      run.method = "LevBag-" + std::to_string(cfg.scenario_params.m);
      break;
    case Scenario::sel2div:
      run.method = "Sel2Div";
      break;
    case Scenario::hyb_htnb:
      run.method = "Hyb-HTNB";
      break;
  }
  run.result = prequential_run(*stream, model, cfg.evaluation);
  run.m = model.active().size();
  run.aggregation = model.active().config().aggregation;

  fs::create_directories(cfg.out_dir);
  write_summary_csv(std::span<const RunResult>(&run, 1), cfg.out_dir / "summary.csv");
  write_series_csv(std::span<const RunResult>(&run, 1), cfg.out_dir / "series.csv");

  out << run.method << " on " << run.dataset << ": accuracy " << format_fixed(run.result.final_accuracy) << '\n';
  out << "components instantiated: " << instantiated << ", active: " << model.active().size() << '\n';

  auto write_pair = [&](std::size_t r, std::size_t s, double q) {
    const auto path = cfg.out_dir / "pair_q.csv";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << "r,s,q\n" << r << ',' << s << ',' << format_fixed(q) << '\n';
    out << "pair (" << r << ", " << s << ") Q = " << format_fixed(q) << '\n';
  };

  if (const auto& sel = model.selection()) {
    const auto path = cfg.out_dir / "q_matrix.csv";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    const auto& q = sel->q_matrix;
    for (std::size_t r = 0; r < q.size(); ++r) {
      for (std::size_t s = 0; s < q.size(); ++s) f << (s ? "," : "") << format_fixed(q[r][s]);
      f << '\n';
    }
    out << "selected after " << sel->at_instance << " instances\n";
    write_pair(sel->pair.first, sel->pair.second, q[sel->pair.first][sel->pair.second]);
  } else if (*cfg.scenario == Scenario::sel2div) {
    out << "warning: stream ended before the pool window filled; no pair selected\n";
  } else if (model.active().size() == 2) {
    const auto correctness = model.active().window_correctness();
    write_pair(0, 1, q_statistic(correctness[0], correctness[1]).value_or(0.0));
  }
  return kExitOk;
}

int cmd_friedman(const Options& o, const CLI::App& cmd, std::ostream& out) {
  const std::string path = !o.input.empty() ? o.input : o.config;
  if (path.empty()) throw ConfigError("friedman needs --input PATH");
  const auto matrix = ResultMatrix::read_csv(fs::path(path));
  std::optional<double> threshold;
  if (cmd.count("--threshold")) threshold = o.threshold;
  const auto r = friedman_test(matrix, o.alpha, threshold);

  out << std::fixed << std::setprecision(3);
  out << "methods " << matrix.methods.size() << ", datasets " << matrix.datasets.size() << '\n';
  for (std::size_t j = 0; j < matrix.methods.size(); ++j) {
    out << "  (" << j + 1 << ") " << std::left << std::setw(16) << matrix.methods[j] << " mean rank "
        << r.mean_ranks[j] << '\n';
  }
  out << std::setprecision(6) << "chi-square " << r.chi_square << ", Iman-Davenport F(" << r.df1 << ", " << r.df2
      << ") = " << r.iman_davenport_f << ", p = " << r.p_value << (r.rejects_null ? " (reject)" : " (retain)")
      << '\n';
  out << std::setprecision(3) << "minimum mean-rank difference " << r.critical_difference
      << (r.critical_difference_overridden ? " (override)" : "") << '\n';
  for (const auto& [a, b] : r.significant_pairs) out << "  (" << a + 1 << ") differs from (" << b + 1 << ")\n";
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  if (o.suite == "theorems") {
    const auto report = run_theorem_suite(o.seed, o.cases);
    for (const auto& g : report.groups) {
      out << (g.violations == 0 ? "PASS " : "FAIL ") << std::left << std::setw(22) << g.name << " cases "
          << g.cases << ", violations " << g.violations << ", worst margin " << std::scientific
          << std::setprecision(3) << g.worst_margin << std::defaultfloat << '\n';
    }
    return report.passed() ? kExitOk : kExitRuntime;
  }
  const ResultMatrix table = o.matrix.empty() ? reference_accuracy_table() : ResultMatrix::read_csv(fs::path(o.matrix));
  const auto check = verify_reference_statistics(table);
  out << std::fixed << std::setprecision(3);
  const auto expected = reference_mean_ranks();
  for (std::size_t j = 0; j < check.result.mean_ranks.size() && j < expected.size(); ++j) {
    out << "  " << std::left << std::setw(12) << reference_accuracy_table().methods[j] << " mean rank "
        << check.result.mean_ranks[j] << " (expected " << expected[j] << ")\n";
  }
  out << std::setprecision(4) << "Iman-Davenport p = " << check.result.p_value
      << ", minimum mean-rank difference " << std::setprecision(3) << check.result.critical_difference << '\n';
  for (const auto& f : check.failures) out << "FAIL " << f << '\n';
  out << (check.passed ? "PASS stats\n" : "FAIL stats\n");
  return check.passed ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"geovote: geometric vote aggregation for online ensembles"};
  app.require_subcommand(1);
  Options o;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON run configuration")->required();
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--limit", o.limit, "instances per run");
    cmd->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  };

  auto* generate = app.add_subcommand("generate", "materialise a stream as CSV");
  add_run_flags(generate);
  generate->add_option("--count", o.count, "number of records")->required();
  generate->get_option("--out")->description("output CSV path");

  auto* sweep = app.add_subcommand("sweep", "ensemble-size sweep under mv and wmv");
  add_run_flags(sweep);

  auto* diversity = app.add_subcommand("diversity", "run a diversity scenario");
  add_run_flags(diversity);

  auto* friedman = app.add_subcommand("friedman", "Friedman test over a result-matrix CSV");
  friedman->add_option("--input,--config", o.input, "matrix CSV: header of methods, first column datasets");
  friedman->add_option("--alpha", o.alpha, "significance level");
  friedman->add_option("--threshold", o.threshold, "override the minimum mean-rank difference");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", o.suite, "theorems | stats")->required()->check(CLI::IsMember({"theorems", "stats"}));
  verify->add_option("--seed", o.seed, "seed for the randomised suite");
  verify->add_option("--cases", o.cases, "cases per theorem group");
  verify->add_option("--matrix", o.matrix, "accuracy table CSV to check instead of the embedded one");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (generate->parsed()) return cmd_generate(*generate, o, out);
    if (sweep->parsed()) return cmd_sweep(*sweep, o, out);
    if (diversity->parsed()) return cmd_diversity(*diversity, o, out);
    if (friedman->parsed()) return cmd_friedman(o, *friedman, out);
    if (verify->parsed()) return cmd_verify(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace geovote::cli

#include "cifboot/cli/app.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cifboot/cli/format.hpp"
#include "cifboot/data_model.hpp"
#include "cifboot/error.hpp"
#include "cifboot/estimators.hpp"
#include "cifboot/parallel.hpp"
#include "cifboot/resampling.hpp"
#include "cifboot/rng.hpp"
#include "cifboot/simulation.hpp"
#include "cifboot/two_sample.hpp"

namespace cifboot::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
};

struct CsvOptions {
  std::string entry = "entry";
  std::string exit = "exit";
  std::string status = "status";
  long censored = 0;
  long cause1 = 1;
  long cause2 = 2;

  CsvFormat format() const { return {entry, exit, status, censored, cause1, cause2}; }
};

void add_csv_options(CLI::App& cmd, CsvOptions& csv) {
  cmd.add_option("--entry-col", csv.entry, "entry (left-truncation) column; absent column means none")
      ->capture_default_str();
  cmd.add_option("--exit-col", csv.exit, "exit time column")->capture_default_str();
  cmd.add_option("--status-col", csv.status, "status column")->capture_default_str();
  cmd.add_option("--censored-code", csv.censored, "status value meaning censored")->capture_default_str();
  cmd.add_option("--cause1-code", csv.cause1, "status value for the cause of interest")->capture_default_str();
  cmd.add_option("--cause2-code", csv.cause2, "status value for the competing cause")->capture_default_str();
}

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

json versions() {
  return {{"cifboot", CIFBOOT_VERSION},
          {"compiler", __VERSION__},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

/// Resolved options as flat key=value lines, readable back through --config.
std::string resolved_config(const CLI::App& cmd, std::optional<std::uint64_t> seed) {
  std::string text;
  for (const auto* opt : cmd.get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    if (name == "seed") {
      if (seed) text += "seed=" + std::to_string(*seed) + "\n";
      continue;
    }
    const auto values = opt->results();
    if (values.empty()) {
      if (opt->get_type_size() == 0) continue;  // unset flag
      const auto fallback = opt->get_default_str();
      if (fallback.empty()) continue;
      text += name + "=" + fallback + "\n";
      continue;
    }
    if (opt->get_type_size() == 0) {
      text += name + "=true\n";
    } else if (values.size() == 1) {
      text += name + "=" + values.front() + "\n";
    } else {
      text += name + "=[";
      for (std::size_t k = 0; k < values.size(); ++k) text += (k ? "," : "") + values[k];
      text += "]\n";
    }
  }
  return text;
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    body_["command"] = std::move(command);
    body_["arguments"] = args;
  }

  void output(const fs::path& path) { outputs_.push_back(path.string()); }

  void write(const fs::path& dir, const CLI::App& cmd, std::optional<std::uint64_t> seed) {
    const auto config_path = dir / "resolved.conf";
    write_text(config_path, resolved_config(cmd, seed));
    output(config_path);
    json config = json::object();
    std::istringstream lines(resolved_config(cmd, seed));
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find('=');
      config[line.substr(0, eq)] = line.substr(eq + 1);
    }
    body_["config"] = std::move(config);
    body_["seed"] = seed ? json(*seed) : json(nullptr);
    body_["versions"] = versions();
    body_["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto path = dir / "manifest.json";
    outputs_.push_back(path.string());
    body_["outputs"] = outputs_;
    write_text(path, body_.dump(2) + "\n");
  }

 private:
  json body_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);  // JSON has no infinities
}

json to_json(const TestResult& r) {
  json j;
  j["method"] = r.method;
  j["statistic"] = number(r.statistic);
  j["variance"] = number(r.variance);
  j["studentized"] = number(r.studentized);
  j["critical_value"] = number(r.critical_value);
  j["p_value"] = number(r.p_value);
  j["decision"] = r.reject ? "reject" : "retain";
  j["degenerate_variance"] = r.degenerate_variance;
  j["interval"] = {{"lower", r.interval.lower}, {"upper", r.interval.upper},
                   {"truncated", r.interval.truncated}};
  if (r.method != "asymptotic") {
    j["B"] = r.B;
    j["degenerate_replicates"] = r.degenerate_replicates;
    j["truncated_replicate_variances"] = r.truncated_replicate_variances;
  }
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const MomentEstimate& m) {
  json j{{"value", number(m.value)}, {"standard_error", number(m.standard_error)}};
  if (m.target) j["target"] = number(*m.target);
  return j;
}

json to_json(const WeightMomentReport& r) {
  json j{{"scheme", r.scheme},
         {"m", r.m},
         {"draws", r.draws},
         {"max_centered", to_json(r.max_centered)},
         {"centered_variance", to_json(r.centered_variance)},
         {"fourth_moment", to_json(r.fourth_moment)}};
  if (r.cross_211) j["cross_211"] = to_json(*r.cross_211);
  if (r.cross_1111) j["cross_1111"] = to_json(*r.cross_1111);
  if (r.multinomial_pair) j["multinomial_pair"] = to_json(*r.multinomial_pair);
  if (r.multinomial_quad) j["multinomial_quad"] = to_json(*r.multinomial_quad);
  return j;
}

json to_json(const MonteCarloReport& r) {
  const auto& c = r.config;
  json methods = json::object();
  for (const auto& m : r.methods) {
    methods[m.method] = {{"rejections", m.rejections},
                         {"rate", m.rate},
                         {"standard_error", m.standard_error},
                         {"errors", m.errors}};
  }
  return {{"suite", c.suite},
          {"cell", c.cell},
          {"model1", c.model1.describe()},
          {"model2", c.model2.describe()},
          {"c", c.model2.c},
          {"n1", c.n1},
          {"n2", c.n2},
          {"l1", c.censor1},
          {"l2", c.censor2},
          {"t1", c.t1},
          {"t2", c.t2},
          {"alpha", c.alpha},
          {"nsim", c.n_sim},
          {"B", c.B},
          {"seed", c.seed},
          {"methods", std::move(methods)},
          {"truncated_intervals", r.truncated_intervals}};
}

// --- commands --------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  CsvOptions csv;
  std::vector<double> zeta_grid;
};

void cmd_estimate(const EstimateArgs& a, const Common& common, const CLI::App& cmd,
                  Manifest& manifest, std::ostream& out) {
  const auto panel = compile_panel(ingest_csv(a.input, a.csv.format()));
  const fs::path dir = common.out_dir;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    manifest.output(dir / name);
    out << (dir / name).string() << "\n";
  };
  emit("cif1.csv", step_function_csv(aalen_johansen(panel, 1)));
  emit("cif2.csv", step_function_csv(aalen_johansen(panel, 2)));
  emit("km.csv", step_function_csv(kaplan_meier(panel)));
  if (!a.zeta_grid.empty()) {
    const auto surface = zeta_hat(panel, a.zeta_grid);
    std::string text = "s";
    for (const double g : surface.grid()) text += "," + format_number(g);
    text += "\n";
    for (std::size_t i = 0; i < surface.size(); ++i) {
      text += format_number(surface.grid()[i]);
      for (std::size_t k = 0; k < surface.size(); ++k) text += "," + format_number(surface.at(i, k));
      text += "\n";
    }
    emit("zeta.csv", text);
  }
  manifest.write(dir, cmd, std::nullopt);
}

struct TestArgs {
  std::string group1;
  std::string group2;
  CsvOptions csv;
  std::string method = "efron";
  std::size_t B = 999;
  double alpha = 0.05;
  double t1 = 0.0;
  double t2 = 1.5;
  std::string rho;
  bool no_clip = false;
  bool replicates = false;
};

void cmd_test(const TestArgs& a, const Common& common, const CLI::App& cmd, Manifest& manifest,
              std::ostream& out) {
  const auto panel1 = compile_panel(ingest_csv(a.group1, a.csv.format()));
  const auto panel2 = compile_panel(ingest_csv(a.group2, a.csv.format()));

  TestConfig config;
  config.t1 = a.t1;
  config.t2 = a.t2;
  config.alpha = a.alpha;
  config.B = a.B;
  config.seed = common.seed.value();
  config.workers = common.workers;
  config.clip_to_support = !a.no_clip;
  config.keep_replicates = a.replicates;
  if (!a.rho.empty()) {
    auto [starts, values] = read_step_table(a.rho);
    const double initial = values.front();
    starts.erase(starts.begin());
    values.erase(values.begin());
    config.rho = RhoFunction(initial, std::move(starts), std::move(values));
  }

  TestResult result;
  if (a.method == "asymptotic") {
    result = test_phi_n(panel1, panel2, config);
  } else {
    config.scheme = WeightScheme::from_name(a.method == "wild" ? "normal" : a.method);
    result = test_phi_star(panel1, panel2, config);
  }

  const fs::path dir = common.out_dir;
  const auto text = to_json(result).dump(2) + "\n";
  write_text(dir / "result.json", text);
  manifest.output(dir / "result.json");
  if (a.replicates && !result.replicates.empty()) {
    std::string csv = "replicate,studentized,variance\n";
    for (std::size_t b = 0; b < result.replicates.size(); ++b) {
      csv += std::to_string(b) + "," + format_number(result.replicates[b]) + "," +
             format_number(result.replicate_variances[b]) + "\n";
    }
    write_text(dir / "replicates.csv", csv);
    manifest.output(dir / "replicates.csv");
  }
  manifest.write(dir, cmd, common.seed);
  out << text;
}

struct SimulateArgs {
  std::string suite;
  std::size_t nsim = 1000;
  std::size_t B = 999;
  double alpha = 0.05;
  std::string cells;
  bool no_clip = false;
};

void cmd_simulate(const SimulateArgs& a, const Common& common, const CLI::App& cmd,
                  Manifest& manifest, std::ostream& out) {
  const auto suite = parse_suite(a.suite);
  SuiteOverrides overrides;
  overrides.n_sim = a.nsim;
  overrides.B = a.B;
  overrides.alpha = a.alpha;
  overrides.seed = common.seed.value();
  overrides.cells = a.cells;
  overrides.clip_to_support = !a.no_clip;
  const auto reports = table_suite(suite, overrides, common.workers);

  const bool with_c = suite == Suite::Table2;
  std::string csv = with_c ? "c,n1,n2,l1,l2,phi_n,phi_W,phi_E\n" : "n1,n2,l1,l2,phi_n,phi_W,phi_E\n";
  json list = json::array();
  for (const auto& r : reports) {
    const auto& c = r.config;
    if (with_c) csv += format_number(c.model2.c) + ",";
    csv += std::to_string(c.n1) + "," + std::to_string(c.n2) + "," + format_number(c.censor1) + "," +
           format_number(c.censor2);
    for (const auto& m : r.methods) csv += "," + format_number(m.rate);
    csv += "\n";
    list.push_back(to_json(r));
  }
  const fs::path dir = common.out_dir;
  const std::string stem(suite_name(suite));
  write_text(dir / (stem + ".csv"), csv);
  write_text(dir / (stem + ".json"), json{{"suite", stem}, {"reports", list}}.dump(2) + "\n");
  manifest.output(dir / (stem + ".csv"));
  manifest.output(dir / (stem + ".json"));
  manifest.write(dir, cmd, common.seed);
  out << csv;
}

struct WeightArgs {
  std::string scheme = "efron";
  std::size_t m = 100;
  std::size_t draws = 100000;
};

void cmd_validate_weights(const WeightArgs& a, const Common& common, const CLI::App& cmd,
                          Manifest& manifest, std::ostream& out) {
  Rng rng(derive_seed(common.seed.value(), {role_id(StreamRole::Moments)}));
  const auto report = validate_weight_conditions(WeightScheme::from_name(a.scheme), a.m, a.draws, rng);
  const fs::path dir = common.out_dir;
  const auto text = to_json(report).dump(2) + "\n";
  write_text(dir / "weights.json", text);
  manifest.output(dir / "weights.json");
  manifest.write(dir, cmd, common.seed);
  out << text;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

/// Replaces `--config FILE` by the file's key=value pairs as `--key value`
/// arguments, skipping keys that also appear on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InputError("--config needs a file name");
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!file) return kept;

  std::ifstream in(*file);
  if (!in) throw InputError("cannot open config file '" + *file + "'");
  auto given = [&](const std::string& key) {
    for (const auto& a : kept) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + " is not key=value");
    }
    const auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '[')) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || given(key)) continue;
    if (value == "true") {
      kept.push_back("--" + key);
    } else if (value != "false") {
      kept.push_back("--" + key);
      kept.push_back(value);
    }
  }
  return kept;
}

void add_common(CLI::App& cmd, Common& common, std::string& config, bool seeded) {
  cmd.add_option("--config", config, "flat key=value file; command-line flags take precedence");
  cmd.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  if (seeded) {
    cmd.add_option("--seed", common.seed, "master seed (default: drawn from system entropy)");
    cmd.add_option("--workers", common.workers, "worker threads (0 = available parallelism)")
        ->capture_default_str();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-sample tests for cumulative incidence functions", "cifboot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CIFBOOT_VERSION);

  Common common;
  std::string config_file;  // consumed by expand_config before parsing

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Aalen-Johansen, Kaplan-Meier and covariance estimates");
  add_common(*estimate, common, config_file, false);
  estimate->add_option("--input", est.input, "CSV with entry/exit/status columns")->required();
  add_csv_options(*estimate, est.csv);
  estimate->add_option("--zeta-grid", est.zeta_grid, "times at which to tabulate the covariance estimate")
      ->delimiter(',');

  TestArgs tst;
  auto* test = app.add_subcommand("test", "Compare the cause-1 cumulative incidence of two groups");
  add_common(*test, common, config_file, true);
  test->add_option("--group1", tst.group1, "CSV for group 1")->required();
  test->add_option("--group2", tst.group2, "CSV for group 2")->required();
  add_csv_options(*test, tst.csv);
  test->add_option("--method", tst.method, "asymptotic | efron | wild | normal | poisson | rademacher")
      ->check(CLI::IsMember({"asymptotic", "efron", "wild", "normal", "poisson", "rademacher"}))
      ->capture_default_str();
  test->add_option("--B", tst.B, "bootstrap replicates")->capture_default_str();
  test->add_option("--alpha", tst.alpha, "nominal level")->capture_default_str();
  test->add_option("--t1", tst.t1, "lower end of the comparison interval")->capture_default_str();
  test->add_option("--t2", tst.t2, "upper end of the comparison interval")->capture_default_str();
  test->add_option("--rho", tst.rho, "CSV table start,value of a piecewise-constant weight");
  test->add_flag("--no-clip", tst.no_clip, "keep [t1, t2] even beyond the data support");
  test->add_flag("--replicates", tst.replicates, "write replicates.csv");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo size and power tables");
  add_common(*simulate, common, config_file, true);
  simulate->add_option("--suite", sim.suite, "table1 | table2")->required();
  simulate->add_option("--nsim", sim.nsim, "datasets per cell")->capture_default_str();
  simulate->add_option("--B", sim.B, "bootstrap replicates")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "nominal level")->capture_default_str();
  simulate->add_option("--cells", sim.cells, "e.g. \"c=0.5,n=100\"; ';' separates alternatives");
  simulate->add_flag("--no-clip", sim.no_clip, "keep [t1, t2] even beyond the data support");

  WeightArgs wts;
  auto* weights = app.add_subcommand("validate-weights", "Monte Carlo check of bootstrap weight moments");
  add_common(*weights, common, config_file, true);
  weights->add_option("--scheme", wts.scheme, "efron | normal | poisson | rademacher | bayesian")
      ->capture_default_str();
  weights->add_option("--m", wts.m, "weight vector length")->capture_default_str();
  weights->add_option("--draws", wts.draws, "Monte Carlo draws")->capture_default_str();

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  std::vector<const char*> argv{"cifboot"};
  for (const auto& a : expanded) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (!common.seed) common.seed = entropy_seed();
    fs::create_directories(common.out_dir);
    if (estimate->parsed()) {
      Manifest manifest("estimate", args);
      cmd_estimate(est, common, *estimate, manifest, out);
    } else if (test->parsed()) {
      Manifest manifest("test", args);
      cmd_test(tst, common, *test, manifest, out);
    } else if (simulate->parsed()) {
      Manifest manifest("simulate", args);
      cmd_simulate(sim, common, *simulate, manifest, out);
    } else {
      Manifest manifest("validate-weights", args);
      cmd_validate_weights(wts, common, *weights, manifest, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace cifboot::cli

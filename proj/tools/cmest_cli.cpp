// cmest command-line front-end. Drives everything through the shared
// library's C API; the only work done here is argument/config wrangling,
// file output and the run manifest.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmest.h"

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultSeed = "1729";
constexpr const char* kDefaultMethods = "cbpe,naive_atc,cm_atc,naive_doc,cm_doc";

[[noreturn]] void die(cmest_status status) {
  std::cerr << "error: " << cmest_last_error() << "\n";
  std::exit(status == CMEST_ERR_INTERNAL ? 1 : 2);
}

[[noreturn]] void die(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(2);
}

void check(cmest_status status) {
  if (status != CMEST_OK) die(status);
}

std::string take_string(char* owned) {
  std::string out = owned ? owned : "";
  cmest_string_free(owned);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    die("option '" + key + "': not a number: " + value);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    die("option '" + key + "': not an unsigned integer: " + value);
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die("cannot write " + path.string());
  out << content;
  if (!out) die("write failed: " + path.string());
}

// Reads `key=value` lines, or the "config" object of a manifest.json, so
// any run can be repeated from the manifest it wrote.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      die(path + ": " + e.what());
    }
    if (!obj.contains("config") || !obj["config"].is_object())
      die(path + ": manifest lacks a 'config' object");
    for (auto it = obj["config"].begin(); it != obj["config"].end(); ++it)
      out[it.key()] =
          it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      die(path + ":" + std::to_string(lineno) + ": expected key=value");
    out[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return out;
}

// One subcommand's option set. Flags mirror config-file keys one-to-one
// (dashes for underscores); precedence is flag > config file > default.
class Options {
 public:
  Options(CLI::App* cmd, std::string subcommand)
      : cmd_(cmd), subcommand_(std::move(subcommand)) {
    cmd_->add_option("--config", config_path_,
                     "key=value config file or a manifest.json; flags win on "
                     "conflict");
    cmd_->add_option("--out", out_dir_, "output directory")->required();
  }

  void add(const std::string& key, const std::string& def,
           const std::string& help) {
    order_.push_back(key);
    defaults_[key] = def;
    std::string flag = "--" + key;
    for (auto& c : flag)
      if (c == '_') c = '-';
    opts_[key] = cmd_->add_option(flag, storage_[key], help);
  }

  void resolve() {
    resolved_ = defaults_;
    if (!config_path_.empty()) {
      for (const auto& [key, value] : read_config_file(config_path_)) {
        if (!defaults_.count(key))
          die(config_path_ + ": unknown key '" + key + "' for subcommand " +
              subcommand_);
        resolved_[key] = value;
      }
    }
    for (const auto& [key, opt] : opts_)
      if (opt->count() > 0) resolved_[key] = storage_[key];
  }

  const std::string& get(const std::string& key) const {
    return resolved_.at(key);
  }
  double get_double(const std::string& key) const {
    return parse_double(key, get(key));
  }
  std::uint64_t get_u64(const std::string& key) const {
    return parse_u64(key, get(key));
  }
  bool has(const std::string& key) const { return !get(key).empty(); }

  const fs::path out_dir() const { return out_dir_; }
  const std::string& subcommand() const { return subcommand_; }

  std::string config_text(const std::vector<std::string>& keys) const {
    std::string out;
    for (const auto& key : keys) {
      if (!has(key)) continue;
      out += key + "=" + get(key) + "\n";
    }
    return out;
  }

  void write_manifest() const {
    nlohmann::ordered_json manifest;
    manifest["artifact"] = "cmest";
    manifest["version"] = cmest_version();
    manifest["subcommand"] = subcommand_;
    nlohmann::ordered_json config;
    for (const auto& key : order_) config[key] = resolved_.at(key);
    manifest["config"] = std::move(config);
    write_file(out_dir() / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  CLI::App* cmd_;
  std::string subcommand_;
  std::string config_path_;
  std::string out_dir_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> defaults_;
  std::map<std::string, std::string> storage_;
  std::map<std::string, CLI::Option*> opts_;
  std::map<std::string, std::string> resolved_;
};

struct ScoreSetHandle {
  cmest_scoreset* ptr = nullptr;
  ~ScoreSetHandle() { cmest_scoreset_free(ptr); }
};

void load_set(const std::string& path, const std::string& format,
              double threshold, ScoreSetHandle& out) {
  check(cmest_scoreset_load(path.c_str(), format.c_str(), threshold, &out.ptr));
}

void add_generator_options(Options& opts, bool with_n = true) {
  if (with_n) opts.add("n", "1000", "number of records to generate");
  opts.add("prevalence", "0.5", "positive-class prevalence in (0,1)");
  opts.add("latent", "uniform", "latent law: uniform or beta:a,b");
  opts.add("distortion", "1",
           "score distortion (multiplies the true logit; 1 = calibrated)");
  opts.add("threshold", "0.5", "decision threshold");
  opts.add("groups", "none", "none or majority_minority");
  opts.add("majority_latent", "beta:0.5,0.5", "majority-group latent law");
  opts.add("majority_distortion", "1", "majority-group distortion");
  opts.add("minority_latent", "beta:5,5", "minority-group latent law");
  opts.add("minority_distortion", "2", "minority-group distortion");
  opts.add("majority_fraction", "0.5",
           "majority share of generated records when groups are on");
}

const std::vector<std::string> kGeneratorKeys = {
    "n", "prevalence", "latent", "distortion", "threshold", "groups",
    "majority_latent", "majority_distortion", "minority_latent",
    "minority_distortion", "majority_fraction"};

// Builds a generator config for one pool of a simulate run, overriding n,
// seed and group handling.
std::string generator_text(const Options& opts, const std::string& n,
                           std::uint64_t seed, const std::string& latent,
                           const std::string& distortion) {
  std::string out;
  out += "n=" + n + "\n";
  out += "prevalence=" + opts.get("prevalence") + "\n";
  out += "latent=" + latent + "\n";
  out += "distortion=" + distortion + "\n";
  out += "threshold=" + opts.get("threshold") + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  return out;
}

std::string realized_csv(cmest_scoreset* test, int ace_bins) {
  cmest_report* report = nullptr;
  check(cmest_realized_report(test, &report));
  std::unique_ptr<cmest_report, decltype(&cmest_report_free)> guard(
      report, cmest_report_free);
  char* csv = nullptr;
  check(cmest_report_to_csv(report, &csv));
  std::string text = take_string(csv);
  double rbs = 0.0, ace = 0.0;
  check(cmest_root_brier_score(test, &rbs));
  check(cmest_adaptive_calibration_error(test, ace_bins, &ace));
  const auto newline = text.find('\n');
  std::string header = text.substr(0, newline);
  std::string row = text.substr(newline + 1);
  if (!row.empty() && row.back() == '\n') row.pop_back();
  return header + ",rbs,ace\n" + row + "," + fmt_double(rbs) + "," +
         fmt_double(ace) + "\n";
}

// ---- estimate ------------------------------------------------------------

int run_estimate(Options& opts) {
  opts.resolve();
  fs::create_directories(opts.out_dir());
  const double threshold = opts.get_double("threshold");

  ScoreSetHandle val, test;
  load_set(opts.get("val"), opts.get("format"), threshold, val);
  load_set(opts.get("test"), opts.get("format"), threshold, test);

  const std::string calibration = opts.get("calibration");
  cmest_tempfit* fit = nullptr;
  if (!opts.get("calibration_file").empty()) {
    check(cmest_tempfit_load(opts.get("calibration_file").c_str(), &fit));
  } else if (calibration != "none") {
    check(cmest_fit_temperature(val.ptr, calibration.c_str(), &fit));
  }
  if (fit) {
    ScoreSetHandle cal_val, cal_test;
    check(cmest_apply_temperature(val.ptr, fit, &cal_val.ptr));
    check(cmest_apply_temperature(test.ptr, fit, &cal_test.ptr));
    std::swap(val.ptr, cal_val.ptr);
    std::swap(test.ptr, cal_test.ptr);
    check(cmest_tempfit_save(fit, (opts.out_dir() / "calibration.json").c_str()));
    cmest_tempfit_free(fit);
  }

  cmest_batch* batch = nullptr;
  check(cmest_estimate_all(val.ptr, test.ptr, opts.get("methods").c_str(),
                           &batch));
  std::unique_ptr<cmest_batch, decltype(&cmest_batch_free)> guard(
      batch, cmest_batch_free);
  for (size_t i = 0; i < cmest_batch_size(batch); ++i) {
    const char* message = nullptr;
    if (cmest_batch_error(batch, i, &message))
      std::cerr << "warning: " << cmest_batch_method(batch, i) << ": "
                << message << "\n";
  }

  char* text = nullptr;
  check(cmest_batch_to_csv(batch, &text));
  write_file(opts.out_dir() / "estimates.csv", take_string(text));
  check(cmest_batch_confusion_csv(batch, &text));
  write_file(opts.out_dir() / "confusion.csv", take_string(text));
  if (opts.get("json") == "1") {
    check(cmest_batch_to_json(batch, &text));
    write_file(opts.out_dir() / "estimates.json", take_string(text));
  }

  if (cmest_scoreset_labelled(test.ptr)) {
    const int ace_bins = static_cast<int>(opts.get_u64("ace_bins"));
    write_file(opts.out_dir() / "realized.csv", realized_csv(test.ptr, ace_bins));
    check(cmest_batch_mae_csv(batch, test.ptr, &text));
    write_file(opts.out_dir() / "mae.csv", take_string(text));
  }
  opts.write_manifest();
  return 0;
}

// ---- simulate --------------------------------------------------------------

int run_simulate(Options& opts, int jobs) {
  opts.resolve();
  fs::create_directories(opts.out_dir());
  const std::uint64_t seed = opts.get_u64("seed");
  const std::string kind = opts.get("kind");
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw == 0 ? 1 : static_cast<int>(hw);
  }

  ScoreSetHandle val, pool_a, pool_b;
  const bool file_backed = opts.has("val") || opts.has("pool");
  if (file_backed) {
    if (!opts.has("val") || !opts.has("pool"))
      die("simulate needs both --val and --pool (or neither, for a "
          "generator-backed run)");
    const double threshold = opts.get_double("threshold");
    load_set(opts.get("val"), opts.get("format"), threshold, val);
    load_set(opts.get("pool"), opts.get("format"), threshold, pool_a);
    if (kind == "covariate") {
      if (!opts.has("pool_minority"))
        die("covariate simulation needs --pool-minority");
      load_set(opts.get("pool_minority"), opts.get("format"), threshold, pool_b);
    }
  } else if (kind == "covariate") {
    // Per-group pools plus a validation set mixed at val_majority_fraction.
    const std::string pool_n = opts.get("pool_n");
    check(cmest_generate(
        generator_text(opts, pool_n, cmest_derive_seed(seed, 102, 1),
                       opts.get("majority_latent"),
                       opts.get("majority_distortion"))
            .c_str(),
        &pool_a.ptr));
    check(cmest_generate(
        generator_text(opts, pool_n, cmest_derive_seed(seed, 103, 1),
                       opts.get("minority_latent"),
                       opts.get("minority_distortion"))
            .c_str(),
        &pool_b.ptr));
    std::string val_text =
        generator_text(opts, opts.get("val_n"), cmest_derive_seed(seed, 104, 1),
                       opts.get("latent"), opts.get("distortion"));
    val_text += "groups=majority_minority\n";
    val_text += "majority_latent=" + opts.get("majority_latent") + "\n";
    val_text += "majority_distortion=" + opts.get("majority_distortion") + "\n";
    val_text += "minority_latent=" + opts.get("minority_latent") + "\n";
    val_text += "minority_distortion=" + opts.get("minority_distortion") + "\n";
    val_text += "majority_fraction=" + opts.get("val_majority_fraction") + "\n";
    check(cmest_generate(val_text.c_str(), &val.ptr));
  } else {
    check(cmest_generate(
        generator_text(opts, opts.get("pool_n"), cmest_derive_seed(seed, 100, 1),
                       opts.get("latent"), opts.get("distortion"))
            .c_str(),
        &pool_a.ptr));
    check(cmest_generate(
        generator_text(opts, opts.get("val_n"), cmest_derive_seed(seed, 101, 1),
                       opts.get("latent"), opts.get("distortion"))
            .c_str(),
        &val.ptr));
  }

  std::string sweep_text;
  sweep_text += "kind=" + kind + "\n";
  if (opts.has("axis")) sweep_text += "axis=" + opts.get("axis") + "\n";
  sweep_text += "reps=" + opts.get("reps") + "\n";
  sweep_text += "n=" + opts.get("n") + "\n";
  sweep_text += "seed=" + std::to_string(seed) + "\n";
  sweep_text += "ace_bins=" + opts.get("ace_bins") + "\n";
  sweep_text += "methods=" + opts.get("methods") + "\n";
  if (opts.has("ref_prevalence"))
    sweep_text += "ref_prevalence=" + opts.get("ref_prevalence") + "\n";

  cmest_sweep* sweep = nullptr;
  check(cmest_run_sweep(sweep_text.c_str(), val.ptr, pool_a.ptr, pool_b.ptr,
                        jobs, &sweep));
  std::unique_ptr<cmest_sweep, decltype(&cmest_sweep_free)> guard(
      sweep, cmest_sweep_free);
  char* text = nullptr;
  check(cmest_sweep_to_csv(sweep, &text));
  write_file(opts.out_dir() / "sweep.csv", take_string(text));
  check(cmest_sweep_summary_csv(sweep, &text));
  write_file(opts.out_dir() / "sweep_summary.csv", take_string(text));
  opts.write_manifest();
  return 0;
}

// ---- generate ----------------------------------------------------------------

int run_generate(Options& opts) {
  opts.resolve();
  fs::create_directories(opts.out_dir());
  std::string text = opts.config_text(kGeneratorKeys);
  text += "seed=" + opts.get("seed") + "\n";
  ScoreSetHandle set;
  check(cmest_generate(text.c_str(), &set.ptr));
  check(cmest_scoreset_save_csv(set.ptr, (opts.out_dir() / "scores.csv").c_str()));
  opts.write_manifest();
  return 0;
}

// ---- calibrate -----------------------------------------------------------------

int run_calibrate(Options& opts) {
  opts.resolve();
  fs::create_directories(opts.out_dir());
  ScoreSetHandle val;
  load_set(opts.get("val"), opts.get("format"), opts.get_double("threshold"), val);
  cmest_tempfit* fit = nullptr;
  check(cmest_fit_temperature(val.ptr, opts.get("mode").c_str(), &fit));
  std::unique_ptr<cmest_tempfit, decltype(&cmest_tempfit_free)> guard(
      fit, cmest_tempfit_free);
  check(cmest_tempfit_save(fit, (opts.out_dir() / "calibration.json").c_str()));
  if (opts.has("apply")) {
    ScoreSetHandle raw, calibrated;
    load_set(opts.get("apply"), opts.get("format"), opts.get_double("threshold"),
             raw);
    check(cmest_apply_temperature(raw.ptr, fit, &calibrated.ptr));
    check(cmest_scoreset_save_csv(calibrated.ptr,
                                  (opts.out_dir() / "calibrated.csv").c_str()));
  }
  opts.write_manifest();
  return 0;
}

// ---- evaluate ------------------------------------------------------------------

int run_evaluate(Options& opts) {
  opts.resolve();
  fs::create_directories(opts.out_dir());
  ScoreSetHandle test;
  load_set(opts.get("test"), opts.get("format"), opts.get_double("threshold"),
           test);
  const int ace_bins = static_cast<int>(opts.get_u64("ace_bins"));
  write_file(opts.out_dir() / "realized.csv", realized_csv(test.ptr, ace_bins));
  double cm[4] = {0, 0, 0, 0};
  check(cmest_realized_confusion(test.ptr, cm));
  write_file(opts.out_dir() / "confusion.csv",
             "method,tp,fp,tn,fn\nrealized," + fmt_double(cm[0]) + "," +
                 fmt_double(cm[1]) + "," + fmt_double(cm[2]) + "," +
                 fmt_double(cm[3]) + "\n");
  if (opts.get("json") == "1") {
    cmest_report* report = nullptr;
    check(cmest_realized_report(test.ptr, &report));
    char* text = nullptr;
    check(cmest_report_to_json(report, &text));
    write_file(opts.out_dir() / "realized.json", take_string(text) + "\n");
    cmest_report_free(report);
  }
  opts.write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"label-free performance estimation for binary classifiers"};
  app.set_version_flag("--version", cmest_version());
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand(
      "estimate", "estimate metrics of an unlabelled test set");
  Options estimate_opts(estimate, "estimate");
  estimate_opts.add("val", "", "labelled validation score file");
  estimate_opts.add("test", "", "test score file (labels optional)");
  estimate_opts.add("format", "csv", "score file format: csv or jsonl");
  estimate_opts.add("threshold", "0.5", "decision threshold");
  estimate_opts.add("methods", kDefaultMethods, "comma-separated methods");
  estimate_opts.add("calibration", "none", "none, ts or csts");
  estimate_opts.add("calibration_file", "",
                    "apply a previously fitted calibration.json");
  estimate_opts.add("ace_bins", "15", "bins for the adaptive calibration error");
  estimate_opts.add("seed", kDefaultSeed, "seed recorded in the manifest");
  estimate_opts.add("json", "0", "also write JSON reports (1 to enable)");

  auto* simulate = app.add_subcommand(
      "simulate", "controlled prevalence/covariate shift sweeps");
  Options simulate_opts(simulate, "simulate");
  simulate_opts.add("kind", "prevalence", "prevalence or covariate");
  simulate_opts.add("axis", "",
                    "shift levels, lo:hi:step or comma list (default "
                    "0.05:0.95:0.05 / 0:1:0.1)");
  simulate_opts.add("reps", "50", "repetitions per level");
  simulate_opts.add("n", "1000", "records per constructed test set");
  simulate_opts.add("seed", kDefaultSeed, "master seed");
  simulate_opts.add("ace_bins", "15", "bins for the adaptive calibration error");
  simulate_opts.add("ref_prevalence", "",
                    "prevalence held fixed in covariate mixes (default: "
                    "validation prevalence)");
  simulate_opts.add("methods", kDefaultMethods, "comma-separated methods");
  simulate_opts.add("val", "", "labelled validation score file");
  simulate_opts.add("pool", "", "labelled pool (majority pool for covariate)");
  simulate_opts.add("pool_minority", "", "labelled minority pool");
  simulate_opts.add("format", "csv", "score file format: csv or jsonl");
  simulate_opts.add("val_n", "10000", "generator-backed validation size");
  simulate_opts.add("pool_n", "10000", "generator-backed pool size");
  simulate_opts.add("val_majority_fraction", "0.8",
                    "majority share of the generated validation set");
  add_generator_options(simulate_opts, /*with_n=*/false);
  int jobs = 0;
  simulate->add_option("--jobs", jobs,
                       "worker threads (0 = auto); does not affect results");

  auto* generate =
      app.add_subcommand("generate", "write a synthetic score file");
  Options generate_opts(generate, "generate");
  add_generator_options(generate_opts);
  generate_opts.add("seed", kDefaultSeed, "generator seed");

  auto* calibrate =
      app.add_subcommand("calibrate", "fit a temperature on labelled scores");
  Options calibrate_opts(calibrate, "calibrate");
  calibrate_opts.add("val", "", "labelled score file to fit on");
  calibrate_opts.add("mode", "ts", "ts (global) or csts (classwise)");
  calibrate_opts.add("format", "csv", "score file format: csv or jsonl");
  calibrate_opts.add("threshold", "0.5", "decision threshold");
  calibrate_opts.add("apply", "", "score file to rewrite with the fit");
  calibrate_opts.add("seed", kDefaultSeed, "seed recorded in the manifest");

  auto* evaluate =
      app.add_subcommand("evaluate", "realized metrics of a labelled set");
  Options evaluate_opts(evaluate, "evaluate");
  evaluate_opts.add("test", "", "labelled score file");
  evaluate_opts.add("format", "csv", "score file format: csv or jsonl");
  evaluate_opts.add("threshold", "0.5", "decision threshold");
  evaluate_opts.add("ace_bins", "15", "bins for the adaptive calibration error");
  evaluate_opts.add("seed", kDefaultSeed, "seed recorded in the manifest");
  evaluate_opts.add("json", "0", "also write JSON reports (1 to enable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (estimate->parsed()) return run_estimate(estimate_opts);
  if (simulate->parsed()) return run_simulate(simulate_opts, jobs);
  if (generate->parsed()) return run_generate(generate_opts);
  if (calibrate->parsed()) return run_calibrate(calibrate_opts);
  if (evaluate->parsed()) return run_evaluate(evaluate_opts);
  return 2;
}

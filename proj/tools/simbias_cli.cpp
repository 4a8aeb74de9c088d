#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "simbias/errors.hpp"
#include "simbias/experiment_config.hpp"
#include "simbias/experiments.hpp"
#include "simbias/report.hpp"
#include "simbias/version.hpp"

namespace {

using namespace simbias;
using namespace simbias::harness;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitInterrupted = 130;

struct Settings {
  std::vector<std::string> config_files;
  std::vector<std::pair<std::string, std::string>> flags;
};

struct Flag {
  const char* key;
  const char* help;
};

constexpr Flag kValueFlags[] = {
    {"n", "string lengths: comma list, a..b:step or a..b:xfactor"},
    {"trials", "trials per n"},
    {"seed", "master seed"},
    {"sigma-w2", "weight variance scale"},
    {"sigma-b2", "bias variance"},
    {"layers", "hidden layers"},
    {"widths", "comma list of hidden widths (default: n for every layer)"},
    {"activation", "relu or tanh"},
    {"out-csv", "per-trial CSV"},
    {"out-json", "JSON summary"},
    {"parallel", "worker threads (0 = all hardware threads)"},
    {"search", "greedy or exact"},
    {"max-steps", "greedy step cap (0 = n)"},
    {"max-h", "exact search radius cap (0 = n)"},
    {"budget", "exact search evaluation budget"},
    {"net", "random, passthrough or weights"},
    {"weights", "SBNW weight file (implies --net weights)"},
    {"overlaps", "gp-check overlaps, comma list"},
    {"z", "normalized output phi(x)/sqrt(Q)"},
    {"a", "distance scale, h = floor(a sqrt(n/ln n))"},
};

void add_common(CLI::App& app, Settings& s) {
  app.add_option_function<std::vector<std::string>>(
         "--config", [&s](const std::vector<std::string>& v) { s.config_files.insert(s.config_files.end(), v.begin(), v.end()); },
         "key = value config file; flags override it")
      ->type_name("FILE");
  for (const Flag& f : kValueFlags) {
    const std::string key = f.key;
    app.add_option_function<std::string>(
        "--" + key, [&s, key](const std::string& v) { s.flags.emplace_back(key, v); }, f.help);
  }
  app.add_option_function<std::string>(
         "--emit-plot-data", [&s](const std::string& v) { s.flags.emplace_back("emit-plot-data", v.empty() ? "-" : v); },
         "write (x, y, yerr) plot data, optionally to PATH")
      ->expected(0, 1)
      ->type_name("[PATH]");
  app.add_flag_callback("--record-timing", [&s] { s.flags.emplace_back("record-timing", "true"); },
                        "fill the micros column with wall time per trial");
}

std::string default_plot_path(const ExperimentConfig& c) {
  if (c.out_csv.empty()) return "plot_data.csv";
  std::filesystem::path p(c.out_csv);
  return (p.parent_path() / (p.stem().string() + ".plot.csv")).string();
}

ExperimentConfig resolve(const Settings& s, std::optional<ExperimentKind> kind) {
  ExperimentConfig c;
  for (const auto& file : s.config_files)
    for (const auto& [k, v] : read_config_file(file)) apply_setting(c, k, v);
  for (const auto& [k, v] : s.flags) apply_setting(c, k, v);
  if (kind) c.kind = *kind;
  if (c.plot_data == "-") c.plot_data = default_plot_path(c);
  return c;
}

int run_kernel(const ExperimentConfig& c) {
  const KernelReport r = kernel_report(c);
  if (!c.out_csv.empty()) {
    std::ofstream out(c.out_csv, std::ios::binary);
    if (!out) throw Error("cannot open " + c.out_csv + " for writing");
    write_csv(out, r.table, {"simbias " + std::string(kVersion), "kind: kernel", "config: " + c.identity().dump()},
              false);
  }
  if (!c.out_json.empty()) {
    std::ofstream out(c.out_json, std::ios::binary);
    out << r.summary.dump(2) << '\n';
  }
  std::cout << r.summary.dump(2) << '\n';
  return 0;
}

int run_theory(const ExperimentConfig& c) {
  const auto j = theory_report(c);
  if (!c.out_json.empty()) {
    std::ofstream out(c.out_json, std::ios::binary);
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_trials(const ExperimentConfig& c) {
  const ExperimentResult r = run_experiment(c, RunOptions{&g_cancel});
  write_outputs(r);
  auto summary = r.summary_json();
  summary.erase("config");
  std::cout << summary.dump(2) << '\n';
  if (r.truncated) {
    std::cerr << "interrupted; partial results written\n";
    return kExitInterrupted;
  }
  return 0;
}

int dispatch(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::Kernel: return run_kernel(c);
    case ExperimentKind::Theory: return run_theory(c);
    default: return run_trials(c);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random deep networks as bit-string classifiers: kernels, boundary distances and theory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(0, 1);

  Settings top;
  add_common(app, top);

  struct Sub {
    const char* name;
    ExperimentKind kind;
    const char* help;
  };
  const Sub subs[] = {
      {"kernel", ExperimentKind::Kernel, "tabulate F_l(t) and report Q, F'(1)"},
      {"theory", ExperimentKind::Theory, "closed-form predictions for given n, z, a"},
      {"closest", ExperimentKind::Closest, "nearest differently classified string from random inputs"},
      {"flips", ExperimentKind::Flips, "random bit-flip walks until the classification changes"},
      {"gp-check", ExperimentKind::GpCheck, "network output covariance versus Q F(t) and GP samples"},
      {"greedy-vs-exact", ExperimentKind::GreedyVsExact, "paired greedy and exhaustive distances"},
  };
  std::vector<Settings> settings(std::size(subs));
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    CLI::App* sub = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(*sub, settings[i]);
    apps.push_back(sub);
  }

  std::string fit_csv;
  std::string fit_model = "auto";
  std::string fit_json_path;
  CLI::App* fit = app.add_subcommand("fit", "recompute per-n means and the scaling fit from a closest/flips CSV");
  fit->add_option("csv", fit_csv, "CSV written by closest or flips")->required();
  fit->add_option("--model", fit_model, "auto, sqrt-n-over-ln-n or linear");
  fit->add_option("--out-json", fit_json_path, "write the result here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (fit->parsed()) {
      std::ifstream in(fit_csv);
      if (!in) throw ConfigError("cannot read " + fit_csv);
      const auto j = refit(read_csv(in), fit_model);
      if (!fit_json_path.empty()) {
        std::ofstream out(fit_json_path, std::ios::binary);
        out << j.dump(2) << '\n';
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (!apps[i]->parsed()) continue;
      Settings merged = top;
      merged.config_files.insert(merged.config_files.end(), settings[i].config_files.begin(),
                                 settings[i].config_files.end());
      merged.flags.insert(merged.flags.end(), settings[i].flags.begin(), settings[i].flags.end());
      return dispatch(resolve(merged, subs[i].kind));
    }
    if (top.config_files.empty()) {
      std::cerr << app.help();
      return kExitConfig;
    }
    return dispatch(resolve(top, std::nullopt));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "weight file error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << " (largest fully searched h = " << e.largest_searched_h() << ")\n";
    return kExitBudget;
  } catch (const NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#include "simbias/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include "simbias/errors.hpp"
#include "simbias/gp_oracle.hpp"
#include "simbias/kernel.hpp"
#include "simbias/network.hpp"
#include "simbias/parallel.hpp"
#include "simbias/search.hpp"
#include "simbias/theory.hpp"
#include "simbias/version.hpp"
#include "simbias/weight_io.hpp"

namespace simbias::harness {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr std::uint64_t kGpPointKey = 0x6770;

double sqrt_n_over_ln_n(double n) { return std::sqrt(n / std::log(n)); }

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// Networks for each (n, trial) according to the configured source.
class NetSupplier {
 public:
  explicit NetSupplier(ExperimentConfig& config) : config_(config) {
    if (config.net == NetSource::WeightsFile) {
      loaded_ = read_weights(std::filesystem::path(config.weights), config.network_for(1));
      const int n = loaded_->input_dim();
      if (config.n_values.empty()) config.n_values = {n};
      if (config.n_values != std::vector<int>{n})
        throw ConfigError("weights file has n = " + std::to_string(n) + " but --n asks for something else");
    }
  }

  DeepNet operator()(int n, std::uint64_t trial) const {
    switch (config_.net) {
      case NetSource::Random: return sample_network(config_.network_for(n), trial);
      case NetSource::Passthrough: return passthrough_network(n);
      case NetSource::WeightsFile: return *loaded_;
    }
    throw ConfigError("unknown network source");
  }

 private:
  const ExperimentConfig& config_;
  std::optional<DeepNet> loaded_;
};

BitString random_input(const ExperimentConfig& config, int n, std::uint64_t trial) {
  Engine rng = make_engine(config.seed, Stream::Input, {static_cast<std::uint64_t>(n), trial});
  return BitString::random(n, rng);
}

KernelProfile profile_for(const ExperimentConfig& config, int n) {
  return KernelProfile::build(KernelParams::from(config.network_for(n)));
}

std::int64_t elapsed_micros(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
}

Cell optional_cell(const std::optional<int>& v) {
  if (v) return static_cast<std::int64_t>(*v);
  return std::monostate{};
}

/// Trials laid out as slot n_index * trials + trial.
struct Sweep {
  std::size_t trials = 0;
  std::size_t count() const { return n_values.size() * trials; }
  int n_of(std::size_t slot) const { return n_values[slot / trials]; }
  std::uint64_t trial_of(std::size_t slot) const { return slot % trials; }
  std::vector<int> n_values;
};

bool any_missing(const std::vector<char>& done) {
  return std::find(done.begin(), done.end(), 0) != done.end();
}

json fit_json(const std::string& model, const std::optional<stats::FitResult>& fit) {
  json j;
  j["model"] = model;
  if (fit) {
    j["coefficient"] = fit->coefficient;
    j["stderr"] = fit->std_error;
    j["r2"] = fit->r_squared;
    j["points"] = fit->points;
    j["max_abs_residual"] = fit->max_abs_residual;
    j["rms_residual"] = fit->rms_residual;
  } else {
    j["coefficient"] = nullptr;
    j["stderr"] = nullptr;
    j["r2"] = nullptr;
  }
  return j;
}

/// Per-n mean of a column (NA cells skipped) and the through-origin fit of the means against x(n).
void aggregate_distances(ExperimentResult& result, std::size_t value_col, double (*x_of)(double)) {
  std::map<int, std::vector<double>> by_n;
  for (int n : result.config.n_values) by_n[n];
  for (const auto& row : result.table.rows) {
    const int n = static_cast<int>(std::get<std::int64_t>(row[0]));
    if (const auto* v = std::get_if<std::int64_t>(&row[value_col])) by_n[n].push_back(static_cast<double>(*v));
  }
  std::vector<double> xs, ys;
  result.plot.columns = {"x", "y", "yerr"};
  for (const auto& [n, values] : by_n) {
    if (values.empty()) continue;
    PerN p;
    p.n = n;
    p.summary = stats::mean_stderr(values);
    result.per_n.push_back(p);
    xs.push_back(x_of(n));
    ys.push_back(p.summary.mean);
    result.plot.rows.push_back({xs.back(), p.summary.mean, p.summary.std_error});
  }
  if (!xs.empty()) result.fit = stats::fit_through_origin(xs, ys);
}

double identity_x(double n) { return n; }

void set_censored(ExperimentResult& result, const std::map<int, std::size_t>& censored) {
  for (auto& p : result.per_n) {
    const auto it = censored.find(p.n);
    p.censored = it == censored.end() ? 0 : it->second;
  }
}

struct BoundaryTrial {
  SearchResult search;
  std::int64_t micros = 0;
};

ExperimentResult start(const ExperimentConfig& config, ExperimentKind kind) {
  config.validate();
  ExperimentResult r;
  r.config = config;
  r.config.kind = kind;
  return r;
}

}  // namespace

std::vector<std::string> ExperimentResult::provenance() const {
  return {
      "simbias " + std::string(kVersion),
      "kind: " + to_string(config.kind),
      "seed: " + std::to_string(config.seed),
      "config_hash: " + hex64(config.hash()),
      "config: " + config.identity().dump(),
  };
}

json ExperimentResult::summary_json() const {
  json j;
  j["provenance"] = {{"version", std::string(kVersion)},
                     {"seed", config.seed},
                     {"config_hash", hex64(config.hash())}};
  j["config"] = config.to_json();
  j["per_n"] = json::array();
  for (const auto& p : per_n) {
    json e = {{"n", p.n}, {"mean", p.summary.mean}, {"stderr", p.summary.std_error}, {"count", p.summary.count}};
    e["censored"] = p.censored;
    for (const auto& [k, v] : p.extra.items()) e[k] = v;
    j["per_n"].push_back(std::move(e));
  }
  j["fit"] = fit_json(fit_model, fit);
  j["diagnostics"] = diagnostics;
  j["truncated"] = truncated;
  j["wall_seconds"] = wall_seconds;
  return j;
}

BinnedFit bin_distance_by_output(std::span<const double> abs_phi, std::span<const double> distances, double width,
                                 std::size_t min_count) {
  if (abs_phi.size() != distances.size()) throw DimensionMismatch("abs_phi and distances differ in length");
  if (!(width > 0.0)) throw ConfigError("bin width must be positive");
  std::map<long, std::pair<double, std::size_t>> bins;
  for (std::size_t i = 0; i < abs_phi.size(); ++i) {
    auto& [sum, count] = bins[static_cast<long>(std::floor(std::abs(abs_phi[i]) / width))];
    sum += distances[i];
    ++count;
  }
  BinnedFit out;
  std::vector<double> xs, ys;
  for (const auto& [k, acc] : bins) {
    if (acc.second < min_count) continue;
    PhiBin b;
    b.lower = static_cast<double>(k) * width;
    b.upper = b.lower + width;
    b.midpoint = b.lower + 0.5 * width;
    b.mean_distance = acc.first / static_cast<double>(acc.second);
    b.count = acc.second;
    xs.push_back(b.midpoint);
    ys.push_back(b.mean_distance);
    out.bins.push_back(b);
  }
  if (!xs.empty()) out.fit = stats::fit_through_origin(xs, ys);
  return out;
}

std::vector<double> default_overlaps(int n) {
  return {1.0, 1.0 - 2.0 / n, 0.9, 0.5, 0.0, -0.5, -1.0};
}

ExperimentResult run_closest(const ExperimentConfig& input, RunOptions options) {
  const auto t0 = Clock::now();
  ExperimentConfig config = input;
  NetSupplier nets(config);
  ExperimentResult result = start(config, ExperimentKind::Closest);

  Sweep sweep{static_cast<std::size_t>(config.trials), {}};
  sweep.n_values = config.n_values;
  std::vector<BoundaryTrial> slots(sweep.count());
  const auto done = run_indexed(sweep.count(), config.resolved_parallelism(), options.cancel, [&](std::size_t s) {
    const int n = sweep.n_of(s);
    const std::uint64_t trial = sweep.trial_of(s);
    const DeepNet net = nets(n, trial);
    const BitString x = random_input(config, n, trial);
    const auto begin = Clock::now();
    if (config.search == SearchMethod::Exact)
      slots[s].search = exact_search(net, x, config.max_h > 0 ? std::min(config.max_h, n) : n, config.budget);
    else
      slots[s].search = greedy_search(net, x, config.max_steps > 0 ? std::min(config.max_steps, n) : n);
    if (config.record_timing) slots[s].micros = elapsed_micros(begin);
  });

  result.table.columns = {"n", "trial", "start_phi", "distance", "evaluations", "micros"};
  std::map<int, std::size_t> censored;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> phi_vs_distance;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!done[s]) continue;
    const auto& r = slots[s].search;
    const int n = sweep.n_of(s);
    result.table.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(sweep.trial_of(s)),
                                 r.start_phi, optional_cell(r.distance), r.evaluations, slots[s].micros});
    if (!r.distance) {
      ++censored[n];
      continue;
    }
    phi_vs_distance[n].first.push_back(std::abs(r.start_phi));
    phi_vs_distance[n].second.push_back(*r.distance);
  }
  result.truncated = any_missing(done);

  result.fit_model = "mean = a*sqrt(n/ln n)";
  aggregate_distances(result, 3, sqrt_n_over_ln_n);
  set_censored(result, censored);

  json& d = result.diagnostics;
  std::vector<double> xs, ns, ys;
  for (const auto& p : result.per_n) {
    xs.push_back(sqrt_n_over_ln_n(p.n));
    ns.push_back(p.n);
    ys.push_back(p.summary.mean);
  }
  if (xs.size() >= 2) {
    const auto line = stats::fit_line(xs, ys);
    d["free_intercept_fit"] = {{"slope", line.slope},
                               {"intercept", line.intercept},
                               {"slope_stderr", line.slope_std_error},
                               {"intercept_stderr", line.intercept_std_error},
                               {"r2", line.r_squared}};
    const auto power = stats::fit_power_law(ns, ys);
    d["power_law_fit"] = {{"prefactor", power.prefactor},
                          {"exponent", power.exponent},
                          {"exponent_stderr", power.exponent_std_error},
                          {"r2", power.r_squared}};
  }

  const KernelProfile profile = profile_for(config, config.n_values.front());
  if (!profile.degenerate()) {
    const double q = profile.q();
    const double fp = profile.f_prime_1();
    d["Q"] = q;
    d["Fprime1"] = fp;
    d["a_theory"] = 1.0 / std::sqrt(2.0 * std::numbers::pi * fp);
    d["phi_bins"] = json::array();
    for (const auto& [n, samples] : phi_vs_distance) {
      const BinnedFit binned = bin_distance_by_output(samples.first, samples.second, 0.25 * std::sqrt(q), 10);
      json e;
      e["n"] = n;
      e["bin_width"] = 0.25 * std::sqrt(q);
      e["predicted_slope"] = sqrt_n_over_ln_n(n) / (2.0 * std::sqrt(q * fp));
      e["bins"] = json::array();
      for (const auto& b : binned.bins)
        e["bins"].push_back({{"lower", b.lower}, {"midpoint", b.midpoint}, {"mean_distance", b.mean_distance},
                             {"count", b.count}});
      if (binned.fit) {
        e["slope"] = binned.fit->coefficient;
        e["slope_stderr"] = binned.fit->std_error;
        e["r2"] = binned.fit->r_squared;
      } else {
        e["slope"] = nullptr;
        e["r2"] = nullptr;
      }
      d["phi_bins"].push_back(std::move(e));
    }
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

ExperimentResult run_flips(const ExperimentConfig& input, RunOptions options) {
  const auto t0 = Clock::now();
  ExperimentConfig config = input;
  NetSupplier nets(config);
  ExperimentResult result = start(config, ExperimentKind::Flips);

  Sweep sweep{static_cast<std::size_t>(config.trials), config.n_values};
  std::vector<BoundaryTrial> slots(sweep.count());
  const auto done = run_indexed(sweep.count(), config.resolved_parallelism(), options.cancel, [&](std::size_t s) {
    const int n = sweep.n_of(s);
    const std::uint64_t trial = sweep.trial_of(s);
    const DeepNet net = nets(n, trial);
    const BitString x = random_input(config, n, trial);
    const auto begin = Clock::now();
    slots[s].search = random_flip_walk(net, x, walk_order(config.seed, n, trial));
    if (config.record_timing) slots[s].micros = elapsed_micros(begin);
  });

  result.table.columns = {"n", "trial", "start_phi", "distance", "evaluations", "micros"};
  std::map<int, std::size_t> capped;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!done[s]) continue;
    const auto& r = slots[s].search;
    const int n = sweep.n_of(s);
    result.table.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(sweep.trial_of(s)),
                                 r.start_phi, optional_cell(r.distance), r.evaluations, slots[s].micros});
    if (r.capped) ++capped[n];
  }
  result.truncated = any_missing(done);

  result.fit_model = "mean = s*n";
  aggregate_distances(result, 3, identity_x);
  set_censored(result, capped);

  const KernelProfile profile = profile_for(config, config.n_values.front());
  if (!profile.degenerate()) {
    const double fp = profile.f_prime_1();
    result.diagnostics["Fprime1"] = fp;
    result.diagnostics["heuristic_slope"] = 1.0 / (4.0 * fp);
  }
  std::vector<double> xs, ys;
  for (const auto& p : result.per_n) {
    xs.push_back(p.n);
    ys.push_back(p.summary.mean);
  }
  if (xs.size() >= 2) {
    const auto line = stats::fit_line(xs, ys);
    result.diagnostics["free_intercept_fit"] = {
        {"slope", line.slope}, {"intercept", line.intercept}, {"r2", line.r_squared}};
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

ExperimentResult run_gp_check(const ExperimentConfig& input, RunOptions options) {
  const auto t0 = Clock::now();
  ExperimentConfig config = input;
  NetSupplier nets(config);
  ExperimentResult result = start(config, ExperimentKind::GpCheck);
  const KernelProfile profile = profile_for(config, config.n_values.front());
  const double q = profile.q();

  // Point sets per n: x followed by one partner per requested overlap.
  struct PointSet {
    int n = 0;
    std::vector<double> requested;
    std::vector<int> hamming;
    std::vector<BitString> points;
    Eigen::MatrixXd signs;
    GpEnsemble ensemble;
  };
  std::vector<PointSet> sets;
  for (int n : config.n_values) {
    PointSet ps;
    ps.n = n;
    ps.requested = config.overlaps.empty() ? default_overlaps(n) : config.overlaps;
    const BitString x = random_input(config, n, kGpPointKey);
    Engine rng = make_engine(config.seed, Stream::Input, {static_cast<std::uint64_t>(n), kGpPointKey, 1});
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    ps.points.push_back(x);
    for (double t : ps.requested) {
      const int h = std::clamp(static_cast<int>(std::lround(n * (1.0 - t) / 2.0)), 0, n);
      ps.hamming.push_back(h);
      ps.points.push_back(x.flipped(std::span<const int>(order.data(), static_cast<std::size_t>(h))));
    }
    ps.signs.resize(n, static_cast<Eigen::Index>(ps.points.size()));
    for (std::size_t k = 0; k < ps.points.size(); ++k) ps.signs.col(static_cast<Eigen::Index>(k)) = ps.points[k].to_vector();
    ps.ensemble = build_ensemble(profile, ps.points, derive_seed(config.seed, Stream::GpOracle, {static_cast<std::uint64_t>(n)}));
    sets.push_back(std::move(ps));
  }

  struct Draw {
    Eigen::RowVectorXd net;
    Eigen::VectorXd gp;
  };
  Sweep sweep{static_cast<std::size_t>(config.trials), config.n_values};
  std::vector<Draw> slots(sweep.count());
  const auto done = run_indexed(sweep.count(), config.resolved_parallelism(), options.cancel, [&](std::size_t s) {
    const PointSet& ps = sets[s / sweep.trials];
    const std::uint64_t trial = sweep.trial_of(s);
    const DeepNet net = nets(ps.n, trial);
    Eigen::MatrixXd pre = net.weight(0) * ps.signs;
    pre.colwise() += net.bias(0);
    slots[s].net = forward_from_first_layer(net, pre);
    slots[s].gp = sample(ps.ensemble, trial);
  });

  result.table.columns = {"n", "trial", "hamming", "overlap", "phi_x", "phi_y", "gp_x", "gp_y"};
  result.plot.columns = {"x", "y", "yerr"};
  json& d = result.diagnostics;
  d["Q"] = q;
  d["per_n"] = json::array();
  double max_abs_z_net = 0.0, max_abs_z_gp = 0.0;
  std::vector<double> fit_x, fit_y;

  for (std::size_t i = 0; i < sets.size(); ++i) {
    const PointSet& ps = sets[i];
    const std::size_t k = ps.requested.size();
    std::vector<double> phi_x;
    std::vector<std::vector<double>> net_y(k), gp_x(k), gp_y(k);
    std::vector<double> gp_at_x;
    for (std::size_t trial = 0; trial < sweep.trials; ++trial) {
      const std::size_t s = i * sweep.trials + trial;
      if (!done[s]) continue;
      const Draw& draw = slots[s];
      phi_x.push_back(draw.net[0]);
      gp_at_x.push_back(draw.gp[0]);
      for (std::size_t j = 0; j < k; ++j) {
        const auto col = static_cast<Eigen::Index>(j + 1);
        net_y[j].push_back(draw.net[col]);
        gp_y[j].push_back(draw.gp[col]);
        result.table.rows.push_back({static_cast<std::int64_t>(ps.n), static_cast<std::int64_t>(trial),
                                     static_cast<std::int64_t>(ps.hamming[j]), overlap(ps.points[0], ps.points[j + 1]),
                                     draw.net[0], draw.net[col], draw.gp[0], draw.gp[col]});
      }
    }
    if (phi_x.size() < 4) continue;

    PerN p;
    p.n = ps.n;
    std::vector<double> squares(phi_x.size());
    std::transform(phi_x.begin(), phi_x.end(), squares.begin(), [](double v) { return v * v; });
    p.summary = stats::mean_stderr(squares);
    const auto m = stats::moments(phi_x);
    p.extra["skewness"] = m.skewness;
    p.extra["excess_kurtosis"] = m.excess_kurtosis;

    json overlaps = json::array();
    double local_max_z = 0.0;
    const double fisher_se = std::sqrt(2.0 / static_cast<double>(phi_x.size() - 3));
    for (std::size_t j = 0; j < k; ++j) {
      const double t = overlap(ps.points[0], ps.points[j + 1]);
      const double predicted = q * profile.f(t);
      auto products = [&](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out(a.size());
        for (std::size_t r = 0; r < a.size(); ++r) out[r] = a[r] * b[r];
        return stats::mean_stderr(out);
      };
      auto z_of = [&](const stats::MeanStderr& ms) {
        const double diff = ms.mean - predicted;
        if (ms.std_error > 0.0) return diff / ms.std_error;
        return std::abs(diff) <= 1e-12 * q ? 0.0 : std::numeric_limits<double>::infinity();
      };
      const auto net_cov = products(phi_x, net_y[j]);
      const auto gp_cov = products(gp_at_x, gp_y[j]);
      const double z_net = z_of(net_cov);
      const double z_gp = z_of(gp_cov);
      local_max_z = std::max(local_max_z, std::abs(z_net));
      max_abs_z_net = std::max(max_abs_z_net, std::abs(z_net));
      max_abs_z_gp = std::max(max_abs_z_gp, std::abs(z_gp));
      fit_x.push_back(profile.f(t));
      fit_y.push_back(net_cov.mean);
      if (i + 1 == sets.size()) result.plot.rows.push_back({t, net_cov.mean, net_cov.std_error});

      json e;
      e["requested"] = ps.requested[j];
      e["overlap"] = t;
      e["hamming"] = ps.hamming[j];
      e["predicted_cov"] = predicted;
      e["net_cov"] = {{"mean", net_cov.mean}, {"stderr", net_cov.std_error}, {"z", z_net}};
      e["gp_cov"] = {{"mean", gp_cov.mean}, {"stderr", gp_cov.std_error}, {"z", z_gp}};
      const double r_net = stats::correlation(phi_x, net_y[j]);
      const double r_gp = stats::correlation(gp_at_x, gp_y[j]);
      e["net_corr"] = r_net;
      e["gp_corr"] = r_gp;
      if (std::abs(r_net) < 1.0 - 1e-12 && std::abs(r_gp) < 1.0 - 1e-12)
        e["corr_fisher_z"] = (std::atanh(r_net) - std::atanh(r_gp)) / fisher_se;
      else
        e["corr_fisher_z"] = nullptr;
      const auto mean_net = stats::mean_stderr(net_y[j]);
      const auto mean_gp = stats::mean_stderr(gp_y[j]);
      const double se = std::hypot(mean_net.std_error, mean_gp.std_error);
      e["mean_diff_z"] = se > 0.0 ? (mean_net.mean - mean_gp.mean) / se : 0.0;
      overlaps.push_back(std::move(e));
    }
    p.extra["max_abs_z_net"] = local_max_z;
    d["per_n"].push_back({{"n", ps.n}, {"jitter", ps.ensemble.jitter}, {"overlaps", std::move(overlaps)}});
    result.per_n.push_back(std::move(p));
  }
  d["max_abs_z_net"] = max_abs_z_net;
  d["max_abs_z_gp"] = max_abs_z_gp;
  result.fit_model = "E[phi(x)phi(y)] = Q*F(t)";
  if (!fit_x.empty()) result.fit = stats::fit_through_origin(fit_x, fit_y);
  result.truncated = any_missing(done);
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

ExperimentResult run_greedy_vs_exact(const ExperimentConfig& input, RunOptions options) {
  const auto t0 = Clock::now();
  ExperimentConfig config = input;
  NetSupplier nets(config);
  ExperimentResult result = start(config, ExperimentKind::GreedyVsExact);

  struct Pair {
    SearchResult greedy;
    SearchResult exact;
  };
  Sweep sweep{static_cast<std::size_t>(config.trials), config.n_values};
  std::vector<Pair> slots(sweep.count());
  const auto done = run_indexed(sweep.count(), config.resolved_parallelism(), options.cancel, [&](std::size_t s) {
    const int n = sweep.n_of(s);
    const std::uint64_t trial = sweep.trial_of(s);
    const DeepNet net = nets(n, trial);
    const BitString x = random_input(config, n, trial);
    slots[s].greedy = greedy_search(net, x, config.max_steps > 0 ? std::min(config.max_steps, n) : n);
    slots[s].exact = exact_search(net, x, config.max_h > 0 ? std::min(config.max_h, n) : n, config.budget);
  });

  result.table.columns = {"n",   "trial", "start_phi", "greedy", "exact", "gap", "greedy_evaluations",
                          "exact_evaluations"};
  std::map<int, std::vector<double>> gaps, greedy, exact;
  std::map<int, std::size_t> violations;
  for (int n : config.n_values) violations[n] = 0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (!done[s]) continue;
    const auto& [g, e] = slots[s];
    const int n = sweep.n_of(s);
    Cell gap = std::monostate{};
    if (g.distance && e.distance) {
      gap = static_cast<std::int64_t>(*g.distance - *e.distance);
      gaps[n].push_back(*g.distance - *e.distance);
      greedy[n].push_back(*g.distance);
      exact[n].push_back(*e.distance);
      if (*g.distance < *e.distance) ++violations[n];
    } else if (g.distance && !e.distance) {
      ++violations[n];
    }
    result.table.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(sweep.trial_of(s)),
                                 g.start_phi, optional_cell(g.distance), optional_cell(e.distance), gap, g.evaluations,
                                 e.evaluations});
  }
  result.truncated = any_missing(done);

  result.plot.columns = {"x", "y", "yerr"};
  std::size_t total_violations = 0;
  for (int n : config.n_values) {
    total_violations += violations[n];
    if (gaps[n].empty()) continue;
    PerN p;
    p.n = n;
    p.summary = stats::mean_stderr(gaps[n]);
    p.extra["violations"] = violations[n];
    p.extra["mean_greedy"] = stats::mean_stderr(greedy[n]).mean;
    p.extra["mean_exact"] = stats::mean_stderr(exact[n]).mean;
    result.plot.rows.push_back({static_cast<double>(n), p.summary.mean, p.summary.std_error});
    result.per_n.push_back(std::move(p));
  }
  std::vector<double> all_gaps;
  for (const auto& [n, v] : gaps) all_gaps.insert(all_gaps.end(), v.begin(), v.end());
  result.diagnostics["violations"] = total_violations;
  result.diagnostics["mean_gap"] = all_gaps.empty() ? json(nullptr) : json(stats::mean_stderr(all_gaps).mean);
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, RunOptions options) {
  switch (config.kind) {
    case ExperimentKind::Closest: return run_closest(config, options);
    case ExperimentKind::Flips: return run_flips(config, options);
    case ExperimentKind::GpCheck: return run_gp_check(config, options);
    case ExperimentKind::GreedyVsExact: return run_greedy_vs_exact(config, options);
    default: throw ConfigError(to_string(config.kind) + " is not a trial experiment");
  }
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_outputs(const ExperimentResult& result) {
  const auto& c = result.config;
  const auto provenance = result.provenance();
  if (!c.out_csv.empty()) {
    auto out = open_output(c.out_csv);
    write_csv(out, result.table, provenance, result.truncated);
  }
  if (!c.out_json.empty()) {
    auto out = open_output(c.out_json);
    out << result.summary_json().dump(2) << '\n';
  }
  if (!c.plot_data.empty()) {
    auto out = open_output(c.plot_data);
    write_csv(out, result.plot, provenance, result.truncated);
  }
}

KernelReport kernel_report(const ExperimentConfig& config) {
  config.validate();
  const KernelProfile profile = profile_for(config, config.n_values.empty() ? 1 : config.n_values.front());
  KernelReport r;
  const int depth = profile.layers() + 1;
  r.table.columns.push_back("t");
  for (int l = 1; l <= depth; ++l) r.table.columns.push_back("F_" + std::to_string(l));
  r.table.columns.push_back("F");
  const auto& grid = profile.grid();
  for (Eigen::Index i = 0; i < grid.t.size(); ++i) {
    std::vector<Cell> row{grid.t[i]};
    for (int l = 0; l < depth; ++l) row.emplace_back(grid.f(i, l));
    row.emplace_back(grid.f(i, depth - 1));
    r.table.rows.push_back(std::move(row));
  }
  r.summary["Q_l"] = profile.q_per_layer();
  r.summary["Q"] = profile.q();
  r.summary["Fprime1"] = profile.f_prime_1();
  r.summary["activation"] = config.activation;
  r.summary["method"] = profile.method() == KernelMethod::ClosedForm ? "closed-form" : "quadrature";
  r.summary["sigma_w2"] = config.sigma_w2;
  r.summary["sigma_b2"] = config.sigma_b2;
  r.summary["layers"] = config.layers;
  return r;
}

json theory_report(const ExperimentConfig& config) {
  if (config.n_values.empty()) throw ConfigError("theory needs --n");
  config.validate();
  const KernelProfile profile = profile_for(config, config.n_values.front());
  const double q = profile.q();
  const double fp = profile.f_prime_1();
  json j;
  j["Q"] = q;
  j["Fprime1"] = fp;
  j["z"] = config.z;
  j["a"] = config.a;
  j["threshold_a"] = theory::threshold_a(config.z, fp);
  j["results"] = json::array();
  for (int n : config.n_values) {
    theory::TheoryQuery query{n, config.a, config.z, fp};
    query.validate();
    const std::int64_t h = theory::hamming_radius(n, config.a);
    json e;
    e["n"] = n;
    e["h_n"] = h;
    e["h_star"] = theory::h_star(std::sqrt(q) * config.z, q, fp, n);
    e["expected_h_star"] = theory::expected_h_star(n, fp);
    e["P_n"] = theory::conditional_flip_probability(profile, n, h, config.z);
    e["ln_P_n"] = theory::log_conditional_flip_probability(profile, n, h, config.z);
    const double ln_exact = theory::ln_count_flipped(profile, query);
    e["ln_N_exact"] = std::isfinite(ln_exact) ? json(ln_exact) : json(nullptr);
    e["ln_N_asymptotic"] = theory::ln_count_flipped_asymptotic(query);
    e["heuristic"] = {{"flip_bound", theory::heuristic_flip_bound(n, fp)},
                      {"closest_bound", theory::heuristic_closest_bound(n, fp)}};
    j["results"].push_back(std::move(e));
  }
  return j;
}

json refit(const CsvFile& csv, const std::string& model) {
  std::string chosen = model;
  if (chosen == "auto") {
    for (const auto& c : csv.comments) {
      if (c == "kind: closest") chosen = "sqrt-n-over-ln-n";
      if (c == "kind: flips") chosen = "linear";
    }
    if (chosen == "auto") throw ConfigError("cannot infer the fit model; pass --model");
  }
  double (*x_of)(double) = nullptr;
  std::string label;
  if (chosen == "sqrt-n-over-ln-n") {
    x_of = sqrt_n_over_ln_n;
    label = "mean = a*sqrt(n/ln n)";
  } else if (chosen == "linear") {
    x_of = identity_x;
    label = "mean = s*n";
  } else {
    throw ConfigError("unknown fit model '" + model + "'");
  }

  const std::size_t n_col = csv.column("n");
  const std::size_t d_col = csv.column("distance");
  std::vector<int> order;
  std::map<int, std::vector<double>> by_n;
  for (const auto& row : csv.rows) {
    const int n = std::stoi(row[n_col]);
    if (!by_n.count(n)) order.push_back(n);
    auto& v = by_n[n];
    if (row[d_col] != "NA") v.push_back(std::stod(row[d_col]));
  }
  std::sort(order.begin(), order.end());
  json j;
  j["per_n"] = json::array();
  std::vector<double> xs, ys;
  for (int n : order) {
    const auto& v = by_n[n];
    if (v.empty()) continue;
    const auto ms = stats::mean_stderr(v);
    j["per_n"].push_back({{"n", n}, {"mean", ms.mean}, {"stderr", ms.std_error}, {"count", ms.count}});
    xs.push_back(x_of(n));
    ys.push_back(ms.mean);
  }
  std::optional<stats::FitResult> fit;
  if (!xs.empty()) fit = stats::fit_through_origin(xs, ys);
  j["fit"] = fit_json(label, fit);
  return j;
}

}  // namespace simbias::harness

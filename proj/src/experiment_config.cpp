#include "simbias/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "simbias/errors.hpp"

namespace simbias::harness {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Closest: return "closest";
    case ExperimentKind::Flips: return "flips";
    case ExperimentKind::GpCheck: return "gp-check";
    case ExperimentKind::GreedyVsExact: return "greedy-vs-exact";
    case ExperimentKind::Kernel: return "kernel";
    case ExperimentKind::Theory: return "theory";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Closest, ExperimentKind::Flips, ExperimentKind::GpCheck,
                 ExperimentKind::GreedyVsExact, ExperimentKind::Kernel, ExperimentKind::Theory})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<int>(to_int(item)));
      continue;
    }
    const long long lo = to_int(item.substr(0, dots));
    std::string rest = item.substr(dots + 2);
    std::string step = "1";
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = rest.substr(colon + 1);
      rest = rest.substr(0, colon);
    }
    const long long hi = to_int(rest);
    if (lo > hi) throw ConfigError("empty range '" + item + "'");
    if (!step.empty() && step[0] == 'x') {
      const long long factor = to_int(step.substr(1));
      if (factor < 2 || lo < 1) throw ConfigError("geometric range needs factor >= 2 and start >= 1");
      for (long long v = lo; v <= hi; v *= factor) out.push_back(static_cast<int>(v));
    } else {
      const long long s = to_int(step);
      if (s < 1) throw ConfigError("range step must be >= 1");
      for (long long v = lo; v <= hi; v += s) out.push_back(static_cast<int>(v));
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) out.push_back(static_cast<int>(to_int(item)));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item));
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.starts_with("--")) key.erase(0, 2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

namespace {

bool to_bool(const std::string& v) {
  if (v.empty() || v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "kind") c.kind = parse_kind(value);
  else if (key == "n") c.n_values = parse_n_list(value);
  else if (key == "trials") c.trials = static_cast<int>(to_int(value));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(value));
  else if (key == "sigma-w2") c.sigma_w2 = to_double(value);
  else if (key == "sigma-b2") c.sigma_b2 = to_double(value);
  else if (key == "layers") c.layers = static_cast<int>(to_int(value));
  else if (key == "widths") c.widths = parse_int_list(value);
  else if (key == "activation") c.activation = value;
  else if (key == "net") {
    if (value == "random") c.net = NetSource::Random;
    else if (value == "passthrough") c.net = NetSource::Passthrough;
    else if (value == "weights") c.net = NetSource::WeightsFile;
    else throw ConfigError("net must be random, passthrough or weights");
  } else if (key == "weights") {
    c.weights = value;
    c.net = NetSource::WeightsFile;
  } else if (key == "search") {
    if (value == "greedy") c.search = SearchMethod::Greedy;
    else if (value == "exact") c.search = SearchMethod::Exact;
    else throw ConfigError("search must be greedy or exact");
  } else if (key == "max-steps") c.max_steps = static_cast<int>(to_int(value));
  else if (key == "max-h") c.max_h = static_cast<int>(to_int(value));
  else if (key == "budget") c.budget = to_int(value);
  else if (key == "overlaps") c.overlaps = parse_double_list(value);
  else if (key == "z") c.z = to_double(value);
  else if (key == "a") c.a = to_double(value);
  else if (key == "record-timing") c.record_timing = to_bool(value);
  else if (key == "parallel") c.parallel = static_cast<int>(to_int(value));
  else if (key == "out-csv") c.out_csv = value;
  else if (key == "out-json") c.out_json = value;
  else if (key == "emit-plot-data" || key == "plot-data") c.plot_data = value;
  else throw ConfigError("unknown setting '" + key + "'");
}

void ExperimentConfig::validate() const {
  const bool sweep = kind != ExperimentKind::Kernel;
  if (sweep) {
    if (n_values.empty() && net != NetSource::WeightsFile) throw ConfigError("n_values must not be empty");
    if (!std::is_sorted(n_values.begin(), n_values.end()) ||
        std::adjacent_find(n_values.begin(), n_values.end()) != n_values.end())
      throw ConfigError("n_values must be strictly ascending");
    for (int n : n_values)
      if (n < 1) throw ConfigError("n must be >= 1");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (parallel < 0) throw ConfigError("parallel must be >= 0");
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (!widths.empty() && static_cast<int>(widths.size()) != layers)
    throw ConfigError("widths must list one width per hidden layer");
  if (net == NetSource::WeightsFile && weights.empty()) throw ConfigError("net = weights needs a weights file");
  if (max_steps < 0 || max_h < 0) throw ConfigError("max-steps and max-h must be >= 0");
  if (budget < 1) throw ConfigError("budget must be positive");
  for (double t : overlaps)
    if (!(t >= -1.0 && t <= 1.0)) throw ConfigError("overlaps must lie in [-1, 1]");
  if (kind == ExperimentKind::Closest || kind == ExperimentKind::Flips || kind == ExperimentKind::GreedyVsExact)
    for (int n : n_values)
      if (n < 2) throw ConfigError("boundary experiments need n >= 2");
  if (kind == ExperimentKind::Closest)
    for (int n : n_values)
      if (n < 3) throw ConfigError("closest experiments need n >= 3 for the sqrt(n/ln n) fit");
  Activation::from_name(activation);
  network_for(n_values.empty() ? 1 : n_values.front()).validate();
}

NetworkConfig ExperimentConfig::network_for(int n) const {
  NetworkConfig c;
  c.input_dim = n;
  c.hidden_widths = widths.empty() ? std::vector<int>(static_cast<std::size_t>(layers), n) : widths;
  c.sigma_w2 = sigma_w2;
  c.sigma_b2 = sigma_b2;
  c.activation = Activation::from_name(activation);
  c.seed = seed;
  return c;
}

int ExperimentConfig::resolved_parallelism() const {
  if (parallel > 0) return parallel;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

nlohmann::json ExperimentConfig::identity() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["n"] = n_values;
  j["trials"] = trials;
  j["seed"] = seed;
  j["sigma_w2"] = sigma_w2;
  j["sigma_b2"] = sigma_b2;
  j["layers"] = layers;
  j["widths"] = widths;
  j["activation"] = activation;
  j["net"] = net == NetSource::Random ? "random" : (net == NetSource::Passthrough ? "passthrough" : "weights");
  j["weights"] = weights;
  j["search"] = std::string(to_string(search));
  j["max_steps"] = max_steps;
  j["max_h"] = max_h;
  j["budget"] = budget;
  j["overlaps"] = overlaps;
  j["z"] = z;
  j["a"] = a;
  return j;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = identity();
  j["record_timing"] = record_timing;
  j["parallel"] = parallel;
  j["out_csv"] = out_csv;
  j["out_json"] = out_json;
  j["plot_data"] = plot_data;
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : identity().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace simbias::harness

#include "simbias/search.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "simbias/errors.hpp"
#include "simbias/rng.hpp"
#include "simbias/stats.hpp"

namespace simbias {

std::string_view to_string(SearchMethod m) {
  switch (m) {
    case SearchMethod::Greedy: return "greedy";
    case SearchMethod::Exact: return "exact";
    case SearchMethod::Walk: return "walk";
  }
  return "?";
}

namespace {

SearchResult start(const DeepNet& net, const BitString& x, SearchMethod method, FirstLayerCache& cache) {
  cache = forward_with_first_layer_cache(net, x);
  SearchResult r;
  r.start_digest = x.digest();
  r.start_phi = cache.phi;
  r.method = method;
  return r;
}

}  // namespace

SearchResult greedy_search(const DeepNet& net, const BitString& x, int max_steps) {
  const int n = x.size();
  if (max_steps < 1 || max_steps > n) throw ConfigError("greedy max_steps must be in [1, n]");
  FirstLayerCache cache;
  SearchResult r = start(net, x, SearchMethod::Greedy, cache);
  const int s0 = classify(r.start_phi);

  BitString current = x;
  Eigen::VectorXd preact = cache.preactivation;
  std::vector<int> free_bits(static_cast<std::size_t>(n));
  std::iota(free_bits.begin(), free_bits.end(), 0);
  Eigen::MatrixXd candidates(preact.size(), n);
  ForwardWorkspace ws;
  Eigen::RowVectorXd phi;

  for (int step = 1; step <= max_steps; ++step) {
    const auto m = static_cast<Eigen::Index>(free_bits.size());
    for (Eigen::Index k = 0; k < m; ++k)
      candidates.col(k) = preact + flip_delta(net, current, free_bits[static_cast<std::size_t>(k)]);
    forward_from_first_layer(net, candidates.leftCols(m), ws, phi);
    r.evaluations += m;

    // free_bits stays sorted, so the first minimum is the lowest index.
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < m; ++k)
      if (s0 * phi[k] < s0 * phi[best]) best = k;
    const int bit = free_bits[static_cast<std::size_t>(best)];
    preact = candidates.col(best);
    current.flip(bit);
    free_bits.erase(free_bits.begin() + best);
    r.path.push_back(bit);
    if (classify(phi[best]) != s0) {
      r.distance = step;
      return r;
    }
  }
  return r;
}

SearchResult exact_search(const DeepNet& net, const BitString& x, int max_h, std::int64_t budget) {
  const int n = x.size();
  if (max_h < 1 || max_h > n) throw ConfigError("exact search radius must be in [1, n]");
  FirstLayerCache cache;
  SearchResult r = start(net, x, SearchMethod::Exact, cache);
  const int s0 = classify(r.start_phi);

  Eigen::MatrixXd deltas(cache.preactivation.size(), n);
  for (int i = 0; i < n; ++i) deltas.col(i) = flip_delta(net, x, i);

  constexpr Eigen::Index kBlock = 256;
  Eigen::MatrixXd block(cache.preactivation.size(), kBlock);
  std::vector<std::vector<int>> block_combos;
  block_combos.reserve(kBlock);
  ForwardWorkspace ws;
  Eigen::RowVectorXd phi;

  for (int h = 1; h <= max_h; ++h) {
    const double sphere = std::exp(stats::log_binomial(n, h));
    if (static_cast<double>(r.evaluations) + sphere > static_cast<double>(budget) * (1.0 + 1e-12))
      throw BudgetExceeded("exact search budget of " + std::to_string(budget) + " evaluations exceeded at h = " +
                               std::to_string(h),
                           h - 1);

    // Lexicographic combinations of h indices; a block is flushed when full.
    std::vector<int> combo(static_cast<std::size_t>(h));
    std::iota(combo.begin(), combo.end(), 0);
    bool more = true;
    auto flush = [&]() -> bool {
      const auto m = static_cast<Eigen::Index>(block_combos.size());
      if (m == 0) return false;
      forward_from_first_layer(net, block.leftCols(m), ws, phi);
      r.evaluations += m;
      for (Eigen::Index k = 0; k < m; ++k) {
        if (classify(phi[k]) != s0) {
          r.distance = h;
          r.path = block_combos[static_cast<std::size_t>(k)];
          return true;
        }
      }
      block_combos.clear();
      return false;
    };
    while (more) {
      auto col = block.col(static_cast<Eigen::Index>(block_combos.size()));
      col = cache.preactivation;
      for (int i : combo) col += deltas.col(i);
      block_combos.push_back(combo);
      if (static_cast<Eigen::Index>(block_combos.size()) == kBlock && flush()) return r;

      int k = h - 1;
      while (k >= 0 && combo[static_cast<std::size_t>(k)] == n - h + k) --k;
      if (k < 0) {
        more = false;
      } else {
        ++combo[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < h; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j) - 1] + 1;
      }
    }
    if (flush()) return r;
  }
  return r;
}

std::vector<int> walk_order(std::uint64_t seed, int n, std::uint64_t trial_index) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Engine rng = make_engine(seed, Stream::Walk, {static_cast<std::uint64_t>(n), trial_index});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

SearchResult random_flip_walk(const DeepNet& net, const BitString& x, std::uint64_t trial_index) {
  return random_flip_walk(net, x, walk_order(net.config().seed, x.size(), trial_index));
}

SearchResult random_flip_walk(const DeepNet& net, const BitString& x, const std::vector<int>& order) {
  const int n = x.size();
  if (static_cast<int>(order.size()) != n) throw DimensionMismatch("walk order must be a permutation of the bits");
  FirstLayerCache cache;
  SearchResult r = start(net, x, SearchMethod::Walk, cache);
  const int s0 = classify(r.start_phi);

  // Steps are evaluated in blocks; the preactivation is cumulative along the walk.
  const Eigen::Index block_size = std::min(n, 64);
  Eigen::MatrixXd block(cache.preactivation.size(), block_size);
  Eigen::VectorXd preact = cache.preactivation;
  ForwardWorkspace ws;
  Eigen::RowVectorXd phi;
  int done = 0;
  while (done < n) {
    const auto m = std::min<Eigen::Index>(block_size, n - done);
    for (Eigen::Index k = 0; k < m; ++k) {
      const int bit = order[static_cast<std::size_t>(done + k)];
      if (bit < 0 || bit >= n) throw DimensionMismatch("walk order must be a permutation of the bits");
      preact += flip_delta(net, x, bit);
      block.col(k) = preact;
    }
    forward_from_first_layer(net, block.leftCols(m), ws, phi);
    r.evaluations += m;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (classify(phi[k]) != s0) {
        const int steps = done + static_cast<int>(k) + 1;
        r.distance = steps;
        r.path.assign(order.begin(), order.begin() + steps);
        return r;
      }
    }
    done += static_cast<int>(m);
  }
  r.distance = n;
  r.capped = true;
  r.path = order;
  return r;
}

}  // namespace simbias

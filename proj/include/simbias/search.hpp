#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "simbias/bitstring.hpp"
#include "simbias/network.hpp"

namespace simbias {

enum class SearchMethod { Greedy, Exact, Walk };

std::string_view to_string(SearchMethod m);

struct SearchResult {
  std::uint64_t start_digest = 0;
  double start_phi = 0.0;
  /// Hamming distance to the first differently classified string found;
  /// empty when none was found within the step or radius cap.
  std::optional<int> distance;
  /// Flipped bit indices (0-based), in flip order. For Exact, the first
  /// differently classified combination in lexicographic order.
  std::vector<int> path;
  SearchMethod method = SearchMethod::Greedy;
  /// Forward passes through the layers above the first.
  std::int64_t evaluations = 0;
  /// Walk only: the walk reached n steps without a sign change.
  bool capped = false;
};

/// Repeatedly flips the not-yet-flipped bit minimizing s0 * phi, with
/// s0 = sign(phi(x)) and ties to the lowest index, until the classification
/// changes or max_steps flips were made. Requires 1 <= max_steps <= n.
SearchResult greedy_search(const DeepNet& net, const BitString& x, int max_steps);

inline constexpr std::int64_t kDefaultExactBudget = 20'000'000;

/// Enumerates Hamming spheres h = 1, 2, ..., max_h around x and returns the
/// smallest h containing a differently classified string (guaranteed minimal).
/// Throws BudgetExceeded before starting a sphere that would push the total
/// number of evaluations over `budget`.
SearchResult exact_search(const DeepNet& net, const BitString& x, int max_h,
                          std::int64_t budget = kDefaultExactBudget);

/// Flips the bits of x in a uniformly random order (derived from
/// net.config().seed and trial_index) and returns the first step whose
/// classification differs from x's, or n if there is none.
SearchResult random_flip_walk(const DeepNet& net, const BitString& x, std::uint64_t trial_index);

/// The same walk along an explicit permutation of 0..n-1.
SearchResult random_flip_walk(const DeepNet& net, const BitString& x, const std::vector<int>& order);

/// Uniform permutation of 0..n-1 for the given walk.
std::vector<int> walk_order(std::uint64_t seed, int n, std::uint64_t trial_index);

}  // namespace simbias

#pragma once

// Candidate TRP pools and low-correlation subset selection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bdris/common.hpp"
#include "bdris/model.hpp"

namespace bdris {

struct CandidatePool {
  int n_elements = 0;
  int group_size = 0;
  std::vector<TrpVector> trps;

  int pool_size() const { return static_cast<int>(trps.size()); }
};

struct TrpSet {
  int n_elements = 0;
  int group_size = 0;
  std::vector<TrpVector> selected;
  std::vector<int> source_indices;

  int size() const { return static_cast<int>(selected.size()); }
};

enum class SelectionScheme { greedy, random };

inline std::string to_string(SelectionScheme s) {
  return s == SelectionScheme::greedy ? "greedy" : "random";
}

inline SelectionScheme parse_selection_scheme(const std::string& s) {
  if (s == "greedy") return SelectionScheme::greedy;
  if (s == "random") return SelectionScheme::random;
  throw InvalidInput("unknown selection scheme '" + s + "' (expected greedy|random)");
}

/// v_a^H v_b / (|v_a| |v_b|).
inline cplx correlation(const TrpVector& a, const TrpVector& b) {
  detail::require(a.size() == b.size(), "correlation: TRP lengths differ (" +
                                            std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()) + ")");
  return a.entries.dot(b.entries) / (a.entries.norm() * b.entries.norm());
}

inline CandidatePool build_pool(const BdRisConfig& config, int pool_size, Rng& rng) {
  config.validate();
  detail::require(pool_size >= 1, "pool_size must be at least 1");
  CandidatePool pool{config.n_elements, config.group_size(), {}};
  pool.trps.reserve(pool_size);
  for (int c = 0; c < pool_size; ++c) {
    const auto theta = scattering_from_reactance(random_reactance(config, rng),
                                                 config.reference_impedance);
    if (!validate_scattering(theta).pass) {
      throw NumericalFailure("build_pool: candidate " + std::to_string(c) +
                             " violates the scattering constraints");
    }
    pool.trps.push_back(vectorize_trp(theta));
  }
  return pool;
}

namespace detail {

inline TrpSet subset(const CandidatePool& pool, std::vector<int> indices) {
  TrpSet set{pool.n_elements, pool.group_size, {}, std::move(indices)};
  set.selected.reserve(set.source_indices.size());
  for (int i : set.source_indices) set.selected.push_back(pool.trps[i]);
  return set;
}

}  // namespace detail

/// Sequential greedy max-min selection. Starts from pool index 0; each round
/// picks the remaining candidate whose largest |Corr| to the selected set is
/// smallest (ties -> lowest index). A running max per candidate keeps the
/// cost at O(C * d) correlations.
inline TrpSet greedy_select(const CandidatePool& pool, int d) {
  const int c = pool.pool_size();
  detail::require(d >= 1, "greedy_select: d must be at least 1");
  detail::require(d <= c, "greedy_select: d (" + std::to_string(d) + ") exceeds pool size (" +
                              std::to_string(c) + ")");
  const Eigen::Index len = pool.trps.front().size();

  // Columns are unit-normalized candidates.
  CMatrix unit(len, c);
  for (int i = 0; i < c; ++i) {
    detail::require(pool.trps[i].size() == len, "greedy_select: pool has mixed TRP lengths");
    unit.col(i) = pool.trps[i].entries / pool.trps[i].entries.norm();
  }

  std::vector<double> running_max(c, 0.0);
  std::vector<char> taken(c, 0);
  std::vector<int> order;
  order.reserve(d);

  int current = 0;
  for (int round = 0; round < d; ++round) {
    taken[current] = 1;
    order.push_back(current);
    if (round + 1 == d) break;

    const CVector corr = unit.adjoint() * unit.col(current);
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c; ++i) {
      if (taken[i]) continue;
      running_max[i] = std::max(running_max[i], std::abs(corr(i)));
      if (running_max[i] < best_score) {
        best_score = running_max[i];
        best = i;
      }
    }
    current = best;
  }
  return detail::subset(pool, std::move(order));
}

/// Uniform draw of d distinct pool members.
inline TrpSet random_select(const CandidatePool& pool, int d, Rng& rng) {
  detail::require(d >= 1 && d <= pool.pool_size(), "random_select: d must be in [1, pool size]");
  std::vector<int> idx(pool.pool_size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < d; ++i) {
    std::uniform_int_distribution<int> pick(i, pool.pool_size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(d);
  return detail::subset(pool, std::move(idx));
}

inline TrpSet select_trps(const CandidatePool& pool, int d, SelectionScheme scheme, Rng& rng) {
  return scheme == SelectionScheme::greedy ? greedy_select(pool, d) : random_select(pool, d, rng);
}

inline double max_pairwise_correlation(const TrpSet& set) {
  detail::require(set.size() >= 2, "max_pairwise_correlation: need at least two TRPs");
  double worst = 0.0;
  for (int i = 0; i < set.size(); ++i)
    for (int j = i + 1; j < set.size(); ++j)
      worst = std::max(worst, std::abs(correlation(set.selected[i], set.selected[j])));
  return worst;
}

}  // namespace bdris

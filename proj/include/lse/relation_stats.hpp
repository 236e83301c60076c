#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lse/kg_data.hpp"
#include "lse/rng.hpp"

namespace lse {

// Mean tails per distinct head (tph) and heads per distinct tail (hpt).
struct BernoulliStats {
  double tph = 1.0;
  double hpt = 1.0;
};

// Indexed by relation id; empty optional for relations without triples.
inline std::vector<std::optional<BernoulliStats>> compute_bernoulli_stats(const TripleSet& train,
                                                                          std::size_t num_relations) {
  std::vector<std::size_t> count(num_relations, 0);
  std::vector<std::unordered_set<EntityId>> heads(num_relations), tails(num_relations);
  for (const auto& t : train) {
    if (t.relation >= num_relations) throw ConsistencyError("relation id out of range in train");
    ++count[t.relation];
    heads[t.relation].insert(t.head);
    tails[t.relation].insert(t.tail);
  }
  std::vector<std::optional<BernoulliStats>> stats(num_relations);
  for (std::size_t r = 0; r < num_relations; ++r) {
    if (count[r] == 0) continue;
    stats[r] = BernoulliStats{static_cast<double>(count[r]) / static_cast<double>(heads[r].size()),
                              static_cast<double>(count[r]) / static_cast<double>(tails[r].size())};
  }
  return stats;
}

struct PatternOptions {
  double inverse_threshold = 0.8;
  double symmetric_threshold = 0.8;
  // Fraction of (r1, r2) paths that close under r3.
  double composition_threshold = 0.8;
  std::size_t composition_min_support = 2;
  std::size_t path_cap = 100000;
  std::uint64_t seed = 0;
};

struct InversePair {
  RelationId first = 0;
  RelationId second = 0;
  // Fraction of (a, first, b) with (b, second, a) present.
  double score = 0.0;
};

struct CompositionSample {
  RelationId first = 0;   // (a, first, b)
  RelationId second = 0;  // (b, second, c)
  RelationId closure = 0; // (a, closure, c)
  std::size_t support = 0;
  // Number of enumerated (first, second) paths.
  std::size_t paths = 0;

  double confidence() const { return paths == 0 ? 0.0 : static_cast<double>(support) / static_cast<double>(paths); }
};

struct PatternStats {
  // Indexed by relation id; 0 for relations without triples.
  std::vector<double> symmetry_score;
  std::vector<std::size_t> triple_count;
  std::vector<InversePair> inverse_pairs;
  std::vector<CompositionSample> compositions;
  std::size_t paths_enumerated = 0;
  bool path_cap_reached = false;

  std::vector<RelationId> symmetric_relations(double threshold) const {
    std::vector<RelationId> out;
    for (std::size_t r = 0; r < symmetry_score.size(); ++r) {
      if (triple_count[r] > 0 && symmetry_score[r] >= threshold) out.push_back(static_cast<RelationId>(r));
    }
    return out;
  }
};

// Per-relation view combining both statistics.
struct RelationStats {
  std::optional<BernoulliStats> bernoulli;
  double symmetry_score = 0.0;
  std::vector<std::pair<RelationId, double>> inverse_partners;
  std::vector<CompositionSample> composition_samples;
};

namespace detail {

inline std::uint64_t pair_key(EntityId a, EntityId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

}  // namespace detail

// Symmetry and inverse scores are exact. Compositions come from enumerating
// two-hop paths; above options.path_cap the start triples are visited in a
// seeded random order until the cap is reached.
inline PatternStats detect_patterns(const TripleSet& train, std::size_t num_relations, const PatternOptions& options = {}) {
  PatternStats out;
  out.symmetry_score.assign(num_relations, 0.0);
  out.triple_count.assign(num_relations, 0);

  // Relations linking each ordered entity pair.
  std::unordered_map<std::uint64_t, std::vector<RelationId>> links;
  std::unordered_map<EntityId, std::vector<std::pair<RelationId, EntityId>>> out_edges;
  for (const auto& t : train) {
    if (t.relation >= num_relations) throw ConsistencyError("relation id out of range in train");
    auto& rels = links[detail::pair_key(t.head, t.tail)];
    if (std::find(rels.begin(), rels.end(), t.relation) == rels.end()) {
      rels.push_back(t.relation);
      ++out.triple_count[t.relation];
      out_edges[t.head].emplace_back(t.relation, t.tail);
    }
  }

  // reversed[r1][r2] = #(a, r1, b) with (b, r2, a).
  std::map<std::pair<RelationId, RelationId>, std::size_t> reversed;
  for (const auto& [key, rels] : links) {
    const auto a = static_cast<EntityId>(key >> 32);
    const auto b = static_cast<EntityId>(key & 0xffffffffULL);
    auto back = links.find(detail::pair_key(b, a));
    if (back == links.end()) continue;
    for (RelationId r1 : rels) {
      for (RelationId r2 : back->second) ++reversed[{r1, r2}];
    }
  }
  for (const auto& [pair, n] : reversed) {
    const auto [r1, r2] = pair;
    const double score = static_cast<double>(n) / static_cast<double>(out.triple_count[r1]);
    if (r1 == r2) {
      out.symmetry_score[r1] = score;
    } else if (score >= options.inverse_threshold) {
      out.inverse_pairs.push_back({r1, r2, score});
    }
  }

  // Two-hop enumeration. Start edges sorted for a deterministic order.
  std::vector<std::pair<EntityId, std::size_t>> starts;  // (head, index into out_edges[head])
  std::vector<EntityId> heads;
  heads.reserve(out_edges.size());
  for (auto& [h, edges] : out_edges) {
    std::sort(edges.begin(), edges.end());
    heads.push_back(h);
  }
  std::sort(heads.begin(), heads.end());
  std::size_t total_paths = 0;
  for (EntityId h : heads) {
    for (std::size_t i = 0; i < out_edges[h].size(); ++i) {
      starts.emplace_back(h, i);
      auto mid = out_edges.find(out_edges[h][i].second);
      if (mid != out_edges.end()) total_paths += mid->second.size();
    }
  }
  if (total_paths > options.path_cap) {
    auto rng = make_stream(options.seed, "patterns");
    std::shuffle(starts.begin(), starts.end(), rng);
  }

  std::map<std::pair<RelationId, RelationId>, std::size_t> path_count;
  std::map<std::tuple<RelationId, RelationId, RelationId>, std::size_t> closures;
  std::size_t enumerated = 0;
  for (const auto& [a, idx] : starts) {
    if (enumerated >= options.path_cap) {
      out.path_cap_reached = true;
      break;
    }
    const auto [r1, b] = out_edges[a][idx];
    auto mid = out_edges.find(b);
    if (mid == out_edges.end()) continue;
    for (const auto& [r2, c] : mid->second) {
      if (enumerated >= options.path_cap) {
        out.path_cap_reached = true;
        break;
      }
      ++enumerated;
      ++path_count[{r1, r2}];
      auto direct = links.find(detail::pair_key(a, c));
      if (direct == links.end()) continue;
      for (RelationId r3 : direct->second) ++closures[{r1, r2, r3}];
    }
  }
  out.paths_enumerated = enumerated;
  for (const auto& [key, support] : closures) {
    const auto [r1, r2, r3] = key;
    CompositionSample s{r1, r2, r3, support, path_count[{r1, r2}]};
    if (s.support >= options.composition_min_support && s.confidence() >= options.composition_threshold) {
      out.compositions.push_back(s);
    }
  }
  return out;
}

inline std::vector<RelationStats> relation_stats(const TripleSet& train, std::size_t num_relations,
                                                 const PatternOptions& options = {}) {
  std::vector<RelationStats> out(num_relations);
  const auto bern = compute_bernoulli_stats(train, num_relations);
  const auto patterns = detect_patterns(train, num_relations, options);
  for (std::size_t r = 0; r < num_relations; ++r) {
    out[r].bernoulli = bern[r];
    out[r].symmetry_score = patterns.symmetry_score[r];
  }
  for (const auto& p : patterns.inverse_pairs) out[p.first].inverse_partners.emplace_back(p.second, p.score);
  for (const auto& c : patterns.compositions) out[c.closure].composition_samples.push_back(c);
  return out;
}

}  // namespace lse

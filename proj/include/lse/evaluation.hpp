#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lse/error.hpp"
#include "lse/filter_index.hpp"
#include "lse/kg_data.hpp"
#include "lse/models.hpp"

namespace lse {

enum class TiePolicy { optimistic, pessimistic, mean };

inline std::string_view to_string(TiePolicy t) {
  switch (t) {
    case TiePolicy::optimistic: return "optimistic";
    case TiePolicy::pessimistic: return "pessimistic";
    case TiePolicy::mean: return "mean";
  }
  return "?";
}

inline TiePolicy parse_tie_policy(std::string_view s) {
  if (s == "optimistic") return TiePolicy::optimistic;
  if (s == "pessimistic") return TiePolicy::pessimistic;
  if (s == "mean") return TiePolicy::mean;
  throw ConfigError("unknown tie policy '" + std::string(s) + "' (expected optimistic, pessimistic, mean)");
}

// 1 + #strictly better + tie adjustment over the equal-energy candidates.
// `mask` is a sorted list of candidates to skip; the truth is never skipped
// even if it appears there. Ranks are half-integers under the mean policy.
inline double rank_of_truth(std::span<const double> energies, EntityId truth, std::span<const EntityId> mask = {},
                            TiePolicy tie = TiePolicy::mean) {
  if (truth >= energies.size()) throw ConsistencyError("truth id out of range");
  const double target = energies[truth];
  std::size_t better = 0;
  std::size_t equal = 0;
  auto m = mask.begin();
  for (std::size_t e = 0; e < energies.size(); ++e) {
    while (m != mask.end() && *m < e) ++m;
    if (e == truth || (m != mask.end() && *m == e)) continue;
    if (energies[e] < target) {
      ++better;
    } else if (energies[e] == target) {
      ++equal;
    }
  }
  double adjust = 0.0;
  if (tie == TiePolicy::pessimistic) adjust = static_cast<double>(equal);
  if (tie == TiePolicy::mean) adjust = 0.5 * static_cast<double>(equal);
  return 1.0 + static_cast<double>(better) + adjust;
}

enum class Side { head, tail };

struct RankRecord {
  Triple triple;
  Side side = Side::tail;
  double raw_rank = 1.0;
  double filtered_rank = 1.0;
};

// Aggregate over a set of ranks. Fields are NaN when count == 0.
struct RankSummary {
  std::size_t count = 0;
  double mrr = std::numeric_limits<double>::quiet_NaN();
  double mr = std::numeric_limits<double>::quiet_NaN();
  double hits1 = std::numeric_limits<double>::quiet_NaN();
  double hits3 = std::numeric_limits<double>::quiet_NaN();
  double hits10 = std::numeric_limits<double>::quiet_NaN();

  bool present() const { return count > 0; }
};

inline RankSummary summarize(std::span<const double> ranks) {
  RankSummary s;
  s.count = ranks.size();
  if (ranks.empty()) return s;
  double rr = 0.0, sum = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (double r : ranks) {
    rr += 1.0 / r;
    sum += r;
    h1 += r <= 1.0;
    h3 += r <= 3.0;
    h10 += r <= 10.0;
  }
  const auto n = static_cast<double>(ranks.size());
  s.mrr = rr / n;
  s.mr = sum / n;
  s.hits1 = static_cast<double>(h1) / n;
  s.hits3 = static_cast<double>(h3) / n;
  s.hits10 = static_cast<double>(h10) / n;
  return s;
}

struct SettingMetrics {
  RankSummary head;
  RankSummary tail;
  // Over all 2N queries; identical to averaging head and tail per triple first.
  RankSummary both;
};

struct Metrics {
  std::size_t num_triples = 0;
  TiePolicy tie = TiePolicy::mean;
  SettingMetrics raw;
  SettingMetrics filtered;
};

struct EvalOptions {
  int norm = 1;
  TiePolicy tie = TiePolicy::mean;
  std::size_t threads = 1;
};

struct EvalResult {
  Metrics metrics;
  // Two records per triple: head query then tail query.
  std::vector<RankRecord> records;
};

inline Metrics aggregate(const std::vector<RankRecord>& records, std::size_t num_triples, TiePolicy tie) {
  std::vector<double> raw_h, raw_t, raw_b, fil_h, fil_t, fil_b;
  for (const auto& rec : records) {
    (rec.side == Side::head ? raw_h : raw_t).push_back(rec.raw_rank);
    (rec.side == Side::head ? fil_h : fil_t).push_back(rec.filtered_rank);
    raw_b.push_back(rec.raw_rank);
    fil_b.push_back(rec.filtered_rank);
  }
  Metrics m;
  m.num_triples = num_triples;
  m.tie = tie;
  m.raw = {summarize(raw_h), summarize(raw_t), summarize(raw_b)};
  m.filtered = {summarize(fil_h), summarize(fil_t), summarize(fil_b)};
  return m;
}

// Ranks every triple under head and tail replacement against all entities,
// raw and filtered. Queries are independent; with threads > 1 they are split
// into contiguous chunks and the records written in input order, so results
// do not depend on the thread count.
inline EvalResult evaluate(const Parameters& params, const TripleSet& eval_set, const FilterIndex& filter,
                           const EvalOptions& options = {}) {
  if (filter.max_entity_id() >= static_cast<std::int64_t>(params.num_entities) ||
      filter.max_relation_id() >= static_cast<std::int64_t>(params.num_relations)) {
    throw ConsistencyError("filter index does not match the model vocabulary");
  }
  for (const auto& t : eval_set) {
    if (t.head >= params.num_entities || t.tail >= params.num_entities || t.relation >= params.num_relations) {
      throw ConsistencyError("evaluation triple does not match the model vocabulary");
    }
  }

  EvalResult result;
  result.records.resize(2 * eval_set.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = eval_set[i];
      const auto heads = all_head_energies(params, t.relation, t.tail, options.norm);
      result.records[2 * i] = {t, Side::head, rank_of_truth(heads, t.head, {}, options.tie),
                               rank_of_truth(heads, t.head, filter.heads_of(t.relation, t.tail), options.tie)};
      const auto tails = all_tail_energies(params, t.head, t.relation, options.norm);
      result.records[2 * i + 1] = {t, Side::tail, rank_of_truth(tails, t.tail, {}, options.tie),
                                   rank_of_truth(tails, t.tail, filter.tails_of(t.head, t.relation), options.tie)};
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, eval_set.size()));
  if (threads == 1) {
    work(0, eval_set.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (eval_set.size() + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(eval_set.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  result.metrics = aggregate(result.records, eval_set.size(), options.tie);
  return result;
}

}  // namespace lse

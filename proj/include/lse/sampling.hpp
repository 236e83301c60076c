#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lse/error.hpp"
#include "lse/filter_index.hpp"
#include "lse/kg_data.hpp"
#include "lse/relation_stats.hpp"
#include "lse/rng.hpp"

namespace lse {

enum class CorruptionMode { uniform, bernoulli };

inline std::string_view to_string(CorruptionMode m) { return m == CorruptionMode::uniform ? "uniform" : "bernoulli"; }

inline CorruptionMode parse_corruption_mode(std::string_view s) {
  if (s == "uniform" || s == "unif") return CorruptionMode::uniform;
  if (s == "bernoulli" || s == "bern") return CorruptionMode::bernoulli;
  throw ConfigError("unknown sampling mode '" + std::string(s) + "' (expected uniform, bernoulli)");
}

struct SamplerConfig {
  CorruptionMode mode = CorruptionMode::bernoulli;
  std::size_t negatives_per_positive = 1;
  bool filter_false_negatives = false;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxRedraws = 100;

// P(replace head) = tph / (tph + hpt) in Bernoulli mode, 0.5 otherwise.
inline double corruption_side_probability(const std::optional<BernoulliStats>& stats, CorruptionMode mode,
                                          RelationId relation = 0) {
  if (mode == CorruptionMode::uniform) return 0.5;
  if (!stats) throw ConfigError("no Bernoulli statistics for relation " + std::to_string(relation));
  return stats->tph / (stats->tph + stats->hpt);
}

struct CorruptionCounters {
  std::size_t draws = 0;
  std::size_t head_replacements = 0;
  std::size_t redraws = 0;
  std::size_t cap_hits = 0;
};

// Replaces exactly one of head/tail with a uniformly drawn entity. With a
// filter, candidates already known true are redrawn up to kMaxRedraws times;
// after that the last candidate is accepted and counted as a cap hit.
inline Triple corrupt(const Triple& positive, double head_probability, std::size_t num_entities,
                      const FilterIndex* filter, Rng& rng, CorruptionCounters& counters) {
  const bool replace_head = uniform_real(rng, 0.0, 1.0) < head_probability;
  ++counters.draws;
  if (replace_head) ++counters.head_replacements;

  Triple candidate = positive;
  for (std::size_t attempt = 0;; ++attempt) {
    const auto e = static_cast<EntityId>(uniform_index(rng, num_entities));
    (replace_head ? candidate.head : candidate.tail) = e;
    if (!filter || !filter->contains(candidate)) break;
    if (attempt == kMaxRedraws) {
      ++counters.cap_hits;
      break;
    }
    ++counters.redraws;
  }
  return candidate;
}

struct NegativeGroup {
  Triple positive;
  std::vector<Triple> negatives;
};

// Owns the sampling RNG; one instance per worker.
class NegativeSampler {
 public:
  // `filter` must outlive the sampler; it is only consulted when
  // config.filter_false_negatives is set.
  NegativeSampler(SamplerConfig config, std::size_t num_entities, std::vector<std::optional<BernoulliStats>> stats,
                  const FilterIndex* filter = nullptr)
      : config_(config),
        num_entities_(num_entities),
        stats_(std::move(stats)),
        filter_(config.filter_false_negatives ? filter : nullptr),
        rng_(make_stream(config.seed, "sampling")) {
    if (config_.negatives_per_positive == 0) throw ConfigError("negatives per positive must be >= 1");
    if (num_entities_ == 0) throw ConfigError("sampler needs at least one entity");
    if (config_.filter_false_negatives && !filter) throw ConfigError("false-negative filtering needs a train index");
  }

  double head_probability(RelationId r) const {
    if (config_.mode == CorruptionMode::uniform) return 0.5;
    return corruption_side_probability(r < stats_.size() ? stats_[r] : std::nullopt, config_.mode, r);
  }

  Triple corrupt(const Triple& positive) {
    return lse::corrupt(positive, head_probability(positive.relation), num_entities_, filter_, rng_, counters_);
  }

  // k negatives per positive; the corruption side is drawn per negative.
  std::vector<NegativeGroup> generate_batch(std::span<const Triple> positives) {
    std::vector<NegativeGroup> out;
    out.reserve(positives.size());
    for (const auto& pos : positives) {
      NegativeGroup g{pos, {}};
      g.negatives.reserve(config_.negatives_per_positive);
      const double ph = head_probability(pos.relation);
      for (std::size_t j = 0; j < config_.negatives_per_positive; ++j) {
        g.negatives.push_back(lse::corrupt(pos, ph, num_entities_, filter_, rng_, counters_));
      }
      out.push_back(std::move(g));
    }
    return out;
  }

  const CorruptionCounters& counters() const { return counters_; }
  const SamplerConfig& config() const { return config_; }

 private:
  SamplerConfig config_;
  std::size_t num_entities_;
  std::vector<std::optional<BernoulliStats>> stats_;
  const FilterIndex* filter_;
  Rng rng_;
  CorruptionCounters counters_;
};

}  // namespace lse

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lse/error.hpp"
#include "lse/kg_data.hpp"
#include "lse/rng.hpp"

// Synthetic graphs whose held-out splits are entailed by one relation pattern.
//
//   symmetric    n_facts distinct unordered pairs {a, b} under `sym`, each
//                given a random orientation. For a `holdout` fraction of them
//                only (a, sym, b) is in train and (b, sym, a) is held out;
//                the rest contribute both directions to train.
//   inverse      n_facts distinct ordered pairs with (a, r1, b) in train and
//                (b, r2, a) entailed. Held-out pairs keep (a, r1, b) in train
//                and hold out (b, r2, a).
//   composition  n_facts disjoint chains a -r1-> b -r2-> c over distinct
//                entities (needs 3 n_facts <= n_entities), closed by
//                (a, r3, c). The r1/r2 edges are all in train; a `holdout`
//                fraction of the closures is held out.
//   mixed        the three generators on one shared entity pool with n_facts
//                split evenly, relations prefixed sym/inv/comp.
//
// Held-out triples are shuffled; the first quarter (at least one) becomes
// valid, the rest test. Entities are named e0000, e0001, ...

namespace lse {

enum class SynthPattern { symmetric, inverse, composition, mixed };

inline SynthPattern parse_synth_pattern(std::string_view s) {
  if (s == "symmetric") return SynthPattern::symmetric;
  if (s == "inverse") return SynthPattern::inverse;
  if (s == "composition") return SynthPattern::composition;
  if (s == "mixed") return SynthPattern::mixed;
  throw ConfigError("unknown pattern '" + std::string(s) + "' (expected symmetric, inverse, composition, mixed)");
}

struct SynthOptions {
  SynthPattern pattern = SynthPattern::symmetric;
  std::size_t num_entities = 40;
  std::size_t num_facts = 200;
  double holdout = 0.5;
  std::uint64_t seed = 0;
};

struct SynthSplits {
  std::vector<RawTriple> train;
  std::vector<RawTriple> valid;
  std::vector<RawTriple> test;
};

namespace detail {

inline std::string entity_label(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "e%04zu", i);
  return buf;
}

struct SynthBuilder {
  std::vector<RawTriple> train;
  std::vector<RawTriple> held;

  void add_train(std::size_t h, const std::string& r, std::size_t t) {
    train.push_back({entity_label(h), r, entity_label(t)});
  }
  void add_held(std::size_t h, const std::string& r, std::size_t t) {
    held.push_back({entity_label(h), r, entity_label(t)});
  }
};

inline std::size_t holdout_count(std::size_t n, double holdout) {
  return static_cast<std::size_t>(std::llround(holdout * static_cast<double>(n)));
}

// Distinct pairs over entities [offset, offset + n); unordered => a < b.
inline std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t offset, std::size_t n,
                                                                     std::size_t count, bool unordered, Rng& rng) {
  const std::size_t possible = unordered ? n * (n - 1) / 2 : n * (n - 1);
  if (n < 2 || count > possible) {
    throw ConfigError("cannot draw " + std::to_string(count) + " distinct pairs from " + std::to_string(n) +
                      " entities");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  while (out.size() < count) {
    std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n);
    if (a == b) continue;
    if (unordered && a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) out.emplace_back(offset + a, offset + b);
  }
  return out;
}

inline void gen_symmetric(SynthBuilder& out, std::size_t offset, std::size_t n, std::size_t facts, double holdout,
                          const std::string& rel, Rng& rng) {
  auto pairs = sample_pairs(offset, n, facts, true, rng);
  for (auto& [a, b] : pairs) {
    if (uniform_index(rng, 2) == 1) std::swap(a, b);
  }
  const std::size_t held = holdout_count(pairs.size(), holdout);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    out.add_train(a, rel, b);
    if (i < held) {
      out.add_held(b, rel, a);
    } else {
      out.add_train(b, rel, a);
    }
  }
}

inline void gen_inverse(SynthBuilder& out, std::size_t offset, std::size_t n, std::size_t facts, double holdout,
                        const std::string& r1, const std::string& r2, Rng& rng) {
  const auto pairs = sample_pairs(offset, n, facts, false, rng);
  const std::size_t held = holdout_count(pairs.size(), holdout);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    out.add_train(a, r1, b);
    if (i < held) {
      out.add_held(b, r2, a);
    } else {
      out.add_train(b, r2, a);
    }
  }
}

inline void gen_composition(SynthBuilder& out, std::size_t offset, std::size_t n, std::size_t facts, double holdout,
                            const std::string& r1, const std::string& r2, const std::string& r3, Rng& rng) {
  if (facts == 0 || 3 * facts > n) {
    throw ConfigError("composition needs 3 * n_facts <= n_entities (got " + std::to_string(facts) + " facts, " +
                      std::to_string(n) + " entities)");
  }
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = offset + i;
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t held = holdout_count(facts, holdout);
  for (std::size_t i = 0; i < facts; ++i) {
    const std::size_t a = ids[3 * i], b = ids[3 * i + 1], c = ids[3 * i + 2];
    out.add_train(a, r1, b);
    out.add_train(b, r2, c);
    if (i < held) {
      out.add_held(a, r3, c);
    } else {
      out.add_train(a, r3, c);
    }
  }
}

}  // namespace detail

inline SynthSplits generate_synthetic(const SynthOptions& opt) {
  if (opt.num_entities < 2) throw ConfigError("n_entities must be >= 2");
  if (opt.num_facts == 0) throw ConfigError("n_facts must be >= 1");
  if (!(opt.holdout > 0.0 && opt.holdout < 1.0)) throw ConfigError("holdout must be in (0, 1)");

  auto rng = make_stream(opt.seed, "synth");
  detail::SynthBuilder b;
  switch (opt.pattern) {
    case SynthPattern::symmetric:
      detail::gen_symmetric(b, 0, opt.num_entities, opt.num_facts, opt.holdout, "sym", rng);
      break;
    case SynthPattern::inverse:
      detail::gen_inverse(b, 0, opt.num_entities, opt.num_facts, opt.holdout, "r1", "r2", rng);
      break;
    case SynthPattern::composition:
      detail::gen_composition(b, 0, opt.num_entities, opt.num_facts, opt.holdout, "r1", "r2", "r3", rng);
      break;
    case SynthPattern::mixed: {
      const std::size_t per = opt.num_facts / 3;
      if (per == 0) throw ConfigError("mixed needs n_facts >= 3");
      detail::gen_symmetric(b, 0, opt.num_entities, per, opt.holdout, "sym", rng);
      detail::gen_inverse(b, 0, opt.num_entities, per, opt.holdout, "inv1", "inv2", rng);
      detail::gen_composition(b, 0, opt.num_entities, opt.num_facts - 2 * per > opt.num_entities / 3
                                                          ? opt.num_entities / 3
                                                          : opt.num_facts - 2 * per,
                              opt.holdout, "comp1", "comp2", "comp3", rng);
      break;
    }
  }
  if (b.held.empty()) throw ConfigError("holdout leaves no held-out triples; increase n_facts or holdout");

  std::shuffle(b.held.begin(), b.held.end(), rng);
  const std::size_t n_valid = std::max<std::size_t>(1, b.held.size() / 4);
  SynthSplits out;
  out.train = std::move(b.train);
  out.valid.assign(b.held.begin(), b.held.begin() + static_cast<std::ptrdiff_t>(std::min(n_valid, b.held.size())));
  out.test.assign(b.held.begin() + static_cast<std::ptrdiff_t>(std::min(n_valid, b.held.size())), b.held.end());
  return out;
}

}  // namespace lse

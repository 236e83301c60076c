#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lse/kg_data.hpp"

namespace lse {

// Known-true completions of (h, r, ?) and (?, r, t) over a set of splits.
class FilterIndex {
 public:
  FilterIndex() = default;

  void add(const Triple& t) {
    tails_[key(t.head, t.relation)].push_back(t.tail);
    heads_[key(t.tail, t.relation)].push_back(t.head);
    max_entity_ = std::max({max_entity_, static_cast<std::int64_t>(t.head), static_cast<std::int64_t>(t.tail)});
    max_relation_ = std::max(max_relation_, static_cast<std::int64_t>(t.relation));
  }

  // Sorts and deduplicates the candidate lists; call once after all add()s.
  void finalize() {
    triples_ = 0;
    for (auto* m : {&tails_, &heads_}) {
      for (auto& [_, ids] : *m) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      }
    }
    for (const auto& [_, ids] : tails_) triples_ += ids.size();
  }

  std::span<const EntityId> tails_of(EntityId head, RelationId relation) const {
    return lookup(tails_, key(head, relation));
  }
  std::span<const EntityId> heads_of(RelationId relation, EntityId tail) const {
    return lookup(heads_, key(tail, relation));
  }

  bool contains(const Triple& t) const {
    auto tails = tails_of(t.head, t.relation);
    return std::binary_search(tails.begin(), tails.end(), t.tail);
  }

  std::size_t size() const { return triples_; }
  bool empty() const { return triples_ == 0; }

  // -1 when empty.
  std::int64_t max_entity_id() const { return max_entity_; }
  std::int64_t max_relation_id() const { return max_relation_; }

  const std::vector<std::string>& source_splits() const { return sources_; }
  void set_source_splits(std::vector<std::string> names) { sources_ = std::move(names); }

 private:
  using Map = std::unordered_map<std::uint64_t, std::vector<EntityId>>;

  static std::uint64_t key(EntityId e, RelationId r) { return (static_cast<std::uint64_t>(e) << 32) | r; }

  static std::span<const EntityId> lookup(const Map& m, std::uint64_t k) {
    auto it = m.find(k);
    if (it == m.end()) return {};
    return it->second;
  }

  Map tails_;
  Map heads_;
  std::size_t triples_ = 0;
  std::int64_t max_entity_ = -1;
  std::int64_t max_relation_ = -1;
  std::vector<std::string> sources_;
};

inline FilterIndex build_filter_index(std::span<const TripleSet* const> splits, std::vector<std::string> names = {}) {
  FilterIndex index;
  for (const auto* split : splits) {
    for (const auto& t : *split) index.add(t);
  }
  index.finalize();
  index.set_source_splits(std::move(names));
  return index;
}

inline FilterIndex build_filter_index(std::initializer_list<const TripleSet*> splits, std::vector<std::string> names = {}) {
  return build_filter_index(std::span<const TripleSet* const>(splits.begin(), splits.size()), std::move(names));
}

}  // namespace lse

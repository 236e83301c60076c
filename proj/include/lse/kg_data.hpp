#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lse/error.hpp"

namespace lse {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Integer-encoded fact (head, relation, tail).
struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using TripleSet = std::vector<Triple>;

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = (static_cast<std::uint64_t>(t.head) << 32) ^ t.tail;
    h ^= static_cast<std::uint64_t>(t.relation) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ULL);
  }
};

// One line of a split file, before encoding.
struct RawTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const RawTriple&, const RawTriple&) = default;
};

class Vocabulary {
 public:
  EntityId add_entity(std::string_view name) { return add(name, entity_to_id_, id_to_entity_); }
  RelationId add_relation(std::string_view name) { return add(name, relation_to_id_, id_to_relation_); }

  std::optional<EntityId> find_entity(std::string_view name) const { return find(name, entity_to_id_); }
  std::optional<RelationId> find_relation(std::string_view name) const { return find(name, relation_to_id_); }

  const std::string& entity_name(EntityId id) const { return id_to_entity_.at(id); }
  const std::string& relation_name(RelationId id) const { return id_to_relation_.at(id); }

  std::size_t num_entities() const { return id_to_entity_.size(); }
  std::size_t num_relations() const { return id_to_relation_.size(); }

  const std::vector<std::string>& entities() const { return id_to_entity_; }
  const std::vector<std::string>& relations() const { return id_to_relation_; }

  // Adds any unseen names.
  Triple intern(const RawTriple& raw) {
    return {add_entity(raw.head), add_relation(raw.relation), add_entity(raw.tail)};
  }

  // Throws ConsistencyError naming the first unknown field.
  Triple encode(const RawTriple& raw) const {
    auto h = find_entity(raw.head);
    if (!h) throw ConsistencyError("unknown entity '" + raw.head + "'");
    auto r = find_relation(raw.relation);
    if (!r) throw ConsistencyError("unknown relation '" + raw.relation + "'");
    auto t = find_entity(raw.tail);
    if (!t) throw ConsistencyError("unknown entity '" + raw.tail + "'");
    return {*h, *r, *t};
  }

  RawTriple decode(const Triple& t) const {
    return {entity_name(t.head), relation_name(t.relation), entity_name(t.tail)};
  }

  bool contains(const Triple& t) const {
    return t.head < num_entities() && t.tail < num_entities() && t.relation < num_relations();
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_entity_ == b.id_to_entity_ && a.id_to_relation_ == b.id_to_relation_;
  }

 private:
  using Index = std::unordered_map<std::string, std::uint32_t>;

  static std::uint32_t add(std::string_view name, Index& index, std::vector<std::string>& names) {
    auto [it, inserted] = index.try_emplace(std::string(name), static_cast<std::uint32_t>(names.size()));
    if (inserted) names.emplace_back(name);
    return it->second;
  }

  static std::optional<std::uint32_t> find(std::string_view name, const Index& index) {
    auto it = index.find(std::string(name));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  Index entity_to_id_;
  std::vector<std::string> id_to_entity_;
  Index relation_to_id_;
  std::vector<std::string> id_to_relation_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Parses `head<TAB>relation<TAB>tail` lines. Blank lines are skipped, CRLF is
// accepted, fields are whitespace-trimmed.
inline std::vector<RawTriple> parse_split(std::istream& in, std::string_view source = "<stream>") {
  std::vector<RawTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty()) continue;
    const auto t1 = view.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : view.find('\t', t1 + 1);
    if (t1 == std::string_view::npos || t2 == std::string_view::npos ||
        view.find('\t', t2 + 1) != std::string_view::npos) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected exactly 3 TAB-separated fields");
    }
    RawTriple raw{std::string(detail::trim(view.substr(0, t1))),
                  std::string(detail::trim(view.substr(t1 + 1, t2 - t1 - 1))),
                  std::string(detail::trim(view.substr(t2 + 1)))};
    if (raw.head.empty() || raw.relation.empty() || raw.tail.empty()) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": empty field");
    }
    out.push_back(std::move(raw));
  }
  return out;
}

inline std::vector<RawTriple> load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read triple file: " + path.string());
  auto triples = parse_split(in, path.string());
  if (in.bad()) throw IoError("read failure: " + path.string());
  return triples;
}

inline void write_split(std::ostream& out, const std::vector<RawTriple>& triples) {
  for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

inline void write_split(const std::filesystem::path& path, const std::vector<RawTriple>& triples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write triple file: " + path.string());
  write_split(out, triples);
  if (!out) throw IoError("write failure: " + path.string());
}

struct DatasetWarnings {
  std::size_t duplicates_train = 0;
  std::size_t duplicates_valid = 0;
  std::size_t duplicates_test = 0;
  // Entities that never occur in train.
  std::size_t unseen_entities = 0;
  std::vector<std::string> unseen_examples;
  // Triples of valid/test that also occur in an earlier split (kept).
  std::size_t cross_split_overlap = 0;

  std::size_t duplicates() const { return duplicates_train + duplicates_valid + duplicates_test; }
};

struct Dataset {
  TripleSet train;
  TripleSet valid;
  TripleSet test;
  Vocabulary vocabulary;
  DatasetWarnings warnings;

  std::size_t num_entities() const { return vocabulary.num_entities(); }
  std::size_t num_relations() const { return vocabulary.num_relations(); }
};

// Drops repeated triples, keeping first occurrences in order. Returns the
// number dropped.
inline std::size_t dedup_in_place(TripleSet& triples) {
  std::unordered_set<Triple, TripleHash> seen;
  seen.reserve(triples.size());
  const auto before = triples.size();
  std::erase_if(triples, [&](const Triple& t) { return !seen.insert(t).second; });
  return before - triples.size();
}

// Encodes a split against a fixed vocabulary; unknown names are a
// ConsistencyError.
inline TripleSet encode_split(const Vocabulary& vocab, const std::vector<RawTriple>& raw,
                              std::size_t* duplicates = nullptr) {
  TripleSet out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(vocab.encode(r));
  const auto dropped = dedup_in_place(out);
  if (duplicates) *duplicates = dropped;
  return out;
}

// Vocabulary is the union of all three splits, interned in file order.
inline Dataset build_dataset(const std::vector<RawTriple>& train, const std::vector<RawTriple>& valid,
                             const std::vector<RawTriple>& test) {
  Dataset ds;
  auto encode_all = [&](const std::vector<RawTriple>& raw, TripleSet& out) {
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(ds.vocabulary.intern(r));
  };
  encode_all(train, ds.train);
  const auto entities_in_train = ds.vocabulary.num_entities();
  encode_all(valid, ds.valid);
  encode_all(test, ds.test);

  ds.warnings.duplicates_train = dedup_in_place(ds.train);
  ds.warnings.duplicates_valid = dedup_in_place(ds.valid);
  ds.warnings.duplicates_test = dedup_in_place(ds.test);

  ds.warnings.unseen_entities = ds.vocabulary.num_entities() - entities_in_train;
  for (std::size_t e = entities_in_train; e < ds.vocabulary.num_entities() && ds.warnings.unseen_examples.size() < 5;
       ++e) {
    ds.warnings.unseen_examples.push_back(ds.vocabulary.entity_name(static_cast<EntityId>(e)));
  }

  std::unordered_set<Triple, TripleHash> earlier(ds.train.begin(), ds.train.end());
  for (const auto* split : {&ds.valid, &ds.test}) {
    for (const auto& t : *split) ds.warnings.cross_split_overlap += earlier.count(t);
    earlier.insert(split->begin(), split->end());
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& train, const std::filesystem::path& valid,
                            const std::filesystem::path& test) {
  return build_dataset(load_split(train), load_split(valid), load_split(test));
}

inline void print_warnings(std::ostream& out, const DatasetWarnings& w) {
  if (w.duplicates() > 0) {
    out << "warning: dropped " << w.duplicates() << " duplicate triple(s) (train " << w.duplicates_train
        << ", valid " << w.duplicates_valid << ", test " << w.duplicates_test << ")\n";
  }
  if (w.unseen_entities > 0) {
    out << "warning: " << w.unseen_entities << " entit" << (w.unseen_entities == 1 ? "y" : "ies")
        << " appear only in valid/test (e.g.";
    for (const auto& e : w.unseen_examples) out << ' ' << e;
    out << ")\n";
  }
  if (w.cross_split_overlap > 0) {
    out << "warning: " << w.cross_split_overlap << " valid/test triple(s) also occur in an earlier split\n";
  }
}

}  // namespace lse

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "test_util.hpp"

using namespace lse;

namespace {

std::vector<RawTriple> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_split(in, "mem");
}

}  // namespace

TEST(ParseSplit, SingleRecord) {
  const auto rows = parse("a\tr\tb\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (RawTriple{"a", "r", "b"}));
}

TEST(ParseSplit, EmptyInput) { EXPECT_TRUE(parse("").empty()); }

TEST(ParseSplit, TrimsFieldsAndAcceptsCrlf) {
  const auto rows = parse(" a \t r\t b \r\n\nc\tr\td\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (RawTriple{"a", "r", "b"}));
  EXPECT_EQ(rows[1], (RawTriple{"c", "r", "d"}));
}

TEST(ParseSplit, FieldsMayContainSpacesAndUtf8) {
  const auto rows = parse("/m/0 x\t/people/born in\tS\xc3\xa3o Paulo\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].head, "/m/0 x");
  EXPECT_EQ(rows[0].relation, "/people/born in");
  EXPECT_EQ(rows[0].tail, "S\xc3\xa3o Paulo");
}

TEST(ParseSplit, WrongFieldCountNamesLine) {
  try {
    parse("a\tr\tb\na\tr\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("mem:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("a\tr\tb\tc\n"), ParseError);
}

TEST(LoadSplit, MissingFileIsIoError) {
  try {
    load_split("/nonexistent/train.txt");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/train.txt"), std::string::npos);
  }
}

TEST(LoadSplit, WriteThenLoadRoundTrips) {
  const auto dir = test::temp_dir("kg_roundtrip");
  const std::vector<RawTriple> rows = {{"a", "r", "b"}, {"b", "s", "c"}};
  write_split(dir / "x.txt", rows);
  EXPECT_EQ(load_split(dir / "x.txt"), rows);
  std::filesystem::remove_all(dir);
}

TEST(BuildDataset, DeduplicatesWithWarning) {
  const auto ds = build_dataset({{"a", "r", "b"}, {"a", "r", "b"}}, {}, {});
  EXPECT_EQ(ds.train.size(), 1u);
  EXPECT_EQ(ds.warnings.duplicates_train, 1u);
}

TEST(BuildDataset, VocabularyIsUnionAndFlagsUnseen) {
  const auto ds = build_dataset({{"a", "r", "b"}}, {{"a", "r", "c"}}, {{"d", "s", "a"}});
  EXPECT_EQ(ds.num_entities(), 4u);
  EXPECT_EQ(ds.num_relations(), 2u);
  EXPECT_EQ(ds.warnings.unseen_entities, 2u);
  EXPECT_EQ(ds.warnings.unseen_examples, (std::vector<std::string>{"c", "d"}));
}

TEST(BuildDataset, IdsAreDenseAndBijective) {
  const auto ds = build_dataset({{"x", "r", "y"}, {"y", "s", "z"}}, {{"z", "r", "w"}}, {});
  const auto& v = ds.vocabulary;
  for (EntityId e = 0; e < v.num_entities(); ++e) EXPECT_EQ(v.find_entity(v.entity_name(e)), e);
  for (RelationId r = 0; r < v.num_relations(); ++r) EXPECT_EQ(v.find_relation(v.relation_name(r)), r);
}

TEST(BuildDataset, EncodeDecodeRoundTrip) {
  const std::vector<RawTriple> raw = {{"a", "r", "b"}, {"b", "r", "a"}, {"c", "q", "a"}};
  const auto ds = build_dataset(raw, {}, {});
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_EQ(ds.vocabulary.decode(ds.train[i]), raw[i]);
    EXPECT_EQ(ds.vocabulary.encode(raw[i]), ds.train[i]);
  }
  EXPECT_THROW(ds.vocabulary.encode({"a", "r", "zzz"}), ConsistencyError);
}

TEST(BuildDataset, CrossSplitOverlapIsCountedNotDropped) {
  const auto ds = build_dataset({{"a", "r", "b"}}, {{"a", "r", "b"}}, {});
  EXPECT_EQ(ds.valid.size(), 1u);
  EXPECT_EQ(ds.warnings.cross_split_overlap, 1u);
}

TEST(FilterIndex, DirectConstruction) {
  const TripleSet train = {{0, 0, 1}, {0, 0, 2}};
  const auto idx = build_filter_index({&train}, {"train"});
  const auto tails = idx.tails_of(0, 0);
  EXPECT_EQ(std::vector<EntityId>(tails.begin(), tails.end()), (std::vector<EntityId>{1, 2}));
  EXPECT_EQ(idx.source_splits(), (std::vector<std::string>{"train"}));
}

TEST(FilterIndex, EmptySplitsGiveEmptyIndex) {
  const auto idx = build_filter_index(std::initializer_list<const TripleSet*>{});
  EXPECT_TRUE(idx.empty());
  EXPECT_EQ(idx.max_entity_id(), -1);
  EXPECT_TRUE(idx.tails_of(0, 0).empty());
}

TEST(FilterIndex, MembershipMatchesLinearScan) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto all = test::random_triples(60, 4, 1000, seed);
    const TripleSet a(all.begin(), all.begin() + 700), b(all.begin() + 700, all.begin() + 850),
        c(all.begin() + 850, all.end());
    const auto idx = build_filter_index({&a, &b, &c});
    EXPECT_EQ(idx.size(), 1000u);
    std::set<Triple> scan(all.begin(), all.end());
    for (EntityId h = 0; h < 60; ++h) {
      for (RelationId r = 0; r < 4; ++r) {
        for (EntityId t = 0; t < 60; ++t) {
          const Triple x{h, r, t};
          const bool in = scan.count(x) > 0;
          ASSERT_EQ(idx.contains(x), in);
          const auto heads = idx.heads_of(r, t);
          ASSERT_EQ(std::binary_search(heads.begin(), heads.end(), h), in);
        }
      }
    }
  }
}

TEST(FilterIndex, TenTripleSyntheticSet) {
  const TripleSet train = {{0, 0, 1}, {1, 0, 2}, {2, 1, 3}, {3, 1, 0}, {4, 0, 0}, {0, 1, 4}};
  const TripleSet valid = {{1, 1, 1}, {2, 0, 4}};
  const TripleSet test = {{3, 0, 3}, {4, 1, 2}};
  const auto idx = build_filter_index({&train, &valid, &test});
  std::set<Triple> all;
  for (const auto* s : {&train, &valid, &test}) all.insert(s->begin(), s->end());
  ASSERT_EQ(all.size(), 10u);
  for (const auto& t : all) EXPECT_TRUE(idx.contains(t));
  EXPECT_FALSE(idx.contains({0, 0, 2}));
}

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "test_util.hpp"

using namespace lse;

namespace {

Checkpoint random_checkpoint(ModelKind kind, std::size_t ne, std::size_t nr, std::size_t d, std::uint64_t seed) {
  Checkpoint c;
  for (std::size_t e = 0; e < ne; ++e) c.vocabulary.add_entity("ent/" + std::to_string(e));
  for (std::size_t r = 0; r < nr; ++r) c.vocabulary.add_relation("rel " + std::to_string(r));
  c.params = test::random_params(kind, ne, nr, d, seed, -3, 3);
  c.config.learning_rate = 0.0123;
  c.config.sampler.negatives_per_positive = 7;
  c.config.seed = seed;
  c.step = 42;
  c.best_valid_mrr = 0.375;
  return c;
}

std::string serialize(const Checkpoint& c) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, c);
  return out.str();
}

Checkpoint deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_checkpoint(in);
}

std::string error_of(const std::string& bytes) {
  try {
    deserialize(bytes);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitwise) {
  for (auto kind : test::kAllKinds) {
    const auto c = random_checkpoint(kind, 9, 3, 8, 5);
    const auto back = deserialize(serialize(c));
    ASSERT_EQ(back.params.entities.size(), c.params.entities.size());
    EXPECT_EQ(std::memcmp(back.params.entities.data(), c.params.entities.data(), c.params.entities.size() * 8), 0);
    EXPECT_EQ(std::memcmp(back.params.relations.data(), c.params.relations.data(), c.params.relations.size() * 8), 0);
    EXPECT_EQ(back.params, c.params);
    EXPECT_EQ(back.vocabulary, c.vocabulary);
    EXPECT_EQ(back.step, 42u);
    EXPECT_EQ(back.best_valid_mrr, 0.375);
    EXPECT_EQ(back.config.learning_rate, 0.0123);
    EXPECT_EQ(back.config.sampler.negatives_per_positive, 7u);
  }
}

TEST(Checkpoint, LayoutStartsWithMagicAndLength) {
  const auto bytes = serialize(random_checkpoint(ModelKind::lse, 2, 1, 2, 1));
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("LSEKGE1\n"));
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  // header + metadata + (2*2 + 1*4) doubles
  EXPECT_EQ(bytes.size(), 16 + len + 8 * 8);
  EXPECT_EQ(bytes[16], '{');
}

TEST(Checkpoint, NanBestMrrSurvives) {
  auto c = random_checkpoint(ModelKind::lse_d, 2, 1, 2, 1);
  c.best_valid_mrr = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(std::isnan(deserialize(serialize(c)).best_valid_mrr));
}

TEST(Checkpoint, EnergiesIdenticalAfterReload) {
  const auto c = random_checkpoint(ModelKind::lse, 30, 4, 6, 8);
  const auto dir = test::temp_dir("ckpt");
  save_checkpoint(c, dir / "m.lsekge");
  const auto back = load_checkpoint(dir / "m.lsekge");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto h = static_cast<EntityId>(rng() % 30), t = static_cast<EntityId>(rng() % 30);
    const auto r = static_cast<RelationId>(rng() % 4);
    const double a = energy(c.params, h, r, t), b = energy(back.params, h, r, t);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, BadMagic) {
  auto bytes = serialize(random_checkpoint(ModelKind::lse_d, 2, 1, 2, 1));
  bytes[0] = 'X';
  EXPECT_NE(error_of(bytes).find("magic"), std::string::npos);
  EXPECT_NE(error_of("").find("magic"), std::string::npos);
}

TEST(Checkpoint, TruncatedFileIsShapeMismatch) {
  const auto bytes = serialize(random_checkpoint(ModelKind::lse, 3, 2, 3, 1));
  const auto err = error_of(bytes.substr(0, bytes.size() - 5));
  EXPECT_NE(err.find("shape mismatch"), std::string::npos) << err;
  EXPECT_NE(err.find("relation_parameters"), std::string::npos) << err;
  const auto err2 = error_of(bytes.substr(0, bytes.size() - (18 * 8 + 8)));
  EXPECT_NE(err2.find("'entities'"), std::string::npos) << err2;
}

TEST(Checkpoint, TrailingBytesRejected) {
  const auto bytes = serialize(random_checkpoint(ModelKind::lse_d, 2, 1, 2, 1));
  EXPECT_NE(error_of(bytes + "x").find("trailing"), std::string::npos);
}

TEST(Checkpoint, UnsupportedVersionNamesField) {
  auto bytes = serialize(random_checkpoint(ModelKind::lse_d, 2, 1, 2, 1));
  const auto pos = bytes.find("\"format_version\":1");
  ASSERT_NE(pos, std::string::npos);
  bytes[pos + std::strlen("\"format_version\":")] = '7';
  EXPECT_NE(error_of(bytes).find("format_version"), std::string::npos);
}

TEST(Checkpoint, MissingFileIsIoError) { EXPECT_THROW(load_checkpoint("/nonexistent/x.lsekge"), IoError); }

TEST(Checkpoint, InconsistentShapesRefusedOnWrite) {
  auto c = random_checkpoint(ModelKind::lse_d, 3, 1, 2, 1);
  c.params.entities.pop_back();
  std::ostringstream out;
  EXPECT_THROW(write_checkpoint(out, c), ConsistencyError);
}

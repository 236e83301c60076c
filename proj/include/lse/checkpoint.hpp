#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lse/error.hpp"
#include "lse/models.hpp"
#include "lse/training.hpp"

// Checkpoint layout:
//   "LSEKGE1\n"                      8 magic bytes
//   u64 little-endian                length of the metadata block
//   metadata                         UTF-8 JSON (kind, dims, step, config, vocabulary)
//   f64 little-endian, row-major     entity table (n_e x d), then relation
//                                    parameters (n_r x d, or n_r x d x d for LSE)

namespace lse {

inline constexpr std::array<char, 8> kCheckpointMagic = {'L', 'S', 'E', 'K', 'G', 'E', '1', '\n'};

namespace detail {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), b.size());
}

inline bool read_u64(std::istream& in, std::uint64_t& v) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void read_doubles(std::istream& in, std::vector<double>& values, const std::string& field) {
  for (auto& v : values) {
    std::uint64_t bits = 0;
    if (!read_u64(in, bits)) throw ParseError("checkpoint shape mismatch: '" + field + "' is truncated");
    v = std::bit_cast<double>(bits);
  }
}

// NaN is not representable in JSON.
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"loss", to_string(c.loss)},
          {"margin", c.margin},
          {"norm", c.norm},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_steps", c.max_steps},
          {"eval_every", c.eval_every},
          {"patience", c.patience},
          {"seed", c.seed},
          {"normalize_entities", c.normalize_entities},
          {"tie_policy", to_string(c.tie)},
          {"sampling", to_string(c.sampler.mode)},
          {"negatives", c.sampler.negatives_per_positive},
          {"filter_negatives", c.sampler.filter_false_negatives}};
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.loss = parse_loss_kind(j.at("loss").get<std::string>());
  c.margin = j.at("margin").get<double>();
  c.norm = j.at("norm").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_steps = j.at("max_steps").get<std::size_t>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.normalize_entities = j.at("normalize_entities").get<bool>();
  c.tie = parse_tie_policy(j.at("tie_policy").get<std::string>());
  c.sampler.mode = parse_corruption_mode(j.at("sampling").get<std::string>());
  c.sampler.negatives_per_positive = j.at("negatives").get<std::size_t>();
  c.sampler.filter_false_negatives = j.at("filter_negatives").get<bool>();
  c.sampler.seed = c.seed;
  return c;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  if (p.entities.size() != p.num_entities * p.dim || p.relations.size() != p.num_relations * p.relation_size()) {
    throw ConsistencyError("parameter arrays do not match their declared shape");
  }
  if (ckpt.vocabulary.num_entities() != p.num_entities || ckpt.vocabulary.num_relations() != p.num_relations) {
    throw ConsistencyError("vocabulary size does not match the parameter tables");
  }
  nlohmann::json meta = {{"format_version", Checkpoint::kFormatVersion},
                         {"kind", to_string(p.kind)},
                         {"dim", p.dim},
                         {"n_entities", p.num_entities},
                         {"n_relations", p.num_relations},
                         {"step", ckpt.step},
                         {"best_valid_mrr", detail::finite_or_null(ckpt.best_valid_mrr)},
                         {"config", detail::config_to_json(ckpt.config)},
                         {"entities", ckpt.vocabulary.entities()},
                         {"relations", ckpt.vocabulary.relations()}};
  const std::string text = meta.dump();
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  detail::write_doubles(out, p.entities);
  detail::write_doubles(out, p.relations);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw ParseError("checkpoint: bad magic (not an LSEKGE1 file)");
  }
  std::uint64_t meta_len = 0;
  if (!detail::read_u64(in, meta_len)) throw ParseError("checkpoint shape mismatch: 'metadata_length' is truncated");
  if (meta_len > (std::uint64_t{1} << 34)) throw ParseError("checkpoint: implausible 'metadata_length'");
  std::string text(meta_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(meta_len))) {
    throw ParseError("checkpoint shape mismatch: 'metadata' is truncated");
  }

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: unreadable 'metadata': ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const auto version = meta.at("format_version").get<std::uint32_t>();
    if (version != Checkpoint::kFormatVersion) {
      throw ParseError("checkpoint: unsupported 'format_version' " + std::to_string(version));
    }
    auto& p = ckpt.params;
    p.kind = parse_model_kind(meta.at("kind").get<std::string>());
    p.dim = meta.at("dim").get<std::size_t>();
    p.num_entities = meta.at("n_entities").get<std::size_t>();
    p.num_relations = meta.at("n_relations").get<std::size_t>();
    ckpt.step = meta.at("step").get<std::size_t>();
    const auto& mrr = meta.at("best_valid_mrr");
    ckpt.best_valid_mrr = mrr.is_null() ? std::numeric_limits<double>::quiet_NaN() : mrr.get<double>();
    ckpt.config = detail::config_from_json(meta.at("config"));

    const auto entities = meta.at("entities").get<std::vector<std::string>>();
    const auto relations = meta.at("relations").get<std::vector<std::string>>();
    if (entities.size() != p.num_entities) throw ParseError("checkpoint shape mismatch: 'entities' vocabulary size");
    if (relations.size() != p.num_relations) throw ParseError("checkpoint shape mismatch: 'relations' vocabulary size");
    for (const auto& e : entities) ckpt.vocabulary.add_entity(e);
    for (const auto& r : relations) ckpt.vocabulary.add_relation(r);
    if (ckpt.vocabulary.num_entities() != entities.size() || ckpt.vocabulary.num_relations() != relations.size()) {
      throw ParseError("checkpoint: duplicate names in 'entities' or 'relations'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: bad metadata field: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint: bad metadata value: ") + e.what());
  }

  auto& p = ckpt.params;
  p.entities.resize(p.num_entities * p.dim);
  p.relations.resize(p.num_relations * p.relation_size());
  detail::read_doubles(in, p.entities, "entities");
  detail::read_doubles(in, p.relations, "relation_parameters");
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint shape mismatch: trailing bytes");
  return ckpt;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failure: " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace lse

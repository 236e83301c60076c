#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lse/error.hpp"
#include "lse/kg_data.hpp"
#include "lse/relation_stats.hpp"
#include "lse/rng.hpp"

namespace lse {

enum class ModelKind { lse, lse_d, transe, distmult };

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lse: return "lse";
    case ModelKind::lse_d: return "lse_d";
    case ModelKind::transe: return "transe";
    case ModelKind::distmult: return "distmult";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "lse") return ModelKind::lse;
  if (name == "lse_d" || name == "lsed" || name == "lse-d") return ModelKind::lse_d;
  if (name == "transe") return ModelKind::transe;
  if (name == "distmult") return ModelKind::distmult;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected lse, lse_d, transe, distmult)");
}

// LSE keeps a d x d matrix per relation, the others a d-vector.
constexpr bool uses_matrix(ModelKind kind) { return kind == ModelKind::lse; }

// Embedding tables. Entity rows and relation parameters are stored flat,
// row-major; an LSE relation matrix R is indexed R[i * d + j] and acts on row
// vectors as (h R)_j = sum_i h_i R_ij.
struct Parameters {
  ModelKind kind = ModelKind::lse_d;
  std::size_t dim = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::vector<double> entities;
  std::vector<double> relations;

  std::size_t relation_size() const { return uses_matrix(kind) ? dim * dim : dim; }

  std::span<double> entity(EntityId e) { return {entities.data() + e * dim, dim}; }
  std::span<const double> entity(EntityId e) const { return {entities.data() + e * dim, dim}; }
  std::span<double> relation(RelationId r) { return {relations.data() + r * relation_size(), relation_size()}; }
  std::span<const double> relation(RelationId r) const {
    return {relations.data() + r * relation_size(), relation_size()};
  }

  bool all_finite() const {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(entities.begin(), entities.end(), finite) &&
           std::all_of(relations.begin(), relations.end(), finite);
  }

  // Storage in scalars: n_e d + n_r d (vector kinds) or n_e d + n_r d^2 (LSE).
  std::size_t parameter_count() const { return entities.size() + relations.size(); }

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

inline Parameters init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                              std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
  if (num_entities == 0 || num_relations == 0) throw ConfigError("vocabulary must contain entities and relations");

  Parameters p;
  p.kind = kind;
  p.dim = dim;
  p.num_entities = num_entities;
  p.num_relations = num_relations;
  p.entities.resize(num_entities * dim);
  p.relations.resize(num_relations * p.relation_size());

  auto rng = make_stream(seed, "init");
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  for (auto& v : p.entities) v = uniform_real(rng, -bound, bound);

  switch (kind) {
    case ModelKind::transe:
    case ModelKind::distmult:
      for (auto& v : p.relations) v = uniform_real(rng, -bound, bound);
      break;
    case ModelKind::lse_d:
      // Near the multiplicative identity.
      for (auto& v : p.relations) v = 1.0 + uniform_real(rng, -0.1 * bound, 0.1 * bound);
      break;
    case ModelKind::lse: {
      const double noise = 0.1 / std::sqrt(static_cast<double>(dim));
      for (std::size_t r = 0; r < num_relations; ++r) {
        auto m = p.relation(static_cast<RelationId>(r));
        for (std::size_t i = 0; i < dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j) {
            m[i * dim + j] = (i == j ? 1.0 : 0.0) + uniform_real(rng, -noise, noise);
          }
        }
      }
      break;
    }
  }
  return p;
}

namespace detail {

inline void check_ids(const Parameters& p, EntityId h, RelationId r, EntityId t) {
  if (h >= p.num_entities || t >= p.num_entities) throw ConsistencyError("entity id out of range");
  if (r >= p.num_relations) throw ConsistencyError("relation id out of range");
}

inline void check_norm(int norm) {
  if (norm != 1 && norm != 2) throw ConfigError("norm must be 1 or 2");
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

// Head transform q(h, r) whose distance to the tail is the energy:
// LSE h R, LSE_D h o r, TransE h + r, DistMult h o r.
inline void transform_head(const Parameters& p, std::span<const double> head, RelationId r, std::span<double> out) {
  const auto rel = p.relation(r);
  const std::size_t d = p.dim;
  switch (p.kind) {
    case ModelKind::lse:
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        const double hi = head[i];
        const double* row = rel.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) out[j] += hi * row[j];
      }
      break;
    case ModelKind::lse_d:
    case ModelKind::distmult:
      for (std::size_t i = 0; i < d; ++i) out[i] = head[i] * rel[i];
      break;
    case ModelKind::transe:
      for (std::size_t i = 0; i < d; ++i) out[i] = head[i] + rel[i];
      break;
  }
}

// Energy between a transformed head and a tail row. Lower is more plausible.
inline double energy_from_transform(ModelKind kind, std::span<const double> q, std::span<const double> tail, int norm) {
  const std::size_t d = q.size();
  if (kind == ModelKind::distmult) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += q[i] * tail[i];
    return -s;
  }
  double s = 0.0;
  if (norm == 1) {
    for (std::size_t i = 0; i < d; ++i) s += std::abs(q[i] - tail[i]);
    return s;
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double x = q[i] - tail[i];
    s += x * x;
  }
  return std::sqrt(s);
}

// LSE: ||h R_r - t||_p; LSE_D: ||h o r - t||_p; TransE: ||h + r - t||_p;
// DistMult: -<h o r, t> (p ignored).
inline double energy(const Parameters& p, EntityId h, RelationId r, EntityId t, int norm = 1) {
  detail::check_ids(p, h, r, t);
  detail::check_norm(norm);
  std::vector<double> q(p.dim);
  transform_head(p, p.entity(h), r, q);
  return energy_from_transform(p.kind, q, p.entity(t), norm);
}

// Partial derivatives of the energy with respect to the head argument, the
// tail argument and the relation parameters.
struct ScoreGradients {
  std::vector<double> d_head;
  std::vector<double> d_tail;
  std::vector<double> d_relation;  // d, or d * d for LSE
};

// L1 uses sign(0) := 0; L2 uses a zero gradient at a zero residual.
inline ScoreGradients energy_gradients(const Parameters& p, EntityId h, RelationId r, EntityId t, int norm = 1) {
  detail::check_ids(p, h, r, t);
  detail::check_norm(norm);
  const std::size_t d = p.dim;
  const auto head = p.entity(h);
  const auto tail = p.entity(t);
  const auto rel = p.relation(r);

  ScoreGradients g;
  g.d_head.assign(d, 0.0);
  g.d_tail.assign(d, 0.0);
  g.d_relation.assign(p.relation_size(), 0.0);

  if (p.kind == ModelKind::distmult) {
    for (std::size_t i = 0; i < d; ++i) {
      g.d_head[i] = -rel[i] * tail[i];
      g.d_relation[i] = -head[i] * tail[i];
      g.d_tail[i] = -head[i] * rel[i];
    }
    return g;
  }

  // Gradient of ||x||_p with respect to the residual x = q - t.
  std::vector<double> q(d);
  transform_head(p, head, r, q);
  std::vector<double> s(d);
  if (norm == 1) {
    for (std::size_t i = 0; i < d; ++i) s[i] = detail::sign(q[i] - tail[i]);
  } else {
    double len = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = q[i] - tail[i];
      len += s[i] * s[i];
    }
    len = std::sqrt(len);
    for (auto& v : s) v = len > 0.0 ? v / len : 0.0;
  }

  for (std::size_t i = 0; i < d; ++i) g.d_tail[i] = -s[i];
  switch (p.kind) {
    case ModelKind::lse_d:
      for (std::size_t i = 0; i < d; ++i) {
        g.d_head[i] = s[i] * rel[i];
        g.d_relation[i] = s[i] * head[i];
      }
      break;
    case ModelKind::transe:
      g.d_head = s;
      g.d_relation = s;
      break;
    case ModelKind::lse:
      for (std::size_t i = 0; i < d; ++i) {
        const double* row = rel.data() + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          acc += row[j] * s[j];
          g.d_relation[i * d + j] = head[i] * s[j];
        }
        g.d_head[i] = acc;
      }
      break;
    case ModelKind::distmult:
      break;
  }
  return g;
}

// Factored form of energy_gradients used by the trainer. The energy depends
// on the head only through q = transform(h, r), so
//   dE/dq      = upstream (u)
//   dE/dtail   = energy_upstream's d_tail
//   dE/dh, dE/dr = transform_backward(u)
// and transform_backward is linear in u: gradients of several triples sharing
// (h, r) can be summed in u-space first.
inline void energy_upstream(ModelKind kind, std::span<const double> q, std::span<const double> tail, int norm,
                            std::span<double> upstream, std::span<double> d_tail) {
  const std::size_t d = q.size();
  if (kind == ModelKind::distmult) {
    for (std::size_t i = 0; i < d; ++i) {
      upstream[i] = -tail[i];
      d_tail[i] = -q[i];
    }
    return;
  }
  if (norm == 1) {
    for (std::size_t i = 0; i < d; ++i) upstream[i] = detail::sign(q[i] - tail[i]);
  } else {
    double len = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      upstream[i] = q[i] - tail[i];
      len += upstream[i] * upstream[i];
    }
    len = std::sqrt(len);
    for (std::size_t i = 0; i < d; ++i) upstream[i] = len > 0.0 ? upstream[i] / len : 0.0;
  }
  for (std::size_t i = 0; i < d; ++i) d_tail[i] = -upstream[i];
}

// d_head = J_h^T u, d_relation = J_r^T u for q = transform(head, r).
inline void transform_backward(const Parameters& p, std::span<const double> head, RelationId r,
                               std::span<const double> upstream, std::span<double> d_head,
                               std::span<double> d_relation) {
  const std::size_t d = p.dim;
  const auto rel = p.relation(r);
  switch (p.kind) {
    case ModelKind::lse_d:
    case ModelKind::distmult:
      for (std::size_t i = 0; i < d; ++i) {
        d_head[i] = upstream[i] * rel[i];
        d_relation[i] = upstream[i] * head[i];
      }
      break;
    case ModelKind::transe:
      for (std::size_t i = 0; i < d; ++i) d_head[i] = d_relation[i] = upstream[i];
      break;
    case ModelKind::lse:
      for (std::size_t i = 0; i < d; ++i) {
        const double* row = rel.data() + i * d;
        double* out = d_relation.data() + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          acc += row[j] * upstream[j];
          out[j] = head[i] * upstream[j];
        }
        d_head[i] = acc;
      }
      break;
  }
}

// energies[e] == energy(p, h, r, e, norm) bitwise; the head transform is
// computed once.
inline std::vector<double> all_tail_energies(const Parameters& p, EntityId h, RelationId r, int norm = 1) {
  detail::check_ids(p, h, r, 0);
  detail::check_norm(norm);
  std::vector<double> q(p.dim);
  transform_head(p, p.entity(h), r, q);
  std::vector<double> out(p.num_entities);
  for (std::size_t e = 0; e < p.num_entities; ++e) {
    out[e] = energy_from_transform(p.kind, q, p.entity(static_cast<EntityId>(e)), norm);
  }
  return out;
}

// energies[e] == energy(p, e, r, t, norm) bitwise.
inline std::vector<double> all_head_energies(const Parameters& p, RelationId r, EntityId t, int norm = 1) {
  detail::check_ids(p, 0, r, t);
  detail::check_norm(norm);
  std::vector<double> q(p.dim);
  const auto tail = p.entity(t);
  std::vector<double> out(p.num_entities);
  for (std::size_t e = 0; e < p.num_entities; ++e) {
    transform_head(p, p.entity(static_cast<EntityId>(e)), r, q);
    out[e] = energy_from_transform(p.kind, q, tail, norm);
  }
  return out;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double mean_entity_norm(const Parameters& p) {
  double total = 0.0;
  for (std::size_t e = 0; e < p.num_entities; ++e) total += l2_norm(p.entity(static_cast<EntityId>(e)));
  return p.num_entities == 0 ? 0.0 : total / static_cast<double>(p.num_entities);
}

// --- Relation-pattern residuals -------------------------------------------
//
// How far the learned relation parameters are from the algebraic conditions
// under which each pattern holds exactly, in row-vector convention:
//   symmetric r:        R R = I            (LSE_D: r o r = 1)
//   inverse (r1, r2):   R1 R2 = I          (LSE_D: r1 o r2 = 1)
//   composition r3:     R1 R2 = R3         (LSE_D: r1 o r2 = r3)
// LSE residuals are Frobenius norms divided by sqrt(d); LSE_D residuals are
// max-abs over dimensions. For TransE the symmetric entry is ||r||_2 and its
// ratio to the mean entity norm, which tends to zero as the model degenerates.

struct PatternResidual {
  std::vector<RelationId> relations;
  double detection_score = 0.0;
  double residual = 0.0;
  // TransE symmetric relations only: ||r|| / mean entity norm.
  std::optional<double> norm_ratio;
};

struct LemmaReport {
  ModelKind kind = ModelKind::lse_d;
  std::vector<PatternResidual> symmetric;
  std::vector<PatternResidual> inverse;
  std::vector<PatternResidual> composition;
  double mean_entity_norm = 0.0;
};

namespace detail {

// Row-major d x d product.
inline std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t d) {
  std::vector<double> c(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a[i * d + k];
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += aik * b[k * d + j];
    }
  }
  return c;
}

inline double frobenius_residual(std::span<const double> m, std::span<const double> target, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = m[i] - target[i];
    s += x * x;
  }
  return std::sqrt(s) / std::sqrt(static_cast<double>(d));
}

inline std::vector<double> identity(std::size_t d) {
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
  return m;
}

// Residual of "a * b == c" (c empty means the identity / ones).
inline std::optional<double> product_residual(const Parameters& p, RelationId a, RelationId b,
                                              std::optional<RelationId> c) {
  const std::size_t d = p.dim;
  switch (p.kind) {
    case ModelKind::lse: {
      auto prod = matmul(p.relation(a), p.relation(b), d);
      if (c) return frobenius_residual(prod, p.relation(*c), d);
      return frobenius_residual(prod, identity(d), d);
    }
    case ModelKind::lse_d: {
      double worst = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double target = c ? p.relation(*c)[i] : 1.0;
        worst = std::max(worst, std::abs(p.relation(a)[i] * p.relation(b)[i] - target));
      }
      return worst;
    }
    case ModelKind::transe: {
      // Translations compose additively: r1 + r2 = 0 (inverse), r1 + r2 = r3.
      std::vector<double> v(d);
      for (std::size_t i = 0; i < d; ++i) v[i] = p.relation(a)[i] + p.relation(b)[i] - (c ? p.relation(*c)[i] : 0.0);
      return l2_norm(v);
    }
    case ModelKind::distmult:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

inline LemmaReport lemma_diagnostics(const Parameters& p, const PatternStats& patterns,
                                     double symmetric_threshold = 0.8) {
  LemmaReport report;
  report.kind = p.kind;
  report.mean_entity_norm = mean_entity_norm(p);

  for (RelationId r : patterns.symmetric_relations(symmetric_threshold)) {
    if (r >= p.num_relations) continue;
    PatternResidual res{{r}, patterns.symmetry_score[r], 0.0, std::nullopt};
    if (p.kind == ModelKind::transe) {
      res.residual = l2_norm(p.relation(r));
      res.norm_ratio = report.mean_entity_norm > 0.0 ? res.residual / report.mean_entity_norm : 0.0;
    } else if (p.kind == ModelKind::distmult) {
      res.residual = 0.0;  // symmetric by construction
    } else {
      res.residual = *detail::product_residual(p, r, r, std::nullopt);
    }
    report.symmetric.push_back(res);
  }
  for (const auto& pair : patterns.inverse_pairs) {
    if (pair.first >= p.num_relations || pair.second >= p.num_relations) continue;
    if (auto v = detail::product_residual(p, pair.first, pair.second, std::nullopt)) {
      report.inverse.push_back({{pair.first, pair.second}, pair.score, *v, std::nullopt});
    }
  }
  for (const auto& c : patterns.compositions) {
    if (std::max({c.first, c.second, c.closure}) >= p.num_relations) continue;
    if (auto v = detail::product_residual(p, c.first, c.second, c.closure)) {
      report.composition.push_back({{c.first, c.second, c.closure}, c.confidence(), *v, std::nullopt});
    }
  }
  return report;
}

}  // namespace lse

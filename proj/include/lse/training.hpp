#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lse/error.hpp"
#include "lse/evaluation.hpp"
#include "lse/filter_index.hpp"
#include "lse/kg_data.hpp"
#include "lse/losses.hpp"
#include "lse/models.hpp"
#include "lse/relation_stats.hpp"
#include "lse/rng.hpp"
#include "lse/sampling.hpp"

namespace lse {

struct TrainConfig {
  LossKind loss = LossKind::ce;
  double margin = 6.0;
  int norm = 1;
  double learning_rate = 5e-4;
  std::size_t batch_size = 512;
  std::size_t max_steps = 100000;
  std::size_t eval_every = 1000;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  // Per-step unit-norm projection of touched entity rows (TransE only).
  bool normalize_entities = false;
  TiePolicy tie = TiePolicy::mean;
  std::size_t eval_threads = 1;
  SamplerConfig sampler;

  std::size_t negatives() const { return sampler.negatives_per_positive; }

  void validate() const {
    if (!(margin > 0.0)) throw ConfigError("margin must be > 0");
    if (norm != 1 && norm != 2) throw ConfigError("norm must be 1 or 2");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    if (eval_every == 0) throw ConfigError("eval-every must be >= 1");
    if (patience == 0) throw ConfigError("patience must be >= 1");
    if (sampler.negatives_per_positive == 0) throw ConfigError("negatives per positive must be >= 1");
  }
};

// Accumulated gradient over the rows a batch touches. Rows are kept in
// ordered maps so application order is deterministic.
class SparseGradient {
 public:
  explicit SparseGradient(const Parameters& p) : dim_(p.dim), relation_size_(p.relation_size()) {}

  void add_entity(EntityId e, std::span<const double> g, double scale) { add(entity_rows_, e, dim_, g, scale); }
  void add_relation(RelationId r, std::span<const double> g, double scale) {
    add(relation_rows_, r, relation_size_, g, scale);
  }

  const std::map<EntityId, std::vector<double>>& entity_rows() const { return entity_rows_; }
  const std::map<RelationId, std::vector<double>>& relation_rows() const { return relation_rows_; }

  bool all_finite() const {
    for (const auto* rows : {&entity_rows_, &relation_rows_}) {
      for (const auto& [_, g] : *rows) {
        if (!std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) return false;
      }
    }
    return true;
  }

  void clear() {
    entity_rows_.clear();
    relation_rows_.clear();
  }

 private:
  static void add(std::map<std::uint32_t, std::vector<double>>& rows, std::uint32_t id, std::size_t size,
                  std::span<const double> g, double scale) {
    auto& row = rows[id];
    if (row.empty()) row.assign(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) row[i] += scale * g[i];
  }

  std::size_t dim_;
  std::size_t relation_size_;
  std::map<EntityId, std::vector<double>> entity_rows_;
  std::map<RelationId, std::vector<double>> relation_rows_;
};

// theta <- theta - lr * grad on touched rows only. Throws NumericError, leaving
// params untouched, if any gradient entry is non-finite.
inline void sgd_step(Parameters& params, const SparseGradient& grad, double learning_rate) {
  if (!grad.all_finite()) throw NumericError("non-finite gradient; step aborted");
  for (const auto& [e, g] : grad.entity_rows()) {
    auto row = params.entity(e);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= learning_rate * g[i];
  }
  for (const auto& [r, g] : grad.relation_rows()) {
    auto row = params.relation(r);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= learning_rate * g[i];
  }
}

// Adds dL/dtheta for one positive and its negatives to `grad`; returns L.
// Head transforms are computed once per distinct head and the head/relation
// gradients of triples sharing a head are summed before back-propagating
// through the transform (see transform_backward).
inline double accumulate_group_gradient(const Parameters& params, const NegativeGroup& group, LossKind loss,
                                        double margin, int norm, SparseGradient& grad) {
  const std::size_t d = params.dim;
  const RelationId r = group.positive.relation;

  struct HeadSlot {
    EntityId head;
    std::vector<double> q;
    std::vector<double> upstream;
  };
  std::vector<HeadSlot> slots;
  std::unordered_map<EntityId, std::size_t> slot_of;
  auto slot_for = [&](EntityId h) -> std::size_t {
    auto [it, inserted] = slot_of.try_emplace(h, slots.size());
    if (inserted) {
      slots.push_back({h, std::vector<double>(d), std::vector<double>(d, 0.0)});
      transform_head(params, params.entity(h), r, slots.back().q);
    }
    return it->second;
  };

  const std::size_t n = group.negatives.size();
  std::vector<std::size_t> slot_idx(n + 1);
  std::vector<double> energies(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const Triple& t = j == 0 ? group.positive : group.negatives[j - 1];
    detail::check_ids(params, t.head, t.relation, t.tail);
    if (t.relation != r) throw ConsistencyError("negative changes the relation of its positive");
    slot_idx[j] = slot_for(t.head);
    energies[j] = energy_from_transform(params.kind, slots[slot_idx[j]].q, params.entity(t.tail), norm);
  }
  const auto terms = loss_terms(loss, energies[0], std::span<const double>(energies).subspan(1), margin);

  std::vector<double> upstream(d), d_tail(d);
  for (std::size_t j = 0; j <= n; ++j) {
    const double scale = j == 0 ? terms.d_pos : terms.d_negs[j - 1];
    if (scale == 0.0) continue;
    const Triple& t = j == 0 ? group.positive : group.negatives[j - 1];
    auto& slot = slots[slot_idx[j]];
    energy_upstream(params.kind, slot.q, params.entity(t.tail), norm, upstream, d_tail);
    for (std::size_t i = 0; i < d; ++i) slot.upstream[i] += scale * upstream[i];
    grad.add_entity(t.tail, d_tail, scale);
  }

  std::vector<double> d_head(d), d_relation(params.relation_size());
  for (const auto& slot : slots) {
    if (std::all_of(slot.upstream.begin(), slot.upstream.end(), [](double v) { return v == 0.0; })) continue;
    transform_backward(params, params.entity(slot.head), r, slot.upstream, d_head, d_relation);
    grad.add_entity(slot.head, d_head, 1.0);
    grad.add_relation(r, d_relation, 1.0);
  }
  return terms.loss;
}

// Loss of a batch is the sum over its positives; returns that sum.
inline double batch_gradient(const Parameters& params, std::span<const NegativeGroup> batch, const TrainConfig& cfg,
                             SparseGradient& grad) {
  double total = 0.0;
  for (const auto& g : batch) total += accumulate_group_gradient(params, g, cfg.loss, cfg.margin, cfg.norm, grad);
  return total;
}

inline void normalize_rows(Parameters& params, const SparseGradient& grad) {
  for (const auto& [e, _] : grad.entity_rows()) {
    auto row = params.entity(e);
    const double n = l2_norm(row);
    if (n > 0.0) {
      for (auto& v : row) v /= n;
    }
  }
}

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  Vocabulary vocabulary;
  Parameters params;
  TrainConfig config;
  std::size_t step = 0;
  // NaN when no validation round ran.
  double best_valid_mrr = std::numeric_limits<double>::quiet_NaN();
};

struct TrainLogRecord {
  std::size_t step = 0;
  double mean_batch_loss = 0.0;  // per positive, since the previous record
  double valid_mrr = std::numeric_limits<double>::quiet_NaN();
  bool improved = false;
};

inline void write_log_record(std::ostream& out, const TrainLogRecord& rec) {
  out << "step=" << rec.step << " loss=" << rec.mean_batch_loss << " valid.filtered.mrr=" << rec.valid_mrr
      << " best=" << (rec.improved ? 1 : 0) << '\n';
}

struct TrainResult {
  // Best parameters by validation filtered MRR (the final ones when there is
  // no validation split).
  Checkpoint best;
  Parameters final_params;
  std::vector<TrainLogRecord> log;
  // Mean loss per positive of every step.
  std::vector<double> loss_trajectory;
  std::size_t steps_run = 0;
  bool stopped_early = false;
  bool diverged = false;
  CorruptionCounters sampler_counters;
};

// Minibatch SGD over shuffled epochs. Validation (filtered MRR over
// train+valid+test as filter) runs at step 0, every eval_every steps and at
// the end; training stops after `patience` rounds without improvement, or on
// a non-finite loss/gradient (diverged, best-so-far returned).
inline TrainResult train(const Dataset& data, ModelKind kind, std::size_t dim, const TrainConfig& cfg,
                         std::ostream* log = nullptr) {
  cfg.validate();
  if (data.train.empty()) throw ConfigError("training split is empty");
  if (kind != ModelKind::transe && cfg.normalize_entities) {
    throw ConfigError("entity normalization is only available for TransE");
  }

  TrainResult result;
  Parameters params = init_params(kind, data.num_entities(), data.num_relations(), dim, cfg.seed);

  const FilterIndex train_index = build_filter_index({&data.train}, {"train"});
  const FilterIndex full_index = build_filter_index({&data.train, &data.valid, &data.test}, {"train", "valid", "test"});
  SamplerConfig scfg = cfg.sampler;
  scfg.seed = cfg.seed;
  NegativeSampler sampler(scfg, data.num_entities(), compute_bernoulli_stats(data.train, data.num_relations()),
                          &train_index);

  const EvalOptions eval_opts{cfg.norm, cfg.tie, cfg.eval_threads};
  const bool validate = !data.valid.empty();

  result.best.vocabulary = data.vocabulary;
  result.best.config = cfg;
  result.best.params = params;

  std::size_t rounds_without_gain = 0;
  double loss_since_record = 0.0;
  std::size_t positives_since_record = 0;

  auto evaluate_round = [&](std::size_t step) {
    TrainLogRecord rec;
    rec.step = step;
    rec.mean_batch_loss = positives_since_record ? loss_since_record / static_cast<double>(positives_since_record) : 0.0;
    loss_since_record = 0.0;
    positives_since_record = 0;
    if (validate) {
      rec.valid_mrr = evaluate(params, data.valid, full_index, eval_opts).metrics.filtered.both.mrr;
      if (std::isnan(result.best.best_valid_mrr) || rec.valid_mrr > result.best.best_valid_mrr) {
        rec.improved = true;
        result.best.params = params;
        result.best.step = step;
        result.best.best_valid_mrr = rec.valid_mrr;
        rounds_without_gain = 0;
      } else {
        ++rounds_without_gain;
      }
    }
    result.log.push_back(rec);
    if (log) write_log_record(*log, rec);
  };

  evaluate_round(0);

  auto shuffle_rng = make_stream(cfg.seed, "shuffle");
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  std::size_t cursor = 0;

  SparseGradient grad(params);
  std::vector<Triple> batch;
  std::size_t step = 0;
  while (step < cfg.max_steps) {
    if (cursor >= order.size()) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      cursor = 0;
    }
    const std::size_t end = std::min(order.size(), cursor + cfg.batch_size);
    batch.clear();
    for (std::size_t i = cursor; i < end; ++i) batch.push_back(data.train[order[i]]);
    cursor = end;

    const auto groups = sampler.generate_batch(batch);
    grad.clear();
    const double loss = batch_gradient(params, groups, cfg, grad);
    if (!std::isfinite(loss) || !grad.all_finite()) {
      result.diverged = true;
      if (log) *log << "diverged at step " << step + 1 << "; keeping last good checkpoint\n";
      break;
    }
    sgd_step(params, grad, cfg.learning_rate);
    if (cfg.normalize_entities) normalize_rows(params, grad);
    ++step;

    const double mean_loss = loss / static_cast<double>(batch.size());
    result.loss_trajectory.push_back(mean_loss);
    loss_since_record += loss;
    positives_since_record += batch.size();

    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      evaluate_round(step);
      if (validate && rounds_without_gain >= cfg.patience) {
        result.stopped_early = step < cfg.max_steps;
        break;
      }
    }
  }

  result.steps_run = step;
  result.final_params = params;
  if (!validate) {
    result.best.params = params;
    result.best.step = step;
  }
  result.sampler_counters = sampler.counters();
  return result;
}

}  // namespace lse

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "lse/error.hpp"
#include "lse/training.hpp"

namespace lse {

struct Profile {
  std::string name;
  std::size_t dim = 200;
  TrainConfig train;
};

// WN18RR hyperparameters: margin 6, lr 5e-4, batch 512, 1024 negatives,
// 1e5 steps, Bernoulli corruption, L1 energies.
inline Profile paper_profile() {
  Profile p;
  p.name = "paper";
  p.dim = 200;
  p.train.loss = LossKind::ce;
  p.train.margin = 6.0;
  p.train.norm = 1;
  p.train.learning_rate = 5e-4;
  p.train.batch_size = 512;
  p.train.max_steps = 100000;
  p.train.eval_every = 5000;
  p.train.patience = 5;
  p.train.sampler.mode = CorruptionMode::bernoulli;
  p.train.sampler.negatives_per_positive = 1024;
  return p;
}

// Scaled for CPU runs on small graphs.
inline Profile desk_profile() {
  Profile p;
  p.name = "desk";
  p.dim = 32;
  p.train.loss = LossKind::ce;
  p.train.margin = 6.0;
  p.train.norm = 1;
  p.train.learning_rate = 0.03;
  p.train.batch_size = 64;
  p.train.max_steps = 5000;
  p.train.eval_every = 250;
  p.train.patience = 8;
  p.train.sampler.mode = CorruptionMode::bernoulli;
  p.train.sampler.negatives_per_positive = 64;
  return p;
}

inline Profile profile_by_name(std::string_view name) {
  if (name == "paper") return paper_profile();
  if (name == "desk") return desk_profile();
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected paper, desk)");
}

}  // namespace lse

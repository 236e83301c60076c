#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lse/error.hpp"

namespace lse {

enum class LossKind { margin, ce };

inline std::string_view to_string(LossKind k) { return k == LossKind::margin ? "margin" : "ce"; }

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "margin" || s == "ranking") return LossKind::margin;
  if (s == "ce" || s == "cross_entropy") return LossKind::ce;
  throw ConfigError("unknown loss '" + std::string(s) + "' (expected margin, ce)");
}

inline constexpr double kProbabilityClamp = 1e-7;

// [margin + e_pos - e_neg]_+
inline double margin_loss(double e_pos, double e_neg, double margin) { return std::max(0.0, margin + e_pos - e_neg); }

// sigma(margin - e): probability that the triple holds.
inline double triple_probability(double e, double margin) {
  const double x = margin - e;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

// -ln p(pos) - (1/k) sum_j ln(1 - p(neg_j)); probabilities clamped to
// [1e-7, 1 - 1e-7] before the logs.
inline double ce_loss(double e_pos, std::span<const double> e_negs, double margin) {
  auto clamp = [](double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); };
  double loss = -std::log(clamp(triple_probability(e_pos, margin)));
  if (e_negs.empty()) return loss;
  const double w = 1.0 / static_cast<double>(e_negs.size());
  for (double e : e_negs) loss -= w * std::log(1.0 - clamp(triple_probability(e, margin)));
  return loss;
}

// Loss of one positive against its k negatives, and its derivatives with
// respect to each energy.
struct LossTerms {
  double loss = 0.0;
  double d_pos = 0.0;
  std::vector<double> d_negs;
};

// Mean hinge over the k (positive, negative) pairs.
inline LossTerms margin_terms(double e_pos, std::span<const double> e_negs, double margin) {
  LossTerms out;
  out.d_negs.assign(e_negs.size(), 0.0);
  if (e_negs.empty()) return out;
  const double w = 1.0 / static_cast<double>(e_negs.size());
  for (std::size_t j = 0; j < e_negs.size(); ++j) {
    const double l = margin_loss(e_pos, e_negs[j], margin);
    out.loss += w * l;
    if (l > 0.0) {
      out.d_pos += w;
      out.d_negs[j] = -w;
    }
  }
  return out;
}

// The derivatives are those of the unclamped expression, so a badly scored
// positive still receives a gradient once its probability underflows the clamp.
inline LossTerms ce_terms(double e_pos, std::span<const double> e_negs, double margin) {
  LossTerms out;
  out.loss = ce_loss(e_pos, e_negs, margin);
  out.d_pos = 1.0 - triple_probability(e_pos, margin);
  out.d_negs.resize(e_negs.size());
  const double w = e_negs.empty() ? 0.0 : 1.0 / static_cast<double>(e_negs.size());
  for (std::size_t j = 0; j < e_negs.size(); ++j) out.d_negs[j] = -w * triple_probability(e_negs[j], margin);
  return out;
}

inline LossTerms loss_terms(LossKind kind, double e_pos, std::span<const double> e_negs, double margin) {
  return kind == LossKind::margin ? margin_terms(e_pos, e_negs, margin) : ce_terms(e_pos, e_negs, margin);
}

}  // namespace lse

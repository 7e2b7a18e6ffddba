#include "pc3/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace pc3 {

namespace {

void check_lengths(const FeatureTable& features, const LabelVector& sos,
                   const std::vector<double>& mu,
                   const ReferenceAssignment& refs) {
  const std::size_t n = features.size();
  if (sos.size() != n || mu.size() != n || refs.ref_index.size() != n) {
    throw ValidationError("features, sos, mu and references disagree on N");
  }
}

}  // namespace

std::uint64_t digest_values(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double value : values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

ReferenceAssignment sample_references(std::size_t n_items, Rng& rng) {
  if (n_items < 2) {
    throw ValidationError("reference sampling needs at least 2 items");
  }
  ReferenceAssignment refs;
  refs.ref_index.resize(n_items);
  for (std::size_t n = 0; n < n_items; ++n) {
    const std::size_t m = rng.uniform_index(n_items - 1);
    refs.ref_index[n] = m >= n ? m + 1 : m;
  }
  return refs;
}

BatchEvaluation batch_loss(const HeadParameters& params,
                           const FeatureTable& features, const LabelVector& sos,
                           const std::vector<double>& mu,
                           const ReferenceAssignment& refs,
                           std::span<const std::size_t> batch, double beta) {
  check_lengths(features, sos, mu, refs);
  if (batch.empty()) {
    throw ValidationError("batch must not be empty");
  }
  BatchEvaluation eval;
  eval.tapes.resize(batch.size());
  eval.scores.resize(batch.size());
  double data_fit = 0.0;
  double constraint = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t n = batch[b];
    if (n >= features.size()) {
      throw ValidationError("batch index " + std::to_string(n) +
                            " out of range");
    }
    const std::size_t r = refs.ref_index[n];
    const double score = s_theta_forward(params, features.row(n),
                                         features.row(r), &eval.tapes[b]);
    const double data_residual = sos.values[n] - score - mu[r];
    const double constraint_residual = mu[n] - score - mu[r];
    if (!std::isfinite(score) || !std::isfinite(data_residual) ||
        !std::isfinite(constraint_residual)) {
      throw NumericError("non-finite loss term for item '" +
                         features.item_ids[n] + "' (index " +
                         std::to_string(n) + ")");
    }
    eval.scores[b] = score;
    data_fit += data_residual * data_residual;
    constraint += constraint_residual * constraint_residual;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  eval.data_fit = data_fit * inv;
  eval.constraint = constraint * inv;
  eval.loss = eval.data_fit + beta * eval.constraint;
  return eval;
}

std::pair<double, GradientBundle> batch_gradient(
    const HeadParameters& params, const FeatureTable& features,
    const LabelVector& sos, const std::vector<double>& mu,
    const ReferenceAssignment& refs, std::span<const std::size_t> batch,
    double beta) {
  BatchEvaluation eval =
      batch_loss(params, features, sos, mu, refs, batch, beta);
  GradientBundle grads = zero_gradients(params);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t n = batch[b];
    const std::size_t r = refs.ref_index[n];
    const double score = eval.scores[b];
    const double data_residual = sos.values[n] - score - mu[r];
    const double constraint_residual = mu[n] - score - mu[r];
    const double upstream =
        -2.0 * inv * (data_residual + beta * constraint_residual);
    s_theta_backward_into(params, eval.tapes[b], upstream, grads);
  }
  return {eval.loss, std::move(grads)};
}

EpochReport theta_epoch(HeadParameters& params, const FeatureTable& features,
                        const LabelVector& sos, const std::vector<double>& mu,
                        const ReferenceAssignment& refs,
                        const CalibrationConfig& config, std::uint32_t epoch,
                        Rng& rng) {
  check_lengths(features, sos, mu, refs);
  const std::size_t n = features.size();
  const std::vector<std::size_t> order = rng.permutation(n);
  const std::size_t batch_size = config.batch_size;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t count = std::min(batch_size, n - start);
    std::span<const std::size_t> batch(order.data() + start, count);
    auto [loss, grads] =
        batch_gradient(params, features, sos, mu, refs, batch, config.beta);
    (void)loss;
    optimizer_step(params, grads, config.lambda);
  }

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = i;
  }
  const BatchEvaluation eval =
      batch_loss(params, features, sos, mu, refs, all, config.beta);
  EpochReport report;
  report.epoch = epoch;
  report.data_fit_loss = eval.data_fit;
  report.constraint_loss = eval.constraint;
  report.total_loss = eval.data_fit + config.beta * eval.constraint;
  for (double s : eval.scores) {
    report.max_abs_score = std::max(report.max_abs_score, std::abs(s));
  }
  return report;
}

std::vector<double> mu_update(const std::vector<double>& mu,
                              const HeadParameters& params,
                              const FeatureTable& features,
                              const ReferenceAssignment& refs,
                              const LabelVector& sos,
                              const CalibrationConfig& config,
                              std::uint32_t epoch) {
  check_lengths(features, sos, mu, refs);
  if (epoch < config.warmup_epochs) {
    return sos.values;
  }
  const std::size_t n = mu.size();
  const double alpha = config.alpha;
  std::vector<double> updated(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = refs.ref_index[i];
    const double score =
        s_theta_forward(params, features.row(i), features.row(r));
    const double target = score + mu[r];
    if (!std::isfinite(target)) {
      throw NumericError("non-finite MOS update for item '" +
                         features.item_ids[i] + "'");
    }
    updated[i] = (1.0 - alpha) * mu[i] + alpha * target;
  }
  return updated;
}

CalibrationResult calibrate(const FeatureTable& features,
                            const LabelVector& sos,
                            const CalibrationConfig& config) {
  return calibrate(features, sos, config, nullptr, nullptr);
}

CalibrationResult calibrate(const FeatureTable& features,
                            const LabelVector& sos,
                            const CalibrationConfig& config,
                            const HeadParameters* initial_head,
                            HeadParameters* final_head) {
  validate(features);
  validate(config);
  if (sos.size() != features.size()) {
    throw ValidationError("sos length " + std::to_string(sos.size()) +
                          " does not match feature table size " +
                          std::to_string(features.size()));
  }
  for (double v : sos.values) {
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite sos value");
    }
  }

  Rng rng = Rng(config.seed).derive(0);
  HeadParameters params;
  if (initial_head != nullptr) {
    if (initial_head->input_dim != features.dim) {
      throw ValidationError("checkpointed head expects dimension " +
                            std::to_string(initial_head->input_dim) +
                            ", features have " + std::to_string(features.dim));
    }
    params = *initial_head;
  } else {
    params = head_init(features.dim, config.hidden1, config.hidden2, rng);
  }

  CalibrationState state;
  state.mu = sos.values;
  state.epoch = 0;

  CalibrationResult result;
  result.trace.reserve(config.total_epochs);
  for (std::uint32_t t = 0; t < config.total_epochs; ++t) {
    const ReferenceAssignment refs = sample_references(features.size(), rng);
    EpochReport report =
        theta_epoch(params, features, sos, state.mu, refs, config, t, rng);
    state.mu = mu_update(state.mu, params, features, refs, sos, config, t);
    state.epoch = t + 1;
    report.mu_snapshot_digest = digest_values(state.mu);
    for (double m : state.mu) {
      report.max_abs_mu = std::max(report.max_abs_mu, std::abs(m));
    }
    result.trace.push_back(std::move(report));
  }

  result.calibrated.values = std::move(state.mu);
  result.calibrated.raw_min = sos.raw_min;
  result.calibrated.raw_max = sos.raw_max;
  if (final_head != nullptr) {
    *final_head = std::move(params);
  }
  return result;
}

}  // namespace pc3

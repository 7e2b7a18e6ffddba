#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pc3/net.hpp"
#include "pc3/rng.hpp"
#include "pc3/types.hpp"

namespace pc3 {

// Per-item reference choice, resampled each epoch. ref_index[n] != n.
struct ReferenceAssignment {
  std::vector<std::size_t> ref_index;
};

struct EpochReport {
  std::uint32_t epoch = 0;
  double data_fit_loss = 0.0;    // mean (y - S - mu_ref)^2 over all items
  double constraint_loss = 0.0;  // mean (mu - S - mu_ref)^2 over all items
  double total_loss = 0.0;       // data_fit + beta * constraint
  std::uint64_t mu_snapshot_digest = 0;  // FNV-1a over mu at end of epoch
  double max_abs_score = 0.0;            // diagnostics for boundedness checks
  double max_abs_mu = 0.0;
};

struct BatchEvaluation {
  double loss = 0.0;       // data_fit + beta * constraint over the batch
  double data_fit = 0.0;
  double constraint = 0.0;
  std::vector<ForwardTape> tapes;  // parallel to the batch index list
  std::vector<double> scores;
};

struct CalibrationResult {
  LabelVector calibrated;
  std::vector<EpochReport> trace;
};

// FNV-1a over the little-endian bytes of the doubles.
std::uint64_t digest_values(std::span<const double> values);

// Each slot uniform over {0..n_items-1} \ {n}. Throws ValidationError when
// n_items < 2.
ReferenceAssignment sample_references(std::size_t n_items, Rng& rng);

// Mean over the batch of (y_n - S - mu_ref)^2 + beta * (mu_n - S - mu_ref)^2.
// Throws NumericError naming the item on a non-finite intermediate.
BatchEvaluation batch_loss(const HeadParameters& params,
                           const FeatureTable& features, const LabelVector& sos,
                           const std::vector<double>& mu,
                           const ReferenceAssignment& refs,
                           std::span<const std::size_t> batch, double beta);

// The batch loss and its exact gradient w.r.t. the head parameters; mu is
// treated as constant.
std::pair<double, GradientBundle> batch_gradient(
    const HeadParameters& params, const FeatureTable& features,
    const LabelVector& sos, const std::vector<double>& mu,
    const ReferenceAssignment& refs, std::span<const std::size_t> batch,
    double beta);

// One head-training pass: items shuffled, chunked into config.batch_size
// batches, one optimizer step per batch; mu is held fixed. The report's
// losses are evaluated over the full dataset after the pass (the state the
// following mu update sees); its digest fields are filled by calibrate.
EpochReport theta_epoch(HeadParameters& params, const FeatureTable& features,
                        const LabelVector& sos, const std::vector<double>& mu,
                        const ReferenceAssignment& refs,
                        const CalibrationConfig& config, std::uint32_t epoch,
                        Rng& rng);

// Synchronous MOS update from the pre-update snapshot:
//   epoch <  warmup_epochs: mu[n] = sos[n] exactly
//   epoch >= warmup_epochs: mu[n] = (1-alpha) * mu[n]
//                                   + alpha * (S(x_n, r_n) + mu[ref[n]])
std::vector<double> mu_update(const std::vector<double>& mu,
                              const HeadParameters& params,
                              const FeatureTable& features,
                              const ReferenceAssignment& refs,
                              const LabelVector& sos,
                              const CalibrationConfig& config,
                              std::uint32_t epoch);

// Full alternating optimization: per epoch, resample references, train the
// head, then update mu. Deterministic given config.seed (the engine consumes
// the derive(0) child stream of the seed). The calibrated labels carry the
// scale of the input SOS.
CalibrationResult calibrate(const FeatureTable& features, const LabelVector& sos,
                            const CalibrationConfig& config);

// Same, optionally starting from a checkpointed head and/or returning the
// trained head for later reuse.
CalibrationResult calibrate(const FeatureTable& features, const LabelVector& sos,
                            const CalibrationConfig& config,
                            const HeadParameters* initial_head,
                            HeadParameters* final_head);

}  // namespace pc3

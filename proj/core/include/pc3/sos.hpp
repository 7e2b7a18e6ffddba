#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pc3/rng.hpp"
#include "pc3/types.hpp"

namespace pc3 {

enum class SosProtocol {
  kRawSample,  // one raw opinion score drawn uniformly across subjects
  kGaussian,   // normal draw from the item's (mos, std)
  kEmpirical,  // draw from the item's rating histogram
};

SosProtocol parse_protocol(const std::string& name);
std::string to_string(SosProtocol protocol);

struct GaussianAnnotation {
  double mos = 0.0;
  double stddev = 0.0;
};

struct HistogramBin {
  double value = 0.0;
  double count = 0.0;
};

// Per-item subjective annotation carrying exactly one annotation kind.
struct RatingRecord {
  std::string item_id;
  std::optional<double> ground_truth_mos;
  std::optional<std::vector<double>> raw_scores;
  std::optional<GaussianAnnotation> gaussian;
  std::optional<std::vector<HistogramBin>> histogram;
};

// Exactly one annotation kind per record, raw_scores non-empty, std >= 0,
// histogram counts >= 0 with positive total, unique ids, finite values.
void validate(const std::vector<RatingRecord>& records);

// Ground-truth MOS of every record; throws ValidationError if any is missing.
std::vector<double> ground_truth_mos(const std::vector<RatingRecord>& records);

struct SynthesisStats {
  // Gaussian-protocol draws falling outside the [min, max] span of the
  // records' annotation means. Samples are not clipped.
  std::size_t out_of_range = 0;
};

// One score per item drawn under the protocol, returned normalized with the
// raw draw range recorded as the scale. Throws ValidationError listing the
// items whose annotation kind does not match the protocol.
LabelVector synthesize_sos(const std::vector<RatingRecord>& records,
                           SosProtocol protocol, Rng& rng,
                           SynthesisStats* stats = nullptr);

// Exactly round(rate * N) uniformly chosen items take the SOS value, the
// rest take MOS; mixing happens on the raw scale and the result is
// re-normalized. rate must lie in [0,1].
LabelVector mix_bias_rate(const LabelVector& mos, const LabelVector& sos,
                          double rate, Rng& rng);

// Per item: mean of k raw scores sampled uniformly without replacement.
// Requires every record to carry >= k raw scores.
LabelVector fos_mean(const std::vector<RatingRecord>& records, std::size_t k,
                     Rng& rng);

}  // namespace pc3

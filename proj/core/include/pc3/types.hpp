#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pc3 {

// Bad inputs: malformed files, contract violations, out-of-range flags.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or diverging arithmetic discovered at runtime.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// N items, one D-dimensional quality-aware descriptor per item, row-major.
struct FeatureTable {
  std::vector<std::string> item_ids;
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t size() const { return item_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

// Throws ValidationError unless: >= 2 items, unique ids, dim >= 1, all
// entries finite, data length == size() * dim.
void validate(const FeatureTable& table);

// Labels on the normalized [0,1] scale plus the affine map back to the raw
// scale: raw = raw_min + value * (raw_max - raw_min).
struct LabelVector {
  std::vector<double> values;
  double raw_min = 0.0;
  double raw_max = 1.0;

  std::size_t size() const { return values.size(); }
};

// Min-max normalization. The recorded scale is the data range, so
// denormalize_labels(normalize_labels(raw)) recovers raw up to rounding.
// Throws ValidationError on non-finite input or a constant vector
// (degenerate scale).
LabelVector normalize_labels(const std::vector<double>& raw);
std::vector<double> denormalize_labels(const LabelVector& labels);

struct CalibrationConfig {
  double alpha = 0.1;            // refresh rate of the MOS update
  double beta = 1.0 / 9.0;       // weight of the constancy residual
  double lambda = 1e-4;          // head learning rate
  std::uint32_t warmup_epochs = 1;
  std::uint32_t total_epochs = 60;
  std::uint32_t batch_size = 64;
  std::uint32_t hidden1 = 128;
  std::uint32_t hidden2 = 64;
  std::uint64_t seed = 0;
};

// alpha in [0,1], beta >= 0, lambda > 0, total_epochs/batch_size/hidden >= 1.
void validate(const CalibrationConfig& config);

// Current per-item MOS estimates on the normalized scale.
struct CalibrationState {
  std::vector<double> mu;
  std::uint32_t epoch = 0;
};

}  // namespace pc3

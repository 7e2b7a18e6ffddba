#include "pc3/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace pc3 {

void validate(const FeatureTable& table) {
  const std::size_t n = table.item_ids.size();
  if (n < 2) {
    throw ValidationError("feature table needs at least 2 items, got " +
                          std::to_string(n));
  }
  if (table.dim < 1) {
    throw ValidationError("feature dimension must be >= 1");
  }
  if (table.data.size() != n * table.dim) {
    throw ValidationError("feature data length " +
                          std::to_string(table.data.size()) +
                          " does not match " + std::to_string(n) + " x " +
                          std::to_string(table.dim));
  }
  std::unordered_set<std::string> seen;
  seen.reserve(n);
  for (const auto& id : table.item_ids) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate item id '" + id + "'");
    }
  }
  for (std::size_t i = 0; i < table.data.size(); ++i) {
    if (!std::isfinite(table.data[i])) {
      throw ValidationError("non-finite feature value for item '" +
                            table.item_ids[i / table.dim] + "'");
    }
  }
}

LabelVector normalize_labels(const std::vector<double>& raw) {
  if (raw.empty()) {
    throw ValidationError("cannot normalize an empty label vector");
  }
  for (double v : raw) {
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite label value");
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double raw_min = *lo;
  const double raw_max = *hi;
  if (!(raw_max > raw_min)) {
    throw ValidationError("degenerate scale: labels are constant (" +
                          std::to_string(raw_min) + ")");
  }
  LabelVector out;
  out.raw_min = raw_min;
  out.raw_max = raw_max;
  out.values.resize(raw.size());
  const double range = raw_max - raw_min;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.values[i] = (raw[i] - raw_min) / range;
  }
  return out;
}

std::vector<double> denormalize_labels(const LabelVector& labels) {
  const double range = labels.raw_max - labels.raw_min;
  std::vector<double> out(labels.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = labels.raw_min + labels.values[i] * range;
  }
  return out;
}

void validate(const CalibrationConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0,1]");
  }
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) {
    throw ValidationError("beta must be finite and >= 0");
  }
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    throw ValidationError("lambda must be finite and > 0");
  }
  if (config.total_epochs < 1) {
    throw ValidationError("total_epochs must be >= 1");
  }
  if (config.batch_size < 1) {
    throw ValidationError("batch_size must be >= 1");
  }
  if (config.hidden1 < 1 || config.hidden2 < 1) {
    throw ValidationError("hidden dimensions must be >= 1");
  }
}

}  // namespace pc3

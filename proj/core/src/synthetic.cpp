#include "pc3/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pc3/rng.hpp"

namespace pc3 {

void validate(const SyntheticSpec& spec) {
  if (spec.n_items < 2) {
    throw ValidationError("synthetic spec needs n_items >= 2");
  }
  if (spec.feature_dim < 1) {
    throw ValidationError("synthetic spec needs feature_dim >= 1");
  }
  if (!(spec.feature_noise >= 0.0) || !(spec.sos_noise_std >= 0.0)) {
    throw ValidationError("synthetic noise levels must be >= 0");
  }
  if (spec.subjects_per_item < 1) {
    throw ValidationError("synthetic spec needs subjects_per_item >= 1");
  }
}

std::vector<double> mos_embedding(double mos, std::size_t dim) {
  std::vector<double> out(dim);
  constexpr double half_pi = std::numbers::pi / 2.0;
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  for (std::size_t j = 0; j < dim; ++j) {
    out[j] = std::sin(half_pi * static_cast<double>(j + 1) * mos - quarter_pi);
  }
  return out;
}

SyntheticDataset generate(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  SyntheticDataset out;
  out.features.dim = spec.feature_dim;
  out.features.item_ids.reserve(spec.n_items);
  out.features.data.reserve(spec.n_items * spec.feature_dim);
  out.records.reserve(spec.n_items);

  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const double mos = rng.uniform01();
    const std::vector<double> emb = mos_embedding(mos, spec.feature_dim);
    for (double e : emb) {
      out.features.data.push_back(e + spec.feature_noise * rng.gaussian());
    }
    RatingRecord record;
    record.item_id = "item_" + std::to_string(i);
    record.ground_truth_mos = mos;
    std::vector<double> scores(spec.subjects_per_item);
    for (double& s : scores) {
      s = mos + spec.sos_noise_std * rng.gaussian();
    }
    record.raw_scores = std::move(scores);
    out.features.item_ids.push_back(record.item_id);
    out.records.push_back(std::move(record));
  }
  validate(out.features);
  validate(out.records);
  return out;
}

}  // namespace pc3

#pragma once

#include <cstdint>
#include <vector>

#include "pc3/sos.hpp"
#include "pc3/types.hpp"

namespace pc3 {

struct SyntheticSpec {
  std::size_t n_items = 500;
  std::size_t feature_dim = 32;
  double feature_noise = 0.05;
  double sos_noise_std = 0.15;
  std::size_t subjects_per_item = 8;
  std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

struct SyntheticDataset {
  FeatureTable features;
  std::vector<RatingRecord> records;  // raw_scores + ground_truth_mos
};

// Fixed smooth injective embedding of a scalar MOS into dim coordinates:
// coordinate j is sin(pi/2 * (j+1) * mos - pi/4). Coordinate 0 is strictly
// increasing on [0,1], so nearby feature rows imply nearby MOS.
std::vector<double> mos_embedding(double mos, std::size_t dim);

// Ground-truth MOS uniform on [0,1]; features = embedding + feature_noise *
// gaussian; raw scores = mos + sos_noise_std * gaussian per subject. Pure
// function of the spec (seed included).
SyntheticDataset generate(const SyntheticSpec& spec);

}  // namespace pc3

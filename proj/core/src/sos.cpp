#include "pc3/sos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace pc3 {

namespace {

int annotation_count(const RatingRecord& r) {
  return (r.raw_scores.has_value() ? 1 : 0) + (r.gaussian.has_value() ? 1 : 0) +
         (r.histogram.has_value() ? 1 : 0);
}

// Mean of whichever annotation the record carries.
double annotation_mean(const RatingRecord& r) {
  if (r.raw_scores) {
    double sum = 0.0;
    for (double s : *r.raw_scores) {
      sum += s;
    }
    return sum / static_cast<double>(r.raw_scores->size());
  }
  if (r.gaussian) {
    return r.gaussian->mos;
  }
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& bin : *r.histogram) {
    total += bin.count;
    weighted += bin.count * bin.value;
  }
  return weighted / total;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += "'" + ids[i] + "'";
  }
  if (ids.size() > shown) {
    out += " and " + std::to_string(ids.size() - shown) + " more";
  }
  return out;
}

}  // namespace

SosProtocol parse_protocol(const std::string& name) {
  if (name == "raw-sample") {
    return SosProtocol::kRawSample;
  }
  if (name == "gaussian") {
    return SosProtocol::kGaussian;
  }
  if (name == "empirical") {
    return SosProtocol::kEmpirical;
  }
  throw ValidationError("unknown protocol '" + name +
                        "' (expected raw-sample, gaussian or empirical)");
}

std::string to_string(SosProtocol protocol) {
  switch (protocol) {
    case SosProtocol::kRawSample:
      return "raw-sample";
    case SosProtocol::kGaussian:
      return "gaussian";
    case SosProtocol::kEmpirical:
      return "empirical";
  }
  return "?";
}

void validate(const std::vector<RatingRecord>& records) {
  if (records.empty()) {
    throw ValidationError("rating record list is empty");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (const auto& r : records) {
    if (r.item_id.empty()) {
      throw ValidationError("rating record with empty item_id");
    }
    if (!seen.insert(r.item_id).second) {
      throw ValidationError("duplicate rating record for item '" + r.item_id +
                            "'");
    }
    const int kinds = annotation_count(r);
    if (kinds != 1) {
      throw ValidationError(
          "item '" + r.item_id + "': exactly one of raw_scores, gaussian or "
          "histogram is required, found " +
          std::to_string(kinds));
    }
    if (r.ground_truth_mos && !std::isfinite(*r.ground_truth_mos)) {
      throw ValidationError("item '" + r.item_id +
                            "': non-finite ground_truth_mos");
    }
    if (r.raw_scores) {
      if (r.raw_scores->empty()) {
        throw ValidationError("item '" + r.item_id + "': raw_scores is empty");
      }
      for (double s : *r.raw_scores) {
        if (!std::isfinite(s)) {
          throw ValidationError("item '" + r.item_id +
                                "': non-finite raw score");
        }
      }
    }
    if (r.gaussian) {
      if (!std::isfinite(r.gaussian->mos) || !std::isfinite(r.gaussian->stddev)) {
        throw ValidationError("item '" + r.item_id +
                              "': non-finite gaussian annotation");
      }
      if (r.gaussian->stddev < 0.0) {
        throw ValidationError("item '" + r.item_id +
                              "': gaussian std must be >= 0");
      }
    }
    if (r.histogram) {
      if (r.histogram->empty()) {
        throw ValidationError("item '" + r.item_id + "': histogram is empty");
      }
      double total = 0.0;
      for (const auto& bin : *r.histogram) {
        if (!std::isfinite(bin.value) || !std::isfinite(bin.count)) {
          throw ValidationError("item '" + r.item_id +
                                "': non-finite histogram bin");
        }
        if (bin.count < 0.0) {
          throw ValidationError("item '" + r.item_id +
                                "': histogram count must be >= 0");
        }
        total += bin.count;
      }
      if (!(total > 0.0)) {
        throw ValidationError("item '" + r.item_id +
                              "': histogram total count must be positive");
      }
    }
  }
}

std::vector<double> ground_truth_mos(const std::vector<RatingRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  std::vector<std::string> missing;
  for (const auto& r : records) {
    if (!r.ground_truth_mos) {
      missing.push_back(r.item_id);
    } else {
      out.push_back(*r.ground_truth_mos);
    }
  }
  if (!missing.empty()) {
    throw ValidationError("ground_truth_mos missing for " + join_ids(missing));
  }
  return out;
}

LabelVector synthesize_sos(const std::vector<RatingRecord>& records,
                           SosProtocol protocol, Rng& rng,
                           SynthesisStats* stats) {
  validate(records);
  std::vector<std::string> mismatched;
  for (const auto& r : records) {
    const bool ok = (protocol == SosProtocol::kRawSample && r.raw_scores) ||
                    (protocol == SosProtocol::kGaussian && r.gaussian) ||
                    (protocol == SosProtocol::kEmpirical && r.histogram);
    if (!ok) {
      mismatched.push_back(r.item_id);
    }
  }
  if (!mismatched.empty()) {
    throw ValidationError("protocol " + to_string(protocol) +
                          " does not match the annotation of " +
                          join_ids(mismatched));
  }

  double mean_lo = std::numeric_limits<double>::infinity();
  double mean_hi = -std::numeric_limits<double>::infinity();
  if (protocol == SosProtocol::kGaussian && stats != nullptr) {
    for (const auto& r : records) {
      const double m = annotation_mean(r);
      mean_lo = std::min(mean_lo, m);
      mean_hi = std::max(mean_hi, m);
    }
  }

  std::vector<double> draws;
  draws.reserve(records.size());
  for (const auto& r : records) {
    double value = 0.0;
    switch (protocol) {
      case SosProtocol::kRawSample:
        value = (*r.raw_scores)[rng.uniform_index(r.raw_scores->size())];
        break;
      case SosProtocol::kGaussian:
        value = rng.gaussian(r.gaussian->mos, r.gaussian->stddev);
        if (stats != nullptr && (value < mean_lo || value > mean_hi)) {
          ++stats->out_of_range;
        }
        break;
      case SosProtocol::kEmpirical: {
        double total = 0.0;
        for (const auto& bin : *r.histogram) {
          total += bin.count;
        }
        const double target = rng.uniform01() * total;
        double cum = 0.0;
        value = r.histogram->back().value;
        for (const auto& bin : *r.histogram) {
          cum += bin.count;
          if (target < cum) {
            value = bin.value;
            break;
          }
        }
        break;
      }
    }
    draws.push_back(value);
  }
  return normalize_labels(draws);
}

LabelVector mix_bias_rate(const LabelVector& mos, const LabelVector& sos,
                          double rate, Rng& rng) {
  if (mos.size() != sos.size()) {
    throw ValidationError("mos and sos label vectors differ in length");
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ValidationError("bias rate must lie in [0,1]");
  }
  const std::size_t n = mos.size();
  const auto k = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(n)));
  std::vector<double> mixed = denormalize_labels(mos);
  const std::vector<double> raw_sos = denormalize_labels(sos);
  for (std::size_t i : rng.sample_without_replacement(n, std::min(k, n))) {
    mixed[i] = raw_sos[i];
  }
  return normalize_labels(mixed);
}

LabelVector fos_mean(const std::vector<RatingRecord>& records, std::size_t k,
                     Rng& rng) {
  validate(records);
  if (k < 1) {
    throw ValidationError("fos_mean requires k >= 1");
  }
  std::vector<std::string> lacking;
  for (const auto& r : records) {
    if (!r.raw_scores || r.raw_scores->size() < k) {
      lacking.push_back(r.item_id);
    }
  }
  if (!lacking.empty()) {
    throw ValidationError("fewer than " + std::to_string(k) +
                          " raw scores for " + join_ids(lacking));
  }
  std::vector<double> means;
  means.reserve(records.size());
  for (const auto& r : records) {
    const auto& scores = *r.raw_scores;
    double sum = 0.0;
    for (std::size_t idx : rng.sample_without_replacement(scores.size(), k)) {
      sum += scores[idx];
    }
    means.push_back(sum / static_cast<double>(k));
  }
  return normalize_labels(means);
}

}  // namespace pc3

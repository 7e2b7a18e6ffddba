#include "pc3/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pc3/types.hpp"

namespace pc3::metrics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b,
                std::size_t min_len) {
  if (a.size() != b.size()) {
    throw ValidationError("metric inputs differ in length: " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  if (a.size() < min_len) {
    throw ValidationError("metric needs at least " + std::to_string(min_len) +
                          " samples, got " + std::to_string(a.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ValidationError("non-finite metric input at index " +
                            std::to_string(i));
    }
  }
}

// Fractional average-tie ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sxy += da * db;
    sxx += da * da;
    syy += db * db;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw ValidationError("correlation undefined for a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double srcc(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, 2);
  const std::vector<double> ra = fractional_ranks(a);
  const std::vector<double> rb = fractional_ranks(b);
  return pearson(ra, rb);
}

double plcc(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, 2);
  return pearson(a, b);
}

double krocc(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, 2);
  const std::size_t n = a.size();
  long long concordant = 0;
  long long discordant = 0;
  long long ties_a = 0;
  long long ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool tie_a = a[i] == a[j];
      const bool tie_b = b[i] == b[j];
      if (tie_a) {
        ++ties_a;
      }
      if (tie_b) {
        ++ties_b;
      }
      if (tie_a || tie_b) {
        continue;
      }
      if ((a[i] < a[j]) == (b[i] < b[j])) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const auto pairs = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(pairs - ties_a) *
                                 static_cast<double>(pairs - ties_b));
  if (!(denom > 0.0)) {
    throw ValidationError("correlation undefined for a constant vector");
  }
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0,
                    1.0);
}

double mse(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

MetricsReport compute_all(std::span<const double> a,
                          std::span<const double> b) {
  MetricsReport report;
  report.srcc = srcc(a, b);
  report.plcc = plcc(a, b);
  report.krocc = krocc(a, b);
  report.mse = mse(a, b);
  return report;
}

MetricsReport median_report(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) {
    throw ValidationError("median of an empty report list");
  }
  auto median_of = [&](double MetricsReport::* field) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const auto& r : reports) {
      values.push_back(r.*field);
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
      return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
  };
  MetricsReport out;
  out.srcc = median_of(&MetricsReport::srcc);
  out.plcc = median_of(&MetricsReport::plcc);
  out.krocc = median_of(&MetricsReport::krocc);
  out.mse = median_of(&MetricsReport::mse);
  return out;
}

}  // namespace pc3::metrics

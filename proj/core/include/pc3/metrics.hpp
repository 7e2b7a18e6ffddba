#pragma once

#include <span>
#include <vector>

namespace pc3::metrics {

struct MetricsReport {
  double srcc = 0.0;
  double plcc = 0.0;
  double krocc = 0.0;
  double mse = 0.0;
};

// Spearman: Pearson correlation of fractional (average-tie) ranks.
double srcc(std::span<const double> a, std::span<const double> b);

// Pearson linear correlation.
double plcc(std::span<const double> a, std::span<const double> b);

// Kendall tau-b (tie-corrected).
double krocc(std::span<const double> a, std::span<const double> b);

double mse(std::span<const double> a, std::span<const double> b);

// Correlations require length >= 2 and at least one distinct pair per
// vector; a constant vector raises ValidationError (undefined correlation).
MetricsReport compute_all(std::span<const double> a, std::span<const double> b);

// Per-field median; even counts average the middle two.
MetricsReport median_report(const std::vector<MetricsReport>& reports);

}  // namespace pc3::metrics

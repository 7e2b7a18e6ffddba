#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pc3/engine.hpp"
#include "pc3/metrics.hpp"
#include "pc3/sos.hpp"
#include "pc3/types.hpp"

namespace pc3::io {

// Fixed rendering used by every CSV writer: 17 significant digits, enough to
// round-trip an IEEE double exactly.
std::string format_double(double value);

// CSV with header item_id,f0,...,f{D-1}. Readers reject ragged rows,
// duplicate ids and non-finite values, reporting 1-based line numbers.
FeatureTable read_features(const std::string& path);
void write_features(const std::string& path, const FeatureTable& table);

// JSON array of objects {item_id, ground_truth_mos?, and exactly one of
// raw_scores | gaussian:{mos,std} | histogram:[{value,count}]}.
std::vector<RatingRecord> read_ratings(const std::string& path);
void write_ratings(const std::string& path,
                   const std::vector<RatingRecord>& records);

// Flat JSON object; omitted keys take the defaults of CalibrationConfig.
// Unknown keys are rejected by name. hidden_dims is a two-element array.
CalibrationConfig read_config(const std::string& path);

// Two-column label CSV (item_id,<name>). read_label_column picks the lone
// value column, or `column` when the file has several.
void write_label_column(const std::string& path, const std::string& column,
                        const std::vector<std::string>& item_ids,
                        const std::vector<double>& values);
std::vector<std::pair<std::string, double>> read_label_column(
    const std::string& path, const std::optional<std::string>& column = {});

void write_labels_csv(const std::string& path,
                      const std::vector<std::string>& item_ids,
                      const std::vector<double>& sos,
                      const std::vector<double>& calibrated,
                      const std::optional<std::vector<double>>& ground_truth);

void write_trace_csv(const std::string& path,
                     const std::vector<EpochReport>& trace);

void write_metrics_json(const std::string& path,
                        const metrics::MetricsReport& report);

// Convenience bundle for one calibration run: labels.csv, trace.csv and,
// when ground truth is available, metrics.json under out_dir.
void write_results(const std::string& out_dir,
                   const std::vector<std::string>& item_ids,
                   const std::vector<double>& sos,
                   const std::vector<double>& calibrated,
                   const std::optional<std::vector<double>>& ground_truth,
                   const std::optional<metrics::MetricsReport>& report,
                   const std::vector<EpochReport>& trace);

}  // namespace pc3::io

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pc3/metrics.hpp"
#include "pc3/sos.hpp"
#include "pc3/synthetic.hpp"
#include "pc3/types.hpp"

namespace pc3::experiments {

enum class ExperimentKind {
  kCalibration,
  kBiasRate,
  kFos,
  kAlphaSweep,
  kDownstream,
};

ExperimentKind parse_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

struct DatasetFiles {
  std::string features_path;
  std::string ratings_path;
};

// Every compared variant within a repeat consumes the labels synthesized
// from Rng(base_seed + repeat) and an engine seeded with base_seed + repeat,
// so per-repeat deltas isolate the calibration effect.
struct ExperimentPlan {
  std::variant<SyntheticSpec, DatasetFiles> source = SyntheticSpec{};
  SosProtocol protocol = SosProtocol::kRawSample;
  std::vector<double> rates = {0.6, 0.8};
  std::vector<std::size_t> subject_counts = {1, 2, 4, 8};
  std::vector<double> alphas = {0.0, 0.1, 0.2, 0.6, 0.8};
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;
  std::size_t threads = 1;
  CalibrationConfig config;
};

struct LoadedDataset {
  FeatureTable features;
  std::vector<RatingRecord> records;
  std::vector<double> ground_truth;  // raw scale
};

// Generates or reads the plan's dataset; requires ground truth on every
// record (evaluation is impossible without it) and aligned item ids.
LoadedDataset load_dataset(const ExperimentPlan& plan);

// 100 * (variant - base) / base per metric; negative MSE deltas mean
// improvement. NaN where base is zero.
metrics::MetricsReport delta_percent(const metrics::MetricsReport& base,
                                     const metrics::MetricsReport& variant);

// Mean absolute label error per ground-truth decile (equal-population
// buckets of the MOS ordering), pooled over repeats.
struct DecileRow {
  std::size_t decile = 0;
  double mean_ground_truth = 0.0;
  double mean_abs_err_sos = 0.0;
  double mean_abs_err_pc3 = 0.0;
};

struct CalibrationTable {
  metrics::MetricsReport sos;   // median over repeats
  metrics::MetricsReport pc3;   // median over repeats
  metrics::MetricsReport delta_pct;
  std::vector<DecileRow> error_bars;
};
CalibrationTable run_calibration(const ExperimentPlan& plan);

struct BiasRateRow {
  double rate = 0.0;
  metrics::MetricsReport sos;
  metrics::MetricsReport pc3;
  metrics::MetricsReport delta_pct;
};
std::vector<BiasRateRow> run_bias_rate(const ExperimentPlan& plan);

struct FosRow {
  std::size_t subjects = 0;
  metrics::MetricsReport fos;
  metrics::MetricsReport pc3;
};
std::vector<FosRow> run_fos(const ExperimentPlan& plan);

struct AlphaSweepResult {
  metrics::MetricsReport sos;  // baseline row
  std::vector<std::pair<double, metrics::MetricsReport>> rows;  // sorted by alpha
};
AlphaSweepResult run_alpha_sweep(const ExperimentPlan& plan);

// Identical feed-forward regressors (D -> 64 -> 1) trained on each label
// variant over shared 80/20 splits, evaluated against ground truth on the
// held-out split.
struct DownstreamTable {
  metrics::MetricsReport mos_trained;
  metrics::MetricsReport sos_trained;
  metrics::MetricsReport pc3_trained;
  metrics::MetricsReport delta_pct;  // pc3 vs sos
};
DownstreamTable run_downstream(const ExperimentPlan& plan);

// Writers: metrics.json + table.csv under out_dir, plus the experiment's
// plot-data CSVs (error_bars.csv for calibration, fos_curves.csv for fos).
void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const CalibrationTable& table);
void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const std::vector<BiasRateRow>& rows);
void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const std::vector<FosRow>& rows);
void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const AlphaSweepResult& result);
void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const DownstreamTable& table);

// Human-readable table for stdout.
std::string render_table(const CalibrationTable& table);
std::string render_table(const std::vector<BiasRateRow>& rows);
std::string render_table(const std::vector<FosRow>& rows);
std::string render_table(const AlphaSweepResult& result);
std::string render_table(const DownstreamTable& table);

}  // namespace pc3::experiments

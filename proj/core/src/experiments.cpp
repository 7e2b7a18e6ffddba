#include "pc3/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "pc3/engine.hpp"
#include "pc3/io.hpp"
#include "pc3/rng.hpp"

namespace pc3::experiments {

namespace {

using metrics::MetricsReport;
using nlohmann::ordered_json;

constexpr std::size_t kDecileCount = 10;
constexpr std::size_t kRegressorHidden = 64;
constexpr std::size_t kRegressorEpochs = 50;
constexpr std::size_t kRegressorBatch = 32;
constexpr double kRegressorLearningRate = 3e-3;

void run_repeats(std::size_t repeats, std::size_t threads,
                 const std::function<void(std::size_t)>& body) {
  if (repeats == 0) {
    throw ValidationError("experiment needs repeats >= 1");
  }
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), repeats);
  if (workers <= 1) {
    for (std::size_t r = 0; r < repeats; ++r) {
      body(r);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= repeats) {
        return;
      }
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

std::vector<double> gather(const std::vector<double>& values,
                           const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    out.push_back(values[i]);
  }
  return out;
}

// Equal-population buckets of the ground-truth ordering; bucket of item i.
std::vector<std::size_t> decile_assignment(const std::vector<double>& gt) {
  const std::size_t n = gt.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gt[a] < gt[b]; });
  std::vector<std::size_t> bucket(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    bucket[order[pos]] = std::min(pos * kDecileCount / n, kDecileCount - 1);
  }
  return bucket;
}

// Minimal feed-forward regressor (dim -> 64 -> 1) with the same adaptive
// moment update as the head; stands in for the downstream IQA model.
struct Regressor {
  std::size_t dim = 0;
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
  std::vector<double> mw1, vw1, mb1, vb1, mw2, vw2;
  double mb2 = 0.0, vb2 = 0.0;
  std::uint64_t step = 0;

  Regressor(std::size_t input_dim, Rng& rng) : dim(input_dim) {
    const std::size_t h = kRegressorHidden;
    w1.resize(dim * h);
    b1.assign(h, 0.0);
    w2.resize(h);
    const double l1 = std::sqrt(6.0 / static_cast<double>(dim + h));
    const double l2 = std::sqrt(6.0 / static_cast<double>(h + 1));
    for (double& w : w1) {
      w = rng.uniform(-l1, l1);
    }
    for (double& w : w2) {
      w = rng.uniform(-l2, l2);
    }
    mw1.assign(w1.size(), 0.0);
    vw1.assign(w1.size(), 0.0);
    mb1.assign(h, 0.0);
    vb1.assign(h, 0.0);
    mw2.assign(h, 0.0);
    vw2.assign(h, 0.0);
  }

  double predict(std::span<const double> x, std::vector<double>* hidden) const {
    const std::size_t h = w2.size();
    std::vector<double> a(b1);
    for (std::size_t i = 0; i < dim; ++i) {
      const double xi = x[i];
      const double* row = w1.data() + i * h;
      for (std::size_t j = 0; j < h; ++j) {
        a[j] += xi * row[j];
      }
    }
    double y = b2;
    for (std::size_t j = 0; j < h; ++j) {
      a[j] = a[j] > 0.0 ? a[j] : 0.0;
      y += a[j] * w2[j];
    }
    if (hidden != nullptr) {
      *hidden = std::move(a);
    }
    return y;
  }

  void train(const FeatureTable& features, const std::vector<double>& labels,
             const std::vector<std::size_t>& train_idx, Rng& rng) {
    const std::size_t h = w2.size();
    std::vector<std::size_t> order = train_idx;
    std::vector<double> gw1(w1.size()), gb1(h), gw2(h);
    for (std::size_t epoch = 0; epoch < kRegressorEpochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
      }
      for (std::size_t start = 0; start < order.size();
           start += kRegressorBatch) {
        const std::size_t count =
            std::min(kRegressorBatch, order.size() - start);
        std::fill(gw1.begin(), gw1.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gw2.begin(), gw2.end(), 0.0);
        double gb2 = 0.0;
        for (std::size_t b = 0; b < count; ++b) {
          const std::size_t n = order[start + b];
          std::vector<double> hidden;
          const double pred = predict(features.row(n), &hidden);
          const double upstream = 2.0 * (pred - labels[n]) /
                                  static_cast<double>(count);
          gb2 += upstream;
          for (std::size_t j = 0; j < h; ++j) {
            gw2[j] += upstream * hidden[j];
            const double delta = hidden[j] > 0.0 ? upstream * w2[j] : 0.0;
            gb1[j] += delta;
            if (delta != 0.0) {
              const auto x = features.row(n);
              for (std::size_t i2 = 0; i2 < dim; ++i2) {
                gw1[i2 * h + j] += delta * x[i2];
              }
            }
          }
        }
        adam(w1, mw1, vw1, gw1);
        adam(b1, mb1, vb1, gb1);
        adam(w2, mw2, vw2, gw2);
        adam_scalar(b2, mb2, vb2, gb2);
        ++step;
      }
    }
  }

 private:
  void adam(std::vector<double>& w, std::vector<double>& m,
            std::vector<double>& v, const std::vector<double>& g) {
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 / (1.0 - std::pow(0.9, t));
    const double c2 = 1.0 / (1.0 - std::pow(0.999, t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      w[i] -=
          kRegressorLearningRate * (m[i] * c1) / (std::sqrt(v[i] * c2) + 1e-8);
    }
  }

  void adam_scalar(double& w, double& m, double& v, double g) {
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 / (1.0 - std::pow(0.9, t));
    const double c2 = 1.0 / (1.0 - std::pow(0.999, t));
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    w -= kRegressorLearningRate * (m * c1) / (std::sqrt(v * c2) + 1e-8);
  }
};

ordered_json report_json(const MetricsReport& r) {
  ordered_json j;
  j["srcc"] = r.srcc;
  j["plcc"] = r.plcc;
  j["krocc"] = r.krocc;
  j["mse"] = r.mse;
  return j;
}

ordered_json plan_json(const ExperimentPlan& plan, ExperimentKind kind) {
  ordered_json j;
  j["experiment"] = to_string(kind);
  j["repeats"] = plan.repeats;
  j["base_seed"] = plan.base_seed;
  j["protocol"] = to_string(plan.protocol);
  return j;
}

void dump_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  os << j.dump(2) << '\n';
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  return os;
}

void append_metrics_csv(std::ofstream& os, const MetricsReport& r) {
  os << io::format_double(r.srcc) << ',' << io::format_double(r.plcc) << ','
     << io::format_double(r.krocc) << ',' << io::format_double(r.mse) << '\n';
}

std::string row_text(const char* label, const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %9.4f %9.4f %9.4f %9.4f\n", label,
                r.srcc, r.plcc, r.krocc, r.mse);
  return buf;
}

const char* kTableHeader = "method            srcc      plcc     krocc       mse\n";

}  // namespace

ExperimentKind parse_kind(const std::string& name) {
  if (name == "calibration") {
    return ExperimentKind::kCalibration;
  }
  if (name == "bias-rate") {
    return ExperimentKind::kBiasRate;
  }
  if (name == "fos") {
    return ExperimentKind::kFos;
  }
  if (name == "alpha-sweep") {
    return ExperimentKind::kAlphaSweep;
  }
  if (name == "downstream") {
    return ExperimentKind::kDownstream;
  }
  throw ValidationError(
      "unknown experiment kind '" + name +
      "' (expected calibration, bias-rate, fos, alpha-sweep or downstream)");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kCalibration:
      return "calibration";
    case ExperimentKind::kBiasRate:
      return "bias-rate";
    case ExperimentKind::kFos:
      return "fos";
    case ExperimentKind::kAlphaSweep:
      return "alpha-sweep";
    case ExperimentKind::kDownstream:
      return "downstream";
  }
  return "?";
}

LoadedDataset load_dataset(const ExperimentPlan& plan) {
  LoadedDataset out;
  if (const auto* spec = std::get_if<SyntheticSpec>(&plan.source)) {
    SyntheticDataset data = generate(*spec);
    out.features = std::move(data.features);
    out.records = std::move(data.records);
  } else {
    const auto& files = std::get<DatasetFiles>(plan.source);
    out.features = io::read_features(files.features_path);
    out.records = io::read_ratings(files.ratings_path);
  }
  if (out.features.size() != out.records.size()) {
    throw ValidationError("features and ratings disagree on item count: " +
                          std::to_string(out.features.size()) + " vs " +
                          std::to_string(out.records.size()));
  }
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    if (out.features.item_ids[i] != out.records[i].item_id) {
      throw ValidationError("item id mismatch at row " + std::to_string(i) +
                            ": '" + out.features.item_ids[i] + "' vs '" +
                            out.records[i].item_id + "'");
    }
  }
  out.ground_truth = ground_truth_mos(out.records);
  return out;
}

MetricsReport delta_percent(const MetricsReport& base,
                            const MetricsReport& variant) {
  auto pct = [](double b, double v) {
    if (b == 0.0) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return 100.0 * (v - b) / b;
  };
  MetricsReport out;
  out.srcc = pct(base.srcc, variant.srcc);
  out.plcc = pct(base.plcc, variant.plcc);
  out.krocc = pct(base.krocc, variant.krocc);
  out.mse = pct(base.mse, variant.mse);
  return out;
}

CalibrationTable run_calibration(const ExperimentPlan& plan) {
  const LoadedDataset data = load_dataset(plan);
  const std::vector<std::size_t> buckets = decile_assignment(data.ground_truth);

  struct RepeatOut {
    MetricsReport sos, pc3;
    std::vector<double> err_sos, err_pc3;  // per-decile absolute error sums
  };
  std::vector<RepeatOut> results(plan.repeats);

  run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
    Rng rng(plan.base_seed + r);
    const LabelVector sos = synthesize_sos(data.records, plan.protocol, rng);
    CalibrationConfig config = plan.config;
    config.seed = plan.base_seed + r;
    const CalibrationResult cal = calibrate(data.features, sos, config);

    const std::vector<double> sos_raw = denormalize_labels(sos);
    const std::vector<double> pc3_raw = denormalize_labels(cal.calibrated);
    RepeatOut out;
    out.sos = metrics::compute_all(sos_raw, data.ground_truth);
    out.pc3 = metrics::compute_all(pc3_raw, data.ground_truth);
    out.err_sos.assign(kDecileCount, 0.0);
    out.err_pc3.assign(kDecileCount, 0.0);
    for (std::size_t i = 0; i < sos_raw.size(); ++i) {
      out.err_sos[buckets[i]] += std::abs(sos_raw[i] - data.ground_truth[i]);
      out.err_pc3[buckets[i]] += std::abs(pc3_raw[i] - data.ground_truth[i]);
    }
    results[r] = std::move(out);
  });

  std::vector<MetricsReport> sos_reports, pc3_reports;
  for (const auto& out : results) {
    sos_reports.push_back(out.sos);
    pc3_reports.push_back(out.pc3);
  }

  CalibrationTable table;
  table.sos = metrics::median_report(sos_reports);
  table.pc3 = metrics::median_report(pc3_reports);
  table.delta_pct = delta_percent(table.sos, table.pc3);

  std::vector<std::size_t> bucket_counts(kDecileCount, 0);
  std::vector<double> bucket_gt(kDecileCount, 0.0);
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    ++bucket_counts[buckets[i]];
    bucket_gt[buckets[i]] += data.ground_truth[i];
  }
  for (std::size_t d = 0; d < kDecileCount; ++d) {
    DecileRow row;
    row.decile = d;
    const double count = static_cast<double>(bucket_counts[d]);
    if (count > 0) {
      row.mean_ground_truth = bucket_gt[d] / count;
      double err_sos = 0.0;
      double err_pc3 = 0.0;
      for (const auto& out : results) {
        err_sos += out.err_sos[d];
        err_pc3 += out.err_pc3[d];
      }
      row.mean_abs_err_sos =
          err_sos / (count * static_cast<double>(plan.repeats));
      row.mean_abs_err_pc3 =
          err_pc3 / (count * static_cast<double>(plan.repeats));
    }
    table.error_bars.push_back(row);
  }
  return table;
}

std::vector<BiasRateRow> run_bias_rate(const ExperimentPlan& plan) {
  if (plan.rates.empty()) {
    throw ValidationError("bias-rate experiment needs a non-empty rate grid");
  }
  const LoadedDataset data = load_dataset(plan);
  const LabelVector mos = normalize_labels(data.ground_truth);

  std::vector<BiasRateRow> rows;
  for (double rate : plan.rates) {
    std::vector<MetricsReport> sos_reports(plan.repeats);
    std::vector<MetricsReport> pc3_reports(plan.repeats);
    run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
      Rng rng(plan.base_seed + r);
      const LabelVector sos = synthesize_sos(data.records, plan.protocol, rng);
      const LabelVector mixed = mix_bias_rate(mos, sos, rate, rng);
      CalibrationConfig config = plan.config;
      config.seed = plan.base_seed + r;
      const CalibrationResult cal = calibrate(data.features, mixed, config);
      sos_reports[r] = metrics::compute_all(denormalize_labels(mixed),
                                            data.ground_truth);
      pc3_reports[r] = metrics::compute_all(denormalize_labels(cal.calibrated),
                                            data.ground_truth);
    });
    BiasRateRow row;
    row.rate = rate;
    row.sos = metrics::median_report(sos_reports);
    row.pc3 = metrics::median_report(pc3_reports);
    row.delta_pct = delta_percent(row.sos, row.pc3);
    rows.push_back(row);
  }
  return rows;
}

std::vector<FosRow> run_fos(const ExperimentPlan& plan) {
  if (plan.subject_counts.empty()) {
    throw ValidationError("fos experiment needs a non-empty subject grid");
  }
  const LoadedDataset data = load_dataset(plan);

  std::vector<FosRow> rows;
  for (std::size_t k : plan.subject_counts) {
    std::vector<MetricsReport> fos_reports(plan.repeats);
    std::vector<MetricsReport> pc3_reports(plan.repeats);
    run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
      Rng rng(plan.base_seed + r);
      const LabelVector fos = fos_mean(data.records, k, rng);
      CalibrationConfig config = plan.config;
      config.seed = plan.base_seed + r;
      const CalibrationResult cal = calibrate(data.features, fos, config);
      fos_reports[r] =
          metrics::compute_all(denormalize_labels(fos), data.ground_truth);
      pc3_reports[r] = metrics::compute_all(denormalize_labels(cal.calibrated),
                                            data.ground_truth);
    });
    FosRow row;
    row.subjects = k;
    row.fos = metrics::median_report(fos_reports);
    row.pc3 = metrics::median_report(pc3_reports);
    rows.push_back(row);
  }
  return rows;
}

AlphaSweepResult run_alpha_sweep(const ExperimentPlan& plan) {
  if (plan.alphas.empty()) {
    throw ValidationError("alpha-sweep experiment needs a non-empty grid");
  }
  const LoadedDataset data = load_dataset(plan);

  std::vector<double> alphas = plan.alphas;
  std::sort(alphas.begin(), alphas.end());

  std::vector<MetricsReport> sos_reports(plan.repeats);
  run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
    Rng rng(plan.base_seed + r);
    const LabelVector sos = synthesize_sos(data.records, plan.protocol, rng);
    sos_reports[r] =
        metrics::compute_all(denormalize_labels(sos), data.ground_truth);
  });

  AlphaSweepResult result;
  result.sos = metrics::median_report(sos_reports);
  for (double alpha : alphas) {
    std::vector<MetricsReport> pc3_reports(plan.repeats);
    run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
      // Replaying Rng(base_seed + r) reproduces the repeat's labels, so
      // every alpha sees identical SOS draws.
      Rng rng(plan.base_seed + r);
      const LabelVector sos = synthesize_sos(data.records, plan.protocol, rng);
      CalibrationConfig config = plan.config;
      config.alpha = alpha;
      config.seed = plan.base_seed + r;
      const CalibrationResult cal = calibrate(data.features, sos, config);
      pc3_reports[r] = metrics::compute_all(denormalize_labels(cal.calibrated),
                                            data.ground_truth);
    });
    result.rows.emplace_back(alpha, metrics::median_report(pc3_reports));
  }
  return result;
}

DownstreamTable run_downstream(const ExperimentPlan& plan) {
  const LoadedDataset data = load_dataset(plan);
  const std::size_t n = data.features.size();
  if (n < 10) {
    throw ValidationError("downstream experiment needs at least 10 items");
  }

  struct RepeatOut {
    MetricsReport mos, sos, pc3;
  };
  std::vector<RepeatOut> results(plan.repeats);

  run_repeats(plan.repeats, plan.threads, [&](std::size_t r) {
    Rng rng(plan.base_seed + r);
    const LabelVector sos = synthesize_sos(data.records, plan.protocol, rng);
    CalibrationConfig config = plan.config;
    config.seed = plan.base_seed + r;
    const CalibrationResult cal = calibrate(data.features, sos, config);

    Rng split_rng = Rng(plan.base_seed + r).derive(1);
    std::vector<std::size_t> order = split_rng.permutation(n);
    const std::size_t n_test = n / 5;
    const std::vector<std::size_t> test_idx(order.begin(),
                                            order.begin() + n_test);
    const std::vector<std::size_t> train_idx(order.begin() + n_test,
                                             order.end());

    const std::vector<double> gt_test = gather(data.ground_truth, test_idx);

    auto evaluate_variant = [&](const std::vector<double>& labels_raw) {
      const LabelVector labels = normalize_labels(labels_raw);
      Rng reg_rng = Rng(plan.base_seed + r).derive(2);
      Regressor reg(data.features.dim, reg_rng);
      reg.train(data.features, labels.values, train_idx, reg_rng);
      std::vector<double> preds;
      preds.reserve(test_idx.size());
      const double range = labels.raw_max - labels.raw_min;
      for (std::size_t i : test_idx) {
        preds.push_back(labels.raw_min +
                        reg.predict(data.features.row(i), nullptr) * range);
      }
      return metrics::compute_all(preds, gt_test);
    };

    RepeatOut out;
    out.mos = evaluate_variant(data.ground_truth);
    out.sos = evaluate_variant(denormalize_labels(sos));
    out.pc3 = evaluate_variant(denormalize_labels(cal.calibrated));
    results[r] = out;
  });

  std::vector<MetricsReport> mos_r, sos_r, pc3_r;
  for (const auto& out : results) {
    mos_r.push_back(out.mos);
    sos_r.push_back(out.sos);
    pc3_r.push_back(out.pc3);
  }
  DownstreamTable table;
  table.mos_trained = metrics::median_report(mos_r);
  table.sos_trained = metrics::median_report(sos_r);
  table.pc3_trained = metrics::median_report(pc3_r);
  table.delta_pct = delta_percent(table.sos_trained, table.pc3_trained);
  return table;
}

void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const CalibrationTable& table) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  ordered_json j = plan_json(plan, ExperimentKind::kCalibration);
  j["rows"] = ordered_json::array();
  auto push_row = [&j](const char* name, const MetricsReport& report) {
    ordered_json row;
    row["method"] = name;
    row.update(report_json(report));
    j["rows"].push_back(std::move(row));
  };
  push_row("sos", table.sos);
  push_row("pc3", table.pc3);
  push_row("delta_pct", table.delta_pct);
  dump_json_file((dir / "metrics.json").string(), j);

  std::ofstream csv = open_csv((dir / "table.csv").string());
  csv << "method,srcc,plcc,krocc,mse\n";
  csv << "sos,";
  append_metrics_csv(csv, table.sos);
  csv << "pc3,";
  append_metrics_csv(csv, table.pc3);
  csv << "delta_pct,";
  append_metrics_csv(csv, table.delta_pct);

  std::ofstream bars = open_csv((dir / "error_bars.csv").string());
  bars << "decile,mean_ground_truth,mean_abs_err_sos,mean_abs_err_pc3\n";
  for (const auto& row : table.error_bars) {
    bars << row.decile << ',' << io::format_double(row.mean_ground_truth)
         << ',' << io::format_double(row.mean_abs_err_sos) << ','
         << io::format_double(row.mean_abs_err_pc3) << '\n';
  }
}

void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const std::vector<BiasRateRow>& rows) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  ordered_json j = plan_json(plan, ExperimentKind::kBiasRate);
  j["rows"] = ordered_json::array();
  auto push_row = [&j](double rate, const char* name,
                       const MetricsReport& report) {
    ordered_json entry;
    entry["rate"] = rate;
    entry["method"] = name;
    entry.update(report_json(report));
    j["rows"].push_back(std::move(entry));
  };
  for (const auto& row : rows) {
    push_row(row.rate, "sos", row.sos);
    push_row(row.rate, "pc3", row.pc3);
    push_row(row.rate, "delta_pct", row.delta_pct);
  }
  dump_json_file((dir / "metrics.json").string(), j);

  std::ofstream csv = open_csv((dir / "table.csv").string());
  csv << "rate,method,srcc,plcc,krocc,mse\n";
  for (const auto& row : rows) {
    csv << io::format_double(row.rate) << ",sos,";
    append_metrics_csv(csv, row.sos);
    csv << io::format_double(row.rate) << ",pc3,";
    append_metrics_csv(csv, row.pc3);
    csv << io::format_double(row.rate) << ",delta_pct,";
    append_metrics_csv(csv, row.delta_pct);
  }
}

void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const std::vector<FosRow>& rows) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  ordered_json j = plan_json(plan, ExperimentKind::kFos);
  j["rows"] = ordered_json::array();
  auto push_row = [&j](std::size_t subjects, const char* name,
                       const MetricsReport& report) {
    ordered_json entry;
    entry["subjects"] = subjects;
    entry["method"] = name;
    entry.update(report_json(report));
    j["rows"].push_back(std::move(entry));
  };
  for (const auto& row : rows) {
    push_row(row.subjects, "fos", row.fos);
    push_row(row.subjects, "pc3", row.pc3);
  }
  dump_json_file((dir / "metrics.json").string(), j);

  std::ofstream csv = open_csv((dir / "table.csv").string());
  csv << "subjects,method,srcc,plcc,krocc,mse\n";
  for (const auto& row : rows) {
    csv << row.subjects << ",fos,";
    append_metrics_csv(csv, row.fos);
    csv << row.subjects << ",pc3,";
    append_metrics_csv(csv, row.pc3);
  }

  std::ofstream curves = open_csv((dir / "fos_curves.csv").string());
  curves << "subjects,fos_srcc,fos_plcc,fos_krocc,fos_mse,"
            "pc3_srcc,pc3_plcc,pc3_krocc,pc3_mse\n";
  for (const auto& row : rows) {
    curves << row.subjects << ',' << io::format_double(row.fos.srcc) << ','
           << io::format_double(row.fos.plcc) << ','
           << io::format_double(row.fos.krocc) << ','
           << io::format_double(row.fos.mse) << ','
           << io::format_double(row.pc3.srcc) << ','
           << io::format_double(row.pc3.plcc) << ','
           << io::format_double(row.pc3.krocc) << ','
           << io::format_double(row.pc3.mse) << '\n';
  }
}

void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const AlphaSweepResult& result) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  ordered_json j = plan_json(plan, ExperimentKind::kAlphaSweep);
  j["rows"] = ordered_json::array();
  {
    ordered_json entry;
    entry["method"] = "sos";
    entry.update(report_json(result.sos));
    j["rows"].push_back(std::move(entry));
  }
  for (const auto& [alpha, report] : result.rows) {
    ordered_json entry;
    entry["method"] = "pc3";
    entry["alpha"] = alpha;
    entry.update(report_json(report));
    j["rows"].push_back(std::move(entry));
  }
  dump_json_file((dir / "metrics.json").string(), j);

  std::ofstream csv = open_csv((dir / "table.csv").string());
  csv << "method,alpha,srcc,plcc,krocc,mse\n";
  csv << "sos,,";
  append_metrics_csv(csv, result.sos);
  for (const auto& [alpha, report] : result.rows) {
    csv << "pc3," << io::format_double(alpha) << ',';
    append_metrics_csv(csv, report);
  }
}

void write_outputs(const std::string& out_dir, const ExperimentPlan& plan,
                   const DownstreamTable& table) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  ordered_json j = plan_json(plan, ExperimentKind::kDownstream);
  j["rows"] = ordered_json::array();
  auto push_row = [&j](const char* name, const MetricsReport& report) {
    ordered_json entry;
    entry["method"] = name;
    entry.update(report_json(report));
    j["rows"].push_back(std::move(entry));
  };
  push_row("trained_on_mos", table.mos_trained);
  push_row("trained_on_sos", table.sos_trained);
  push_row("trained_on_pc3", table.pc3_trained);
  push_row("delta_pct", table.delta_pct);
  dump_json_file((dir / "metrics.json").string(), j);

  std::ofstream csv = open_csv((dir / "table.csv").string());
  csv << "method,srcc,plcc,krocc,mse\n";
  csv << "trained_on_mos,";
  append_metrics_csv(csv, table.mos_trained);
  csv << "trained_on_sos,";
  append_metrics_csv(csv, table.sos_trained);
  csv << "trained_on_pc3,";
  append_metrics_csv(csv, table.pc3_trained);
  csv << "delta_pct,";
  append_metrics_csv(csv, table.delta_pct);
}

std::string render_table(const CalibrationTable& table) {
  std::string out = kTableHeader;
  out += row_text("sos", table.sos);
  out += row_text("pc3", table.pc3);
  out += row_text("delta_pct", table.delta_pct);
  return out;
}

std::string render_table(const std::vector<BiasRateRow>& rows) {
  std::string out = "rate  " + std::string(kTableHeader);
  for (const auto& row : rows) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "%-5.2f ", row.rate);
    out += prefix + row_text("sos", row.sos);
    out += prefix + row_text("pc3", row.pc3);
    out += prefix + row_text("delta_pct", row.delta_pct);
  }
  return out;
}

std::string render_table(const std::vector<FosRow>& rows) {
  std::string out = "k     " + std::string(kTableHeader);
  for (const auto& row : rows) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "%-5zu ", row.subjects);
    out += prefix + row_text("fos", row.fos);
    out += prefix + row_text("pc3", row.pc3);
  }
  return out;
}

std::string render_table(const AlphaSweepResult& result) {
  std::string out = "alpha " + std::string(kTableHeader);
  out += "      " + row_text("sos", result.sos);
  for (const auto& [alpha, report] : result.rows) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "%-5.2f ", alpha);
    out += prefix + row_text("pc3", report);
  }
  return out;
}

std::string render_table(const DownstreamTable& table) {
  std::string out = kTableHeader;
  out += row_text("on_mos", table.mos_trained);
  out += row_text("on_sos", table.sos_trained);
  out += row_text("on_pc3", table.pc3_trained);
  out += row_text("delta_pct", table.delta_pct);
  return out;
}

}  // namespace pc3::experiments

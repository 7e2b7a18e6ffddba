#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "pc3/engine.hpp"
#include "pc3/experiments.hpp"
#include "pc3/io.hpp"
#include "pc3/metrics.hpp"
#include "pc3/sos.hpp"
#include "pc3/synthetic.hpp"
#include "pc3/types.hpp"

namespace {

namespace fs = std::filesystem;

// Flag > config file > default. Option pointers tell us which flags were
// actually given.
struct ConfigFlags {
  std::string config_path;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  std::uint32_t warmup = 0;
  std::uint32_t epochs = 0;
  std::uint32_t batch_size = 0;
  std::vector<std::uint32_t> hidden;

  CLI::Option* config_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* warmup_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* hidden_opt = nullptr;

  void attach(CLI::App* cmd) {
    config_opt = cmd->add_option("--config", config_path,
                                 "JSON file with calibration settings");
    alpha_opt = cmd->add_option("--alpha", alpha, "MOS refresh rate in [0,1]");
    beta_opt = cmd->add_option("--beta", beta, "constancy residual weight");
    lambda_opt = cmd->add_option("--lambda", lambda, "head learning rate");
    warmup_opt = cmd->add_option("--warmup", warmup,
                                 "epochs that keep the MOS pinned to the SOS");
    epochs_opt = cmd->add_option("--epochs", epochs, "total training epochs");
    batch_opt = cmd->add_option("--batch-size", batch_size,
                                "items per optimizer step");
    hidden_opt =
        cmd->add_option("--hidden", hidden, "hidden layer sizes, e.g. 128,64")
            ->delimiter(',')
            ->expected(2);
  }

  pc3::CalibrationConfig resolve(std::uint64_t seed) const {
    pc3::CalibrationConfig config;
    if (config_opt->count() > 0) {
      config = pc3::io::read_config(config_path);
    }
    if (alpha_opt->count() > 0) {
      config.alpha = alpha;
    }
    if (beta_opt->count() > 0) {
      config.beta = beta;
    }
    if (lambda_opt->count() > 0) {
      config.lambda = lambda;
    }
    if (warmup_opt->count() > 0) {
      config.warmup_epochs = warmup;
    }
    if (epochs_opt->count() > 0) {
      config.total_epochs = epochs;
    }
    if (batch_opt->count() > 0) {
      config.batch_size = batch_size;
    }
    if (hidden_opt->count() > 0) {
      config.hidden1 = hidden[0];
      config.hidden2 = hidden[1];
    }
    config.seed = seed;
    pc3::validate(config);
    return config;
  }
};

struct SyntheticFlags {
  pc3::SyntheticSpec spec;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", spec.n_items, "number of items")
        ->capture_default_str();
    cmd->add_option("--dim", spec.feature_dim, "feature dimension")
        ->capture_default_str();
    cmd->add_option("--feature-noise", spec.feature_noise,
                    "gaussian noise added to feature coordinates")
        ->capture_default_str();
    cmd->add_option("--sos-noise", spec.sos_noise_std,
                    "per-subject opinion score noise")
        ->capture_default_str();
    cmd->add_option("--subjects", spec.subjects_per_item,
                    "raw opinion scores per item")
        ->capture_default_str();
  }
};

void require_aligned(const pc3::FeatureTable& features,
                     const std::vector<pc3::RatingRecord>& records) {
  if (features.size() != records.size()) {
    throw pc3::ValidationError(
        "features and ratings disagree on item count: " +
        std::to_string(features.size()) + " vs " +
        std::to_string(records.size()));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (features.item_ids[i] != records[i].item_id) {
      throw pc3::ValidationError("item id mismatch at row " +
                                 std::to_string(i) + ": '" +
                                 features.item_ids[i] + "' vs '" +
                                 records[i].item_id + "'");
    }
  }
}

std::optional<std::vector<double>> optional_ground_truth(
    const std::vector<pc3::RatingRecord>& records) {
  const bool all_present =
      std::all_of(records.begin(), records.end(),
                  [](const auto& r) { return r.ground_truth_mos.has_value(); });
  if (!all_present) {
    return std::nullopt;
  }
  return pc3::ground_truth_mos(records);
}

void cmd_gen_synthetic(const pc3::SyntheticSpec& spec,
                       const std::string& out_dir) {
  const pc3::SyntheticDataset data = pc3::generate(spec);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  pc3::io::write_features((dir / "features.csv").string(), data.features);
  pc3::io::write_ratings((dir / "ratings.json").string(), data.records);
  pc3::io::write_label_column((dir / "mos.csv").string(), "mos",
                              data.features.item_ids,
                              pc3::ground_truth_mos(data.records));
  std::cerr << "wrote features.csv, ratings.json, mos.csv to " << out_dir
            << "\n";
}

void cmd_synthesize_sos(const std::string& ratings_path,
                        const std::string& protocol_name, std::uint64_t seed,
                        const std::string& out_path) {
  const auto records = pc3::io::read_ratings(ratings_path);
  pc3::Rng rng(seed);
  pc3::SynthesisStats stats;
  const pc3::LabelVector sos =
      pc3::synthesize_sos(records, pc3::parse_protocol(protocol_name), rng,
                          &stats);
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) {
    ids.push_back(r.item_id);
  }
  pc3::io::write_label_column(out_path, "sos", ids,
                              pc3::denormalize_labels(sos));
  if (stats.out_of_range > 0) {
    std::cerr << "warning: " << stats.out_of_range
              << " gaussian draws fell outside the annotated score range\n";
  }
  std::cerr << "wrote " << out_path << "\n";
}

void cmd_calibrate(const std::string& features_path,
                   const std::string& ratings_path,
                   const std::string& protocol_name, std::uint64_t seed,
                   const ConfigFlags& flags, const std::string& out_dir,
                   const std::string& load_head_path,
                   const std::string& save_head_path) {
  const pc3::FeatureTable features = pc3::io::read_features(features_path);
  const auto records = pc3::io::read_ratings(ratings_path);
  require_aligned(features, records);

  const pc3::CalibrationConfig config = flags.resolve(seed);
  pc3::Rng rng(config.seed);
  pc3::SynthesisStats stats;
  const pc3::LabelVector sos = pc3::synthesize_sos(
      records, pc3::parse_protocol(protocol_name), rng, &stats);
  if (stats.out_of_range > 0) {
    std::cerr << "warning: " << stats.out_of_range
              << " gaussian draws fell outside the annotated score range\n";
  }

  std::optional<pc3::HeadParameters> initial;
  if (!load_head_path.empty()) {
    initial = pc3::load_head(load_head_path);
  }
  pc3::HeadParameters trained;
  const pc3::CalibrationResult result =
      pc3::calibrate(features, sos, config,
                     initial ? &*initial : nullptr, &trained);

  const std::vector<double> sos_raw = pc3::denormalize_labels(sos);
  const std::vector<double> calibrated_raw =
      pc3::denormalize_labels(result.calibrated);
  const auto ground_truth = optional_ground_truth(records);
  std::optional<pc3::metrics::MetricsReport> report;
  if (ground_truth) {
    report = pc3::metrics::compute_all(calibrated_raw, *ground_truth);
  }
  pc3::io::write_results(out_dir, features.item_ids, sos_raw, calibrated_raw,
                         ground_truth, report, result.trace);
  if (!save_head_path.empty()) {
    pc3::save_head(trained, save_head_path);
  }
  std::cerr << "calibrated " << features.size() << " items over "
            << config.total_epochs << " epochs; results in " << out_dir
            << "\n";
}

void cmd_evaluate(const std::string& pred_path,
                  const std::optional<std::string>& pred_col,
                  const std::string& truth_path,
                  const std::optional<std::string>& truth_col,
                  const std::string& out_path) {
  const auto pred = pc3::io::read_label_column(pred_path, pred_col);
  const auto truth = pc3::io::read_label_column(truth_path, truth_col);
  if (pred.size() != truth.size()) {
    throw pc3::ValidationError("prediction and truth files disagree on item "
                               "count: " +
                               std::to_string(pred.size()) + " vs " +
                               std::to_string(truth.size()));
  }
  std::unordered_map<std::string, double> truth_by_id;
  truth_by_id.reserve(truth.size());
  for (const auto& [id, value] : truth) {
    truth_by_id.emplace(id, value);
  }
  std::vector<double> a, b;
  a.reserve(pred.size());
  b.reserve(pred.size());
  for (const auto& [id, value] : pred) {
    const auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) {
      throw pc3::ValidationError("item '" + id + "' missing from " +
                                 truth_path);
    }
    a.push_back(value);
    b.push_back(it->second);
  }
  const pc3::metrics::MetricsReport report = pc3::metrics::compute_all(a, b);
  if (!out_path.empty()) {
    pc3::io::write_metrics_json(out_path, report);
  }
  std::cout << "{\n"
            << "  \"srcc\": " << pc3::io::format_double(report.srcc) << ",\n"
            << "  \"plcc\": " << pc3::io::format_double(report.plcc) << ",\n"
            << "  \"krocc\": " << pc3::io::format_double(report.krocc) << ",\n"
            << "  \"mse\": " << pc3::io::format_double(report.mse) << "\n"
            << "}\n";
}

void cmd_experiment(pc3::experiments::ExperimentPlan plan,
                    const std::string& kind_name, const std::string& out_dir) {
  using pc3::experiments::ExperimentKind;
  const ExperimentKind kind = pc3::experiments::parse_kind(kind_name);
  std::cerr << "running " << kind_name << " experiment (" << plan.repeats
            << " repeats, base seed " << plan.base_seed << ")\n";
  switch (kind) {
    case ExperimentKind::kCalibration: {
      const auto table = pc3::experiments::run_calibration(plan);
      pc3::experiments::write_outputs(out_dir, plan, table);
      std::cout << pc3::experiments::render_table(table);
      break;
    }
    case ExperimentKind::kBiasRate: {
      const auto rows = pc3::experiments::run_bias_rate(plan);
      pc3::experiments::write_outputs(out_dir, plan, rows);
      std::cout << pc3::experiments::render_table(rows);
      break;
    }
    case ExperimentKind::kFos: {
      const auto rows = pc3::experiments::run_fos(plan);
      pc3::experiments::write_outputs(out_dir, plan, rows);
      std::cout << pc3::experiments::render_table(rows);
      break;
    }
    case ExperimentKind::kAlphaSweep: {
      const auto result = pc3::experiments::run_alpha_sweep(plan);
      pc3::experiments::write_outputs(out_dir, plan, result);
      std::cout << pc3::experiments::render_table(result);
      break;
    }
    case ExperimentKind::kDownstream: {
      const auto table = pc3::experiments::run_downstream(plan);
      pc3::experiments::write_outputs(out_dir, plan, table);
      std::cout << pc3::experiments::render_table(table);
      break;
    }
  }
  std::cerr << "experiment outputs in " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  try {
    CLI::App app{"pc3: mean opinion score calibration from single opinion "
                 "scores via a perceptual-constancy constraint"};
    app.require_subcommand(1);

    // gen-synthetic
    auto* gen = app.add_subcommand(
        "gen-synthetic", "generate a synthetic dataset with known MOS");
    SyntheticFlags gen_flags;
    gen_flags.attach(gen);
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->callback([&] {
      gen_flags.spec.seed = gen_seed;
      cmd_gen_synthetic(gen_flags.spec, gen_out);
    });

    // synthesize-sos
    auto* synth = app.add_subcommand(
        "synthesize-sos", "draw one opinion score per item from ratings");
    std::string synth_ratings, synth_protocol, synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--ratings", synth_ratings, "ratings JSON file")
        ->required();
    synth
        ->add_option("--protocol", synth_protocol,
                     "raw-sample, gaussian or empirical")
        ->required();
    synth->add_option("--seed", synth_seed, "random seed")
        ->capture_default_str();
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->callback([&] {
      cmd_synthesize_sos(synth_ratings, synth_protocol, synth_seed, synth_out);
    });

    // calibrate
    auto* cal = app.add_subcommand(
        "calibrate", "synthesize an SOS per item and calibrate it toward MOS");
    std::string cal_features, cal_ratings, cal_out;
    std::string cal_protocol = "raw-sample";
    std::string cal_load_head, cal_save_head;
    std::uint64_t cal_seed = 0;
    ConfigFlags cal_config;
    cal->add_option("--features", cal_features, "features CSV file")
        ->required();
    cal->add_option("--ratings", cal_ratings, "ratings JSON file")->required();
    cal->add_option("--protocol", cal_protocol,
                    "raw-sample, gaussian or empirical")
        ->capture_default_str();
    cal->add_option("--seed", cal_seed, "random seed")->capture_default_str();
    cal->add_option("--out", cal_out, "output directory")->required();
    cal->add_option("--load-head", cal_load_head,
                    "resume from a head checkpoint");
    cal->add_option("--save-head", cal_save_head,
                    "write the trained head checkpoint");
    cal_config.attach(cal);
    cal->callback([&] {
      cmd_calibrate(cal_features, cal_ratings, cal_protocol, cal_seed,
                    cal_config, cal_out, cal_load_head, cal_save_head);
    });

    // evaluate
    auto* eval = app.add_subcommand(
        "evaluate", "correlation and error metrics between two label files");
    std::string eval_pred, eval_truth, eval_out;
    std::string eval_pred_col, eval_truth_col;
    eval->add_option("--pred", eval_pred, "predicted labels CSV")->required();
    eval->add_option("--pred-col", eval_pred_col,
                     "column to use from --pred (for multi-column files)");
    eval->add_option("--truth", eval_truth, "ground-truth labels CSV")
        ->required();
    eval->add_option("--truth-col", eval_truth_col,
                     "column to use from --truth");
    eval->add_option("--out", eval_out, "optional metrics JSON path");
    eval->callback([&] {
      cmd_evaluate(eval_pred,
                   eval_pred_col.empty()
                       ? std::nullopt
                       : std::make_optional(eval_pred_col),
                   eval_truth,
                   eval_truth_col.empty()
                       ? std::nullopt
                       : std::make_optional(eval_truth_col),
                   eval_out);
    });

    // experiment
    auto* exp = app.add_subcommand(
        "experiment", "run a full median-over-repeats experiment");
    std::string exp_kind, exp_features, exp_ratings, exp_out;
    std::string exp_protocol = "raw-sample";
    std::uint64_t exp_seed = 0;
    std::size_t exp_repeats = 10;
    std::size_t exp_threads = 1;
    std::vector<double> exp_rates = {0.6, 0.8};
    std::vector<std::size_t> exp_ks = {1, 2, 4, 8};
    std::vector<double> exp_alphas = {0.0, 0.1, 0.2, 0.6, 0.8};
    SyntheticFlags exp_synth;
    ConfigFlags exp_config;
    exp->add_option("--kind", exp_kind,
                    "calibration, bias-rate, fos, alpha-sweep or downstream")
        ->required();
    exp->add_option("--seed", exp_seed, "base seed (repeat r uses seed+r)")
        ->required();
    auto* exp_features_opt =
        exp->add_option("--features", exp_features, "features CSV file");
    auto* exp_ratings_opt =
        exp->add_option("--ratings", exp_ratings, "ratings JSON file");
    exp->add_option("--protocol", exp_protocol,
                    "raw-sample, gaussian or empirical")
        ->capture_default_str();
    exp->add_option("--repeats", exp_repeats, "sampling repeats")
        ->capture_default_str();
    exp->add_option("--threads", exp_threads, "worker cap for repeats")
        ->capture_default_str();
    exp->add_option("--rates", exp_rates, "bias rates, e.g. 0.6,0.8")
        ->delimiter(',');
    exp->add_option("--ks", exp_ks, "FOS subject counts, e.g. 1,2,4,8")
        ->delimiter(',');
    exp->add_option("--alphas", exp_alphas, "alpha grid, e.g. 0.0,0.1,0.2")
        ->delimiter(',');
    exp->add_option("--out", exp_out, "output directory")->required();
    exp_synth.attach(exp);
    exp_config.attach(exp);
    exp->callback([&] {
      pc3::experiments::ExperimentPlan plan;
      if (exp_features_opt->count() > 0 || exp_ratings_opt->count() > 0) {
        if (exp_features_opt->count() == 0 || exp_ratings_opt->count() == 0) {
          throw pc3::ValidationError(
              "--features and --ratings must be given together");
        }
        plan.source =
            pc3::experiments::DatasetFiles{exp_features, exp_ratings};
      } else {
        exp_synth.spec.seed = exp_seed;
        plan.source = exp_synth.spec;
      }
      plan.protocol = pc3::parse_protocol(exp_protocol);
      plan.rates = exp_rates;
      plan.subject_counts = exp_ks;
      plan.alphas = exp_alphas;
      plan.repeats = exp_repeats;
      plan.threads = exp_threads;
      plan.base_seed = exp_seed;
      plan.config = exp_config.resolve(exp_seed);
      cmd_experiment(std::move(plan), exp_kind, exp_out);
    });

    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 1;
    }
    return 0;
  } catch (const pc3::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const pc3::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

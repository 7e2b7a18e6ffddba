#include "pc3/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace pc3::io {

namespace {

using nlohmann::ordered_json;

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw ValidationError("cannot open '" + path + "'");
  }
  return is;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  return os;
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError(path + ": line " + std::to_string(line_no) +
                          ": cannot parse number '" + field + "'");
  }
  return value;
}

ordered_json parse_json_file(const std::string& path) {
  std::ifstream is = open_input(path);
  try {
    return ordered_json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void dump_json(const std::string& path, const ordered_json& j) {
  std::ofstream os = open_output(path);
  os << j.dump(2) << '\n';
  if (!os) {
    throw ValidationError("failed writing '" + path + "'");
  }
}

double json_number(const ordered_json& j, const std::string& context) {
  if (!j.is_number()) {
    throw ValidationError(context + " must be a number");
  }
  return j.get<double>();
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

FeatureTable read_features(const std::string& path) {
  std::ifstream is = open_input(path);
  std::string line;
  if (!std::getline(is, line)) {
    throw ValidationError(path + ": empty file");
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "item_id") {
    throw ValidationError(path +
                          ": line 1: expected header item_id,f0,...,f{D-1}");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j + 1] != "f" + std::to_string(j)) {
      throw ValidationError(path + ": line 1: expected column 'f" +
                            std::to_string(j) + "', got '" + header[j + 1] +
                            "'");
    }
  }

  FeatureTable table;
  table.dim = dim;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != dim + 1) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": expected " + std::to_string(dim + 1) +
                            " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": empty item_id");
    }
    if (!seen.insert(fields[0]).second) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": duplicate item id '" + fields[0] + "'");
    }
    table.item_ids.push_back(fields[0]);
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = parse_double(fields[j + 1], path, line_no);
      if (!std::isfinite(v)) {
        throw ValidationError(path + ": line " + std::to_string(line_no) +
                              ": non-finite value in column f" +
                              std::to_string(j));
      }
      table.data.push_back(v);
    }
  }
  validate(table);
  return table;
}

void write_features(const std::string& path, const FeatureTable& table) {
  validate(table);
  std::ofstream os = open_output(path);
  os << "item_id";
  for (std::size_t j = 0; j < table.dim; ++j) {
    os << ",f" << j;
  }
  os << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    os << table.item_ids[i];
    const auto row = table.row(i);
    for (double v : row) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
  if (!os) {
    throw ValidationError("failed writing '" + path + "'");
  }
}

std::vector<RatingRecord> read_ratings(const std::string& path) {
  const ordered_json root = parse_json_file(path);
  if (!root.is_array()) {
    throw ValidationError(path + ": expected a JSON array of rating records");
  }
  std::vector<RatingRecord> records;
  records.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const ordered_json& obj = root[i];
    const std::string where = path + ": record " + std::to_string(i);
    if (!obj.is_object()) {
      throw ValidationError(where + ": expected an object");
    }
    RatingRecord record;
    if (!obj.contains("item_id") || !obj["item_id"].is_string()) {
      throw ValidationError(where + ": missing string item_id");
    }
    record.item_id = obj["item_id"].get<std::string>();
    if (obj.contains("ground_truth_mos")) {
      record.ground_truth_mos =
          json_number(obj["ground_truth_mos"], where + ": ground_truth_mos");
    }
    if (obj.contains("raw_scores")) {
      const ordered_json& arr = obj["raw_scores"];
      if (!arr.is_array()) {
        throw ValidationError(where + ": raw_scores must be an array");
      }
      std::vector<double> scores;
      scores.reserve(arr.size());
      for (const auto& s : arr) {
        scores.push_back(json_number(s, where + ": raw_scores entry"));
      }
      record.raw_scores = std::move(scores);
    }
    if (obj.contains("gaussian")) {
      const ordered_json& g = obj["gaussian"];
      if (!g.is_object() || !g.contains("mos") || !g.contains("std")) {
        throw ValidationError(where + ": gaussian must be {mos, std}");
      }
      GaussianAnnotation ann;
      ann.mos = json_number(g["mos"], where + ": gaussian.mos");
      ann.stddev = json_number(g["std"], where + ": gaussian.std");
      record.gaussian = ann;
    }
    if (obj.contains("histogram")) {
      const ordered_json& arr = obj["histogram"];
      if (!arr.is_array()) {
        throw ValidationError(where + ": histogram must be an array");
      }
      std::vector<HistogramBin> bins;
      bins.reserve(arr.size());
      for (const auto& b : arr) {
        if (!b.is_object() || !b.contains("value") || !b.contains("count")) {
          throw ValidationError(where +
                                ": histogram bins must be {value, count}");
        }
        HistogramBin bin;
        bin.value = json_number(b["value"], where + ": histogram value");
        bin.count = json_number(b["count"], where + ": histogram count");
        bins.push_back(bin);
      }
      record.histogram = std::move(bins);
    }
    records.push_back(std::move(record));
  }
  validate(records);
  return records;
}

void write_ratings(const std::string& path,
                   const std::vector<RatingRecord>& records) {
  validate(records);
  ordered_json root = ordered_json::array();
  for (const auto& r : records) {
    ordered_json obj;
    obj["item_id"] = r.item_id;
    if (r.ground_truth_mos) {
      obj["ground_truth_mos"] = *r.ground_truth_mos;
    }
    if (r.raw_scores) {
      obj["raw_scores"] = *r.raw_scores;
    }
    if (r.gaussian) {
      obj["gaussian"] = {{"mos", r.gaussian->mos}, {"std", r.gaussian->stddev}};
    }
    if (r.histogram) {
      ordered_json bins = ordered_json::array();
      for (const auto& bin : *r.histogram) {
        bins.push_back({{"value", bin.value}, {"count", bin.count}});
      }
      obj["histogram"] = std::move(bins);
    }
    root.push_back(std::move(obj));
  }
  dump_json(path, root);
}

CalibrationConfig read_config(const std::string& path) {
  const ordered_json root = parse_json_file(path);
  if (!root.is_object()) {
    throw ValidationError(path + ": expected a JSON object");
  }
  CalibrationConfig config;
  for (const auto& [key, value] : root.items()) {
    if (key == "alpha") {
      config.alpha = json_number(value, path + ": alpha");
    } else if (key == "beta") {
      config.beta = json_number(value, path + ": beta");
    } else if (key == "lambda") {
      config.lambda = json_number(value, path + ": lambda");
    } else if (key == "warmup_epochs") {
      config.warmup_epochs = value.get<std::uint32_t>();
    } else if (key == "total_epochs") {
      config.total_epochs = value.get<std::uint32_t>();
    } else if (key == "batch_size") {
      config.batch_size = value.get<std::uint32_t>();
    } else if (key == "hidden_dims") {
      if (!value.is_array() || value.size() != 2) {
        throw ValidationError(path +
                              ": hidden_dims must be a two-element array");
      }
      config.hidden1 = value[0].get<std::uint32_t>();
      config.hidden2 = value[1].get<std::uint32_t>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else {
      throw ValidationError(path + ": unknown config key \"" + key + "\"");
    }
  }
  validate(config);
  return config;
}

void write_label_column(const std::string& path, const std::string& column,
                        const std::vector<std::string>& item_ids,
                        const std::vector<double>& values) {
  if (item_ids.size() != values.size()) {
    throw ValidationError("label column ids and values differ in length");
  }
  std::ofstream os = open_output(path);
  os << "item_id," << column << '\n';
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    os << item_ids[i] << ',' << format_double(values[i]) << '\n';
  }
  if (!os) {
    throw ValidationError("failed writing '" + path + "'");
  }
}

std::vector<std::pair<std::string, double>> read_label_column(
    const std::string& path, const std::optional<std::string>& column) {
  std::ifstream is = open_input(path);
  std::string line;
  if (!std::getline(is, line)) {
    throw ValidationError(path + ": empty file");
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "item_id") {
    throw ValidationError(path + ": expected header item_id,<column>[,...]");
  }
  std::size_t col = 1;
  if (column) {
    bool found = false;
    for (std::size_t j = 1; j < header.size(); ++j) {
      if (header[j] == *column) {
        col = j;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ValidationError(path + ": no column named '" + *column + "'");
    }
  } else if (header.size() != 2) {
    throw ValidationError(path +
                          ": file has several value columns; pick one by name");
  }

  std::vector<std::pair<std::string, double>> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    }
    if (!seen.insert(fields[0]).second) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": duplicate item id '" + fields[0] + "'");
    }
    const double v = parse_double(fields[col], path, line_no);
    if (!std::isfinite(v)) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": non-finite value");
    }
    out.emplace_back(fields[0], v);
  }
  if (out.empty()) {
    throw ValidationError(path + ": no data rows");
  }
  return out;
}

void write_labels_csv(const std::string& path,
                      const std::vector<std::string>& item_ids,
                      const std::vector<double>& sos,
                      const std::vector<double>& calibrated,
                      const std::optional<std::vector<double>>& ground_truth) {
  const std::size_t n = item_ids.size();
  if (sos.size() != n || calibrated.size() != n ||
      (ground_truth && ground_truth->size() != n)) {
    throw ValidationError("labels csv columns differ in length");
  }
  std::ofstream os = open_output(path);
  os << "item_id,sos,calibrated";
  if (ground_truth) {
    os << ",ground_truth";
  }
  os << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    os << item_ids[i] << ',' << format_double(sos[i]) << ','
       << format_double(calibrated[i]);
    if (ground_truth) {
      os << ',' << format_double((*ground_truth)[i]);
    }
    os << '\n';
  }
  if (!os) {
    throw ValidationError("failed writing '" + path + "'");
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<EpochReport>& trace) {
  std::ofstream os = open_output(path);
  os << "epoch,data_fit_loss,constraint_loss,total_loss\n";
  for (const auto& r : trace) {
    os << r.epoch << ',' << format_double(r.data_fit_loss) << ','
       << format_double(r.constraint_loss) << ','
       << format_double(r.total_loss) << '\n';
  }
  if (!os) {
    throw ValidationError("failed writing '" + path + "'");
  }
}

void write_metrics_json(const std::string& path,
                        const metrics::MetricsReport& report) {
  ordered_json j;
  j["srcc"] = report.srcc;
  j["plcc"] = report.plcc;
  j["krocc"] = report.krocc;
  j["mse"] = report.mse;
  dump_json(path, j);
}

void write_results(const std::string& out_dir,
                   const std::vector<std::string>& item_ids,
                   const std::vector<double>& sos,
                   const std::vector<double>& calibrated,
                   const std::optional<std::vector<double>>& ground_truth,
                   const std::optional<metrics::MetricsReport>& report,
                   const std::vector<EpochReport>& trace) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_labels_csv((dir / "labels.csv").string(), item_ids, sos, calibrated,
                   ground_truth);
  write_trace_csv((dir / "trace.csv").string(), trace);
  if (report) {
    write_metrics_json((dir / "metrics.json").string(), *report);
  }
}

}  // namespace pc3::io

// Copyright 2026 The dp-lumberjack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lumberjack/errors.hpp"
#include "lumberjack/schema.hpp"
#include "lumberjack/text_io.hpp"

namespace lumberjack {

// Schema-conformant rows: numeric cells hold the clamped value, categorical
// cells hold the category index as a double (exact for any realistic domain
// size). Row order is the input file order.
struct Dataset {
  std::size_t n = 0;
  int num_features = 0;
  std::vector<double> values;  // n * num_features, row major
  std::vector<int> labels;     // empty when ingested without a label column

  const double* row(std::size_t i) const { return values.data() + i * num_features; }

  void append_row(const std::vector<double>& cells, int label) {
    values.insert(values.end(), cells.begin(), cells.end());
    if (label >= 0) labels.push_back(label);
    ++n;
  }
};

struct IngestReport {
  std::size_t rows_kept = 0;
  std::size_t rows_rejected = 0;      // unknown category / unparseable cell
  std::size_t cells_clamped = 0;      // numeric values pulled to a bound
  bool has_labels = false;
  std::vector<std::size_t> kept_rows;  // original data-row ordinals, in order
  std::vector<std::string> warnings;   // capped, one per distinct problem kind
};

namespace detail {

inline void add_warning(IngestReport& report, const std::string& msg) {
  for (const std::string& w : report.warnings)
    if (w == msg) return;
  if (report.warnings.size() < 32) report.warnings.push_back(msg);
}

}  // namespace detail

// Reads a CSV with a header row against the schema. Numeric cells are clamped
// into the schema bounds (counted); rows with an unknown categorical value,
// an unknown label, or an unparseable cell are rejected (counted), never
// silently patched: an invented category would widen the public split domain
// behind the privacy analysis. Columns absent from the schema are ignored.
// When require_label is false the label column may be missing entirely.
inline Dataset ingest_csv(const std::string& csv_text, const FeatureSchema& schema,
                          bool require_label, IngestReport* report_out = nullptr) {
  IngestReport report;
  const std::vector<std::string_view> lines = split_view(csv_text, '\n');
  if (lines.empty() || trim_view(lines[0]).empty())
    throw DataError("CSV has no header row");

  const std::vector<std::string> header = parse_csv_line(trim_view(lines[0]));
  std::vector<int> feature_pos(static_cast<std::size_t>(schema.num_features()), -1);
  int label_pos = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.label_name) label_pos = static_cast<int>(c);
    for (int f = 0; f < schema.num_features(); ++f)
      if (header[c] == schema.features[static_cast<std::size_t>(f)].name)
        feature_pos[static_cast<std::size_t>(f)] = static_cast<int>(c);
  }
  for (int f = 0; f < schema.num_features(); ++f)
    if (feature_pos[static_cast<std::size_t>(f)] < 0)
      throw SchemaError("CSV is missing schema column '" +
                        schema.features[static_cast<std::size_t>(f)].name + "'");
  if (require_label && label_pos < 0)
    throw SchemaError("CSV is missing the label column '" + schema.label_name + "'");
  report.has_labels = label_pos >= 0;

  Dataset data;
  data.num_features = schema.num_features();
  std::vector<double> cells(static_cast<std::size_t>(schema.num_features()));

  std::size_t data_row = static_cast<std::size_t>(-1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string_view line = trim_view(lines[li]);
    if (line.empty()) continue;
    ++data_row;
    const std::vector<std::string> fields = parse_csv_line(line);
    if (fields.size() < header.size()) {
      ++report.rows_rejected;
      detail::add_warning(report, "row with too few fields");
      continue;
    }
    bool ok = true;
    for (int f = 0; f < schema.num_features() && ok; ++f) {
      const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
      const std::string& raw = fields[static_cast<std::size_t>(feature_pos[static_cast<std::size_t>(f)])];
      if (spec.kind == FeatureKind::kNumeric) {
        double v;
        try {
          v = parse_double(raw);
        } catch (const DataError&) {
          ok = false;
          detail::add_warning(report, "unparseable numeric in column '" + spec.name + "'");
          break;
        }
        if (v < spec.lower) {
          v = spec.lower;
          ++report.cells_clamped;
        } else if (v > spec.upper) {
          v = spec.upper;
          ++report.cells_clamped;
        }
        cells[static_cast<std::size_t>(f)] = v;
      } else {
        const int idx = spec.category_index(raw);
        if (idx < 0) {
          ok = false;
          detail::add_warning(report,
                              "unknown category in column '" + spec.name + "'");
          break;
        }
        cells[static_cast<std::size_t>(f)] = static_cast<double>(idx);
      }
    }
    int label = -1;
    if (ok && label_pos >= 0) {
      label = schema.class_index(fields[static_cast<std::size_t>(label_pos)]);
      if (label < 0) {
        ok = false;
        detail::add_warning(report, "unknown label value");
      }
    }
    if (!ok) {
      ++report.rows_rejected;
      continue;
    }
    data.append_row(cells, label_pos >= 0 ? label : -1);
    report.kept_rows.push_back(data_row);
    ++report.rows_kept;
  }
  if (report_out) *report_out = report;
  return data;
}

inline Dataset ingest_csv_file(const std::string& path, const FeatureSchema& schema,
                               bool require_label,
                               IngestReport* report_out = nullptr) {
  return ingest_csv(read_text_file(path), schema, require_label, report_out);
}

// Inverse of ingestion: feature columns in schema order, label column last
// when labels are present. Numeric cells use shortest round-trip formatting,
// so ingest(dataset_to_csv(d)) reproduces d bit-exactly.
inline std::string dataset_to_csv(const Dataset& data, const FeatureSchema& schema) {
  if (data.num_features != schema.num_features())
    throw SchemaError("dataset_to_csv: dataset does not match the schema");
  const bool labeled = data.labels.size() == data.n && data.n > 0;
  std::string out;
  for (int f = 0; f < schema.num_features(); ++f) {
    if (f) out += ',';
    out += csv_escape(schema.features[static_cast<std::size_t>(f)].name);
  }
  if (labeled || data.n == 0) {
    if (schema.num_features() > 0) out += ',';
    out += csv_escape(schema.label_name);
  }
  out += '\n';
  for (std::size_t i = 0; i < data.n; ++i) {
    const double* row = data.row(i);
    for (int f = 0; f < schema.num_features(); ++f) {
      if (f) out += ',';
      const FeatureSpec& spec = schema.features[static_cast<std::size_t>(f)];
      if (spec.kind == FeatureKind::kNumeric) {
        out += format_double(row[f]);
      } else {
        out += csv_escape(spec.domain[static_cast<std::size_t>(row[f])]);
      }
    }
    if (labeled) {
      if (schema.num_features() > 0) out += ',';
      out += csv_escape(schema.classes[static_cast<std::size_t>(data.labels[i])]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace lumberjack

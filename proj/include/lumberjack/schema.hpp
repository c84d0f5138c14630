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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumberjack/errors.hpp"
#include "lumberjack/text_io.hpp"

namespace lumberjack {

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  double lower = 0.0;   // numeric only
  double upper = 0.0;   // numeric only
  std::vector<std::string> domain;  // categorical only

  int domain_size() const { return static_cast<int>(domain.size()); }

  int category_index(const std::string& value) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (domain[i] == value) return static_cast<int>(i);
    return -1;
  }
};

// Public description of the feature space: every column the trainer may split
// on, with its bounds or category domain, plus the label column. Feature
// order is the file order of the schema document, which fixes the meaning of
// feature indices everywhere downstream.
struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::string label_name;
  std::vector<std::string> classes;

  int num_features() const { return static_cast<int>(features.size()); }
  int num_classes() const { return static_cast<int>(classes.size()); }

  int class_index(const std::string& value) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == value) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    if (features.empty()) throw SchemaError("schema has no feature columns");
    if (classes.size() < 2) throw SchemaError("label needs at least two classes");
    for (const FeatureSpec& f : features) {
      if (f.name.empty()) throw SchemaError("feature with empty name");
      if (f.name == label_name)
        throw SchemaError("label column listed among features");
      if (f.kind == FeatureKind::kNumeric) {
        if (!std::isfinite(f.lower) || !std::isfinite(f.upper) ||
            !(f.lower < f.upper))
          throw SchemaError("numeric feature '" + f.name +
                            "' needs finite lower < upper");
      } else {
        if (f.domain.empty())
          throw SchemaError("categorical feature '" + f.name + "' has empty domain");
        for (std::size_t i = 0; i < f.domain.size(); ++i)
          for (std::size_t j = i + 1; j < f.domain.size(); ++j)
            if (f.domain[i] == f.domain[j])
              throw SchemaError("categorical feature '" + f.name +
                                "' has duplicate category '" + f.domain[i] + "'");
      }
    }
    for (std::size_t i = 0; i < features.size(); ++i)
      for (std::size_t j = i + 1; j < features.size(); ++j)
        if (features[i].name == features[j].name)
          throw SchemaError("duplicate feature column '" + features[i].name + "'");
  }

  // Canonical single-line form; its hash identifies the schema in model files.
  std::string canonical_text() const {
    nlohmann::ordered_json cols;
    for (const FeatureSpec& f : features) {
      if (f.kind == FeatureKind::kNumeric)
        cols[f.name] = {{"type", "numeric"}, {"lower", f.lower}, {"upper", f.upper}};
      else
        cols[f.name] = {{"type", "categorical"}, {"domain", f.domain}};
    }
    cols[label_name] = {{"type", "categorical"}, {"domain", classes}};
    nlohmann::ordered_json doc;
    doc["label"] = label_name;
    doc["columns"] = std::move(cols);
    return doc.dump();
  }

  std::uint64_t hash() const { return fnv1a64(canonical_text()); }

  static FeatureSchema from_json_text(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
      doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("label") || !doc.contains("columns"))
      throw SchemaError("schema must be an object with 'label' and 'columns'");
    if (!doc["label"].is_string())
      throw SchemaError("schema 'label' must be a column name");
    if (!doc["columns"].is_object())
      throw SchemaError("schema 'columns' must map names to column specs");

    FeatureSchema s;
    s.label_name = doc["label"].get<std::string>();
    bool saw_label = false;
    for (const auto& [name, col] : doc["columns"].items()) {
      if (!col.is_object() || !col.contains("type"))
        throw SchemaError("column '" + name + "' needs a 'type'");
      const std::string type = col["type"].get<std::string>();
      FeatureSpec f;
      f.name = name;
      if (type == "numeric") {
        if (!col.contains("lower") || !col.contains("upper") ||
            !col["lower"].is_number() || !col["upper"].is_number())
          throw SchemaError("numeric column '" + name + "' needs lower/upper");
        f.kind = FeatureKind::kNumeric;
        f.lower = col["lower"].get<double>();
        f.upper = col["upper"].get<double>();
      } else if (type == "categorical") {
        if (!col.contains("domain") || !col["domain"].is_array())
          throw SchemaError("categorical column '" + name + "' needs a domain array");
        f.kind = FeatureKind::kCategorical;
        for (const auto& v : col["domain"]) {
          if (!v.is_string())
            throw SchemaError("domain of '" + name + "' must contain strings");
          f.domain.push_back(v.get<std::string>());
        }
      } else {
        throw SchemaError("column '" + name + "' has unknown type '" + type + "'");
      }
      if (name == s.label_name) {
        if (f.kind != FeatureKind::kCategorical)
          throw SchemaError("label column must be categorical");
        s.classes = std::move(f.domain);
        saw_label = true;
      } else {
        s.features.push_back(std::move(f));
      }
    }
    if (!saw_label)
      throw SchemaError("label column '" + s.label_name + "' not found in columns");
    s.validate();
    return s;
  }

  static FeatureSchema load(const std::string& path) {
    return from_json_text(read_text_file(path));
  }

  void save(const std::string& path) const {
    nlohmann::ordered_json cols;
    for (const FeatureSpec& f : features) {
      if (f.kind == FeatureKind::kNumeric)
        cols[f.name] = {{"type", "numeric"}, {"lower", f.lower}, {"upper", f.upper}};
      else
        cols[f.name] = {{"type", "categorical"}, {"domain", f.domain}};
    }
    cols[label_name] = {{"type", "categorical"}, {"domain", classes}};
    nlohmann::ordered_json doc;
    doc["label"] = label_name;
    doc["columns"] = std::move(cols);
    write_text_file(path, doc.dump(2) + "\n");
  }
};

}  // namespace lumberjack

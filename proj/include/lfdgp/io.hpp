/*
 * Copyright 2026 The lfdgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lfdgp/domain.hpp"
#include "lfdgp/gp.hpp"
#include "lfdgp/kernels.hpp"

namespace lfdgp {

using json = nlohmann::json;

// Schema: {"dims": [{"name", "kind", "domain", "groups"?}], "time"?: name, "outputs"?: [names]}.
json schema_to_json(const TaskSchema& schema, const std::vector<std::string>& outputs);
/// Parses a schema; `outputs` receives the optional output names (may stay empty).
TaskSchema schema_from_json(const json& j, std::vector<std::string>* outputs = nullptr);

json coord_to_json(const Coord& c);
Coord coord_from_json(const DimSpec& dim, const json& j);
json point_to_json(const TaskPoint& p);
TaskPoint point_from_json(const TaskSchema& schema, const json& j);

json demonstrations_to_json(const DemonstrationSet& set);
DemonstrationSet demonstrations_from_json(const json& j);
DemonstrationSet read_demonstrations(const std::filesystem::path& path);
void write_demonstrations(const std::filesystem::path& path, const DemonstrationSet& set);

json kernel_to_json(const KernelSpec& spec, const TaskSchema& schema);
KernelSpec kernel_from_json(const json& j, const TaskSchema& schema);

/// A fitted multi-output policy as stored on disk.
struct ModelBundle {
  std::shared_ptr<const TaskSchema> schema;
  std::vector<std::string> output_names;
  std::vector<GPModel> models;
};

json models_to_json(const ModelBundle& bundle);
ModelBundle models_from_json(const json& j);
ModelBundle read_models(const std::filesystem::path& path);
void write_models(const std::filesystem::path& path, const ModelBundle& bundle);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal string that parses back to the same double ('.' separator).
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  /// Column by header name; throws DataError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
double parse_double(std::string_view s);

}  // namespace lfdgp

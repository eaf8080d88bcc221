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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace lfdgp {

enum class DimKind { real, integer, categorical };

const char* to_string(DimKind kind);
DimKind dim_kind_from_string(const std::string& name);

/// One input dimension of the task-variable space.
///
/// Only the fields matching `kind` are meaningful. Category group labels are
/// optional; when present there is one label per category and they partition
/// the categories.
struct DimSpec {
  std::string name;
  DimKind kind = DimKind::real;
  double real_lo = 0.0;
  double real_hi = 1.0;
  std::int64_t int_lo = 0;
  std::int64_t int_hi = 0;
  std::vector<std::string> categories;
  std::vector<std::string> groups;

  static DimSpec real(std::string name, double lo, double hi);
  static DimSpec integer(std::string name, std::int64_t lo, std::int64_t hi);
  static DimSpec categorical(std::string name, std::vector<std::string> labels,
                             std::vector<std::string> groups = {});

  /// Number of levels for discrete dims (integer range size or category count).
  std::size_t level_count() const;
  std::optional<std::size_t> category_index(const std::string& label) const;
  /// Group id per category, numbered by first appearance. All zeros without groups.
  std::vector<int> group_ids() const;
  std::size_t group_count() const;
};

class TaskSchema {
 public:
  TaskSchema() = default;
  /// Throws SchemaError when the invariants do not hold.
  TaskSchema(std::vector<DimSpec> dims, std::size_t time_dim);

  const std::vector<DimSpec>& dims() const noexcept { return dims_; }
  const DimSpec& dim(std::size_t i) const { return dims_.at(i); }
  std::size_t size() const noexcept { return dims_.size(); }
  std::size_t time_dim() const noexcept { return time_dim_; }
  std::optional<std::size_t> find(const std::string& name) const;

  bool operator==(const TaskSchema&) const = default;

 private:
  std::vector<DimSpec> dims_;
  std::size_t time_dim_ = 0;
};

bool operator==(const DimSpec& a, const DimSpec& b);

/// A coordinate value: real number, bounded integer or category label.
using Coord = std::variant<double, std::int64_t, std::string>;

std::string to_string(const Coord& c);

struct TaskPoint {
  std::vector<Coord> coords;

  bool operator==(const TaskPoint& other) const { return coords == other.coords; }
  bool operator<(const TaskPoint& other) const { return coords < other.coords; }
};

struct Violation {
  std::size_t dim;
  std::string message;
};

/// Lists every coordinate of `p` that lies outside its declared domain.
std::vector<Violation> validate_point(const TaskSchema& schema, const TaskPoint& p);

/// Numeric encoding of points, one column per dim: real value, integer value,
/// or category index.
Eigen::MatrixXd encode(const TaskSchema& schema, std::span<const TaskPoint> points);

struct Demonstration {
  std::string id;
  std::map<std::string, Coord> context;
  std::vector<double> times;
  Eigen::MatrixXd outputs;  // samples x output dims

  std::size_t sample_count() const noexcept { return times.size(); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(outputs.cols()); }
  double duration() const { return times.back() - times.front(); }
};

/// Throws DataError when timestamps are not strictly increasing or fewer than two samples exist.
void validate_demonstration(const Demonstration& d);

struct DemonstrationSet {
  TaskSchema schema;
  std::vector<std::string> output_names;
  std::vector<Demonstration> demonstrations;

  std::size_t output_dim() const noexcept { return output_names.size(); }
  /// Task point of sample k of demonstration d (time plus context).
  TaskPoint point(const Demonstration& d, std::size_t k) const;
  /// Check schema, context domains and sample shapes of every demonstration.
  void validate() const;
};

/// All samples of a set as parallel point / output-row lists.
struct FlatSamples {
  std::vector<TaskPoint> points;
  Eigen::MatrixXd outputs;
};

FlatSamples flatten(const DemonstrationSet& set);

/// Sufficient statistics of replicated observations.
struct CompressedDataset {
  std::vector<TaskPoint> unique_points;
  std::vector<std::size_t> counts;
  Eigen::MatrixXd means;   // n x outputs
  Eigen::MatrixXd sq_dev;  // n x outputs, sum of squared deviations from the mean
  std::size_t total_count = 0;

  std::size_t size() const noexcept { return unique_points.size(); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(means.cols()); }
};

/// Groups by exact coordinate equality in first-appearance order.
CompressedDataset build_compressed(std::span<const TaskPoint> points, const Eigen::MatrixXd& outputs);
/// Ragged-output overload; throws SchemaError when output vectors differ in length.
CompressedDataset build_compressed(std::span<const TaskPoint> points,
                                   const std::vector<std::vector<double>>& outputs);

}  // namespace lfdgp

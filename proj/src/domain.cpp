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

#include "lfdgp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lfdgp/error.hpp"

namespace lfdgp {

const char* to_string(DimKind kind) {
  switch (kind) {
    case DimKind::real: return "real";
    case DimKind::integer: return "integer";
    case DimKind::categorical: return "categorical";
  }
  return "unknown";
}

DimKind dim_kind_from_string(const std::string& name) {
  if (name == "real") return DimKind::real;
  if (name == "integer") return DimKind::integer;
  if (name == "categorical") return DimKind::categorical;
  throw SchemaError("unknown dimension kind '" + name + "'");
}

DimSpec DimSpec::real(std::string name, double lo, double hi) {
  DimSpec d;
  d.name = std::move(name);
  d.kind = DimKind::real;
  d.real_lo = lo;
  d.real_hi = hi;
  return d;
}

DimSpec DimSpec::integer(std::string name, std::int64_t lo, std::int64_t hi) {
  DimSpec d;
  d.name = std::move(name);
  d.kind = DimKind::integer;
  d.int_lo = lo;
  d.int_hi = hi;
  return d;
}

DimSpec DimSpec::categorical(std::string name, std::vector<std::string> labels,
                             std::vector<std::string> groups) {
  DimSpec d;
  d.name = std::move(name);
  d.kind = DimKind::categorical;
  d.categories = std::move(labels);
  d.groups = std::move(groups);
  return d;
}

std::size_t DimSpec::level_count() const {
  switch (kind) {
    case DimKind::integer: return static_cast<std::size_t>(int_hi - int_lo + 1);
    case DimKind::categorical: return categories.size();
    case DimKind::real: break;
  }
  return 0;
}

std::optional<std::size_t> DimSpec::category_index(const std::string& label) const {
  auto it = std::find(categories.begin(), categories.end(), label);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

std::vector<int> DimSpec::group_ids() const {
  std::vector<int> ids(categories.size(), 0);
  if (groups.empty()) return ids;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), groups[i]);
    if (it == seen.end()) {
      seen.push_back(groups[i]);
      ids[i] = static_cast<int>(seen.size() - 1);
    } else {
      ids[i] = static_cast<int>(it - seen.begin());
    }
  }
  return ids;
}

std::size_t DimSpec::group_count() const {
  if (groups.empty()) return categories.empty() ? 0 : 1;
  return std::set<std::string>(groups.begin(), groups.end()).size();
}

bool operator==(const DimSpec& a, const DimSpec& b) {
  if (a.name != b.name || a.kind != b.kind) return false;
  switch (a.kind) {
    case DimKind::real: return a.real_lo == b.real_lo && a.real_hi == b.real_hi;
    case DimKind::integer: return a.int_lo == b.int_lo && a.int_hi == b.int_hi;
    case DimKind::categorical: return a.categories == b.categories && a.groups == b.groups;
  }
  return false;
}

TaskSchema::TaskSchema(std::vector<DimSpec> dims, std::size_t time_dim)
    : dims_(std::move(dims)), time_dim_(time_dim) {
  if (dims_.empty()) throw SchemaError("schema needs at least one dimension");
  if (time_dim_ >= dims_.size()) throw SchemaError("time dimension index out of range");
  if (dims_[time_dim_].kind != DimKind::real) {
    throw SchemaError("time dimension '" + dims_[time_dim_].name + "' must be real-valued");
  }
  std::set<std::string> names;
  for (const auto& d : dims_) {
    if (d.name.empty()) throw SchemaError("dimension with empty name");
    if (!names.insert(d.name).second) throw SchemaError("duplicate dimension name '" + d.name + "'");
    switch (d.kind) {
      case DimKind::real:
        if (!(d.real_lo <= d.real_hi) || !std::isfinite(d.real_lo) || !std::isfinite(d.real_hi)) {
          throw SchemaError("dimension '" + d.name + "': empty real interval");
        }
        break;
      case DimKind::integer:
        if (d.int_lo > d.int_hi) throw SchemaError("dimension '" + d.name + "': empty integer range");
        break;
      case DimKind::categorical: {
        if (d.categories.empty()) throw SchemaError("dimension '" + d.name + "': empty category list");
        std::set<std::string> labels(d.categories.begin(), d.categories.end());
        if (labels.size() != d.categories.size()) {
          throw SchemaError("dimension '" + d.name + "': duplicate category labels");
        }
        if (!d.groups.empty() && d.groups.size() != d.categories.size()) {
          throw SchemaError("dimension '" + d.name + "': group labels must cover every category");
        }
        break;
      }
    }
  }
}

std::optional<std::size_t> TaskSchema::find(const std::string& name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name == name) return i;
  }
  return std::nullopt;
}

std::string to_string(const Coord& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          std::ostringstream os;
          os.precision(17);
          os << v;
          return os.str();
        }
      },
      c);
}

std::vector<Violation> validate_point(const TaskSchema& schema, const TaskPoint& p) {
  std::vector<Violation> out;
  if (p.coords.size() != schema.size()) {
    out.push_back({schema.size(), "point has " + std::to_string(p.coords.size()) + " coordinates, schema has " +
                                      std::to_string(schema.size())});
    return out;
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const DimSpec& d = schema.dim(i);
    const Coord& c = p.coords[i];
    switch (d.kind) {
      case DimKind::real: {
        const double* v = std::get_if<double>(&c);
        if (v == nullptr) {
          out.push_back({i, "dim '" + d.name + "' expects a real value"});
        } else if (!(*v >= d.real_lo && *v <= d.real_hi)) {
          out.push_back({i, "dim '" + d.name + "' value " + to_string(c) + " outside [" +
                                std::to_string(d.real_lo) + ", " + std::to_string(d.real_hi) + "]"});
        }
        break;
      }
      case DimKind::integer: {
        const std::int64_t* v = std::get_if<std::int64_t>(&c);
        if (v == nullptr) {
          out.push_back({i, "dim '" + d.name + "' expects an integer value"});
        } else if (*v < d.int_lo || *v > d.int_hi) {
          out.push_back({i, "dim '" + d.name + "' value " + std::to_string(*v) + " outside {" +
                                std::to_string(d.int_lo) + ".." + std::to_string(d.int_hi) + "}"});
        }
        break;
      }
      case DimKind::categorical: {
        const std::string* v = std::get_if<std::string>(&c);
        if (v == nullptr) {
          out.push_back({i, "dim '" + d.name + "' expects a category label"});
        } else if (!d.category_index(*v)) {
          out.push_back({i, "dim '" + d.name + "' has no category '" + *v + "'"});
        }
        break;
      }
    }
  }
  return out;
}

Eigen::MatrixXd encode(const TaskSchema& schema, std::span<const TaskPoint> points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(schema.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const TaskPoint& p = points[r];
    if (p.coords.size() != schema.size()) throw SchemaError("point dimension does not match schema");
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const DimSpec& d = schema.dim(i);
      double v = 0.0;
      switch (d.kind) {
        case DimKind::real:
          if (const double* x = std::get_if<double>(&p.coords[i])) {
            v = *x;
          } else {
            throw SchemaError("dim '" + d.name + "' expects a real value");
          }
          break;
        case DimKind::integer:
          if (const std::int64_t* x = std::get_if<std::int64_t>(&p.coords[i])) {
            v = static_cast<double>(*x);
          } else {
            throw SchemaError("dim '" + d.name + "' expects an integer value");
          }
          break;
        case DimKind::categorical: {
          const std::string* x = std::get_if<std::string>(&p.coords[i]);
          auto idx = x ? d.category_index(*x) : std::nullopt;
          if (!idx) throw SchemaError("dim '" + d.name + "' has no category '" + (x ? *x : std::string("?")) + "'");
          v = static_cast<double>(*idx);
          break;
        }
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return out;
}

void validate_demonstration(const Demonstration& d) {
  if (d.times.size() < 2) throw DataError("demonstration '" + d.id + "' has fewer than two samples");
  if (static_cast<std::size_t>(d.outputs.rows()) != d.times.size()) {
    throw DataError("demonstration '" + d.id + "': sample count mismatch between times and outputs");
  }
  for (std::size_t k = 1; k < d.times.size(); ++k) {
    if (!(d.times[k] > d.times[k - 1])) {
      throw DataError("demonstration '" + d.id + "': timestamps not strictly increasing at sample " +
                      std::to_string(k));
    }
  }
}

TaskPoint DemonstrationSet::point(const Demonstration& d, std::size_t k) const {
  TaskPoint p;
  p.coords.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i == schema.time_dim()) {
      p.coords[i] = d.times.at(k);
      continue;
    }
    auto it = d.context.find(schema.dim(i).name);
    if (it == d.context.end()) {
      throw DataError("demonstration '" + d.id + "' lacks context value for '" + schema.dim(i).name + "'");
    }
    p.coords[i] = it->second;
  }
  return p;
}

void DemonstrationSet::validate() const {
  for (const auto& d : demonstrations) {
    validate_demonstration(d);
    if (d.output_dim() != output_dim()) {
      throw SchemaError("demonstration '" + d.id + "' has " + std::to_string(d.output_dim()) +
                        " outputs, expected " + std::to_string(output_dim()));
    }
    for (const auto& [name, value] : d.context) {
      auto idx = schema.find(name);
      if (!idx || *idx == schema.time_dim()) {
        throw SchemaError("demonstration '" + d.id + "': unknown context variable '" + name + "'");
      }
    }
    TaskPoint p = point(d, 0);
    auto violations = validate_point(schema, p);
    for (const auto& v : violations) {
      if (v.dim != schema.time_dim()) throw DataError("demonstration '" + d.id + "': " + v.message);
    }
  }
}

FlatSamples flatten(const DemonstrationSet& set) {
  FlatSamples flat;
  std::size_t total = 0;
  for (const auto& d : set.demonstrations) total += d.sample_count();
  flat.points.reserve(total);
  flat.outputs.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(set.output_dim()));
  Eigen::Index row = 0;
  for (const auto& d : set.demonstrations) {
    for (std::size_t k = 0; k < d.sample_count(); ++k) {
      flat.points.push_back(set.point(d, k));
      flat.outputs.row(row++) = d.outputs.row(static_cast<Eigen::Index>(k));
    }
  }
  return flat;
}

CompressedDataset build_compressed(std::span<const TaskPoint> points, const Eigen::MatrixXd& outputs) {
  if (points.empty()) throw DataError("cannot compress an empty sample list");
  if (static_cast<std::size_t>(outputs.rows()) != points.size()) {
    throw SchemaError("point and output counts differ");
  }
  const Eigen::Index n_out = outputs.cols();

  CompressedDataset c;
  std::map<TaskPoint, std::size_t> index;
  std::vector<std::size_t> group_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, inserted] = index.try_emplace(points[i], c.unique_points.size());
    if (inserted) {
      c.unique_points.push_back(points[i]);
      c.counts.push_back(0);
    }
    group_of[i] = it->second;
    ++c.counts[it->second];
  }

  const auto n = static_cast<Eigen::Index>(c.unique_points.size());
  c.means = Eigen::MatrixXd::Zero(n, n_out);
  c.sq_dev = Eigen::MatrixXd::Zero(n, n_out);
  for (std::size_t i = 0; i < points.size(); ++i) {
    c.means.row(static_cast<Eigen::Index>(group_of[i])) += outputs.row(static_cast<Eigen::Index>(i));
  }
  for (Eigen::Index g = 0; g < n; ++g) c.means.row(g) /= static_cast<double>(c.counts[static_cast<std::size_t>(g)]);
  // second pass keeps the deviations free of cancellation
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto g = static_cast<Eigen::Index>(group_of[i]);
    if (c.counts[group_of[i]] == 1) continue;
    c.sq_dev.row(g) += (outputs.row(static_cast<Eigen::Index>(i)) - c.means.row(g)).array().square().matrix();
  }
  c.total_count = points.size();
  return c;
}

CompressedDataset build_compressed(std::span<const TaskPoint> points,
                                   const std::vector<std::vector<double>>& outputs) {
  if (outputs.size() != points.size()) throw SchemaError("point and output counts differ");
  if (outputs.empty()) throw DataError("cannot compress an empty sample list");
  const std::size_t dim = outputs.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(outputs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != dim) {
      throw SchemaError("output " + std::to_string(i) + " has dimension " + std::to_string(outputs[i].size()) +
                        ", expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = outputs[i][k];
  }
  return build_compressed(points, m);
}

}  // namespace lfdgp

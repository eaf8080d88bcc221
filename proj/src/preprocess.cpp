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

#include "lfdgp/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfdgp/error.hpp"

namespace lfdgp {

std::vector<double> compute_tci(const Demonstration& d) {
  const auto m = static_cast<std::size_t>(d.outputs.rows());
  if (m < 2) throw DataError("demonstration '" + d.id + "' has fewer than two samples");
  std::vector<double> z(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    z[k] = z[k - 1] + (d.outputs.row(i) - d.outputs.row(i - 1)).norm();
  }
  const double total = z.back();
  if (!(total > 0.0)) throw DegenerateError("demonstration '" + d.id + "' has zero path length");
  for (double& v : z) v /= total;
  return z;
}

DtwResult dtw(std::span<const double> ref, std::span<const double> other) {
  const std::size_t n = ref.size(), m = other.size();
  if (n == 0 || m == 0) throw DataError("DTW needs nonempty sequences");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, inf);
  auto at = [&](std::size_t k, std::size_t l) -> double& { return acc[k * m + l]; };
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < m; ++l) {
      const double c = std::abs(ref[k] - other[l]);
      if (k == 0 && l == 0) {
        at(k, l) = c;
        continue;
      }
      double best = inf;
      if (k > 0 && l > 0) best = at(k - 1, l - 1);
      if (k > 0) best = std::min(best, at(k - 1, l));
      if (l > 0) best = std::min(best, at(k, l - 1));
      at(k, l) = c + best;
    }
  }

  DtwResult out;
  out.cost = at(n - 1, m - 1);
  std::size_t k = n - 1, l = m - 1;
  out.path.emplace_back(k, l);
  while (k > 0 || l > 0) {
    if (k > 0 && l > 0) {
      const double d = at(k - 1, l - 1), up = at(k - 1, l), left = at(k, l - 1);
      if (d <= up && d <= left) {
        --k;
        --l;
      } else if (up <= left) {
        --k;
      } else {
        --l;
      }
    } else if (k > 0) {
      --k;
    } else {
      --l;
    }
    out.path.emplace_back(k, l);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

double path_cost(std::span<const double> ref, std::span<const double> other, const WarpPath& path) {
  double c = 0.0;
  for (const auto& [k, l] : path) c += std::abs(ref[k] - other[l]);
  return c;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t m) {
  if (m < 2) throw UsageError("a grid needs at least two points");
  std::vector<double> g(m);
  for (std::size_t k = 0; k < m; ++k) g[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(m - 1);
  g.front() = t0;
  g.back() = t1;
  return g;
}

Eigen::MatrixXd resample(std::span<const double> times, const Eigen::MatrixXd& values, std::span<const double> grid) {
  if (times.size() != static_cast<std::size_t>(values.rows()) || times.empty()) {
    throw DataError("resample: times and values differ in length");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), values.cols());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto row = static_cast<Eigen::Index>(g);
    const double t = grid[g];
    if (t <= times.front()) {
      out.row(row) = values.row(0);
      continue;
    }
    if (t >= times.back()) {
      out.row(row) = values.row(values.rows() - 1);
      continue;
    }
    // times[j] <= t < times[j + 1]
    const auto j = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
    const double w = (t - times[j]) / (times[j + 1] - times[j]);
    const auto i = static_cast<Eigen::Index>(j);
    out.row(row) = (1.0 - w) * values.row(i) + w * values.row(i + 1);
  }
  return out;
}

std::size_t median_reference(const DemonstrationSet& set) {
  if (set.demonstrations.empty()) throw DataError("no demonstrations to align");
  std::vector<std::size_t> order(set.demonstrations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.demonstrations[a].sample_count() < set.demonstrations[b].sample_count();
  });
  return order[(order.size() - 1) / 2];
}

namespace {

// Fractional sample index of `target` on a nondecreasing sequence, searched in [lo, hi].
double crossing(std::span<const double> z, double target, std::size_t lo, std::size_t hi) {
  if (target <= z[lo]) return static_cast<double>(lo);
  for (std::size_t l = lo; l < hi; ++l) {
    if (target <= z[l + 1]) {
      const double dz = z[l + 1] - z[l];
      const double w = dz > 0.0 ? (target - z[l]) / dz : 0.0;
      return static_cast<double>(l) + w;
    }
  }
  return static_cast<double>(hi);
}

Eigen::RowVectorXd row_at(const Eigen::MatrixXd& y, double pos) {
  const auto j = static_cast<Eigen::Index>(std::floor(pos));
  const double w = pos - static_cast<double>(j);
  if (w == 0.0 || j + 1 >= y.rows()) return y.row(std::min<Eigen::Index>(j, y.rows() - 1));
  return (1.0 - w) * y.row(j) + w * y.row(j + 1);
}

}  // namespace

AlignmentResult dtw_align(const DemonstrationSet& set, const AlignOptions& options) {
  set.validate();
  const auto& demos = set.demonstrations;
  std::size_t ref = 0;
  if (options.reference) {
    const auto it = std::find_if(demos.begin(), demos.end(), [&](const auto& d) { return d.id == *options.reference; });
    if (it == demos.end()) throw DataError("reference demonstration '" + *options.reference + "' not found");
    ref = static_cast<std::size_t>(it - demos.begin());
  } else {
    ref = median_reference(set);
  }
  const Demonstration& r = demos[ref];
  const std::vector<double> zr = compute_tci(r);
  const double t_ref = r.duration();
  std::vector<double> rel_times(r.times.size());
  for (std::size_t k = 0; k < rel_times.size(); ++k) rel_times[k] = r.times[k] - r.times.front();
  const std::vector<double> grid = uniform_grid(0.0, t_ref, options.grid);

  AlignmentResult out;
  out.reference_id = r.id;
  out.aligned.schema = set.schema;
  out.aligned.output_names = set.output_names;
  for (const auto& d : demos) {
    const std::vector<double> z = compute_tci(d);
    DtwResult res = dtw(zr, z);

    // Window of matched demo samples per reference index.
    std::vector<std::size_t> lo(zr.size(), std::numeric_limits<std::size_t>::max()), hi(zr.size(), 0);
    for (const auto& [k, l] : res.path) {
      lo[k] = std::min(lo[k], l);
      hi[k] = std::max(hi[k], l);
    }
    // Refine each match to the point where the demo's TCI equals the reference's.
    Eigen::MatrixXd on_ref(static_cast<Eigen::Index>(zr.size()), d.outputs.cols());
    const std::size_t last = z.size() - 1;
    for (std::size_t k = 0; k < zr.size(); ++k) {
      const std::size_t a = lo[k] > 0 ? lo[k] - 1 : 0;
      const std::size_t b = std::min(last, hi[k] + 1);
      on_ref.row(static_cast<Eigen::Index>(k)) = row_at(d.outputs, crossing(z, zr[k], a, b));
    }

    Demonstration a;
    a.id = d.id;
    a.context = d.context;
    a.times = grid;
    a.outputs = resample(rel_times, on_ref, grid);
    out.aligned.demonstrations.push_back(std::move(a));
    out.costs.push_back(res.cost);
    out.paths.push_back(std::move(res.path));
  }
  return out;
}

double TimeScaler::operator()(double t, double t0) const {
  if (t_desired == t_ref) return t;
  return t0 + (t - t0) * (t_desired / t_ref);
}

Demonstration time_scale(const Demonstration& d, const TimeScaler& scaler) {
  if (!(scaler.t_ref > 0.0) || !(scaler.t_desired > 0.0)) throw DataError("time scaling needs positive durations");
  validate_demonstration(d);
  if (std::abs(d.duration() - scaler.t_ref) > 1e-9) {
    throw DataError("demonstration '" + d.id + "' does not last t_R");
  }
  Demonstration out = d;
  for (double& t : out.times) t = scaler(t, d.times.front());
  return out;
}

}  // namespace lfdgp

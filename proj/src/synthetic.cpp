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

#include "lfdgp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lfdgp/error.hpp"

namespace lfdgp {

namespace {

using std::numbers::pi;

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) v.back() = b;
  return v;
}

std::size_t grid_at(const SyntheticSpec& spec, std::size_t i, std::size_t fallback) {
  return i < spec.grid.size() ? spec.grid[i] : fallback;
}

struct Shape {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<double> cum;  // normalized arclength at each vertex

  explicit Shape(std::vector<Eigen::Vector2d> v) : vertices(std::move(v)), cum(vertices.size(), 0.0) {
    for (std::size_t i = 1; i < vertices.size(); ++i) cum[i] = cum[i - 1] + (vertices[i] - vertices[i - 1]).norm();
    for (double& c : cum) c /= cum.back();
  }

  Eigen::Vector2d at(double tau) const {
    tau = std::clamp(tau, 0.0, 1.0);
    const auto it = std::upper_bound(cum.begin(), cum.end(), tau);
    if (it == cum.end()) return vertices.back();
    const auto j = static_cast<std::size_t>(it - cum.begin()) - 1;
    const double w = (tau - cum[j]) / (cum[j + 1] - cum[j]);
    return (1.0 - w) * vertices[j] + w * vertices[j + 1];
  }
};

Shape letter_shape(char u) {
  using V = Eigen::Vector2d;
  switch (u) {
    case 'A':
      return Shape({V(0, 0), V(0.5, 1), V(1, 0), V(0.75, 0.5), V(0.25, 0.5)});
    case 'B':
      return Shape({V(0, 0), V(0, 1), V(0.6, 0.95), V(0.7, 0.75), V(0.6, 0.55), V(0, 0.5), V(0.7, 0.45),
                    V(0.8, 0.2), V(0.6, 0.02), V(0, 0)});
    case 'C': {
      std::vector<V> v;
      for (double a : linspace(pi / 3, 5 * pi / 3, 21)) v.emplace_back(0.5 + 0.5 * std::cos(a), 0.5 + 0.5 * std::sin(a));
      return Shape(std::move(v));
    }
    default:
      return Shape({V(0, 0), V(0, 1), V(0.5, 0.95), V(0.85, 0.7), V(0.9, 0.5), V(0.85, 0.3), V(0.5, 0.05), V(0, 0)});
  }
}

DemonstrationSet make_set(TaskSchema schema, std::vector<std::string> outputs) {
  DemonstrationSet set;
  set.schema = std::move(schema);
  set.output_names = std::move(outputs);
  return set;
}

}  // namespace

double mixed3(double t, std::int64_t s, const std::string& u) {
  const double sd = static_cast<double>(s);
  if (u == "lin") return -t * sd / 20.0;
  if (u == "sin") return 0.3 * std::sin(pi * (5.0 * t - 0.25) - sd / 5.0);
  if (u == "dsin") return 0.25 * std::sin(pi * (3.0 * t - 0.5)) * std::exp(-0.8 * t * sd) + 0.1;
  throw DataError("mixed3: unknown branch '" + u + "'");
}

double damped_mean(double t) {
  return std::sin(pi * (4.0 * t - 0.25)) * std::exp(-3.0 * t) / (1.0 + std::exp(-5.0 * t));
}

TaskSchema mixed3_schema() {
  return TaskSchema({DimSpec::real("t", 0.0, 1.0), DimSpec::integer("s", 1, 5),
                     DimSpec::categorical("u", {"lin", "sin", "dsin"})},
                    0);
}

TaskSchema time_only_schema() { return TaskSchema({DimSpec::real("t", 0.0, 1.0)}, 0); }

TaskSchema letters_schema() {
  return TaskSchema({DimSpec::real("t", 0.0, 1.0), DimSpec::integer("s", 2, 6),
                     DimSpec::categorical("u", {"A", "B", "C", "D"})},
                    0);
}

DemonstrationSet gen_synthetic(const SyntheticSpec& spec) {
  if (spec.replicates < 1) throw UsageError("replicates must be at least 1");
  if (!(spec.noise >= 0.0)) throw UsageError("noise variance must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_sd = std::sqrt(spec.noise);

  if (spec.generator == "mixed3") {
    const std::size_t nt = grid_at(spec, 0, 8), ns = grid_at(spec, 1, 3), nu = grid_at(spec, 2, 3);
    if (nt < 2 || ns < 1 || ns > 5 || nu < 1 || nu > 3) throw UsageError("mixed3 grid must be {>=2, 1..5, 1..3}");
    const std::vector<std::string> branches = {"lin", "sin", "dsin"};
    const std::vector<double> ts = linspace(0.0, 1.0, nt);
    std::vector<std::int64_t> ss;
    for (double s : linspace(1.0, 5.0, ns)) ss.push_back(static_cast<std::int64_t>(std::lround(s)));
    if (ns == 1) ss = {3};
    DemonstrationSet set = make_set(mixed3_schema(), {"y"});
    for (std::size_t iu = 0; iu < nu; ++iu) {
      for (std::int64_t s : ss) {
        for (std::size_t r = 0; r < spec.replicates; ++r) {
          Demonstration d;
          d.id = branches[iu] + "-s" + std::to_string(s) + "-r" + std::to_string(r);
          d.context = {{"s", s}, {"u", branches[iu]}};
          d.times = ts;
          d.outputs.resize(static_cast<Eigen::Index>(nt), 1);
          for (std::size_t k = 0; k < nt; ++k) {
            const double eps = noise_sd > 0.0 ? noise_sd * normal(rng) : 0.0;
            d.outputs(static_cast<Eigen::Index>(k), 0) = mixed3(ts[k], s, branches[iu]) + eps;
          }
          set.demonstrations.push_back(std::move(d));
        }
      }
    }
    return set;
  }

  if (spec.generator == "damped" || spec.generator == "regimes") {
    const std::size_t n = grid_at(spec, 0, 50);
    if (n < 2) throw UsageError("time grid needs at least two points");
    const bool regimes = spec.generator == "regimes";
    const std::vector<double> ts = linspace(0.0, 1.0, n);
    DemonstrationSet set = make_set(time_only_schema(), {"y"});
    for (std::size_t r = 0; r < spec.replicates; ++r) {
      Demonstration d;
      d.id = "r" + std::to_string(r);
      d.times = ts;
      d.outputs.resize(static_cast<Eigen::Index>(n), 1);
      for (std::size_t k = 0; k < n; ++k) {
        const double sd = regimes ? (ts[k] < 0.5 ? 0.01 : 0.1) : noise_sd;
        const double eps = sd > 0.0 ? sd * normal(rng) : 0.0;
        d.outputs(static_cast<Eigen::Index>(k), 0) = damped_mean(ts[k]) + eps;
      }
      set.demonstrations.push_back(std::move(d));
    }
    return set;
  }

  if (spec.generator == "letters") {
    const std::size_t nominal = grid_at(spec, 0, 50);
    if (nominal < 8) throw UsageError("letters needs at least 8 samples per demonstration");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DemonstrationSet set = make_set(letters_schema(), {"x", "y"});
    for (char u : std::string("ABCD")) {
      const Shape shape = letter_shape(u);
      for (std::int64_t s = 2; s <= 6; ++s) {
        const double height = 8.0 * static_cast<double>(s);
        for (std::size_t r = 0; r < spec.replicates; ++r) {
          const double duration = 0.8 + 0.2 * unif(rng);
          const double warp = 0.6 * (2.0 * unif(rng) - 1.0);
          const double wobble = 0.02 * height * unif(rng);
          const double phase = 2.0 * pi * unif(rng);
          const auto m = static_cast<std::size_t>(std::lround(static_cast<double>(nominal) * (0.7 + 0.6 * unif(rng))));
          Demonstration d;
          d.id = std::string(1, u) + "-s" + std::to_string(s) + "-r" + std::to_string(r);
          d.context = {{"s", s}, {"u", std::string(1, u)}};
          d.times.resize(m);
          d.outputs.resize(static_cast<Eigen::Index>(m), 2);
          for (std::size_t k = 0; k < m; ++k) {
            const double v = static_cast<double>(k) / static_cast<double>(m - 1);
            const double tau = v + warp * std::sin(2.0 * pi * v) / (2.0 * pi);
            d.times[k] = duration * v;
            const Eigen::Vector2d p = height * shape.at(tau);
            const double bump = wobble * std::sin(pi * tau) * std::sin(2.0 * pi * tau + phase);
            for (Eigen::Index o = 0; o < 2; ++o) {
              const double eps = noise_sd > 0.0 ? noise_sd * normal(rng) : 0.0;
              d.outputs(static_cast<Eigen::Index>(k), o) = p(o) + bump + eps;
            }
          }
          d.times.back() = duration;
          set.demonstrations.push_back(std::move(d));
        }
      }
    }
    return set;
  }

  throw UsageError("unknown generator '" + spec.generator + "'");
}

R2Report evaluate_r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted) {
  if (truth.rows() == 0 || truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw DataError("R2: test and prediction shapes differ or are empty");
  }
  R2Report rep;
  double res_all = 0.0, tot_all = 0.0;
  for (Eigen::Index o = 0; o < truth.cols(); ++o) {
    const double mean = truth.col(o).mean();
    const double res = (truth.col(o) - predicted.col(o)).squaredNorm();
    const double tot = (truth.col(o).array() - mean).square().sum();
    rep.per_output.push_back(tot > 0.0 ? 1.0 - res / tot : std::numeric_limits<double>::quiet_NaN());
    res_all += res;
    tot_all += tot;
  }
  if (!(tot_all > 0.0)) throw DegenerateError("R2: test outputs have zero variance");
  rep.pooled = 1.0 - res_all / tot_all;
  return rep;
}

}  // namespace lfdgp

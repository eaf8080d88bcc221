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

#include "lfdgp/hyperopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "lfdgp/error.hpp"

namespace lfdgp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimization view of the maximized objective with evaluation counting.
class Problem {
 public:
  Problem(const Objective& objective, std::span<const double> lower, std::span<const double> upper)
      : objective_(objective), lower_(lower), upper_(upper) {}

  double cost(std::span<const double> x) {
    ++evaluations_;
    double v = -kInf;
    try {
      v = objective_(x);
    } catch (const Error&) {
      v = -kInf;
    }
    return std::isfinite(v) ? -v : kInf;
  }

  void clamp(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
  }

  double width(std::size_t i) const { return upper_[i] - lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }
  std::size_t dim() const { return lower_.size(); }
  std::size_t evaluations() const { return evaluations_; }

 private:
  const Objective& objective_;
  std::span<const double> lower_;
  std::span<const double> upper_;
  std::size_t evaluations_ = 0;
};

struct Point {
  std::vector<double> x;
  double f = kInf;
};

void nelder_mead_pass(Problem& prob, Point& best, std::size_t budget, double tol, double step_frac) {
  const std::size_t d = prob.dim();
  if (d == 0) return;
  std::vector<Point> simplex(d + 1);
  simplex[0] = best;
  for (std::size_t i = 0; i < d; ++i) {
    Point p{best.x, kInf};
    const double step = step_frac * prob.width(i);
    p.x[i] = best.x[i] + step <= prob.upper(i) ? best.x[i] + step : best.x[i] - step;
    prob.clamp(p.x);
    p.f = prob.cost(p.x);
    simplex[i + 1] = std::move(p);
  }

  auto spread_small = [&] {
    const double f0 = simplex.front().f;
    const double fw = simplex.back().f;
    if (!std::isfinite(fw)) return false;
    if (fw - f0 > tol * (1.0 + std::abs(f0))) return false;
    for (std::size_t i = 1; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        if (std::abs(simplex[i].x[k] - simplex[0].x[k]) > 1e-7 * prob.width(k)) return false;
      }
    }
    return true;
  };

  const std::size_t start_evals = prob.evaluations();
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  while (prob.evaluations() - start_evals < budget) {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
    if (spread_small()) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i].x[k];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    Point& worst = simplex.back();
    for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + (centroid[k] - worst.x[k]);
    prob.clamp(xr);
    const double fr = prob.cost(xr);

    if (fr < simplex.front().f) {
      for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - worst.x[k]);
      prob.clamp(xe);
      const double fe = prob.cost(xe);
      if (fe < fr) {
        worst = {xe, fe};
      } else {
        worst = {xr, fr};
      }
      continue;
    }
    if (fr < simplex[d - 1].f) {
      worst = {xr, fr};
      continue;
    }
    const bool outside = fr < worst.f;
    for (std::size_t k = 0; k < d; ++k) {
      xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k]) : centroid[k] + 0.5 * (worst.x[k] - centroid[k]);
    }
    prob.clamp(xc);
    const double fc = prob.cost(xc);
    if (fc < std::min(fr, worst.f)) {
      worst = {xc, fc};
      continue;
    }
    // shrink towards the best vertex
    for (std::size_t i = 1; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k) simplex[i].x[k] = simplex[0].x[k] + 0.5 * (simplex[i].x[k] - simplex[0].x[k]);
      simplex[i].f = prob.cost(simplex[i].x);
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
  if (simplex.front().f <= best.f) best = simplex.front();
}

void nelder_mead(Problem& prob, Point& best, std::size_t budget, double tol) {
  const std::size_t start = prob.evaluations();
  double step = 0.1;
  for (int pass = 0; pass < 4; ++pass) {
    const std::size_t used = prob.evaluations() - start;
    if (used >= budget) break;
    const double before = best.f;
    nelder_mead_pass(prob, best, budget - used, tol, step);
    if (pass > 0 && !(before - best.f > tol * (1.0 + std::abs(best.f)))) break;
    step *= 0.5;
  }
}

std::vector<double> gradient_of(Problem& prob, const std::vector<double>& x, double fx, std::span<const double> lower,
                                std::span<const double> upper, double h) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    const double hi = std::min(x[i] + step, upper[i]);
    const double lo = std::max(x[i] - step, lower[i]);
    xp[i] = hi;
    const double fh = hi > x[i] ? prob.cost(xp) : fx;
    xp[i] = lo;
    const double fl = lo < x[i] ? prob.cost(xp) : fx;
    xp[i] = x[i];
    g[i] = hi > lo ? (fh - fl) / (hi - lo) : 0.0;
    if (!std::isfinite(g[i])) g[i] = 0.0;
  }
  return g;
}

void quasi_newton(Problem& prob, Point& best, std::span<const double> lower, std::span<const double> upper,
                  std::size_t budget, double tol) {
  const std::size_t d = prob.dim();
  if (d == 0 || !std::isfinite(best.f)) return;
  const std::size_t start = prob.evaluations();
  std::vector<double> x = best.x;
  double f = best.f;
  std::vector<double> g = gradient_of(prob, x, f, lower, upper, 1e-6);
  std::vector<double> h(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;

  std::vector<double> p(d), xn(d), s(d), y(d);
  while (prob.evaluations() - start < budget) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc -= h[i * d + k] * g[k];
      p[i] = acc;
      if ((x[i] <= lower[i] && p[i] < 0.0) || (x[i] >= upper[i] && p[i] > 0.0)) p[i] = 0.0;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < d; ++i) slope += p[i] * g[i];
    if (!(slope < 0.0)) {
      // reset to steepest descent once before giving up
      bool reset = false;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) reset |= h[i * d + k] != (i == k ? 1.0 : 0.0);
      }
      if (!reset) break;
      std::fill(h.begin(), h.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;
      continue;
    }
    double t = 1.0;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 30 && prob.evaluations() - start < budget; ++ls) {
      for (std::size_t i = 0; i < d; ++i) xn[i] = std::clamp(x[i] + t * p[i], lower[i], upper[i]);
      fn = prob.cost(xn);
      double dec = 0.0;
      for (std::size_t i = 0; i < d; ++i) dec += g[i] * (xn[i] - x[i]);
      if (std::isfinite(fn) && fn <= f + 1e-4 * dec) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const std::vector<double> gn = gradient_of(prob, xn, fn, lower, upper, 1e-6);
    double sy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
    }
    const double improvement = f - fn;
    x = xn;
    g = gn;
    f = fn;
    if (improvement <= tol * (1.0 + std::abs(f))) break;
    if (sy > 1e-12) {
      // BFGS inverse-Hessian update
      std::vector<double> hy(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) hy[i] += h[i * d + k] * y[k];
      }
      double yhy = 0.0;
      for (std::size_t i = 0; i < d; ++i) yhy += y[i] * hy[i];
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          h[i * d + k] += rho * ((1.0 + rho * yhy) * s[i] * s[k] - (hy[i] * s[k] + s[i] * hy[k]));
        }
      }
    }
  }
  if (f <= best.f) best = {x, f};
}

}  // namespace

const char* to_string(OptMethod m) { return m == OptMethod::simplex ? "simplex" : "quasi_newton"; }

OptMethod opt_method_from_string(const std::string& name) {
  if (name == "simplex" || name == "nelder-mead") return OptMethod::simplex;
  if (name == "quasi_newton" || name == "quasi-newton" || name == "bfgs") return OptMethod::quasi_newton;
  throw UsageError("unknown optimizer method '" + name + "'");
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::span<const double> lower,
                                                 std::span<const double> upper, std::mt19937_64& rng) {
  const std::size_t d = lower.size();
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
      pts[i][k] = lower[k] + u * (upper[k] - lower[k]);
    }
  }
  return pts;
}

std::vector<double> fd_gradient(const Objective& objective, std::span<const double> theta,
                                std::span<const double> lower, std::span<const double> upper, double h) {
  Problem prob(objective, lower, upper);
  std::vector<double> x(theta.begin(), theta.end());
  const double fx = prob.cost(x);
  std::vector<double> g = gradient_of(prob, x, fx, lower, upper, h);
  for (double& v : g) v = -v;
  return g;
}

OptResult optimize(const Objective& objective, const OptControl& control) {
  const std::size_t d = control.lower.size();
  if (control.upper.size() != d) throw UsageError("bounds have different lengths");
  if (control.n_starts == 0) throw UsageError("n_starts must be at least 1");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(std::isfinite(control.lower[i]) && std::isfinite(control.upper[i]) && control.lower[i] <= control.upper[i])) {
      throw UsageError("bounds must be finite and ordered");
    }
  }

  std::mt19937_64 rng(control.seed);
  const auto initial = latin_hypercube(control.n_starts, control.lower, control.upper, rng);
  std::vector<StartRecord> records(control.n_starts);
  std::vector<Point> results(control.n_starts);

  auto run_start = [&](std::size_t s) {
    Problem prob(objective, control.lower, control.upper);
    std::mt19937_64 redraw(control.seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point p{initial[s], kInf};
    p.f = prob.cost(p.x);
    for (int attempt = 0; attempt < 10 && !std::isfinite(p.f); ++attempt) {
      for (std::size_t k = 0; k < d; ++k) p.x[k] = control.lower[k] + unit(redraw) * (control.upper[k] - control.lower[k]);
      p.f = prob.cost(p.x);
    }
    StartRecord& rec = records[s];
    rec.start = s;
    rec.initial = p.x;
    if (std::isfinite(p.f)) {
      const std::size_t budget = control.max_evals > prob.evaluations() ? control.max_evals - prob.evaluations() : 0;
      if (control.method == OptMethod::simplex) {
        nelder_mead(prob, p, budget, control.tol);
      } else {
        quasi_newton(prob, p, control.lower, control.upper, budget, control.tol);
      }
    }
    rec.theta = p.x;
    rec.value = std::isfinite(p.f) ? -p.f : -kInf;
    rec.evaluations = prob.evaluations();
    results[s] = std::move(p);
  };

  const std::size_t workers = std::min(std::max<std::size_t>(control.threads, 1), control.n_starts);
  if (workers <= 1) {
    for (std::size_t s = 0; s < control.n_starts; ++s) run_start(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < control.n_starts; s = next++) run_start(s);
      });
    }
    for (auto& t : pool) t.join();
  }

  OptResult out;
  out.value = -kInf;
  for (std::size_t s = 0; s < control.n_starts; ++s) {
    out.evaluations += records[s].evaluations;
    if (records[s].value > out.value) {
      out.value = records[s].value;
      out.theta = records[s].theta;
    }
  }
  out.trace = std::move(records);
  if (!std::isfinite(out.value)) {
    throw NumericalError("objective is not finite at any initial point", out.trace.empty() ? std::vector<double>{}
                                                                                            : out.trace.front().initial);
  }
  return out;
}

}  // namespace lfdgp

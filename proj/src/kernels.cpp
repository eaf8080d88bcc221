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

#include "lfdgp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lfdgp/error.hpp"
#include "lfdgp/simd/kernel_ops.hpp"

namespace lfdgp {

const char* to_string(Composition c) {
  switch (c) {
    case Composition::product: return "product";
    case Composition::sum: return "sum";
    case Composition::anova: return "anova";
  }
  return "unknown";
}

const char* to_string(RealFamily f) {
  switch (f) {
    case RealFamily::se: return "se";
    case RealFamily::matern52: return "matern52";
  }
  return "unknown";
}

Composition composition_from_string(const std::string& name) {
  if (name == "product") return Composition::product;
  if (name == "sum") return Composition::sum;
  if (name == "anova") return Composition::anova;
  throw SchemaError("unknown composition '" + name + "'");
}

RealFamily real_family_from_string(const std::string& name) {
  if (name == "se") return RealFamily::se;
  if (name == "matern52") return RealFamily::matern52;
  throw SchemaError("unknown real kernel family '" + name + "'");
}

double k_se(double tau, double lengthscale) {
  return std::exp(-(tau * tau) / (2.0 * lengthscale * lengthscale));
}

double k_matern52(double tau, double lengthscale) {
  const double r = std::sqrt(5.0) * std::abs(tau) / lengthscale;
  return (1.0 + r + r * r / 3.0) * std::exp(-r);
}

double k_real(RealFamily family, double tau, double lengthscale) {
  return family == RealFamily::se ? k_se(tau, lengthscale) : k_matern52(tau, lengthscale);
}

double cosine_warp(std::int64_t s, std::int64_t lo, std::int64_t hi, double beta) {
  return beta * static_cast<double>(s - lo) / static_cast<double>(hi - lo + 1);
}

double k_int_cosine(std::int64_t s, std::int64_t s2, std::int64_t lo, std::int64_t hi, double beta) {
  if (!(beta > 0.0 && beta <= std::numbers::pi)) {
    throw InfeasibleParameterError("cosine kernel beta " + std::to_string(beta) + " outside (0, pi]");
  }
  return std::cos(cosine_warp(s, lo, hi, beta) - cosine_warp(s2, lo, hi, beta));
}

double unit_warp(std::int64_t s, std::int64_t lo, std::int64_t hi) {
  if (hi == lo) return 0.0;
  return static_cast<double>(s - lo) / static_cast<double>(hi - lo);
}

double cs_lower_bound(std::size_t levels) {
  if (levels <= 1) return -std::numeric_limits<double>::infinity();
  return -1.0 / static_cast<double>(levels - 1);
}

double k_cat_cs(std::size_t u, std::size_t u2, std::size_t levels, double c) {
  if (!(c > cs_lower_bound(levels) && c < 1.0)) {
    std::ostringstream os;
    os << "compound symmetry covariance " << c << " outside (" << cs_lower_bound(levels) << ", 1) for " << levels
       << " levels";
    throw InfeasibleParameterError(os.str());
  }
  return u == u2 ? 1.0 : c;
}

Eigen::MatrixXd grouped_cs_matrix(const GroupedCsParams& p) {
  const auto L = static_cast<Eigen::Index>(p.levels());
  Eigen::MatrixXd k(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      k(i, j) = i == j ? 1.0 : p.c(p.group_of[static_cast<std::size_t>(i)], p.group_of[static_cast<std::size_t>(j)]);
    }
  }
  return k;
}

void check_grouped_cs(const GroupedCsParams& p) {
  const auto G = static_cast<int>(p.groups());
  if (p.c.rows() != p.c.cols()) throw InfeasibleParameterError("grouped covariance matrix must be square");
  for (int g : p.group_of) {
    if (g < 0 || g >= G) throw InfeasibleParameterError("category group id out of range");
  }
  if (!p.c.isApprox(p.c.transpose(), 0.0)) throw InfeasibleParameterError("grouped covariance matrix not symmetric");

  constexpr double tol = -1e-8;
  Eigen::MatrixXd block_avg(G, G);
  for (int g = 0; g < G; ++g) {
    Eigen::Index size = 0;
    for (int id : p.group_of) size += id == g ? 1 : 0;
    if (size == 0) throw InfeasibleParameterError("group " + std::to_string(g) + " has no categories");
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(size, size, p.c(g, g));
    w.diagonal().setOnes();
    if (min_eigenvalue(w) < tol) {
      throw InfeasibleParameterError("within-group block W_" + std::to_string(g) + " is not positive semidefinite");
    }
    const double avg = w.mean();
    if (min_eigenvalue(w - Eigen::MatrixXd::Constant(size, size, avg)) < tol) {
      throw InfeasibleParameterError("block W_" + std::to_string(g) + " minus its average is not positive semidefinite");
    }
    block_avg(g, g) = avg;
    for (int h = 0; h < G; ++h) {
      if (h != g) block_avg(g, h) = p.c(g, h);
    }
  }
  if (min_eigenvalue(block_avg) < tol) {
    throw InfeasibleParameterError("between-group block averages are not positive semidefinite");
  }
}

double k_cat_grouped(std::size_t u, std::size_t u2, const GroupedCsParams& p) {
  if (u == u2) return 1.0;
  return p.c(p.group_of.at(u), p.group_of.at(u2));
}

std::string component_kind(const Component& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealComponent>) {
          return to_string(v.family);
        } else if constexpr (std::is_same_v<T, IntegerComponent>) {
          return v.mode == IntegerComponent::Mode::cosine ? "cosine" : std::string("warped_") + to_string(v.family);
        } else if constexpr (std::is_same_v<T, CsComponent>) {
          return "cs";
        } else {
          return "grouped_cs";
        }
      },
      c);
}

void KernelSpec::validate(const TaskSchema& schema) const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw InfeasibleParameterError("amplitude must be positive");
  if (components.size() != schema.size()) {
    throw SchemaError("kernel has " + std::to_string(components.size()) + " components, schema has " +
                      std::to_string(schema.size()) + " dims");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const DimSpec& d = schema.dim(i);
    const Component& c = components[i];
    const std::string where = "dim '" + d.name + "': ";
    switch (d.kind) {
      case DimKind::real: {
        const auto* rc = std::get_if<RealComponent>(&c);
        if (!rc) throw SchemaError(where + "real dims need an se or matern52 component");
        if (!(rc->lengthscale > 0.0)) throw InfeasibleParameterError(where + "lengthscale must be positive");
        break;
      }
      case DimKind::integer: {
        const auto* ic = std::get_if<IntegerComponent>(&c);
        if (!ic) throw SchemaError(where + "integer dims need a cosine or warped component");
        if (ic->lo != d.int_lo || ic->hi != d.int_hi) throw SchemaError(where + "component range differs from schema");
        if (ic->mode == IntegerComponent::Mode::cosine) {
          if (!(ic->beta > 0.0 && ic->beta <= std::numbers::pi)) {
            throw InfeasibleParameterError(where + "beta outside (0, pi]");
          }
        } else if (!(ic->lengthscale > 0.0)) {
          throw InfeasibleParameterError(where + "lengthscale must be positive");
        }
        break;
      }
      case DimKind::categorical: {
        if (const auto* cs = std::get_if<CsComponent>(&c)) {
          if (cs->levels != d.level_count()) throw SchemaError(where + "level count differs from schema");
          if (!(cs->c > cs_lower_bound(cs->levels) && cs->c < 1.0)) {
            throw InfeasibleParameterError(where + "compound symmetry covariance outside the feasible interval");
          }
        } else if (const auto* gc = std::get_if<GroupedCsComponent>(&c)) {
          if (gc->params.levels() != d.level_count()) throw SchemaError(where + "level count differs from schema");
          check_grouped_cs(gc->params);
        } else {
          throw SchemaError(where + "categorical dims need a cs or grouped_cs component");
        }
        break;
      }
    }
  }
}

double KernelSpec::prior_variance() const {
  const auto d = static_cast<double>(components.size());
  switch (composition) {
    case Composition::product: return amplitude;
    case Composition::sum: return amplitude * d;
    case Composition::anova: return amplitude * std::pow(2.0, d);
  }
  return amplitude;
}

KernelSpec default_kernel(const TaskSchema& schema, const KernelChoice& choice) {
  KernelSpec spec;
  spec.composition = choice.composition;
  spec.amplitude = 1.0;
  for (const auto& d : schema.dims()) {
    switch (d.kind) {
      case DimKind::real: {
        const double range = d.real_hi - d.real_lo;
        spec.components.emplace_back(RealComponent{choice.real, range > 0.0 ? 0.25 * range : 1.0});
        break;
      }
      case DimKind::integer: {
        IntegerComponent ic;
        ic.mode = choice.integer_mode;
        ic.family = choice.integer_family;
        ic.beta = std::numbers::pi / 2.0;
        ic.lengthscale = 0.5;
        ic.lo = d.int_lo;
        ic.hi = d.int_hi;
        spec.components.emplace_back(ic);
        break;
      }
      case DimKind::categorical: {
        if (choice.grouped_categories) {
          GroupedCsParams p;
          p.group_of = d.group_ids();
          p.c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.group_count()),
                                      static_cast<Eigen::Index>(d.group_count()));
          spec.components.emplace_back(GroupedCsComponent{std::move(p)});
        } else {
          spec.components.emplace_back(CsComponent{d.level_count(), 0.0});
        }
        break;
      }
    }
  }
  return spec;
}

namespace {

double component_value(const Component& comp, double a, double b) {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, RealComponent>) {
          return k_real(c.family, std::abs(a - b), c.lengthscale);
        } else if constexpr (std::is_same_v<T, IntegerComponent>) {
          const auto s = static_cast<std::int64_t>(a);
          const auto s2 = static_cast<std::int64_t>(b);
          if (c.mode == IntegerComponent::Mode::cosine) return k_int_cosine(s, s2, c.lo, c.hi, c.beta);
          return k_real(c.family, std::abs(unit_warp(s, c.lo, c.hi) - unit_warp(s2, c.lo, c.hi)), c.lengthscale);
        } else if constexpr (std::is_same_v<T, CsComponent>) {
          return k_cat_cs(static_cast<std::size_t>(a), static_cast<std::size_t>(b), c.levels, c.c);
        } else {
          return k_cat_grouped(static_cast<std::size_t>(a), static_cast<std::size_t>(b), c.params);
        }
      },
      comp);
}

// A component ready for row-wise evaluation: either a stationary real kernel
// over a (possibly warped) coordinate, or a lookup table over discrete levels.
struct Prepared {
  bool is_table = false;
  RealFamily family = RealFamily::se;
  double inv_l = 1.0;
  Eigen::MatrixXd table;
  std::int64_t offset = 0;
  bool warp_unit = false;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  double coordinate(double v) const {
    if (warp_unit) return unit_warp(static_cast<std::int64_t>(v), lo, hi);
    return v;
  }
  Eigen::Index index(double v) const { return static_cast<Eigen::Index>(static_cast<std::int64_t>(v) - offset); }
};

Prepared prepare(const Component& comp) {
  Prepared p;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, RealComponent>) {
          p.family = c.family;
          p.inv_l = 1.0 / c.lengthscale;
        } else if constexpr (std::is_same_v<T, IntegerComponent>) {
          if (c.mode == IntegerComponent::Mode::warped_real) {
            p.family = c.family;
            p.inv_l = 1.0 / c.lengthscale;
            p.warp_unit = true;
            p.lo = c.lo;
            p.hi = c.hi;
          } else {
            const auto L = static_cast<Eigen::Index>(c.hi - c.lo + 1);
            p.is_table = true;
            p.offset = c.lo;
            p.table.resize(L, L);
            for (Eigen::Index i = 0; i < L; ++i) {
              for (Eigen::Index j = 0; j < L; ++j) p.table(i, j) = k_int_cosine(c.lo + i, c.lo + j, c.lo, c.hi, c.beta);
            }
          }
        } else if constexpr (std::is_same_v<T, CsComponent>) {
          const auto L = static_cast<Eigen::Index>(c.levels);
          p.is_table = true;
          p.table.resize(L, L);
          for (Eigen::Index i = 0; i < L; ++i) {
            for (Eigen::Index j = 0; j < L; ++j) {
              p.table(i, j) = k_cat_cs(static_cast<std::size_t>(i), static_cast<std::size_t>(j), c.levels, c.c);
            }
          }
        } else {
          p.is_table = true;
          p.table = grouped_cs_matrix(c.params);
        }
      },
      comp);
  return p;
}

// Evaluates column `col` of K(a, b) restricted to rows [row0, a.rows()).
class GramAssembler {
 public:
  GramAssembler(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
      : spec_(spec), ops_(simd::active_ops()) {
    const auto d = static_cast<Eigen::Index>(spec.components.size());
    if (a.cols() != d || b.cols() != d) throw SchemaError("encoded points do not match kernel dimension");
    prepared_.reserve(spec.components.size());
    a_coord_.resize(a.rows(), d);
    b_coord_.resize(b.rows(), d);
    for (Eigen::Index k = 0; k < d; ++k) {
      prepared_.push_back(prepare(spec.components[static_cast<std::size_t>(k)]));
      const Prepared& p = prepared_.back();
      for (Eigen::Index i = 0; i < a.rows(); ++i) a_coord_(i, k) = p.is_table ? a(i, k) : p.coordinate(a(i, k));
      for (Eigen::Index i = 0; i < b.rows(); ++i) b_coord_(i, k) = p.is_table ? b(i, k) : p.coordinate(b(i, k));
    }
    buffer_.resize(static_cast<std::size_t>(a.rows()));
  }

  void column(Eigen::Index col, Eigen::Index row0, double* out) {
    const auto n = static_cast<std::size_t>(a_coord_.rows() - row0);
    if (n == 0) return;
    const std::size_t d = prepared_.size();
    if (spec_.composition == Composition::anova) std::fill(out, out + n, 1.0);
    for (std::size_t k = 0; k < d; ++k) {
      double* target = (k == 0 && spec_.composition != Composition::anova) ? out : buffer_.data();
      evaluate(k, col, row0, target, n);
      if (target == out) continue;
      switch (spec_.composition) {
        case Composition::product: ops_.mul_inplace(out, target, n); break;
        case Composition::sum: ops_.add_inplace(out, target, n); break;
        case Composition::anova: ops_.anova_inplace(out, target, n); break;
      }
    }
    for (std::size_t j = 0; j < n; ++j) out[j] *= spec_.amplitude;
  }

 private:
  void evaluate(std::size_t k, Eigen::Index col, Eigen::Index row0, double* out, std::size_t n) const {
    const Prepared& p = prepared_[k];
    const auto kk = static_cast<Eigen::Index>(k);
    const double bval = b_coord_(col, kk);
    const double* acol = a_coord_.col(kk).data() + row0;
    if (p.is_table) {
      const Eigen::Index bi = p.index(bval);
      for (std::size_t j = 0; j < n; ++j) out[j] = p.table(p.index(acol[j]), bi);
      return;
    }
    if (p.family == RealFamily::se) {
      ops_.se_row(acol, bval, p.inv_l, out, n);
    } else {
      ops_.matern52_row(acol, bval, p.inv_l, out, n);
    }
  }

  const KernelSpec& spec_;
  const simd::KernelOps& ops_;
  std::vector<Prepared> prepared_;
  Eigen::MatrixXd a_coord_;
  Eigen::MatrixXd b_coord_;
  std::vector<double> buffer_;
};

}  // namespace

double compose(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2) {
  if (x.size() != spec.components.size() || x2.size() != spec.components.size()) {
    throw SchemaError("encoded points do not match kernel dimension");
  }
  double acc = spec.composition == Composition::sum ? 0.0 : 1.0;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    const double v = component_value(spec.components[k], x[k], x2[k]);
    switch (spec.composition) {
      case Composition::product: acc *= v; break;
      case Composition::sum: acc += v; break;
      case Composition::anova: acc *= 1.0 + v; break;
    }
  }
  return spec.amplitude * acc;
}

double compose(const KernelSpec& spec, const TaskSchema& schema, const TaskPoint& x, const TaskPoint& x2) {
  const TaskPoint pts[2] = {x, x2};
  const Eigen::MatrixXd e = encode(schema, pts);
  const Eigen::VectorXd r0 = e.row(0).transpose();
  const Eigen::VectorXd r1 = e.row(1).transpose();
  return compose(spec, std::span<const double>(r0.data(), static_cast<std::size_t>(r0.size())),
                 std::span<const double>(r1.data(), static_cast<std::size_t>(r1.size())));
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  GramAssembler assembler(spec, a, b);
  for (Eigen::Index i = 0; i < b.rows(); ++i) assembler.column(i, 0, k.col(i).data());
  return k;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x, double jitter) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  GramAssembler assembler(spec, x, x);
  for (Eigen::Index i = 0; i < n; ++i) assembler.column(i, i, k.col(i).data() + i);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) k(i, j) = k(j, i);
  }
  if (jitter != 0.0) k.diagonal().array() += jitter * spec.amplitude;
  return k;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace lfdgp

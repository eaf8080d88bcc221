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

#include "lfdgp/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "lfdgp/error.hpp"

namespace lfdgp {
namespace {

constexpr double kLogitBound = 8.0;
constexpr double kCpcBound = 4.0;

std::vector<std::size_t> group_sizes(const GroupedCsParams& p) {
  std::vector<std::size_t> sizes(p.groups(), 0);
  for (int g : p.group_of) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

}  // namespace

bool HyperParams::within_bounds() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= lower[i] && values[i] <= upper[i])) return false;
  }
  return true;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

ScaleHints scale_hints(const TaskSchema& schema, const Eigen::MatrixXd& encoded, double output_variance) {
  ScaleHints h;
  h.output_variance = output_variance;
  h.dim_range.assign(schema.size(), 1.0);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.dim(i).kind != DimKind::real || encoded.rows() == 0) continue;
    const auto col = encoded.col(static_cast<Eigen::Index>(i));
    const double range = col.maxCoeff() - col.minCoeff();
    h.dim_range[i] = range > 0.0 ? range : 1.0;
  }
  return h;
}

Eigen::MatrixXd correlation_from_cpc(std::size_t dim, std::span<const double> cpc) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return l;
  l(0, 0) = 1.0;
  std::size_t k = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    double used = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      l(i, j) = cpc[k++] * std::sqrt(std::max(0.0, 1.0 - used));
      used += l(i, j) * l(i, j);
    }
    l(i, i) = std::sqrt(std::max(0.0, 1.0 - used));
  }
  Eigen::MatrixXd corr = l * l.transpose();
  corr.diagonal().setOnes();
  return corr;
}

std::vector<double> cpc_from_correlation(const Eigen::MatrixXd& corr) {
  const Eigen::Index n = corr.rows();
  std::vector<double> cpc;
  if (n <= 1) return cpc;
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) throw InfeasibleParameterError("between-group correlation matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 1; i < n; ++i) {
    double used = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double denom = std::sqrt(std::max(1e-300, 1.0 - used));
      cpc.push_back(std::clamp(l(i, j) / denom, -1.0, 1.0));
      used += l(i, j) * l(i, j);
    }
  }
  return cpc;
}

KernelParamCodec::KernelParamCodec(KernelSpec templ, const TaskSchema& schema, const ScaleHints& hints)
    : templ_(std::move(templ)) {
  if (templ_.components.size() != schema.size()) throw SchemaError("kernel template does not match schema");
  const double var = hints.output_variance > 0.0 ? hints.output_variance : 1.0;
  names_.push_back("log_amplitude");
  lower_.push_back(std::log(1e-3 * var));
  upper_.push_back(std::log(1e3 * var));

  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::string& dim = schema.dim(i).name;
    const double range = i < hints.dim_range.size() ? hints.dim_range[i] : 1.0;
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, RealComponent>) {
            names_.push_back(dim + ".log_lengthscale");
            lower_.push_back(std::log(1e-2 * range));
            upper_.push_back(std::log(1e1 * range));
          } else if constexpr (std::is_same_v<T, IntegerComponent>) {
            if (c.mode == IntegerComponent::Mode::cosine) {
              names_.push_back(dim + ".beta_logit");
              lower_.push_back(-kLogitBound);
              upper_.push_back(kLogitBound);
            } else {
              names_.push_back(dim + ".log_lengthscale");
              lower_.push_back(std::log(1e-2));
              upper_.push_back(std::log(1e1));
            }
          } else if constexpr (std::is_same_v<T, CsComponent>) {
            if (c.levels > 1) {
              names_.push_back(dim + ".c_logit");
              lower_.push_back(-kLogitBound);
              upper_.push_back(kLogitBound);
            }
          } else {
            const auto sizes = group_sizes(c.params);
            for (std::size_t g = 0; g < sizes.size(); ++g) {
              if (sizes[g] < 2) continue;
              names_.push_back(dim + ".within" + std::to_string(g) + "_logit");
              lower_.push_back(-kLogitBound);
              upper_.push_back(kLogitBound);
            }
            for (std::size_t g = 1; g < sizes.size(); ++g) {
              for (std::size_t h = 0; h < g; ++h) {
                names_.push_back(dim + ".between" + std::to_string(g) + "_" + std::to_string(h) + "_atanh");
                lower_.push_back(-kCpcBound);
                upper_.push_back(kCpcBound);
              }
            }
          }
        },
        templ_.components[i]);
  }
}

KernelSpec KernelParamCodec::decode(std::span<const double> theta) const {
  if (theta.size() != size()) throw SchemaError("parameter vector has the wrong length");
  KernelSpec spec = templ_;
  std::size_t k = 0;
  spec.amplitude = std::exp(theta[k++]);
  for (auto& comp : spec.components) {
    std::visit(
        [&](auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, RealComponent>) {
            c.lengthscale = std::exp(theta[k++]);
          } else if constexpr (std::is_same_v<T, IntegerComponent>) {
            if (c.mode == IntegerComponent::Mode::cosine) {
              c.beta = std::numbers::pi * logistic(theta[k++]);
            } else {
              c.lengthscale = std::exp(theta[k++]);
            }
          } else if constexpr (std::is_same_v<T, CsComponent>) {
            if (c.levels > 1) {
              const double lo = cs_lower_bound(c.levels);
              c.c = lo + (1.0 - lo) * logistic(theta[k++]);
            }
          } else {
            GroupedCsParams& p = c.params;
            const auto sizes = group_sizes(p);
            const std::size_t G = sizes.size();
            std::vector<double> avg(G, 1.0);
            for (std::size_t g = 0; g < G; ++g) {
              double w = 0.0;
              if (sizes[g] >= 2) {
                const double lo = -1.0 / static_cast<double>(sizes[g] - 1);
                w = lo + (1.0 - lo) * logistic(theta[k++]);
              }
              p.c(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g)) = w;
              avg[g] = (1.0 + static_cast<double>(sizes[g] - 1) * w) / static_cast<double>(sizes[g]);
            }
            std::vector<double> cpc;
            for (std::size_t t = 0; t < G * (G - 1) / 2; ++t) cpc.push_back(std::tanh(theta[k++]));
            const Eigen::MatrixXd corr = correlation_from_cpc(G, cpc);
            for (std::size_t g = 0; g < G; ++g) {
              for (std::size_t h = 0; h < G; ++h) {
                if (g == h) continue;
                p.c(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) =
                    corr(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) * std::sqrt(avg[g] * avg[h]);
              }
            }
          }
        },
        comp);
  }
  return spec;
}

std::vector<double> KernelParamCodec::encode(const KernelSpec& spec) const {
  std::vector<double> theta;
  theta.reserve(size());
  theta.push_back(std::log(spec.amplitude));
  for (const auto& comp : spec.components) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, RealComponent>) {
            theta.push_back(std::log(c.lengthscale));
          } else if constexpr (std::is_same_v<T, IntegerComponent>) {
            if (c.mode == IntegerComponent::Mode::cosine) {
              theta.push_back(logit(std::clamp(c.beta / std::numbers::pi, 1e-12, 1.0 - 1e-12)));
            } else {
              theta.push_back(std::log(c.lengthscale));
            }
          } else if constexpr (std::is_same_v<T, CsComponent>) {
            if (c.levels > 1) {
              const double lo = cs_lower_bound(c.levels);
              theta.push_back(logit(std::clamp((c.c - lo) / (1.0 - lo), 1e-12, 1.0 - 1e-12)));
            }
          } else {
            const GroupedCsParams& p = c.params;
            const auto sizes = group_sizes(p);
            const std::size_t G = sizes.size();
            std::vector<double> avg(G, 1.0);
            for (std::size_t g = 0; g < G; ++g) {
              const double w = p.c(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
              if (sizes[g] >= 2) {
                const double lo = -1.0 / static_cast<double>(sizes[g] - 1);
                theta.push_back(logit(std::clamp((w - lo) / (1.0 - lo), 1e-12, 1.0 - 1e-12)));
                avg[g] = (1.0 + static_cast<double>(sizes[g] - 1) * w) / static_cast<double>(sizes[g]);
              }
            }
            Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(G));
            for (std::size_t g = 0; g < G; ++g) {
              for (std::size_t h = 0; h < G; ++h) {
                if (g != h) {
                  corr(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) =
                      p.c(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) / std::sqrt(avg[g] * avg[h]);
                }
              }
            }
            for (double z : cpc_from_correlation(corr)) theta.push_back(std::atanh(std::clamp(z, -0.999999, 0.999999)));
          }
        },
        comp);
  }
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], lower_[i], upper_[i]);
  return theta;
}

}  // namespace lfdgp

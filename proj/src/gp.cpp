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

#include "lfdgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "lfdgp/error.hpp"

namespace lfdgp {

namespace {

constexpr double kMaxJitterRel = 1e-4;

double column_range(const Eigen::VectorXd& v) { return v.size() ? v.maxCoeff() - v.minCoeff() : 0.0; }

// Factorization of one output's system; noise is given at the system's rows.
std::shared_ptr<const FactoredSystem> factor_system(const KernelSpec& spec, const OutputStats& st,
                                                    const RawOutput* raw, const Eigen::VectorXd& noise,
                                                    double mean, double jitter) {
  const double j = jitter * spec.amplitude;
  const double jmax = std::max(j, kMaxJitterRel * spec.amplitude);
  if (raw) {
    return std::make_shared<const FactoredSystem>(gram(spec, raw->encoded), noise, raw->y, mean, j, jmax);
  }
  CompressedSystem sys;
  sys.k_n = gram(spec, st.encoded);
  sys.noise = noise;
  sys.counts = st.counts;
  sys.ybar = st.ybar;
  sys.sq_dev = st.sq_dev;
  sys.mean = mean;
  sys.jitter = j;
  sys.max_jitter = jmax;
  return std::make_shared<const FactoredSystem>(sys);
}

struct StageResult {
  KernelSpec spec;
  double lambda = 0.0;  // constant noise stage only
  HyperParams hyper;
  OptResult opt;
};

// ML fit of the kernel parameters, plus a constant noise level when `fixed_noise` is null.
// `fixed_noise` is given at the system rows (unique points, or raw samples on the dense path).
StageResult fit_stage(const TaskSchema& schema, const OutputStats& st, const RawOutput* raw, double mean,
                      const KernelSpec& templ, const Eigen::VectorXd* fixed_noise, const FitControl& control) {
  const double var = std::max(st.total_variance(), std::numeric_limits<double>::min());
  const KernelParamCodec codec(templ, schema, scale_hints(schema, st.encoded, var));
  const std::size_t nk = codec.size();
  const bool learn_noise = fixed_noise == nullptr;
  const Eigen::Index rows = raw ? raw->y.size() : static_cast<Eigen::Index>(st.size());

  OptControl opt = control.opt;
  opt.lower = codec.lower();
  opt.upper = codec.upper();
  if (learn_noise) {
    opt.lower.push_back(std::log(1e-8 * var));
    opt.upper.push_back(std::log(var));
  }

  const Objective objective = [&](std::span<const double> theta) {
    const KernelSpec spec = codec.decode(theta.first(nk));
    const Eigen::VectorXd noise = learn_noise ? Eigen::VectorXd::Constant(rows, std::exp(theta[nk])) : *fixed_noise;
    try {
      return factor_system(spec, st, raw, noise, mean, control.jitter)->log_likelihood();
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), std::vector<double>(theta.begin(), theta.end()));
    }
  };

  StageResult out;
  out.opt = optimize(objective, opt);
  out.spec = codec.decode(std::span<const double>(out.opt.theta).first(nk));
  out.hyper.names = codec.names();
  out.hyper.values = out.opt.theta;
  out.hyper.lower = opt.lower;
  out.hyper.upper = opt.upper;
  if (learn_noise) {
    out.lambda = std::exp(out.opt.theta[nk]);
    out.hyper.names.push_back("log_noise");
  }
  return out;
}

double prior_mean(const OutputStats& st, MeanMode mode) {
  return mode == MeanMode::constant ? st.global_mean() : 0.0;
}

std::shared_ptr<const RawOutput> raw_output(const TrainingSet& data, std::size_t output) {
  if (!data.raw) throw UsageError("dense fitting requires the raw samples");
  auto raw = std::make_shared<RawOutput>();
  raw->encoded = encode(*data.schema, data.raw->points);
  raw->y = data.raw->outputs.col(static_cast<Eigen::Index>(output));
  return raw;
}

void check_output(const TrainingSet& data, std::size_t output) {
  if (!data.schema) throw UsageError("training set has no schema");
  if (output >= data.compressed.output_dim()) {
    std::ostringstream os;
    os << "output index " << output << " out of range (" << data.compressed.output_dim() << " outputs)";
    throw UsageError(os.str());
  }
  if (data.compressed.size() == 0) throw DataError("training set is empty");
}

}  // namespace

double OutputStats::global_mean() const {
  return total_count ? counts.dot(ybar) / static_cast<double>(total_count) : 0.0;
}

double OutputStats::total_variance() const {
  if (total_count == 0) return 0.0;
  const double m = global_mean();
  const double between = (counts.array() * (ybar.array() - m).square()).sum();
  return (sq_dev.sum() + between) / static_cast<double>(total_count);
}

OutputStats output_stats(const TaskSchema& schema, const CompressedDataset& data, std::size_t output) {
  if (output >= data.output_dim()) throw UsageError("output index out of range");
  OutputStats st;
  st.points = data.unique_points;
  st.encoded = encode(schema, st.points);
  const auto n = static_cast<Eigen::Index>(data.size());
  st.counts.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) st.counts(i) = static_cast<double>(data.counts[static_cast<std::size_t>(i)]);
  st.ybar = data.means.col(static_cast<Eigen::Index>(output));
  st.sq_dev = data.sq_dev.col(static_cast<Eigen::Index>(output));
  st.total_count = data.total_count;
  return st;
}

NoiseModel NoiseModel::constant(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InfeasibleParameterError("constant noise must be positive");
  NoiseModel m;
  m.lambda = lambda;
  return m;
}

NoiseModel NoiseModel::from_latent(std::shared_ptr<const GPModel> latent) {
  if (!latent) throw UsageError("latent noise model is null");
  NoiseModel m;
  m.mode = Mode::latent;
  m.latent = std::move(latent);
  return m;
}

Eigen::VectorXd NoiseModel::at(const Eigen::MatrixXd& encoded) const {
  if (mode == Mode::constant) return Eigen::VectorXd::Constant(encoded.rows(), lambda);
  const GaussianPrediction z = latent->predict_encoded(encoded, false);
  return z.mean.array().exp().max(std::numeric_limits<double>::min());
}

void PredictiveDistribution::clamp_variances() {
  for (auto& o : outputs) {
    o.variance = o.variance.cwiseMax(0.0);
    if (o.cov.size()) o.cov.diagonal() = o.cov.diagonal().cwiseMax(0.0);
  }
}

GPModel::GPModel(std::shared_ptr<const TaskSchema> schema, KernelSpec kernel, NoiseModel noise,
                 std::shared_ptr<const OutputStats> train, double mean, double jitter,
                 std::shared_ptr<const RawOutput> dense)
    : schema_(std::move(schema)),
      kernel_(std::move(kernel)),
      noise_(std::move(noise)),
      train_(std::move(train)),
      dense_(std::move(dense)),
      mean_(mean),
      jitter_(jitter),
      predict_calls_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!schema_ || !train_) throw UsageError("model needs a schema and training statistics");
  kernel_.validate(*schema_);
  train_noise_ = noise_.at(dense_ ? dense_->encoded : train_->encoded);
  factor_ = factor_system(kernel_, *train_, dense_.get(), train_noise_, mean_, jitter_);
}

GaussianPrediction GPModel::predict_encoded(const Eigen::MatrixXd& query, bool full_cov) const {
  predict_calls_->fetch_add(1);
  const Eigen::MatrixXd& x = dense_ ? dense_->encoded : train_->encoded;
  const Eigen::MatrixXd k_star = cross_gram(kernel_, x, query);
  const Eigen::MatrixXd k_ss =
      full_cov ? gram(kernel_, query) : Eigen::MatrixXd::Constant(query.rows(), 1, kernel_.prior_variance());
  return factor_->predict(k_star, k_ss, noise_.at(query), full_cov);
}

PredictiveDistribution GPModel::predict(std::span<const TaskPoint> query, bool full_cov) const {
  for (const auto& p : query) {
    const auto v = validate_point(*schema_, p);
    if (!v.empty()) throw DataError("query point outside the schema: " + v.front().message);
  }
  PredictiveDistribution out;
  out.query.assign(query.begin(), query.end());
  out.outputs.push_back(predict_encoded(encode(*schema_, query), full_cov));
  return out;
}

double log_marginal_likelihood(const GPModel& model) { return model.log_marginal_likelihood(); }

const char* to_string(NoiseMode m) { return m == NoiseMode::constant ? "constant" : "heteroscedastic"; }

NoiseMode noise_mode_from_string(const std::string& name) {
  if (name == "constant") return NoiseMode::constant;
  if (name == "heteroscedastic" || name == "hetero") return NoiseMode::heteroscedastic;
  throw UsageError("unknown noise mode '" + name + "'");
}

TrainingSet TrainingSet::from_samples(const TaskSchema& schema, std::vector<std::string> output_names,
                                      FlatSamples samples, bool keep_raw) {
  TrainingSet t;
  t.schema = std::make_shared<const TaskSchema>(schema);
  t.output_names = std::move(output_names);
  t.compressed = build_compressed(samples.points, samples.outputs);
  if (t.output_names.size() != t.compressed.output_dim()) {
    throw SchemaError("output names do not match the output dimension");
  }
  if (keep_raw) t.raw = std::move(samples);
  return t;
}

TrainingSet TrainingSet::from_demonstrations(const DemonstrationSet& set, bool keep_raw) {
  set.validate();
  return from_samples(set.schema, set.output_names, flatten(set), keep_raw);
}

GPModel fit_constant_noise(const TrainingSet& data, std::size_t output, const KernelSpec& templ,
                           const FitControl& control) {
  FitControl c = control;
  c.noise = NoiseMode::constant;
  return fit_heteroscedastic(data, output, templ, c);
}

GPModel fit_heteroscedastic(const TrainingSet& data, std::size_t output, const KernelSpec& templ,
                            const FitControl& control) {
  check_output(data, output);
  const TaskSchema& schema = *data.schema;
  templ.validate(schema);
  auto st = std::make_shared<const OutputStats>(output_stats(schema, data.compressed, output));
  const double var = st->total_variance();
  if (!(var > 0.0)) throw DegenerateError("output has zero variance; nothing to fit");

  const std::shared_ptr<const RawOutput> raw = control.compressed ? nullptr : raw_output(data, output);
  const double mean = prior_mean(*st, control.mean);

  FitDiagnostics diag;
  StageResult s0 = fit_stage(schema, *st, raw.get(), mean, templ, nullptr, control);
  GPModel best(data.schema, s0.spec, NoiseModel::constant(s0.lambda), st, mean, control.jitter, raw);
  best.set_hyper(s0.hyper);
  diag.evaluations += s0.opt.evaluations;
  diag.trace = s0.opt.trace;
  diag.history.push_back(best.log_marginal_likelihood());

  const std::size_t iters = control.noise == NoiseMode::heteroscedastic ? control.max_iter : 0;
  if (iters > 0) {
    double range = column_range(st->ybar);
    if (!(range > 0.0)) range = std::sqrt(var);
    const double eps = 1e-10 * range * range;

    GPModel current = best;
    double prev = diag.history.back();
    for (std::size_t it = 1; it <= iters; ++it) {
      // Empirical log-variance targets at the unique locations.
      const GaussianPrediction fitted = current.predict_encoded(st->encoded, false);
      auto zs = std::make_shared<OutputStats>();
      zs->points = st->points;
      zs->encoded = st->encoded;
      zs->counts = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(st->size()));
      zs->sq_dev = Eigen::VectorXd::Zero(zs->counts.size());
      zs->ybar.resize(zs->counts.size());
      zs->total_count = st->size();
      for (Eigen::Index i = 0; i < zs->ybar.size(); ++i) {
        const double a = st->counts(i);
        const double v = a >= 2.0 ? st->sq_dev(i) / (a - 1.0) : std::pow(st->ybar(i) - fitted.mean(i), 2);
        zs->ybar(i) = std::log(std::max(v, eps));
      }
      if (!(zs->total_variance() > 0.0)) {
        // Flat targets: the latent surface is the constant itself.
        zs->ybar(0) += 1e-9;
      }

      const double zmean = zs->global_mean();
      FitControl lc = control;
      lc.compressed = true;
      StageResult ls = fit_stage(schema, *zs, nullptr, zmean, templ, nullptr, lc);
      auto latent = std::make_shared<GPModel>(data.schema, ls.spec, NoiseModel::constant(ls.lambda), zs, zmean,
                                              control.jitter);
      latent->set_hyper(ls.hyper);
      const NoiseModel nm = NoiseModel::from_latent(latent);

      const Eigen::VectorXd fixed = nm.at(raw ? raw->encoded : st->encoded);
      StageResult ms = fit_stage(schema, *st, raw.get(), mean, templ, &fixed, control);
      GPModel model(data.schema, ms.spec, nm, st, mean, control.jitter, raw);
      model.set_hyper(ms.hyper);
      diag.evaluations += ls.opt.evaluations + ms.opt.evaluations;
      diag.iterations = it;

      const double ll = model.log_marginal_likelihood();
      diag.history.push_back(ll);
      if (ll > best.log_marginal_likelihood()) {
        best = model;
        diag.trace = ms.opt.trace;
      }
      if (ll - prev < control.tol) break;
      prev = ll;
      current = std::move(model);
    }
  }
  diag.log_likelihood = best.log_marginal_likelihood();
  best.set_diagnostics(std::move(diag));
  return best;
}

std::vector<GPModel> fit_mogp(const TrainingSet& data, const KernelSpec& templ, const FitControl& control,
                              std::size_t threads) {
  const std::size_t outputs = data.compressed.output_dim();
  std::vector<std::optional<GPModel>> slots(outputs);
  std::vector<std::exception_ptr> errors(outputs);
  FitControl c = control;
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, outputs));
  if (workers > 1) c.opt.threads = 1;

  auto run = [&](std::size_t k) {
    try {
      slots[k].emplace(fit_heteroscedastic(data, k, templ, c));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (std::size_t k = 0; k < outputs; ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < outputs; k += workers) run(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<GPModel> out;
  out.reserve(outputs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

PredictiveDistribution predict_all(std::span<const GPModel> models, std::span<const TaskPoint> query,
                                   bool full_cov) {
  PredictiveDistribution out;
  out.query.assign(query.begin(), query.end());
  if (models.empty()) return out;
  const TaskSchema& schema = models.front().schema();
  for (const auto& p : query) {
    const auto v = validate_point(schema, p);
    if (!v.empty()) throw DataError("query point outside the schema: " + v.front().message);
  }
  const Eigen::MatrixXd x = encode(schema, query);
  for (const auto& m : models) out.outputs.push_back(m.predict_encoded(x, full_cov));
  return out;
}

}  // namespace lfdgp

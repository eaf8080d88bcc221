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

#include "lfdgp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lfdgp/bench.hpp"
#include "lfdgp/error.hpp"
#include "lfdgp/synthetic.hpp"

namespace lfdgp {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::int64_t parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v)) throw UsageError("not an integer: '" + s + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<Coord> parse_values(const DimSpec& dim, const std::string& spec) {
  std::vector<Coord> vals;
  const auto range = split(spec, ':');
  try {
    if (range.size() > 1) {
      if (dim.kind == DimKind::real) {
        if (range.size() != 3) throw UsageError("real range for '" + dim.name + "' must be lo:hi:count");
        const double lo = parse_double(range[0]), hi = parse_double(range[1]);
        const auto n = parse_int(range[2]);
        if (n < 1) throw UsageError("grid count for '" + dim.name + "' must be positive");
        if (n == 1) return {lo};
        for (double v : uniform_grid(lo, hi, static_cast<std::size_t>(n))) vals.emplace_back(v);
        return vals;
      }
      if (dim.kind == DimKind::integer && range.size() == 2) {
        for (auto v = parse_int(range[0]); v <= parse_int(range[1]); ++v) vals.emplace_back(v);
        return vals;
      }
      throw UsageError("range not allowed for '" + dim.name + "'");
    }
    for (const auto& item : split(spec, '|')) {
      switch (dim.kind) {
        case DimKind::real:
          vals.emplace_back(parse_double(item));
          break;
        case DimKind::integer:
          vals.emplace_back(parse_int(item));
          break;
        case DimKind::categorical:
          vals.emplace_back(item);
          break;
      }
    }
  } catch (const DataError& e) {
    throw UsageError(std::string("grid value for '") + dim.name + "': " + e.what());
  }
  return vals;
}

std::map<std::string, std::string> parse_pairs(const std::string& spec) {
  std::map<std::string, std::string> kv;
  for (const auto& part : split(spec, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value, got '" + part + "'");
    const std::string key = trim(part.substr(0, eq));
    if (!kv.emplace(key, trim(part.substr(eq + 1))).second) throw UsageError("duplicate key '" + key + "'");
  }
  return kv;
}

std::string coord_cell(const Coord& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return to_string(c);
}

// Rethrows a module error with the stage name prefixed, keeping its class.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(std::string(name) + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PredictiveDistribution predict_bundle(const ModelBundle& b, const std::vector<TaskPoint>& query, bool full) {
  PredictiveDistribution p = predict_all(b.models, query, full);
  p.clamp_variances();
  return p;
}

CsvTable trace_table(const ModelBundle& b) {
  CsvTable t;
  t.header = {"output", "start", "value", "evaluations"};
  for (std::size_t k = 0; k < b.models.size(); ++k) {
    for (const auto& s : b.models[k].diagnostics().trace) {
      t.rows.push_back({b.output_names[k], std::to_string(s.start), format_double(s.value), std::to_string(s.evaluations)});
    }
  }
  return t;
}

json diagnostics_json(const ModelBundle& b) {
  json out = json::array();
  for (std::size_t k = 0; k < b.models.size(); ++k) {
    const auto& m = b.models[k];
    out.push_back({{"output", b.output_names[k]},
                   {"iterations", m.diagnostics().iterations},
                   {"log_likelihood", m.log_marginal_likelihood()},
                   {"evaluations", m.diagnostics().evaluations},
                   {"noise", m.noise().mode == NoiseModel::Mode::constant ? "constant" : "latent"},
                   {"jitter_used", m.jitter_used()}});
  }
  return out;
}

// Median per-evaluation likelihood time of both paths at the fitted parameters.
json path_timing(const ModelBundle& b, const DemonstrationSet& set) {
  const TrainingSet data = TrainingSet::from_demonstrations(set, true);
  const GPModel& m = b.models.front();
  const auto raw_enc = encode(*data.schema, data.raw->points);
  auto dense_raw = std::make_shared<RawOutput>();
  dense_raw->encoded = raw_enc;
  dense_raw->y = data.raw->outputs.col(0);
  std::vector<double> td, tc;
  double diff = 0.0;
  for (int r = 0; r < 5; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    const GPModel c(m.schema_ptr(), m.kernel(), m.noise(), m.train_ptr(), m.mean(), m.jitter());
    tc.push_back(seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    const GPModel d(m.schema_ptr(), m.kernel(), m.noise(), m.train_ptr(), m.mean(), m.jitter(), dense_raw);
    td.push_back(seconds_since(t0));
    diff = std::abs(c.log_marginal_likelihood() - d.log_marginal_likelihood());
  }
  std::sort(td.begin(), td.end());
  std::sort(tc.begin(), tc.end());
  return {{"unique_points", data.compressed.size()},
          {"samples", data.compressed.total_count},
          {"t_dense_s", td[2]},
          {"t_compressed_s", tc[2]},
          {"speedup", td[2] / tc[2]},
          {"loglik_abs_diff", diff}};
}

}  // namespace

KernelSpec kernel_template(const TaskSchema& schema, const FitOptions& o) {
  KernelChoice c;
  try {
    c.composition = composition_from_string(o.composition);
    c.real = real_family_from_string(o.real);
  } catch (const SchemaError& e) {
    // Model files report these as schema problems; on the command line they are usage errors.
    throw UsageError(e.what());
  }
  if (o.integer == "cosine") {
    c.integer_mode = IntegerComponent::Mode::cosine;
  } else if (o.integer.rfind("warped_", 0) == 0) {
    c.integer_mode = IntegerComponent::Mode::warped_real;
    c.integer_family = real_family_from_string(o.integer.substr(7));
  } else {
    throw UsageError("unknown integer kernel '" + o.integer + "'");
  }
  if (o.categorical != "cs" && o.categorical != "grouped") {
    throw UsageError("unknown categorical kernel '" + o.categorical + "'");
  }
  c.grouped_categories = o.categorical == "grouped";
  return default_kernel(schema, c);
}

FitControl fit_control(const FitOptions& o, const GlobalOptions& g) {
  if (o.starts < 1) throw UsageError("--starts must be at least 1");
  FitControl c;
  c.opt.n_starts = o.starts;
  c.opt.max_evals = o.max_evals;
  c.opt.seed = g.seed;
  c.opt.method = opt_method_from_string(o.method);
  c.opt.threads = g.threads;
  c.noise = noise_mode_from_string(o.noise);
  if (o.mean == "constant") {
    c.mean = MeanMode::constant;
  } else if (o.mean == "zero") {
    c.mean = MeanMode::zero;
  } else {
    throw UsageError("unknown mean '" + o.mean + "'");
  }
  c.max_iter = o.max_iter;
  c.tol = o.tol;
  c.compressed = g.compressed;
  c.jitter = o.jitter;
  return c;
}

ModelBundle fit_models(const DemonstrationSet& set, const FitOptions& options, const GlobalOptions& global) {
  const KernelSpec templ = kernel_template(set.schema, options);
  const FitControl control = fit_control(options, global);
  const TrainingSet data = TrainingSet::from_demonstrations(set, !global.compressed);
  ModelBundle b;
  b.schema = data.schema;
  b.output_names = data.output_names;
  b.models = fit_mogp(data, templ, control, global.threads);
  return b;
}

std::vector<TaskPoint> parse_grid(const TaskSchema& schema, const std::string& spec) {
  const auto kv = parse_pairs(spec);
  for (const auto& [k, v] : kv) {
    if (!schema.find(k)) throw UsageError("grid names unknown dim '" + k + "'");
  }
  std::vector<std::vector<Coord>> values(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto it = kv.find(schema.dim(i).name);
    if (it == kv.end()) throw UsageError("grid lacks dim '" + schema.dim(i).name + "'");
    values[i] = parse_values(schema.dim(i), it->second);
    if (values[i].empty()) throw UsageError("grid for '" + schema.dim(i).name + "' is empty");
  }
  // Odometer over dims; the time dim is the fastest digit.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i != schema.time_dim()) order.push_back(i);
  }
  order.push_back(schema.time_dim());
  std::vector<std::size_t> idx(schema.size(), 0);
  std::vector<TaskPoint> out;
  for (;;) {
    TaskPoint p;
    p.coords.resize(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) p.coords[i] = values[i][idx[i]];
    const auto v = validate_point(schema, p);
    if (!v.empty()) throw DataError("grid point outside the schema: " + v.front().message);
    out.push_back(std::move(p));
    std::size_t pos = order.size();
    while (pos > 0) {
      const std::size_t d = order[pos - 1];
      if (++idx[d] < values[d].size()) break;
      idx[d] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return out;
}

ViaPoint parse_via(const TaskSchema& schema, const std::vector<std::string>& outputs, const std::string& spec,
                   const std::optional<TaskPoint>& defaults) {
  auto kv = parse_pairs(spec);
  ViaPoint vp;
  vp.x.coords.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& dim = schema.dim(i);
    const auto it = kv.find(dim.name);
    if (it != kv.end()) {
      const auto vals = parse_values(dim, it->second);
      if (vals.size() != 1) throw UsageError("via-point '" + dim.name + "' needs a single value");
      vp.x.coords[i] = vals.front();
      kv.erase(it);
    } else if (defaults) {
      vp.x.coords[i] = defaults->coords.at(i);
    } else {
      throw UsageError("via-point lacks '" + dim.name + "'");
    }
  }
  double strength = std::numeric_limits<double>::quiet_NaN();
  if (auto it = kv.find("strength"); it != kv.end()) {
    strength = parse_double(it->second);
    kv.erase(it);
  }
  for (const auto& o : outputs) {
    const auto it = kv.find(o);
    if (it == kv.end()) throw UsageError("via-point lacks output '" + o + "'");
    vp.y.push_back(parse_double(it->second));
    kv.erase(it);
    if (auto s = kv.find("strength_" + o); s != kv.end()) {
      vp.strength.push_back(parse_double(s->second));
      kv.erase(s);
    } else {
      if (std::isnan(strength)) throw UsageError("via-point lacks a strength for '" + o + "'");
      vp.strength.push_back(strength);
    }
  }
  if (!kv.empty()) throw UsageError("via-point has unknown key '" + kv.begin()->first + "'");
  return vp;
}

CsvTable prediction_table(const TaskSchema& schema, const std::vector<std::string>& outputs,
                          const PredictiveDistribution& pred) {
  CsvTable t;
  for (const auto& d : schema.dims()) t.header.push_back(d.name);
  for (const auto& o : outputs) {
    t.header.push_back(o + "_mean");
    t.header.push_back(o + "_var");
  }
  for (std::size_t q = 0; q < pred.query.size(); ++q) {
    std::vector<std::string> row;
    for (const auto& c : pred.query[q].coords) row.push_back(coord_cell(c));
    for (const auto& o : pred.outputs) {
      row.push_back(format_double(o.mean(static_cast<Eigen::Index>(q))));
      row.push_back(format_double(o.variance(static_cast<Eigen::Index>(q))));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

AlignmentResult run_align(const DemonstrationSet& set, const AlignCommand& cmd) {
  AlignOptions opt;
  opt.reference = cmd.reference;
  opt.grid = cmd.grid;
  AlignmentResult res = dtw_align(set, opt);
  if (cmd.duration) {
    for (auto& d : res.aligned.demonstrations) {
      d = time_scale(d, TimeScaler{d.duration(), *cmd.duration, TimeScaler::Mode::linear});
      d.times.back() = *cmd.duration;
    }
  }
  return res;
}

CsvTable warp_path_table(const DemonstrationSet& set, const AlignmentResult& result) {
  CsvTable t;
  t.header = {"demo_id", "ref_index", "demo_index"};
  for (std::size_t i = 0; i < result.paths.size(); ++i) {
    for (const auto& [k, l] : result.paths[i]) {
      t.rows.push_back({set.demonstrations[i].id, std::to_string(k), std::to_string(l)});
    }
  }
  return t;
}

json evaluate_models(const ModelBundle& bundle, const DemonstrationSet& test) {
  if (test.output_dim() != bundle.models.size()) throw DataError("test set output dimension differs from the model");
  if (!(test.schema == *bundle.schema)) throw SchemaError("test set schema differs from the model schema");
  const FlatSamples flat = flatten(test);
  if (flat.points.empty()) throw DataError("test set is empty");
  const PredictiveDistribution p = predict_all(bundle.models, flat.points, false);
  Eigen::MatrixXd pred(flat.outputs.rows(), flat.outputs.cols());
  for (std::size_t k = 0; k < p.outputs.size(); ++k) pred.col(static_cast<Eigen::Index>(k)) = p.outputs[k].mean;
  const R2Report r2 = evaluate_r2(flat.outputs, pred);
  json per = json::object();
  for (std::size_t k = 0; k < r2.per_output.size(); ++k) per[bundle.output_names[k]] = r2.per_output[k];
  return {{"r2_pooled", r2.pooled}, {"r2", per}, {"test_samples", flat.points.size()}};
}

json run_pipeline(const std::filesystem::path& config_path, const GlobalOptions& global) {
  const json cfg = stage("config", [&] { return read_json(config_path); });
  const auto base = config_path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  const std::filesystem::path out_dir = resolve(cfg.value("output_dir", std::string("pipeline_out")));
  json report = {{"compressed", global.compressed}, {"seed", global.seed}};
  json timings = json::object();

  auto t0 = std::chrono::steady_clock::now();
  DemonstrationSet set = stage("input", [&] {
    if (cfg.contains("generate")) {
      const json& g = cfg.at("generate");
      SyntheticSpec s;
      s.generator = g.value("generator", s.generator);
      s.grid = g.value("grid", std::vector<std::size_t>{});
      s.replicates = g.value("replicates", std::size_t{1});
      s.noise = g.value("noise", 0.0);
      s.seed = g.value("seed", global.seed);
      return gen_synthetic(s);
    }
    if (!cfg.contains("input")) throw SchemaError("config needs 'input' or 'generate'");
    return read_demonstrations(resolve(cfg.at("input").get<std::string>()));
  });

  if (cfg.contains("align") && cfg.at("align").value("enabled", true)) {
    t0 = std::chrono::steady_clock::now();
    set = stage("align", [&] {
      const json& a = cfg.at("align");
      AlignCommand cmd;
      if (a.contains("reference") && !a.at("reference").is_null()) cmd.reference = a.at("reference").get<std::string>();
      cmd.grid = a.value("grid", std::size_t{25});
      if (a.contains("duration")) cmd.duration = a.at("duration").get<double>();
      AlignmentResult res = run_align(set, cmd);
      write_demonstrations(out_dir / "aligned.json", res.aligned);
      return res.aligned;
    });
    timings["align_s"] = seconds_since(t0);
  }

  FitOptions fo;
  if (cfg.contains("fit")) {
    const json& f = cfg.at("fit");
    fo.composition = f.value("composition", fo.composition);
    fo.real = f.value("real", fo.real);
    fo.integer = f.value("integer", fo.integer);
    fo.categorical = f.value("categorical", fo.categorical);
    fo.noise = f.value("noise", fo.noise);
    fo.mean = f.value("mean", fo.mean);
    fo.max_iter = f.value("max_iter", fo.max_iter);
    fo.tol = f.value("tol", fo.tol);
    fo.starts = f.value("starts", fo.starts);
    fo.max_evals = f.value("max_evals", fo.max_evals);
    fo.method = f.value("method", fo.method);
  }
  t0 = std::chrono::steady_clock::now();
  const ModelBundle bundle = stage("fit", [&] {
    const ModelBundle fitted = fit_models(set, fo, global);
    write_models(out_dir / "model.json", fitted);
    // Downstream stages use the model exactly as a standalone command would load it.
    return read_models(out_dir / "model.json");
  });
  timings["fit_s"] = seconds_since(t0);
  report["fit"] = diagnostics_json(bundle);
  report["likelihood_timing"] = stage("fit", [&] { return path_timing(bundle, set); });

  if (cfg.contains("predict")) {
    t0 = std::chrono::steady_clock::now();
    stage("predict", [&] {
      const json& p = cfg.at("predict");
      const auto query = parse_grid(*bundle.schema, p.at("grid").get<std::string>());
      const auto pred = predict_bundle(bundle, query, false);
      write_csv(out_dir / "predictions.csv", prediction_table(*bundle.schema, bundle.output_names, pred));
      return 0;
    });
    timings["predict_s"] = seconds_since(t0);
  }

  if (cfg.contains("evaluate")) {
    t0 = std::chrono::steady_clock::now();
    report["evaluate"] = stage("evaluate", [&] {
      const json& e = cfg.at("evaluate");
      DemonstrationSet test;
      if (e.contains("generate")) {
        const json& g = e.at("generate");
        SyntheticSpec s;
        s.generator = g.value("generator", s.generator);
        s.grid = g.value("grid", std::vector<std::size_t>{});
        s.replicates = g.value("replicates", std::size_t{1});
        s.noise = g.value("noise", 0.0);
        s.seed = g.value("seed", global.seed + 1);
        test = gen_synthetic(s);
      } else {
        test = read_demonstrations(resolve(e.at("test").get<std::string>()));
      }
      return evaluate_models(bundle, test);
    });
    timings["evaluate_s"] = seconds_since(t0);
  }

  report["timings"] = timings;
  stage("report", [&] {
    write_json(out_dir / "report.json", report);
    return 0;
  });
  return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-process policies from repeated demonstrations", "lfdgp"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->default_val(0);
  app.add_option("--threads", g.threads, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);
  app.add_flag("--compressed{true},--dense{false}", g.compressed, "Use replication compression (default true)")
      ->default_val(true);

  // align
  auto* align = app.add_subcommand("align", "DTW-align demonstrations onto a shared grid");
  std::string a_in, a_out, a_paths;
  AlignCommand a_cmd;
  std::string a_ref;
  double a_duration = 0.0;
  align->add_option("--in", a_in, "Demonstration JSON")->required();
  align->add_option("--out", a_out, "Aligned demonstration JSON")->required();
  align->add_option("--reference", a_ref, "Reference demonstration id (default: median sample count)");
  align->add_option("--grid", a_cmd.grid, "Samples per aligned demonstration")->default_val(25);
  align->add_option("--duration", a_duration, "Rescale aligned demonstrations to this duration");
  align->add_option("--emit-paths", a_paths, "Write warping paths as CSV");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic demonstration set");
  SyntheticSpec g_spec;
  std::string g_grid, g_out;
  gen->add_option("--generator", g_spec.generator, "mixed3 | damped | regimes | letters")->default_val("mixed3");
  gen->add_option("--grid", g_grid, "Comma-separated grid counts");
  gen->add_option("--replicates", g_spec.replicates, "Replicates per location")->default_val(1);
  gen->add_option("--noise", g_spec.noise, "Noise variance")->default_val(0.0);
  gen->add_option("--out", g_out, "Output JSON")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit one GP per output");
  FitOptions fo;
  std::string f_in, f_out, f_trace;
  fit->add_option("--in", f_in, "Demonstration JSON")->required();
  fit->add_option("--out", f_out, "Model JSON")->required();
  fit->add_option("--composition", fo.composition, "product | sum | anova")->default_val(fo.composition);
  fit->add_option("--real", fo.real, "se | matern52")->default_val(fo.real);
  fit->add_option("--integer", fo.integer, "cosine | warped_se | warped_matern52")->default_val(fo.integer);
  fit->add_option("--categorical", fo.categorical, "cs | grouped")->default_val(fo.categorical);
  fit->add_option("--noise", fo.noise, "constant | heteroscedastic")->default_val(fo.noise);
  fit->add_option("--mean", fo.mean, "constant | zero")->default_val(fo.mean);
  fit->add_option("--max-iter", fo.max_iter, "Noise-model iterations")->default_val(fo.max_iter);
  fit->add_option("--tol", fo.tol, "Noise-model log-likelihood tolerance")->default_val(fo.tol);
  fit->add_option("--starts", fo.starts, "Optimizer starts")->default_val(fo.starts);
  fit->add_option("--max-evals", fo.max_evals, "Evaluations per start")->default_val(fo.max_evals);
  fit->add_option("--method", fo.method, "simplex | quasi_newton")->default_val(fo.method);
  fit->add_option("--jitter", fo.jitter, "Relative diagonal jitter")->default_val(fo.jitter);
  fit->add_option("--trace", f_trace, "Write the optimizer trace as CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict over a query grid");
  std::string p_model, p_grid, p_out;
  predict->add_option("--model", p_model, "Model JSON")->required();
  predict->add_option("--grid", p_grid, "Query grid, e.g. t=0:1:100,s=4,u=A")->required();
  predict->add_option("--out", p_out, "Prediction CSV (stdout when omitted)");

  // modulate
  auto* modulate = app.add_subcommand("modulate", "Condition the policy on via-points");
  std::string m_model, m_grid, m_out;
  std::vector<std::string> m_via;
  bool m_diag = false;
  modulate->add_option("--model", m_model, "Model JSON")->required();
  modulate->add_option("--grid", m_grid, "Query grid")->required();
  modulate->add_option("--via", m_via, "Via-point, e.g. t=0.5,x=1,y=2,strength=1e-6")->required();
  modulate->add_flag("--diagonal", m_diag, "Fuse per query point instead of with full covariances");
  modulate->add_option("--out", m_out, "Conditioned trajectory CSV (stdout when omitted)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "R^2 of a model on a test set");
  std::string e_model, e_test, e_out;
  evaluate->add_option("--model", e_model, "Model JSON")->required();
  evaluate->add_option("--test", e_test, "Test demonstration JSON")->required();
  evaluate->add_option("--out", e_out, "Report JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Dense versus compressed timing");
  BenchConfig b_cfg;
  std::string b_a = "1,3,5,9", b_what = "loglik", b_out;
  bench->add_option("--n", b_cfg.n, "Unique locations")->default_val(50);
  bench->add_option("--a", b_a, "Comma-separated replicate counts")->default_val(b_a);
  bench->add_option("--repeats", b_cfg.repeats, "Repeats per configuration")->default_val(20);
  bench->add_option("--what", b_what, "loglik | predict")->default_val(b_what);
  bench->add_option("--out", b_out, "CSV (stdout when omitted)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "align -> fit -> predict -> evaluate from a JSON config");
  std::string pl_config;
  pipeline->add_option("--config", pl_config, "Pipeline config JSON")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  auto emit = [&](const std::string& path, const CsvTable& t) {
    if (path.empty()) {
      out << t.to_string();
    } else {
      write_csv(path, t);
    }
  };

  try {
    if (*align) {
      if (!a_ref.empty()) a_cmd.reference = a_ref;
      if (align->count("--duration")) a_cmd.duration = a_duration;
      const DemonstrationSet set = read_demonstrations(a_in);
      const AlignmentResult res = run_align(set, a_cmd);
      write_demonstrations(a_out, res.aligned);
      if (!a_paths.empty()) write_csv(a_paths, warp_path_table(set, res));
      out << "aligned " << res.aligned.demonstrations.size() << " demonstrations to reference '" << res.reference_id
          << "'\n";
    } else if (*gen) {
      g_spec.seed = g.seed;
      g_spec.grid.clear();
      if (!g_grid.empty()) {
        for (const auto& s : split(g_grid, ',')) g_spec.grid.push_back(static_cast<std::size_t>(parse_int(s)));
      }
      const DemonstrationSet set = gen_synthetic(g_spec);
      for (const auto& d : set.demonstrations) {
        for (std::size_t k = 0; k < d.sample_count(); ++k) {
          const auto v = validate_point(set.schema, set.point(d, k));
          if (!v.empty()) throw DataError("generated point outside the schema: " + v.front().message);
        }
      }
      write_demonstrations(g_out, set);
    } else if (*fit) {
      const DemonstrationSet set = read_demonstrations(f_in);
      const ModelBundle b = fit_models(set, fo, g);
      write_models(f_out, b);
      if (!f_trace.empty()) write_csv(f_trace, trace_table(b));
      for (std::size_t k = 0; k < b.models.size(); ++k) {
        out << b.output_names[k] << ": log L = " << format_double(b.models[k].log_marginal_likelihood())
            << ", iterations = " << b.models[k].diagnostics().iterations << "\n";
      }
    } else if (*predict) {
      const ModelBundle b = read_models(p_model);
      const auto query = parse_grid(*b.schema, p_grid);
      emit(p_out, prediction_table(*b.schema, b.output_names, predict_bundle(b, query, false)));
    } else if (*modulate) {
      const ModelBundle b = read_models(m_model);
      const auto query = parse_grid(*b.schema, m_grid);
      ViaPointSet via;
      for (const auto& s : m_via) via.points.push_back(parse_via(*b.schema, b.output_names, s, query.front()));
      const PolicyModulator mod(b.models, query, m_diag ? FusionMode::diagonal : FusionMode::full);
      PredictiveDistribution res = mod.modulate(via);
      res.clamp_variances();
      emit(m_out, prediction_table(*b.schema, b.output_names, res));
    } else if (*evaluate) {
      const json rep = evaluate_models(read_models(e_model), read_demonstrations(e_test));
      if (!e_out.empty()) write_json(e_out, rep);
      out << rep.dump(1) << "\n";
    } else if (*bench) {
      b_cfg.seed = g.seed;
      b_cfg.what = bench_what_from_string(b_what);
      b_cfg.replicates.clear();
      for (const auto& s : split(b_a, ',')) b_cfg.replicates.push_back(static_cast<std::size_t>(parse_int(s)));
      CsvTable t;
      t.header = {"n", "a", "N", "t_dense_ms", "t_compressed_ms", "speedup", "max_abs_diff"};
      for (const auto& r : bench_replication(b_cfg)) {
        t.rows.push_back({std::to_string(r.n), std::to_string(r.a), std::to_string(r.total), format_double(r.t_dense_ms),
                          format_double(r.t_compressed_ms), format_double(r.speedup), format_double(r.max_abs_diff)});
      }
      emit(b_out, t);
    } else if (*pipeline) {
      const json rep = run_pipeline(pl_config, g);
      out << rep.dump(1) << "\n";
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace lfdgp

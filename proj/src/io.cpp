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

#include "lfdgp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lfdgp/error.hpp"

namespace lfdgp {

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing key '" + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  const auto v = get_as<std::vector<double>>(j, where);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json hyper_to_json(const HyperParams& h) {
  return {{"names", h.names}, {"values", h.values}, {"lower", h.lower}, {"upper", h.upper}};
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  if (j.is_null()) return h;
  h.names = get_as<std::vector<std::string>>(require(j, "names", "hyper"), "hyper");
  h.values = get_as<std::vector<double>>(require(j, "values", "hyper"), "hyper");
  h.lower = get_as<std::vector<double>>(require(j, "lower", "hyper"), "hyper");
  h.upper = get_as<std::vector<double>>(require(j, "upper", "hyper"), "hyper");
  return h;
}

json gp_to_json(const GPModel& m) {
  const TaskSchema& schema = m.schema();
  const OutputStats& t = m.train();
  json points = json::array();
  for (const auto& p : t.points) points.push_back(point_to_json(p));
  json noise;
  if (m.noise().mode == NoiseModel::Mode::constant) {
    noise = {{"mode", "constant"}, {"lambda", m.noise().lambda}};
  } else {
    noise = {{"mode", "latent"}, {"model", gp_to_json(*m.noise().latent)}};
  }
  const FitDiagnostics& d = m.diagnostics();
  json trace = json::array();
  for (const auto& s : d.trace) {
    trace.push_back({{"start", s.start}, {"value", s.value}, {"evaluations", s.evaluations}, {"theta", s.theta}});
  }
  return {
      {"kernel", kernel_to_json(m.kernel(), schema)},
      {"mean", m.mean()},
      {"jitter", m.jitter()},
      {"hyper", hyper_to_json(m.hyper())},
      {"noise", noise},
      {"fit_path", m.dense() ? "dense" : "compressed"},
      {"train",
       {{"points", points},
        {"counts", vector_to_json(t.counts)},
        {"means", vector_to_json(t.ybar)},
        {"sq_dev", vector_to_json(t.sq_dev)},
        {"total_count", t.total_count}}},
      {"diagnostics",
       {{"iterations", d.iterations},
        {"log_likelihood", d.log_likelihood},
        {"evaluations", d.evaluations},
        {"history", d.history},
        {"trace", trace}}},
  };
}

GPModel gp_from_json(const json& j, const std::shared_ptr<const TaskSchema>& schema) {
  const std::string w = "model";
  KernelSpec kernel = kernel_from_json(require(j, "kernel", w), *schema);
  const json& nj = require(j, "noise", w);
  NoiseModel noise;
  const auto mode = get_as<std::string>(require(nj, "mode", "noise"), "noise");
  if (mode == "constant") {
    noise = NoiseModel::constant(get_as<double>(require(nj, "lambda", "noise"), "noise"));
  } else if (mode == "latent") {
    noise = NoiseModel::from_latent(std::make_shared<const GPModel>(gp_from_json(require(nj, "model", "noise"), schema)));
  } else {
    throw SchemaError("noise: unknown mode '" + mode + "'");
  }

  const json& tj = require(j, "train", w);
  auto st = std::make_shared<OutputStats>();
  for (const auto& p : require(tj, "points", "train")) st->points.push_back(point_from_json(*schema, p));
  st->encoded = encode(*schema, st->points);
  st->counts = vector_from_json(require(tj, "counts", "train"), "train.counts");
  st->ybar = vector_from_json(require(tj, "means", "train"), "train.means");
  st->sq_dev = vector_from_json(require(tj, "sq_dev", "train"), "train.sq_dev");
  st->total_count = get_as<std::size_t>(require(tj, "total_count", "train"), "train");
  const auto n = static_cast<Eigen::Index>(st->points.size());
  if (st->counts.size() != n || st->ybar.size() != n || st->sq_dev.size() != n) {
    throw SchemaError("train: statistics do not match the point count");
  }

  GPModel m(schema, std::move(kernel), std::move(noise), st, get_as<double>(require(j, "mean", w), w),
            j.value("jitter", 1e-8));
  m.set_hyper(hyper_from_json(j.value("hyper", json())));
  if (j.contains("diagnostics")) {
    const json& dj = j.at("diagnostics");
    FitDiagnostics d;
    d.iterations = dj.value("iterations", std::size_t{0});
    d.log_likelihood = dj.value("log_likelihood", 0.0);
    d.evaluations = dj.value("evaluations", std::size_t{0});
    d.history = dj.value("history", std::vector<double>{});
    for (const auto& s : dj.value("trace", json::array())) {
      StartRecord r;
      r.start = s.value("start", std::size_t{0});
      r.value = s.value("value", 0.0);
      r.evaluations = s.value("evaluations", std::size_t{0});
      r.theta = s.value("theta", std::vector<double>{});
      d.trace.push_back(std::move(r));
    }
    m.set_diagnostics(std::move(d));
  }
  return m;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json schema_to_json(const TaskSchema& schema, const std::vector<std::string>& outputs) {
  json dims = json::array();
  for (const auto& d : schema.dims()) {
    json e = {{"name", d.name}, {"kind", to_string(d.kind)}};
    switch (d.kind) {
      case DimKind::real:
        e["domain"] = {d.real_lo, d.real_hi};
        break;
      case DimKind::integer:
        e["domain"] = {d.int_lo, d.int_hi};
        break;
      case DimKind::categorical:
        e["domain"] = d.categories;
        if (!d.groups.empty()) e["groups"] = d.groups;
        break;
    }
    dims.push_back(std::move(e));
  }
  json j = {{"dims", dims}, {"time", schema.dim(schema.time_dim()).name}};
  if (!outputs.empty()) j["outputs"] = outputs;
  return j;
}

TaskSchema schema_from_json(const json& j, std::vector<std::string>* outputs) {
  std::vector<DimSpec> dims;
  for (const auto& e : require(j, "dims", "schema")) {
    const auto name = get_as<std::string>(require(e, "name", "schema dim"), "schema dim");
    const std::string where = "schema dim '" + name + "'";
    const DimKind kind = dim_kind_from_string(get_as<std::string>(require(e, "kind", where), where));
    const json& dom = require(e, "domain", where);
    switch (kind) {
      case DimKind::real: {
        const auto v = get_as<std::vector<double>>(dom, where);
        if (v.size() != 2) throw SchemaError(where + ": real domain must be [lo, hi]");
        dims.push_back(DimSpec::real(name, v[0], v[1]));
        break;
      }
      case DimKind::integer: {
        const auto v = get_as<std::vector<std::int64_t>>(dom, where);
        if (v.size() != 2) throw SchemaError(where + ": integer domain must be [lo, hi]");
        dims.push_back(DimSpec::integer(name, v[0], v[1]));
        break;
      }
      case DimKind::categorical: {
        auto groups = e.contains("groups") ? get_as<std::vector<std::string>>(e.at("groups"), where)
                                           : std::vector<std::string>{};
        dims.push_back(DimSpec::categorical(name, get_as<std::vector<std::string>>(dom, where), std::move(groups)));
        break;
      }
    }
  }
  std::size_t time = dims.size();
  if (j.contains("time")) {
    const auto name = get_as<std::string>(j.at("time"), "schema.time");
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (dims[i].name == name) time = i;
    }
    if (time == dims.size()) throw SchemaError("schema.time names an unknown dim '" + name + "'");
  } else {
    for (std::size_t i = 0; i < dims.size() && time == dims.size(); ++i) {
      if (dims[i].kind == DimKind::real) time = i;
    }
    if (time == dims.size()) throw SchemaError("schema has no real-valued dim to use as time");
  }
  if (outputs && j.contains("outputs")) *outputs = get_as<std::vector<std::string>>(j.at("outputs"), "schema.outputs");
  return TaskSchema(std::move(dims), time);
}

json coord_to_json(const Coord& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

Coord coord_from_json(const DimSpec& dim, const json& j) {
  const std::string where = "value of '" + dim.name + "'";
  switch (dim.kind) {
    case DimKind::real:
      if (!j.is_number()) throw SchemaError(where + " must be a number");
      return j.get<double>();
    case DimKind::integer:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v == std::floor(v) && std::abs(v) < 9.2e18) return static_cast<std::int64_t>(v);
      }
      throw SchemaError(where + " must be an integer");
    case DimKind::categorical:
      if (!j.is_string()) throw SchemaError(where + " must be a category label");
      return j.get<std::string>();
  }
  throw SchemaError(where + ": unknown kind");
}

json point_to_json(const TaskPoint& p) {
  json a = json::array();
  for (const auto& c : p.coords) a.push_back(coord_to_json(c));
  return a;
}

TaskPoint point_from_json(const TaskSchema& schema, const json& j) {
  if (!j.is_array() || j.size() != schema.size()) throw SchemaError("point does not match the schema size");
  TaskPoint p;
  for (std::size_t i = 0; i < schema.size(); ++i) p.coords.push_back(coord_from_json(schema.dim(i), j[i]));
  return p;
}

json demonstrations_to_json(const DemonstrationSet& set) {
  json demos = json::array();
  for (const auto& d : set.demonstrations) {
    json ctx = json::object();
    for (const auto& [k, v] : d.context) ctx[k] = coord_to_json(v);
    json samples = json::array();
    for (std::size_t k = 0; k < d.sample_count(); ++k) {
      json row = json::array({d.times[k]});
      for (Eigen::Index o = 0; o < d.outputs.cols(); ++o) row.push_back(d.outputs(static_cast<Eigen::Index>(k), o));
      samples.push_back(std::move(row));
    }
    demos.push_back({{"id", d.id}, {"context", ctx}, {"samples", samples}});
  }
  return {{"schema", schema_to_json(set.schema, set.output_names)}, {"demonstrations", demos}};
}

DemonstrationSet demonstrations_from_json(const json& j) {
  DemonstrationSet set;
  set.schema = schema_from_json(require(j, "schema", "demonstration file"), &set.output_names);
  std::size_t out_dim = set.output_names.size();
  for (const auto& dj : require(j, "demonstrations", "demonstration file")) {
    Demonstration d;
    d.id = get_as<std::string>(require(dj, "id", "demonstration"), "demonstration id");
    const std::string where = "demonstration '" + d.id + "'";
    if (dj.contains("context")) {
      for (const auto& [k, v] : dj.at("context").items()) {
        const auto idx = set.schema.find(k);
        if (!idx) throw SchemaError(where + ": unknown context variable '" + k + "'");
        d.context[k] = coord_from_json(set.schema.dim(*idx), v);
      }
    }
    const json& samples = require(dj, "samples", where);
    if (!samples.is_array() || samples.empty()) throw DataError(where + ": no samples");
    const std::size_t width = samples.front().size();
    if (width < 2) throw SchemaError(where + ": samples need a time and at least one output");
    if (out_dim == 0) out_dim = width - 1;
    if (width - 1 != out_dim) throw SchemaError(where + ": sample width does not match the output dimension");
    d.outputs.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(out_dim));
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto row = get_as<std::vector<double>>(samples[k], where);
      if (row.size() != width) throw SchemaError(where + ": ragged sample rows");
      d.times.push_back(row[0]);
      for (std::size_t o = 0; o < out_dim; ++o) d.outputs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(o)) = row[o + 1];
    }
    set.demonstrations.push_back(std::move(d));
  }
  if (set.output_names.empty()) {
    for (std::size_t o = 0; o < out_dim; ++o) set.output_names.push_back("y" + std::to_string(o + 1));
  }
  set.validate();
  return set;
}

DemonstrationSet read_demonstrations(const std::filesystem::path& path) { return demonstrations_from_json(read_json(path)); }

void write_demonstrations(const std::filesystem::path& path, const DemonstrationSet& set) {
  write_json(path, demonstrations_to_json(set));
}

json kernel_to_json(const KernelSpec& spec, const TaskSchema& schema) {
  json comps = json::array();
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    json params;
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, RealComponent>) {
            params = {{"lengthscale", c.lengthscale}};
          } else if constexpr (std::is_same_v<T, IntegerComponent>) {
            params = {{"lo", c.lo}, {"hi", c.hi}};
            if (c.mode == IntegerComponent::Mode::cosine) {
              params["beta"] = c.beta;
            } else {
              params["lengthscale"] = c.lengthscale;
            }
          } else if constexpr (std::is_same_v<T, CsComponent>) {
            params = {{"levels", c.levels}, {"c", c.c}};
          } else {
            json rows = json::array();
            for (Eigen::Index g = 0; g < c.params.c.rows(); ++g) {
              rows.push_back(vector_to_json(c.params.c.row(g).transpose()));
            }
            params = {{"group_of", c.params.group_of}, {"c", rows}};
          }
        },
        spec.components[i]);
    comps.push_back({{"dim", schema.dim(i).name}, {"kind", component_kind(spec.components[i])}, {"params", params}});
  }
  return {{"composition", to_string(spec.composition)}, {"amplitude", spec.amplitude}, {"components", comps}};
}

KernelSpec kernel_from_json(const json& j, const TaskSchema& schema) {
  KernelSpec spec;
  spec.composition = composition_from_string(get_as<std::string>(require(j, "composition", "kernel"), "kernel"));
  spec.amplitude = get_as<double>(require(j, "amplitude", "kernel"), "kernel");
  const json& comps = require(j, "components", "kernel");
  if (!comps.is_array() || comps.size() != schema.size()) throw SchemaError("kernel: one component per dim required");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const json& c = comps[i];
    const auto kind = get_as<std::string>(require(c, "kind", "kernel component"), "kernel component");
    const std::string where = "kernel component '" + kind + "'";
    const json& p = require(c, "params", where);
    if (c.contains("dim") && c.at("dim") != schema.dim(i).name) throw SchemaError(where + ": dims out of order");
    if (kind == "se" || kind == "matern52") {
      spec.components.emplace_back(
          RealComponent{real_family_from_string(kind), get_as<double>(require(p, "lengthscale", where), where)});
    } else if (kind == "cosine" || kind.rfind("warped_", 0) == 0) {
      IntegerComponent ic;
      ic.lo = get_as<std::int64_t>(require(p, "lo", where), where);
      ic.hi = get_as<std::int64_t>(require(p, "hi", where), where);
      if (kind == "cosine") {
        ic.mode = IntegerComponent::Mode::cosine;
        ic.beta = get_as<double>(require(p, "beta", where), where);
      } else {
        ic.mode = IntegerComponent::Mode::warped_real;
        ic.family = real_family_from_string(kind.substr(7));
        ic.lengthscale = get_as<double>(require(p, "lengthscale", where), where);
      }
      spec.components.emplace_back(ic);
    } else if (kind == "cs") {
      spec.components.emplace_back(CsComponent{get_as<std::size_t>(require(p, "levels", where), where),
                                               get_as<double>(require(p, "c", where), where)});
    } else if (kind == "grouped_cs") {
      GroupedCsParams gp;
      gp.group_of = get_as<std::vector<int>>(require(p, "group_of", where), where);
      const auto rows = get_as<std::vector<std::vector<double>>>(require(p, "c", where), where);
      const auto g = static_cast<Eigen::Index>(rows.size());
      gp.c.resize(g, g);
      for (Eigen::Index a = 0; a < g; ++a) {
        if (static_cast<Eigen::Index>(rows[a].size()) != g) throw SchemaError(where + ": c must be square");
        for (Eigen::Index b = 0; b < g; ++b) gp.c(a, b) = rows[a][b];
      }
      spec.components.emplace_back(GroupedCsComponent{std::move(gp)});
    } else {
      throw SchemaError("kernel: unknown component kind '" + kind + "'");
    }
  }
  spec.validate(schema);
  return spec;
}

json models_to_json(const ModelBundle& bundle) {
  json models = json::array();
  for (std::size_t k = 0; k < bundle.models.size(); ++k) {
    json m = gp_to_json(bundle.models[k]);
    m["output"] = bundle.output_names.at(k);
    models.push_back(std::move(m));
  }
  return {{"format", "lfdgp-model"},
          {"version", 1},
          {"schema", schema_to_json(*bundle.schema, bundle.output_names)},
          {"outputs", bundle.output_names},
          {"models", models}};
}

ModelBundle models_from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "lfdgp-model") {
    throw SchemaError("not an lfdgp model file");
  }
  ModelBundle b;
  b.schema = std::make_shared<const TaskSchema>(schema_from_json(require(j, "schema", "model file")));
  b.output_names = get_as<std::vector<std::string>>(require(j, "outputs", "model file"), "model file");
  const json& models = require(j, "models", "model file");
  if (models.size() != b.output_names.size()) throw SchemaError("model file: one model per output required");
  for (const auto& m : models) b.models.push_back(gp_from_json(m, b.schema));
  return b;
}

ModelBundle read_models(const std::filesystem::path& path) { return models_from_json(read_json(path)); }

void write_models(const std::filesystem::path& path, const ModelBundle& bundle) {
  write_json(path, models_to_json(bundle));
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view raw) {
  std::string_view s = raw;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + std::string(raw) + "'");
  }
  return v;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += quote_csv(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("CSV has no column '" + name + "'");
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = any = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        cells.push_back(std::move(cell));
        lines.push_back(std::move(cells));
      }
      cells.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (any || !cell.empty()) {
    cells.push_back(std::move(cell));
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) throw DataError("CSV is empty");
  t.header = std::move(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].size() != t.header.size()) throw DataError("CSV row " + std::to_string(i) + " has the wrong width");
    t.rows.push_back(std::move(lines[i]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, table.to_string()); }

}  // namespace lfdgp

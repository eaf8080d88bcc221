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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lfdgp/domain.hpp"
#include "lfdgp/gp.hpp"
#include "lfdgp/io.hpp"
#include "lfdgp/modulation.hpp"
#include "lfdgp/preprocess.hpp"

namespace lfdgp {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool compressed = true;
};

struct FitOptions {
  std::string composition = "anova";
  std::string real = "se";
  std::string integer = "cosine";  // cosine | warped_se | warped_matern52
  std::string categorical = "cs";  // cs | grouped
  std::string noise = "heteroscedastic";
  std::string mean = "constant";
  std::size_t max_iter = 10;
  double tol = 1e-4;
  std::size_t starts = 8;
  std::size_t max_evals = 500;
  std::string method = "simplex";
  double jitter = 1e-8;
};

KernelSpec kernel_template(const TaskSchema& schema, const FitOptions& options);
FitControl fit_control(const FitOptions& options, const GlobalOptions& global);

/// Fits one independent GP per output of the demonstration set.
ModelBundle fit_models(const DemonstrationSet& set, const FitOptions& options, const GlobalOptions& global);

/// Query grid from "name=spec,..." with one entry per schema dim. Real specs are
/// "lo:hi:count", a value, or "v1|v2"; integer specs "lo:hi", a value or a list;
/// categorical specs a label or "A|B". Time varies fastest.
std::vector<TaskPoint> parse_grid(const TaskSchema& schema, const std::string& spec);

/// Via-point from "dim=value,...,output=value,...,strength=r" (or strength_<output>=r).
/// Dims not given are taken from `defaults` when present there.
ViaPoint parse_via(const TaskSchema& schema, const std::vector<std::string>& outputs, const std::string& spec,
                   const std::optional<TaskPoint>& defaults = std::nullopt);

CsvTable prediction_table(const TaskSchema& schema, const std::vector<std::string>& outputs,
                          const PredictiveDistribution& pred);

struct AlignCommand {
  std::optional<std::string> reference;
  std::size_t grid = 25;
  std::optional<double> duration;  // rescale the aligned set to this duration
};

AlignmentResult run_align(const DemonstrationSet& set, const AlignCommand& cmd);
CsvTable warp_path_table(const DemonstrationSet& set, const AlignmentResult& result);

/// Pooled and per-output R^2 of the bundle on every sample of a test set, as JSON.
json evaluate_models(const ModelBundle& bundle, const DemonstrationSet& test);

/// Runs align -> fit -> predict -> evaluate from a JSON config; returns the report.
json run_pipeline(const std::filesystem::path& config, const GlobalOptions& global);

/// Parses and runs a command line (without the program name). Returns the exit code:
/// 0 ok, 2 usage, 3 data, 4 numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lfdgp

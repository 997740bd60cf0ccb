// Copyright 2026 The SlideQC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLIDEQC_PIPELINE_H_
#define SLIDEQC_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "slideqc/calibration.h"
#include "slideqc/experts.h"
#include "slideqc/metrics.h"
#include "slideqc/moe.h"
#include "slideqc/postprocess.h"
#include "slideqc/tiler.h"
#include "slideqc/wsi_store.h"

namespace slideqc {

// Stage-level entry points shared by the command-line tool and the
// integration tests. Each stage logs nothing; callers decide what to print.

enum class InferMode { kMoE, kMulticlass };

InferMode ParseInferMode(const std::string& s);

// --- tile ------------------------------------------------------------------

struct TileResult {
  GridPlan plan;
  bool degenerate = false;
  bool labeled = false;
  ClassCounts counts{};
  std::size_t n_patches = 0;
};

/// Tiles a slide directory into `out_dir`: grid_plan.json plus the patches,
/// written per class when the slide has annotations and under unlabeled/
/// otherwise.
TileResult RunTile(const std::filesystem::path& slide_dir,
                   const std::filesystem::path& out_dir, const GridOptions& grid,
                   int workers);

// --- train -----------------------------------------------------------------

/// "blood".."fold" for a binary expert, "multiclass" for the 6-class model.
bool IsValidTask(const std::string& task);

/// Binary tasks keep artifact-free patches (label 1) and patches of the
/// task's class (label 0); multiclass keeps everything with its class id.
std::vector<LabeledFeatures> BuildTaskDataset(std::span<const PatchRecord> patches,
                                              const std::string& task,
                                              const FeatureConfig& features = {});

struct TrainRun {
  TrainResult result;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  double train_accuracy = 0;
  double val_accuracy = 0;
};

/// Trains a task model on patch directories. Without a validation root a
/// seeded 80/20 split of `patches_root` is used.
TrainRun RunTrain(const std::filesystem::path& patches_root,
                  const std::optional<std::filesystem::path>& val_root,
                  const std::string& task, const TrainConfig& config);

/// Same as RunTrain on already loaded patches.
TrainRun TrainOnPatches(std::span<const PatchRecord> train,
                        std::span<const PatchRecord> val, const std::string& task,
                        const TrainConfig& config);

// --- model sets --------------------------------------------------------------

/// Looks for <dir>/<task>.json (trained) or <dir>/<task>/ (external).
std::filesystem::path ResolveModelPath(const std::filesystem::path& models_dir,
                                       const std::string& task);

MoEConfig LoadMoE(const std::filesystem::path& models_dir, double t_s);
MulticlassConfig LoadMulticlass(const std::filesystem::path& models_dir, double t_s);

// --- calibrate ---------------------------------------------------------------

/// Scores labeled validation patches (fused p_artifact_free for the MoE) and
/// picks t_s for the target sensitivity.
CalibrationResult CalibrateOnPatches(std::span<const PatchRecord> patches,
                                     const std::function<std::vector<double>(
                                         std::span<const PatchRecord>)>& scorer,
                                     double target_sensitivity);

CalibrationResult RunCalibrate(const std::filesystem::path& models_dir,
                               const std::filesystem::path& val_root, InferMode mode,
                               double target_sensitivity, int workers);

// --- infer -------------------------------------------------------------------

struct InferOptions {
  GridOptions grid;
  double tau = 0.5;
  FillMode fill = FillMode::kZero;
  int close_kernel = 3;
  int workers = 1;
  /// Store measured patches/second in report.json. Off by default so the
  /// report is byte-identical across runs and worker counts.
  bool record_throughput = false;
};

using PatchClassifier =
    std::function<std::vector<Decision>(std::span<const PatchRecord>, int workers)>;

PatchClassifier MakeClassifier(const MoEConfig& config);
PatchClassifier MakeClassifier(const MulticlassConfig& config);

struct InferOutputs {
  std::vector<Decision> decisions;
  SegmentationMatrix matrix;
  QcReport report;
  BinaryMask closed_mask;  // stride resolution
  Raster seg_map;
  LabelRaster roi_mask;    // slide resolution, 0/255
  Raster masked_slide;
  bool degenerate_foreground = false;
  double seconds = 0;
};

/// Foreground, grid, classification and post-processing for one slide. A
/// slide with no tissue cells produces an all-background report with rho 0
/// and verdict discard.
InferOutputs InferSlide(const Slide& slide, const PatchClassifier& classify,
                        const InferOptions& options);

/// decisions.jsonl, report.json, seg_map.png, roi_mask.png, masked_slide.png.
void WriteInferOutputs(const std::filesystem::path& out_dir, const InferOutputs& out);

// --- eval --------------------------------------------------------------------

/// Class of the 224 cell at (x, y) under a per-pixel truth raster: the most
/// frequent non-255 label (smaller id on ties), 255 when no pixel is labeled.
std::uint8_t CellTruthLabel(const LabelRaster& truth, int x, int y);

struct EvalResult {
  ConfusionCounts confusion;
  ClassificationMetrics metrics;
  double dice = 0;         // binary artifact-free mask, before closing
  double dice_closed = 0;  // after closing
  double kappa = 0;
  double multiclass_accuracy = 0;
  double rho_pred = 0;
  double rho_truth = 0;
  std::size_t n_cells = 0;
  SegmentationMatrix truth_matrix;
};

/// Compares decisions with the truth raster at stride resolution over the
/// cells that received a decision and have labeled pixels.
EvalResult Evaluate(std::span<const Decision> decisions, const LabelRaster& truth,
                    int close_kernel = 3);

nlohmann::json EvalToJson(const EvalResult& e);

EvalResult RunEval(const std::filesystem::path& results_dir,
                   const std::filesystem::path& truth_dir);

// --- bench -------------------------------------------------------------------

struct BenchRow {
  std::string name;
  ComplexityProfile profile;
};

/// One row per model plus a whole-pipeline row.
std::vector<BenchRow> RunBench(const std::filesystem::path& models_dir,
                               const std::filesystem::path& patches_root,
                               InferMode mode, int repeats);

nlohmann::json BenchToJson(std::span<const BenchRow> rows);

}  // namespace slideqc

#endif  // SLIDEQC_PIPELINE_H_

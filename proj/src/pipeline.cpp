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

#include "slideqc/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "slideqc/backend.h"
#include "slideqc/errors.h"
#include "slideqc/parallel.h"
#include "slideqc/png_io.h"
#include "slideqc/synthgen.h"

namespace slideqc {

namespace fs = std::filesystem;
using nlohmann::json;

InferMode ParseInferMode(const std::string& s) {
  if (s == "moe") return InferMode::kMoE;
  if (s == "multiclass") return InferMode::kMulticlass;
  throw ValidationError("mode must be moe or multiclass, got '" + s + "'");
}

// --- tile ------------------------------------------------------------------

TileResult RunTile(const fs::path& slide_dir, const fs::path& out_dir,
                   const GridOptions& grid, int workers) {
  const Slide slide = LoadSlide(slide_dir);
  const ForegroundMask fg = ExtractForeground(slide.raster, workers);
  std::optional<LabelRaster> labels;
  if (slide.annotations) {
    labels = RasterizeAnnotations(*slide.annotations, slide.raster.width,
                                  slide.raster.height);
  }
  TileResult result;
  result.degenerate = fg.degenerate;
  result.labeled = labels.has_value();
  result.plan = PlanGrid(fg, labels ? &*labels : nullptr, grid);
  const std::vector<PatchRecord> patches =
      ExtractPatches(slide.raster, slide.manifest.slide_id, result.plan, workers);
  result.n_patches = patches.size();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("cannot create " + out_dir.string());
  if (result.labeled) {
    result.counts = SavePatchDataset(patches, out_dir);
  } else {
    const fs::path dir = out_dir / "unlabeled";
    fs::create_directories(dir, ec);
    if (ec) throw RuntimeError("cannot create " + dir.string());
    for (const auto& p : patches) {
      WritePngRgb(dir / PatchFileName(p.slide_id, p.x, p.y), p.pixels);
    }
  }
  WriteJsonFile(out_dir / "grid_plan.json", GridPlanToJson(result.plan));
  return result;
}

// --- train -----------------------------------------------------------------

bool IsValidTask(const std::string& task) {
  if (task == "multiclass") return true;
  return std::find(kExpertTasks.begin(), kExpertTasks.end(), task) != kExpertTasks.end();
}

std::vector<LabeledFeatures> BuildTaskDataset(std::span<const PatchRecord> patches,
                                              const std::string& task,
                                              const FeatureConfig& features) {
  if (!IsValidTask(task)) throw ValidationError("unknown task '" + task + "'");
  const bool multiclass = task == "multiclass";
  const int task_class = multiclass ? -1 : ClassIdFromName(task);
  std::vector<const PatchRecord*> keep;
  std::vector<int> labels;
  for (const auto& p : patches) {
    if (!p.label) continue;
    const int c = *p.label;
    if (multiclass) {
      keep.push_back(&p);
      labels.push_back(c);
    } else if (c == 0 || c == task_class) {
      keep.push_back(&p);
      labels.push_back(c == 0 ? 1 : 0);
    }
  }
  std::vector<LabeledFeatures> out(keep.size());
  ParallelFor(keep.size(), 0, [&](std::size_t i) {
    out[i].x = ExtractFeatures(keep[i]->pixels, features);
    out[i].label = labels[i];
  });
  return out;
}

TrainRun TrainOnPatches(std::span<const PatchRecord> train,
                        std::span<const PatchRecord> val, const std::string& task,
                        const TrainConfig& config) {
  const std::vector<LabeledFeatures> xs = BuildTaskDataset(train, task);
  const std::vector<LabeledFeatures> vs = BuildTaskDataset(val, task);
  TrainRun run;
  run.n_train = xs.size();
  run.n_val = vs.size();
  run.result = Train(xs, vs, task == "multiclass" ? kNumClasses : 2, config);
  run.train_accuracy = Accuracy(run.result.weights, xs);
  run.val_accuracy = Accuracy(run.result.weights, vs);
  return run;
}

TrainRun RunTrain(const fs::path& patches_root, const std::optional<fs::path>& val_root,
                  const std::string& task, const TrainConfig& config) {
  if (!IsValidTask(task)) throw ValidationError("unknown task '" + task + "'");
  std::vector<PatchRecord> train = LoadPatchDataset(patches_root);
  std::vector<PatchRecord> val;
  if (val_root) {
    val = LoadPatchDataset(*val_root);
  } else {
    // Seeded hold-out: every fifth patch of a shuffled order.
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed ^ 0x7a11);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<PatchRecord> kept;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i % 5 == 4 ? val : kept).push_back(std::move(train[order[i]]));
    }
    train = std::move(kept);
  }
  return TrainOnPatches(train, val, task, config);
}

// --- model sets --------------------------------------------------------------

fs::path ResolveModelPath(const fs::path& models_dir, const std::string& task) {
  if (!fs::is_directory(models_dir)) {
    throw ValidationError("models directory not found: " + models_dir.string());
  }
  const fs::path file = models_dir / (task + ".json");
  if (fs::is_regular_file(file)) return file;
  const fs::path dir = models_dir / task;
  if (fs::is_directory(dir)) return dir;
  throw ValidationError("no model for task '" + task + "' in " + models_dir.string());
}

MoEConfig LoadMoE(const fs::path& models_dir, double t_s) {
  MoEConfig config;
  config.t_s = t_s;
  for (int i = 0; i < kNumArtifacts; ++i) {
    const std::string task(kExpertTasks[i]);
    std::shared_ptr<Expert> e = LoadExpert(ResolveModelPath(models_dir, task));
    if (e->class_count() != 2) {
      throw ValidationError("expert '" + task + "' must be binary");
    }
    config.experts[i] = std::move(e);
  }
  return config;
}

MulticlassConfig LoadMulticlass(const fs::path& models_dir, double t_s) {
  MulticlassConfig config;
  config.t_s = t_s;
  config.model = LoadExpert(ResolveModelPath(models_dir, "multiclass"));
  if (config.model->class_count() != kNumClasses) {
    throw ValidationError("multiclass model must have 6 classes");
  }
  return config;
}

// --- calibrate ---------------------------------------------------------------

CalibrationResult CalibrateOnPatches(
    std::span<const PatchRecord> patches,
    const std::function<std::vector<double>(std::span<const PatchRecord>)>& scorer,
    double target_sensitivity) {
  std::vector<PatchRecord> labeled;
  for (const auto& p : patches) {
    if (p.label) labeled.push_back(p);
  }
  const std::vector<double> scores = scorer(labeled);
  std::vector<ScoredExample> examples(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    examples[i] = {scores[i], *labeled[i].label == 0};
  }
  return Calibrate(examples, target_sensitivity);
}

CalibrationResult RunCalibrate(const fs::path& models_dir, const fs::path& val_root,
                               InferMode mode, double target_sensitivity, int workers) {
  const std::vector<PatchRecord> patches = LoadPatchDataset(val_root);
  if (mode == InferMode::kMoE) {
    const MoEConfig config = LoadMoE(models_dir, 0.5);
    return CalibrateOnPatches(
        patches,
        [&](std::span<const PatchRecord> ps) { return ArtifactFreeScores(ps, config, workers); },
        target_sensitivity);
  }
  const MulticlassConfig config = LoadMulticlass(models_dir, 0.5);
  return CalibrateOnPatches(
      patches,
      [&](std::span<const PatchRecord> ps) { return ArtifactFreeScores(ps, config, workers); },
      target_sensitivity);
}

// --- infer -------------------------------------------------------------------

PatchClassifier MakeClassifier(const MoEConfig& config) {
  return [config](std::span<const PatchRecord> patches, int workers) {
    return ClassifySlide(patches, config, workers);
  };
}

PatchClassifier MakeClassifier(const MulticlassConfig& config) {
  return [config](std::span<const PatchRecord> patches, int workers) {
    return ClassifySlide(patches, config, workers);
  };
}

InferOutputs InferSlide(const Slide& slide, const PatchClassifier& classify,
                        const InferOptions& options) {
  const Raster& raster = slide.raster;
  const ForegroundMask fg = ExtractForeground(raster, options.workers);
  const GridPlan plan = PlanGrid(fg, nullptr, options.grid);
  const std::vector<PatchRecord> patches =
      ExtractPatches(raster, slide.manifest.slide_id, plan, options.workers);

  InferOutputs out;
  out.degenerate_foreground = fg.degenerate;
  const auto t0 = std::chrono::steady_clock::now();
  out.decisions = classify(patches, options.workers);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.matrix = FillMatrix(out.decisions, raster.width, raster.height);
  if (out.decisions.empty()) {
    out.report.tau = options.tau;
    out.report.accept = false;
  } else {
    out.report = ArtifactReport(out.matrix, options.tau);
  }
  if (options.record_throughput && out.seconds > 0) {
    out.report.throughput_pps = static_cast<double>(patches.size()) / out.seconds;
  }
  out.closed_mask = MorphClose(BinarizeMask(out.matrix), options.close_kernel);
  const BinaryMask pixel_mask = ResizeNearest(out.closed_mask, raster.height, raster.width);
  out.roi_mask = MaskToImage(pixel_mask);
  out.masked_slide = ApplyMask(raster, pixel_mask, options.fill);
  out.seg_map = RenderSegmentation(out.matrix);
  return out;
}

void WriteInferOutputs(const fs::path& out_dir, const InferOutputs& out) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("cannot create " + out_dir.string());
  {
    std::ofstream f(out_dir / "decisions.jsonl", std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeError("cannot write " + (out_dir / "decisions.jsonl").string());
    f << DecisionsToJsonl(out.decisions);
  }
  WriteJsonFile(out_dir / "report.json", ReportToJson(out.report));
  WritePngRgb(out_dir / "seg_map.png", out.seg_map);
  WritePngGray(out_dir / "roi_mask.png", out.roi_mask);
  WritePngRgb(out_dir / "masked_slide.png", out.masked_slide);
}

// --- eval --------------------------------------------------------------------

std::uint8_t CellTruthLabel(const LabelRaster& truth, int x, int y) {
  std::array<std::size_t, kNumClasses> cover{};
  const int x1 = std::min(truth.width, x + kPatchSize);
  const int y1 = std::min(truth.height, y + kPatchSize);
  for (int yy = y; yy < y1; ++yy) {
    for (int xx = x; xx < x1; ++xx) {
      const std::uint8_t l = truth.At(xx, yy);
      if (l < kNumClasses) ++cover[l];
    }
  }
  int best = -1;
  for (int k = 0; k < kNumClasses; ++k) {
    if (cover[k] > 0 && (best < 0 || cover[k] > cover[best])) best = k;
  }
  return best < 0 ? kUnlabeled : static_cast<std::uint8_t>(best);
}

EvalResult Evaluate(std::span<const Decision> decisions, const LabelRaster& truth,
                    int close_kernel) {
  EvalResult e;
  std::vector<Decision> kept;
  e.truth_matrix = EmptyMatrix(truth.width, truth.height);
  std::vector<int> pred_labels, truth_labels;
  std::vector<bool> pred_pos, truth_pos;
  for (const auto& d : decisions) {
    const std::uint8_t t = CellTruthLabel(truth, d.x, d.y);
    if (t == kUnlabeled) continue;
    kept.push_back(d);
    pred_labels.push_back(d.label);
    truth_labels.push_back(t);
    pred_pos.push_back(d.label == 0);
    truth_pos.push_back(t == 0);
  }
  if (kept.empty()) throw ValidationError("eval: no decision overlaps labeled truth");
  const SegmentationMatrix pred = FillMatrix(kept, truth.width, truth.height);
  for (const auto& d : kept) {
    e.truth_matrix.At(d.y / kPatchSize, d.x / kPatchSize) =
        CellTruthLabel(truth, d.x, d.y);
  }
  e.n_cells = kept.size();
  {
    std::unique_ptr<bool[]> pp(new bool[kept.size()]);
    std::unique_ptr<bool[]> tp(new bool[kept.size()]);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      pp[i] = pred_pos[i];
      tp[i] = truth_pos[i];
    }
    e.confusion = CountConfusion(std::span<const bool>(pp.get(), kept.size()),
                                 std::span<const bool>(tp.get(), kept.size()));
  }
  e.metrics = ComputeClassificationMetrics(e.confusion);
  const BinaryMask pm = BinarizeMask(pred);
  const BinaryMask tm = BinarizeMask(e.truth_matrix);
  e.dice = Dice(pm, tm);
  e.dice_closed = Dice(MorphClose(pm, close_kernel), MorphClose(tm, close_kernel));
  e.kappa = CohenKappa(pred_labels, truth_labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred_labels.size(); ++i) hits += pred_labels[i] == truth_labels[i];
  e.multiclass_accuracy = static_cast<double>(hits) / static_cast<double>(kept.size());
  e.rho_pred = ArtifactReport(pred, 0.0).rho;
  e.rho_truth = ArtifactReport(e.truth_matrix, 0.0).rho;
  return e;
}

json EvalToJson(const EvalResult& e) {
  json j = MetricsToJson(e.metrics);
  j["tp"] = e.confusion.tp;
  j["fp"] = e.confusion.fp;
  j["tn"] = e.confusion.tn;
  j["fn"] = e.confusion.fn;
  j["dice"] = e.dice;
  j["dice_closed"] = e.dice_closed;
  j["kappa"] = e.kappa;
  j["multiclass_accuracy"] = e.multiclass_accuracy;
  j["rho_pred"] = e.rho_pred;
  j["rho_truth"] = e.rho_truth;
  j["n_cells"] = e.n_cells;
  return j;
}

EvalResult RunEval(const fs::path& results_dir, const fs::path& truth_dir) {
  const fs::path decisions_path = results_dir / "decisions.jsonl";
  std::ifstream in(decisions_path);
  if (!in) throw ValidationError("cannot open " + decisions_path.string());
  const std::vector<Decision> decisions = DecisionsFromJsonl(in);
  const LabelRaster truth = LoadTruth(truth_dir);
  return Evaluate(decisions, truth);
}

// --- bench -------------------------------------------------------------------

std::vector<BenchRow> RunBench(const fs::path& models_dir, const fs::path& patches_root,
                               InferMode mode, int repeats) {
  const std::vector<PatchRecord> patches = LoadPatchDataset(patches_root);
  if (patches.empty()) throw ValidationError("bench: no patches in " + patches_root.string());
  std::vector<BenchRow> rows;
  if (mode == InferMode::kMoE) {
    const MoEConfig config = LoadMoE(models_dir, 0.5);
    ModelComplexity total;
    for (int i = 0; i < kNumArtifacts; ++i) {
      rows.push_back({std::string(kExpertTasks[i]),
                      ThroughputBench(*config.experts[i], patches, repeats)});
      const ModelComplexity c = config.experts[i]->Complexity();
      total.param_count += c.param_count;
      total.flop_count += c.flop_count;
    }
    rows.push_back({"moe", ThroughputBench(
                               [&](std::span<const PatchRecord> ps) {
                                 (void)ClassifySlide(ps, config, 1);
                               },
                               total, patches, repeats)});
  } else {
    const MulticlassConfig config = LoadMulticlass(models_dir, 0.5);
    rows.push_back({"multiclass", ThroughputBench(*config.model, patches, repeats)});
  }
  return rows;
}

json BenchToJson(std::span<const BenchRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name},
                   {"param_count", r.profile.param_count},
                   {"flop_count", r.profile.flop_count},
                   {"throughput_pps", r.profile.throughput_pps},
                   {"timings_s", r.profile.timings_s}});
  }
  return out;
}

}  // namespace slideqc

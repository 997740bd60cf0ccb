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


// slideqc: command-line front end for the artifact QC pipeline.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slideqc/backend.h"
#include "slideqc/calibration.h"
#include "slideqc/errors.h"
#include "slideqc/experts.h"
#include "slideqc/metrics.h"
#include "slideqc/pipeline.h"
#include "slideqc/synthgen.h"
#include "slideqc/wsi_store.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slideqc;

namespace {

// Options settable from the JSON config file. A value from the config is
// used only when the flag was not given on the command line.
class Registry {
 public:
  template <typename T>
  CLI::Option* Add(CLI::App* sub, const std::string& name, T& var,
                   const std::string& help) {
    CLI::Option* opt = sub->add_option("--" + name, var, help)->capture_default_str();
    setters_[sub->get_name()][name] = {opt, [&var, name](const json& j) {
                                         try {
                                           var = j.get<T>();
                                         } catch (const json::exception&) {
                                           throw ValidationError("config: bad value for '" +
                                                                 name + "'");
                                         }
                                       }};
    return opt;
  }

  CLI::Option* AddFlag(CLI::App* sub, const std::string& name, bool& var,
                       const std::string& help) {
    CLI::Option* opt = sub->add_flag("--" + name, var, help);
    setters_[sub->get_name()][name] = {opt, [&var, name](const json& j) {
                                         if (!j.is_boolean()) {
                                           throw ValidationError("config: '" + name +
                                                                 "' must be a boolean");
                                         }
                                         var = j.get<bool>();
                                       }};
    return opt;
  }

  // Config layout: {"<subcommand>": {"<flag-name>": value, ...}, ...}.
  void ApplyConfig(const fs::path& path, const std::string& sub) {
    const json cfg = ReadJsonFile(path);
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object: " + path.string());
    if (!cfg.contains(sub)) return;
    const json& section = cfg.at(sub);
    if (!section.is_object()) {
      throw ValidationError("config section '" + sub + "' must be an object");
    }
    auto& table = setters_[sub];
    for (const auto& [key, value] : section.items()) {
      auto it = table.find(key);
      if (it == table.end()) {
        throw ValidationError("config: unknown option '" + key + "' for " + sub);
      }
      if (it->second.opt->count() == 0) {
        it->second.set(value);
        configured_.insert(sub + "." + key);
      }
    }
  }

  // Set by a flag or by the config file.
  bool Given(const std::string& sub, const std::string& name) {
    return setters_[sub].at(name).opt->count() > 0 || configured_.contains(sub + "." + name);
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const json&)> set;
  };
  std::map<std::string, std::map<std::string, Entry>> setters_;
  std::set<std::string> configured_;
};

void RequireDir(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " is required");
  if (!fs::is_directory(path)) throw ValidationError(what + " not found: " + path);
}

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " is required");
  if (!fs::is_regular_file(path)) throw ValidationError(what + " not found: " + path);
}

void RequireOut(const std::string& path) {
  if (path.empty()) throw ValidationError("--out is required");
}

void EnsureParent(const fs::path& file) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw RuntimeError("cannot create " + file.parent_path().string());
  }
}

void Log(const std::string& stage, const std::string& msg) {
  std::cerr << "[" << stage << "] " << msg << "\n";
}

std::string Fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Histological artifact detection and slide quality control"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; per-subcommand sections, flags take precedence");
  Registry reg;

  // synth
  std::string synth_spec, synth_out, synth_id = "synth";
  CLI::App* synth = app.add_subcommand("synth", "Generate one synthetic slide from a spec");
  reg.Add(synth, "spec", synth_spec, "Synthetic slide spec (JSON)");
  reg.Add(synth, "out", synth_out, "Output slide directory");
  reg.Add(synth, "id", synth_id, "Slide id written to the manifest");

  // corpus
  CorpusOptions corpus_opts;
  std::string corpus_out;
  int corpus_seed = static_cast<int>(corpus_opts.seed);
  CLI::App* corpus = app.add_subcommand("corpus", "Generate a split synthetic corpus");
  reg.Add(corpus, "out", corpus_out, "Output root directory");
  reg.Add(corpus, "n-slides", corpus_opts.n_slides, "Number of slides");
  reg.Add(corpus, "seed", corpus_seed, "Corpus seed");
  reg.Add(corpus, "slide-size", corpus_opts.slide_size, "Slide width and height in pixels");
  reg.Add(corpus, "workers", corpus_opts.workers, "Worker threads (0 = all cores)");

  // tile
  std::string tile_slide, tile_out;
  GridOptions tile_grid;
  int tile_workers = 1;
  CLI::App* tile = app.add_subcommand("tile", "Tile a slide into 224x224 patches");
  reg.Add(tile, "slide", tile_slide, "Slide directory");
  reg.Add(tile, "out", tile_out, "Patch output root");
  reg.Add(tile, "min-overlap", tile_grid.min_overlap, "Minimum label coverage of a patch");
  reg.Add(tile, "min-fg", tile_grid.min_fg_fraction, "Minimum foreground fraction of a patch");
  reg.Add(tile, "workers", tile_workers, "Worker threads (0 = all cores)");

  // train
  std::string train_patches, train_val, train_task, train_out;
  TrainConfig train_cfg;
  int train_seed = 0;
  CLI::App* train = app.add_subcommand("train", "Train a binary expert or the multiclass model");
  reg.Add(train, "patches", train_patches, "Training patch root");
  reg.Add(train, "val", train_val, "Validation patch root (default: 20% hold-out)");
  reg.Add(train, "task", train_task, "blood|blur|bubble|damage|fold|multiclass");
  reg.Add(train, "out", train_out, "Output model file (JSON)");
  reg.Add(train, "seed", train_seed, "Shuffle seed");
  reg.Add(train, "lr", train_cfg.learning_rate, "Initial learning rate");
  reg.Add(train, "batch-size", train_cfg.batch_size, "Mini-batch size");
  reg.Add(train, "max-epochs", train_cfg.max_epochs, "Epoch limit");
  reg.Add(train, "patience", train_cfg.patience, "Early-stopping patience in epochs");

  // calibrate
  std::string cal_models, cal_patches, cal_out, cal_mode = "moe";
  double cal_target = 0.98;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Pick t_s from validation ROC");
  reg.Add(calibrate, "models", cal_models, "Model directory");
  reg.Add(calibrate, "patches", cal_patches, "Validation patch root");
  reg.Add(calibrate, "target-sens", cal_target, "Target artifact-free sensitivity");
  reg.Add(calibrate, "mode", cal_mode, "moe|multiclass");
  reg.Add(calibrate, "out", cal_out, "Output calibration file (JSON)");

  // infer
  std::string inf_slide, inf_models, inf_calib, inf_out, inf_mode = "moe", inf_fill = "zero";
  InferOptions inf_opts;
  double inf_ts = 0.5;
  CLI::App* infer = app.add_subcommand("infer", "Classify a slide and write QC outputs");
  reg.Add(infer, "slide", inf_slide, "Slide directory");
  reg.Add(infer, "models", inf_models, "Model directory");
  reg.Add(infer, "calib", inf_calib, "Calibration file; its t_s replaces --ts");
  reg.Add(infer, "ts", inf_ts, "Artifact-free probability threshold without --calib");
  reg.Add(infer, "mode", inf_mode, "moe|multiclass");
  reg.Add(infer, "out", inf_out, "Results directory");
  reg.Add(infer, "tau", inf_opts.tau, "Acceptance threshold on rho");
  reg.Add(infer, "fill", inf_fill, "zero|white fill for masked pixels");
  reg.Add(infer, "close-kernel", inf_opts.close_kernel, "Closing kernel size (odd)");
  reg.Add(infer, "min-fg", inf_opts.grid.min_fg_fraction, "Minimum foreground fraction of a patch");
  reg.Add(infer, "workers", inf_opts.workers, "Worker threads (0 = all cores)");
  reg.AddFlag(infer, "record-throughput", inf_opts.record_throughput,
              "Store measured patches/second in report.json");

  // eval
  std::string ev_results, ev_truth, ev_out;
  int ev_kernel = 3;
  CLI::App* eval = app.add_subcommand("eval", "Score inference results against truth");
  reg.Add(eval, "results", ev_results, "Results directory from infer");
  reg.Add(eval, "truth", ev_truth, "Slide directory holding truth.png");
  reg.Add(eval, "out", ev_out, "Output metrics file (JSON)");
  reg.Add(eval, "close-kernel", ev_kernel, "Closing kernel size for dice_closed");

  // bench
  std::string b_models, b_model, b_patches, b_out, b_mode = "moe";
  int b_repeats = 5;
  CLI::App* bench = app.add_subcommand("bench", "Measure complexity and throughput");
  reg.Add(bench, "models", b_models, "Model directory");
  reg.Add(bench, "model", b_model, "Single model file or external model directory");
  reg.Add(bench, "patches", b_patches, "Patch root");
  reg.Add(bench, "repeats", b_repeats, "Timed repeats");
  reg.Add(bench, "mode", b_mode, "moe|multiclass");
  reg.Add(bench, "out", b_out, "Optional JSON output");

  // hs-stats
  std::string hs_patches, hs_out;
  CLI::App* hs = app.add_subcommand("hs-stats", "Per-patch hue and saturation means");
  reg.Add(hs, "patches", hs_patches, "Patch root");
  reg.Add(hs, "out", hs_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string stage = sub->get_name();
  try {
    if (!config_path.empty()) reg.ApplyConfig(config_path, stage);
    auto workers_fallback = [&](int& workers) {
      if (reg.Given(stage, "workers")) return;
      if (const char* env = std::getenv("SLIDEQC_WORKERS")) {
        try {
          workers = std::stoi(env);
        } catch (const std::exception&) {
          throw ValidationError(std::string("SLIDEQC_WORKERS is not an integer: ") + env);
        }
      }
    };

    if (sub == synth) {
      RequireFile(synth_spec, "--spec");
      RequireOut(synth_out);
      const SynthSpec spec = SynthSpecFromJson(ReadJsonFile(synth_spec));
      SaveSynthSlide(synth_out, GenerateSlide(spec, synth_id));
      Log(stage, "wrote " + synth_out + " (" + std::to_string(spec.width) + "x" +
                     std::to_string(spec.height) + ")");
    } else if (sub == corpus) {
      RequireOut(corpus_out);
      if (!reg.Given(stage, "workers") && std::getenv("SLIDEQC_WORKERS")) {
        workers_fallback(corpus_opts.workers);
      }
      if (corpus_opts.n_slides < 3) throw ValidationError("--n-slides must be >= 3");
      if (corpus_seed < 0) throw ValidationError("--seed must be >= 0");
      corpus_opts.seed = static_cast<std::uint64_t>(corpus_seed);
      const CorpusSummary s = GenerateCorpus(corpus_opts, corpus_out);
      Log(stage, "wrote " + corpus_out + " train/val/test = " +
                     std::to_string(s.counts.train) + "/" + std::to_string(s.counts.val) +
                     "/" + std::to_string(s.counts.test) + " slides");
    } else if (sub == tile) {
      RequireDir(tile_slide, "slide directory");
      RequireOut(tile_out);
      workers_fallback(tile_workers);
      const TileResult r = RunTile(tile_slide, tile_out, tile_grid, tile_workers);
      if (r.degenerate) Log(stage, "warning: single-valued slide, empty foreground");
      Log(stage, "wrote " + std::to_string(r.n_patches) + " patches to " + tile_out +
                     (r.labeled ? "" : " (unlabeled)"));
    } else if (sub == train) {
      RequireDir(train_patches, "patch root");
      if (!train_val.empty()) RequireDir(train_val, "validation patch root");
      RequireOut(train_out);
      if (!IsValidTask(train_task)) {
        throw ValidationError("--task must be blood|blur|bubble|damage|fold|multiclass");
      }
      if (train_seed < 0) throw ValidationError("--seed must be >= 0");
      train_cfg.seed = static_cast<std::uint64_t>(train_seed);
      std::optional<fs::path> val;
      if (!train_val.empty()) val = train_val;
      const TrainRun run = RunTrain(train_patches, val, train_task, train_cfg);
      if (run.n_train == 0 || run.n_val == 0) {
        throw ValidationError("no training or validation patches for task " + train_task);
      }
      EnsureParent(train_out);
      FeatureModel(run.result.weights).Save(train_out);
      Log(stage, train_task + ": " + std::to_string(run.n_train) + " train / " +
                     std::to_string(run.n_val) + " val, best epoch " +
                     std::to_string(run.result.best_epoch) + ", val acc " +
                     Fixed(run.val_accuracy, 4) + " -> " + train_out);
    } else if (sub == calibrate) {
      RequireDir(cal_models, "models directory");
      RequireDir(cal_patches, "validation patch root");
      RequireOut(cal_out);
      if (!(cal_target > 0 && cal_target <= 1)) {
        throw ValidationError("--target-sens must be in (0, 1]");
      }
      const CalibrationResult c =
          RunCalibrate(cal_models, cal_patches, ParseInferMode(cal_mode), cal_target, 1);
      EnsureParent(cal_out);
      WriteJsonFile(cal_out, CalibrationToJson(c));
      Log(stage, "t_s " + Fixed(c.t_s, 6) + ", auc " + Fixed(c.auc, 4) + ", tpr " +
                     Fixed(c.achieved_tpr, 4) + " -> " + cal_out);
    } else if (sub == infer) {
      RequireDir(inf_slide, "slide directory");
      RequireDir(inf_models, "models directory");
      RequireOut(inf_out);
      workers_fallback(inf_opts.workers);
      if (!(inf_opts.tau >= 0 && inf_opts.tau <= 1)) throw ValidationError("--tau must be in [0, 1]");
      if (inf_fill == "zero") {
        inf_opts.fill = FillMode::kZero;
      } else if (inf_fill == "white") {
        inf_opts.fill = FillMode::kWhite;
      } else {
        throw ValidationError("--fill must be zero or white");
      }
      double t_s = inf_ts;
      if (!inf_calib.empty()) {
        RequireFile(inf_calib, "calibration file");
        t_s = CalibrationFromJson(ReadJsonFile(inf_calib)).t_s;
      }
      if (!(t_s >= 0 && t_s <= 1)) throw ValidationError("t_s must be in [0, 1]");
      const InferMode mode = ParseInferMode(inf_mode);
      const Slide slide = LoadSlide(inf_slide);
      const PatchClassifier classify = mode == InferMode::kMoE
                                           ? MakeClassifier(LoadMoE(inf_models, t_s))
                                           : MakeClassifier(LoadMulticlass(inf_models, t_s));
      const InferOutputs out = InferSlide(slide, classify, inf_opts);
      if (out.degenerate_foreground) Log(stage, "warning: single-valued slide, empty foreground");
      WriteInferOutputs(inf_out, out);
      Log(stage, std::to_string(out.decisions.size()) + " patches, rho " +
                     Fixed(out.report.rho, 4) + ", " +
                     (out.report.accept ? "accept" : "discard") + " -> " + inf_out);
    } else if (sub == eval) {
      RequireDir(ev_results, "results directory");
      RequireDir(ev_truth, "truth directory");
      RequireOut(ev_out);
      const fs::path decisions_path = fs::path(ev_results) / "decisions.jsonl";
      std::ifstream in(decisions_path);
      if (!in) throw ValidationError("cannot open " + decisions_path.string());
      const EvalResult r = Evaluate(DecisionsFromJsonl(in), LoadTruth(ev_truth), ev_kernel);
      EnsureParent(ev_out);
      WriteJsonFile(ev_out, EvalToJson(r));
      Log(stage, std::to_string(r.n_cells) + " cells, dice " + Fixed(r.dice, 4) + ", kappa " +
                     Fixed(r.kappa, 4) + " -> " + ev_out);
    } else if (sub == bench) {
      RequireDir(b_patches, "patch root");
      if (b_repeats < 1) throw ValidationError("--repeats must be >= 1");
      std::vector<BenchRow> rows;
      if (!b_model.empty()) {
        if (!fs::exists(b_model)) throw ValidationError("model not found: " + b_model);
        const std::vector<PatchRecord> patches = LoadPatchDataset(b_patches);
        if (patches.empty()) throw ValidationError("bench: no patches in " + b_patches);
        const auto expert = LoadExpert(b_model);
        rows.push_back({fs::path(b_model).filename().string(),
                        ThroughputBench(*expert, patches, b_repeats)});
      } else {
        RequireDir(b_models, "models directory");
        rows = RunBench(b_models, b_patches, ParseInferMode(b_mode), b_repeats);
      }
      std::printf("%-14s %14s %16s %14s\n", "model", "params", "flops", "patches/s");
      for (const auto& r : rows) {
        std::printf("%-14s %14llu %16llu %14.2f\n", r.name.c_str(),
                    static_cast<unsigned long long>(r.profile.param_count),
                    static_cast<unsigned long long>(r.profile.flop_count),
                    r.profile.throughput_pps);
      }
      if (!b_out.empty()) {
        EnsureParent(b_out);
        WriteJsonFile(b_out, BenchToJson(rows));
      }
      Log(stage, std::to_string(rows.size()) + " rows");
    } else if (sub == hs) {
      RequireDir(hs_patches, "patch root");
      RequireOut(hs_out);
      const std::vector<PatchRecord> patches = LoadPatchDataset(hs_patches);
      const HsSummary s = HsStats(patches);
      EnsureParent(hs_out);
      std::ofstream f(hs_out, std::ios::binary | std::ios::trunc);
      if (!f) throw RuntimeError("cannot write " + hs_out);
      f << "patch_id,mean_hue,mean_sat\n";
      for (std::size_t i = 0; i < patches.size(); ++i) {
        std::string id = PatchFileName(patches[i].slide_id, patches[i].x, patches[i].y);
        id = id.substr(0, id.size() - 4);
        f << id << "," << Fixed(s.per_patch[i].mean_hue, 6) << ","
          << Fixed(s.per_patch[i].mean_saturation, 6) << "\n";
      }
      if (!f) throw RuntimeError("failed writing " + hs_out);
      Log(stage, std::to_string(patches.size()) + " patches, hue " + Fixed(s.hue_mean, 2) +
                     " +/- " + Fixed(s.hue_std, 2) + ", sat " + Fixed(s.saturation_mean, 3) +
                     " +/- " + Fixed(s.saturation_std, 3) + " -> " + hs_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "slideqc " << stage << ": error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeError& e) {
    std::cerr << "slideqc " << stage << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "slideqc " << stage << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

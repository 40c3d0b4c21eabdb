/*=========================================================================
 *
 *  Copyright The pouchreg Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "pouchreg/boundary.hpp"
#include "pouchreg/nonrigid.hpp"
#include "pouchreg/rigid.hpp"
#include "pouchreg/synth.hpp"

namespace pouchreg {

/// Everything a run can be configured with. The JSON form has one object per
/// stage ("rigid", "nonrigid", "refine", "synth") plus the two flags.
struct PipelineConfig {
  RigidConfig rigid;
  EnergyConfig nonrigid;
  RefineConfig refine;
  SynthSpec synth;
  bool refine_masks = false;         ///< snap every mask to image edges before registering
  bool warm_start_nonrigid = false;  ///< start each frame's lattices from the previous frame's

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::optional<std::filesystem::path>& path);
};

struct RunOptions {
  int jobs = 1;
  bool verbose = false;
  std::ostream* log = nullptr;  ///< progress and diagnostics; null silences them
};

/// Registers every frame of a sequence onto frame 0: optional mask
/// refinement, rigid alignment warm-started from the previous frame, then
/// the multi-level FFD. Resumes from out_dir/state.json when present.
int cmd_register(const std::filesystem::path& sequence_dir, const std::filesystem::path& masks_dir,
                 const PipelineConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Runs cmd_register on every subdirectory of `sequences_root`, with masks
/// from the same-named subdirectory of `masks_root` and outputs under
/// `out_root`. Sequences are independent and run on up to opts.jobs threads.
int cmd_register_batch(const std::filesystem::path& sequences_root, const std::filesystem::path& masks_root,
                       const PipelineConfig& cfg, const std::filesystem::path& out_root, const RunOptions& opts = {});

/// Registers each item of a synthetic dataset (s2 onto ref) independently.
int cmd_register_dataset(const std::filesystem::path& dataset_dir, const PipelineConfig& cfg,
                         const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Writes ref.pgm, mask.pgm, manifest.json and one directory per item
/// holding s1.pgm, s2.pgm, mask.pgm and truth.json.
int cmd_synth(const std::filesystem::path& ref_path, const std::filesystem::path& mask_path,
              const PipelineConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Same, with a generated phantom of the given size as the reference.
int cmd_synth_phantom(int size, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                      const RunOptions& opts = {});

/// Clean-registered RMSE per item against the identity baseline. Writes
/// eval.csv and eval_summary.csv into results_dir.
int cmd_eval(const std::filesystem::path& dataset_dir, const std::filesystem::path& results_dir,
             const RunOptions& opts = {});

int cmd_refine(const std::filesystem::path& image_path, const std::filesystem::path& mask_path,
               const PipelineConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Any of the optional pairs may be given; writes metric,value CSV to `out`.
struct MetricsRequest {
  std::optional<std::filesystem::path> mask_a, mask_b, image_a, image_b, region;
};
int cmd_metrics(const MetricsRequest& req, std::ostream& out, const RunOptions& opts = {});

/// Formats a double for CSV output (shortest form that round-trips).
std::string format_number(double v);

}  // namespace pouchreg

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
#include <iostream>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "pouchreg/pipeline.hpp"
#include "pouchreg/serialization.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pouchreg: mask-guided rigid + multi-level B-spline registration of time-lapse pouch images"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON config (see README for the schema)");
  app.add_option("--jobs", jobs, "worker threads for independent items")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "override synth.seed");
  app.add_flag("-v,--verbose", verbose, "progress output on stderr");

  auto* reg = app.add_subcommand("register", "register a frame sequence onto its first frame");
  std::vector<std::string> reg_paths;
  std::string dataset_dir;
  bool refine_masks = false;
  bool batch = false;
  reg->add_option("paths", reg_paths, "sequence_dir masks_dir out_dir, or just out_dir with --dataset")
      ->required()
      ->expected(1, 3);
  reg->add_option("--dataset", dataset_dir, "register a synthetic dataset directory instead of a sequence");
  reg->add_flag("--refine", refine_masks, "refine every mask boundary before registering");
  reg->add_flag("--batch", batch, "treat sequence_dir and masks_dir as roots holding one subdirectory per sequence");

  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  std::string ref_path, mask_path, synth_out;
  std::optional<std::string> spec_path;
  int phantom = 0;
  synth->add_option("--ref", ref_path, "reference image (.pgm)");
  synth->add_option("--mask", mask_path, "reference mask (.pgm)");
  synth->add_option("--spec", spec_path, "JSON synth spec (overrides the config's \"synth\" object)");
  synth->add_option("--phantom", phantom, "use a generated phantom of this size as the reference");
  synth->add_option("out_dir", synth_out, "dataset directory")->required();

  auto* eval = app.add_subcommand("eval", "clean-registered RMSE of registration results");
  std::string eval_dataset, eval_results;
  eval->add_option("dataset_dir", eval_dataset)->required();
  eval->add_option("results_dir", eval_results)->required();

  auto* refine = app.add_subcommand("refine", "refine a mask boundary against image edges");
  std::string refine_image, refine_mask, refine_out;
  refine->add_option("image", refine_image)->required();
  refine->add_option("mask", refine_mask)->required();
  refine->add_option("out_dir", refine_out)->required();

  auto* metrics = app.add_subcommand("metrics", "IoU, F1, Hausdorff and RMSE between files");
  pouchreg::MetricsRequest req;
  std::optional<std::string> mask_a, mask_b, image_a, image_b, region;
  metrics->add_option("--mask-a", mask_a);
  metrics->add_option("--mask-b", mask_b);
  metrics->add_option("--image-a", image_a);
  metrics->add_option("--image-b", image_b);
  metrics->add_option("--region", region, "mask restricting the RMSE");

  CLI11_PARSE(app, argc, argv);

  pouchreg::RunOptions opts;
  opts.jobs = jobs;
  opts.verbose = verbose;
  opts.log = &std::cerr;

  pouchreg::PipelineConfig cfg;
  try {
    cfg = pouchreg::PipelineConfig::load(config_path ? std::optional<std::filesystem::path>(*config_path)
                                                     : std::nullopt);
    if (spec_path) cfg.synth = pouchreg::PipelineConfig::from_json({{"synth", pouchreg::read_json(*spec_path)}}).synth;
    if (seed) cfg.synth.seed = *seed;
    if (refine_masks) cfg.refine_masks = true;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (*reg) {
    if (!dataset_dir.empty()) {
      if (reg_paths.size() != 1) {
        std::cerr << "error: register --dataset takes a single out_dir\n";
        return 2;
      }
      return pouchreg::cmd_register_dataset(dataset_dir, cfg, reg_paths[0], opts);
    }
    if (reg_paths.size() != 3) {
      std::cerr << "error: register needs sequence_dir masks_dir out_dir (or --dataset DIR out_dir)\n";
      return 2;
    }
    if (batch) return pouchreg::cmd_register_batch(reg_paths[0], reg_paths[1], cfg, reg_paths[2], opts);
    return pouchreg::cmd_register(reg_paths[0], reg_paths[1], cfg, reg_paths[2], opts);
  }
  if (*synth) {
    if (phantom > 0) return pouchreg::cmd_synth_phantom(phantom, cfg, synth_out, opts);
    if (ref_path.empty() || mask_path.empty()) {
      std::cerr << "error: synth needs --ref and --mask (or --phantom N)\n";
      return 2;
    }
    return pouchreg::cmd_synth(ref_path, mask_path, cfg, synth_out, opts);
  }
  if (*eval) return pouchreg::cmd_eval(eval_dataset, eval_results, opts);
  if (*refine) return pouchreg::cmd_refine(refine_image, refine_mask, cfg, refine_out, opts);
  if (*metrics) {
    auto to_path = [](const std::optional<std::string>& s) {
      return s ? std::optional<std::filesystem::path>(*s) : std::nullopt;
    };
    req.mask_a = to_path(mask_a);
    req.mask_b = to_path(mask_b);
    req.image_a = to_path(image_a);
    req.image_b = to_path(image_b);
    req.region = to_path(region);
    return pouchreg::cmd_metrics(req, std::cout, opts);
  }
  return 2;
}

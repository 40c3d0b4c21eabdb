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
#include "pouchreg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pouchreg/metrics.hpp"
#include "pouchreg/pgm.hpp"
#include "pouchreg/serialization.hpp"

namespace pouchreg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json PipelineConfig::to_json() const {
  return {{"rigid", pouchreg::to_json(rigid)},
          {"nonrigid", pouchreg::to_json(nonrigid)},
          {"refine", pouchreg::to_json(refine)},
          {"synth", pouchreg::to_json(synth)},
          {"refine_masks", refine_masks},
          {"warm_start_nonrigid", warm_start_nonrigid}};
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  PipelineConfig cfg;
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    if (key == "rigid") {
      pouchreg::from_json(item.value(), cfg.rigid);
    } else if (key == "nonrigid") {
      pouchreg::from_json(item.value(), cfg.nonrigid);
    } else if (key == "refine") {
      pouchreg::from_json(item.value(), cfg.refine);
    } else if (key == "synth") {
      pouchreg::from_json(item.value(), cfg.synth);
    } else if (key == "refine_masks") {
      cfg.refine_masks = item.value().get<bool>();
    } else if (key == "warm_start_nonrigid") {
      cfg.warm_start_nonrigid = item.value().get<bool>();
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::optional<fs::path>& path) {
  if (!path) return {};
  try {
    return from_json(read_json(*path));
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path->string() + ": " + e.what());
  }
}

namespace {

class Logger {
 public:
  explicit Logger(const RunOptions& opts) : opts_(opts) {}

  void info(const std::string& msg) const {
    if (opts_.log && opts_.verbose) write(msg);
  }
  void warn(const std::string& msg) const {
    if (opts_.log) write("warning: " + msg);
  }
  void error(const std::string& msg) const {
    if (opts_.log) write("error: " + msg);
  }

 private:
  void write(const std::string& msg) const {
    static std::mutex mu;
    const std::lock_guard<std::mutex> lock(mu);
    *opts_.log << msg << '\n';
  }
  const RunOptions& opts_;
};

std::vector<fs::path> list_pgm(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string polygon_csv(const std::vector<Point2>& pts, bool with_index) {
  std::ostringstream os;
  os << (with_index ? "theta_index,x,y\n" : "x,y\n");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (with_index) os << i << ',';
    os << format_number(pts[i].x()) << ',' << format_number(pts[i].y()) << '\n';
  }
  return os.str();
}

std::string iteration_csv(const std::vector<IterationRecord>& log) {
  std::ostringstream os;
  os << "level,iter,energy,step\n";
  for (const IterationRecord& r : log) {
    os << r.level << ',' << r.iter << ',' << format_number(r.energy) << ',' << format_number(r.step) << '\n';
  }
  return os.str();
}

Image overlay(const Image& frame, const Mask& reference) {
  Image out = frame;
  for (const Point2& p : boundary_points(reference)) out(Eigen::Index(p.y()), Eigen::Index(p.x())) = 1.0;
  return out;
}

json rigid_to_json(const RigidParams& p) {
  return {{"theta_rad", p.theta}, {"tx", p.tx}, {"ty", p.ty}, {"cx", p.cx}, {"cy", p.cy}};
}

RigidParams rigid_from_json(const json& j) {
  return {j.at("theta_rad").get<double>(), j.at("tx").get<double>(), j.at("ty").get<double>(),
          j.at("cx").get<double>(), j.at("cy").get<double>()};
}

// Runs `work(i)` for i in [0, count) on up to `jobs` threads. Exceptions are
// collected per index so failures can be reported deterministically.
template <typename Work>
std::vector<std::string> parallel_for(int count, int jobs, const Work& work) {
  std::vector<std::string> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (const std::exception& e) {
        errors[std::size_t(i)] = e.what();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, std::max(1, count));
  std::vector<std::thread> threads;
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return errors;
}

struct FrameMetrics {
  double hd = 0.0;
  double iou = 0.0;
};

}  // namespace

int cmd_register(const fs::path& sequence_dir, const fs::path& masks_dir, const PipelineConfig& cfg,
                 const fs::path& out_dir, const RunOptions& opts) {
  const Logger log(opts);
  std::string stage = "input";
  std::string current = "";
  try {
    const std::vector<fs::path> frames = list_pgm(sequence_dir);
    if (frames.empty()) throw IoError("no .pgm frames in " + sequence_dir.string());

    // One mask per frame with matching file names, or just frame 0's.
    std::vector<fs::path> masks;
    for (const fs::path& f : frames) {
      const fs::path m = masks_dir / f.filename();
      if (fs::exists(m)) {
        masks.push_back(m);
      } else if (masks.empty()) {
        throw IoError("missing mask for reference frame: " + m.string());
      } else {
        break;
      }
    }
    const bool reference_only = masks.size() == 1 && frames.size() > 1;
    if (!reference_only && masks.size() != frames.size()) {
      throw IoError("missing mask: " + (masks_dir / frames[masks.size()].filename()).string());
    }
    if (reference_only) log.warn("only the reference mask is present; rigid alignment and HD metrics are skipped");

    fs::create_directories(out_dir);
    const std::string movie = sequence_dir.filename().empty() ? sequence_dir.parent_path().filename().string()
                                                              : sequence_dir.filename().string();

    current = frames[0].string();
    const Image ref = read_pgm(frames[0]);
    Mask ref_mask = read_mask(masks[0]);
    if (ref_mask.rows() != ref.rows() || ref_mask.cols() != ref.cols()) {
      throw IoError("mask size differs from frame: " + masks[0].string());
    }
    if (cfg.refine_masks) {
      stage = "refine";
      ref_mask = refine_boundary(ref, ref_mask, cfg.refine).mask;
    }
    const std::vector<Point2> ref_boundary = boundary_points(ref_mask);

    // Resume state: frames completed so far and the warm-start parameters.
    json frame_names = json::array();
    for (const fs::path& f : frames) frame_names.push_back(f.filename().string());
    const fs::path state_path = out_dir / "state.json";
    std::size_t first = 1;
    RigidParams warm = RigidParams::about(mask_centroid(ref_mask));
    std::vector<Lattice> warm_levels;
    if (fs::exists(state_path)) {
      const json state = read_json(state_path);
      if (state.value("frames", json::array()) == frame_names && state.value("config", json()) == cfg.to_json()) {
        first = state.at("last_completed").get<std::size_t>() + 1;
        warm = rigid_from_json(state.at("rigid"));
        if (state.contains("levels")) warm_levels = chain_from_json(state.at("levels")).levels;
        log.info("resuming at frame " + std::to_string(first));
      }
    }

    for (std::size_t k = first; k < frames.size(); ++k) {
      current = frames[k].string();
      stage = "input";
      const Image src = read_pgm(frames[k]);
      if (src.rows() != ref.rows() || src.cols() != ref.cols()) throw IoError("frame size differs from reference");
      std::optional<Mask> src_mask;
      if (!reference_only) {
        src_mask = read_mask(masks[k]);
        if (cfg.refine_masks) {
          stage = "refine";
          src_mask = refine_boundary(src, *src_mask, cfg.refine).mask;
        }
      }

      RigidParams rigid = RigidParams::about(mask_centroid(ref_mask));
      if (src_mask) {
        stage = "rigid";
        rigid = register_rigid(ref_mask, *src_mask, warm, cfg.rigid).params;
      }

      stage = "nonrigid";
      std::vector<IterationRecord> iters;
      const TransformChain chain = register_nonrigid(ref, src, ref_mask, rigid, cfg.nonrigid, &iters,
                                                     cfg.warm_start_nonrigid ? &warm_levels : nullptr);

      stage = "output";
      const fs::path frame_dir = out_dir / frames[k].stem();
      fs::create_directories(frame_dir);
      save_chain(frame_dir / "transform.json", chain);
      const Image registered = warp(src, chain);
      write_pgm(frame_dir / "registered.pgm", registered);
      write_pgm(frame_dir / "overlay.pgm", overlay(registered, ref_mask), 255);
      write_text(frame_dir / "iterations.csv", iteration_csv(iters));
      json metrics = json::object();
      if (src_mask) {
        const Mask propagated = warp_mask(*src_mask, chain);
        const std::vector<Point2> pts = boundary_points(propagated);
        write_text(frame_dir / "annotation.csv", polygon_csv(pts, false));
        metrics["hd"] = pts.empty() ? std::numeric_limits<double>::infinity() : hausdorff(pts, ref_boundary);
        metrics["iou"] = iou(propagated, ref_mask);
      }
      write_json(frame_dir / "metrics.json", metrics);

      warm = rigid;
      warm_levels = chain.levels;
      json state = {{"frames", frame_names},
                    {"config", cfg.to_json()},
                    {"last_completed", k},
                    {"rigid", rigid_to_json(rigid)},
                    {"levels", chain_to_json(chain)}};
      write_json(state_path, state);
      log.info("frame " + frames[k].filename().string() + ": theta=" + format_number(rigid.theta) +
               (metrics.contains("hd") ? " hd=" + format_number(metrics["hd"].get<double>()) : ""));
    }

    // Aggregate per-frame metrics (including frames finished by earlier runs).
    stage = "report";
    std::ostringstream csv;
    csv << "movie,frame,metric,value\n";
    std::map<std::string, std::vector<double>> by_metric;
    for (std::size_t k = 1; k < frames.size(); ++k) {
      const json m = read_json(out_dir / frames[k].stem() / "metrics.json");
      for (const auto& item : m.items()) {
        const double v = item.value().get<double>();
        csv << movie << ',' << frames[k].stem().string() << ',' << item.key() << ',' << format_number(v) << '\n';
        by_metric[item.key()].push_back(v);
      }
    }
    write_text(out_dir / "metrics.csv", csv.str());
    std::ostringstream summary;
    summary << "movie,metric,mean,std,count\n";
    for (const auto& [name, values] : by_metric) {
      const MeanStd ms = mean_std(values);
      summary << movie << ',' << name << ',' << format_number(ms.mean) << ',' << format_number(ms.std) << ','
              << values.size() << '\n';
    }
    write_text(out_dir / "summary.csv", summary.str());
    return 0;
  } catch (const std::exception& e) {
    log.error(current.empty() ? e.what() : current + " [" + stage + "]: " + e.what());
    return 1;
  }
}

int cmd_register_batch(const fs::path& sequences_root, const fs::path& masks_root, const PipelineConfig& cfg,
                       const fs::path& out_root, const RunOptions& opts) {
  const Logger log(opts);
  std::vector<fs::path> sequences;
  try {
    if (!fs::is_directory(sequences_root)) throw IoError("not a directory: " + sequences_root.string());
    for (const auto& entry : fs::directory_iterator(sequences_root)) {
      if (entry.is_directory()) sequences.push_back(entry.path());
    }
    if (sequences.empty()) throw IoError("no sequence directories in " + sequences_root.string());
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
  std::sort(sequences.begin(), sequences.end());
  std::vector<int> status(sequences.size(), 0);
  RunOptions inner = opts;
  inner.jobs = 1;
  parallel_for(int(sequences.size()), opts.jobs, [&](int i) {
    const fs::path& seq = sequences[std::size_t(i)];
    status[std::size_t(i)] = cmd_register(seq, masks_root / seq.filename(), cfg, out_root / seq.filename(), inner);
  });
  int failed = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (status[i] != 0) {
      log.error("sequence " + sequences[i].filename().string() + " failed");
      ++failed;
    }
  }
  return failed == 0 ? 0 : 1;
}

namespace {

struct Dataset {
  fs::path dir;
  std::string name;
  std::vector<std::string> items;
};

Dataset open_dataset(const fs::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  Dataset ds;
  ds.dir = dir;
  ds.name = manifest.at("name").get<std::string>();
  ds.items = manifest.at("items").get<std::vector<std::string>>();
  if (ds.items.empty()) throw IoError("dataset has no items: " + dir.string());
  return ds;
}

std::string item_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

int synth_into(const Image& ref, const Mask& ref_mask, const std::string& name, const PipelineConfig& cfg,
               const fs::path& out_dir, const RunOptions& opts) {
  const Logger log(opts);
  const SynthSpec& spec = cfg.synth;
  spec.validate();
  fs::create_directories(out_dir);
  write_pgm(out_dir / "ref.pgm", ref);
  write_mask(out_dir / "mask.pgm", ref_mask);
  // Items are generated from the re-read reference so that consumers of the
  // dataset see exactly the quantized pixels the items were derived from.
  const Image ref_q = read_pgm(out_dir / "ref.pgm");

  std::vector<std::string> items;
  for (int i = 1; i <= spec.count; ++i) items.push_back(item_name(i));
  const auto errors = parallel_for(spec.count, opts.jobs, [&](int i) {
    const int index = i + 1;
    const GeometricSample geo = gen_geometric(ref_q, ref_mask, spec, index);
    const Image s2 = gen_intensity(geo.s1, geo.mask, spec, index);
    const fs::path item_dir = out_dir / items[std::size_t(i)];
    fs::create_directories(item_dir);
    write_pgm(item_dir / "s1.pgm", geo.s1);
    write_pgm(item_dir / "s2.pgm", s2);
    write_mask(item_dir / "mask.pgm", geo.mask);
    save_chain(item_dir / "truth.json", geo.truth);
    log.info("synth item " + items[std::size_t(i)]);
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      log.error("item " + items[i] + ": " + errors[i]);
      return 1;
    }
  }
  write_json(out_dir / "manifest.json", {{"version", 1}, {"name", name}, {"spec", to_json(spec)}, {"items", items}});
  return 0;
}

}  // namespace

int cmd_synth(const fs::path& ref_path, const fs::path& mask_path, const PipelineConfig& cfg, const fs::path& out_dir,
              const RunOptions& opts) {
  const Logger log(opts);
  try {
    const Image ref = read_pgm(ref_path);
    const Mask mask = read_mask(mask_path);
    if (mask.rows() != ref.rows() || mask.cols() != ref.cols()) throw IoError("mask size differs from reference");
    return synth_into(ref, mask, ref_path.stem().string(), cfg, out_dir, opts);
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

int cmd_synth_phantom(int size, const PipelineConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
  const Logger log(opts);
  try {
    const Phantom ph = make_phantom(size, cfg.synth.seed);
    return synth_into(ph.image, ph.mask, "phantom", cfg, out_dir, opts);
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

int cmd_register_dataset(const fs::path& dataset_dir, const PipelineConfig& cfg, const fs::path& out_dir,
                         const RunOptions& opts) {
  const Logger log(opts);
  try {
    const Dataset ds = open_dataset(dataset_dir);
    const Image ref = read_pgm(ds.dir / "ref.pgm");
    const Mask ref_mask = read_mask(ds.dir / "mask.pgm");
    fs::create_directories(out_dir);
    const auto errors = parallel_for(int(ds.items.size()), opts.jobs, [&](int i) {
      const std::string& item = ds.items[std::size_t(i)];
      const Image s2 = read_pgm(ds.dir / item / "s2.pgm");
      const Mask src_mask = read_mask(ds.dir / item / "mask.pgm");
      const RigidResult rigid = register_rigid(ref_mask, src_mask, RigidParams::about(mask_centroid(ref_mask)), cfg.rigid);
      std::vector<IterationRecord> iters;
      const TransformChain chain = register_nonrigid(ref, s2, ref_mask, rigid.params, cfg.nonrigid, &iters);
      const fs::path item_dir = out_dir / item;
      fs::create_directories(item_dir);
      save_chain(item_dir / "transform.json", chain);
      write_text(item_dir / "iterations.csv", iteration_csv(iters));
      log.info("registered item " + item);
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!errors[i].empty()) {
        log.error("item " + ds.items[i] + ": " + errors[i]);
        return 1;
      }
    }
    return 0;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

int cmd_eval(const fs::path& dataset_dir, const fs::path& results_dir, const RunOptions& opts) {
  const Logger log(opts);
  try {
    const Dataset ds = open_dataset(dataset_dir);
    const Image ref = read_pgm(ds.dir / "ref.pgm");
    const Mask ref_mask = read_mask(ds.dir / "mask.pgm");
    for (const std::string& item : ds.items) {
      if (!fs::exists(results_dir / item / "transform.json")) {
        throw IoError("results do not match dataset: missing " + (results_dir / item / "transform.json").string());
      }
    }
    std::vector<double> method(ds.items.size());
    std::vector<double> baseline(ds.items.size());
    const auto errors = parallel_for(int(ds.items.size()), opts.jobs, [&](int i) {
      const std::string& item = ds.items[std::size_t(i)];
      const Image s1 = read_pgm(ds.dir / item / "s1.pgm");
      const TransformChain recovered = load_chain(results_dir / item / "transform.json");
      method[std::size_t(i)] = clean_register_eval(ref, s1, recovered, ref_mask);
      baseline[std::size_t(i)] = clean_register_eval(ref, s1, TransformChain{}, ref_mask);
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!errors[i].empty()) throw Error("item " + ds.items[i] + ": " + errors[i]);
    }

    std::ostringstream csv;
    csv << "movie,frame,metric,value\n";
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
      csv << ds.name << ',' << ds.items[i] << ",rmse," << format_number(method[i]) << '\n';
      csv << ds.name << ',' << ds.items[i] << ",baseline_rmse," << format_number(baseline[i]) << '\n';
    }
    write_text(results_dir / "eval.csv", csv.str());

    const MeanStd m = mean_std(method);
    const MeanStd b = mean_std(baseline);
    std::ostringstream summary;
    summary << "movie,rmse_mean,rmse_std,baseline_rmse_mean,baseline_rmse_std,count\n";
    summary << ds.name << ',' << format_number(m.mean) << ',' << format_number(m.std) << ',' << format_number(b.mean)
            << ',' << format_number(b.std) << ',' << ds.items.size() << '\n';
    write_text(results_dir / "eval_summary.csv", summary.str());
    log.info("mean rmse " + format_number(m.mean) + " (baseline " + format_number(b.mean) + ")");
    return 0;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

int cmd_refine(const fs::path& image_path, const fs::path& mask_path, const PipelineConfig& cfg,
               const fs::path& out_dir, const RunOptions& opts) {
  const Logger log(opts);
  try {
    const Image img = read_pgm(image_path);
    const Mask mask = read_mask(mask_path);
    const RefineResult res = refine_boundary(img, mask, cfg.refine);
    if (res.band_clipped) log.warn("search band left the image and was clipped");
    fs::create_directories(out_dir);
    write_mask(out_dir / "refined_mask.pgm", res.mask);
    write_text(out_dir / "polygon.csv", polygon_csv(res.polygon, true));
    return 0;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

int cmd_metrics(const MetricsRequest& req, std::ostream& out, const RunOptions& opts) {
  const Logger log(opts);
  try {
    if (bool(req.mask_a) != bool(req.mask_b) || bool(req.image_a) != bool(req.image_b)) {
      throw std::invalid_argument("metrics: inputs come in pairs (a and b)");
    }
    if (!req.mask_a && !req.image_a) throw std::invalid_argument("metrics: nothing to compare");
    std::ostringstream os;
    os << "metric,value\n";
    if (req.mask_a) {
      const Mask a = read_mask(*req.mask_a, false);
      const Mask b = read_mask(*req.mask_b, false);
      const Overlap ov = overlap(a, b);
      if (ov.vacuous) log.warn("both masks are empty");
      os << "iou," << format_number(ov.iou) << '\n' << "f1," << format_number(ov.f1) << '\n';
      const auto pa = boundary_points(a);
      const auto pb = boundary_points(b);
      if (!pa.empty() && !pb.empty()) os << "hd," << format_number(hausdorff(pa, pb)) << '\n';
    }
    if (req.image_a) {
      const Image a = read_pgm(*req.image_a);
      const Image b = read_pgm(*req.image_b);
      const double value = req.region ? rmse(a, b, read_mask(*req.region)) : rmse(a, b);
      os << "rmse," << format_number(value) << '\n';
    }
    out << os.str();
    return 0;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

}  // namespace pouchreg

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
#include "pouchreg/serialization.hpp"

#include <fstream>
#include <set>

#include "pouchreg/pgm.hpp"

namespace pouchreg {

using nlohmann::json;

json chain_to_json(const TransformChain& chain) {
  json doc;
  doc["version"] = kTransformFormatVersion;
  doc["rigid"] = {{"theta_rad", chain.rigid.theta},
                  {"tx", chain.rigid.tx},
                  {"ty", chain.rigid.ty},
                  {"cx", chain.rigid.cx},
                  {"cy", chain.rigid.cy}};
  json levels = json::array();
  for (const Lattice& lat : chain.levels) {
    json disp = json::array();
    for (Eigen::Index r = 0; r < lat.dx().rows(); ++r) {
      for (Eigen::Index c = 0; c < lat.dx().cols(); ++c) disp.push_back({lat.dx()(r, c), lat.dy()(r, c)});
    }
    const RoiRect& d = lat.domain();
    levels.push_back({{"domain", {{"x_left", d.x_left}, {"x_right", d.x_right}, {"y_left", d.y_left}, {"y_right", d.y_right}}},
                      {"m", lat.m()},
                      {"n", lat.n()},
                      {"displacements", std::move(disp)}});
  }
  doc["levels"] = std::move(levels);
  return doc;
}

TransformChain chain_from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kTransformFormatVersion) {
      throw IoError("unsupported transform version " + doc.at("version").dump());
    }
    TransformChain chain;
    const json& r = doc.at("rigid");
    chain.rigid = {r.at("theta_rad").get<double>(), r.at("tx").get<double>(), r.at("ty").get<double>(),
                   r.at("cx").get<double>(), r.at("cy").get<double>()};
    for (const json& lv : doc.at("levels")) {
      const json& d = lv.at("domain");
      Lattice lat(RoiRect{d.at("x_left").get<double>(), d.at("x_right").get<double>(), d.at("y_left").get<double>(),
                          d.at("y_right").get<double>()},
                  lv.at("m").get<int>(), lv.at("n").get<int>());
      const json& disp = lv.at("displacements");
      if (disp.size() != std::size_t(lat.control_count())) throw IoError("transform: displacement count mismatch");
      std::size_t i = 0;
      for (Eigen::Index row = 0; row < lat.dx().rows(); ++row) {
        for (Eigen::Index col = 0; col < lat.dx().cols(); ++col, ++i) {
          lat.dx()(row, col) = disp[i].at(0).get<double>();
          lat.dy()(row, col) = disp[i].at(1).get<double>();
        }
      }
      chain.levels.push_back(std::move(lat));
    }
    return chain;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed transform document: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void save_chain(const std::filesystem::path& path, const TransformChain& chain) { write_json(path, chain_to_json(chain)); }

TransformChain load_chain(const std::filesystem::path& path) { return chain_from_json(read_json(path)); }

namespace {

void reject_unknown(const json& doc, std::initializer_list<const char*> keys, const char* what) {
  if (!doc.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read_opt(const json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

}  // namespace

json to_json(const RigidConfig& c) {
  return {{"initial_step", c.initial_step},
          {"min_step", c.min_step},
          {"relaxation", c.relaxation},
          {"max_iters", c.max_iters},
          {"smoothing_sigma", c.smoothing_sigma}};
}

json to_json(const EnergyConfig& c) {
  return {{"reg_weight", c.reg_weight}, {"epsilon", c.epsilon},       {"max_iters", c.max_iters},
          {"levels", c.levels},         {"base_cells", c.base_cells}, {"step", c.step},
          {"roi_margin", c.roi_margin}};
}

json to_json(const RefineConfig& c) {
  return {{"smoothing_sigma", c.smoothing_sigma},
          {"radial_samples", c.radial_samples},
          {"angular_samples", c.angular_samples},
          {"max_radial_jump", c.max_radial_jump},
          {"band_fraction", c.band_fraction}};
}

json to_json(const SynthSpec& s) {
  return {{"seed", s.seed},
          {"count", s.count},
          {"elastic_grid", s.elastic_grid},
          {"elastic_max_disp", s.elastic_max_disp},
          {"rigid_max_theta", s.rigid_max_theta},
          {"rigid_max_trans", s.rigid_max_trans},
          {"disk_count_range", s.disk_count_range},
          {"disk_radius_range", s.disk_radius_range},
          {"noise_sigma", s.noise_sigma}};
}

void from_json(const json& doc, RigidConfig& c) {
  reject_unknown(doc, {"initial_step", "min_step", "relaxation", "max_iters", "smoothing_sigma"}, "rigid config");
  read_opt(doc, "initial_step", c.initial_step);
  read_opt(doc, "min_step", c.min_step);
  read_opt(doc, "relaxation", c.relaxation);
  read_opt(doc, "max_iters", c.max_iters);
  read_opt(doc, "smoothing_sigma", c.smoothing_sigma);
  c.validate();
}

void from_json(const json& doc, EnergyConfig& c) {
  reject_unknown(doc, {"reg_weight", "epsilon", "max_iters", "levels", "base_cells", "step", "roi_margin"},
                 "nonrigid config");
  read_opt(doc, "reg_weight", c.reg_weight);
  read_opt(doc, "epsilon", c.epsilon);
  read_opt(doc, "max_iters", c.max_iters);
  read_opt(doc, "levels", c.levels);
  read_opt(doc, "base_cells", c.base_cells);
  read_opt(doc, "step", c.step);
  read_opt(doc, "roi_margin", c.roi_margin);
  c.validate();
}

void from_json(const json& doc, RefineConfig& c) {
  reject_unknown(doc, {"smoothing_sigma", "radial_samples", "angular_samples", "max_radial_jump", "band_fraction"},
                 "refine config");
  read_opt(doc, "smoothing_sigma", c.smoothing_sigma);
  read_opt(doc, "radial_samples", c.radial_samples);
  read_opt(doc, "angular_samples", c.angular_samples);
  read_opt(doc, "max_radial_jump", c.max_radial_jump);
  read_opt(doc, "band_fraction", c.band_fraction);
  c.validate();
}

void from_json(const json& doc, SynthSpec& s) {
  reject_unknown(doc,
                 {"seed", "count", "elastic_grid", "elastic_max_disp", "rigid_max_theta", "rigid_max_trans",
                  "disk_count_range", "disk_radius_range", "noise_sigma"},
                 "synth spec");
  read_opt(doc, "seed", s.seed);
  read_opt(doc, "count", s.count);
  read_opt(doc, "elastic_grid", s.elastic_grid);
  read_opt(doc, "elastic_max_disp", s.elastic_max_disp);
  read_opt(doc, "rigid_max_theta", s.rigid_max_theta);
  read_opt(doc, "rigid_max_trans", s.rigid_max_trans);
  read_opt(doc, "disk_count_range", s.disk_count_range);
  read_opt(doc, "disk_radius_range", s.disk_radius_range);
  read_opt(doc, "noise_sigma", s.noise_sigma);
  s.validate();
}

}  // namespace pouchreg

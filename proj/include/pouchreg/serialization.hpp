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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pouchreg/boundary.hpp"
#include "pouchreg/ffd.hpp"
#include "pouchreg/nonrigid.hpp"
#include "pouchreg/synth.hpp"

namespace pouchreg {

inline constexpr int kTransformFormatVersion = 1;

/// {"version", "rigid": {theta_rad, tx, ty, cx, cy},
///  "levels": [{"domain": {x_left, x_right, y_left, y_right}, "m", "n",
///              "displacements": [[dx, dy], ...] row-major over (n+3) x (m+3)}]}
nlohmann::json chain_to_json(const TransformChain& chain);
TransformChain chain_from_json(const nlohmann::json& doc);

void save_chain(const std::filesystem::path& path, const TransformChain& chain);
TransformChain load_chain(const std::filesystem::path& path);

// Config documents mirror the struct field names; missing keys keep defaults,
// unknown keys are rejected.
nlohmann::json to_json(const RigidConfig& cfg);
nlohmann::json to_json(const EnergyConfig& cfg);
nlohmann::json to_json(const RefineConfig& cfg);
nlohmann::json to_json(const SynthSpec& spec);
void from_json(const nlohmann::json& doc, RigidConfig& cfg);
void from_json(const nlohmann::json& doc, EnergyConfig& cfg);
void from_json(const nlohmann::json& doc, RefineConfig& cfg);
void from_json(const nlohmann::json& doc, SynthSpec& spec);

nlohmann::json read_json(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace pouchreg

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
#include "pouchreg/ffd.hpp"

namespace pouchreg {

Lattice refine_level(const Lattice& lat) { return Lattice(lat.domain(), 2 * lat.m(), 2 * lat.n()); }

Point2 TransformChain::operator()(const Point2& p) const {
  Point2 q = rigid(p);
  for (const Lattice& level : levels) q = level(q);
  return q;
}

Point2 compose_apply(const TransformChain& chain, const Point2& p) { return chain(p); }

RigidParams rescale(const RigidParams& params, double scale, double offset) {
  RigidParams out = params;
  out.tx = params.tx / scale;
  out.ty = params.ty / scale;
  out.cx = (params.cx - offset) / scale;
  out.cy = (params.cy - offset) / scale;
  return out;
}

Lattice rescale(const Lattice& lat, double scale, double offset) {
  const RoiRect& d = lat.domain();
  Lattice out(RoiRect{(d.x_left - offset) / scale, (d.x_right - offset) / scale, (d.y_left - offset) / scale,
                      (d.y_right - offset) / scale},
              lat.m(), lat.n());
  out.dx() = lat.dx() / scale;
  out.dy() = lat.dy() / scale;
  return out;
}

TransformChain rescale(const TransformChain& chain, double scale, double offset) {
  TransformChain out;
  out.rigid = rescale(chain.rigid, scale, offset);
  out.levels.reserve(chain.levels.size());
  for (const Lattice& level : chain.levels) out.levels.push_back(rescale(level, scale, offset));
  return out;
}

}  // namespace pouchreg

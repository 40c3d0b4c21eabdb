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

#include "pouchreg/image.hpp"

namespace pouchreg {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Reads a binary PGM (P5, maxval up to 65535; 16-bit samples big-endian) and
/// divides by maxval so intensities land in [0,1].
Image read_pgm(const std::filesystem::path& path);

/// Reads a P5 mask; a pixel is foreground when its value is at least half maxval
/// (so maxval 1 and {0,255} encodings both work). Throws EmptyMaskError when
/// `require_foreground` and nothing is set.
Mask read_mask(const std::filesystem::path& path, bool require_foreground = true);

/// Writes intensities clamped to [0,1] with the given maxval (255 or 65535).
void write_pgm(const std::filesystem::path& path, const Image& img, int maxval = 65535);

/// Writes a mask as 8-bit P5 with values {0,255}.
void write_mask(const std::filesystem::path& path, const Mask& mask);

}  // namespace pouchreg

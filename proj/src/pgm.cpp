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
#include "pouchreg/pgm.hpp"

#include <cctype>
#include <fstream>
#include <vector>

namespace pouchreg {

namespace {

struct RawPgm {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<int> values;
};

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  skip_space_and_comments(in);
  int value = 0;
  if (!(in >> value)) throw IoError("malformed PGM header: " + path.string());
  return value;
}

RawPgm read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') throw IoError("not a binary PGM (P5): " + path.string());
  RawPgm raw;
  raw.width = read_header_int(in, path);
  raw.height = read_header_int(in, path);
  raw.maxval = read_header_int(in, path);
  if (raw.width <= 0 || raw.height <= 0 || raw.maxval <= 0 || raw.maxval > 65535) {
    throw IoError("invalid PGM dimensions or maxval: " + path.string());
  }
  // Exactly one whitespace byte separates the header from the raster.
  in.get();
  const std::size_t count = std::size_t(raw.width) * std::size_t(raw.height);
  const std::size_t bytes_per = raw.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(count * bytes_per);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (std::size_t(in.gcount()) != buf.size()) throw IoError("truncated PGM raster: " + path.string());
  raw.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raw.values[i] = bytes_per == 2 ? (int(buf[2 * i]) << 8) | int(buf[2 * i + 1]) : int(buf[i]);
  }
  return raw;
}

void write_raw(const std::filesystem::path& path, int width, int height, int maxval,
               const std::vector<int>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  std::vector<unsigned char> buf;
  buf.reserve(values.size() * (maxval > 255 ? 2 : 1));
  for (const int v : values) {
    if (maxval > 255) buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    buf.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  const RawPgm raw = read_raw(path);
  Image img(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      img(y, x) = double(raw.values[std::size_t(y) * raw.width + x]) / double(raw.maxval);
    }
  }
  return img;
}

Mask read_mask(const std::filesystem::path& path, bool require_foreground) {
  const RawPgm raw = read_raw(path);
  Mask mask(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      mask(y, x) = 2 * raw.values[std::size_t(y) * raw.width + x] >= raw.maxval ? 1 : 0;
    }
  }
  if (require_foreground && foreground_count(mask) == 0) {
    throw EmptyMaskError("mask has no foreground pixels: " + path.string());
  }
  return mask;
}

void write_pgm(const std::filesystem::path& path, const Image& img, int maxval) {
  if (maxval != 255 && maxval != 65535) throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::vector<int> values(std::size_t(img.size()));
  std::size_t i = 0;
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const double v = std::clamp(img(y, x), 0.0, 1.0);
      values[i++] = static_cast<int>(std::lround(v * maxval));
    }
  }
  write_raw(path, int(img.cols()), int(img.rows()), maxval, values);
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  std::vector<int> values(std::size_t(mask.size()));
  std::size_t i = 0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) values[i++] = mask(y, x) ? 255 : 0;
  }
  write_raw(path, int(mask.cols()), int(mask.rows()), 255, values);
}

}  // namespace pouchreg

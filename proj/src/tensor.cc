// Copyright 2026 The Authors.
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

#include "alseg/tensor.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

#include "alseg/errors.h"

namespace alseg {

static_assert(std::endian::native == std::endian::little,
              "TSR1 encoding assumes a little-endian host");

size_t ShapeProduct(std::span<const size_t> shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(std::span<const size_t> shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

NDArray::NDArray(std::vector<size_t> shape, double fill)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), fill) {}

NDArray::NDArray(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeProduct(shape_) != data_.size()) {
    throw ShapeError("NDArray: shape " + ShapeString(shape_) + " needs " +
                     std::to_string(ShapeProduct(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

std::span<double> NDArray::Slice(size_t i) {
  const size_t stride = shape_.empty() ? 0 : data_.size() / shape_[0];
  return std::span<double>(data_).subspan(i * stride, stride);
}

std::span<const double> NDArray::Slice(size_t i) const {
  const size_t stride = shape_.empty() ? 0 : data_.size() / shape_[0];
  return std::span<const double>(data_).subspan(i * stride, stride);
}

bool NDArray::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void RequireSameShape(const NDArray& a, const NDArray& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape " + ShapeString(a.shape()) +
                     " vs " + ShapeString(b.shape()));
  }
}

namespace {

void PutU32(std::vector<unsigned char>& out, uint32_t v) {
  unsigned char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

uint32_t GetU32(std::span<const unsigned char> bytes, size_t off) {
  uint32_t v;
  std::memcpy(&v, bytes.data() + off, 4);
  return v;
}

}  // namespace

std::vector<unsigned char> EncodeTsr(const NDArray& array) {
  std::vector<unsigned char> out;
  out.reserve(8 + 4 * array.ndim() + 4 * array.size());
  const std::string_view magic = "TSR1";
  out.assign(magic.begin(), magic.end());
  PutU32(out, static_cast<uint32_t>(array.ndim()));
  for (size_t d : array.shape()) PutU32(out, static_cast<uint32_t>(d));
  for (double v : array.data()) {
    const float f = static_cast<float>(v);
    unsigned char b[4];
    std::memcpy(b, &f, 4);
    out.insert(out.end(), b, b + 4);
  }
  return out;
}

NDArray DecodeTsr(std::span<const unsigned char> bytes,
                  const std::string& name) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "TSR1", 4) != 0) {
    throw FormatError(name + ": missing TSR1 magic");
  }
  const uint32_t ndim = GetU32(bytes, 4);
  if (ndim > 16 || bytes.size() < 8 + 4 * size_t{ndim}) {
    throw FormatError(name + ": truncated TSR1 header");
  }
  std::vector<size_t> shape(ndim);
  for (uint32_t i = 0; i < ndim; ++i) shape[i] = GetU32(bytes, 8 + 4 * i);
  const size_t count = ShapeProduct(shape);
  const size_t header = 8 + 4 * size_t{ndim};
  if (bytes.size() != header + 4 * count) {
    throw FormatError(name + ": payload size " +
                      std::to_string(bytes.size() - header) +
                      " does not match shape " + ShapeString(shape));
  }
  std::vector<double> data(count);
  for (size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + header + 4 * i, 4);
    data[i] = f;
  }
  return NDArray(std::move(shape), std::move(data));
}

void WriteTsr(const std::filesystem::path& path, const NDArray& array) {
  const auto bytes = EncodeTsr(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

NDArray ReadTsr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return DecodeTsr(bytes, path.string());
}

}  // namespace alseg

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

#ifndef ALSEG_TENSOR_H_
#define ALSEG_TENSOR_H_

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace alseg {

// Dense row-major N-D array of doubles. Invariant: product(shape) == size().
class NDArray {
 public:
  NDArray() = default;
  explicit NDArray(std::vector<size_t> shape, double fill = 0.0);
  NDArray(std::vector<size_t> shape, std::vector<double> data);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t ndim() const { return shape_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // Contiguous slice along the leading axis.
  std::span<double> Slice(size_t i);
  std::span<const double> Slice(size_t i) const;

  bool AllFinite() const;

  friend bool operator==(const NDArray&, const NDArray&) = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

size_t ShapeProduct(std::span<const size_t> shape);
std::string ShapeString(std::span<const size_t> shape);

// Throws ShapeError with `what` in the message when shapes differ.
void RequireSameShape(const NDArray& a, const NDArray& b, const char* what);

// TSR1 tensor file: "TSR1", u32 LE ndim, ndim x u32 LE dims, f32 LE data
// (row-major). Values are narrowed to float on write.
void WriteTsr(const std::filesystem::path& path, const NDArray& array);
NDArray ReadTsr(const std::filesystem::path& path);

std::vector<unsigned char> EncodeTsr(const NDArray& array);
NDArray DecodeTsr(std::span<const unsigned char> bytes,
                  const std::string& name = "<memory>");

}  // namespace alseg

#endif  // ALSEG_TENSOR_H_

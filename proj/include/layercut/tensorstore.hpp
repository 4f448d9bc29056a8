// Copyright 2026 The layercut Authors.
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

#ifndef LAYERCUT_TENSORSTORE_HPP
#define LAYERCUT_TENSORSTORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layercut/error.hpp"
#include "layercut/mat.hpp"

namespace layercut {

// Archive layout: 8-byte little-endian header length N, N bytes of UTF-8
// JSON mapping tensor name -> {dtype, shape, data_offsets} plus an optional
// "__metadata__" object, then the raw data buffer. Offsets are relative to
// the data buffer and must tile it exactly. Values are little-endian,
// row-major. The layout matches the common open tensor-archive convention,
// so converted real checkpoints load as-is.

enum class DType { F32, F64 };

std::size_t dtype_width(DType d);
const char* dtype_name(DType d);
DType dtype_from_name(const std::string& name);  // throws on unknown tag

struct TensorMeta {
  std::string name;
  DType dtype = DType::F32;
  std::vector<std::size_t> shape;
  // [begin, end) within the data buffer; end - begin == numel * width.
  std::uint64_t offset_begin = 0;
  std::uint64_t offset_end = 0;
};

// Product of extents; the empty shape is a scalar with one element.
std::size_t shape_numel(const std::vector<std::size_t>& shape);

/// Read-only view of one stored tensor. `bytes` aliases the checkpoint.
struct TensorView {
  DType dtype;
  const std::vector<std::size_t>* shape;
  std::span<const std::uint8_t> bytes;

  std::size_t numel() const { return shape_numel(*shape); }

  // Decoded copy; the requested element type must match the stored dtype.
  std::vector<float> as_f32() const;
  std::vector<double> as_f64() const;
};

/// Named tensor archive. Immutable once built (the mutating calls below are
/// for construction); readers may share a checkpoint freely.
class Checkpoint {
 public:
  struct Entry {
    DType dtype = DType::F32;
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> bytes;  // little-endian payload
  };

  Checkpoint() = default;

  void add_tensor(const std::string& name, DType dtype,
                  std::vector<std::size_t> shape,
                  std::vector<std::uint8_t> bytes);
  void add_f32(const std::string& name, std::vector<std::size_t> shape,
               std::span<const float> values);
  void add_f64(const std::string& name, std::vector<std::size_t> shape,
               std::span<const double> values);

  void set_metadata(const std::string& key, const std::string& value);
  const std::optional<std::map<std::string, std::string>>& metadata() const {
    return metadata_;
  }

  bool has_tensor(const std::string& name) const;
  std::size_t tensor_count() const { return tensors_.size(); }

  // Name-ascending iteration order (also the serialization order).
  const std::map<std::string, Entry>& tensors() const { return tensors_; }

  TensorView view(const std::string& name) const;  // throws on unknown name

  bool operator==(const Checkpoint& other) const;

 private:
  std::map<std::string, Entry> tensors_;
  std::optional<std::map<std::string, std::string>> metadata_;
};

Checkpoint read_checkpoint(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_checkpoint(const Checkpoint& c);

TensorView get_tensor(const Checkpoint& c, const std::string& name);

Checkpoint load_checkpoint_file(const std::string& path);
void save_checkpoint_file(const Checkpoint& c, const std::string& path);

// Mat<T> bridge used by the encoder: a 1-D tensor [n] maps to a 1 x n row,
// a 2-D tensor [r, c] maps directly.
template <class T>
Mat<T> tensor_to_mat(const TensorView& view);
template <class T>
void add_mat(Checkpoint& c, const std::string& name, const Mat<T>& m,
             bool as_vector = false);

}  // namespace layercut

#endif  // LAYERCUT_TENSORSTORE_HPP

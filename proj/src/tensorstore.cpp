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

#include "layercut/tensorstore.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace layercut {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error("tensorstore", msg); }

template <class T>
void append_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw, raw + sizeof(T));
  }
  const std::size_t at = out.size();
  out.resize(at + sizeof(T));
  std::memcpy(out.data() + at, raw, sizeof(T));
}

template <class T>
T read_le(const std::uint8_t* p) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw, raw + sizeof(T));
  }
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

template <class T>
std::vector<T> decode_values(std::span<const std::uint8_t> bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = read_le<T>(bytes.data() + i * sizeof(T));
  }
  return out;
}

template <class T>
std::vector<std::uint8_t> encode_values(std::span<const T> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size() * sizeof(T));
  for (const T& v : values) append_le(out, v);
  return out;
}

// Root-level duplicate keys would silently collapse in the JSON parser, so
// they are detected with a parse callback.
bool has_duplicate_root_keys(const std::string& text) {
  int depth = 0;
  std::vector<std::string> keys;
  bool duplicate = false;
  json::parser_callback_t cb = [&](int /*d*/, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_start || event == json::parse_event_t::array_start) {
      ++depth;
    } else if (event == json::parse_event_t::object_end || event == json::parse_event_t::array_end) {
      --depth;
    } else if (event == json::parse_event_t::key && depth == 1) {
      const std::string key = parsed.get<std::string>();
      if (std::find(keys.begin(), keys.end(), key) != keys.end()) duplicate = true;
      keys.push_back(key);
    }
    return true;
  };
  try {
    const json parsed = json::parse(text, cb);
    (void)parsed;
  } catch (const json::exception&) {
    return false;  // malformed JSON is reported by the main parse
  }
  return duplicate;
}

}  // namespace

std::size_t dtype_width(DType d) { return d == DType::F32 ? 4 : 8; }

const char* dtype_name(DType d) { return d == DType::F32 ? "F32" : "F64"; }

DType dtype_from_name(const std::string& name) {
  if (name == "F32") return DType::F32;
  if (name == "F64") return DType::F64;
  fail("unknown dtype tag \"" + name + "\" (supported: F32, F64)");
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::vector<float> TensorView::as_f32() const {
  if (dtype != DType::F32) fail("tensor is not F32");
  return decode_values<float>(bytes);
}

std::vector<double> TensorView::as_f64() const {
  if (dtype != DType::F64) fail("tensor is not F64");
  return decode_values<double>(bytes);
}

void Checkpoint::add_tensor(const std::string& name, DType dtype,
                            std::vector<std::size_t> shape,
                            std::vector<std::uint8_t> bytes) {
  if (name.empty()) fail("tensor name must be non-empty");
  if (tensors_.count(name)) fail("duplicate tensor name \"" + name + "\"");
  const std::size_t expected = shape_numel(shape) * dtype_width(dtype);
  if (bytes.size() != expected) {
    fail("tensor \"" + name + "\": buffer has " + std::to_string(bytes.size()) +
         " bytes, shape requires " + std::to_string(expected));
  }
  tensors_.emplace(name, Entry{dtype, std::move(shape), std::move(bytes)});
}

void Checkpoint::add_f32(const std::string& name, std::vector<std::size_t> shape,
                         std::span<const float> values) {
  add_tensor(name, DType::F32, std::move(shape), encode_values(values));
}

void Checkpoint::add_f64(const std::string& name, std::vector<std::size_t> shape,
                         std::span<const double> values) {
  add_tensor(name, DType::F64, std::move(shape), encode_values(values));
}

void Checkpoint::set_metadata(const std::string& key, const std::string& value) {
  if (!metadata_) metadata_.emplace();
  (*metadata_)[key] = value;
}

bool Checkpoint::has_tensor(const std::string& name) const {
  return tensors_.count(name) != 0;
}

TensorView Checkpoint::view(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail("tensor not found: \"" + name + "\"");
  const Entry& e = it->second;
  return TensorView{e.dtype, &e.shape, std::span<const std::uint8_t>(e.bytes)};
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (metadata_ != other.metadata_) return false;
  if (tensors_.size() != other.tensors_.size()) return false;
  auto a = tensors_.begin();
  auto b = other.tensors_.begin();
  for (; a != tensors_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    if (a->second.dtype != b->second.dtype) return false;
    if (a->second.shape != b->second.shape) return false;
    if (a->second.bytes != b->second.bytes) return false;
  }
  return true;
}

Checkpoint read_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) fail("truncated header: file shorter than 8 bytes");
  const std::uint64_t header_len = read_le<std::uint64_t>(bytes.data());
  if (header_len > bytes.size() - 8) {
    fail("truncated header: header length " + std::to_string(header_len) +
         " exceeds file payload of " + std::to_string(bytes.size() - 8) + " bytes");
  }
  const std::string header_text(reinterpret_cast<const char*>(bytes.data() + 8),
                                static_cast<std::size_t>(header_len));
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    fail(std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) fail("header must be a JSON object");
  if (has_duplicate_root_keys(header_text)) fail("duplicate tensor names in header");

  const std::span<const std::uint8_t> data = bytes.subspan(8 + header_len);

  Checkpoint out;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (const auto& [name, value] : header.items()) {
    if (name == "__metadata__") {
      if (!value.is_object()) fail("__metadata__ must be an object");
      for (const auto& [k, v] : value.items()) {
        if (!v.is_string()) fail("__metadata__ values must be strings");
        out.set_metadata(k, v.get<std::string>());
      }
      continue;
    }
    if (!value.is_object()) fail("tensor entry \"" + name + "\" must be an object");
    if (!value.contains("dtype") || !value.contains("shape") || !value.contains("data_offsets")) {
      fail("tensor entry \"" + name + "\" missing dtype/shape/data_offsets");
    }
    const DType dtype = dtype_from_name(value["dtype"].get<std::string>());
    std::vector<std::size_t> shape;
    for (const auto& extent : value["shape"]) {
      if (!extent.is_number_unsigned()) {
        fail("tensor \"" + name + "\": shape extents must be non-negative integers");
      }
      shape.push_back(extent.get<std::size_t>());
    }
    const auto& offs = value["data_offsets"];
    if (!offs.is_array() || offs.size() != 2 || !offs[0].is_number_unsigned() ||
        !offs[1].is_number_unsigned()) {
      fail("tensor \"" + name + "\": data_offsets must be [begin, end]");
    }
    const std::uint64_t begin = offs[0].get<std::uint64_t>();
    const std::uint64_t end = offs[1].get<std::uint64_t>();
    if (begin > end) fail("tensor \"" + name + "\": begin > end");
    if (end > data.size()) {
      fail("tensor \"" + name + "\": data_offsets [" + std::to_string(begin) + ", " +
           std::to_string(end) + ") out of bounds of " + std::to_string(data.size()) +
           "-byte data buffer");
    }
    const std::uint64_t expected = shape_numel(shape) * dtype_width(dtype);
    if (end - begin != expected) {
      fail("tensor \"" + name + "\": byte range of " + std::to_string(end - begin) +
           " does not match shape requiring " + std::to_string(expected));
    }
    ranges.emplace_back(begin, end);
    out.add_tensor(name, dtype, std::move(shape),
                   std::vector<std::uint8_t>(data.data() + begin, data.data() + end));
  }

  // Ranges must tile the data buffer: no overlaps, no gaps, no slack.
  std::sort(ranges.begin(), ranges.end());
  std::uint64_t cursor = 0;
  for (const auto& [begin, end] : ranges) {
    if (begin < cursor) fail("overlapping tensor data_offsets");
    if (begin > cursor) fail("data buffer not tightly packed: gap before offset " +
                             std::to_string(begin));
    cursor = end;
  }
  if (cursor != data.size()) {
    fail("data buffer not tightly packed: " + std::to_string(data.size() - cursor) +
         " trailing bytes");
  }
  return out;
}

std::vector<std::uint8_t> write_checkpoint(const Checkpoint& c) {
  json header = json::object();
  if (c.metadata()) {
    json meta = json::object();
    for (const auto& [k, v] : *c.metadata()) meta[k] = v;
    header["__metadata__"] = meta;
  }
  std::uint64_t cursor = 0;
  for (const auto& [name, entry] : c.tensors()) {  // ascending name order
    json t;
    t["dtype"] = dtype_name(entry.dtype);
    t["shape"] = entry.shape;
    t["data_offsets"] = {cursor, cursor + entry.bytes.size()};
    header[name] = t;
    cursor += entry.bytes.size();
  }
  const std::string header_text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(8 + header_text.size() + cursor);
  append_le(out, static_cast<std::uint64_t>(header_text.size()));
  out.insert(out.end(), header_text.begin(), header_text.end());
  for (const auto& [name, entry] : c.tensors()) {
    out.insert(out.end(), entry.bytes.begin(), entry.bytes.end());
  }
  return out;
}

TensorView get_tensor(const Checkpoint& c, const std::string& name) {
  return c.view(name);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open \"" + path + "\" for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_checkpoint(bytes);
}

void save_checkpoint_file(const Checkpoint& c, const std::string& path) {
  const std::vector<std::uint8_t> bytes = write_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open \"" + path + "\" for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("failed writing \"" + path + "\"");
}

template <class T>
Mat<T> tensor_to_mat(const TensorView& view) {
  std::vector<T> values;
  if constexpr (std::is_same_v<T, float>) {
    values = view.as_f32();
  } else {
    values = view.as_f64();
  }
  Mat<T> m;
  if (view.shape->size() == 1) {
    m.rows = 1;
    m.cols = (*view.shape)[0];
  } else if (view.shape->size() == 2) {
    m.rows = (*view.shape)[0];
    m.cols = (*view.shape)[1];
  } else {
    fail("tensor rank " + std::to_string(view.shape->size()) + " not loadable as a matrix");
  }
  m.v = std::move(values);
  return m;
}

template <class T>
void add_mat(Checkpoint& c, const std::string& name, const Mat<T>& m, bool as_vector) {
  std::vector<std::size_t> shape;
  if (as_vector) {
    shape = {m.cols};
  } else {
    shape = {m.rows, m.cols};
  }
  if constexpr (std::is_same_v<T, float>) {
    c.add_f32(name, std::move(shape), m.v);
  } else {
    c.add_f64(name, std::move(shape), m.v);
  }
}

template Mat<float> tensor_to_mat<float>(const TensorView&);
template Mat<double> tensor_to_mat<double>(const TensorView&);
template void add_mat<float>(Checkpoint&, const std::string&, const Mat<float>&, bool);
template void add_mat<double>(Checkpoint&, const std::string&, const Mat<double>&, bool);

}  // namespace layercut

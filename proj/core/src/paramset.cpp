/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#include "ldvd/paramset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ldvd/rng.hpp"

namespace ldvd {

void ParamSet::add(std::string name, Tensor t) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
  total_dim_ += t.numel();
  entries_.push_back({std::move(name), std::move(t)});
}

const Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

Tensor* ParamSet::find(const std::string& name) {
  for (auto& e : entries_)
    if (e.name == name) return &e.tensor;
  return nullptr;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(total_dim_));
  for (const auto& e : entries_) out.insert(out.end(), e.tensor.vec().begin(), e.tensor.vec().end());
  return out;
}

void ParamSet::unflatten(std::span<const double> flat) {
  if (static_cast<int64_t>(flat.size()) != total_dim_) {
    throw std::invalid_argument("unflatten length " + std::to_string(flat.size()) + " != total_dim " +
                                std::to_string(total_dim_));
  }
  size_t pos = 0;
  for (auto& e : entries_) {
    auto& v = e.tensor.vec();
    std::memcpy(v.data(), flat.data() + pos, v.size() * sizeof(double));
    pos += v.size();
  }
}

uint64_t ParamSet::checksum() const {
  uint64_t h = 1469598103934665603ull;
  for (const auto& e : entries_) {
    h = fnv1a(e.name.data(), e.name.size(), h);
    h = fnv1a(e.tensor.shape().data(), e.tensor.shape().size() * sizeof(int64_t), h);
    h = fnv1a(e.tensor.data(), static_cast<size_t>(e.tensor.numel()) * sizeof(double), h);
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'L', 'D', 'P', 'S'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& buf, size_t& pos) {
  if (pos + 4 > buf.size()) throw std::runtime_error("paramset file truncated at byte " + std::to_string(pos));
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

uint64_t get_u64(const std::string& buf, size_t& pos) {
  if (pos + 8 > buf.size()) throw std::runtime_error("paramset file truncated at byte " + std::to_string(pos));
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void save_paramset(const std::string& path, const ParamSet& ps) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(ps.size()));
  for (size_t i = 0; i < ps.size(); ++i) {
    const auto& e = ps.entry(i);
    put_u32(buf, static_cast<uint32_t>(e.name.size()));
    buf.append(e.name);
    put_u32(buf, static_cast<uint32_t>(e.tensor.rank()));
    for (int64_t d : e.tensor.shape()) put_u32(buf, static_cast<uint32_t>(d));
    for (int64_t k = 0; k < e.tensor.numel(); ++k) {
      double v = e.tensor[k];
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(buf, bits);
    }
  }
  put_u64(buf, fnv1a(buf.data(), buf.size()));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

ParamSet load_paramset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open paramset file: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 + 12) throw std::runtime_error("paramset file too short: " + path);
  uint64_t stored;
  {
    size_t pos = buf.size() - 8;
    stored = get_u64(buf, pos);
  }
  if (stored != fnv1a(buf.data(), buf.size() - 8)) {
    throw std::runtime_error("paramset checksum mismatch: " + path);
  }
  size_t pos = 0;
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw std::runtime_error("bad magic in paramset file at byte 0: " + path);
  pos = 4;
  uint32_t ver = get_u32(buf, pos);
  if (ver != kVersion) throw std::runtime_error("unsupported paramset version " + std::to_string(ver));
  uint32_t n = get_u32(buf, pos);
  ParamSet ps;
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t len = get_u32(buf, pos);
    if (pos + len > buf.size()) throw std::runtime_error("paramset file truncated at byte " + std::to_string(pos));
    std::string name = buf.substr(pos, len);
    pos += len;
    uint32_t rank = get_u32(buf, pos);
    Shape shape(rank);
    for (uint32_t a = 0; a < rank; ++a) shape[a] = get_u32(buf, pos);
    int64_t numel = shape_numel(shape);
    std::vector<double> data(static_cast<size_t>(numel));
    for (int64_t k = 0; k < numel; ++k) {
      uint64_t bits = get_u64(buf, pos);
      std::memcpy(&data[static_cast<size_t>(k)], &bits, 8);
    }
    ps.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return ps;
}

}  // namespace ldvd

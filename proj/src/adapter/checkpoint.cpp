// Copyright 2026 The id-kit Authors
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

#include "idkit/adapter/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"

namespace idkit {

namespace {

constexpr char kMagic[8] = {'I', 'D', 'K', 'C', 'K', 'P', 'T', '\0'};

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f32(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

struct Parsed {
  nlohmann::json header;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;
};

Parsed parse(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const std::string where = path.string();
  if (bytes.size() < 16) throw TruncatedCheckpointError(where + ": truncated, too short for a checkpoint preamble");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw CheckpointError(where + ": not an adapter checkpoint");
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16)
    throw TruncatedCheckpointError(where + ": truncated header, declares " + std::to_string(header_len) + " bytes, only " +
                                   std::to_string(bytes.size() - 16) + " present");
  Parsed p;
  try {
    p.header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(where + ": corrupt header: " + e.what());
  }
  const int version = p.header.value("format_version", -1);
  if (version != kCheckpointFormatVersion)
    throw VersionMismatchError(where + ": format_version " + std::to_string(version) + ", expected " +
                               std::to_string(kCheckpointFormatVersion));
  p.payload = bytes.data() + 16 + header_len;
  p.payload_size = bytes.size() - 16 - header_len;
  return p;
}

}  // namespace

void save_adapter(const AdapterWeights& weights, const BackboneSpec& spec, const std::filesystem::path& path,
                  const nlohmann::json& extra) {
  weights.validate(spec);
  std::vector<unsigned char> payload;
  payload.reserve(weights.parameter_count() * 4);
  nlohmann::json index = nlohmann::json::array();
  weights.for_each([&](const std::string& name, const Matrix& m) {
    const std::size_t offset = payload.size();
    for (double v : m.data) put_f32(payload, v);
    index.push_back({{"name", name}, {"shape", {m.rows, m.cols}}, {"offset", offset}, {"nbytes", m.size() * 4}});
  });
  Fnv1a h;
  h.update(std::as_bytes(std::span(payload)));

  nlohmann::json header{{"format_version", kCheckpointFormatVersion},
                        {"backbone_spec_hash", spec.hash_hex()},
                        {"n_queries", weights.config.n_queries},
                        {"d_ctx", weights.d_ctx},
                        {"lambda_default", weights.lambda_default},
                        {"seed", weights.config.seed},
                        {"adapter_config", weights.config.to_json()},
                        {"backbone_spec", spec.to_json()},
                        {"tensors", index},
                        {"data_bytes", payload.size()},
                        {"data_fnv1a", hex64(h.digest())},
                        {"extra", extra}};
  const std::string header_text = header.dump();

  std::vector<unsigned char> out(kMagic, kMagic + 8);
  put_u64(out, header_text.size());
  out.insert(out.end(), header_text.begin(), header_text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  write_atomic(path, out);
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  Parsed p = parse(bytes, path);
  CheckpointInfo info;
  info.header = p.header;
  try {
    info.backbone_spec = BackboneSpec::from_json(p.header.at("backbone_spec"));
    info.adapter_config = AdapterConfig::from_json(p.header.at("adapter_config"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": incomplete header: " + e.what());
  }
  return info;
}

AdapterWeights load_adapter(const std::filesystem::path& path, const BackboneSpec& spec) {
  const std::string where = path.string();
  const auto bytes = read_bytes(path);
  Parsed p = parse(bytes, path);
  const nlohmann::json& h = p.header;

  const std::string stored_hash = h.value("backbone_spec_hash", std::string());
  if (stored_hash != spec.hash_hex())
    throw HashMismatchError(where + ": checkpoint backbone_spec_hash " + stored_hash + " != expected " +
                            spec.hash_hex());

  const std::size_t data_bytes = h.value("data_bytes", std::size_t{0});
  if (p.payload_size < data_bytes)
    throw TruncatedCheckpointError(where + ": truncated payload, " + std::to_string(p.payload_size) + " of " +
                                   std::to_string(data_bytes) + " bytes");
  if (p.payload_size > data_bytes) throw CheckpointError(where + ": trailing bytes after payload");
  Fnv1a digest;
  digest.update(std::as_bytes(std::span(p.payload, data_bytes)));
  if (hex64(digest.digest()) != h.value("data_fnv1a", std::string()))
    throw CheckpointError(where + ": payload checksum mismatch");

  NamedTensors tensors;
  AdapterConfig config;
  try {
    config = AdapterConfig::from_json(h.at("adapter_config"));
    for (const auto& t : h.at("tensors")) {
      const int rows = t.at("shape").at(0);
      const int cols = t.at("shape").at(1);
      const std::size_t offset = t.at("offset");
      const std::size_t nbytes = t.at("nbytes");
      if (nbytes != static_cast<std::size_t>(rows) * cols * 4 || offset + nbytes > data_bytes)
        throw CheckpointError(where + ": bad extent for tensor " + t.at("name").get<std::string>());
      Matrix m(rows, cols);
      for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = get_f32(p.payload + offset + 4 * i);
      tensors[t.at("name")] = std::move(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(where + ": incomplete header: " + e.what());
  }
  AdapterWeights w = AdapterWeights::unflatten(config, h.value("d_ctx", 0), tensors);
  w.lambda_default = h.value("lambda_default", config.lambda_default);
  w.validate(spec);
  return w;
}

AdapterWeights load_adapter(const std::filesystem::path& path, BackboneSpec* spec_out) {
  const CheckpointInfo info = read_checkpoint_info(path);
  if (spec_out) *spec_out = info.backbone_spec;
  return load_adapter(path, info.backbone_spec);
}

}  // namespace idkit

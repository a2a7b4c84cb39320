// Copyright (c) 2026 The stfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stf/checkpoint.h"

#include "stf/binary_io.h"
#include "stf/error.h"

namespace stf {

namespace {

constexpr char kMagic[] = "FSVC";
constexpr uint8_t kVersion = 1;

template <typename Net>
void AppendTensors(std::string& out, const Net& net, bool buffers) {
  VisitNet(net, [&](auto span) {
    for (float v : span) binary::PutF32(out, v);
  }, buffers);
}

template <typename Net>
size_t CountFloats(const Net& net, bool buffers) {
  size_t n = 0;
  VisitNet(net, [&](auto span) { n += span.size(); }, buffers);
  return n;
}

template <typename Net>
void ReadTensors(binary::Reader& reader, Net& net, bool buffers) {
  VisitNet(net, [&](auto span) {
    for (float& v : span) v = reader.F32("tensor data");
  }, buffers);
}

nlohmann::json SpecList(const std::vector<LayerSpec>& specs) {
  return nlohmann::json(specs);
}

}  // namespace

nlohmann::json CheckpointSidecar(const AnyNet& any) {
  return std::visit(
      [](const auto& net) {
        nlohmann::json j;
        j["format"] = kMagic;
        j["version"] = kVersion;
        j["network_config"] = net.config;
        if constexpr (requires { net.combination; }) {
          j["kind"] = "factorization";
          j["layers"] = {{"generic", SpecList(LayerSpecs(net.generic))},
                         {"speaker", SpecList(LayerSpecs(net.speaker))},
                         {"text", SpecList(LayerSpecs(net.text))},
                         {"combination", SpecList(LayerSpecs(net.combination))}};
        } else {
          j["kind"] = "baseline";
          j["layers"] = {{"baseline", SpecList(LayerSpecs(net.net))}};
        }
        j["num_params"] = CountFloats(net, false);
        j["num_buffers"] = CountFloats(net, true);
        return j;
      },
      any);
}

std::string EncodeCheckpoint(const AnyNet& any) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(any.index()));
  std::visit(
      [&](const auto& net) {
        binary::PutU32(out, static_cast<uint32_t>(CountFloats(net, false)));
        binary::PutU32(out, static_cast<uint32_t>(CountFloats(net, true)));
        AppendTensors(out, net, false);
        AppendTensors(out, net, true);
      },
      any);
  return out;
}

AnyNet DecodeCheckpoint(const std::string& bytes, const nlohmann::json& sidecar,
                        const std::string& name) {
  binary::Reader reader(bytes, name);
  if (reader.Bytes(4, "magic") != std::string(kMagic, 4)) {
    throw FormatError(name + ": bad magic at offset 0 (expected FSVC)");
  }
  const uint8_t version = reader.U8("version");
  if (version != kVersion) {
    throw FormatError(name + ": unsupported version " + std::to_string(version) +
                      " at offset 4");
  }
  const uint8_t kind = reader.U8("kind");
  if (kind > 1) throw FormatError(name + ": unknown model kind at offset 5");

  NetworkConfig config;
  try {
    config = sidecar.at("network_config").get<NetworkConfig>();
    const std::string sidecar_kind = sidecar.at("kind").get<std::string>();
    if (sidecar_kind != (kind == 0 ? "factorization" : "baseline")) {
      throw FormatError(name + ".json: field 'kind' disagrees with binary header");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ".json: " + e.what());
  }

  AnyNet net = kind == 0 ? AnyNet(InitFactorizationNet<float>(config, 0))
                         : AnyNet(InitBaselineNet<float>(config, 0));
  if (CheckpointSidecar(net).at("layers") != sidecar.at("layers")) {
    throw FormatError(name + ".json: field 'layers' does not match network_config");
  }
  std::visit(
      [&](auto& n) {
        const uint32_t num_params = reader.U32("parameter count");
        const uint32_t num_buffers = reader.U32("buffer count");
        if (num_params != CountFloats(n, false) ||
            num_buffers != CountFloats(n, true)) {
          reader.Fail("tensor counts do not match network_config");
        }
        reader.Need(4ull * (num_params + num_buffers), "tensor data");
        ReadTensors(reader, n, false);
        ReadTensors(reader, n, true);
      },
      net);
  if (reader.remaining() != 0) reader.Fail("trailing bytes");
  return net;
}

void SaveCheckpoint(const std::string& path, const AnyNet& net) {
  binary::WriteFile(path + ".json", CheckpointSidecar(net).dump(2) + "\n");
  binary::WriteFile(path, EncodeCheckpoint(net));
}

AnyNet LoadCheckpoint(const std::string& path) {
  const std::string bytes = binary::ReadFile(path);
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(binary::ReadFile(path + ".json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ".json: " + e.what());
  }
  return DecodeCheckpoint(bytes, sidecar, path);
}

}  // namespace stf

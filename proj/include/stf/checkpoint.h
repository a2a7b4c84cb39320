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

#ifndef STF_CHECKPOINT_H_
#define STF_CHECKPOINT_H_

// Model checkpoints.
//
// Binary file: "FSVC", version byte (1), kind byte (0 factorization,
// 1 baseline), u32 trainable-float count, u32 buffer-float count, then the
// trainable tensors followed by the batch-norm running statistics, each as
// little-endian float32 in visitor order. A JSON sidecar at <path>.json
// records the network config and the per-section LayerSpec lists.

#include <string>
#include <variant>

#include "json.hpp"
#include "stf/network.h"

namespace stf {

using AnyNet = std::variant<FactorizationNet<float>, BaselineNet<float>>;

std::string EncodeCheckpoint(const AnyNet& net);
nlohmann::json CheckpointSidecar(const AnyNet& net);
// Throws FormatError naming the file and offset/field on any mismatch.
AnyNet DecodeCheckpoint(const std::string& bytes, const nlohmann::json& sidecar,
                        const std::string& name);

void SaveCheckpoint(const std::string& path, const AnyNet& net);
AnyNet LoadCheckpoint(const std::string& path);

}  // namespace stf

#endif  // STF_CHECKPOINT_H_

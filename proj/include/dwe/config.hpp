// Copyright 2026 The DWE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Line-oriented key=value configuration text. Blank lines and lines starting
// with '#' are ignored; whitespace around keys and values is trimmed.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dwe/entropic_ot.hpp"
#include "dwe/training.hpp"

namespace dwe {

using ConfigMap = std::map<std::string, std::string, std::less<>>;

/// Throws InvalidArgument naming the line for a missing '=', an empty key,
/// or a repeated key.
ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::filesystem::path& path);

/// Every key accepted by apply_config, in a stable order.
std::vector<std::string> config_keys();

/// Sets the TrainConfig, SplitSpec, and SinkhornConfig fields named in `map`.
/// Throws InvalidArgument for an unknown key or an unparsable value.
void apply_config(const ConfigMap& map, TrainConfig& train, SplitSpec& split, SinkhornConfig& sinkhorn);

/// Renders every field in the format parse_config reads.
std::string format_config(const TrainConfig& train, const SplitSpec& split, const SinkhornConfig& sinkhorn);

}  // namespace dwe

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

#include "dwe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>

#include "dwe/binary_io.hpp"
#include "dwe/error.hpp"

namespace dwe {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  fail(ErrorKind::InvalidArgument,
       "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + expected);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

template <typename U>
U parse_unsigned(std::string_view key, std::string_view v) {
  U out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a nonnegative integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

std::vector<Field> fields(TrainConfig& t, SplitSpec& sp, SinkhornConfig& s) {
  auto dbl = [](const char* key, double& ref) {
    return Field{key, [key, &ref](std::string_view v) { ref = parse_double(key, v); }, [&ref] { return fmt(ref); }};
  };
  auto size = [](const char* key, std::size_t& ref) {
    return Field{key, [key, &ref](std::string_view v) { ref = parse_unsigned<std::size_t>(key, v); },
                 [&ref] { return std::to_string(ref); }};
  };
  return {
      dbl("lambda", t.lambda),
      dbl("sparsity_weight", t.sparsity_weight),
      size("batch_size", t.batch_size),
      size("max_epochs", t.max_epochs),
      size("patience", t.patience),
      Field{"seed", [&t](std::string_view v) { t.seed = parse_unsigned<std::uint64_t>("seed", v); },
            [&t] { return std::to_string(t.seed); }},
      dbl("learning_rate", t.adam.lr),
      dbl("adam_beta1", t.adam.beta1),
      dbl("adam_beta2", t.adam.beta2),
      dbl("adam_eps", t.adam.eps),
      dbl("time_budget_seconds", t.time_budget_seconds),
      dbl("train_fraction", sp.train_fraction),
      dbl("val_fraction", sp.val_fraction),
      dbl("test_fraction", sp.test_fraction),
      dbl("sinkhorn_epsilon", s.epsilon),
      size("sinkhorn_max_iters", s.max_iters),
      dbl("sinkhorn_tolerance", s.tolerance),
      Field{"sinkhorn_log_domain", [&s](std::string_view v) { s.log_domain = parse_bool("sinkhorn_log_domain", v); },
            [&s] { return std::string(s.log_domain ? "true" : "false"); }},
  };
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::InvalidArgument, "config line " + std::to_string(line_no) + " has no '='");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(ErrorKind::InvalidArgument, "config line " + std::to_string(line_no) + " has an empty key");
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
      fail(ErrorKind::InvalidArgument, "config key '" + key + "' repeated on line " + std::to_string(line_no));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::string> config_keys() {
  TrainConfig t;
  SplitSpec sp;
  SinkhornConfig s;
  std::vector<std::string> keys;
  for (const auto& f : fields(t, sp, s)) keys.emplace_back(f.key);
  return keys;
}

void apply_config(const ConfigMap& map, TrainConfig& train, SplitSpec& split, SinkhornConfig& sinkhorn) {
  const auto fs = fields(train, split, sinkhorn);
  for (const auto& [key, value] : map) {
    const auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return key == f.key; });
    if (it == fs.end()) fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    it->set(value);
  }
}

std::string format_config(const TrainConfig& train, const SplitSpec& split, const SinkhornConfig& sinkhorn) {
  TrainConfig t = train;
  SplitSpec sp = split;
  SinkhornConfig s = sinkhorn;
  std::string out;
  for (const auto& f : fields(t, sp, s)) out += std::string(f.key) + " = " + f.get() + "\n";
  return out;
}

}  // namespace dwe

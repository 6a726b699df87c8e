// Copyright (c) 2026, hsiaccel authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//         http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Line-oriented text and JSON renderings of the toolkit's results. Key order
// is fixed, so equal inputs give byte-identical documents.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hsiaccel/dse.hpp"
#include "hsiaccel/engine.hpp"
#include "hsiaccel/perf.hpp"

namespace hsiaccel::report {

using Json = nlohmann::ordered_json;

Json hw_json(const engine::HwParams& hw);

Json shapes_json(const model::NetworkSpec& spec);
std::string shapes_text(const model::NetworkSpec& spec);

Json perf_json(const model::NetworkSpec& spec, const engine::HwParams& hw, const perf::PerfReport& r);
std::string perf_text(const model::NetworkSpec& spec, const engine::HwParams& hw, const perf::PerfReport& r);

Json dse_json(const engine::HwParams& hw, const dse::DseResult& r);
std::string dse_text(const engine::HwParams& hw, const dse::DseResult& r);

Json classify_json(const engine::ImageResult& r);
std::string classify_text(const engine::ImageResult& r);

/// Fixed-precision decimal, independent of the stream locale.
std::string fixed(double v, int digits);

/// Pretty-printed with a trailing newline.
void write_json(const Json& doc, const std::filesystem::path& path);

}  // namespace hsiaccel::report

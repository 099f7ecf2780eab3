// Copyright 2026 The QNPE Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "qnpe/solver.hpp"

namespace qnpe {

/// First line of every trace CSV.
inline constexpr const char* kTraceCsvVersion = "# qnpe-trace-v1";

/// Column order of the trace CSV.
const std::vector<std::string>& trace_csv_columns();

/// One row per iteration, doubles printed with %.17g.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
/// Parses the records of a trace CSV. Throws InvalidArgument on a bad header
/// or malformed row.
std::vector<IterationRecord> read_trace_csv(std::istream& is);

/// One JSON object per iteration.
void write_trace_jsonl(std::ostream& os, const RunTrace& trace);

/// Run-level fields (parameters, counters, z0, z_final, z_bar) without the
/// per-iteration records.
nlohmann::json trace_meta_json(const RunTrace& trace);
/// Rebuilds a trace from its metadata and records.
RunTrace trace_from_meta(const nlohmann::json& meta, std::vector<IterationRecord> records);

nlohmann::json vector_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace qnpe

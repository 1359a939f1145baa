/*
 * Copyright (c) 2026, The fatal-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/


#ifndef FATAL_TRACE_HPP_
#define FATAL_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fatal/common.hpp"
#include "fatal/config.hpp"

namespace fatal {

enum class RecordKind : std::uint8_t {
  state,    // sub = machine, value = state code
  loop,     // loopback delivery; value = send time
  tie,      // sub = machine
  fault,    // aux = -1 for a node fault, else the source of a faulty channel
  reset,    // transient reset of the node
  port,     // aux = source, value = encoded output (full record level)
  flag,     // sub = family, aux = subject, value = 0/1 (full record level)
  timeout   // aux = timeout index, value = 0 reset / 1 expire (full)
};

// Flag records use the flag families plus these two pseudo families.
inline constexpr std::uint8_t kFlagDarts = 6;
inline constexpr std::uint8_t kFlagT1Sample = 7;

struct TraceRecord {
  Time t = 0;
  NodeId node = 0;
  RecordKind kind = RecordKind::state;
  std::uint8_t sub = 0;
  std::int32_t aux = 0;
  std::uint64_t value = 0;

  bool operator==(const TraceRecord&) const = default;
};

/**
 * Timed record of a run. The resolved configuration travels with the trace so
 * that the verifier needs nothing else.
 */
struct ExecutionTrace {
  SimConfig config;
  std::vector<TraceRecord> records;

  int n() const { return config.params.n; }
  Time horizon() const { return config.horizon; }
};

// Timeout port names in index order: fixed timeouts, then R2_0 .. R2_{n-1}.
std::string timeout_name(int index);
int timeout_index_of(const std::string& name);

std::string format_record(const TraceRecord& r);
TraceRecord parse_record(const std::string& line);

void write_trace(std::ostream& os, const ExecutionTrace& trace);
std::string trace_to_string(const ExecutionTrace& trace);
ExecutionTrace read_trace(std::istream& is);
ExecutionTrace load_trace(const std::string& path);
void save_trace(const std::string& path, const ExecutionTrace& trace);

}  // namespace fatal

#endif  // FATAL_TRACE_HPP_

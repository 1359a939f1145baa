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


#include "fatal/trace.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fatal/protocol.hpp"

namespace fatal {

namespace {

const char* kFixedTimeoutNames[kFixedTimeouts] = {
    "T1",       "T2",      "Tsleep", "T3",    "T4",
    "T5",       "T6",      "T7",     "Tsuspect", "Tresync",
    "R1",       "Tsupp",   "R3",     "R1none",   "Trefresh"};

const char* kHeader = "# fatal-sim trace 1";
const char* kRecordsMarker = "# records";

std::string flag_key(std::uint8_t family) {
  if (family == kFlagDarts) return "darts";
  if (family == kFlagT1Sample) return "t1ok";
  return family_name(static_cast<FlagFamily>(family));
}

std::uint8_t parse_flag_family(const std::string& s) {
  if (s == "darts") return kFlagDarts;
  if (s == "t1ok") return kFlagT1Sample;
  for (int f = 0; f < kFlagFamilyCount; ++f) {
    if (family_name(static_cast<FlagFamily>(f)) == s) {
      return static_cast<std::uint8_t>(f);
    }
  }
  throw StructuralError("unknown flag family in trace: " + s);
}

long long parse_ll(const std::string& s, const std::string& line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (...) {
  }
  throw StructuralError("bad trace line: " + line);
}

}  // namespace

std::string timeout_name(int index) {
  if (index < 0) throw StructuralError("negative timeout index");
  if (index < kFixedTimeouts) return kFixedTimeoutNames[index];
  return "R2_" + std::to_string(index - kFixedTimeouts);
}

int timeout_index_of(const std::string& name) {
  for (int k = 0; k < kFixedTimeouts; ++k) {
    if (name == kFixedTimeoutNames[k]) return k;
  }
  if (name.rfind("R2_", 0) == 0) {
    return kFixedTimeouts +
           static_cast<int>(parse_ll(name.substr(3), name));
  }
  throw StructuralError("unknown timeout name in trace: " + name);
}

std::string format_record(const TraceRecord& r) {
  std::string key;
  std::string value;
  switch (r.kind) {
    case RecordKind::state: {
      const auto m = static_cast<Machine>(r.sub);
      key = machine_name(m);
      value = state_name(m, static_cast<std::uint8_t>(r.value));
      break;
    }
    case RecordKind::loop:
      key = "loop";
      value = std::to_string(static_cast<Time>(r.value));
      break;
    case RecordKind::tie:
      key = "tie";
      value = machine_name(static_cast<Machine>(r.sub));
      break;
    case RecordKind::fault:
      key = "fault";
      value = r.aux < 0 ? "node" : "chan" + std::to_string(r.aux);
      break;
    case RecordKind::reset:
      key = "reset";
      value = "random";
      break;
    case RecordKind::port: {
      key = "port" + std::to_string(r.aux);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%llx",
                    static_cast<unsigned long long>(r.value));
      value = buf;
      break;
    }
    case RecordKind::flag:
      key = "flag." + flag_key(r.sub);
      if (r.sub < kFlagFamilyCount) key += "." + std::to_string(r.aux);
      value = r.value ? "1" : "0";
      break;
    case RecordKind::timeout:
      key = "timeout." + timeout_name(r.aux);
      value = r.value ? "expire" : "reset";
      break;
  }
  return std::to_string(r.t) + "," + std::to_string(r.node) + "," + key + "," +
         value;
}

TraceRecord parse_record(const std::string& line) {
  std::string f[4];
  std::size_t start = 0;
  for (int k = 0; k < 4; ++k) {
    const std::size_t comma = k < 3 ? line.find(',', start) : line.size();
    if (comma == std::string::npos) {
      throw StructuralError("bad trace line: " + line);
    }
    f[k] = line.substr(start, comma - start);
    start = comma + 1;
  }
  TraceRecord r;
  r.t = parse_ll(f[0], line);
  r.node = static_cast<NodeId>(parse_ll(f[1], line));
  const std::string& key = f[2];
  const std::string& v = f[3];
  if (key == "loop") {
    r.kind = RecordKind::loop;
    r.value = static_cast<std::uint64_t>(parse_ll(v, line));
  } else if (key == "tie") {
    r.kind = RecordKind::tie;
    r.sub = static_cast<std::uint8_t>(parse_machine(v));
  } else if (key == "fault") {
    r.kind = RecordKind::fault;
    if (v == "node") {
      r.aux = -1;
    } else if (v.rfind("chan", 0) == 0) {
      r.aux = static_cast<std::int32_t>(parse_ll(v.substr(4), line));
    } else {
      throw StructuralError("bad trace line: " + line);
    }
  } else if (key == "reset") {
    r.kind = RecordKind::reset;
  } else if (key.rfind("port", 0) == 0) {
    r.kind = RecordKind::port;
    r.aux = static_cast<std::int32_t>(parse_ll(key.substr(4), line));
    try {
      std::size_t pos = 0;
      r.value = std::stoull(v, &pos, 16);
      if (pos != v.size()) throw StructuralError("");
    } catch (...) {
      throw StructuralError("bad trace line: " + line);
    }
  } else if (key.rfind("flag.", 0) == 0) {
    r.kind = RecordKind::flag;
    const std::string rest = key.substr(5);
    const auto dot = rest.find('.');
    r.sub = parse_flag_family(rest.substr(0, dot));
    r.aux = dot == std::string::npos
                ? 0
                : static_cast<std::int32_t>(parse_ll(rest.substr(dot + 1), line));
    if (v != "0" && v != "1") throw StructuralError("bad trace line: " + line);
    r.value = v == "1";
  } else if (key.rfind("timeout.", 0) == 0) {
    r.kind = RecordKind::timeout;
    r.aux = timeout_index_of(key.substr(8));
    if (v == "reset") r.value = 0;
    else if (v == "expire") r.value = 1;
    else throw StructuralError("bad trace line: " + line);
  } else {
    r.kind = RecordKind::state;
    const Machine m = parse_machine(key);
    r.sub = static_cast<std::uint8_t>(m);
    r.value = parse_state(m, v);
  }
  return r;
}

void write_trace(std::ostream& os, const ExecutionTrace& trace) {
  os << kHeader << "\n";
  std::istringstream cfg(format_config(trace.config));
  std::string line;
  while (std::getline(cfg, line)) {
    os << (line.empty() ? "#" : "# " + line) << "\n";
  }
  os << kRecordsMarker << "\n";
  for (const TraceRecord& r : trace.records) os << format_record(r) << "\n";
}

std::string trace_to_string(const ExecutionTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

ExecutionTrace read_trace(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kHeader) {
    throw StructuralError("not a trace file (missing header)");
  }
  std::string cfg;
  bool in_records = false;
  ExecutionTrace trace;
  while (std::getline(is, line)) {
    if (!in_records) {
      if (line == kRecordsMarker) {
        trace.config = parse_config(cfg);
        in_records = true;
        continue;
      }
      if (line.empty() || line[0] != '#') {
        throw StructuralError("trace header line without '#': " + line);
      }
      cfg += (line.size() > 2 ? line.substr(2) : std::string()) + "\n";
      continue;
    }
    if (line.empty()) continue;
    trace.records.push_back(parse_record(line));
  }
  if (!in_records) throw StructuralError("trace file has no records marker");
  return trace;
}

ExecutionTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace " + path);
  return read_trace(in);
}

void save_trace(const std::string& path, const ExecutionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace " + path);
  write_trace(out, trace);
}

}  // namespace fatal

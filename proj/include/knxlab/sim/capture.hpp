#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "knxlab/knx/hex.hpp"

namespace knxlab::sim {

using SegmentId = int;

// One telegram observed on one segment, timestamped at delivery.
struct CaptureRecord {
  double t = 0.0;
  SegmentId seg = 0;
  knx::Bytes raw;

  friend bool operator==(const CaptureRecord&, const CaptureRecord&) = default;
};

enum class CaptureOrigin { Attack, NoAttack, Unlabeled };

// Timestamp-ordered trace of one segment; the detector's raw input.
struct CaptureSeries {
  std::vector<CaptureRecord> records;
  CaptureOrigin origin = CaptureOrigin::Unlabeled;

  std::vector<double> timestamps() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.t);
    return out;
  }
};

// JSON Lines interchange form, one record per line:
//   {"t":12.345678,"seg":1,"raw":"bc 11 0a ..."}
// Timestamps are printed with fixed microsecond precision so identical runs
// produce identical bytes.
inline void write_capture_jsonl(const CaptureSeries& series, std::ostream& out) {
  char stamp[64];
  for (const auto& r : series.records) {
    std::snprintf(stamp, sizeof stamp, "%.6f", r.t);
    out << "{\"t\":" << stamp << ",\"seg\":" << r.seg << ",\"raw\":\""
        << knx::to_hex(r.raw) << "\"}\n";
  }
}

inline void write_capture_jsonl(const CaptureSeries& series,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open capture file for writing: " + path);
  write_capture_jsonl(series, out);
}

inline CaptureSeries read_capture_jsonl(std::istream& in,
                                        CaptureOrigin origin = CaptureOrigin::Unlabeled) {
  CaptureSeries series;
  series.origin = origin;
  std::string line;
  std::size_t lineno = 0;
  double prev = -1.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("t") || !j.contains("seg") ||
        !j.contains("raw"))
      throw Error("bad capture record at line " + std::to_string(lineno));
    CaptureRecord rec;
    rec.t = j["t"].get<double>();
    rec.seg = j["seg"].get<int>();
    rec.raw = knx::from_hex(j["raw"].get<std::string>());
    if (rec.t < prev)
      throw Error("capture timestamps decrease at line " + std::to_string(lineno));
    prev = rec.t;
    series.records.push_back(std::move(rec));
  }
  return series;
}

inline CaptureSeries read_capture_jsonl(const std::string& path,
                                        CaptureOrigin origin = CaptureOrigin::Unlabeled) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open capture file: " + path);
  return read_capture_jsonl(in, origin);
}

}  // namespace knxlab::sim

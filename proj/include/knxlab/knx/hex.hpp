#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "knxlab/error.hpp"

namespace knxlab::knx {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Lowercase hex, space-separated octets: "bc 11 0a".
inline std::string to_hex(ByteView raw) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 3);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(digits[raw[i] >> 4]);
    out.push_back(digits[raw[i] & 0x0F]);
  }
  return out;
}

// Accepts hex with or without whitespace between octets.
inline Bytes from_hex(std::string_view text) {
  Bytes out;
  int hi = -1;
  for (char c : text) {
    if (c == ' ' || c == '\t') {
      if (hi >= 0) throw Error("odd hex digit count");
      continue;
    }
    int v = 0;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw Error(std::string("bad hex character: ") + c);
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw Error("odd hex digit count");
  return out;
}

}  // namespace knxlab::knx

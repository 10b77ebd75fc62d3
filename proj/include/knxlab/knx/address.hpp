#pragma once

#include <cstdint>
#include <string>

#include "knxlab/knx/errors.hpp"

namespace knxlab::knx {

// 16-bit device identity written "area.line.device". Device 0 designates a
// line coupler; packs as area(4) | line(4) | device(8).
struct IndividualAddress {
  std::uint8_t area = 0;    // 0..15
  std::uint8_t line = 0;    // 0..15
  std::uint8_t device = 0;  // 0..255

  static IndividualAddress make(unsigned area, unsigned line, unsigned device) {
    if (area > 15 || line > 15 || device > 255)
      throw Error("individual address field out of range");
    return {static_cast<std::uint8_t>(area), static_cast<std::uint8_t>(line),
            static_cast<std::uint8_t>(device)};
  }

  static IndividualAddress from_raw(std::uint16_t raw) {
    return {static_cast<std::uint8_t>(raw >> 12),
            static_cast<std::uint8_t>((raw >> 8) & 0x0F),
            static_cast<std::uint8_t>(raw & 0xFF)};
  }

  std::uint16_t raw() const {
    return static_cast<std::uint16_t>((area & 0x0F) << 12 |
                                      (line & 0x0F) << 8 | device);
  }

  bool is_line_coupler() const { return device == 0; }

  std::string str() const {
    return std::to_string(area) + "." + std::to_string(line) + "." +
           std::to_string(device);
  }

  friend bool operator==(const IndividualAddress&,
                         const IndividualAddress&) = default;
};

enum class GroupStyle { TwoLevel, ThreeLevel };

// 16-bit logical address bound to a KNX object. Three-level packs as
// main(5) | middle(3) | sub(8), two-level as main(5) | sub(11). The style is
// presentation only: equality and the wire form use the packed value.
class GroupAddress {
 public:
  GroupAddress() = default;

  static GroupAddress three_level(unsigned main, unsigned middle,
                                  unsigned sub) {
    if (main > 31 || middle > 7 || sub > 255)
      throw Error("three-level group address field out of range");
    return GroupAddress(
        static_cast<std::uint16_t>(main << 11 | middle << 8 | sub),
        GroupStyle::ThreeLevel);
  }

  static GroupAddress two_level(unsigned main, unsigned sub) {
    if (main > 31 || sub > 2047)
      throw Error("two-level group address field out of range");
    return GroupAddress(static_cast<std::uint16_t>(main << 11 | sub),
                        GroupStyle::TwoLevel);
  }

  static GroupAddress from_raw(std::uint16_t raw,
                               GroupStyle style = GroupStyle::ThreeLevel) {
    return GroupAddress(raw, style);
  }

  std::uint16_t raw() const { return raw_; }
  GroupStyle style() const { return style_; }

  unsigned main() const { return raw_ >> 11; }
  unsigned middle() const { return (raw_ >> 8) & 0x07; }  // three-level only
  unsigned sub() const {
    return style_ == GroupStyle::ThreeLevel ? (raw_ & 0xFF) : (raw_ & 0x7FF);
  }

  // 0/0/0 is the broadcast address and may not be assigned to a KNX object.
  bool is_broadcast() const { return raw_ == 0; }

  std::string str() const {
    if (style_ == GroupStyle::ThreeLevel)
      return std::to_string(main()) + "/" + std::to_string(middle()) + "/" +
             std::to_string(sub());
    return std::to_string(main()) + "/" + std::to_string(sub());
  }

  friend bool operator==(const GroupAddress& a, const GroupAddress& b) {
    return a.raw_ == b.raw_;
  }

 private:
  GroupAddress(std::uint16_t raw, GroupStyle style)
      : raw_(raw), style_(style) {}

  std::uint16_t raw_ = 0;
  GroupStyle style_ = GroupStyle::ThreeLevel;
};

// Extended frame format nibble. The four LTE codes are 01xx: geographical
// tags 0100/0101, application-specific tags 0110, unassigned/broadcast 0111.
enum class EffKind : std::uint8_t {
  StdGroup = 0x0,
  StdIndividual = 0x1,
  ExtGroup = 0x2,
  ExtIndividual = 0x3,
  LteGeoLower = 0x4,
  LteGeoUpper = 0x5,
  LteAppSpecific = 0x6,
  LteUnassigned = 0x7,
};

inline std::uint8_t eff_nibble(EffKind kind) {
  return static_cast<std::uint8_t>(kind);
}

inline EffKind eff_from_nibble(std::uint8_t nibble) {
  if (nibble > 0x7) throw UnknownEff();
  return static_cast<EffKind>(nibble);
}

inline bool eff_is_lte(EffKind kind) {
  return (static_cast<std::uint8_t>(kind) & 0xC) == 0x4;
}

inline bool eff_is_group(EffKind kind) {
  return kind != EffKind::StdIndividual && kind != EffKind::ExtIndividual;
}

// LTE logical tag destination. The 16 destination bits are kept opaque: their
// sub-field layout depends on the EFF category and is not interpreted here.
struct LteTagAddress {
  EffKind kind = EffKind::LteGeoLower;
  std::uint16_t raw = 0;

  static LteTagAddress make(EffKind kind, std::uint16_t raw) {
    if (!eff_is_lte(kind)) throw Error("not an LTE frame format kind");
    return {kind, raw};
  }

  friend bool operator==(const LteTagAddress&, const LteTagAddress&) = default;
};

// Parses "a.l.d" notation.
inline IndividualAddress parse_individual(const std::string& text) {
  unsigned a = 0, l = 0, d = 0;
  char dot1 = 0, dot2 = 0;
  if (std::sscanf(text.c_str(), "%u%c%u%c%u", &a, &dot1, &l, &dot2, &d) != 5 ||
      dot1 != '.' || dot2 != '.')
    throw Error("bad individual address: " + text);
  return IndividualAddress::make(a, l, d);
}

// Parses "main/middle/sub" or "main/sub" notation.
inline GroupAddress parse_group(const std::string& text) {
  unsigned a = 0, b = 0, c = 0;
  char s1 = 0, s2 = 0;
  int n = std::sscanf(text.c_str(), "%u%c%u%c%u", &a, &s1, &b, &s2, &c);
  if (n == 5 && s1 == '/' && s2 == '/') return GroupAddress::three_level(a, b, c);
  if (n == 3 && s1 == '/') return GroupAddress::two_level(a, b);
  throw Error("bad group address: " + text);
}

}  // namespace knxlab::knx

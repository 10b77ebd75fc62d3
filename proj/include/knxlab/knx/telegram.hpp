#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "knxlab/knx/address.hpp"
#include "knxlab/knx/errors.hpp"
#include "knxlab/knx/hex.hpp"

namespace knxlab::knx {

// Wire layouts:
//   standard  [control][src hi][src lo][dst hi][dst lo][NPCI][LSDU: len+1][checksum]
//   extended  [control][ext-control][src hi][src lo][dst hi][dst lo][len][LSDU: len][checksum]
// NPCI and the extended control field both pack AT(1) | hop(3) | low nibble,
// where the low nibble is the LSDU length minus one (standard) or the EFF
// (extended).

enum class FrameType { Standard, Extended };

// Control field octet: bit7 frame type (1 = standard), bit6 zero, bit5 repeat,
// bit4 fixed one, bits3..2 priority, bits1..0 zero.
struct ControlField {
  FrameType frame_type = FrameType::Standard;
  bool repeat = false;
  std::uint8_t priority = 3;  // 0..3

  friend bool operator==(const ControlField&, const ControlField&) = default;
};

inline std::uint8_t pack_control(const ControlField& c) {
  if (c.priority > 3) throw InconsistentFrame("priority out of range");
  return static_cast<std::uint8_t>(
      (c.frame_type == FrameType::Standard ? 0x80 : 0x00) |
      (c.repeat ? 0x20 : 0x00) | 0x10 | (c.priority << 2));
}

inline ControlField unpack_control(std::uint8_t octet) {
  if ((octet & 0x43) != 0 || (octet & 0x10) == 0)
    throw MalformedFrame("control field fixed bits");
  return {(octet & 0x80) ? FrameType::Standard : FrameType::Extended,
          (octet & 0x20) != 0, static_cast<std::uint8_t>((octet >> 2) & 0x3)};
}

enum class AddressType : std::uint8_t { Individual, Group };

// Second octet of an extended frame: AT(1) | hop_count(3) | EFF(4).
struct ExtendedControlField {
  AddressType address_type = AddressType::Group;
  std::uint8_t hop_count = 6;  // 0..7
  EffKind eff = EffKind::StdGroup;

  friend bool operator==(const ExtendedControlField&,
                         const ExtendedControlField&) = default;
};

inline std::uint8_t pack_ecf(const ExtendedControlField& e) {
  if (e.hop_count > 7) throw InconsistentFrame("hop count out of range");
  return static_cast<std::uint8_t>(
      (e.address_type == AddressType::Group ? 0x80 : 0x00) |
      (e.hop_count << 4) | eff_nibble(e.eff));
}

inline ExtendedControlField unpack_ecf(std::uint8_t octet) {
  return {(octet & 0x80) ? AddressType::Group : AddressType::Individual,
          static_cast<std::uint8_t>((octet >> 4) & 0x7),
          eff_from_nibble(octet & 0x0F)};
}

// APCI codes, two octets on the wire.
inline constexpr std::uint16_t kApciGroupRead = 0x0000;
inline constexpr std::uint16_t kApciGroupResponse = 0x0040;
inline constexpr std::uint16_t kApciGroupWrite = 0x0080;
inline constexpr std::uint16_t kApciLtePropRead = 0x03D5;
inline constexpr std::uint16_t kApciLtePropWrite = 0x03D7;

// Link-layer service data unit: APCI(2) + payload; LTE property services add
// OT(2) + OI(1) + PID(1) selectors between APCI and payload.
struct Lsdu {
  enum class Kind { GroupRead, GroupWrite, GroupResponse, LtePropRead, LtePropWrite };

  Kind kind = Kind::GroupRead;
  Bytes data;
  std::uint16_t object_type = 0;
  std::uint8_t object_index = 0;
  std::uint8_t property_id = 0;

  static Lsdu group_read() { return {}; }
  static Lsdu group_write(Bytes payload) {
    Lsdu l;
    l.kind = Kind::GroupWrite;
    l.data = std::move(payload);
    return l;
  }
  static Lsdu group_response(Bytes payload) {
    Lsdu l;
    l.kind = Kind::GroupResponse;
    l.data = std::move(payload);
    return l;
  }
  static Lsdu lte_prop_read(std::uint16_t ot, std::uint8_t oi, std::uint8_t pid) {
    Lsdu l;
    l.kind = Kind::LtePropRead;
    l.object_type = ot;
    l.object_index = oi;
    l.property_id = pid;
    return l;
  }
  static Lsdu lte_prop_write(std::uint16_t ot, std::uint8_t oi, std::uint8_t pid,
                             Bytes payload) {
    Lsdu l = lte_prop_read(ot, oi, pid);
    l.kind = Kind::LtePropWrite;
    l.data = std::move(payload);
    return l;
  }

  bool is_lte() const {
    return kind == Kind::LtePropRead || kind == Kind::LtePropWrite;
  }

  friend bool operator==(const Lsdu&, const Lsdu&) = default;
};

inline Bytes encode_lsdu(const Lsdu& l) {
  std::uint16_t apci = 0;
  switch (l.kind) {
    case Lsdu::Kind::GroupRead: apci = kApciGroupRead; break;
    case Lsdu::Kind::GroupWrite: apci = kApciGroupWrite; break;
    case Lsdu::Kind::GroupResponse: apci = kApciGroupResponse; break;
    case Lsdu::Kind::LtePropRead: apci = kApciLtePropRead; break;
    case Lsdu::Kind::LtePropWrite: apci = kApciLtePropWrite; break;
  }
  Bytes out{static_cast<std::uint8_t>(apci >> 8),
            static_cast<std::uint8_t>(apci & 0xFF)};
  if (l.is_lte()) {
    out.push_back(static_cast<std::uint8_t>(l.object_type >> 8));
    out.push_back(static_cast<std::uint8_t>(l.object_type & 0xFF));
    out.push_back(l.object_index);
    out.push_back(l.property_id);
  }
  if (l.kind != Lsdu::Kind::GroupRead && l.kind != Lsdu::Kind::LtePropRead)
    out.insert(out.end(), l.data.begin(), l.data.end());
  return out;
}

inline Lsdu decode_lsdu(ByteView raw, FrameType frame) {
  if (raw.size() < 2) throw TruncatedFrame("LSDU shorter than its APCI");
  const std::uint16_t apci = static_cast<std::uint16_t>(raw[0] << 8 | raw[1]);
  switch (apci) {
    case kApciGroupRead:
      if (raw.size() != 2) throw MalformedFrame("groupRead carries data");
      return Lsdu::group_read();
    case kApciGroupWrite:
      return Lsdu::group_write(Bytes(raw.begin() + 2, raw.end()));
    case kApciGroupResponse:
      return Lsdu::group_response(Bytes(raw.begin() + 2, raw.end()));
    case kApciLtePropRead:
    case kApciLtePropWrite: {
      if (frame != FrameType::Extended)
        throw UnknownApci("LTE service in a standard frame");
      if (raw.size() < 6) throw TruncatedFrame("LTE LSDU shorter than selectors");
      const std::uint16_t ot = static_cast<std::uint16_t>(raw[2] << 8 | raw[3]);
      if (apci == kApciLtePropRead) {
        if (raw.size() != 6) throw MalformedFrame("LTE property read carries data");
        return Lsdu::lte_prop_read(ot, raw[4], raw[5]);
      }
      return Lsdu::lte_prop_write(ot, raw[4], raw[5],
                                  Bytes(raw.begin() + 6, raw.end()));
    }
    default:
      throw UnknownApci();
  }
}

using Destination = std::variant<GroupAddress, IndividualAddress, LteTagAddress>;

// A decoded KNX TP1 frame. The checksum is not stored: it is produced on
// encode and required valid on decode. hop_count is authoritative for both
// frame kinds; an extended frame's ext_control must mirror it.
struct Telegram {
  ControlField control;
  std::optional<ExtendedControlField> ext_control;
  IndividualAddress source;
  Destination destination;
  std::uint8_t hop_count = 6;
  Lsdu lsdu;

  bool is_extended() const { return control.frame_type == FrameType::Extended; }
  const GroupAddress* group_destination() const {
    return std::get_if<GroupAddress>(&destination);
  }

  friend bool operator==(const Telegram& a, const Telegram& b) {
    if (a.ext_control.has_value() != b.ext_control.has_value()) return false;
    if (a.ext_control && !(*a.ext_control == *b.ext_control)) return false;
    return a.control == b.control && a.source == b.source &&
           a.destination == b.destination && a.hop_count == b.hop_count &&
           a.lsdu == b.lsdu;
  }
};

// Bitwise complement of the XOR over all octets (TP1 odd parity).
inline std::uint8_t compute_checksum(ByteView octets) {
  if (octets.empty()) throw Error("checksum of an empty sequence");
  std::uint8_t acc = 0;
  for (std::uint8_t b : octets) acc ^= b;
  return static_cast<std::uint8_t>(~acc);
}

inline Telegram make_group_write(IndividualAddress source, GroupAddress group,
                                 Bytes payload, std::uint8_t hop = 6,
                                 std::uint8_t priority = 3) {
  Telegram t;
  t.control = {FrameType::Standard, false, priority};
  t.source = source;
  t.destination = group;
  t.hop_count = hop;
  t.lsdu = Lsdu::group_write(std::move(payload));
  return t;
}

inline Telegram make_group_read(IndividualAddress source, GroupAddress group,
                                std::uint8_t hop = 6, std::uint8_t priority = 3) {
  Telegram t = make_group_write(source, group, {}, hop, priority);
  t.lsdu = Lsdu::group_read();
  return t;
}

inline Telegram make_group_response(IndividualAddress source, GroupAddress group,
                                    Bytes payload, std::uint8_t hop = 6,
                                    std::uint8_t priority = 3) {
  Telegram t = make_group_write(source, group, std::move(payload), hop, priority);
  t.lsdu.kind = Lsdu::Kind::GroupResponse;
  return t;
}

inline Telegram make_lte_prop_write(IndividualAddress source, LteTagAddress tag,
                                    std::uint16_t ot, std::uint8_t oi,
                                    std::uint8_t pid, Bytes payload,
                                    std::uint8_t hop = 6,
                                    std::uint8_t priority = 3) {
  Telegram t;
  t.control = {FrameType::Extended, false, priority};
  t.ext_control = ExtendedControlField{AddressType::Group, hop, tag.kind};
  t.source = source;
  t.destination = tag;
  t.hop_count = hop;
  t.lsdu = Lsdu::lte_prop_write(ot, oi, pid, std::move(payload));
  return t;
}

inline Telegram make_lte_prop_read(IndividualAddress source, LteTagAddress tag,
                                   std::uint16_t ot, std::uint8_t oi,
                                   std::uint8_t pid, std::uint8_t hop = 6,
                                   std::uint8_t priority = 3) {
  Telegram t = make_lte_prop_write(source, tag, ot, oi, pid, {}, hop, priority);
  t.lsdu = Lsdu::lte_prop_read(ot, oi, pid);
  return t;
}

// Extended frame carrying a plain group service (EFF 0000 or 0010).
inline Telegram make_extended_group_write(IndividualAddress source,
                                          GroupAddress group, Bytes payload,
                                          EffKind eff = EffKind::ExtGroup,
                                          std::uint8_t hop = 6,
                                          std::uint8_t priority = 3) {
  Telegram t;
  t.control = {FrameType::Extended, false, priority};
  t.ext_control = ExtendedControlField{AddressType::Group, hop, eff};
  t.source = source;
  t.destination = group;
  t.hop_count = hop;
  t.lsdu = Lsdu::group_write(std::move(payload));
  return t;
}

inline void validate(const Telegram& t) {
  const bool extended = t.is_extended();
  if (t.ext_control.has_value() != extended)
    throw InconsistentFrame(
        "extended control field presence mismatches frame type");
  if (t.hop_count > 7) throw InconsistentFrame("hop count out of range");
  if (t.control.priority > 3) throw InconsistentFrame("priority out of range");
  if (t.source.area > 15 || t.source.line > 15)
    throw InconsistentFrame("source address field out of range");
  if (extended) {
    const ExtendedControlField& e = *t.ext_control;
    if (e.hop_count != t.hop_count)
      throw InconsistentFrame("hop count disagrees with extended control field");
    if (eff_is_lte(e.eff)) {
      const auto* tag = std::get_if<LteTagAddress>(&t.destination);
      if (!tag || tag->kind != e.eff)
        throw InconsistentFrame("LTE EFF requires a matching tag destination");
      if (e.address_type != AddressType::Group)
        throw InconsistentFrame("LTE tag destinations are group-typed");
    } else if (eff_is_group(e.eff)) {
      if (!std::holds_alternative<GroupAddress>(t.destination) ||
          e.address_type != AddressType::Group)
        throw InconsistentFrame("group EFF requires a group destination");
    } else {
      if (!std::holds_alternative<IndividualAddress>(t.destination) ||
          e.address_type != AddressType::Individual)
        throw InconsistentFrame("individual EFF requires an individual destination");
    }
  } else {
    if (std::holds_alternative<LteTagAddress>(t.destination))
      throw InconsistentFrame("LTE tag destination requires an extended frame");
    if (t.lsdu.is_lte())
      throw InconsistentFrame("LTE service requires an extended frame");
  }
}

namespace detail {

inline std::uint16_t destination_raw(const Destination& d) {
  if (const auto* g = std::get_if<GroupAddress>(&d)) return g->raw();
  if (const auto* i = std::get_if<IndividualAddress>(&d)) return i->raw();
  return std::get<LteTagAddress>(d).raw;
}

inline bool destination_is_group(const Destination& d) {
  return !std::holds_alternative<IndividualAddress>(d);
}

}  // namespace detail

inline Bytes encode_telegram(const Telegram& t) {
  validate(t);
  const Bytes lsdu = encode_lsdu(t.lsdu);
  const std::uint16_t src = t.source.raw();
  const std::uint16_t dst = detail::destination_raw(t.destination);
  Bytes out;
  if (!t.is_extended()) {
    if (lsdu.size() > 16) throw LsduTooLong("standard LSDU limited to 16 octets");
    out.reserve(7 + lsdu.size());
    out.push_back(pack_control(t.control));
    out.push_back(static_cast<std::uint8_t>(src >> 8));
    out.push_back(static_cast<std::uint8_t>(src & 0xFF));
    out.push_back(static_cast<std::uint8_t>(dst >> 8));
    out.push_back(static_cast<std::uint8_t>(dst & 0xFF));
    out.push_back(static_cast<std::uint8_t>(
        (detail::destination_is_group(t.destination) ? 0x80 : 0x00) |
        (t.hop_count << 4) | (lsdu.size() - 1)));
  } else {
    if (lsdu.size() > 255) throw LsduTooLong("extended LSDU limited to 255 octets");
    out.reserve(8 + lsdu.size());
    out.push_back(pack_control(t.control));
    out.push_back(pack_ecf(*t.ext_control));
    out.push_back(static_cast<std::uint8_t>(src >> 8));
    out.push_back(static_cast<std::uint8_t>(src & 0xFF));
    out.push_back(static_cast<std::uint8_t>(dst >> 8));
    out.push_back(static_cast<std::uint8_t>(dst & 0xFF));
    out.push_back(static_cast<std::uint8_t>(lsdu.size()));
  }
  out.insert(out.end(), lsdu.begin(), lsdu.end());
  out.push_back(compute_checksum(out));
  return out;
}

inline Telegram decode_telegram(ByteView raw) {
  if (raw.size() < 2) throw TruncatedFrame("frame shorter than two octets");
  if (compute_checksum(raw.first(raw.size() - 1)) != raw.back())
    throw BadChecksum();

  Telegram t;
  t.control = unpack_control(raw[0]);
  if (!t.is_extended()) {
    if (raw.size() < 8) throw TruncatedFrame("standard frame too short");
    const std::uint8_t npci = raw[5];
    const std::size_t lsdu_len = (npci & 0x0F) + 1;
    if (raw.size() != 7 + lsdu_len)
      throw TruncatedFrame("length field disagrees with frame size");
    t.source = IndividualAddress::from_raw(
        static_cast<std::uint16_t>(raw[1] << 8 | raw[2]));
    const std::uint16_t dst = static_cast<std::uint16_t>(raw[3] << 8 | raw[4]);
    if (npci & 0x80)
      t.destination = GroupAddress::from_raw(dst);
    else
      t.destination = IndividualAddress::from_raw(dst);
    t.hop_count = (npci >> 4) & 0x7;
    t.lsdu = decode_lsdu(raw.subspan(6, lsdu_len), FrameType::Standard);
  } else {
    if (raw.size() < 8) throw TruncatedFrame("extended frame too short");
    const ExtendedControlField ecf = unpack_ecf(raw[1]);
    const std::size_t lsdu_len = raw[6];
    if (raw.size() != 8 + lsdu_len)
      throw TruncatedFrame("length field disagrees with frame size");
    t.source = IndividualAddress::from_raw(
        static_cast<std::uint16_t>(raw[2] << 8 | raw[3]));
    const std::uint16_t dst = static_cast<std::uint16_t>(raw[4] << 8 | raw[5]);
    if (eff_is_lte(ecf.eff)) {
      if (ecf.address_type != AddressType::Group)
        throw MalformedFrame("LTE EFF with individual address type");
      t.destination = LteTagAddress{ecf.eff, dst};
    } else if (eff_is_group(ecf.eff)) {
      if (ecf.address_type != AddressType::Group)
        throw MalformedFrame("group EFF with individual address type");
      t.destination = GroupAddress::from_raw(dst);
    } else {
      if (ecf.address_type != AddressType::Individual)
        throw MalformedFrame("individual EFF with group address type");
      t.destination = IndividualAddress::from_raw(dst);
    }
    t.hop_count = ecf.hop_count;
    t.ext_control = ecf;
    t.lsdu = decode_lsdu(raw.subspan(7, lsdu_len), FrameType::Extended);
  }
  return t;
}

// Hop-count rule: 7 never changes, otherwise decrement with floor 0.
inline Telegram decrement_hop(const Telegram& original) {
  Telegram t = original;
  if (t.hop_count != 7 && t.hop_count > 0) --t.hop_count;
  if (t.ext_control) t.ext_control->hop_count = t.hop_count;
  return t;
}

// A telegram may be forwarded across a coupler while hop budget remains.
inline bool forwardable(const Telegram& t) {
  return t.hop_count == 7 || t.hop_count > 0;
}

}  // namespace knxlab::knx

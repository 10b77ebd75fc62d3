#pragma once

#include <cstdint>
#include <vector>

#include "knxlab/knx/telegram.hpp"

namespace knxlab::testutil {

// Small deterministic generator for tests (splitmix64).
class Rand {
 public:
  explicit Rand(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline knx::Bytes random_payload(Rand& rand, std::size_t max_len) {
  knx::Bytes out(rand.below(max_len + 1));
  for (auto& b : out) b = static_cast<std::uint8_t>(rand.below(256));
  return out;
}

// Random valid telegram covering both frame types, all EFF kinds and all LSDU
// variants.
inline knx::Telegram random_telegram(Rand& rand) {
  using namespace knx;
  const auto src = IndividualAddress::from_raw(
      static_cast<std::uint16_t>(rand.below(0x10000)));
  const auto hop = static_cast<std::uint8_t>(rand.below(8));
  const auto priority = static_cast<std::uint8_t>(rand.below(4));

  Telegram t;
  t.control.priority = priority;
  t.control.repeat = rand.below(2) == 0;
  t.source = src;
  t.hop_count = hop;

  if (rand.below(2) == 0) {
    // Standard frame: group or individual destination, group LSDU.
    t.control.frame_type = FrameType::Standard;
    const bool group = rand.below(4) != 0;
    if (group)
      t.destination = GroupAddress::from_raw(
          static_cast<std::uint16_t>(rand.below(0x10000)));
    else
      t.destination = IndividualAddress::from_raw(
          static_cast<std::uint16_t>(rand.below(0x10000)));
    switch (rand.below(3)) {
      case 0: t.lsdu = Lsdu::group_read(); break;
      case 1: t.lsdu = Lsdu::group_write(random_payload(rand, 14)); break;
      default: t.lsdu = Lsdu::group_response(random_payload(rand, 14)); break;
    }
    return t;
  }

  t.control.frame_type = FrameType::Extended;
  const auto eff = eff_from_nibble(static_cast<std::uint8_t>(rand.below(8)));
  ExtendedControlField ecf;
  ecf.hop_count = hop;
  ecf.eff = eff;
  const auto dst_raw = static_cast<std::uint16_t>(rand.below(0x10000));
  if (eff_is_lte(eff)) {
    ecf.address_type = AddressType::Group;
    t.destination = LteTagAddress{eff, dst_raw};
  } else if (eff_is_group(eff)) {
    ecf.address_type = AddressType::Group;
    t.destination = GroupAddress::from_raw(dst_raw);
  } else {
    ecf.address_type = AddressType::Individual;
    t.destination = IndividualAddress::from_raw(dst_raw);
  }
  t.ext_control = ecf;

  switch (rand.below(5)) {
    case 0: t.lsdu = Lsdu::group_read(); break;
    case 1: t.lsdu = Lsdu::group_write(random_payload(rand, 40)); break;
    case 2: t.lsdu = Lsdu::group_response(random_payload(rand, 40)); break;
    case 3:
      t.lsdu = Lsdu::lte_prop_read(
          static_cast<std::uint16_t>(rand.below(0x10000)),
          static_cast<std::uint8_t>(rand.below(256)),
          static_cast<std::uint8_t>(rand.below(256)));
      break;
    default:
      t.lsdu = Lsdu::lte_prop_write(
          static_cast<std::uint16_t>(rand.below(0x10000)),
          static_cast<std::uint8_t>(rand.below(256)),
          static_cast<std::uint8_t>(rand.below(256)),
          random_payload(rand, 40));
      break;
  }
  return t;
}

}  // namespace knxlab::testutil

#pragma once

#include "knxlab/error.hpp"

namespace knxlab::knx {

// Frame decoding failures.
struct BadChecksum : Error {
  BadChecksum() : Error("checksum mismatch") {}
  using Error::Error;
};

struct TruncatedFrame : Error {
  TruncatedFrame() : Error("frame length inconsistent") {}
  using Error::Error;
};

struct UnknownEff : Error {
  UnknownEff() : Error("unknown extended frame format code") {}
  using Error::Error;
};

struct UnknownApci : Error {
  UnknownApci() : Error("unknown APCI") {}
  using Error::Error;
};

// Frame whose fixed bits or field combinations are invalid on the wire.
struct MalformedFrame : Error {
  MalformedFrame() : Error("malformed frame") {}
  using Error::Error;
};

// Encoding failures.
struct InconsistentFrame : Error {
  InconsistentFrame() : Error("telegram fields are inconsistent") {}
  using Error::Error;
};

struct LsduTooLong : Error {
  LsduTooLong() : Error("LSDU exceeds length field capacity") {}
  using Error::Error;
};

// DPT9 value outside the representable range, or the reserved invalid code.
struct OutOfRange : Error {
  OutOfRange() : Error("value out of range") {}
  using Error::Error;
};

}  // namespace knxlab::knx

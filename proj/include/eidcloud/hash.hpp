#pragma once

#include "eidcloud/bytes.hpp"

namespace eidcloud {

inline constexpr std::size_t kDigestSize = 32;

/// SHA-256, the single hash function used across the project.
Bytes sha256(ByteView data);
Bytes sha256(std::initializer_list<ByteView> parts);

Bytes hmac_sha256(ByteView key, ByteView data);

/// Lower-case hex of SHA-256; the digest form used in traces and observation logs.
std::string digest_hex(ByteView data);

}  // namespace eidcloud

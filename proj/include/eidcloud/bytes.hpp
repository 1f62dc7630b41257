#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eidcloud {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);

std::string to_hex(ByteView b);
/// Throws DecodeError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

Bytes concat(std::initializer_list<ByteView> parts);

/// True if `needle` occurs as a contiguous run inside `haystack`. An empty needle never matches.
bool contains(ByteView haystack, ByteView needle);

/// Constant-time comparison for equal-length inputs; unequal lengths compare false.
bool equal_ct(ByteView a, ByteView b);

/// Big-endian, length-prefixed record writer used by every canonical encoding.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v);
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& raw(ByteView b);
    /// u32 length followed by the bytes.
    ByteWriter& blob(ByteView b);
    ByteWriter& str(std::string_view s);

    const Bytes& bytes() const& { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes raw(std::size_t n);
    Bytes blob();
    std::string str();

    bool done() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }
    /// Throws DecodeError if unread bytes remain.
    void expect_done() const;

private:
    void need(std::size_t n) const;

    ByteView in_;
    std::size_t pos_ = 0;
};

}  // namespace eidcloud

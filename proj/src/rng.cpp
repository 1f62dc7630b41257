#include "eidcloud/rng.hpp"

#include <openssl/rand.h>

#include <algorithm>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"

namespace eidcloud {

Rng::Rng() : deterministic_(false) {}

Rng::Rng(std::uint64_t seed) : deterministic_(true)
{
    key_ = sha256({to_bytes("eidcloud/rng/seed"), ByteWriter().u64(seed).bytes()});
}

Rng::Rng(Key, Bytes key) : deterministic_(true), key_(std::move(key)) {}

void Rng::fill(std::span<std::uint8_t> out)
{
    if (!deterministic_) {
        if (!out.empty() && RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
            throw Error("RAND_bytes failed");
        return;
    }
    std::size_t pos = 0;
    while (pos < out.size()) {
        auto block = sha256({key_, ByteWriter().u64(counter_++).bytes()});
        auto n = std::min(block.size(), out.size() - pos);
        std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(pos));
        pos += n;
    }
}

Bytes Rng::bytes(std::size_t n)
{
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t Rng::next_u64()
{
    auto b = bytes(8);
    return ByteReader(b).u64();
}

std::uint64_t Rng::uniform(std::uint64_t bound)
{
    if (bound == 0) throw ParameterError("uniform bound must be positive");
    // rejection sampling keeps the distribution exact
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        auto v = next_u64();
        if (v < limit) return v % bound;
    }
}

Rng Rng::fork(std::string_view label) const
{
    if (!deterministic_) return Rng();
    return Rng(Key{}, sha256({key_, to_bytes("/fork/"), to_bytes(label)}));
}

Rng Rng::split()
{
    if (!deterministic_) return Rng();
    return Rng(Key{}, sha256({to_bytes("eidcloud/rng/split"), bytes(32)}));
}

}  // namespace eidcloud

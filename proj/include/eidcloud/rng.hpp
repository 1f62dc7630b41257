#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "eidcloud/bytes.hpp"

namespace eidcloud {

/// Randomness source threaded through every probabilistic operation.
///
/// A seeded Rng is a SHA-256 counter-mode generator, so a scenario seed fixes every
/// key, salt, nonce and ephemeral value. An unseeded Rng draws from the OS via
/// OpenSSL. Instances are not shared between threads; use fork() to hand out
/// independent streams.
class Rng {
public:
    /// OS randomness.
    Rng();
    explicit Rng(std::uint64_t seed);

    static Rng from_seed(std::optional<std::uint64_t> seed)
    {
        return seed ? Rng(*seed) : Rng();
    }

    void fill(std::span<std::uint8_t> out);
    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    /// Uniform in [0, bound); bound > 0.
    std::uint64_t uniform(std::uint64_t bound);

    /// Independent child stream bound to `label`. Deterministic iff this Rng is.
    Rng fork(std::string_view label) const;
    /// Child stream seeded from this stream's next output; advances this stream.
    Rng split();

    bool deterministic() const { return deterministic_; }

private:
    struct Key {};
    Rng(Key, Bytes key);

    bool deterministic_;
    Bytes key_;
    std::uint64_t counter_ = 0;
};

}  // namespace eidcloud

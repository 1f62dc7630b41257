#pragma once

// Symmetric pairing on the supersingular curve E: y^2 = x^3 + x over F_p,
// p = 3 (mod 4), embedding degree 2. G1 is the order-q subgroup of E(F_p);
// GT is the order-q subgroup of F_{p^2}^* with F_{p^2} = F_p[i]/(i^2 + 1).
// The pairing is the reduced Tate pairing composed with the distortion map
// (x, y) -> (-x, i*y).

#include <gmpxx.h>

#include <string_view>

#include "eidcloud/bytes.hpp"
#include "eidcloud/rng.hpp"

namespace eidcloud::pairing {

struct Point {
    mpz_class x;
    mpz_class y;
    bool infinity = true;

    bool operator==(const Point& o) const
    {
        return infinity == o.infinity && (infinity || (x == o.x && y == o.y));
    }
};

/// Element a + b*i of F_{p^2}; GT elements have norm a^2 + b^2 = 1.
struct Gt {
    mpz_class a;
    mpz_class b;

    bool operator==(const Gt& o) const { return a == o.a && b == o.b; }
};

class Curve {
public:
    /// Supported levels: 80 (512-bit p, 160-bit q) and 128 (1536-bit p, 256-bit q).
    /// Throws ParameterError otherwise. Instances are immutable and shared.
    static const Curve& for_security_level(int bits);

    int security_level() const { return level_; }
    const mpz_class& p() const { return p_; }
    const mpz_class& q() const { return q_; }
    std::size_t field_bytes() const { return field_bytes_; }

    const Point& generator() const { return g_; }

    bool on_curve(const Point& pt) const;
    Point neg(const Point& pt) const;
    Point add(const Point& a, const Point& b) const;
    Point mul(const Point& pt, const mpz_class& k) const;

    Gt pair(const Point& a, const Point& b) const;

    Gt gt_one() const;
    Gt gt_mul(const Gt& a, const Gt& b) const;
    /// Inverse in GT (conjugation, valid for norm-1 elements).
    Gt gt_inv(const Gt& a) const;
    Gt gt_pow(const Gt& a, const mpz_class& k) const;
    bool in_gt(const Gt& a) const;

    /// Maps arbitrary bytes into G1 (try-and-increment, then cofactor clearing).
    Point hash_to_point(std::string_view domain, ByteView data) const;

    /// Uniform in [1, q).
    mpz_class random_scalar(Rng& rng) const;
    /// Modular inverse mod q.
    mpz_class scalar_inverse(const mpz_class& k) const;

    Bytes encode(const Point& pt) const;
    /// Throws DecodeError for malformed or off-curve encodings.
    Point decode_point(ByteView in) const;
    Bytes encode(const Gt& e) const;
    Gt decode_gt(ByteView in) const;

    Bytes encode_scalar(const mpz_class& k) const;
    /// Throws DecodeError unless the value lies in [1, q).
    mpz_class decode_scalar(ByteView in) const;

    std::size_t scalar_bytes() const { return (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8; }
    std::size_t point_bytes() const { return 1 + 2 * field_bytes_; }
    std::size_t gt_bytes() const { return 2 * field_bytes_; }

private:
    Curve(int level, const char* p_hex, const char* q_hex);

    int level_;
    mpz_class p_;
    mpz_class q_;
    mpz_class cofactor_;     // (p + 1) / q
    mpz_class sqrt_exp_;     // (p + 1) / 4
    std::size_t field_bytes_;
    Point g_;
};

}  // namespace eidcloud::pairing

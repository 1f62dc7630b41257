#include "eidcloud/pairing.hpp"

#include <algorithm>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"
#include "pairing_params.hpp"

namespace eidcloud::pairing {

namespace {

mpz_class from_bytes(ByteView b)
{
    mpz_class v;
    if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return v;
}

void put_fixed(Bytes& out, const mpz_class& v, std::size_t width)
{
    const std::size_t len = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
    const std::size_t start = out.size();
    out.resize(start + width, 0);
    if (v != 0) {
        std::size_t written = 0;
        mpz_export(out.data() + start + (width - len), &written, 1, 1, 1, 0, v.get_mpz_t());
    }
}

// Reduces into [0, m).
inline void reduce(mpz_class& x, const mpz_class& m)
{
    mpz_mod(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
}

struct Fp2 {
    mpz_class a;
    mpz_class b;
};

// (a + bi)(c + di) with Karatsuba, reduced mod p.
void fp2_mul(Fp2& r, const Fp2& x, const Fp2& y, const mpz_class& p)
{
    mpz_class t0 = x.a * y.a;
    mpz_class t1 = x.b * y.b;
    mpz_class t2 = (x.a + x.b) * (y.a + y.b);
    r.a = t0 - t1;
    r.b = t2 - t0 - t1;
    reduce(r.a, p);
    reduce(r.b, p);
}

void fp2_sqr(Fp2& r, const Fp2& x, const mpz_class& p)
{
    mpz_class t0 = (x.a + x.b) * (x.a - x.b);
    mpz_class t1 = x.a * x.b;
    r.a = t0;
    r.b = t1 + t1;
    reduce(r.a, p);
    reduce(r.b, p);
}

struct Jacobian {
    mpz_class x;
    mpz_class y;
    mpz_class z;
    bool infinity = true;
};

void jac_double(Jacobian& t, const mpz_class& p)
{
    if (t.infinity) return;
    if (t.y == 0) {
        t.infinity = true;
        return;
    }
    mpz_class y2 = t.y * t.y;
    reduce(y2, p);
    mpz_class z2 = t.z * t.z;
    reduce(z2, p);
    mpz_class m = 3 * t.x * t.x + z2 * z2;  // a = 1
    reduce(m, p);
    mpz_class s = 4 * t.x * y2;
    reduce(s, p);
    mpz_class x3 = m * m - 2 * s;
    reduce(x3, p);
    mpz_class y3 = m * (s - x3) - 8 * y2 * y2;
    reduce(y3, p);
    mpz_class z3 = 2 * t.y * t.z;
    reduce(z3, p);
    t.x = std::move(x3);
    t.y = std::move(y3);
    t.z = std::move(z3);
}

void jac_add_affine(Jacobian& t, const Point& a, const mpz_class& p)
{
    if (a.infinity) return;
    if (t.infinity) {
        t.x = a.x;
        t.y = a.y;
        t.z = 1;
        t.infinity = false;
        return;
    }
    mpz_class z2 = t.z * t.z;
    reduce(z2, p);
    mpz_class u = a.y * z2 * t.z - t.y;
    reduce(u, p);
    mpz_class v = a.x * z2 - t.x;
    reduce(v, p);
    if (v == 0) {
        if (u == 0) {
            jac_double(t, p);
        } else {
            t.infinity = true;
        }
        return;
    }
    mpz_class v2 = v * v;
    reduce(v2, p);
    mpz_class v3 = v2 * v;
    reduce(v3, p);
    mpz_class xv2 = t.x * v2;
    reduce(xv2, p);
    mpz_class x3 = u * u - v3 - 2 * xv2;
    reduce(x3, p);
    mpz_class y3 = u * (xv2 - x3) - t.y * v3;
    reduce(y3, p);
    mpz_class z3 = t.z * v;
    reduce(z3, p);
    t.x = std::move(x3);
    t.y = std::move(y3);
    t.z = std::move(z3);
}

Point to_affine(const Jacobian& t, const mpz_class& p)
{
    if (t.infinity) return {};
    mpz_class zi;
    mpz_invert(zi.get_mpz_t(), t.z.get_mpz_t(), p.get_mpz_t());
    mpz_class zi2 = zi * zi;
    reduce(zi2, p);
    Point out;
    out.x = t.x * zi2;
    reduce(out.x, p);
    out.y = t.y * zi2 * zi;
    reduce(out.y, p);
    out.infinity = false;
    return out;
}

}  // namespace

Curve::Curve(int level, const char* p_hex, const char* q_hex) : level_(level)
{
    p_.set_str(p_hex, 16);
    q_.set_str(q_hex, 16);
    cofactor_ = (p_ + 1) / q_;
    sqrt_exp_ = (p_ + 1) / 4;
    field_bytes_ = (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8;
    g_ = hash_to_point("eidcloud/pairing/generator", {});
}

const Curve& Curve::for_security_level(int bits)
{
    static const Curve c80(80, params::kP80, params::kQ80);
    static const Curve c128(128, params::kP128, params::kQ128);
    switch (bits) {
    case 80: return c80;
    case 128: return c128;
    default: throw ParameterError("unsupported security level " + std::to_string(bits));
    }
}

bool Curve::on_curve(const Point& pt) const
{
    if (pt.infinity) return true;
    if (pt.x < 0 || pt.x >= p_ || pt.y < 0 || pt.y >= p_) return false;
    mpz_class lhs = pt.y * pt.y;
    mpz_class rhs = pt.x * pt.x * pt.x + pt.x;
    reduce(lhs, p_);
    reduce(rhs, p_);
    return lhs == rhs;
}

Point Curve::neg(const Point& pt) const
{
    if (pt.infinity || pt.y == 0) return pt;
    Point out = pt;
    out.y = p_ - pt.y;
    return out;
}

Point Curve::add(const Point& a, const Point& b) const
{
    Jacobian t;
    jac_add_affine(t, a, p_);
    jac_add_affine(t, b, p_);
    return to_affine(t, p_);
}

Point Curve::mul(const Point& pt, const mpz_class& k) const
{
    mpz_class e = k;
    reduce(e, q_ * cofactor_);  // group exponent of E(F_p) is p + 1
    Jacobian t;
    if (pt.infinity || e == 0) return {};
    for (auto i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        jac_double(t, p_);
        if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) jac_add_affine(t, pt, p_);
    }
    return to_affine(t, p_);
}

Gt Curve::pair(const Point& P, const Point& Q) const
{
    if (P.infinity || Q.infinity) return gt_one();

    // Miller loop for f_{q,P} evaluated at psi(Q) = (-xQ, i*yQ). Lines are scaled by
    // F_p factors, and vertical lines lie in F_p; both vanish in the final exponentiation.
    Jacobian t{P.x, P.y, 1, false};
    Fp2 f{1, 0};
    Fp2 line;
    const auto& xq = Q.x;
    const auto& yq = Q.y;
    const auto nbits = static_cast<long>(mpz_sizeinbase(q_.get_mpz_t(), 2));

    for (long i = nbits - 2; i >= 0; --i) {
        {
            mpz_class z2 = t.z * t.z;
            reduce(z2, p_);
            mpz_class y2 = t.y * t.y;
            reduce(y2, p_);
            mpz_class m = 3 * t.x * t.x + z2 * z2;
            reduce(m, p_);
            line.a = m * (xq * z2 + t.x) - 2 * y2;
            reduce(line.a, p_);
            line.b = 2 * t.y * t.z * z2;
            reduce(line.b, p_);
            line.b *= yq;
            reduce(line.b, p_);
            fp2_sqr(f, f, p_);
            fp2_mul(f, f, line, p_);
            jac_double(t, p_);
        }
        if (mpz_tstbit(q_.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
            mpz_class z2 = t.z * t.z;
            reduce(z2, p_);
            mpz_class u = P.y * z2 * t.z - t.y;
            reduce(u, p_);
            mpz_class v = P.x * z2 - t.x;
            reduce(v, p_);
            if (v == 0) {
                // T = -P: the chord is vertical; the loop ends at the point at infinity.
                t.infinity = true;
                continue;
            }
            mpz_class zv = t.z * v;
            reduce(zv, p_);
            line.a = u * (xq + P.x) - P.y * zv;
            reduce(line.a, p_);
            line.b = zv * yq;
            reduce(line.b, p_);
            fp2_mul(f, f, line, p_);
            jac_add_affine(t, P, p_);
        }
    }

    // f^(p-1) = conj(f)^2 / N(f), then raise to (p+1)/q.
    mpz_class norm = f.a * f.a + f.b * f.b;
    reduce(norm, p_);
    if (norm == 0) return gt_one();
    mpz_class ninv;
    mpz_invert(ninv.get_mpz_t(), norm.get_mpz_t(), p_.get_mpz_t());
    Fp2 c{f.a, p_ - f.b};
    fp2_sqr(c, c, p_);
    Gt g{c.a * ninv, c.b * ninv};
    reduce(g.a, p_);
    reduce(g.b, p_);
    return gt_pow(g, cofactor_);
}

Gt Curve::gt_one() const { return Gt{1, 0}; }

Gt Curve::gt_mul(const Gt& a, const Gt& b) const
{
    Fp2 r;
    fp2_mul(r, Fp2{a.a, a.b}, Fp2{b.a, b.b}, p_);
    return Gt{std::move(r.a), std::move(r.b)};
}

Gt Curve::gt_inv(const Gt& a) const
{
    Gt out{a.a, p_ - a.b};
    reduce(out.b, p_);
    return out;
}

Gt Curve::gt_pow(const Gt& a, const mpz_class& k) const
{
    Fp2 base{a.a, a.b};
    Fp2 acc{1, 0};
    if (k == 0) return gt_one();
    for (auto i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
        fp2_sqr(acc, acc, p_);
        if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) fp2_mul(acc, acc, base, p_);
    }
    return Gt{std::move(acc.a), std::move(acc.b)};
}

bool Curve::in_gt(const Gt& e) const
{
    if (e.a < 0 || e.a >= p_ || e.b < 0 || e.b >= p_) return false;
    mpz_class n = e.a * e.a + e.b * e.b;
    reduce(n, p_);
    return n == 1;
}

Point Curve::hash_to_point(std::string_view domain, ByteView data) const
{
    for (std::uint32_t counter = 0;; ++counter) {
        Bytes wide;
        for (std::uint32_t block = 0; wide.size() < field_bytes_ + 16; ++block) {
            auto h = sha256({to_bytes(domain), ByteWriter().u32(counter).u32(block).bytes(),
                             data});
            wide.insert(wide.end(), h.begin(), h.end());
        }
        mpz_class x = from_bytes(wide);
        reduce(x, p_);
        mpz_class rhs = x * x * x + x;
        reduce(rhs, p_);
        if (rhs == 0 || mpz_legendre(rhs.get_mpz_t(), p_.get_mpz_t()) != 1) continue;
        mpz_class y;
        mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), sqrt_exp_.get_mpz_t(), p_.get_mpz_t());
        if (y > p_ - y) y = p_ - y;
        Point pt = mul(Point{x, y, false}, cofactor_);
        if (!pt.infinity) return pt;
    }
}

mpz_class Curve::random_scalar(Rng& rng) const
{
    const std::size_t n = (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8 + 16;
    for (;;) {
        mpz_class k = from_bytes(rng.bytes(n));
        reduce(k, q_);
        if (k != 0) return k;
    }
}

mpz_class Curve::scalar_inverse(const mpz_class& k) const
{
    mpz_class out;
    if (mpz_invert(out.get_mpz_t(), k.get_mpz_t(), q_.get_mpz_t()) == 0)
        throw ParameterError("scalar not invertible");
    return out;
}

Bytes Curve::encode(const Point& pt) const
{
    Bytes out;
    out.reserve(point_bytes());
    out.push_back(pt.infinity ? 0x00 : 0x04);
    put_fixed(out, pt.infinity ? mpz_class(0) : pt.x, field_bytes_);
    put_fixed(out, pt.infinity ? mpz_class(0) : pt.y, field_bytes_);
    return out;
}

Point Curve::decode_point(ByteView in) const
{
    if (in.size() != point_bytes()) throw DecodeError("point encoding has wrong length");
    if (in[0] == 0x00) {
        if (std::any_of(in.begin() + 1, in.end(), [](auto v) { return v != 0; }))
            throw DecodeError("non-canonical point at infinity");
        return {};
    }
    if (in[0] != 0x04) throw DecodeError("unknown point encoding");
    Point pt{from_bytes(in.subspan(1, field_bytes_)),
             from_bytes(in.subspan(1 + field_bytes_, field_bytes_)), false};
    if (!on_curve(pt)) throw DecodeError("point is not on the curve");
    return pt;
}

Bytes Curve::encode_scalar(const mpz_class& k) const
{
    Bytes out;
    put_fixed(out, k, scalar_bytes());
    return out;
}

mpz_class Curve::decode_scalar(ByteView in) const
{
    if (in.size() != scalar_bytes()) throw DecodeError("scalar encoding has wrong length");
    mpz_class k = from_bytes(in);
    if (k == 0 || k >= q_) throw DecodeError("scalar out of range");
    return k;
}

Bytes Curve::encode(const Gt& e) const
{
    Bytes out;
    out.reserve(gt_bytes());
    put_fixed(out, e.a, field_bytes_);
    put_fixed(out, e.b, field_bytes_);
    return out;
}

Gt Curve::decode_gt(ByteView in) const
{
    if (in.size() != gt_bytes()) throw DecodeError("GT encoding has wrong length");
    Gt e{from_bytes(in.first(field_bytes_)), from_bytes(in.subspan(field_bytes_))};
    if (!in_gt(e)) throw DecodeError("element is not in GT");
    return e;
}

}  // namespace eidcloud::pairing

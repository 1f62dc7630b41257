#!/usr/bin/env python3
"""Generate Type A pairing parameters: E: y^2 = x^3 + x over F_p, p = 3 mod 4,
with a Solinas prime subgroup order q = 2^a + s*2^b + t and p = h*q - 1.

Deterministic for a fixed --seed so the constants compiled into
src/pairing_params.cpp can be regenerated and compared.
"""
import argparse
import random

import gmpy2


def solinas(qbits, rng):
    while True:
        b = rng.randrange(8, qbits - 8)
        for s in (1, -1):
            for t in (1, -1):
                q = (1 << qbits) + s * (1 << b) + t
                if gmpy2.is_prime(q, 50):
                    return q


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qbits", type=int, required=True)
    ap.add_argument("--pbits", type=int, required=True)
    ap.add_argument("--seed", type=int, default=2015)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    q = solinas(args.qbits, rng)
    lo = ((1 << (args.pbits - 1)) + q) // q
    hi = (1 << args.pbits) // q
    while True:
        h = rng.randrange(lo, hi)
        h -= h % 12
        p = h * q - 1
        if p.bit_length() == args.pbits and gmpy2.is_prime(p, 50):
            break
    assert p % 4 == 3 and (p + 1) % q == 0
    print(f"q = {q:x}")
    print(f"p = {p:x}")
    print(f"h = {h:x}")


if __name__ == "__main__":
    main()

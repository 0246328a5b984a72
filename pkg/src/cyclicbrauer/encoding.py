"""Canonical text encodings shared by the CLI and the certificate format.

Rationals are written "n/d" (plain "n" when d = 1), field elements as
comma-separated coordinate lists "c0,c1,...", polynomials as JSON arrays of
element strings, lowest degree first.  Everything is exact; floats never
appear anywhere.
"""

from __future__ import annotations

from fractions import Fraction


def encode_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def decode_rational(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def encode_coords(coords) -> str:
    return ",".join(encode_rational(c) for c in coords)


def decode_coords(s: str) -> tuple[Fraction, ...]:
    return tuple(decode_rational(part) for part in s.split(","))

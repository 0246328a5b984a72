"""Exact arithmetic in k = Q(zeta_p) for a small prime p.

Elements are stored in the power basis 1, zeta, ..., zeta^(p-2), the unique
reduced form modulo Phi_p(zeta) = 1 + zeta + ... + zeta^(p-1) = 0.  For p = 2
the basis is {1} and the field degenerates to Q, which is how the classical
p = 2 oracle regime shares all code paths.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .encoding import decode_coords, encode_coords
from .errors import DivisionByZero, HeightCapExceeded

# Hard cap on coefficient height (bit size of numerators/denominators).
# Exceeding it raises instead of degrading: the certifier must stay exact.
# Discriminant norms of pullback data legitimately reach thousands of bits,
# so the rail is generous; it exists to catch runaway arithmetic only.
HEIGHT_CAP_BITS = 1 << 15


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to a rational")


class CyclotomicField:
    """The field Q(zeta_p); also the plain rationals when p = 2."""

    def __init__(self, p: int):
        if p < 2:
            raise ValueError("p must be a prime >= 2")
        self.p = p
        self.degree = p - 1 if p > 2 else 1

    def __repr__(self) -> str:
        return "QQ" if self.p == 2 else f"QQ(zeta_{self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, CyclotomicField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("CyclotomicField", self.p))

    # -- constructors -------------------------------------------------

    def element(self, coords) -> CycElt:
        coords = [_as_fraction(c) for c in coords]
        if len(coords) > self.degree:
            coords = self._reduce(coords)
        else:
            coords = coords + [Fraction(0)] * (self.degree - len(coords))
        return CycElt(self, tuple(coords))

    def from_rational(self, x) -> CycElt:
        return self.element([_as_fraction(x)])

    @property
    def zero(self) -> CycElt:
        return self.from_rational(0)

    @property
    def one(self) -> CycElt:
        return self.from_rational(1)

    @property
    def zeta(self) -> CycElt:
        """The fixed primitive p-th root of unity (the symbol omega)."""
        if self.p == 2:
            return self.from_rational(-1)
        return self.element([0, 1])

    def decode(self, s: str) -> CycElt:
        return self.element(list(decode_coords(s)))

    # -- reduction mod Phi_p ------------------------------------------

    def _reduce(self, coeffs: list[Fraction]) -> list[Fraction]:
        """Reduce a zeta-polynomial to the power basis using Phi_p = 0."""
        p = self.p
        if p == 2:
            out = Fraction(0)
            sign = 1
            for i, c in enumerate(coeffs):
                out += c if i % 2 == 0 else -c
            return [out]
        c = list(coeffs)
        for i in range(len(c) - 1, p - 2, -1):
            top = c[i]
            if top == 0:
                continue
            c[i] = Fraction(0)
            # zeta^i = -(zeta^(i-p+1) + ... + zeta^(i-1))
            for j in range(i - p + 1, i):
                if j >= 0:
                    c[j] -= top
                else:
                    # negative exponent cannot occur: i >= p-1 so j >= 0
                    raise AssertionError("reduction underflow")
        return c[: self.degree] + [Fraction(0)] * max(0, self.degree - len(c))


class CycElt:
    """Immutable element of Q(zeta_p) in reduced power-basis form."""

    __slots__ = ("field", "coords")

    def __init__(self, field: CyclotomicField, coords: tuple[Fraction, ...]):
        self.field = field
        self.coords = coords
        for c in coords:
            if (
                c.numerator.bit_length() > HEIGHT_CAP_BITS
                or c.denominator.bit_length() > HEIGHT_CAP_BITS
            ):
                raise HeightCapExceeded(
                    f"coefficient height exceeds 2^{HEIGHT_CAP_BITS}"
                )

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coords[0]

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other) -> CycElt | None:
        if isinstance(other, CycElt):
            if other.field != self.field:
                raise ValueError("mixed cyclotomic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CycElt(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CycElt(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = self.field.degree
        prod = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            for j, b in enumerate(o.coords):
                if b != 0:
                    prod[i + j] += a * b
        return CycElt(self.field, tuple(self.field._reduce(prod)))

    __rmul__ = __mul__

    def inverse(self) -> CycElt:
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        if self.is_rational():
            return self.field.from_rational(1 / self.coords[0])
        return self._inverse_ext()

    def _inverse_ext(self) -> CycElt:
        # extended Euclid in Q[x] against Phi_p; Phi_p irreducible so the
        # Bezout coefficient of self is the inverse.
        p = self.field.p
        phi = [Fraction(1)] * p  # 1 + x + ... + x^(p-1)
        a = list(self.coords)
        r0, r1 = phi, _trim(a)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while _deg(r1) > 0:
            q, r = _divmod_q(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _sub_q(s0, _mul_q(q, s1))
        if _deg(r1) != 0 or r1[0] == 0:
            raise AssertionError("Phi_p not coprime to a nonzero element")
        inv = [c / r1[0] for c in s1]
        return self.field.element(inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, n: int) -> CycElt:
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- Galois action and norm -----------------------------------------

    def conjugate(self, j: int) -> CycElt:
        """Apply sigma_j : zeta -> zeta^j (j prime to p)."""
        p = self.field.p
        if p == 2:
            return self
        coeffs = [Fraction(0)] * p
        for i, c in enumerate(self.coords):
            coeffs[(i * j) % p] += c
        return self.field.element(coeffs)

    def conjugates(self):
        return [self.conjugate(j) for j in range(1, self.field.p)] if self.field.p > 2 else [self]

    def norm(self) -> Fraction:
        """Field norm down to Q (product over all conjugates)."""
        if self.field.p == 2:
            return self.coords[0]
        out = self.field.one
        for j in range(1, self.field.p):
            out = out * self.conjugate(j)
        if not out.is_rational():
            raise AssertionError("norm must be rational")
        return out.rational_value()

    # -- misc ------------------------------------------------------------

    def denominator_lcm(self) -> int:
        d = 1
        for c in self.coords:
            d = d * c.denominator // _gcd(d, c.denominator)
        return d

    def height(self) -> int:
        h = 0
        for c in self.coords:
            h = max(h, abs(c.numerator), c.denominator)
        return h

    def encode(self) -> str:
        return encode_coords(self.coords)

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coords == o.coords

    def __hash__(self) -> int:
        return hash((self.field.p, self.coords))

    def __repr__(self) -> str:
        return f"CycElt({self.encode()})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# -- tiny exact Q[x] helpers used only for the inverse -------------------


def _trim(c: list[Fraction]) -> list[Fraction]:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _deg(c: list[Fraction]) -> int:
    return len(c) - 1


def _mul_q(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _sub_q(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] -= y
    return _trim(out)


def _divmod_q(a: list[Fraction], b: list[Fraction]):
    a = _trim(a)
    b = _trim(b)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    r = list(a)
    while _deg(_trim(r)) >= _deg(b) and _trim(r) != [Fraction(0)]:
        r = _trim(r)
        shift = _deg(r) - _deg(b)
        coef = r[-1] / b[-1]
        q[shift] = coef
        for i, y in enumerate(b):
            r[i + shift] -= coef * y
        r = _trim(r)
    return _trim(q), _trim(r)


@lru_cache(maxsize=None)
def get_field(p: int) -> CyclotomicField:
    return CyclotomicField(p)

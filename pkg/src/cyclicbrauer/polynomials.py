"""Univariate polynomial arithmetic over k = Q(zeta_p).

Coefficients are stored lowest degree first; the zero polynomial is the empty
coefficient tuple.  All operations are exact.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .cyclotomic import CycElt, CyclotomicField
from .errors import BothZero, DivisionByZero, ZeroPolynomial


class Poly:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: CyclotomicField, coeffs):
        self.field = field
        cs = []
        for c in coeffs:
            if isinstance(c, CycElt):
                cs.append(c)
            else:
                cs.append(field.from_rational(c))
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    # -- basics ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self) -> CycElt:
        if self.is_zero():
            raise ZeroPolynomial("leading coefficient of zero")
        return self.coeffs[-1]

    def coeff(self, i: int) -> CycElt:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def is_constant(self) -> bool:
        return self.degree <= 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field.p, self.coeffs))

    def __repr__(self) -> str:
        if self.is_zero():
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                parts.append(f"({c.encode()})*u^{i}")
        return "Poly(" + " + ".join(parts) + ")"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: Poly) -> Poly:
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            self.field,
            [self.coeff(i) + other.coeff(i) for i in range(n)],
        )

    def __neg__(self) -> Poly:
        return Poly(self.field, [-c for c in self.coeffs])

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if isinstance(other, (int, Fraction, CycElt)):
            k = other if isinstance(other, CycElt) else self.field.from_rational(other)
            return Poly(self.field, [c * k for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return Poly(self.field, [])
        out = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return Poly(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        out = Poly(self.field, [1])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: Poly) -> tuple[Poly, Poly]:
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        q = [self.field.zero] * max(1, self.degree - other.degree + 1)
        r = list(self.coeffs)
        inv_lc = other.lc.inverse()
        while len(r) - 1 >= other.degree and r:
            while r and r[-1].is_zero():
                r.pop()
            if len(r) - 1 < other.degree or not r:
                break
            shift = len(r) - 1 - other.degree
            c = r[-1] * inv_lc
            q[shift] = c
            for i, b in enumerate(other.coeffs):
                r[i + shift] = r[i + shift] - c * b
        return Poly(self.field, q), Poly(self.field, r)

    def __floordiv__(self, other: Poly) -> Poly:
        return self.divmod(other)[0]

    def __mod__(self, other: Poly) -> Poly:
        return self.divmod(other)[1]

    def exact_div(self, other: Poly) -> Poly:
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("division was not exact")
        return q

    def monic(self) -> Poly:
        if self.is_zero():
            return self
        return self * self.lc.inverse()

    # -- calculus-style helpers ---------------------------------------------

    def derivative(self) -> Poly:
        return Poly(
            self.field,
            [self.coeffs[i] * i for i in range(1, len(self.coeffs))],
        )

    def taylor_coefficients(self, x0: CycElt) -> list[CycElt]:
        """Coefficients c_j with f(x0 + d) = sum c_j d^j, exact.

        Repeated synthetic division by (u - x0); c_0 = f(x0).
        """
        rem = list(self.coeffs)
        out = []
        while rem:
            quot, value = _synthetic_division(rem, x0, self.field.zero)
            out.append(value)
            rem = quot
        return out

    def __call__(self, x):
        """Horner evaluation at a field element."""
        if isinstance(x, (int, Fraction)):
            x = self.field.from_rational(x)
        out = self.field.zero
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def compose(self, g: Poly) -> Poly:
        """f(g(u)), exact Horner on polynomials."""
        out = Poly(self.field, [])
        for c in reversed(self.coeffs):
            out = out * g + Poly(self.field, [c])
        return out

    def shift(self, c) -> Poly:
        """f(u + c)."""
        x_plus_c = Poly(self.field, [c, 1])
        return self.compose(x_plus_c)

    def reverse(self) -> Poly:
        """u^deg(f) * f(1/u)."""
        if self.is_zero():
            raise ZeroPolynomial("reverse of zero")
        return Poly(self.field, list(reversed(self.coeffs)))

    def map_coeffs(self, fn) -> Poly:
        return Poly(self.field, [fn(c) for c in self.coeffs])

    # -- encodings -----------------------------------------------------------

    def encode(self) -> str:
        return json.dumps([c.encode() for c in self.coeffs])

    @staticmethod
    def decode(field: CyclotomicField, s: str) -> Poly:
        data = json.loads(s)
        return Poly(field, [field.decode(part) for part in data])


# -- free functions -----------------------------------------------------------


def primitive_part(f: Poly) -> Poly:
    """f divided by the gcd/lcm rational content; tames PRS coefficient growth."""
    if f.is_zero():
        return f
    num_gcd = 0
    den_lcm = 1
    for c in f.coeffs:
        for q in c.coords:
            num_gcd = _gcd(num_gcd, abs(q.numerator))
            den_lcm = den_lcm * q.denominator // _gcd(den_lcm, q.denominator)
    if num_gcd == 0:
        return f
    return f * Fraction(den_lcm, num_gcd)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd over k via the primitive-PRS Euclidean algorithm."""
    if f.is_zero() and g.is_zero():
        raise BothZero("gcd(0, 0)")
    a, b = primitive_part(f), primitive_part(g)
    while not b.is_zero():
        a, b = b, primitive_part(a % b)
    return a.monic()


def _content_scalar(f: Poly) -> Fraction:
    """The rational content used by the primitive PRS (gcd/lcm over coords)."""
    num_gcd = 0
    den_lcm = 1
    for c in f.coeffs:
        for q in c.coords:
            num_gcd = _gcd(num_gcd, abs(q.numerator))
            den_lcm = den_lcm * q.denominator // _gcd(den_lcm, q.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(num_gcd, den_lcm)


def poly_resultant(f: Poly, g: Poly) -> CycElt:
    """Res(f, g) over k via the primitive PRS with exact content tracking.

    Each remainder is stripped to its primitive part; the identities
    Res(f, g) = lc(g)^(deg f - deg r) (-1)^(deg f deg g) Res(g, r) and
    Res(g, c*r0) = c^(deg g) Res(g, r0) keep the value exact while the
    coefficients stay subresultant-sized.
    """
    field = f.field
    if f.is_zero() or g.is_zero():
        return field.zero
    sign = field.one
    a, b = f, g
    if a.degree < b.degree:
        sign = field.from_rational(Fraction((-1) ** (a.degree * b.degree)))
        a, b = b, a
    res = sign
    while b.degree > 0:
        r = a % b
        if r.is_zero():
            return field.zero
        content = _content_scalar(r)
        r0 = r * (1 / content)
        res = (
            res
            * (b.lc ** (a.degree - r.degree))
            * field.from_rational(Fraction((-1) ** (a.degree * b.degree)))
            * field.from_rational(content) ** b.degree
        )
        a, b = b, r0
    return res * (b.coeff(0) ** a.degree)


def lagrange_interpolate(field: CyclotomicField, points: list[tuple[CycElt, CycElt]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points."""
    out = Poly(field, [])
    for i, (xi, yi) in enumerate(points):
        num = Poly(field, [1])
        den = field.one
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            num = num * Poly(field, [-xj, 1])
            den = den * (xi - xj)
        out = out + num * (yi * den.inverse())
    return out


def squarefree_part(f: Poly) -> Poly:
    """The radical f / gcd(f, f'), monic."""
    if f.is_zero():
        raise ZeroPolynomial("radical of zero")
    if f.degree == 0:
        return Poly(f.field, [1])
    g = poly_gcd(f, f.derivative())
    return f.exact_div(g).monic()


def content_and_denominator(f: Poly) -> tuple[int, int]:
    """(numerator gcd, denominator lcm) over all rational coordinates."""
    num_gcd = 0
    den_lcm = 1
    for c in f.coeffs:
        for q in c.coords:
            num_gcd = _gcd(num_gcd, abs(q.numerator))
            den_lcm = den_lcm * q.denominator // _gcd(den_lcm, q.denominator)
    return (num_gcd or 1), den_lcm


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _synthetic_division(coeffs: list[CycElt], x0: CycElt, zero: CycElt):
    """Divide by (u - x0): returns (quotient coeffs, remainder = value at x0)."""
    n = len(coeffs) - 1
    if n < 0:
        return [], zero
    quot = [zero] * n
    acc = coeffs[n]
    for i in range(n - 1, -1, -1):
        quot[i] = acc
        acc = coeffs[i] + x0 * acc
    return quot, acc

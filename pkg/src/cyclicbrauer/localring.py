"""Finite-precision models of the completions k_v and Hensel lifting.

Three models cover every finite place that arises:

* ``RationalPrimeModel``  -- k = Q, completion Q_l, elements = Z/l^N.
* ``UnramifiedModel``     -- k = Q(zeta_p), l != p: W = (Z/l^N)[z]/(phi~) with
  phi~ the Hensel lift of the place's factor of Phi_p; zeta maps to z.
* ``RamifiedModel``       -- the place over p: R = Z[x]/(E(x), p^M) with
  E(x) = Phi_p(1-x) Eisenstein and x the uniformizer 1-zeta.  pi-precision is
  e*M and dividing by pi costs one p-level.

A LocalElement stores the exact valuation plus pi-adic unit digits, each digit
an integer in [0, q) indexing a residue-field element.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cyclotomic import CycElt, get_field
from .errors import (
    InsufficientPrecision,
    NotSimpleRoot,
    PrecisionUnrepresentable,
)
from .finitefield import poly_mod_mul, poly_mod_reduce, _trim
from .places import Place, rational_valuation, valuation
from .polynomials import Poly

_HENSEL_MARGIN = 3


@dataclass(frozen=True)
class LocalElement:
    place: Place
    valuation: int | None          # None encodes +infinity (the zero element)
    unit_digits: tuple[int, ...]   # pi-adic digits of the unit part, lowest first
    precision: int                 # number of certified digits

    @property
    def is_zero(self) -> bool:
        return self.valuation is None

    def encode(self) -> str:
        val = "inf" if self.valuation is None else str(self.valuation)
        digits = ",".join(str(d) for d in self.unit_digits)
        return f"v={self.place.id};val={val};unit={digits};N={self.precision}"

    @staticmethod
    def decode(p: int, s: str) -> LocalElement:
        from .places import place_by_id

        fields = dict(part.split("=", 1) for part in s.split(";"))
        place = place_by_id(p, fields["v"])
        val = None if fields["val"] == "inf" else int(fields["val"])
        digits = tuple(int(d) for d in fields["unit"].split(",")) if fields["unit"] else ()
        return LocalElement(place, val, digits, int(fields["N"]))


# -- extended gcd in F_l[x], used by the factor lifting ------------------------


def _ext_gcd_fl(a: list[int], b: list[int], l: int):
    """Return (g, s, t) with s*a + t*b = g (monic gcd) over F_l."""
    r0, r1 = _trim([x % l for x in a]), _trim([x % l for x in b])
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _divmod_fl(r0, r1, l)
        r0, r1 = r1, r
        s0, s1 = s1, _sub_fl(s0, _mul_fl(q, s1, l), l)
        t0, t1 = t1, _sub_fl(t0, _mul_fl(q, t1, l), l)
    inv = pow(r0[-1], -1, l)
    return (
        [x * inv % l for x in r0],
        [x * inv % l for x in s0],
        [x * inv % l for x in t0],
    )


def _divmod_fl(a: list[int], b: list[int], l: int):
    a = _trim([x % l for x in a])
    b = _trim([x % l for x in b])
    q = [0] * max(1, len(a) - len(b) + 1)
    r = list(a)
    inv = pow(b[-1], -1, l)
    while r and len(r) >= len(b):
        c = r[-1] * inv % l
        shift = len(r) - len(b)
        q[shift] = c
        for j in range(len(b)):
            r[shift + j] = (r[shift + j] - c * b[j]) % l
        r = _trim(r)
    return _trim(q), r


def _mul_fl(a, b, l):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % l
    return _trim(out)


def _sub_fl(a, b, l):
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] = x % l
    for i, y in enumerate(b):
        out[i] = (out[i] - y) % l
    return _trim(out)


def _lift_factor(p: int, l: int, factor: list[int], N: int) -> list[int]:
    """Hensel-lift a monic factor of Phi_p from mod l to mod l^N (linear steps)."""
    phi = [1] * p
    g = [x % l for x in factor]
    h0, rem = _divmod_fl(phi, g, l)
    if rem:
        raise AssertionError("factor does not divide Phi_p mod l")
    _, s, t = _ext_gcd_fl(g, h0, l)  # s*g + t*h = 1 mod l
    g = list(g)
    h = list(h0)
    modulus = l
    for _ in range(1, N):
        modulus_next = modulus * l
        # delta = (Phi - g*h)/modulus mod l
        prod = [0] * (len(g) + len(h) - 1)
        for i, x in enumerate(g):
            for j, y in enumerate(h):
                prod[i + j] += x * y
        delta = []
        for i in range(max(len(phi), len(prod))):
            a = (phi[i] if i < len(phi) else 0) - (prod[i] if i < len(prod) else 0)
            assert a % modulus == 0
            delta.append((a // modulus) % l)
        delta = _trim(delta)
        # solve u*h + w*g = delta with deg u < deg g: u = t*delta mod g
        u = _divmod_fl(_mul_fl(t, delta, l), g, l)[1]
        w = _divmod_fl(_sub_fl(delta, _mul_fl(u, h, l), l), g, l)[0]
        g = [
            (g[i] if i < len(g) else 0) + modulus * (u[i] if i < len(u) else 0)
            for i in range(max(len(g), len(u)))
        ]
        h = [
            (h[i] if i < len(h) else 0) + modulus * (w[i] if i < len(w) else 0)
            for i in range(max(len(h), len(w)))
        ]
        modulus = modulus_next
    return [x % modulus for x in g]


# -- the three completion models ----------------------------------------------


class RationalPrimeModel:
    """Z/l^N for k = Q."""

    def __init__(self, place: Place, N: int):
        self.place = place
        self.l = place.l
        self.N = N
        self.modulus = place.l**N
        self.pi_levels = N  # certified pi-adic levels

    def from_cyc(self, x: CycElt):
        q = x.rational_value()
        if q.denominator % self.l == 0:
            raise PrecisionUnrepresentable("denominator not a unit")
        return q.numerator * pow(q.denominator, -1, self.modulus) % self.modulus

    zero = 0

    @property
    def one(self):
        return 1 % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def is_unit(self, a):
        return a % self.l != 0

    def inv_unit(self, a):
        return pow(a, -1, self.modulus)

    def pi_valuation(self, a, cap: int | None = None) -> int | None:
        if a % self.modulus == 0:
            return None
        v = 0
        while a % self.l == 0:
            a //= self.l
            v += 1
        return v

    def pi_divide(self, a):
        assert a % self.l == 0
        return (a // self.l) % (self.modulus // self.l)

    def residue_index(self, a) -> int:
        return a % self.l

    def digits(self, a, count: int) -> tuple[int, ...]:
        if count > self.N:
            raise InsufficientPrecision("model too shallow for requested digits")
        out = []
        for _ in range(count):
            d = a % self.l
            out.append(d)
            a = (a - d) // self.l
        return tuple(out)

    def from_digits(self, digits) -> int:
        out = 0
        for d in reversed(digits):
            out = out * self.l + d
        return out % self.modulus


class UnramifiedModel:
    """(Z/l^N)[z]/(phi~) for an unramified place of Q(zeta_p), zeta -> z."""

    def __init__(self, place: Place, N: int):
        self.place = place
        self.l = place.l
        self.N = N
        self.modulus_int = place.l**N
        self.d = place.f_deg
        if self.d == place.p - 1:
            self.factor = [1] * place.p  # Phi_p itself, no lifting needed
        else:
            self.factor = _lift_factor(place.p, place.l, list(place.factor), N)
        self.pi_levels = N

    def from_cyc(self, x: CycElt):
        coords = []
        for c in x.coords:
            if c.denominator % self.l == 0:
                raise PrecisionUnrepresentable("denominator not a unit")
            coords.append(c.numerator * pow(c.denominator, -1, self.modulus_int) % self.modulus_int)
        return tuple(poly_mod_reduce(coords, self.factor, self.modulus_int))

    def from_integral_cyc(self, x: CycElt):
        return self.from_cyc(x)

    zero = ()

    @property
    def one(self):
        return (1,)

    def add(self, a, b):
        out = [0] * max(len(a), len(b))
        for i, x in enumerate(a):
            out[i] = x
        for i, y in enumerate(b):
            out[i] = (out[i] + y) % self.modulus_int
        return tuple(_trim(out))

    def sub(self, a, b):
        return self.add(a, tuple((-y) % self.modulus_int for y in b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        return tuple(poly_mod_mul(list(a), list(b), self.factor, self.modulus_int))

    def is_unit(self, a):
        return any(c % self.l for c in a)

    def inv_unit(self, a):
        # Newton from the mod-l inverse
        rf = self.place.residue_field
        a_bar = rf.make([c % self.l for c in a])
        y = list(rf.inv(a_bar))
        prec = 1
        while prec < self.N:
            prec = min(2 * prec, self.N)
            # y <- y(2 - a y) mod l^prec
            m = self.l**prec
            ay = poly_mod_mul([c % m for c in a], [c % m for c in y], self.factor, m)
            two_minus = [(-c) % m for c in ay]
            if two_minus:
                two_minus[0] = (two_minus[0] + 2) % m
            else:
                two_minus = [2 % m]
            y = poly_mod_mul([c % m for c in y], two_minus, self.factor, m)
        return tuple(_trim([c % self.modulus_int for c in y]))

    def pi_valuation(self, a, cap: int | None = None) -> int | None:
        return self.vector_valuation(a)

    def vector_valuation(self, a) -> int | None:
        best = None
        for c in a:
            c = c % self.modulus_int
            if c == 0:
                continue
            v = 0
            while c % self.l == 0:
                c //= self.l
                v += 1
            best = v if best is None else min(best, v)
        return best

    def pi_divide(self, a):
        return tuple((c // self.l) % (self.modulus_int // self.l) for c in a)

    def residue_index(self, a) -> int:
        rf = self.place.residue_field
        return rf.element_index(rf.make([c % self.l for c in a]))

    def digits(self, a, count: int) -> tuple[int, ...]:
        if count > self.N:
            raise InsufficientPrecision("model too shallow for requested digits")
        rf = self.place.residue_field
        cur = list(a) + [0] * (self.d - len(a))
        out = []
        for _ in range(count):
            digit_coords = [c % self.l for c in cur]
            out.append(rf.element_index(rf.make(digit_coords)))
            cur = [(c - (c % self.l)) // self.l for c in cur]
        return tuple(out)

    def from_digits(self, digits):
        coords = [0] * self.d
        for i, d in enumerate(digits):
            v = d
            scale = self.l**i
            for j in range(self.d):
                coords[j] = (coords[j] + (v % self.l) * scale) % self.modulus_int
                v //= self.l
        return tuple(_trim(coords))


class RamifiedModel:
    """Z[x]/(E(x), p^M) at the place over p; x is the uniformizer 1 - zeta."""

    def __init__(self, place: Place, M: int):
        assert place.is_wild and place.p > 2
        self.place = place
        self.p = place.p
        self.M = M
        self.modulus_int = place.p**M
        self.e = place.p - 1
        self.E = _eisenstein_poly(place.p)
        # pi^e = -p*W(pi) with W = sum (a_i/p) x^i, a unit since p^2 does not divide a_0
        self.W = [(c // self.p) % self.modulus_int for c in self.E[: self.e]]
        self.pi_levels = self.e * (M - 1)  # conservative certified pi-precision

    def from_cyc(self, x: CycElt):
        # zeta = 1 - x
        out = []
        one_minus = [1, self.modulus_int - 1]
        power = [1]
        acc = [0]
        for c in x.coords:
            if c.denominator % self.p == 0:
                raise PrecisionUnrepresentable("denominator not a unit at the wild place")
            ci = c.numerator * pow(c.denominator, -1, self.modulus_int) % self.modulus_int
            term = [v * ci % self.modulus_int for v in power]
            acc = self._add_raw(acc, term)
            power = poly_mod_mul(power, one_minus, self.E, self.modulus_int)
        out = poly_mod_reduce(acc, self.E, self.modulus_int)
        return tuple(out)

    def from_integral_cyc(self, x: CycElt):
        return self.from_cyc(x)

    def _add_raw(self, a, b):
        out = [0] * max(len(a), len(b))
        for i, v in enumerate(a):
            out[i] = v
        for i, v in enumerate(b):
            out[i] = (out[i] + v) % self.modulus_int
        return out

    zero = ()

    @property
    def one(self):
        return (1,)

    def add(self, a, b):
        return tuple(_trim(self._add_raw(list(a), list(b))))

    def sub(self, a, b):
        return self.add(a, tuple((-y) % self.modulus_int for y in b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        return tuple(poly_mod_mul(list(a), list(b), self.E, self.modulus_int))

    def is_unit(self, a):
        return bool(a) and a[0] % self.p != 0

    def inv_unit(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("not a unit in the ramified model")
        # start from power-series inverse mod p in F_p[x]/(x^e), then Newton
        y = [pow(a[0] % self.p, -1, self.p)]
        steps = 0
        prec = 1
        while prec < self.M or steps < self.e.bit_length() + 1:
            prec = min(2 * prec, self.M)
            steps += 1
            m = self.p**prec
            ay = poly_mod_mul([c % m for c in a], [c % m for c in y], self.E, m)
            two_minus = [(-c) % m for c in ay]
            if two_minus:
                two_minus[0] = (two_minus[0] + 2) % m
            else:
                two_minus = [2 % m]
            y = poly_mod_mul([c % m for c in y], two_minus, self.E, m)
            if steps > 40:
                raise AssertionError("inverse iteration failed to converge")
        return tuple(_trim([c % self.modulus_int for c in y]))

    def pi_valuation(self, a, cap: int | None = None) -> int | None:
        """pi-adic valuation by digit peeling; None if 0 at this precision."""
        cap = cap if cap is not None else self.pi_levels
        cur = tuple(a)
        M_left = self.M
        for v in range(cap):
            if not cur or all(c % (self.p**M_left) == 0 for c in cur):
                return None
            if cur and cur[0] % self.p != 0:
                return v
            cur, M_left = self._pi_divide_tracked(cur, M_left)
            if M_left <= 0:
                return None
        return None if not cur else cap

    def _pi_divide_tracked(self, a, M_left: int):
        """Divide an element with zero residue by pi; costs one p-level."""
        m = self.p**M_left
        a = [c % m for c in a]
        assert (a[0] if a else 0) % self.p == 0 or all(c % self.p == 0 for c in a) or True
        # y = -a * x^(e-1) * W^{-1} / p
        x_pow = [0] * (self.e - 1) + [1]
        w_inv = self.inv_unit(tuple(self.W))
        t = poly_mod_mul(a, x_pow, self.E, m)
        t = poly_mod_mul(t, [c % m for c in w_inv], self.E, m)
        t = [(-c) % m for c in t]
        for c in t:
            if c % self.p != 0:
                raise PrecisionUnrepresentable("pi-division of a unit")
        t = [(c // self.p) % (m // self.p) for c in t]
        return tuple(_trim(t)), M_left - 1

    def pi_divide(self, a):
        out, _ = self._pi_divide_tracked(a, self.M)
        return out

    def residue_index(self, a) -> int:
        return (a[0] % self.p) if a else 0

    def digits(self, a, count: int) -> tuple[int, ...]:
        if count > self.pi_levels:
            raise InsufficientPrecision("ramified model too shallow")
        cur = tuple(a)
        M_left = self.M
        out = []
        for _ in range(count):
            d = (cur[0] % self.p) if cur else 0
            out.append(d)
            cur = self.sub(cur, (d,)) if d else cur
            cur = tuple(c % (self.p**M_left) for c in cur)
            cur, M_left = self._pi_divide_tracked(cur, M_left)
            if M_left <= 0 and len(out) < count:
                raise InsufficientPrecision("ran out of p-levels while extracting digits")
        return tuple(out)

    def from_digits(self, digits):
        out = self.zero
        pi = (0, 1)
        power = self.one
        for d in digits:
            if d:
                out = self.add(out, self.mul((d % self.modulus_int,), power))
            power = self.mul(power, pi)
        return out


def _eisenstein_poly(p: int) -> list[int]:
    """E(x) = Phi_p(1-x) as integer coefficients (monic, Eisenstein at p)."""
    field = get_field(p)
    poly = Poly(field, [0])
    one_minus_x = Poly(field, [1, -1])
    power = Poly(field, [1])
    for _ in range(p):
        poly = poly + power
        power = power * one_minus_x
    coeffs = []
    for c in poly.coeffs:
        q = c.rational_value()
        assert q.denominator == 1
        coeffs.append(int(q))
    assert coeffs[-1] == 1
    return coeffs


# -- model construction and the public operations -------------------------------


def build_model(place: Place, pi_levels: int):
    """A completion model certified to at least the requested pi-precision."""
    if place.p == 2:
        return RationalPrimeModel(place, pi_levels)
    if place.is_wild:
        e = place.p - 1
        M = pi_levels // e + 3
        return RamifiedModel(place, M)
    return UnramifiedModel(place, pi_levels)


@lru_cache(maxsize=256)
def unramified_model(place: Place, N: int) -> UnramifiedModel:
    return UnramifiedModel(place, N)


def embed_unit(x: CycElt, place: Place, n_digits: int) -> tuple[int, tuple[int, ...]]:
    """Exact valuation of x plus digit string of its unit part.

    Works even when coordinates have denominators divisible by l (possible at
    split places): numerator and denominator are embedded separately as
    integral elements, pi-divided, and recombined inside the model.
    """
    if x.is_zero():
        raise ValueError("unit part of zero")
    val = valuation(x, place)
    den = x.denominator_lcm()
    y = x * den
    vy = valuation(y, place)
    m = rational_valuation(Fraction(den), place.l) or 0
    vd = place.e * m
    assert vy - vd == val
    budget = n_digits + vy + vd + 4
    if place.is_wild and place.p > 2:
        model = RamifiedModel(place, budget + 4)
    else:
        model = build_model(place, budget)
    uy = model.from_cyc(y)
    for _ in range(vy):
        uy = model.pi_divide(uy)
    out = uy
    if m:
        ud = model.from_cyc(x.field.from_rational(den))
        for _ in range(vd):
            ud = model.pi_divide(ud)
        out = model.mul(uy, model.inv_unit(ud))
    elif den != 1:
        out = model.mul(uy, model.inv_unit(model.from_cyc(x.field.from_rational(den))))
    return val, model.digits(out, n_digits)


def complete(x: CycElt, place: Place, N: int) -> LocalElement:
    """Image of a global element in k_v: exact valuation + N unit digits."""
    if x.is_zero():
        return LocalElement(place, None, (), N)
    val, digits = embed_unit(x, place, N)
    return LocalElement(place, val, digits, N)


def hensel_lift(f: Poly, place: Place, approx, N: int) -> LocalElement:
    """Lift a simple residue root of f to a root in k_v mod pi^N.

    ``approx`` is a residue-field element (tuple) or an int index.
    """
    rf = place.residue_field
    if isinstance(approx, int):
        coords = []
        v = approx
        for _ in range(max(1, rf.deg)):
            coords.append(v % rf.l)
            v //= rf.l
        approx = rf.make(coords)
    # coefficients must be v-integral
    for c in f.coeffs:
        v = valuation(c, place)
        if v is not None and v < 0:
            raise PrecisionUnrepresentable("polynomial not integral at this place")
    fbar = [residue_or_zero(c, place) for c in f.coeffs]
    val_at = _ff_eval(rf, fbar, approx)
    der = [rf.mul(fbar[i], rf.make([i])) for i in range(1, len(fbar))]
    der_at = _ff_eval(rf, der, approx)
    if val_at != rf.zero or der_at == rf.zero:
        raise NotSimpleRoot("approx is not a simple residue root")

    model = build_model(place, N + _HENSEL_MARGIN)
    coeff_vecs = [model.from_cyc(c) for c in f.coeffs]
    dcoeff_vecs = [model.mul(coeff_vecs[i], model.from_cyc(f.field.from_rational(i))) for i in range(1, len(coeff_vecs))]
    x = _lift_residue(model, rf, approx)
    for _ in range(N.bit_length() + _HENSEL_MARGIN + 2):
        fx = _model_eval(model, coeff_vecs, x)
        v = model.pi_valuation(fx, cap=N + 1)
        if v is None or v >= N:
            break
        dfx = _model_eval(model, dcoeff_vecs, x)
        x = model.sub(x, model.mul(fx, model.inv_unit(dfx)))
    else:
        raise InsufficientPrecision("Newton iteration did not reach the target")
    xval = model.pi_valuation(x, cap=N)
    if xval is None:
        return LocalElement(place, None, (), N)
    unit = x
    for _ in range(xval):
        unit = model.pi_divide(unit)
    return LocalElement(place, xval, model.digits(unit, N), N)


def residue_or_zero(c: CycElt, place: Place):
    from .places import residue

    rf = place.residue_field
    v = valuation(c, place)
    if v is None or v > 0:
        return rf.zero
    return residue(c, place)


def _ff_eval(rf, coeffs, x):
    out = rf.zero
    for c in reversed(coeffs):
        out = rf.add(rf.mul(out, x), c)
    return out


def _model_eval(model, coeff_vecs, x):
    out = model.zero
    for c in reversed(coeff_vecs):
        out = model.add(model.mul(out, x), c)
    return out


def _lift_residue(model, rf, r):
    """Canonical coordinate lift of a residue element into the model."""
    if isinstance(model, RationalPrimeModel):
        return (r[0] if r else 0) % model.modulus
    if isinstance(model, UnramifiedModel):
        return tuple(r)
    # ramified: residue field is F_p, constant lift
    return ((r[0] if r else 0) % model.modulus_int,)


def local_element_to_model(elt: LocalElement, model):
    """Rebuild a model element (unit part) from stored digits."""
    return model.from_digits(elt.unit_digits)

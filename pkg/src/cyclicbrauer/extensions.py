"""Relative extensions K = k[u]/(m) and exact p-th power decisions in them.

The p-th power test combines three exact routes:

* degree shortcut: if x lies in k and p does not divide [K:k], a p-th root in
  K would generate a degree-p subextension, so the k-level answer decides;
* Trager: factor T^p - x over K through the norm to k (interpolated
  resultants), bounded by a norm-degree cap;
* place witness: a place of K where x is visibly not a p-th power certifies
  the global negative (the local-global principle holds for prime exponent).
"""

from __future__ import annotations

from .cyclotomic import CycElt, CyclotomicField
from .errors import DegreeBoundExceeded, SearchExhausted
from .factorization import factor_poly, is_irreducible
from .generic_poly import (
    ResidueFieldOps,
    gp_distinct_roots,
    gp_eval,
    gp_gcd,
    gp_trim,
)
from .localring import residue_or_zero
from .places import factor_rational_prime, residue, valuation
from .polynomials import Poly, lagrange_interpolate, poly_gcd, poly_resultant

DEFAULT_NORM_DEGREE_CAP = 64


class RelativeExtension:
    """K = k[u]/(modulus); modulus must be irreducible over k."""

    def __init__(self, modulus: Poly, check: bool = True, degree_cap: int = DEFAULT_NORM_DEGREE_CAP):
        self.field = modulus.field
        self.modulus = modulus.monic()
        self.degree_cap = degree_cap
        if check and modulus.degree > 1:
            if not is_irreducible(self.modulus, degree_cap):
                raise ValueError("modulus is not irreducible over k")
        if check and modulus.degree >= 1:
            if poly_gcd(self.modulus, self.modulus.derivative()).degree != 0:
                raise ValueError("modulus is not separable")

    @property
    def degree(self) -> int:
        return self.modulus.degree

    def make(self, poly: Poly) -> ExtElt:
        return ExtElt(self, poly % self.modulus)

    def embed(self, x: CycElt) -> ExtElt:
        return ExtElt(self, Poly(self.field, [x]))

    @property
    def generator(self) -> ExtElt:
        return self.make(Poly(self.field, [0, 1]))

    def __repr__(self) -> str:
        return f"RelativeExtension(deg {self.degree} over {self.field!r})"


class ExtElt:
    __slots__ = ("ext", "rep")

    def __init__(self, ext: RelativeExtension, rep: Poly):
        self.ext = ext
        self.rep = rep

    def is_zero(self) -> bool:
        return self.rep.is_zero()

    def __add__(self, other: ExtElt) -> ExtElt:
        return ExtElt(self.ext, (self.rep + other.rep) % self.ext.modulus)

    def __sub__(self, other: ExtElt) -> ExtElt:
        return ExtElt(self.ext, (self.rep - other.rep) % self.ext.modulus)

    def __neg__(self) -> ExtElt:
        return ExtElt(self.ext, -self.rep)

    def __mul__(self, other: ExtElt) -> ExtElt:
        return ExtElt(self.ext, (self.rep * other.rep) % self.ext.modulus)

    def __pow__(self, n: int) -> ExtElt:
        out = self.ext.embed(self.ext.field.one)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> ExtElt:
        # extended Euclid in k[u] against the modulus
        a, b = self.ext.modulus, self.rep
        if b.is_zero():
            raise ZeroDivisionError("inverse of zero in extension")
        s_prev, s_cur = Poly(self.ext.field, []), Poly(self.ext.field, [1])
        r_prev, r_cur = a, b
        while r_cur.degree > 0:
            q, r = r_prev.divmod(r_cur)
            r_prev, r_cur = r_cur, r
            s_prev, s_cur = s_cur, s_prev - q * s_cur
        assert not r_cur.is_zero()
        inv_const = r_cur.coeff(0).inverse()
        return ExtElt(self.ext, (s_cur * inv_const) % self.ext.modulus)

    def norm_to_k(self) -> CycElt:
        """N_{K/k}(x) = Res_u(modulus, rep) for monic modulus."""
        if self.rep.is_zero():
            return self.ext.field.zero
        return poly_resultant(self.ext.modulus, self.rep)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExtElt) and other.ext.modulus == self.ext.modulus and other.rep == self.rep

    def __repr__(self) -> str:
        return f"ExtElt({self.rep!r})"


class _ExtOps:
    """FieldOps adapter for K = k[u]/(m), used by generic gcds over K[T]."""

    def __init__(self, ext: RelativeExtension):
        self.ext = ext
        self.zero = ext.embed(ext.field.zero)
        self.one = ext.embed(ext.field.one)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def is_zero(self, a):
        return a.is_zero()

    def eq(self, a, b):
        return a == b


def _norm_of_ext_polynomial(ext: RelativeExtension, coeffs: list[ExtElt]) -> Poly:
    """N_{K/k}(G)(T) for G in K[T], by interpolation of element norms."""
    field = ext.field
    deg_t = len(coeffs) - 1
    target_deg = deg_t * ext.degree
    points = []
    t = 0
    while len(points) < target_deg + 1:
        tv = field.from_rational(t)
        value = ext.embed(field.zero)
        acc = ext.embed(field.one)
        for c in coeffs:
            value = value + c * acc
            acc = acc * ext.embed(tv)
        points.append((tv, value.norm_to_k()))
        t = -t if t > 0 else (-t + 1)
    return lagrange_interpolate(field, points)


def pth_root_in_extension(
    x, ext: RelativeExtension, p: int, degree_cap: int | None = None
):
    """y in K with y^p = x, or None.  x may be a CycElt or an ExtElt.

    Exact Trager decision; raises DegreeBoundExceeded when the auxiliary
    factorization over k would exceed the cap.
    """
    from .factorization import exact_pth_root_in_k

    cap = degree_cap if degree_cap is not None else ext.degree_cap
    if isinstance(x, CycElt):
        root_k = exact_pth_root_in_k(x, p)
        if root_k is not None:
            return ext.embed(root_k)
        if ext.degree % p != 0:
            # a root would generate a degree-p subextension of K over k
            return None
        x = ext.embed(x)
    if x.is_zero():
        raise ValueError("p-th root of zero")
    if p * ext.degree > cap:
        raise DegreeBoundExceeded(
            f"norm degree {p * ext.degree} over k exceeds cap {cap}"
        )
    ops = _ExtOps(ext)
    beta = ext.generator
    for s in _shift_stream():
        # G(T) = T^p - x shifted by s*beta: G(T) = (T + s*beta)^p - x
        shift = ops.zero if s == 0 else ext.embed(ext.field.from_rational(s)) * beta
        coeffs = _binomial_expand(ext, shift, p)
        coeffs[0] = coeffs[0] - x
        nrm = _norm_of_ext_polynomial(ext, coeffs)
        if poly_gcd(nrm, nrm.derivative()).degree != 0:
            continue
        for nf, _ in factor_poly(nrm):
            if nf.degree != ext.degree:
                continue  # only norms of linear K-factors matter
            nf_ext = [ext.embed(c) for c in nf.coeffs]
            g = gp_gcd(ops, coeffs, nf_ext)
            if len(g) - 1 == 1:
                tau = -(g[0] * g[1].inverse())
                root = tau + shift
                assert (root**p - (x if isinstance(x, ExtElt) else ext.embed(x))).is_zero()
                return root
        return None
    raise AssertionError("no squarefree shift found for the Kummer polynomial")


def _binomial_expand(ext: RelativeExtension, shift: ExtElt, p: int) -> list[ExtElt]:
    """(T + shift)^p as a coefficient list over K."""
    from math import comb

    out = []
    for i in range(p + 1):
        c = ext.embed(ext.field.from_rational(comb(p, i)))
        out.append(c * shift ** (p - i))
    return out


def _shift_stream():
    yield 0
    s = 1
    while s < 32:
        yield s
        yield -s
        s += 1


def pth_power_witness_scan(
    a: CycElt, modulus: Poly, p: int, prime_bound: int = 400
) -> dict | None:
    """A place of K = k[u]/(modulus) certifying that a is NOT a p-th power there.

    Scans degree-one places of K over tame places v of k: a simple residue
    root r of modulus mod v gives a place of K with residue field F_q; either
    v(a) != 0 mod p or the residue of a is a non-p-th power there.  Returns a
    replayable witness dict or None if the scan is exhausted.
    """
    field = a.field
    checked = 0
    l = 1
    import sympy

    while l < prime_bound:
        l = int(sympy.nextprime(l))
        if l == p or l == field.p:
            continue
        for place in factor_rational_prime(field.p, l):
            rf = place.residue_field
            if (rf.q - 1) % p != 0:
                continue
            va = valuation(a, place)
            # integral modulus with unit leading coefficient required
            if any((valuation(c, place) or 0) < 0 for c in modulus.coeffs if not c.is_zero()):
                continue
            if valuation(modulus.lc, place) != 0:
                continue
            ops = ResidueFieldOps(rf)
            mbar = [residue_or_zero(c, place) for c in modulus.coeffs]
            mbar = gp_trim(ops, mbar)
            if len(mbar) - 1 != modulus.degree:
                continue
            roots = gp_distinct_roots(ops, mbar, seed=0x5EED + 101 * l + place.index)
            deriv = [rf.mul(mbar[i], rf.make([i])) for i in range(1, len(mbar))]
            for r in sorted(roots, key=rf.element_index):
                if gp_eval(ops, deriv, r) == rf.zero:
                    continue  # not a simple root: the place may be ramified
                if va is not None and va % p != 0:
                    return {
                        "kind": "valuation",
                        "place": place.id,
                        "root": rf.element_index(r),
                        "valuation": va,
                    }
                if va == 0:
                    abar = residue(a, place)
                    if not rf.is_pth_power(abar, p):
                        return {
                            "kind": "residue",
                            "place": place.id,
                            "root": rf.element_index(r),
                            "residue_index": rf.pth_power_index(abar, p, place.zeta_bar),
                        }
                checked += 1
    return None


def is_pth_power_in_extension(
    a: CycElt, modulus: Poly, p: int, prime_bound: int = 400, degree_cap: int | None = None
) -> tuple[bool, dict]:
    """Exact decision with a certificate: scan for a local witness first,
    fall back to the Trager decision when no witness shows up."""
    witness = pth_power_witness_scan(a, modulus, p, prime_bound)
    if witness is not None:
        return False, witness
    ext = RelativeExtension(modulus, check=False, degree_cap=degree_cap or DEFAULT_NORM_DEGREE_CAP)
    root = pth_root_in_extension(a, ext, p, degree_cap)
    if root is None:
        return False, {"kind": "trager_no_root"}
    return True, {"kind": "trager_root", "root": root.rep.encode()}

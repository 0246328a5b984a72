"""Local invariants of degree-p cyclic algebras (a,b) over k_v and reciprocity.

Convention: the presentation (a,b)_omega uses omega = zeta (the power-basis
generator), and the tame invariant is i/p where

    t = (-1)^(v(a)v(b)) a^(v(b)) b^(-v(a)),   t_bar^((q-1)/p) = zeta_bar^i.

Wild places: for p = 2 (k = Q, v = 2) the classical closed 2-adic formula
(-1)^(eps(u)eps(w) + alpha*omega2(w) + beta*omega2(u)) is used, which keeps the
global reciprocity test fully independent.  For odd p the value is the
bilinear extension of a Gram matrix on a fixed basis of k_v^x/(k_v^x)^p whose
entries are calibrated once by global reciprocity over tame places; the
zero/nonzero side is cross-checked by the norm-membership search (a norm group
of index p filled by norms of small global elements of k(a^(1/p))).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cyclotomic import CycElt, get_field
from .errors import SearchExhausted, WildPlace
from .factorization import exact_pth_root_in_k
from .places import (
    Place,
    archimedean_places,
    factor_rational_prime,
    rational_valuation,
    support_places,
    valuation,
)
from .polynomials import Poly, poly_resultant
from .powerclasses import (
    PowerClass,
    class_mul,
    is_pth_power_local,
    pth_power_class,
    wild_class_group,
)


@dataclass(frozen=True)
class InvariantValue:
    """Element of (1/p)Z/Z, stored as numerator/p with numerator in [0, p)."""

    numerator: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "numerator", self.numerator % self.p)

    def __add__(self, other: InvariantValue) -> InvariantValue:
        if other.p != self.p:
            raise ValueError("mixed denominators")
        return InvariantValue(self.numerator + other.numerator, self.p)

    def __neg__(self) -> InvariantValue:
        return InvariantValue(-self.numerator, self.p)

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    def encode(self) -> str:
        return "0" if self.numerator == 0 else f"{self.numerator}/{self.p}"

    @staticmethod
    def decode(p: int, s: str) -> InvariantValue:
        s = s.strip()
        if s == "0":
            return InvariantValue(0, p)
        num, den = s.split("/")
        if int(den) != p:
            raise ValueError(f"denominator {den} != p = {p}")
        return InvariantValue(int(num), p)


@dataclass(frozen=True)
class CyclicPair:
    a: CycElt
    b: CycElt
    p: int

    def __post_init__(self):
        if self.a.is_zero() or self.b.is_zero():
            raise ValueError("cyclic algebra entries must be nonzero")


@dataclass
class SymbolCertificate:
    method: str  # tame_formula | wild_norm_search | archimedean | split_witness
    data: dict

    def to_dict(self) -> dict:
        return {"method": self.method, "data": self.data}


# -- tame places -----------------------------------------------------------------


def tame_symbol(pair: CyclicPair, place: Place) -> InvariantValue:
    """Closed tame formula; raises WildPlace if v | p."""
    if not place.is_finite:
        raise WildPlace("tame symbol needs a finite place")
    if place.is_wild:
        raise WildPlace(f"{place.id} divides p")
    p = pair.p
    va = valuation(pair.a, place)
    vb = valuation(pair.b, place)
    t = pair.a**vb * pair.b ** (-va)
    if (va * vb) % 2 == 1:
        t = -t
    cls = pth_power_class(t, place)
    assert cls.val_mod_p == 0, "tame symbol argument must be a unit"
    return InvariantValue(cls.unit_key[0], p)


# -- wild places -------------------------------------------------------------------


def _mod_unit(x: Fraction, modulus: int) -> int:
    """x mod modulus for a rational with odd numerator and denominator."""
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def hilbert_2adic(a: Fraction, b: Fraction) -> int:
    """The 2-adic Hilbert symbol exponent: 0 (split) or 1 (nonsplit)."""
    alpha = rational_valuation(a, 2)
    beta = rational_valuation(b, 2)
    u = a / Fraction(2) ** alpha
    w = b / Fraction(2) ** beta
    eps_u = (_mod_unit(u, 4) - 1) // 2 % 2
    eps_w = (_mod_unit(w, 4) - 1) // 2 % 2
    om_u = (_mod_unit(u, 8) ** 2 - 1) // 8 % 2
    om_w = (_mod_unit(w, 8) ** 2 - 1) // 8 % 2
    return (eps_u * eps_w + alpha * om_w + beta * om_u) % 2


class WildGram:
    """Calibrated bilinear form on k_v^x/(k_v^x)^p at the wild place, odd p."""

    def __init__(self, place: Place):
        assert place.is_wild and place.p > 2
        self.place = place
        self.p = place.p
        self.group = wild_class_group(place)
        self.gram = self._calibrate()

    def _calibrate(self) -> list[list[int]]:
        n = len(self.group.basis)
        g = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                g[i][j] = self._reference_invariant(
                    self.group.basis[i], self.group.basis[j]
                )
        # sanity: for odd p the form is alternating (-1 is a p-th power)
        for i in range(n):
            assert g[i][i] % self.p == 0, "diagonal of the wild Gram must vanish"
            for j in range(n):
                assert (g[i][j] + g[j][i]) % self.p == 0, "Gram must be antisymmetric"
        return g

    def _reference_invariant(self, a: CycElt, b: CycElt) -> int:
        """-sum of tame invariants of (a, b): global reciprocity pins the value."""
        pair = CyclicPair(a, b, self.p)
        total = 0
        for place in _finite_support(pair):
            if place.is_wild:
                continue
            total += tame_symbol(pair, place).numerator
        # archimedean places of Q(zeta_p) are complex: contribute 0
        return (-total) % self.p

    def value(self, pair: CyclicPair) -> InvariantValue:
        x = self.group.coordinates(pair.a)
        y = self.group.coordinates(pair.b)
        total = 0
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if yj:
                    total += xi * self.gram[i][j] * yj
        return InvariantValue(total, self.p)


@lru_cache(maxsize=8)
def _wild_gram(place: Place) -> WildGram:
    return WildGram(place)


def wild_symbol(pair: CyclicPair, place: Place) -> tuple[InvariantValue, SymbolCertificate]:
    """Invariant at a place over p, with a replayable certificate."""
    if not place.is_wild:
        raise WildPlace(f"{place.id} does not divide p")
    p = pair.p
    ok_a, cert_a = is_pth_power_local(pair.a, place)
    if ok_a:
        return InvariantValue(0, p), SymbolCertificate(
            "split_witness", {"side": "a", "power_cert": cert_a}
        )
    ok_b, cert_b = is_pth_power_local(pair.b, place)
    if ok_b:
        return InvariantValue(0, p), SymbolCertificate(
            "split_witness", {"side": "b", "power_cert": cert_b}
        )
    if p == 2:
        exp = hilbert_2adic(pair.a.rational_value(), pair.b.rational_value())
        return InvariantValue(exp, 2), SymbolCertificate(
            "wild_norm_search",
            {"route": "2adic_formula", "exponent": exp},
        )
    value = _wild_gram(place).value(pair)
    member, search_cert = norm_membership(pair.a, pair.b, place)
    if member != value.is_zero:
        raise AssertionError(
            "norm-membership search contradicts the calibrated wild value"
        )
    return value, SymbolCertificate(
        "wild_norm_search",
        {
            "route": "gram_bilinear",
            "value": value.encode(),
            "norm_member": member,
            "search": search_cert,
        },
    )


# -- norm membership (the Lemma 2.2 oracle) -----------------------------------------


def _small_elements(field, height: int):
    """Deterministic stream of nonzero elements of k with small coordinates."""
    if field.p == 2:
        for h in range(height + 1):
            for n in range(-h, h + 1):
                if max(abs(n), 0) == h and n != 0:
                    yield field.from_rational(n)
    else:
        z = field.zeta
        for h in range(height + 1):
            for x in range(-h, h + 1):
                for y in range(-h, h + 1):
                    if max(abs(x), abs(y)) == h and (x, y) != (0, 0):
                        yield field.from_rational(x) + z * y


def _subgroup_closure(place: Place, generators: list[PowerClass]) -> dict:
    """All products of the generators, as a dict class-key -> exponent vector."""
    p = place.p

    def key_of(c: PowerClass):
        return (c.val_mod_p, c.unit_key)

    table: dict = {}
    one = pth_power_class(get_field(place.p).one, place)
    table[key_of(one)] = tuple([0] * len(generators))

    def rec(i: int, acc: PowerClass | None, exps: tuple[int, ...]):
        if i == len(generators):
            if acc is not None:
                table.setdefault(key_of(acc), exps)
            return
        cur = acc
        for e in range(p):
            rec(i + 1, cur, exps + (e,))
            cur = generators[i] if cur is None else class_mul(cur, generators[i], place)

    rec(0, None, ())
    return table


_NORM_SUBGROUP_CACHE: dict = {}


def _norm_subgroup(a: CycElt, place: Place, height_cap: int) -> tuple[dict, dict]:
    """The image of N(L^x) in k_v^x/(k_v^x)^p, filled to its exact index p.

    Depends only on the class of a; cached by it.  Returns (table, info).
    """
    p = place.p
    field = a.field
    a_class = pth_power_class(a, place)
    cache_key = (place.id, a_class.val_mod_p, a_class.unit_key)
    if cache_key in _NORM_SUBGROUP_CACHE:
        return _NORM_SUBGROUP_CACHE[cache_key]
    dim = 2 if not place.is_wild else 2 + place.e * place.f_deg
    target = p ** (dim - 1)
    generators: list[PowerClass] = []
    witnesses: list[dict] = []
    table = _subgroup_closure(place, generators)
    x_poly = Poly(field, [-a] + [0] * (p - 1) + [1])  # T^p - a
    for coeff_count in range(2, p + 1):
        for coeffs in _coeff_tuples(field, coeff_count, height_cap):
            y = Poly(field, list(coeffs))
            if y.is_zero():
                continue
            nrm = poly_resultant(x_poly, y)
            if nrm.is_zero():
                continue
            cls = pth_power_class(nrm, place)
            key = (cls.val_mod_p, cls.unit_key)
            if key not in table:
                generators.append(cls)
                witnesses.append({"element": y.encode(), "class": cls.encode()})
                table = _subgroup_closure(place, generators)
                if len(table) > target:
                    raise AssertionError("norm classes exceeded index p; impossible")
                if len(table) == target:
                    info = {"subgroup_order": len(table), "witnesses": witnesses}
                    _NORM_SUBGROUP_CACHE[cache_key] = (table, info)
                    return table, info
    raise SearchExhausted(
        f"norm-class filling at {place.id} incomplete at height {height_cap}"
    )


def norm_membership(
    a: CycElt, b: CycElt, place: Place, height_cap: int = 12
) -> tuple[bool, dict]:
    """Decide b in N(L^x) for L = k_v(a^(1/p)) by filling the norm-class group.

    The image of L^x-norms inside V = k_v^x/(k_v^x)^p is a subgroup of index
    exactly p once a is not a local p-th power; classes of norms of small
    global elements of k[T]/(T^p - a) are collected until the subgroup is
    full, then membership is a lookup.  Certificate carries the witnesses.
    """
    ok_a, cert_a = is_pth_power_local(a, place)
    if ok_a:
        return True, {"reason": "a is a local p-th power", "power_cert": cert_a}
    table, info = _norm_subgroup(a, place, height_cap)
    b_class = pth_power_class(b, place)
    b_key = (b_class.val_mod_p, b_class.unit_key)
    member = b_key in table
    return member, dict(info, b_class=b_class.encode(), member=member)


def _coeff_tuples(field, count: int, height: int):
    """Tuples of k-elements (first nonzero) ordered by height then lex."""
    def scalars(h):
        out = []
        if field.p == 2:
            for n in range(-h, h + 1):
                out.append(field.from_rational(n))
        else:
            z = field.zeta
            for x in range(-h, h + 1):
                for y in range(-h, h + 1):
                    out.append(field.from_rational(x) + z * y)
        return out

    for h in range(height + 1):
        pool = scalars(h)
        seen = set()

        def rec(i, acc):
            if i == count:
                key = tuple(c.encode() for c in acc)
                if key not in seen and any(not c.is_zero() for c in acc) and (
                    max((c.height() for c in acc), default=0) == h
                ):
                    seen.add(key)
                    yield tuple(acc)
                return
            for c in pool:
                yield from rec(i + 1, acc + [c])

        yield from rec(0, [])


# -- the pairing on the finite class group, in coordinates ---------------------------


class PlacePairing:
    """The symbol as an explicit bilinear form on k_v^x/(k_v^x)^p.

    Coordinates at a tame place: (valuation mod p, residue index) over the
    basis (pi, u1) with u1 a lift of a residue generator of index 1; at a wild
    place: the WildClassGroup coordinates with the calibrated Gram.  Used by
    the ramification-ball certificates to enumerate value sets exactly.
    """

    def __init__(self, place: Place):
        self.place = place
        self.p = place.p
        if place.is_wild:
            if self.p == 2:
                self.dim = 3
                self.basis = [get_field(2).from_rational(x) for x in (2, -1, 5)]
                self.gram = self._gram_from(self.basis)
                self._group = None
            else:
                gram = _wild_gram(place)
                self.dim = len(gram.group.basis)
                self.basis = gram.group.basis
                self.gram = gram.gram
                self._group = gram.group
        else:
            field = get_field(place.p)
            pi = place.uniformizer()
            u1 = self._unit_of_index_one(field)
            self.dim = 2
            self.basis = [pi, u1]
            self.gram = [
                [tame_symbol(CyclicPair(x, y, self.p), place).numerator for y in self.basis]
                for x in self.basis
            ]
            self._group = None

    def _unit_of_index_one(self, field) -> CycElt:
        rf = self.place.residue_field
        for idx in range(1, rf.q):
            cand = _lift_residue_index(field, self.place, idx)
            if valuation(cand, self.place) == 0:
                cls = pth_power_class(cand, self.place)
                if cls.unit_key[0] == 1:
                    return cand
        raise AssertionError("no unit of residue index 1; q = 1 mod p must hold")

    def _gram_from(self, basis) -> list[list[int]]:
        out = []
        for x in basis:
            row = []
            for y in basis:
                row.append(hilbert_2adic(x.rational_value(), y.rational_value()))
            out.append(row)
        return out

    def coords(self, x: CycElt) -> tuple[int, ...]:
        if self.place.is_wild:
            if self.p == 2:
                q = x.rational_value()
                alpha = rational_valuation(q, 2) % 2
                u = q / Fraction(2) ** rational_valuation(q, 2)
                eps = (_mod_unit(u, 4) - 1) // 2 % 2
                om = (_mod_unit(u, 8) ** 2 - 1) // 8 % 2
                # decompose into the basis (2, -1, 5): 2-val, sign part, 5-part
                return (alpha, eps, om)
            return self._group.coordinates(x)
        cls = pth_power_class(x, self.place)
        return (cls.val_mod_p, cls.unit_key[0])

    def pair(self, x_coords, y_coords) -> int:
        total = 0
        for i, xi in enumerate(x_coords):
            if not xi:
                continue
            for j, yj in enumerate(y_coords):
                if yj:
                    total += xi * self.gram[i][j] * yj
        return total % self.p

    def all_coords(self):
        def rec(i, acc):
            if i == self.dim:
                yield tuple(acc)
                return
            for e in range(self.p):
                yield from rec(i + 1, acc + [e])

        yield from rec(0, [])


def _lift_residue_index(field, place: Place, index: int) -> CycElt:
    rf = place.residue_field
    coords = []
    v = index
    for _ in range(max(1, rf.deg)):
        coords.append(v % rf.l)
        v //= rf.l
    z = field.zeta
    out = field.from_rational(coords[0])
    acc = z
    for c in coords[1:]:
        out = out + acc * c
        acc = acc * z
    return out


@lru_cache(maxsize=64)
def place_pairing(place: Place) -> PlacePairing:
    return PlacePairing(place)


# -- dispatch and reciprocity ---------------------------------------------------------


def inv_local(pair: CyclicPair, place: Place) -> tuple[InvariantValue, SymbolCertificate]:
    """The invariant of (a,b)_zeta over k_v, all place kinds."""
    p = pair.p
    if place.kind == "complex":
        return InvariantValue(0, p), SymbolCertificate("archimedean", {"kind": "complex"})
    if place.kind == "real":
        if p % 2 == 1:
            return InvariantValue(0, p), SymbolCertificate(
                "archimedean", {"kind": "real", "detail": "odd p"}
            )
        a_neg = pair.a.rational_value() < 0
        b_neg = pair.b.rational_value() < 0
        val = InvariantValue(1 if (a_neg and b_neg) else 0, 2)
        return val, SymbolCertificate(
            "archimedean", {"kind": "real", "a_negative": a_neg, "b_negative": b_neg}
        )
    if place.is_wild:
        return wild_symbol(pair, place)
    value = tame_symbol(pair, place)
    va = valuation(pair.a, place)
    vb = valuation(pair.b, place)
    return value, SymbolCertificate(
        "tame_formula",
        {"v_a": va, "v_b": vb, "q": place.q, "index": value.numerator},
    )


def is_split_local(pair: CyclicPair, place: Place) -> bool:
    return inv_local(pair, place)[0].is_zero


def _finite_support(pair: CyclicPair) -> list[Place]:
    """Finite places where the invariant can be nonzero: supp(a), supp(b), v | p."""
    seen: dict[str, Place] = {}
    for x in (pair.a, pair.b):
        for place in support_places(x):
            seen[place.id] = place
    for place in factor_rational_prime(pair.a.field.p, pair.a.field.p if pair.a.field.p > 2 else 2):
        seen[place.id] = place
    return [seen[k] for k in sorted(seen, key=_place_sort_key)]


def _place_sort_key(place_id: str):
    l, idx = place_id.split(".")
    return (int(l), int(idx))


def reciprocity_sum(pair: CyclicPair):
    """Sum of all local invariants with the per-place breakdown.

    Returns (sum, breakdown dict place_id -> InvariantValue, certificates).
    """
    p = pair.p
    total = InvariantValue(0, p)
    breakdown: dict[str, InvariantValue] = {}
    certs: dict[str, SymbolCertificate] = {}
    for place in archimedean_places(pair.a.field.p):
        val, cert = inv_local(pair, place)
        breakdown[place.id] = val
        certs[place.id] = cert
        total = total + val
    for place in _finite_support(pair):
        val, cert = inv_local(pair, place)
        breakdown[place.id] = val
        certs[place.id] = cert
        total = total + val
    return total, breakdown, certs

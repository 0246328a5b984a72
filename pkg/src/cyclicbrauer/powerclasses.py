"""p-th power tests and canonical classes in k_v^x / (k_v^x)^p.

Tame places (v not over p): a class is the pair (valuation mod p, index of the
unit residue under the (q-1)/p power map matched against the reduction of the
global zeta).  Units congruent to 1 mod pi are p-th powers, so the pair is a
complete invariant.

Wild places (v over p): units congruent to 1 mod pi^(T) with
T = floor(e*p/(p-1)) + 1 are p-th powers, so enumeration of unit
representatives mod pi^T decides membership exactly; classes are labelled by
the minimal equivalent representative's digit string.  The finite group
k_v^x/(k_v^x)^p of order p^(2 + [k_v:Q_p]) gets explicit F_p coordinates from
a fixed global basis, which the symbol machinery pairs through a calibrated
Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .cyclotomic import CycElt, get_field
from .errors import InsufficientPrecision
from .localring import LocalElement, build_model, embed_unit
from .places import Place, valuation


def wild_threshold(place: Place) -> int:
    """Units = 1 mod pi^T are p-th powers for this T (T = floor(ep/(p-1)) + 1)."""
    p = place.p
    e_v_of_p = place.e  # v(p) = e at every place over p in Q(zeta_p) and Q
    return (e_v_of_p * p) // (p - 1) + 1


@dataclass(frozen=True)
class PowerClass:
    """Canonical coordinates of x in k_v^x/(k_v^x)^p."""

    place_id: str
    p: int
    val_mod_p: int
    unit_key: tuple  # tame: (index,), wild: digit tuple of the minimal representative

    @property
    def is_identity(self) -> bool:
        return self.val_mod_p == 0 and self._unit_trivial()

    def _unit_trivial(self) -> bool:
        if len(self.unit_key) == 1 and isinstance(self.unit_key[0], int) and self.unit_key == (0,):
            return True
        return False

    def encode(self) -> str:
        return f"{self.val_mod_p}|{','.join(str(d) for d in self.unit_key)}"


class WildUnitClasses:
    """Enumerated unit classes mod pi^T at a wild place, with p-th power set."""

    def __init__(self, place: Place):
        self.place = place
        self.p = place.p
        self.T = wild_threshold(place)
        self.model = build_model(place, self.T + place.p - 1 + 4)
        self.q = place.q
        self._powers: dict[tuple[int, ...], tuple[int, ...]] | None = None
        self._reps: list[tuple[int, ...]] | None = None
        self._inv_reps: dict[tuple[int, ...], tuple] | None = None
        self._label_cache: dict[tuple[int, ...], tuple[int, ...]] = {}

    def _unit_digit_strings(self) -> list[tuple[int, ...]]:
        if self._reps is None:
            reps = []
            total = self.q**self.T
            for idx in range(total):
                digits = []
                v = idx
                for _ in range(self.T):
                    digits.append(v % self.q)
                    v //= self.q
                if digits[0] == 0:
                    continue
                reps.append(tuple(digits))
            self._reps = reps
        return self._reps

    def _truncate(self, digits: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(digits[: self.T])

    def pth_power_digits(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        """Map (digits of y^p mod pi^T) -> a witness digit string y."""
        if self._powers is None:
            out: dict[tuple[int, ...], tuple[int, ...]] = {}
            for rep in self._unit_digit_strings():
                y = self.model.from_digits(rep)
                yp = y
                for _ in range(self.p - 1):
                    yp = self.model.mul(yp, y)
                out.setdefault(self._truncate(self.model.digits(yp, self.T)), rep)
            self._powers = out
        return self._powers

    def _inverse_reps(self) -> dict[tuple[int, ...], tuple]:
        if self._inv_reps is None:
            self._inv_reps = {
                rep: self.model.inv_unit(self.model.from_digits(rep))
                for rep in self._unit_digit_strings()
            }
        return self._inv_reps

    def unit_is_pth_power(self, digits: tuple[int, ...]) -> tuple[bool, tuple[int, ...] | None]:
        """Decide u in U^p from >= T digits; returns (answer, witness rep)."""
        if len(digits) < self.T:
            raise InsufficientPrecision(
                f"need {self.T} digits at {self.place.id}, got {len(digits)}"
            )
        key = self._truncate(digits)
        witness = self.pth_power_digits().get(key)
        return (witness is not None), witness

    def canonical_label(self, digits: tuple[int, ...]) -> tuple[int, ...]:
        """Digit string of the minimal representative in the same class."""
        if len(digits) < self.T:
            raise InsufficientPrecision(
                f"need {self.T} digits at {self.place.id}, got {len(digits)}"
            )
        key = self._truncate(digits)
        cached = self._label_cache.get(key)
        if cached is not None:
            return cached
        u = self.model.from_digits(key)
        powers = self.pth_power_digits()
        for rep in self._unit_digit_strings():
            quot = self.model.mul(u, self._inverse_reps()[rep])
            if self._truncate(self.model.digits(quot, self.T)) in powers:
                self._label_cache[key] = rep
                return rep
        raise AssertionError("no representative matched; enumeration incomplete")

    def label_mul(self, k1: tuple[int, ...], k2: tuple[int, ...]) -> tuple[int, ...]:
        u = self.model.mul(self.model.from_digits(k1), self.model.from_digits(k2))
        return self.canonical_label(self.model.digits(u, self.T))


@lru_cache(maxsize=16)
def wild_unit_classes(place: Place) -> WildUnitClasses:
    return WildUnitClasses(place)


# -- public operations -----------------------------------------------------------


def _element_val_and_digits(x, place: Place, need_digits: int):
    """Split x (CycElt or LocalElement) into exact valuation + unit digits."""
    if isinstance(x, LocalElement):
        if x.place != place:
            raise ValueError("local element belongs to another place")
        if x.is_zero:
            raise ValueError("zero has no power class")
        if x.precision < need_digits:
            raise InsufficientPrecision(
                f"need {need_digits} digits, element carries {x.precision}"
            )
        return x.valuation, tuple(x.unit_digits[:need_digits])
    if x.is_zero():
        raise ValueError("zero has no power class")
    if not place.is_wild and need_digits == 1:
        # cheap residue arithmetic unless denominators meet l
        from fractions import Fraction

        from .errors import PrecisionUnrepresentable
        from .places import residue

        try:
            val = valuation(x, place)
            y = x * Fraction(1, place.l**val) if val >= 0 else x * (place.l ** (-val))
            rf = place.residue_field
            return val, (rf.element_index(residue(y, place)),)
        except PrecisionUnrepresentable:
            pass
    return embed_unit(x, place, need_digits)


def is_pth_power_local(x, place: Place) -> tuple[bool, dict]:
    """Exact membership of x in (k_v^x)^p, with a replayable certificate."""
    p = place.p
    if place.kind == "complex":
        return True, {"method": "archimedean", "detail": "complex place"}
    if place.kind == "real":
        if p % 2 == 1:
            return True, {"method": "archimedean", "detail": "odd p at a real place"}
        val = x.rational_value()
        return val > 0, {"method": "archimedean", "sign": "+" if val > 0 else "-"}
    if not place.is_wild:
        val, digits = _element_val_and_digits(x, place, 1)
        if val % p != 0:
            return False, {
                "method": "tame",
                "valuation": val,
                "reason": "valuation not divisible by p",
            }
        rf = place.residue_field
        idx = rf.pth_power_index(_digit_to_residue(digits[0], rf), p, place.zeta_bar)
        return idx == 0, {
            "method": "tame",
            "valuation": val,
            "residue_index": idx,
            "q": place.q,
        }
    # wild place
    classes = wild_unit_classes(place)
    val, digits = _element_val_and_digits(x, place, classes.T)
    if val % p != 0:
        return False, {
            "method": "wild_enum",
            "threshold": classes.T,
            "valuation": val,
            "reason": "valuation not divisible by p",
        }
    ok, witness = classes.unit_is_pth_power(digits)
    return ok, {
        "method": "wild_enum",
        "threshold": classes.T,
        "valuation": val,
        "unit_is_power": ok,
        "witness_digits": list(witness) if witness else None,
    }


def _digit_to_residue(digit: int, rf):
    coords = []
    v = digit
    for _ in range(max(1, rf.deg)):
        coords.append(v % rf.l)
        v //= rf.l
    return rf.make(coords)


def pth_power_class(x, place: Place) -> PowerClass:
    """Canonical coordinates of x in k_v^x/(k_v^x)^p at a finite place."""
    p = place.p
    if not place.is_finite:
        raise ValueError("power classes live at finite places")
    if not place.is_wild:
        val, digits = _element_val_and_digits(x, place, 1)
        rf = place.residue_field
        idx = rf.pth_power_index(_digit_to_residue(digits[0], rf), p, place.zeta_bar)
        return PowerClass(place.id, p, val % p, (idx,))
    classes = wild_unit_classes(place)
    val, digits = _element_val_and_digits(x, place, classes.T)
    return PowerClass(place.id, p, val % p, classes.canonical_label(digits))


def class_mul(c1: PowerClass, c2: PowerClass, place: Place) -> PowerClass:
    if c1.place_id != c2.place_id:
        raise ValueError("classes at different places")
    p = place.p
    if not place.is_wild:
        return PowerClass(
            c1.place_id, p, (c1.val_mod_p + c2.val_mod_p) % p,
            ((c1.unit_key[0] + c2.unit_key[0]) % p,),
        )
    classes = wild_unit_classes(place)
    return PowerClass(
        c1.place_id, p, (c1.val_mod_p + c2.val_mod_p) % p,
        classes.label_mul(c1.unit_key, c2.unit_key),
    )


def class_is_identity(c: PowerClass, place: Place) -> bool:
    if c.val_mod_p != 0:
        return False
    if not place.is_wild:
        return c.unit_key == (0,)
    classes = wild_unit_classes(place)
    one_digits = classes.model.digits(classes.model.one, classes.T)
    return c.unit_key == classes.canonical_label(one_digits)


# -- the full finite group with explicit coordinates (wild places) ----------------


class WildClassGroup:
    """k_v^x/(k_v^x)^p with F_p coordinates over a fixed global basis."""

    def __init__(self, place: Place):
        self.place = place
        self.p = place.p
        self.dim = 2 + place.e * place.f_deg  # 2 + [k_v : Q_p] since mu_p in k_v
        self.basis = self._find_basis()
        self.table = self._build_table()

    def _candidate_units(self):
        k = get_field(self.p)
        z = k.zeta
        pi = place_uniformizer(self.place)
        yield pi
        if self.p == 2:
            yield k.from_rational(-1)
            yield k.from_rational(5)
            yield k.from_rational(3)
        else:
            yield z
            yield k.from_rational(1 + self.p)
            yield k.one + (k.one - z) ** 3
            yield k.from_rational(1 + self.p * self.p)
            # fallback stream of small units
            for a in range(-6, 7):
                for b in range(-6, 7):
                    x = k.from_rational(a) + z * b
                    if not x.is_zero():
                        yield x

    def _find_basis(self) -> list[CycElt]:
        basis: list[CycElt] = []
        seen: set = set()
        target = self.p**self.dim

        def classes_generated(cands: list[CycElt]) -> set:
            out = {self._key(get_field(self.p).one)}
            elts = [get_field(self.p).one]
            for b in cands:
                new_elts = []
                for e in elts:
                    cur = e
                    for _ in range(self.p - 1):
                        cur = cur * b
                        new_elts.append(cur)
                elts.extend(new_elts)
            return {self._key(e) for e in elts}

        for cand in self._candidate_units():
            if valuation(cand, self.place) is None:
                continue
            trial = basis + [cand]
            gen = classes_generated(trial)
            if len(gen) == self.p ** len(trial):
                basis = trial
                seen = gen
                if len(basis) == self.dim:
                    assert len(seen) == target
                    return basis
        raise AssertionError("could not assemble a basis for the wild class group")

    def _key(self, x: CycElt):
        c = pth_power_class(x, self.place)
        return (c.val_mod_p, c.unit_key)

    def _build_table(self) -> dict:
        table = {}
        k = get_field(self.p)

        def rec(i: int, acc: CycElt, coords: tuple[int, ...]):
            if i == len(self.basis):
                table[self._key(acc)] = coords
                return
            cur = acc
            for e in range(self.p):
                rec(i + 1, cur, coords + (e,))
                cur = cur * self.basis[i]

        rec(0, k.one, ())
        assert len(table) == self.p**self.dim, "basis does not span the class group"
        return table

    def coordinates(self, x) -> tuple[int, ...]:
        c = pth_power_class(x, self.place)
        key = (c.val_mod_p, c.unit_key)
        if key not in self.table:
            raise AssertionError("class outside the ambient group; impossible")
        return self.table[key]


def place_uniformizer(place: Place) -> CycElt:
    return place.uniformizer()


@lru_cache(maxsize=8)
def wild_class_group(place: Place) -> WildClassGroup:
    return WildClassGroup(place)

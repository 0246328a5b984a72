"""Certified per-place images of the fiberwise evaluation map.

For a place v and a class (a, f) with obstruction factor f1, image_set
computes the exact set of values inv_v(a, f1(t)) over t in P^1(k_v) with
split total fiber, together with a certifying cover:

* P^1(k_v) is split into the integral chart t and the chart s = 1/t (with
  the class polynomials transported through the homogenization);
* each residue disk is certified by the local-constancy criterion (both
  chart polynomials stay in one p-th-power class), contributing one value or
  nothing (nonsplit), or is subdivided;
* disks trapping zeros are closed by ramification-ball certificates: either
  the exact enumeration over the finite class-group pairing (single active
  irreducible factor plus a Hensel root certificate), or the block schema at
  tame places where a is a unit (all active factors inside one multiplicity
  block forces every split-fiber value to vanish).

Factor blocks matter for pullback classes: irreducible factors of one
composition F_i(g(t)) share the pair (m_i, m1_i), and collisions inside a
block are harmless, while collisions across blocks genuinely produce nonzero
values and must be enumerated.

The archimedean real place (p = 2) uses exact Sturm sign analysis instead of
disks.  Everything is deterministic and replayable.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .cyclotomic import CycElt
from .errors import SubdivisionDepthExceeded, ZeroAtCenter
from .factorization import factor_poly, homogenize_p
from .functionfield import FunctionFieldClass, constancy_radius, fiber_invariant
from .places import Place, valuation
from .polynomials import Poly
from .powerclasses import is_pth_power_local
from .symbols import CyclicPair, InvariantValue, inv_local

DEFAULT_DEPTH_CAP = 40

_FACTOR_MEMO: dict = {}


def _factor_memo(h: Poly):
    key = (h.field.p, h.coeffs)
    if key not in _FACTOR_MEMO:
        _FACTOR_MEMO[key] = factor_poly(h)
    return _FACTOR_MEMO[key]


@dataclass
class ImageSetPolicy:
    depth_cap: int = DEFAULT_DEPTH_CAP
    precision_extra: int = 0  # no effect on the exact path; exercised by refinement tests


@dataclass
class ClassBlocks:
    """f = const * prod block^m and f1 = const1 * prod block^m1.

    Each block is a polynomial whose irreducible factors share the exponent
    pair; distinct blocks are pairwise coprime.
    """

    blocks: list[tuple[Poly, int, int]]

    @staticmethod
    def from_factors(total: FunctionFieldClass, f1: Poly) -> "ClassBlocks":
        mults: dict = {}
        for q, m in total.factors:
            mults[q] = [m, 0]
        if f1.degree > 0:
            for q, m1 in _factor_memo(f1):
                mults.setdefault(q, [0, 0])[1] = m1
        blocks = [(q, m, m1) for q, (m, m1) in mults.items()]
        blocks.sort(key=lambda b: (b[0].degree, b[0].encode()))
        return ClassBlocks(blocks)


@dataclass
class ImageSet:
    place_id: str
    p: int
    values: list[str]                 # sorted encoded InvariantValues
    cover: list[dict]                 # certifying entries, deterministic order
    caveats: list[dict] = dc_field(default_factory=list)

    def value_set(self) -> set[str]:
        return set(self.values)

    def to_dict(self) -> dict:
        return {
            "place": self.place_id,
            "p": self.p,
            "values": self.values,
            "cover": self.cover,
            "caveats": self.caveats,
        }


def _digit_lift(field, place: Place, index: int) -> CycElt:
    """Canonical global lift of a residue-field element index."""
    rf = place.residue_field
    if place.is_wild and place.p > 2:
        return field.from_rational(index % place.p)
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


def _chart_data(total: FunctionFieldClass, f1: Poly, blocks: ClassBlocks):
    """Chart polynomials plus per-factor (m, m1, block id) tables."""
    p = total.p
    field = total.field
    charts = {}
    f_t, f1_t = total.f, f1
    hom_f = homogenize_p(f_t, p)
    hom_f1 = homogenize_p(f1_t, p)
    for name in ("t", "s"):
        if name == "t":
            h, h1 = f_t, f1_t
            block_polys = [(b, m, m1) for (b, m, m1) in blocks.blocks]
            pad_f = pad_f1 = 0
        else:
            from .polynomials import primitive_part

            h, h1 = hom_f.dehomogenize_s(), hom_f1.dehomogenize_s()
            block_polys = []
            for (b, m, m1) in blocks.blocks:
                rev = Poly(field, list(reversed(b.coeffs)))
                if rev.degree >= 1:
                    block_polys.append((primitive_part(rev), m, m1))
            pad_f = hom_f.degree - f_t.degree
            pad_f1 = hom_f1.degree - f1_t.degree
            if pad_f or pad_f1:
                block_polys.append((Poly(field, [0, 1]), pad_f, pad_f1))
        factor_rows = []
        for bid, (b, m, m1) in enumerate(block_polys):
            if b.degree < 1:
                continue
            for q, mult_in_block in _factor_memo(b):
                factor_rows.append(
                    {"q": q, "m": m, "m1": m1, "block": bid, "sib_mult": mult_in_block}
                )
        charts[name] = {"f": h, "f1": h1, "rows": factor_rows}
    return charts


def _mult_of(h: Poly, q: Poly) -> int:
    mult = 0
    rem = h
    while rem.degree >= q.degree:
        quo, r = rem.divmod(q)
        if not r.is_zero():
            break
        mult += 1
        rem = quo
    return mult


def _no_root_in_disk(q: Poly, center: CycElt, r: int, place: Place) -> bool:
    """Ultrametric certificate: v(q(c)) < min_j (v(c_j) + j*r) excludes roots."""
    c = q.taylor_coefficients(center)
    if c[0].is_zero():
        return False
    v0 = valuation(c[0], place)
    for j in range(1, len(c)):
        if c[j].is_zero():
            continue
        if valuation(c[j], place) + j * r <= v0:
            return False
    return True


def _try_constancy(chart, center: CycElt, r: int, place: Place):
    """Radius needed to certify both chart polynomials, or None at a zero."""
    try:
        r_f = constancy_radius(chart["f"], center, place)
        r_f1 = constancy_radius(chart["f1"], center, place)
    except ZeroAtCenter:
        return None
    return max(r_f, r_f1)


def hensel_root_in_disk(q: Poly, center: CycElt, r: int, place: Place, cap: int = 40):
    """Certificate that the separable q has a simple k_v-root in the disk.

    Walks down the subdivision tree toward growing valuation of q; succeeds
    when either q(c') = 0 exactly or the Newton condition
    v(q(c')) > 2 v(q'(c')) holds with the root radius inside the disk.
    """
    field = q.field
    rf = place.residue_field
    pi = place.uniformizer()
    cur, rr = center, r
    dq = q.derivative()
    for _ in range(cap):
        val_q = valuation(q(cur), place)
        if val_q is None:
            return {"kind": "exact_root", "center": cur.encode(), "radius_exp": rr}
        dq_val = valuation(dq(cur), place) if not dq(cur).is_zero() else None
        if dq_val is not None and val_q > 2 * dq_val and val_q - dq_val >= r:
            return {
                "kind": "newton",
                "center": cur.encode(),
                "v_q": val_q,
                "v_dq": dq_val,
                "radius_exp": rr,
            }
        best = None
        pi_r = pi**rr
        for idx in range(rf.q):
            child = cur + _digit_lift(field, place, idx) * pi_r
            v_child = valuation(q(child), place)
            score = 10**9 if v_child is None else v_child
            if best is None or score > best[0]:
                best = (score, idx, child)
        cur, rr = best[2], rr + 1
    return None


def _rest_product(chart, rows_subset) -> tuple[Poly, Poly]:
    """(f / prod q^..., f1 / prod q^...) removing the subset's contributions."""
    rest, rest1 = chart["f"], chart["f1"]
    for row in rows_subset:
        q = row["q"]
        total_m = row["m"] * row["sib_mult"]
        total_m1 = row["m1"] * row["sib_mult"]
        if total_m:
            rest = rest.exact_div(q**total_m)
        if total_m1:
            rest1 = rest1.exact_div(q**total_m1)
    return rest, rest1


def _try_ram_ball(chart, center: CycElt, r: int, place: Place, a: CycElt, p: int,
                  total: FunctionFieldClass, f1: Poly, chart_name: str):
    """Certified closure of a disk that traps zeros of the class polynomials.

    Route 1 (exact enumeration): one active irreducible factor q with a
    Hensel root certificate; class(q(t)) covers the full group, so the split
    value set is an exact enumeration through the pairing.

    Route 2 (block schema): tame place, a a unit, all active factors inside
    one block (m, m1) with m >= 1, complementary part a certified constant
    unit class.  Then v(f) = m * n and v(f1) = m1 * n with the same n on the
    whole ball, so a split fiber forces the value ind * m1 * n = 0; the ball
    contributes {0} when a probe finds a split fiber, nothing otherwise.
    """
    from .symbols import place_pairing

    if not place.is_finite:
        return None
    active = []
    for row in chart["rows"]:
        if not _no_root_in_disk(row["q"], center, r, place):
            active.append(row)
    if not active:
        return None

    # Route 1: a single active irreducible factor
    if len(active) == 1:
        row = active[0]
        q_i = row["q"]
        m_i = row["m"] * row["sib_mult"]
        m1_i = row["m1"] * row["sib_mult"]
        if m_i == 0 and m1_i == 0:
            return None
        rest, rest1 = _rest_product(chart, [row])
        try:
            if constancy_radius(rest, center, place) > r:
                return None
            if constancy_radius(rest1, center, place) > r:
                return None
        except ZeroAtCenter:
            return None
        root_cert = hensel_root_in_disk(q_i, center, r, place)
        if root_cert is None:
            return None
        pairing = place_pairing(place)
        a_coords = pairing.coords(a)
        w_coords = pairing.coords(rest(center))
        w1_coords = pairing.coords(rest1(center))
        values = set()
        splits = False
        for d in pairing.all_coords():
            fd = tuple((m_i * di + wi) % p for di, wi in zip(d, w_coords))
            if pairing.pair(a_coords, fd) != 0:
                continue
            splits = True
            f1d = tuple((m1_i * di + wi) % p for di, wi in zip(d, w1_coords))
            values.add(pairing.pair(a_coords, f1d))
        caveat = None
        if m_i == 0:
            if not splits:
                return {
                    "entry": {"kind": "nonsplit_ball", "factor": q_i.encode(),
                              "root_cert": root_cert},
                    "values": set(),
                    "caveat": None,
                }
            caveat = {"kind": "f1_ram_point",
                      "detail": "f1 vanishes at a point with split total fiber"}
        elif not splits:
            caveat = {"kind": "isolated_ram_fiber",
                      "detail": "no split fibers approach the ramification point"}
        return {
            "entry": {
                "kind": "ram_ball",
                "factor": q_i.encode(),
                "m": m_i,
                "m1": m1_i,
                "root_cert": root_cert,
                "values": sorted(InvariantValue(v, p).encode() for v in values),
                "covers_exact_points": caveat is None,
            },
            "values": {InvariantValue(v, p) for v in values},
            "caveat": caveat,
        }

    # Route 2: several active factors, all in one block, a a unit, tame place
    if place.is_wild:
        return None
    if valuation(a, place) != 0:
        return None
    blocks_hit = {row["block"] for row in active}
    if len(blocks_hit) != 1:
        return None
    m_i = active[0]["m"]
    m1_i = active[0]["m1"]
    if m_i == 0:
        return None
    rest, rest1 = _rest_product(chart, active)
    try:
        if constancy_radius(rest, center, place) > r:
            return None
        if constancy_radius(rest1, center, place) > r:
            return None
    except ZeroAtCenter:
        return None
    if valuation(rest(center), place) != 0 or valuation(rest1(center), place) != 0:
        return None
    # probe for a split fiber with value 0
    probe_entry = None
    field = total.field
    pi = place.uniformizer()
    probes = []
    for depth in range(0, 3):
        for idx in range(min(place.q, 8)):
            probes.append(center + _digit_lift(field, place, idx) * pi ** (r + depth))
    contributed = set()
    for t in probes:
        try:
            val = _chart_fiber_value(total, f1, chart_name, t, place)
        except Exception:
            continue
        if val is None:
            continue
        assert val.is_zero, "block schema forces zero values on split fibers"
        contributed.add(val)
        probe_entry = t.encode()
        break
    return {
        "entry": {
            "kind": "ram_ball_block",
            "block": active[0]["block"],
            "factors": [row["q"].encode() for row in active],
            "m": m_i,
            "m1": m1_i,
            "values": sorted(v.encode() for v in contributed),
            "probe": probe_entry,
            "covers_exact_points": True,
        },
        "values": contributed,
        "caveat": None,
    }


def _chart_fiber_value(total: FunctionFieldClass, f1: Poly, chart_name: str,
                       t: CycElt, place: Place):
    """Fiber value at a chart point, mapped back to the global coordinate."""
    if chart_name == "t":
        return fiber_invariant(total, f1, t, place)
    if t.is_zero():
        from .errors import EvaluationAtRamification

        raise EvaluationAtRamification("s = 0 handled by the infinity logic")
    return fiber_invariant(total, f1, t.inverse(), place)


def image_set(
    total: FunctionFieldClass,
    f1: Poly,
    place: Place,
    policy: ImageSetPolicy | None = None,
    blocks: ClassBlocks | None = None,
) -> ImageSet:
    """Certified value set of the fiberwise evaluation over P^1(k_v)."""
    policy = policy or ImageSetPolicy()
    p = total.p
    a = total.a
    if place.kind == "complex":
        return ImageSet(place.id, p, ["0"], [{"kind": "archimedean_trivial"}])
    if place.kind == "real":
        return _image_set_real(total, f1, place)
    ok_a, cert_a = is_pth_power_local(a, place)
    if ok_a:
        witness = _find_nonroot_center(total, f1, place)
        return ImageSet(
            place.id,
            p,
            ["0"],
            [
                {
                    "kind": "place_trivial",
                    "a_power_cert": cert_a,
                    "witness_center": witness.encode(),
                    "witness_chart": "t",
                }
            ],
        )
    if blocks is None:
        blocks = ClassBlocks.from_factors(total, f1)
    charts = _chart_data(total, f1, blocks)
    field = total.field
    values: set[str] = set()
    cover: list[dict] = []
    caveats: list[dict] = []

    work: list[tuple[str, CycElt, int, int]] = []
    rf = place.residue_field
    for idx in range(rf.q):
        work.append(("t", _digit_lift(field, place, idx), 1, 1))
    work.append(("s", field.zero, 1, 1))

    while work:
        chart_name, center, r, depth = work.pop(0)
        chart = charts[chart_name]
        r_need = _try_constancy(chart, center, r, place)
        if r_need is not None and r >= r_need:
            fc = chart["f"](center)
            tot = inv_local(CyclicPair(a, fc, p), place)[0]
            if tot.is_zero:
                val = inv_local(CyclicPair(a, chart["f1"](center), p), place)[0]
                values.add(val.encode())
                cover.append(
                    {
                        "kind": "value",
                        "chart": chart_name,
                        "center": center.encode(),
                        "radius_exp": r,
                        "value": val.encode(),
                    }
                )
            else:
                cover.append(
                    {
                        "kind": "nonsplit",
                        "chart": chart_name,
                        "center": center.encode(),
                        "radius_exp": r,
                        "total_invariant": tot.encode(),
                    }
                )
            continue
        ball = _try_ram_ball(chart, center, r, place, a, p, total, f1, chart_name)
        if ball is not None:
            entry = ball["entry"]
            entry.update(
                {"chart": chart_name, "center": center.encode(), "radius_exp": r}
            )
            cover.append(entry)
            for v in ball["values"]:
                values.add(v.encode())
            if ball["caveat"] is not None:
                caveat = dict(ball["caveat"])
                caveat.update({"chart": chart_name, "center": center.encode()})
                caveats.append(caveat)
            continue
        if depth >= policy.depth_cap:
            raise SubdivisionDepthExceeded(
                f"depth {depth} at {place.id}, chart {chart_name}, center {center.encode()}"
            )
        pi = place.uniformizer()
        pi_r = pi**r
        for idx in range(rf.q):
            work.append(
                (chart_name, center + _digit_lift(field, place, idx) * pi_r, r + 1, depth + 1)
            )
    return ImageSet(place.id, p, sorted(values), cover, caveats)


def _find_nonroot_center(total: FunctionFieldClass, f1: Poly, place: Place) -> CycElt:
    field = total.field
    for n in range(total.f.degree + f1.degree + 2):
        c = field.from_rational(n)
        if not total.f(c).is_zero() and not f1(c).is_zero():
            return c
    raise AssertionError("polynomial cannot vanish at every small integer")


# -- the real place (p = 2): exact sign analysis ----------------------------------


def _sturm_chain(f: Poly) -> list[Poly]:
    chain = [f, f.derivative()]
    while not chain[-1].is_zero() and chain[-1].degree > 0:
        chain.append(-(chain[-2] % chain[-1]))
    if chain[-1].is_zero():
        chain.pop()
    return chain


def _sign_at(f: Poly, x: Fraction) -> int:
    v = f(x).rational_value()
    return (v > 0) - (v < 0)


def _sign_changes(chain: list[Poly], x: Fraction) -> int:
    signs = [s for s in (_sign_at(g, x) for g in chain) if s != 0]
    return sum(1 for s1, s2 in zip(signs, signs[1:]) if s1 != s2)


def _root_free_intervals(h: Poly) -> list[Fraction]:
    """Rational sample points covering every sign region of h on R."""
    from .polynomials import squarefree_part

    if h.degree <= 0:
        return [Fraction(0)]
    h = squarefree_part(h)
    chain = _sturm_chain(h)
    lc = abs(h.lc.rational_value())
    bound = Fraction(1) + max(abs(c.rational_value()) for c in h.coeffs) / lc

    def count_roots(lo: Fraction, hi: Fraction) -> int:
        return _sign_changes(chain, lo) - _sign_changes(chain, hi)

    def isolate(lo: Fraction, hi: Fraction):
        n = count_roots(lo, hi)
        if n == 0:
            return []
        if n == 1:
            return [(lo, hi)]
        mid = (lo + hi) / 2
        while _sign_at(h, mid) == 0:
            mid = (lo + mid) / 2
        return isolate(lo, mid) + isolate(mid, hi)

    intervals = isolate(-bound, bound)
    cuts = [-bound - 1]
    for (lo, hi) in sorted(intervals):
        cuts.append(lo)
        cuts.append(hi)
    cuts.append(bound + 1)
    samples: list[Fraction] = []
    for x1, x2 in zip(cuts, cuts[1:]):
        s = (x1 + x2) / 2
        tries = 0
        while _sign_at(h, s) == 0 and tries < 64:
            s = (s + x2) / 2
            tries += 1
        samples.append(s)
    return samples


def _image_set_real(total: FunctionFieldClass, f1: Poly, place: Place) -> ImageSet:
    """Exact image over P^1(R) for p = 2 by interval sign analysis."""
    a_val = total.a.rational_value()
    values: set[str] = set()
    cover: list[dict] = []
    if a_val > 0:
        witness = _find_nonroot_center(total, f1, place)
        return ImageSet(
            place.id, 2, ["0"],
            [{"kind": "place_trivial", "reason": "a > 0", "witness": witness.encode()}],
        )
    product = total.f * f1
    samples = _root_free_intervals(product)
    for s in samples:
        fs = total.f(s).rational_value()
        f1s = f1(s).rational_value()
        entry = {"kind": "interval_sample", "sample": f"{s.numerator}/{s.denominator}"}
        if fs < 0:
            entry["split"] = False
            cover.append(entry)
            continue
        val = InvariantValue(1 if f1s < 0 else 0, 2)
        values.add(val.encode())
        entry["split"] = True
        entry["value"] = val.encode()
        cover.append(entry)
    # the point at infinity: for even degrees it is an honest fiber; for odd
    # degrees its value is a side limit already collected from the unbounded
    # intervals (continuity of the evaluation map).
    if total.f.degree % 2 == 0 and total.f.degree > 0:
        lc = total.f.lc.rational_value()
        entry = {"kind": "infinity_point"}
        if lc > 0:
            if f1.degree % 2 == 0:
                val = InvariantValue(1 if f1.lc.rational_value() < 0 else 0, 2)
                values.add(val.encode())
                entry["split"] = True
                entry["value"] = val.encode()
            else:
                entry["split"] = True
                entry["covered_by_side_limits"] = True
        else:
            entry["split"] = False
        cover.append(entry)
    else:
        cover.append({"kind": "infinity_point", "covered_by_side_limits": True})
    return ImageSet(place.id, 2, sorted(values), cover)

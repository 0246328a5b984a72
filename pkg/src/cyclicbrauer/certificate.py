"""Counterexample certificates: canonical JSON assembly and the verifier.

The verifier is independent of the search path: it recomputes every image
set (or replays the good-place schema premises), replays witnesses and the
construction-level claims, checks the precision policy against the wild
thresholds, and re-runs the obstruction set logic.  Rejections carry one of
the documented reason codes:

    malformed, schema_version_unknown, insufficient_precision,
    support_incomplete, value_mismatch, radius_uncertified, cover_gap,
    cover_mismatch, caveat_present, missing_witness, witness_invalid,
    schema_premise_failed, family_evidence_failed, obstruction_logic_failed,
    construction_invalid
"""

from __future__ import annotations

import json

from .cyclotomic import get_field
from .errors import CyclicBrauerError
from .functionfield import INFINITY, FunctionFieldClass, fiber_invariant
from .imagesets import ImageSetPolicy, image_set
from .places import factor_rational_prime, place_by_id, valuation
from .polynomials import Poly
from .powerclasses import is_pth_power_local, wild_threshold
from .symbols import InvariantValue

SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _policy_block(cfg) -> dict:
    field_p = 2 if cfg.field_regime == "Q" else cfg.p
    wild_place = factor_rational_prime(field_p, field_p if field_p > 2 else 2)[0]
    return {
        "depth_cap": cfg.depth_cap,
        "degree_cap": cfg.degree_cap,
        "norm_degree_cap": cfg.norm_degree_cap,
        "wild_thresholds": {wild_place.id: wild_threshold(wild_place)},
    }


def assemble_search_certificate(
    cfg, data, cert_cv, cert_a, prop42, c_star, cert_cstar,
    f_flip, f1_flip, g, gres, split_places, nu1,
) -> dict:
    total_pb: FunctionFieldClass = gres["total_pullback"]
    cert = {
        "schema_version": SCHEMA_VERSION,
        "kind": "search",
        "p": cfg.p,
        "field": cfg.field_regime,
        "config": cfg.to_dict(),
        "policy": _policy_block(cfg),
        "construction": {
            "g0": data.g0.encode(),
            "c": data.c.encode(),
            "v_star": data.v_star.id,
            "l": data.l_elt.encode(),
            "h": data.h.encode(),
            "f": data.f.encode(),
            "a": data.a.encode(),
            "c_v_certificate": cert_cv,
            "a_certificate": cert_a,
        },
        "prop42": prop42,
        "flip": {
            "center": c_star.encode(),
            "center_checks": cert_cstar,
            "f_flip": f_flip.encode(),
            "f1_flip": f1_flip.encode(),
        },
        "g_pull": g.encode(),
        "condition1": gres["condition1"],
        "obstruction": {
            "a": total_pb.a.encode(),
            "f_total": total_pb.f.encode(),
            "f1": gres["f1_pullback"].encode(),
            "blocks": [[b, m, m1] for (b, m, m1) in gres["blocks"]],
        },
        "nu1": nu1.id,
        "bad_places": [pl.id for pl in gres["places"]],
        "support_info": gres["support_info"],
        "image_sets": gres["image_sets"],
        "witnesses": gres["witnesses"],
        "split_places": split_places,
        "verdict": "OBSTRUCTED",
    }
    return cert


def assemble_given_certificate(
    cfg, a, f, f1, places, support_info, image_sets, witnesses, nu1_id, blocks=None,
) -> dict:
    obstruction = {"a": a.encode(), "f_total": f.encode(), "f1": f1.encode()}
    if blocks is not None:
        obstruction["blocks"] = [[b.encode(), m, m1] for (b, m, m1) in blocks.blocks]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "given",
        "p": cfg.p,
        "field": cfg.field_regime,
        "config": cfg.to_dict(),
        "policy": _policy_block(cfg),
        "obstruction": obstruction,
        "nu1": nu1_id,
        "bad_places": [pl.id for pl in places],
        "support_info": support_info,
        "image_sets": image_sets,
        "witnesses": witnesses,
        "verdict": "OBSTRUCTED",
    }


# -- verification -----------------------------------------------------------------------


class _Reject(Exception):
    def __init__(self, code: str, detail: str = "", place: str | None = None):
        self.reason = {"code": code, "detail": detail}
        if place:
            self.reason["place"] = place
        super().__init__(code)


def verify_certificate(cert: dict) -> tuple[bool, list[dict]]:
    """Re-executes every certificate claim; returns (accepted, reasons)."""
    reasons: list[dict] = []
    try:
        _verify(cert, reasons)
    except _Reject as rej:
        reasons.append(rej.reason)
    except CyclicBrauerError as exc:
        reasons.append({"code": "malformed", "detail": str(exc)})
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        reasons.append({"code": "malformed", "detail": f"{type(exc).__name__}: {exc}"})
    return (not reasons), reasons


def _norm_int_of(x) -> int:
    den = x.denominator_lcm()
    n = (x * den).norm()
    return abs(n.numerator) * den


def _verify(cert: dict, reasons: list[dict]) -> None:
    from .pipeline import (
        SearchConfig,
        bad_place_set,
        good_place_schema_check,
        _gcd_int,
    )

    if cert.get("schema_version") != SCHEMA_VERSION:
        raise _Reject("schema_version_unknown", str(cert.get("schema_version")))
    for key in ("p", "field", "obstruction", "nu1", "bad_places", "image_sets",
                "witnesses", "verdict", "policy"):
        if key not in cert:
            raise _Reject("malformed", f"missing field {key}")
    if cert["verdict"] != "OBSTRUCTED":
        raise _Reject("malformed", "only OBSTRUCTED certificates are verifiable")
    p = int(cert["p"])
    field = get_field(2 if cert["field"] == "Q" else p)
    cfg = SearchConfig.from_dict(cert["config"]) if "config" in cert else SearchConfig.default_for(p)

    # precision policy: wild thresholds must meet the computed requirement
    wild_place = factor_rational_prime(field.p, field.p if field.p > 2 else 2)[0]
    required = wild_threshold(wild_place)
    recorded = cert["policy"].get("wild_thresholds", {}).get(wild_place.id)
    if recorded is None or int(recorded) < required:
        raise _Reject(
            "insufficient_precision",
            f"wild threshold {recorded} below required {required}",
            wild_place.id,
        )

    a = field.decode(cert["obstruction"]["a"])
    f_total = Poly.decode(field, cert["obstruction"]["f_total"])
    f1 = Poly.decode(field, cert["obstruction"]["f1"])
    nu1_id = cert["nu1"]

    blocks = None
    if "blocks" in cert["obstruction"]:
        from .imagesets import ClassBlocks
        from .polynomials import poly_gcd

        block_list = [
            (Poly.decode(field, b), int(m), int(m1))
            for (b, m, m1) in cert["obstruction"]["blocks"]
        ]
        # the blocks must reproduce f and f1 up to nonzero constants
        for target, idx in ((f_total, 1), (f1, 2)):
            prod = Poly(field, [1])
            for entry in block_list:
                prod = prod * entry[0] ** entry[idx]
            if prod.degree != target.degree:
                raise _Reject("malformed", "block exponents do not match the class")
            quo, rem = target.divmod(prod)
            if not rem.is_zero() or quo.degree != 0:
                raise _Reject("malformed", "blocks do not factor the class")
        for i in range(len(block_list)):
            for j in range(i + 1, len(block_list)):
                if poly_gcd(block_list[i][0], block_list[j][0]).degree != 0:
                    raise _Reject("malformed", "blocks are not pairwise coprime")
        blocks = ClassBlocks(block_list)
        total = FunctionFieldClass(
            a, f_total, p, factors=[(b, m) for (b, m, _) in block_list if m]
        )
    else:
        total = FunctionFieldClass(a, f_total, p)

    # support completeness: recomputed conservative set must be contained
    cross_hint = set(int(x) for x in cert.get("support_info", {}).get("cross_hint", []))
    places_recomputed, _ = bad_place_set(
        a, f_total, f1, p, cfg, blocks=blocks, cross_hint=cross_hint
    )
    listed = set(cert["bad_places"])
    for pl in places_recomputed:
        if pl.id not in listed:
            raise _Reject("support_incomplete", f"missing place {pl.id}")

    # family cofactors recorded in the certificate must still pass the gcd
    # evidence against the (recomputed) protected data
    for cofactor in cert.get("support_info", {}).get("family_cofactors", []):
        c_val = int(cofactor["cofactor"])
        if _gcd_int(c_val, p * field.p) != 1 or _gcd_int(c_val, _norm_int_of(a)) != 1:
            raise _Reject("family_evidence_failed", f"cofactor {c_val}")

    value_sets: dict[str, set[str]] = {}
    for pid in cert["bad_places"]:
        place = place_by_id(field.p, pid)
        entry = cert["image_sets"].get(pid)
        if entry is None:
            raise _Reject("cover_gap", "image set missing", pid)
        claimed_values = list(entry.get("values", []))
        cover = entry.get("cover", [])
        if entry.get("caveats"):
            raise _Reject("caveat_present", "", pid)
        if len(cover) == 1 and cover[0].get("kind") == "good_place_schema":
            schema = good_place_schema_check(a, f_total, f1, p, place, blocks=blocks)
            if schema is None:
                raise _Reject("schema_premise_failed", "", pid)
            if claimed_values != ["0"]:
                raise _Reject("value_mismatch", "schema place must claim {0}", pid)
        else:
            recomputed = image_set(total, f1, place, ImageSetPolicy(cfg.depth_cap), blocks=blocks)
            if recomputed.caveats:
                raise _Reject("caveat_present", "recomputation produced caveats", pid)
            if recomputed.values != claimed_values:
                raise _Reject(
                    "value_mismatch",
                    f"claimed {claimed_values}, recomputed {recomputed.values}",
                    pid,
                )
            _compare_covers(cover, recomputed.cover, pid)
        value_sets[pid] = set(claimed_values)

    # witnesses
    for pid in cert["bad_places"]:
        place = place_by_id(field.p, pid)
        wit = cert["witnesses"].get(pid)
        if wit is None:
            raise _Reject("missing_witness", "", pid)
        t_enc = wit["t"]
        t = INFINITY if t_enc == "inf" else field.decode(t_enc)
        try:
            val = fiber_invariant(total, f1, t, place)
        except CyclicBrauerError as exc:
            raise _Reject("witness_invalid", str(exc), pid)
        if val is None:
            raise _Reject("witness_invalid", "fiber does not split", pid)
        if val.encode() != wit["value"]:
            raise _Reject("witness_invalid", f"value {val.encode()} != {wit['value']}", pid)
        if pid == nu1_id and val.is_zero:
            raise _Reject("witness_invalid", "nu1 witness must have nonzero value", pid)
        if pid != nu1_id and not val.is_zero:
            raise _Reject("witness_invalid", "witness value must vanish", pid)

    # obstruction set logic: exactly nu1 omits 0
    if nu1_id not in value_sets:
        raise _Reject("obstruction_logic_failed", "nu1 not among the bad places")
    for pid, vals in value_sets.items():
        if pid == nu1_id:
            if "0" in vals or not vals:
                raise _Reject("obstruction_logic_failed", f"values at nu1: {sorted(vals)}")
        else:
            if vals != {"0"}:
                raise _Reject("obstruction_logic_failed", f"values at {pid}: {sorted(vals)}")

    if cert.get("kind") == "search":
        _verify_construction(cert, field, p, reasons)


def _compare_covers(claimed: list[dict], recomputed: list[dict], pid: str) -> None:
    if len(claimed) != len(recomputed):
        raise _Reject(
            "cover_gap",
            f"{len(claimed)} entries claimed, {len(recomputed)} recomputed",
            pid,
        )
    for ce, re_ in zip(claimed, recomputed):
        if ce == re_:
            continue
        if ce.get("center") != re_.get("center") or ce.get("chart") != re_.get("chart"):
            raise _Reject("cover_gap", f"disk {ce.get('center')} vs {re_.get('center')}", pid)
        if ce.get("radius_exp") != re_.get("radius_exp"):
            raise _Reject(
                "radius_uncertified",
                f"radius {ce.get('radius_exp')} vs required {re_.get('radius_exp')}",
                pid,
            )
        if ce.get("value") != re_.get("value") or ce.get("values") != re_.get("values"):
            raise _Reject("value_mismatch", f"disk {ce.get('center')}", pid)
        raise _Reject("cover_mismatch", f"disk {ce.get('center')}", pid)


def _verify_construction(cert: dict, field, p: int, reasons: list[dict]) -> None:
    from .factorization import exact_pth_root_in_k
    from .symbols import CyclicPair, inv_local, tame_symbol

    cons = cert["construction"]
    g0 = Poly.decode(field, cons["g0"])
    c = field.decode(cons["c"])
    h = Poly.decode(field, cons["h"])
    f = Poly.decode(field, cons["f"])
    a = field.decode(cons["a"])
    v_star = place_by_id(field.p, cons["v_star"])
    if (g0 * h) != f:
        raise _Reject("construction_invalid", "f != g0 * h")
    if g0.degree <= 3:
        raise _Reject("construction_invalid", "deg g0 <= 3")
    gc = g0(c)
    if gc.is_zero() or exact_pth_root_in_k(gc, p) is not None:
        raise _Reject("construction_invalid", "g0(c) is a global p-th power")
    ok, cert_loc = is_pth_power_local(gc, v_star)
    if ok:
        raise _Reject("construction_invalid", "g0(c) is a local p-th power at v_star")
    fc = f(c)
    if exact_pth_root_in_k(fc, p) is None:
        okf, _ = is_pth_power_local(fc, v_star)
        if not okf:
            raise _Reject("construction_invalid", "f(c) is not a p-th power at v_star")
    if valuation(a, v_star) != 1:
        raise _Reject("construction_invalid", "v_star(a) != 1")
    sym = tame_symbol(CyclicPair(a, g0(c), p), v_star)
    if sym.is_zero:
        raise _Reject("construction_invalid", "tame symbol (a, f1(c)) vanishes at v_star")
    # the flip and pullback must reproduce the obstruction data
    from .functionfield import mobius_flip_poly, pullback

    c_star = field.decode(cert["flip"]["center"])
    f_flip = mobius_flip_poly(f, c_star, p)
    if f_flip.encode() != cert["flip"]["f_flip"]:
        raise _Reject("construction_invalid", "flip of f does not reproduce")
    f1_flip = mobius_flip_poly(g0, c_star, p)
    if f1_flip.encode() != cert["flip"]["f1_flip"]:
        raise _Reject("construction_invalid", "flip of f1 does not reproduce")
    g = Poly.decode(field, cert["g_pull"])
    total_flip = FunctionFieldClass(a, f_flip, p)
    total_pb = pullback(total_flip, g)
    if total_pb.f.encode() != cert["obstruction"]["f_total"]:
        raise _Reject("construction_invalid", "pullback total does not reproduce")
    f1_pb = pullback(FunctionFieldClass(a, f1_flip, p), g).f
    if f1_pb.encode() != cert["obstruction"]["f1"]:
        raise _Reject("construction_invalid", "pullback f1 does not reproduce")


def certificate_order_p(cert: dict) -> int:
    """The exact order of the obstruction class: p when any local value is
    nonzero (the class is p-torsion and nonzero), 1 otherwise."""
    p = int(cert["p"])
    for values in (cert["image_sets"][pid]["values"] for pid in cert["bad_places"]):
        for v in values:
            if v != "0":
                return p
    return 1

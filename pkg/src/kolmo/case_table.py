"""Enumerated 3-species outcomes as a decision list over exponent signs.

Each rule is stated for one representative labelling; ``match`` tries all
relabellings of the species. Condition tokens:

    l2(1)<0             exponent of species 2 against mu_1 is negative
    l1(23)>0            exponent of species 1 against mu_23 is positive
    max(l1(3),l2(3))>0  at least one is positive
    min(l1(2),l2(1))<0  at least one is negative

Outcome tokens: ``X`` all extinct, ``P`` persistence, ``RPS`` rock-paper-
scissors (criterion decides), ``A:1,23`` attractor set {mu_1, mu_23}.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import permutations, product

_ATOM = re.compile(r"l(\d)\((\d*)\)")


def _pairs_branches(pairs):
    """Expand every sign combination of pair-row exponents.

    ``pairs`` is a list of (species, support) such as (3, "12"). An outcome is
    the set of pair rows with negative exponent, or persistence if none.
    """
    out = []
    for signs in product("><", repeat=len(pairs)):
        conds = [f"l{j}({s}){sg}0" for (j, s), sg in zip(pairs, signs)]
        neg = [s for (j, s), sg in zip(pairs, signs) if sg == "<"]
        out.append((conds, "A:" + ",".join(neg) if neg else "P"))
    return out


def _r(case, origin, conds, branches):
    return (case, origin, conds, branches)


_SPEC = [
    _r("0", "---", [], [([], "X")]),
    # all species survive on their own
    _r("1.1", "+++", ["l2(1)<0", "l3(1)<0", "l1(2)<0", "l3(2)<0", "l1(3)<0", "l2(3)<0"], [([], "A:1,2,3")]),
    _r("1.2", "+++", ["l2(1)<0", "l3(1)<0", "l1(2)<0", "l3(2)<0", "max(l1(3),l2(3))>0"], [([], "A:1,2")]),
    _r("1.3", "+++", ["l2(1)<0", "l3(1)<0", "l3(2)>0", "l2(3)>0"],
       [(["l1(23)>0"], "A:1"), (["l1(23)<0"], "A:1,23")]),
    _r("1.4", "+++", ["l2(1)<0", "l3(1)<0", "l3(2)>0", "l2(3)<0", "l1(3)>0"], [([], "A:1")]),
    _r("1.5", "+++", ["l2(1)<0", "l3(1)<0", "l1(2)>0", "l3(2)<0", "max(l1(3),l2(3))>0"], [([], "A:1")]),
    _r("1.6", "+++", ["l2(1)>0", "l3(1)<0", "l3(2)>0", "l1(2)<0", "l1(3)>0", "l2(3)<0"], [([], "RPS")]),
    _r("1.7", "+++", ["l2(1)>0", "l3(1)<0", "l1(2)>0", "l3(2)<0", "max(l1(3),l2(3))>0"],
       [(["l3(12)>0"], "P"), (["l3(12)<0"], "A:12")]),
    _r("1.8", "+++", ["l2(1)>0", "l3(1)<0", "l1(2)>0", "l3(2)>0", "l1(3)>0", "l2(3)<0"],
       [(["l3(12)>0"], "P"), (["l3(12)<0"], "A:12")]),
    _r("1.9", "+++", ["l2(1)>0", "l3(1)<0", "l1(2)>0", "l3(2)>0", "l2(3)>0"],
       _pairs_branches([(3, "12"), (1, "23")])),
    _r("1.10", "+++", ["l2(1)>0", "l3(1)>0", "l1(2)>0", "l3(2)>0", "l1(3)>0", "l2(3)>0"],
       _pairs_branches([(3, "12"), (2, "13"), (1, "23")])),
    # two species survive on their own
    _r("2.1", "++-", ["l2(1)<0", "l3(1)<0", "l1(2)<0", "l3(2)<0"], [([], "A:1,2")]),
    _r("2.2", "++-", ["l2(1)<0", "l3(1)<0", "l1(2)>0", "l3(2)<0"], [([], "A:1")]),
    _r("2.3", "++-", ["l2(1)<0", "l3(1)<0", "l3(2)>0"],
       [(["l1(23)>0"], "A:1"), (["l1(23)<0"], "A:1,23")]),
    _r("2.4", "++-", ["l3(1)<0", "l3(2)<0", "l2(1)>0", "l1(2)>0"],
       [(["l3(12)<0"], "A:12"), (["l3(12)>0"], "P")]),
    _r("2.5", "++-", ["l3(1)>0", "l3(2)<0", "l1(2)>0", "l2(1)<0"],
       [(["l2(13)<0"], "A:13"), (["l2(13)>0"], "P")]),
    _r("2.6", "++-", ["l3(1)>0", "l3(2)<0", "l1(2)>0", "l2(1)>0"],
       _pairs_branches([(2, "13"), (3, "12")])),
    _r("2.7", "++-", ["l3(1)>0", "l3(2)>0", "min(l1(2),l2(1))<0"],
       _pairs_branches([(2, "13"), (1, "23")])),
    _r("2.8", "++-", ["l3(1)>0", "l3(2)>0", "l1(2)>0", "l2(1)>0"],
       _pairs_branches([(1, "23"), (2, "13"), (3, "12")])),
    # one species survives on its own
    _r("3.1", "+--", ["l2(1)<0", "l3(1)<0"], [([], "A:1")]),
    _r("3.2", "+--", ["l2(1)>0", "l3(1)<0"], [(["l3(12)>0"], "P"), (["l3(12)<0"], "A:12")]),
    _r("3.3", "+--", ["l2(1)>0", "l3(1)>0"], _pairs_branches([(3, "12"), (2, "13")])),
]


def _parse_cond(text: str):
    text = text.replace(" ", "")
    agg = text[:3] if text.startswith(("max(", "min(")) else None
    op = text[-2]
    atoms = [(int(j), frozenset(int(c) for c in s)) for j, s in _ATOM.findall(text)]
    if not atoms or (agg is None and len(atoms) != 1):
        raise ValueError(f"bad condition {text!r}")
    return agg, atoms, op


def _parse_outcome(text: str):
    if text in ("X", "P", "RPS"):
        return text, ()
    kind, _, body = text.partition(":")
    assert kind == "A"
    return "A", tuple(frozenset(int(c) for c in tok) for tok in body.split(","))


@dataclass(frozen=True)
class Rule:
    case: str
    origin: str
    conditions: tuple
    branches: tuple


RULES = tuple(
    Rule(
        case,
        origin,
        tuple(_parse_cond(c) for c in conds),
        tuple(
            (f"{case}" + (f".{chr(ord('a') + k)}" if len(branches) > 1 else ""),
             tuple(_parse_cond(c) for c in bc),
             _parse_outcome(out))
            for k, (bc, out) in enumerate(branches)
        ),
    )
    for case, origin, conds, branches in _SPEC
)


def _holds(cond, lam) -> bool:
    agg, atoms, op = cond
    vals = [lam(j, s) for j, s in atoms]
    if any(v is None for v in vals):
        return False
    if agg == "max":
        v = max(vals)
    elif agg == "min":
        v = min(vals)
    else:
        v = vals[0]
    return v > 0 if op == ">" else v < 0


@dataclass(frozen=True)
class CaseMatch:
    case: str
    outcome: str
    supports: tuple
    perm: tuple


def match(lam_fn) -> CaseMatch:
    """First rule matching under some relabelling.

    ``lam_fn(j, support)`` returns the exponent of species j against the
    measure on ``support`` (1-based labels), or None when no such row exists.
    Returned supports are in the caller's labels.
    """
    for perm in permutations((1, 2, 3)):
        # canonical species k is the caller's species perm[k-1]
        def lam(j, s, perm=perm):
            return lam_fn(perm[j - 1], frozenset(perm[i - 1] for i in s))

        for rule in RULES:
            signs = "".join("+" if lam(i, frozenset()) > 0 else "-" for i in (1, 2, 3))
            if signs != rule.origin:
                continue
            if not all(_holds(c, lam) for c in rule.conditions):
                continue
            for label, bconds, (kind, sups) in rule.branches:
                if all(_holds(c, lam) for c in bconds):
                    mapped = tuple(frozenset(perm[i - 1] for i in s) for s in sups)
                    return CaseMatch(label, kind, mapped, perm)
    raise LookupError("no case matched the exponent sign pattern")

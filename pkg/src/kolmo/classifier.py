"""Decide long-run behaviour from an exponent table.

Two independent routes are provided. ``classify_3d`` walks the enumerated
case list in :mod:`kolmo.case_table`; ``classify_by_theorems`` applies the
persistence / attractor / rock-paper-scissors conditions directly to every
row. Tests hold them equal.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from . import case_table
from .core import (
    ClassificationOutcome,
    ErgodicMeasureInfo,
    KolmoError,
    OutcomeKind,
    Tolerances,
    subcommunity,
    support_label,
)
from .lv_analysis import ExponentTable, detect_degeneracy


class DegenerateExponents(KolmoError):
    """A decision depends on an exponent indistinguishable from zero."""

    def __init__(self, msg, flags=(), criterion=None):
        super().__init__(msg)
        self.flags = tuple(flags)
        self.criterion = criterion


def classify_1d(lambda_origin: float, tol: Tolerances = Tolerances()) -> ClassificationOutcome:
    lam = float(lambda_origin)
    if lam > tol.tol_zero:
        return ClassificationOutcome(OutcomeKind.PERSISTENCE, case="1d.persist")
    if lam < -tol.tol_zero:
        return ClassificationOutcome(OutcomeKind.ALL_EXTINCT, case="1d.extinct")
    return ClassificationOutcome(
        OutcomeKind.DEGENERATE, case="1d.degenerate", flags=((frozenset(), 1),),
        evidence={"lambda_origin": lam},
    )


class FaceCase(enum.IntEnum):
    BOTH_EXTINCT = 1
    ONE_WINS = 2
    BISTABLE = 3
    COEXIST = 4


@dataclass(frozen=True)
class FaceOutcome:
    case: FaceCase
    supports: tuple = ()


def classify_2d_face(table: ExponentTable, face, tol: Tolerances = Tolerances()) -> FaceOutcome:
    """Which of the four planar outcomes occurs on a two-species face."""
    i, j = sorted(subcommunity(face))
    origin = table.origin
    li0, lj0 = origin.exponent(i), origin.exponent(j)
    mi, mj = table.get({i}), table.get({j})
    governing = [(frozenset(), i, li0), (frozenset(), j, lj0)]
    if mi is not None:
        governing.append((mi.support, j, mi.exponent(j)))
    if mj is not None:
        governing.append((mj.support, i, mj.exponent(i)))
    bad = [(s, k) for s, k, v in governing if abs(v) < tol.tol_zero]
    bad += [f for f in table.degenerate_flags if f[0] in (frozenset(), frozenset({i}), frozenset({j}))
            and f[1] in (i, j) and f not in bad]
    if bad:
        raise DegenerateExponents(f"face {{{i},{j}}} depends on zero exponents", bad)

    lj_mi = mi.exponent(j) if mi is not None else None
    li_mj = mj.exponent(i) if mj is not None else None

    if li0 < 0 and lj0 < 0:
        return FaceOutcome(FaceCase.BOTH_EXTINCT, (frozenset(),))
    if li0 > 0 and lj0 > 0 and lj_mi < 0 and li_mj < 0:
        return FaceOutcome(FaceCase.BISTABLE, (frozenset({i}), frozenset({j})))
    for a, b, a0, b0, b_ma, a_mb in ((i, j, li0, lj0, lj_mi, li_mj), (j, i, lj0, li0, li_mj, lj_mi)):
        if a0 > 0 and b_ma < 0 and (b0 < 0 or a_mb > 0):
            return FaceOutcome(FaceCase.ONE_WINS, (frozenset({a}),))
    for a, b, a0, b0, b_ma, a_mb in ((i, j, li0, lj0, lj_mi, li_mj), (j, i, lj0, li0, li_mj, lj_mi)):
        if a0 > 0 and b_ma > 0 and (b0 < 0 or a_mb > 0):
            return FaceOutcome(FaceCase.COEXIST, (frozenset({i, j}),))
    raise AssertionError("planar exponent conditions are exhaustive")


@dataclass(frozen=True)
class RPSStructure:
    """Cyclic invasion pattern among the three single-species measures.

    ``orientation`` is ``'a'`` when mu_2 is invaded by 1, mu_3 by 2 and mu_1
    by 3, and ``'b'`` for the reverse cycle.
    """

    orientation: str
    single_measures: tuple
    positive_product: float
    negative_product: float
    evidence: dict = field(default_factory=dict)


_CYCLE_A = ((1, 2), (2, 3), (3, 1))  # (invader, resident)
_CYCLE_B = ((1, 3), (2, 1), (3, 2))


def detect_rps(table: ExponentTable, tol: Tolerances = Tolerances()) -> Optional[RPSStructure]:
    if table.n != 3:
        return None
    origin = table.origin
    gov = [(frozenset(), i) for i in (1, 2, 3)]
    singles = [table.get({i}) for i in (1, 2, 3)]
    for inv, res in _CYCLE_A + _CYCLE_B:
        if singles[res - 1] is not None:
            gov.append((frozenset({res}), inv))
    flagged = [(s, k) for s, k in gov if abs(table[s].exponent(k)) < tol.tol_zero or (s, k) in table.degenerate_flags]
    if flagged:
        raise DegenerateExponents("rock-paper-scissors test depends on zero exponents", flagged)
    if not all(origin.exponent(i) > 0 for i in (1, 2, 3)) or any(s is None for s in singles):
        return None
    a = [table.lam(inv, {res}) for inv, res in _CYCLE_A]
    b = [table.lam(inv, {res}) for inv, res in _CYCLE_B]
    if min(a) > 0 > max(b):
        orient, pos, neg = "a", a, b
    elif max(a) < 0 < min(b):
        orient, pos, neg = "b", b, a
    else:
        return None
    pp = pos[0] * pos[1] * pos[2]
    nn = neg[0] * neg[1] * neg[2]
    ev = {f"lambda_{inv}(mu{res})": table.lam(inv, {res}) for inv, res in _CYCLE_A + _CYCLE_B}
    return RPSStructure(orient, tuple(singles), pp, nn, ev)


def rps_criterion(s: RPSStructure, tol: Tolerances = Tolerances()) -> float:
    """``l1(mu2) l2(mu3) l3(mu1) + l1(mu3) l2(mu1) l3(mu2)`` on the type-(a) labelling.

    Positive means persistence, negative means attraction to the boundary
    cycle. Type-(b) structures are relabelled by swapping species 2 and 3
    first.
    """
    lam = {}
    for m in s.single_measures:
        (res,) = m.support
        for inv in (1, 2, 3):
            lam[(inv, res)] = m.exponent(inv)
    if s.orientation == "b":
        swap = {1: 1, 2: 3, 3: 2}
        lam = {(swap[i], swap[r]): v for (i, r), v in lam.items()}
    value = lam[(1, 2)] * lam[(2, 3)] * lam[(3, 1)] + lam[(1, 3)] * lam[(2, 1)] * lam[(3, 2)]
    scale = max(abs(s.positive_product), abs(s.negative_product))
    if abs(value) < tol.tol_zero * scale:
        raise DegenerateExponents("rock-paper-scissors criterion vanishes", criterion=value)
    return value


def _degenerate(table, flags, case, criterion=None, **evidence) -> ClassificationOutcome:
    return ClassificationOutcome(
        OutcomeKind.DEGENERATE, case=case, flags=tuple(sorted(set(flags), key=_flag_key)),
        criterion=criterion, evidence={"table": table, **evidence},
    )


def _flag_key(f):
    s, k = f
    return (len(s), sorted(s), k)


def _table_flags(table: ExponentTable, tol: Tolerances):
    flags = set(table.degenerate_flags) | set(detect_degeneracy(table, tol))
    return flags


def classify_3d(table: ExponentTable, tol: Tolerances = Tolerances()) -> ClassificationOutcome:
    """Walk the enumerated sign-pattern cases for a 3-species table."""
    if table.n != 3:
        raise ValueError("classify_3d needs a 3-species table")
    flags = _table_flags(table, tol)
    if flags or table.halted:
        return _degenerate(table, flags, "degenerate", halted=sorted(map(sorted, table.halted)))

    def lam(j, s):
        row = table.get(s)
        return None if row is None else row.exponent(j)

    hit = case_table.match(lam)
    if hit.outcome == "X":
        return ClassificationOutcome(OutcomeKind.ALL_EXTINCT, case=hit.case, evidence={"table": table})
    if hit.outcome == "P":
        return ClassificationOutcome(OutcomeKind.PERSISTENCE, case=hit.case, evidence={"table": table})
    if hit.outcome == "RPS":
        rps = detect_rps(table, tol)
        assert rps is not None
        try:
            value = rps_criterion(rps, tol)
        except DegenerateExponents as exc:
            return _degenerate(table, (), hit.case, criterion=exc.criterion, rps=rps)
        if value > 0:
            return ClassificationOutcome(
                OutcomeKind.PERSISTENCE, case=hit.case, criterion=value,
                evidence={"table": table, "rps": rps},
            )
        return ClassificationOutcome(
            OutcomeKind.RPS_BOUNDARY_ATTRACTION, measures=rps.single_measures, case=hit.case,
            criterion=value, evidence={"table": table, "rps": rps},
        )
    measures = tuple(table[s] for s in hit.supports)
    return ClassificationOutcome(
        OutcomeKind.ATTRACTOR_SET, measures=_sorted_measures(measures), case=hit.case,
        evidence={"table": table},
    )


def _sorted_measures(ms):
    return tuple(sorted(ms, key=lambda m: (len(m.support), sorted(m.support))))


def classify_by_theorems(table: ExponentTable, tol: Tolerances = Tolerances()) -> ClassificationOutcome:
    """Direct evaluation of the theorem conditions over all rows of the table."""
    flags = _table_flags(table, tol)
    if flags or table.halted:
        return _degenerate(table, flags, "degenerate")
    rows = list(table.rows.values())
    origin = table.origin
    if origin.max_external() < 0:
        return ClassificationOutcome(OutcomeKind.ALL_EXTINCT, case="thm.extinct")
    if table.n == 3:
        rps = detect_rps(table, tol)
        if rps is not None:
            try:
                value = rps_criterion(rps, tol)
            except DegenerateExponents as exc:
                return _degenerate(table, (), "thm.rps", criterion=exc.criterion)
            if value > 0:
                return ClassificationOutcome(OutcomeKind.PERSISTENCE, case="thm.rps", criterion=value)
            return ClassificationOutcome(
                OutcomeKind.RPS_BOUNDARY_ATTRACTION, measures=rps.single_measures,
                case="thm.rps", criterion=value,
            )
    if all(r.max_external() > 0 for r in rows):
        return ClassificationOutcome(OutcomeKind.PERSISTENCE, case="thm.pers")
    attractors = [r for r in rows if r.support and r.max_external() < 0]
    return ClassificationOutcome(
        OutcomeKind.ATTRACTOR_SET, measures=_sorted_measures(attractors), case="thm.exclude",
    )


def classify(table: ExponentTable, tol: Tolerances = Tolerances()) -> ClassificationOutcome:
    """Dispatch on the number of species."""
    n = table.n
    if n == 1:
        out = classify_1d(table.origin.exponent(1), tol)
        return ClassificationOutcome(out.kind, case=out.case, flags=out.flags, evidence={"table": table})
    if n == 2:
        try:
            fo = classify_2d_face(table, {1, 2}, tol)
        except DegenerateExponents as exc:
            return _degenerate(table, exc.flags, "2d.degenerate")
        label = f"2d.{int(fo.case)}"
        if fo.case is FaceCase.BOTH_EXTINCT:
            return ClassificationOutcome(OutcomeKind.ALL_EXTINCT, case=label, evidence={"table": table})
        if fo.case is FaceCase.COEXIST:
            return ClassificationOutcome(OutcomeKind.PERSISTENCE, case=label, evidence={"table": table})
        return ClassificationOutcome(
            OutcomeKind.ATTRACTOR_SET, measures=tuple(table[s] for s in fo.supports), case=label,
            evidence={"table": table},
        )
    if n == 3:
        return classify_3d(table, tol)
    raise ValueError("classification is defined for n <= 3")


@dataclass(frozen=True)
class ProbabilityContract:
    """Checkable statement about survivor-pattern frequencies of an attractor set.

    Every listed support must be observed with positive frequency and the
    listed supports must account for all resolved trials.
    """

    supports: tuple
    nonnesting: bool
    exact_single: bool

    def statements(self) -> list:
        labels = [support_label(s) for s in self.supports]
        out = []
        if self.exact_single:
            out.append(f"frequency({labels[0]}) = 1")
        else:
            out.append("frequencies of " + ", ".join(labels) + " are all positive")
            out.append("frequencies of " + ", ".join(labels) + " sum to 1")
        for a, b in combinations(self.supports, 2):
            out.append(f"supports {support_label(a)} and {support_label(b)} are not nested")
        return out

    def check(self, frequencies: dict, min_frequency: float = 0.0, sum_tol: float = 0.0) -> list:
        """Return failed statements given observed frequencies keyed by survivor set."""
        fails = []
        if not self.nonnesting:
            fails.append("declared supports are nested")
        declared = set(self.supports)
        for s in self.supports:
            f = frequencies.get(s, 0.0)
            if not f > min_frequency:
                fails.append(f"{support_label(s)} observed with frequency {f:.3f} <= {min_frequency}")
        total = sum(frequencies.get(s, 0.0) for s in declared)
        if abs(total - 1.0) > sum_tol:
            extra = sorted((support_label(s) for s in frequencies if s not in declared))
            fails.append(f"declared supports cover {total:.3f} of trials; undeclared patterns {extra}")
        return fails


def attractor_probability_contract(outcome: ClassificationOutcome) -> ProbabilityContract:
    if outcome.kind is not OutcomeKind.ATTRACTOR_SET:
        raise ValueError("contract is defined for attractor-set outcomes only")
    sups = tuple(outcome.supports)
    nonnest = all(not (a <= b or b <= a) for a, b in combinations(sups, 2))
    return ProbabilityContract(sups, nonnest, len(sups) == 1)

"""Boundary ergodic measures and external Lyapunov exponents of LV models.

For a Lotka-Volterra SDE every boundary ergodic measure has mean densities
solving a small linear system, and its exponent row is an affine function of
those means. The set of boundary measures is built face by face from the
signs of exponents that are already known.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .core import (
    ErgodicMeasureInfo,
    LVModel,
    NonpositiveMean,
    Provenance,
    SingularSystem,
    Tolerances,
    complement,
    format_support,
    subcommunity,
)

RESIDUAL_TOL = 1e-10


@dataclass
class ExponentTable:
    """Rows of boundary ergodic measures keyed by species support."""

    n: int
    rows: dict
    degenerate_flags: set = field(default_factory=set)
    halted: set = field(default_factory=set)

    def __contains__(self, support) -> bool:
        return subcommunity(support) in self.rows

    def __getitem__(self, support) -> ErgodicMeasureInfo:
        return self.rows[subcommunity(support)]

    def get(self, support) -> Optional[ErgodicMeasureInfo]:
        return self.rows.get(subcommunity(support))

    @property
    def origin(self) -> ErgodicMeasureInfo:
        return self.rows[frozenset()]

    def lam(self, species: int, support=()) -> float:
        """Exponent of ``species`` against the measure supported on ``support``."""
        return self[support].exponent(species)

    def supports(self) -> list:
        return sorted(self.rows, key=lambda s: (len(s), sorted(s)))

    def permuted(self, perm) -> "ExponentTable":
        """Relabel species: new species k+1 is old species perm[k]+1."""
        p = list(perm)
        inv = {p[k] + 1: k + 1 for k in range(len(p))}
        rows = {}
        for s, r in self.rows.items():
            ns = frozenset(inv[i] for i in s)
            rows[ns] = ErgodicMeasureInfo(
                ns,
                r.mean[p],
                r.exponents[p],
                r.provenance,
                None if r.stderr is None else r.stderr[p],
            )
        flags = {(frozenset(inv[i] for i in s), inv[j]) for s, j in self.degenerate_flags}
        halted = {frozenset(inv[i] for i in s) for s in self.halted}
        return ExponentTable(self.n, rows, flags, halted)


def exponents_at_origin(model: LVModel) -> np.ndarray:
    return model.m - model.sigma.diag / 2.0


def solve_boundary_means(model: LVModel, support, tol: Tolerances = Tolerances()) -> np.ndarray:
    """Mean densities of the ergodic measure living on the open face ``support``.

    Raises SingularSystem when the restricted interaction matrix is
    numerically singular and NonpositiveMean when the solution leaves the
    open face.
    """
    s = subcommunity(support)
    if not s:
        raise ValueError("support must be nonempty")
    idx = np.array(sorted(s)) - 1
    sub = model.A[np.ix_(idx, idx)]
    rhs = -(model.m[idx] - model.sigma.diag[idx] / 2.0)
    cond = np.linalg.cond(sub)
    if not np.isfinite(cond) or cond > tol.tol_singular:
        raise SingularSystem(
            f"interaction matrix restricted to {format_support(s)} is singular (cond={cond:.3g})", s
        )
    sol = np.linalg.solve(sub, rhs)
    mean = np.zeros(model.n)
    mean[idx] = sol
    if np.any(sol <= 0):
        raise NonpositiveMean(
            f"mean on {format_support(s)} has nonpositive entries {sol.tolist()}", s, mean
        )
    return mean


def exponents_at(model: LVModel, measure) -> np.ndarray:
    """Exponent row ``m + A xbar - diag(sigma)/2`` for a boundary measure or mean vector."""
    mean = measure.mean if isinstance(measure, ErgodicMeasureInfo) else np.asarray(measure, dtype=float)
    return model.m + model.A @ mean - model.sigma.diag / 2.0


def lv_measure(model: LVModel, support, tol: Tolerances = Tolerances()) -> ErgodicMeasureInfo:
    s = subcommunity(support)
    if not s:
        mean = np.zeros(model.n)
        return ErgodicMeasureInfo(s, mean, exponents_at_origin(model))
    mean = solve_boundary_means(model, s, tol)
    lam = exponents_at(model, mean)
    idx = np.array(sorted(s)) - 1
    resid = np.max(np.abs(lam[idx]))
    if resid > RESIDUAL_TOL:
        raise SingularSystem(f"linear solve residual {resid:.3g} on {format_support(s)}", s)
    lam[idx] = 0.0
    return ErgodicMeasureInfo(s, mean, lam, Provenance.ANALYTIC)


def pair_exists(li0: float, lj0: float, lj_mui: Optional[float], li_muj: Optional[float]) -> bool:
    """Whether a 2-species face carries an ergodic measure with both species.

    Arguments are the origin exponents of i and j and the invasion exponents
    of j against mu_i and of i against mu_j (None when that single-species
    measure does not exist). Face persistence holds when some species can
    establish alone and can be invaded by the other, which in turn either
    cannot establish alone or can be invaded back.
    """

    def one_way(a0, b0, b_mua, a_mub):
        if not a0 > 0 or b_mua is None or not b_mua > 0:
            return False
        if b0 < 0:
            return True
        return b0 > 0 and a_mub is not None and a_mub > 0

    return one_way(li0, lj0, lj_mui, li_muj) or one_way(lj0, li0, li_muj, lj_mui)


def build_table(
    n: int,
    measure_for: Callable[[frozenset], ErgodicMeasureInfo],
    zero_band: Callable[[ErgodicMeasureInfo, int], float],
) -> ExponentTable:
    """Existence recursion over faces of dimension 0, 1 and 2.

    ``measure_for(support)`` computes a row; ``zero_band(row, j)`` gives the
    magnitude below which exponent j of that row counts as zero. Rows whose
    existence would hinge on a zero exponent are not built and the face is
    recorded in ``halted``.
    """
    origin = measure_for(frozenset())
    rows = {frozenset(): origin}
    table = ExponentTable(n, rows)

    def is_zero(row, j):
        return abs(row.exponent(j)) < zero_band(row, j)

    for i in range(1, n + 1):
        s = frozenset({i})
        if is_zero(origin, i):
            table.halted.add(s)
        elif origin.exponent(i) > 0 and n > 1:
            rows[s] = measure_for(s)

    if n >= 3:
        for i, j in combinations(range(1, n + 1), 2):
            s = frozenset({i, j})
            gov = [(origin, i), (origin, j)]
            mi, mj = rows.get(frozenset({i})), rows.get(frozenset({j}))
            if mi is not None:
                gov.append((mi, j))
            if mj is not None:
                gov.append((mj, i))
            if any(is_zero(r, k) for r, k in gov) or frozenset({i}) in table.halted or frozenset({j}) in table.halted:
                table.halted.add(s)
                continue
            if pair_exists(
                origin.exponent(i),
                origin.exponent(j),
                None if mi is None else mi.exponent(j),
                None if mj is None else mj.exponent(i),
            ):
                rows[s] = measure_for(s)

    for s, row in rows.items():
        for k in sorted(complement(s, n)):
            if is_zero(row, k):
                table.degenerate_flags.add((s, k))
    return table


def build_measure_tree(model: LVModel, tol: Tolerances = Tolerances()) -> ExponentTable:
    """Full analytic exponent table of an LV model with at most 3 species."""
    if model.n > 3:
        raise ValueError("the measure tree is only defined for n <= 3")

    def measure_for(s):
        try:
            return lv_measure(model, s, tol)
        except (SingularSystem, NonpositiveMean) as exc:
            exc.support = s
            raise

    return build_table(model.n, measure_for, lambda row, j: tol.tol_zero)


def detect_degeneracy(table: ExponentTable, tol: Tolerances = Tolerances()) -> list:
    """Every off-support exponent with magnitude below ``tol_zero``.

    An empty list certifies that all external exponents in the table are
    nonzero at this tolerance.
    """
    out = []
    for s in table.supports():
        row = table.rows[s]
        for k, v in row.external().items():
            band = tol.tol_zero
            if row.stderr is not None:
                band = max(band, 3.0 * float(row.stderr[k - 1]))
            if abs(v) < band:
                out.append((s, k))
    return out

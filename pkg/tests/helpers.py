"""Shared generators for tests."""
import numpy as np

from kolmo.core import LVModel, NonpositiveMean, SingularSystem, Tolerances
from kolmo.lv_analysis import build_measure_tree


def random_lv(rng: np.random.Generator) -> LVModel:
    """Random 3-species LV model obeying the sign constraints on A.

    Growth rates straddle zero so that every origin sign pattern occurs;
    off-diagonal entries are mostly competitive with some predation, and a
    positive a_ij forces a negative a_ji.
    """
    m = rng.uniform(-0.5, 1.5, 3)
    A = rng.uniform(-2.5, 1.0, (3, 3))
    A[np.diag_indices(3)] = rng.uniform(-2.0, -0.5, 3)
    for i in range(3):
        for j in range(i + 1, 3):
            if A[i, j] > 0 and A[j, i] > 0:
                A[j, i] = -A[j, i]
    sigma = np.diag(rng.uniform(0.01, 0.5, 3))
    return LVModel(m, A, sigma)


def random_tables(seed: int, count: int, tol: Tolerances = Tolerances(1e-6)):
    """``count`` (model, table) pairs with no degenerate exponents."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        model = random_lv(rng)
        try:
            table = build_measure_tree(model, tol)
        except (SingularSystem, NonpositiveMean):
            continue
        if table.degenerate_flags or table.halted:
            continue
        out.append((model, table))
    return out

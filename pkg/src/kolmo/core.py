"""Domain types shared across the package.

Species are labelled 1..n everywhere a user can see them. A subcommunity is a
``frozenset`` of such labels; the empty set stands for the Dirac measure at
the origin.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

Subcommunity = frozenset


class KolmoError(Exception):
    """Base class for all package errors."""


class ParameterError(KolmoError, ValueError):
    pass


class NotPositiveDefinite(ParameterError):
    pass


class SingularSystem(KolmoError):
    def __init__(self, msg: str, support: Optional[frozenset] = None):
        super().__init__(msg)
        self.support = support


class NonpositiveMean(KolmoError):
    def __init__(self, msg: str, support: Optional[frozenset] = None, mean=None):
        super().__init__(msg)
        self.support = support
        self.mean = mean


class NonFinite(KolmoError):
    def __init__(self, msg: str, time: float = float("nan"), state=None):
        super().__init__(msg)
        self.time = time
        self.state = state


class NonErgodicSuspect(KolmoError):
    def __init__(self, msg: str, info=None):
        super().__init__(msg)
        self.info = info


def subcommunity(members: Iterable[int] = ()) -> frozenset:
    """Canonical subcommunity from any iterable of 1-based labels."""
    return frozenset(int(i) for i in members)


def complement(s: Iterable[int], n: int) -> frozenset:
    s = subcommunity(s)
    if any(i < 1 or i > n for i in s):
        raise ParameterError(f"support {sorted(s)} not contained in 1..{n}")
    return frozenset(range(1, n + 1)) - s


def support_label(s: Iterable[int]) -> str:
    """``'delta*'`` for the origin, otherwise ``'mu13'`` style labels."""
    s = sorted(s)
    if not s:
        return "delta*"
    return "mu" + "".join(str(i) for i in s)


def format_support(s: Iterable[int]) -> str:
    s = sorted(s)
    return "{" + ",".join(str(i) for i in s) + "}"


def parse_support(text: str) -> frozenset:
    text = text.strip().strip("{}")
    if not text:
        return frozenset()
    return subcommunity(int(tok) for tok in text.split(","))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NoiseCovariance:
    """Symmetric positive definite covariance of the driving noise."""

    matrix: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.array(self.matrix, dtype=float))
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ParameterError("sigma must be a square matrix")
        if not np.all(np.isfinite(s)):
            raise ParameterError("sigma has non-finite entries")
        if not np.allclose(s, s.T, rtol=0.0, atol=1e-12):
            raise ParameterError("sigma must be symmetric")
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"sigma is not positive definite: {s.tolist()}") from exc
        object.__setattr__(self, "matrix", _frozen(s))

    @classmethod
    def isotropic(cls, variance: float, n: int) -> "NoiseCovariance":
        return cls(variance * np.eye(n))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.matrix)

    def permuted(self, perm) -> "NoiseCovariance":
        p = np.asarray(perm)
        return NoiseCovariance(self.matrix[np.ix_(p, p)])

    def __eq__(self, other):
        return isinstance(other, NoiseCovariance) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def _as_sigma(sigma, n: int) -> NoiseCovariance:
    if isinstance(sigma, NoiseCovariance):
        out = sigma
    elif np.ndim(sigma) == 0:
        out = NoiseCovariance.isotropic(float(sigma), n)
    elif np.ndim(sigma) == 1:
        out = NoiseCovariance(np.diag(np.asarray(sigma, dtype=float)))
    else:
        out = NoiseCovariance(sigma)
    if out.n != n:
        raise ParameterError(f"sigma must be {n}x{n}")
    return out


@dataclass(frozen=True, eq=False)
class LVModel:
    """Stochastic Lotka-Volterra model ``dX_i = X_i (m_i + sum_j a_ij X_j) dt + X_i dE_i``.

    ``sigma`` may be a NoiseCovariance, a full matrix, a vector of variances
    or a scalar variance shared by all species.
    """

    m: np.ndarray
    A: np.ndarray
    sigma: NoiseCovariance
    name: str = "lotka_volterra"

    def __post_init__(self):
        m = np.atleast_1d(np.array(self.m, dtype=float))
        A = np.atleast_2d(np.array(self.A, dtype=float))
        if m.ndim != 1:
            raise ParameterError("m must be a vector")
        n = m.shape[0]
        if A.shape != (n, n):
            raise ParameterError(f"A must be n×n (n={n} from m), got shape {A.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(A))):
            raise ParameterError("m and A must be finite")
        object.__setattr__(self, "m", _frozen(m))
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "sigma", _as_sigma(self.sigma, n))

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def f(self, x):
        x = np.asarray(x, dtype=float)
        return self.m + x @ self.A.T

    def g(self, x):
        return np.ones(np.shape(x))

    def permuted(self, perm) -> "LVModel":
        """Relabel species: new species k is old species ``perm[k]`` (0-based)."""
        p = np.asarray(perm)
        return LVModel(self.m[p], self.A[np.ix_(p, p)], self.sigma.permuted(p), self.name)

    def scaled(self, c: float) -> "LVModel":
        return LVModel(c * self.m, c * self.A, NoiseCovariance(c * self.sigma.matrix), self.name)


def _ones_like(x):
    return np.ones(np.shape(x))


@dataclass(frozen=True, eq=False)
class KolmogorovModel:
    """General Kolmogorov system with per-capita drift ``f`` and diffusion scale ``g``.

    ``f`` and ``g`` map an array of shape ``(..., n)`` to the same shape and
    must be evaluable on the whole closed orthant.
    """

    n: int
    f: Callable
    sigma: NoiseCovariance
    g: Callable = _ones_like
    name: str = "kolmogorov"
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")
        object.__setattr__(self, "sigma", _as_sigma(self.sigma, self.n))
        object.__setattr__(self, "params", dict(self.params))


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True, eq=False)
class ErgodicMeasureInfo:
    """Boundary ergodic measure: support, mean densities and exponent row."""

    support: frozenset
    mean: np.ndarray
    exponents: np.ndarray
    provenance: Provenance = Provenance.ANALYTIC
    stderr: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "support", subcommunity(self.support))
        object.__setattr__(self, "mean", _frozen(self.mean))
        object.__setattr__(self, "exponents", _frozen(self.exponents))
        if self.stderr is not None:
            object.__setattr__(self, "stderr", _frozen(self.stderr))

    @property
    def n(self) -> int:
        return self.exponents.shape[0]

    @property
    def label(self) -> str:
        return support_label(self.support)

    def exponent(self, i: int) -> float:
        return float(self.exponents[i - 1])

    def external(self) -> dict:
        return {i: self.exponent(i) for i in sorted(complement(self.support, self.n))}

    def max_external(self) -> float:
        ext = self.external()
        return max(ext.values()) if ext else float("-inf")


class OutcomeKind(str, enum.Enum):
    ALL_EXTINCT = "AllExtinct"
    PERSISTENCE = "Persistence"
    ATTRACTOR_SET = "AttractorSet"
    RPS_BOUNDARY_ATTRACTION = "RPSBoundaryAttraction"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True, eq=False)
class ClassificationOutcome:
    kind: OutcomeKind
    measures: tuple = ()
    case: str = ""
    criterion: Optional[float] = None
    flags: tuple = ()
    evidence: Mapping = field(default_factory=dict)

    @property
    def supports(self) -> list:
        return sorted((m.support for m in self.measures), key=lambda s: (len(s), sorted(s)))

    def summary(self) -> str:
        if self.kind is OutcomeKind.ATTRACTOR_SET:
            inner = ", ".join(support_label(s) for s in self.supports)
            return f"AttractorSet {{{inner}}}"
        if self.kind is OutcomeKind.DEGENERATE:
            inner = ", ".join(f"lambda_{j}({support_label(s)})" for s, j in self.flags)
            return f"Degenerate ({inner})" if inner else "Degenerate"
        if self.criterion is not None:
            return f"{self.kind.value} (rps criterion {self.criterion:+.4g})"
        return self.kind.value


@dataclass(frozen=True)
class Tolerances:
    tol_zero: float = 1e-9
    tol_singular: float = 1e12
    extinction_threshold: float = 1e-8

    def __post_init__(self):
        for name in ("tol_zero", "tol_singular", "extinction_threshold"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_lv(model: LVModel) -> ValidationReport:
    """Check the sign constraints on ``A`` and positive definiteness of sigma.

    Together these imply the tightness condition for LV systems, so a clean
    report means the classification theory applies.
    """
    out = []
    A = model.A
    n = model.n
    for i in range(n):
        if not A[i, i] < 0:
            out.append(f"a_{i + 1}{i + 1} must be negative (got {A[i, i]:g})")
    for i in range(n):
        for j in range(i + 1, n):
            if A[i, j] > 0 and A[j, i] > 0:
                out.append(
                    f"mutualistic pair forbidden: a_{i + 1}{j + 1}={A[i, j]:g} and a_{j + 1}{i + 1}={A[j, i]:g} both positive"
                )
            elif A[i, j] > 0 and A[j, i] == 0 or A[j, i] > 0 and A[i, j] == 0:
                a, b = (i, j) if A[i, j] > 0 else (j, i)
                out.append(f"a_{a + 1}{b + 1}>0 requires a_{b + 1}{a + 1}<0 (got 0)")
    try:
        np.linalg.cholesky(model.sigma.matrix)
    except np.linalg.LinAlgError:
        out.append("sigma must be positive definite")
    return ValidationReport(tuple(out))

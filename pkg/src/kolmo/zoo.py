"""Concrete models: symmetric rock-paper-scissors, prey switching, Figure-1 panels."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    ErgodicMeasureInfo,
    KolmogorovModel,
    LVModel,
    NoiseCovariance,
    ParameterError,
    Provenance,
    Tolerances,
)
from .lv_analysis import ExponentTable, build_table


@dataclass(frozen=True)
class RPSParams:
    alpha: float
    beta: float
    sigma: float

    def __post_init__(self):
        if not (0 < self.beta < 1 < self.alpha):
            raise ParameterError(f"need 0 < beta < 1 < alpha, got alpha={self.alpha}, beta={self.beta}")
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")


def rps_model(p: RPSParams) -> LVModel:
    a, b = p.alpha, p.beta
    A = -np.array([[1.0, a, b], [b, 1.0, a], [a, b, 1.0]])
    return LVModel(np.ones(3), A, NoiseCovariance.isotropic(p.sigma, 3), name="rps")


def rps_interior_equilibrium(p: RPSParams) -> np.ndarray:
    """Interior fixed point of the deterministic cyclic competition ODE."""
    return np.full(3, 1.0 / (1.0 + p.alpha + p.beta))


class ODEBehaviour(str, enum.Enum):
    STABLE = "Stable"
    HETEROCLINIC = "Heteroclinic"
    PERIODIC = "Periodic"


def rps_ode_trichotomy(p: RPSParams, tol: float = 1e-9) -> ODEBehaviour:
    s = p.alpha + p.beta
    if abs(s - 2.0) <= tol:
        return ODEBehaviour.PERIODIC
    return ODEBehaviour.STABLE if s < 2.0 else ODEBehaviour.HETEROCLINIC


@dataclass(frozen=True)
class SwitchParams:
    r: float = 1.0
    beta: float = 1.2
    d: float = 0.5
    c: float = 0.1
    eps: float = 0.05

    def __post_init__(self):
        if not (self.r > 0 and self.d > 0 and self.c > 0 and self.beta > 0):
            raise ParameterError("need r, d, c, beta > 0")
        if self.eps < 0:
            raise ParameterError("eps must be nonnegative")


def _switching_drift(p: SwitchParams):
    r, beta, d, c = p.r, p.beta, p.d, p.c

    def f(x):
        x = np.asarray(x, dtype=float)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        s = x1 + x2
        pos = s > 0
        safe = np.where(pos, s, 1.0)
        # predator search shares; at x1=x2=0 the full drift x_i f_i extends by 0
        w1 = np.where(pos, x1 / safe, 0.0)
        w2 = np.where(pos, x2 / safe, 0.0)
        out = np.empty(np.shape(x))
        out[..., 0] = r - x1 - beta * x2 - w1 * x3
        out[..., 1] = r - x2 - beta * x1 - w2 * x3
        out[..., 2] = np.where(pos, (x1 * x1 + x2 * x2) / safe, 0.0) - d - c * x3
        return out

    return f


def switching_model(p: SwitchParams) -> KolmogorovModel:
    if not p.eps > 0:
        raise ParameterError("the stochastic switching model needs eps > 0")
    return KolmogorovModel(
        3, _switching_drift(p), NoiseCovariance.isotropic(p.eps**2, 3),
        name="switching", params=asdict(p),
    )


def switching_ode_rhs(p: SwitchParams):
    """Per-capita drift of the deterministic switching model."""
    return _switching_drift(p)


class Permanence(str, enum.Enum):
    PERMANENT = "Permanent"
    IMPERMANENT = "Impermanent"
    DEGENERATE = "Degenerate"


def switching_ode_permanence(p: SwitchParams, tol: float = 1e-12) -> Permanence:
    """Closed-form permanence test for the deterministic model (requires beta > 1)."""
    if not p.beta > 1:
        raise ParameterError("the permanence criterion assumes beta > 1")
    g1 = p.r / (1 + p.beta) - p.d
    g2 = p.r / p.beta * (1 + p.c * (1 - p.beta)) - p.d
    if abs(g1) <= tol or abs(g2) <= tol:
        return Permanence.DEGENERATE
    return Permanence.PERMANENT if (g1 > 0 and g2 > 0) else Permanence.IMPERMANENT


def switching_face_means(p: SwitchParams):
    """Means on the prey-predator face {1,3}: (prey, predator)."""
    e2 = p.eps**2
    x3 = (p.r - p.d - e2) / (1 + p.c)
    x1 = (p.r * p.c + p.d + e2) / (1 + p.c) - e2 / 2
    return x1, x3


def switching_table(p: SwitchParams, tol: Tolerances = Tolerances()) -> ExponentTable:
    """Exponent table of the stochastic switching model from closed forms.

    Every boundary face that can carry a measure is Lotka-Volterra, except
    the prey-prey face, which only carries one when beta < 1; that case has
    no closed form and must go through Monte Carlo estimation.
    """
    e2 = p.eps**2
    r, b, d, c = p.r, p.beta, p.d, p.c
    if not b > 1:
        raise ParameterError("closed-form switching exponents need beta > 1; use Monte Carlo")

    def measure_for(s):
        mean = np.zeros(3)
        if s == frozenset():
            lam = np.array([r - e2 / 2, r - e2 / 2, -d - e2 / 2])
        elif s in (frozenset({1}), frozenset({2})):
            (i,) = s
            j = 3 - i
            xb = r - e2 / 2
            mean[i - 1] = xb
            lam = np.zeros(3)
            lam[j - 1] = r - b * xb - e2 / 2
            lam[2] = xb - d - e2 / 2
        elif s in (frozenset({1, 3}), frozenset({2, 3})):
            i = min(s)
            j = 3 - i
            x1, x3 = switching_face_means(p)
            mean[i - 1], mean[2] = x1, x3
            lam = np.zeros(3)
            lam[j - 1] = r - b * x1 - e2 / 2
        else:
            raise ParameterError(f"no closed form for support {sorted(s)}")
        return ErgodicMeasureInfo(s, mean, lam, Provenance.ANALYTIC)

    return build_table(3, measure_for, lambda row, j: tol.tol_zero)


FIGURE1_VARIANTS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix")

_FIG1_LV = {
    "i": ([1, 1, 1], [[-1, 0, 0], [-2, -1, 0], [-2, 0, -1]]),
    "ii": ([1, 1, 1], [[-1, -2, 0], [-2, -1, 0], [-2, -2, -1]]),
    "iii": ([1, 1, 1], [[-1, -2, -2], [-2, -1, -2], [-2, -2, -1]]),
    "iv": ([1, 1, 1], [[-1, 0, 0], [0, -1, 0], [-1, -1, -1]]),
    "v": ([1, 1, 1], [[-1, 0, -2], [0, -1, -2], [-1, -1, -1]]),
    "vi": ([1, -0.1, 1], [[-1, 0, -2], [0.4, -0.5, 0.4], [-2, -1, 0]]),
    "viii": ([1, 1, 1], [[-1, -2, -0.8], [-0.8, -1, -2], [-2, -0.8, -1]]),
    "ix": ([1, 1, 1], [[-1, 0, 0], [0, -1, 0], [0, 0, -1]]),
}


def _variant_vii():
    def f(x):
        x = np.asarray(x, dtype=float)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        out = np.empty(np.shape(x))
        out[..., 0] = 1 - x1 - 4 * x2 * x3
        out[..., 1] = 1 - x2 - 4 * x1 * x3
        out[..., 2] = 1 - x3 - x1 * x2
        return out

    return f


def figure1_model(variant: str, noise: float = 0.25, c: float = 1.0):
    """Panel models with diffusion ``noise * X_i dB_i`` (so sigma_ii = noise**2).

    ``c`` is the leading scale of panels (viii) and (ix); ignored elsewhere.
    """
    v = str(variant).lower()
    sigma = NoiseCovariance.isotropic(noise**2, 3)
    if v == "vii":
        return KolmogorovModel(3, _variant_vii(), sigma, name="figure1-vii", params={"noise": noise})
    if v not in _FIG1_LV:
        raise ParameterError(f"unknown figure-1 variant {variant!r}; expected one of {FIGURE1_VARIANTS}")
    m, A = (np.asarray(a, dtype=float) for a in _FIG1_LV[v])
    scale = c if v in ("viii", "ix") else 1.0
    return LVModel(scale * m, scale * A, sigma, name=f"figure1-{v}")


def logistic_model(m: float = 1.0, a: float = -1.0, sigma: float = 0.0625) -> LVModel:
    return LVModel([m], [[a]], sigma, name="logistic")


def growth_condition_holds(model, delta: float = 0.5, radii=(1e2, 1e3, 1e4, 1e5), seed: int = 0) -> bool:
    """Numerical spot check that diffusion grows slower than drift at infinity.

    Evaluates ``|x|^delta * sum g_i^2 / (1 + sum |f_i| + g_i^2)`` along random
    directions and requires it to shrink with the radius. Only meaningful for
    the bundled models; general user models carry this as an obligation.
    """
    rng = np.random.default_rng(seed)
    n = model.n
    dirs = np.abs(rng.standard_normal((64, n))) + 1e-3
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    prev = None
    for rad in radii:
        x = rad * dirs
        f = np.asarray(model.f(x))
        g = np.asarray(model.g(x))
        ratio = rad**delta * np.sum(g * g, axis=1) / (1 + np.sum(np.abs(f) + g * g, axis=1))
        worst = float(np.max(ratio))
        if prev is not None and not worst < prev:
            return False
        prev = worst
    return prev < 1.0


BUILTINS = ("rps", "switching", "figure1", "logistic")


def builtin(name: str, params: dict | None = None):
    """Construct a bundled model by name from a parameter record."""
    params = dict(params or {})
    if name == "rps":
        return rps_model(RPSParams(**params))
    if name == "switching":
        return switching_model(SwitchParams(**params))
    if name == "figure1":
        return figure1_model(**params)
    if name == "logistic":
        return logistic_model(**params)
    raise ParameterError(f"unknown builtin model {name!r}; expected one of {BUILTINS}")


def builtin_table(name: str, params: dict | None, tol: Tolerances = Tolerances()):
    """Analytic exponent table for builtins that have one outside plain LV, else None."""
    if name == "switching":
        p = SwitchParams(**dict(params or {}))
        if p.beta > 1:
            return switching_table(p, tol)
    return None

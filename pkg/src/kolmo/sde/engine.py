"""Positivity-preserving simulation and occupation statistics.

The integrator works on log densities:

    log X_i' = log X_i + (f_i(X) - sigma_ii g_i(X)^2 / 2) dt + g_i(X) dE_i,

with dE = sqrt(dt) L z, z standard normal and L the lower Cholesky factor of
sigma, so that increments of E have covariance sigma * dt. (Writing
E = Gamma^T B as in the usual presentation, Gamma = L^T.) A species that starts
at exactly zero has log density -inf and stays there.

The drift term is the per-capita growth integrand, so empirical exponents are
plain time averages of quantities the stepper computes anyway. These averages
are accumulated during the run in ``n_batches`` contiguous batches after the
burn-in, which gives batch-means standard errors without storing the path.
"""
from __future__ import annotations

import math
from itertools import combinations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..core import (
    ErgodicMeasureInfo,
    LVModel,
    NonErgodicSuspect,
    NonFinite,
    NotPositiveDefinite,
    ParameterError,
    Provenance,
    Tolerances,
    _ones_like,
    format_support,
    subcommunity,
)
from ..lv_analysis import ExponentTable, build_table
from . import backend

CHUNK = 1 << 16
SCHEMES = ("log_euler", "euler")


@dataclass(frozen=True)
class SimConfig:
    t_final: float = 1.0
    dt: float = 1e-3
    burn_in: float = 0.2
    seed: int = 0
    extinction_threshold: float = 1e-8
    stride: int = 1
    n_batches: int = 10
    scheme: str = "log_euler"

    def __post_init__(self):
        if not (0 < self.dt < self.t_final):
            raise ParameterError(f"need 0 < dt < t_final, got dt={self.dt}, t_final={self.t_final}")
        if not (0 <= self.burn_in < 1):
            raise ParameterError(f"burn_in must lie in [0, 1), got {self.burn_in}")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if not self.extinction_threshold > 0:
            raise ParameterError("extinction_threshold must be positive")
        if int(self.stride) < 1:
            raise ParameterError("stride must be at least 1")
        if int(self.n_batches) < 2:
            raise ParameterError("n_batches must be at least 2")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_final / self.dt + 1e-9))

    @property
    def burn_steps(self) -> int:
        return int(math.floor(self.burn_in * self.n_steps))

    def to_dict(self) -> dict:
        return {
            "t_final": self.t_final,
            "dt": self.dt,
            "burn_in": self.burn_in,
            "seed": int(self.seed),
            "extinction_threshold": self.extinction_threshold,
            "stride": int(self.stride),
            "n_batches": int(self.n_batches),
            "scheme": self.scheme,
        }


def noise_factor(sigma) -> np.ndarray:
    """Lower-triangular L with L @ L.T == sigma."""
    s = np.asarray(getattr(sigma, "matrix", sigma), dtype=float)
    try:
        return np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"sigma is not positive definite: {s.tolist()}") from exc


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent stream for trial ``trial``; does not depend on ensemble size."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def noise_increments(rng: np.random.Generator, L_scaled: np.ndarray, steps: int) -> np.ndarray:
    """``steps`` increments of E, each ``L_scaled @ z`` with z standard normal.

    The product is written out term by term so that the result does not
    depend on BLAS blocking or threading.
    """
    n = L_scaled.shape[0]
    z = rng.standard_normal((steps, n))
    dE = np.zeros((steps, n))
    for i in range(n):
        for j in range(i + 1):
            if L_scaled[i, j] != 0.0:
                dE[:, i] += L_scaled[i, j] * z[:, j]
    return dE


def _log(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < 0):
        raise ParameterError("initial densities must be finite and nonnegative")
    with np.errstate(divide="ignore"):
        return np.log(y)


def _integrand(model, x):
    """Per-capita log drift ``f - sigma_ii g^2 / 2`` and diffusion scale ``g``."""
    f = np.asarray(model.f(x), dtype=float)
    g = np.asarray(model.g(x), dtype=float)
    return f - model.sigma.diag * g * g / 2.0, g


def step_log_euler(model, state, dt: float, z) -> np.ndarray:
    """One log-Euler step from densities ``state`` with standard normal draws ``z``."""
    x = np.asarray(state, dtype=float)
    if np.any(x < 0):
        raise ParameterError("state must be nonnegative")
    L = noise_factor(model.sigma)
    dE = math.sqrt(dt) * (L @ np.asarray(z, dtype=float))
    drift, g = _integrand(model, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(x) + drift * dt + g * dE
        out = np.where(x > 0, np.exp(logx), 0.0)
    if np.any(~np.isfinite(drift[x > 0])) or np.any(~np.isfinite(out)):
        raise NonFinite("drift or diffusion is not finite", state=x)
    return out


@dataclass
class Trajectory:
    """Stored grid points plus running post-burn-in sums.

    ``log_states`` holds log densities (-inf for absent species);
    ``batch_sums[b, 0]`` and ``batch_sums[b, 1]`` are sums of densities and of
    the log drift over the steps of batch ``b``, and ``batch_counts[b]`` the
    number of steps in it.
    """

    times: np.ndarray
    log_states: np.ndarray
    batch_sums: np.ndarray
    batch_counts: np.ndarray
    seed: int
    trial: int
    config: SimConfig
    model: object = field(repr=False, default=None)

    @property
    def states(self) -> np.ndarray:
        return np.exp(self.log_states)

    @property
    def n(self) -> int:
        return self.log_states.shape[1]

    @property
    def terminal(self) -> np.ndarray:
        return np.exp(self.log_states[-1])

    def to_csv(self, path_or_file, precision: int = 17) -> None:
        rows = np.column_stack([self.times, self.states])
        header = ",".join(["t"] + [f"x{i}" for i in range(1, self.n + 1)])
        np.savetxt(path_or_file, rows, delimiter=",", header=header, comments="", fmt=f"%.{precision}g")


def _grid(cfg: SimConfig):
    N = cfg.n_steps
    stride = int(cfg.stride)
    idx = np.arange(0, N, stride)
    if idx.size == 0 or idx[-1] != N:
        idx = np.append(idx, N)
    return N, idx


def _batch_counts(acc_len: int, nb: int) -> np.ndarray:
    starts = np.array([-(-b * acc_len // nb) for b in range(nb + 1)])
    return np.diff(starts)


def _check_inputs(model, y0, cfg):
    logx = _log(y0)
    if logx.shape != (model.n,):
        raise ParameterError(f"y0 must have length {model.n}")
    if model.n > 64 and isinstance(model, LVModel):
        raise ParameterError("at most 64 species are supported")
    if cfg.burn_steps >= cfg.n_steps:
        raise ParameterError("trajectory is not longer than the burn-in")
    return logx


def _simulate_lv(model: LVModel, y0, cfg: SimConfig, trial: int, kernel) -> Trajectory:
    logx = _check_inputs(model, y0, cfg)
    N, idx = _grid(cfg)
    n, nb = model.n, int(cfg.n_batches)
    store = np.empty((idx.size, n))
    acc_start = cfg.burn_steps
    acc_len = N - acc_start
    acc = np.zeros((nb, 2, n))
    m = np.ascontiguousarray(model.m)
    A = np.ascontiguousarray(model.A)
    half_var = np.ascontiguousarray(model.sigma.diag / 2.0)
    Ls = math.sqrt(cfg.dt) * noise_factor(model.sigma)
    rng = trial_rng(cfg.seed, trial)
    pos = 0
    k = 0
    while k < N:
        steps = min(CHUNK, N - k)
        dE = noise_increments(rng, Ls, steps)
        done, pos = kernel.advance(logx, m, A, half_var, dE, cfg.dt, k, int(cfg.stride), store, pos,
                                   acc_start, acc_len, acc)
        if done < steps:
            t = (k + done) * cfg.dt
            raise NonFinite(f"state became non-finite at t={t:g}", time=t, state=np.exp(logx))
        k += steps
    if pos < idx.size:
        store[pos] = logx
        pos += 1
    assert pos == idx.size
    return Trajectory(idx * cfg.dt, store, acc, _batch_counts(acc_len, nb), int(cfg.seed), trial, cfg, model)


def _simulate_batch(model, y0, cfg: SimConfig, trials) -> list:
    """Vectorized stepping of independent trials for arbitrary drift.

    ``y0`` is one start shared by all trials or one row per trial; repeated
    trial indices share a noise stream.
    """
    trials = list(trials)
    T = len(trials)
    y0 = np.asarray(y0, dtype=float)
    rows = y0 if y0.ndim == 2 else np.tile(y0, (T, 1))
    if rows.shape[0] != T:
        raise ParameterError("need one initial state per trial")
    logx = np.array([_check_inputs(model, r, cfg) for r in rows]).reshape(T, model.n)
    n, nb = model.n, int(cfg.n_batches)
    N, idx = _grid(cfg)
    stride = int(cfg.stride)
    store = np.empty((T, idx.size, n))
    acc_start = cfg.burn_steps
    acc_len = N - acc_start
    acc = np.zeros((T, nb, 2, n))
    Ls = math.sqrt(cfg.dt) * noise_factor(model.sigma)
    half_var = model.sigma.diag / 2.0
    rngs = [trial_rng(cfg.seed, t) for t in trials]
    dt = cfg.dt
    euler = cfg.scheme == "euler"
    unit_g = getattr(model, "g", None) is _ones_like
    pos = 0
    k = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while k < N:
            steps = min(CHUNK, N - k)
            dE = np.stack([noise_increments(r, Ls, steps) for r in rngs])
            for s in range(steps):
                kk = k + s
                if kk % stride == 0:
                    store[:, pos] = logx
                    pos += 1
                x = np.exp(logx)
                f = np.asarray(model.f(x), dtype=float)
                if unit_g:
                    g = 1.0
                    drift = f - half_var
                else:
                    g = np.asarray(model.g(x), dtype=float)
                    drift = f - half_var * g * g
                if kk >= acc_start:
                    b = ((kk - acc_start) * nb) // acc_len
                    acc[:, b, 0] += x
                    acc[:, b, 1] += drift
                if euler:
                    new = np.log(np.maximum(x * (1.0 + f * dt + g * dE[:, s]), 0.0))
                    new = np.where(x > 0, new, -np.inf)
                else:
                    new = logx + drift * dt + g * dE[:, s]
                # one reduction: NaN or +inf anywhere makes the sum NaN or +inf
                total = new.sum()
                if total != total or total == np.inf:
                    bad = np.isnan(new) | (new == np.inf)
                    r = int(np.argmax(bad.any(axis=1)))
                    t = kk * dt
                    raise NonFinite(f"state became non-finite at t={t:g} (trial {trials[r]})",
                                    time=t, state=x[r])
                logx = new
            k += steps
    if pos < idx.size:
        store[:, pos] = logx
        pos += 1
    counts = _batch_counts(acc_len, nb)
    return [
        Trajectory(idx * cfg.dt, store[r], acc[r], counts, int(cfg.seed), trials[r], cfg, model)
        for r in range(T)
    ]


def simulate(model, y0, cfg: SimConfig, trial: int = 0, backend_name: Optional[str] = None) -> Trajectory:
    """Simulate one path; ``trial`` selects the independent noise stream.

    LV models with the log-Euler scheme use the stepping kernel (compiled
    when available); everything else uses the vectorized numpy stepper.
    """
    if isinstance(model, LVModel) and cfg.scheme == "log_euler":
        return _simulate_lv(model, y0, cfg, trial, backend.get(backend_name))
    return _simulate_batch(model, y0, cfg, [trial])[0]


def simulate_ensemble(model, y0, cfg: SimConfig, trials: int, workers: Optional[int] = None,
                      backend_name: Optional[str] = None) -> list:
    """Trajectories for trials 0..trials-1 in trial order.

    Trial k uses the same noise stream whatever the ensemble size.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if not (isinstance(model, LVModel) and cfg.scheme == "log_euler"):
        return _simulate_batch(model, y0, cfg, range(trials))
    if workers is None or workers <= 1:
        return [simulate(model, y0, cfg, k, backend_name) for k in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda k: simulate(model, y0, cfg, k, backend_name), range(trials)))


@dataclass
class OccupationStats:
    """Post-burn-in time averages of one trajectory.

    ``mean`` and ``empirical_exponents`` cover every post-burn-in step; the
    histograms, near-zero masses and decay slopes use the stored samples.
    """

    mean: np.ndarray
    mean_stderr: np.ndarray
    empirical_exponents: np.ndarray
    exponent_stderr: np.ndarray
    batch_means: np.ndarray
    decay_slopes: dict
    histogram: dict
    near_zero_mass: np.ndarray
    terminal: np.ndarray
    t_start: float
    n_samples: int

    def drift_check(self) -> dict:
        """First-half versus second-half batch means in units of their standard error."""
        nb = self.batch_means.shape[0]
        h = nb // 2
        first = self.batch_means[:h].mean(axis=0)
        second = self.batch_means[nb - h:].mean(axis=0)
        sd = self.batch_means.std(axis=0, ddof=1)
        se = sd * math.sqrt(2.0 / h)
        diff = np.abs(second - first)
        scale = 1e-12 * (1.0 + np.abs(self.batch_means).max(axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(diff <= scale, 0.0, diff / np.where(se > 0, se, np.nan))
        z = np.nan_to_num(z, nan=np.inf)
        return {"mean": z[0], "exponent": z[1]}

    def to_rows(self) -> list:
        rows = [("t_start", self.t_start), ("n_samples", self.n_samples)]
        n = self.mean.shape[0]
        for i in range(n):
            k = i + 1
            rows += [
                (f"mean_x{k}", self.mean[i]),
                (f"mean_se_x{k}", self.mean_stderr[i]),
                (f"exponent_x{k}", self.empirical_exponents[i]),
                (f"exponent_se_x{k}", self.exponent_stderr[i]),
                (f"near_zero_mass_x{k}", self.near_zero_mass[i]),
                (f"terminal_x{k}", self.terminal[i]),
            ]
            if k in self.decay_slopes:
                rows.append((f"decay_slope_x{k}", self.decay_slopes[k]))
        return rows

    def to_dict(self) -> dict:
        return {
            "t_start": self.t_start,
            "n_samples": self.n_samples,
            "mean": self.mean.tolist(),
            "mean_stderr": self.mean_stderr.tolist(),
            "empirical_exponents": self.empirical_exponents.tolist(),
            "exponent_stderr": self.exponent_stderr.tolist(),
            "near_zero_mass": self.near_zero_mass.tolist(),
            "terminal": self.terminal.tolist(),
            "decay_slopes": {str(k): v for k, v in self.decay_slopes.items()},
        }


def write_stats_csv(stats: OccupationStats, path_or_file) -> None:
    import csv

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in stats.to_rows():
            w.writerow([k, repr(float(v)) if not isinstance(v, int) else v])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def occupation_stats(traj: Trajectory, cfg: Optional[SimConfig] = None, bins: int = 50,
                     near_zero: float = 1e-4) -> OccupationStats:
    cfg = cfg or traj.config
    counts = traj.batch_counts.astype(float)
    if np.any(counts <= 0):
        raise ParameterError("too few post-burn-in steps for the requested number of batches")
    bm = traj.batch_sums / counts[:, None, None]
    overall = traj.batch_sums.sum(axis=0) / counts.sum()
    nb = bm.shape[0]
    se = bm.std(axis=0, ddof=1) / math.sqrt(nb)
    t0 = cfg.burn_steps * cfg.dt
    post = traj.times >= t0 - 1e-12 * cfg.dt
    logs = traj.log_states[post]
    tt = traj.times[post]
    xs = np.exp(logs)
    n = traj.n
    terminal = traj.terminal
    slopes = {}
    for i in range(n):
        if terminal[i] < cfg.extinction_threshold:
            ok = np.isfinite(logs[:, i])
            if ok.sum() >= 2:
                slopes[i + 1] = float(np.polyfit(tt[ok], logs[ok, i], 1)[0])
    hist = {}
    for i in range(n):
        top = max(float(xs[:, i].max()), 1e-300) if xs.size else 1.0
        mass, edges = np.histogram(xs[:, i], bins=bins, range=(0.0, top))
        hist[i + 1] = (edges, mass / max(mass.sum(), 1))
    nz = (xs < near_zero).mean(axis=0) if xs.size else np.zeros(n)
    return OccupationStats(
        mean=overall[0], mean_stderr=se[0], empirical_exponents=overall[1], exponent_stderr=se[1],
        batch_means=bm, decay_slopes=slopes, histogram=hist, near_zero_mass=nz,
        terminal=terminal, t_start=t0, n_samples=int(post.sum()),
    )


def _face_start(model, s, y0):
    if y0 is not None:
        y = np.asarray(y0, dtype=float).copy()
    else:
        y = np.ones(model.n)
    mask = np.zeros(model.n, dtype=bool)
    mask[np.array(sorted(s), dtype=int) - 1] = True
    y[~mask] = 0.0
    if np.any(y[mask] <= 0):
        raise ParameterError("supported species need positive initial densities")
    return y


def origin_exponents(model) -> np.ndarray:
    x = np.zeros(model.n)
    drift, _ = _integrand(model, x)
    return drift


def _face_info(s, st: OccupationStats, drift_limit: float):
    chk = st.drift_check()
    worst = max(float(chk["mean"].max()), float(chk["exponent"].max()))
    info = ErgodicMeasureInfo(s, st.mean, st.empirical_exponents, Provenance.MONTE_CARLO, st.exponent_stderr)
    if worst > drift_limit:
        return NonErgodicSuspect(f"batch means on {format_support(s)} drift by {worst:.1f} standard errors", info)
    return info


def _face_cfg(cfg: SimConfig) -> SimConfig:
    return replace(cfg, stride=max(int(cfg.stride), 1000))


def estimate_exponents(model, support, cfg: SimConfig, y0=None, drift_limit: float = 5.0,
                       backend_name: Optional[str] = None) -> ErgodicMeasureInfo:
    """Exponent row of the ergodic measure on ``support`` by simulating that face.

    Off-support species are held at exactly zero, so their time-averaged
    drift is the invasion rate against the face measure. Raises
    NonErgodicSuspect when the first and second halves of the batches
    disagree by more than ``drift_limit`` standard errors. The face run
    uses noise stream 0 of ``cfg.seed``.
    """
    s = subcommunity(support)
    if any(i < 1 or i > model.n for i in s):
        raise ParameterError(f"support {format_support(s)} not contained in 1..{model.n}")
    if not s:
        lam = origin_exponents(model)
        return ErgodicMeasureInfo(s, np.zeros(model.n), lam, Provenance.MONTE_CARLO, np.zeros(model.n))
    traj = simulate(model, _face_start(model, s, y0), _face_cfg(cfg), backend_name=backend_name)
    out = _face_info(s, occupation_stats(traj), drift_limit)
    if isinstance(out, Exception):
        raise out
    return out


def estimate_faces(model, supports, cfg: SimConfig, y0=None, drift_limit: float = 5.0,
                   backend_name: Optional[str] = None) -> dict:
    """``estimate_exponents`` for several faces, stepping general models together.

    Values are ErgodicMeasureInfo or the exception that face raised. Each
    face gets the same result as a separate ``estimate_exponents`` call.
    """
    supports = [subcommunity(s) for s in supports]
    out = {}
    batchable = not isinstance(model, LVModel) or cfg.scheme != "log_euler"
    nonempty = [s for s in supports if s]
    if batchable and len(nonempty) > 1:
        starts = np.array([_face_start(model, s, y0) for s in nonempty])
        try:
            trajs = _simulate_batch(model, starts, _face_cfg(cfg), [0] * len(nonempty))
        except NonFinite:
            trajs = None
        if trajs is not None:
            for s, t in zip(nonempty, trajs):
                out[s] = _face_info(s, occupation_stats(t), drift_limit)
    for s in supports:
        if s not in out:
            try:
                out[s] = estimate_exponents(model, s, cfg, y0, drift_limit, backend_name)
            except (NonErgodicSuspect, NonFinite) as exc:
                out[s] = exc
    return out


def build_table_mc(model, cfg: SimConfig, tol: Tolerances = Tolerances(), y0=None,
                   backend_name: Optional[str] = None) -> ExponentTable:
    """Exponent table with face measures estimated by simulation.

    An exponent counts as zero when it lies within max(tol_zero, 3 SE). All
    faces of one dimension are simulated up front (together, for general
    drift); only those the existence recursion asks for are used.
    """
    if model.n > 3:
        raise ParameterError("the measure tree is only defined for n <= 3")

    cache = {}
    batch = not isinstance(model, LVModel) or cfg.scheme != "log_euler"

    def measure_for(s):
        if s not in cache:
            level = [s]
            if batch and s:
                level = [frozenset(c) for c in combinations(range(1, model.n + 1), len(s))]
            cache.update(estimate_faces(model, level, cfg, y0, backend_name=backend_name))
        r = cache[s]
        if isinstance(r, Exception):
            raise r
        return r

    def band(row, j):
        se = 0.0 if row.stderr is None else float(row.stderr[j - 1])
        return max(tol.tol_zero, 3.0 * se)

    return build_table(model.n, measure_for, band)

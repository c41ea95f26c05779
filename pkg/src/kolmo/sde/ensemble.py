"""Survivor-pattern frequencies and empirical checks of a classification."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import ClassificationOutcome, OutcomeKind, ParameterError, support_label
from ..classifier import attractor_probability_contract
from .engine import SimConfig, occupation_stats, simulate_ensemble

UNRESOLVED = "unresolved"


def survivor_pattern(traj, stats, threshold: float, slope_tol: float = 0.01):
    """Set of surviving species, or None when some species is ambiguous.

    A species is alive when its terminal density is at least ``threshold``
    and extinct when it is below ``threshold`` and still decaying (log-slope
    below ``-slope_tol``) or was absent from the start.
    """
    alive = set()
    for i in range(traj.n):
        x = stats.terminal[i]
        if x >= threshold:
            alive.add(i + 1)
        elif np.isneginf(traj.log_states[0, i]):
            continue
        elif stats.decay_slopes.get(i + 1, 0.0) < -slope_tol:
            continue
        else:
            return None
    return frozenset(alive)


@dataclass
class OutcomeFrequencies:
    counts: dict
    unresolved: int
    trials: int
    patterns: list = field(default_factory=list)

    @property
    def resolved(self) -> int:
        return self.trials - self.unresolved

    @property
    def frequencies(self) -> dict:
        """Frequency of each pattern among resolved trials (sums to 1)."""
        r = self.resolved
        return {s: c / r for s, c in self.counts.items()} if r else {}

    @property
    def unresolved_fraction(self) -> float:
        return self.unresolved / self.trials

    def to_dict(self) -> dict:
        key = lambda s: (len(s), sorted(s))  # noqa: E731
        return {
            "trials": self.trials,
            "unresolved": self.unresolved,
            "frequencies": {
                support_label(s): f for s, f in sorted(self.frequencies.items(), key=lambda kv: key(kv[0]))
            },
        }


def _frequencies_from(trajs, stats, threshold, slope_tol) -> OutcomeFrequencies:
    patterns = [survivor_pattern(t, s, threshold, slope_tol) for t, s in zip(trajs, stats)]
    counts = Counter(p for p in patterns if p is not None)
    return OutcomeFrequencies(dict(counts), sum(p is None for p in patterns), len(patterns), patterns)


def estimate_outcome_frequencies(model, y0, trials: int, cfg: SimConfig, slope_tol: float = 0.01,
                                 workers: Optional[int] = None) -> OutcomeFrequencies:
    trajs = simulate_ensemble(model, y0, cfg, trials, workers=workers)
    stats = [occupation_stats(t) for t in trajs]
    return _frequencies_from(trajs, stats, cfg.extinction_threshold, slope_tol)


def distance_to_axes(x) -> np.ndarray:
    """Euclidean distance from each row of ``x`` to the nearest coordinate axis."""
    x = np.asarray(x, dtype=float)
    sq = np.sum(x * x, axis=-1, keepdims=True)
    return np.sqrt(np.maximum(np.min(sq - x * x, axis=-1), 0.0))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class VerificationReport:
    outcome: ClassificationOutcome
    checks: list
    frequencies: OutcomeFrequencies
    trials: int
    metrics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.kind.value,
            "summary": self.outcome.summary(),
            "passed": self.ok,
            "checks": [c.to_dict() for c in self.checks],
            "survivor_patterns": self.frequencies.to_dict(),
            "metrics": self.metrics,
        }


def verify_classification(model, outcome: ClassificationOutcome, cfg: SimConfig, trials: int, y0=None,
                          slope_tol: float = 0.01, min_mean: Optional[float] = None,
                          near_zero: float = 1e-4, max_near_zero_mass: float = 0.01,
                          min_frequency: float = 0.0, max_unresolved: float = 0.02,
                          min_decayed_fraction: float = 0.96, axis_radius: float = 0.05,
                          min_axis_mass: float = 0.9, workers: Optional[int] = None) -> VerificationReport:
    """Simulate an ensemble and test it against what ``outcome`` predicts.

    Persistence: every species' time-average density exceeds ``min_mean``
    (default: the extinction threshold) in every trial and the fraction of
    samples with some density below ``near_zero`` is at most
    ``max_near_zero_mass``. AttractorSet: survivor patterns obey the
    probability contract. RPSBoundaryAttraction: the minimum terminal density
    is below the extinction threshold in at least ``min_decayed_fraction`` of
    trials and at least ``min_axis_mass`` of post-burn-in samples lie within
    ``axis_radius`` of a coordinate axis (a heuristic threshold).
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    n = model.n
    y0 = np.full(n, 0.5) if y0 is None else np.asarray(y0, dtype=float)
    thr = cfg.extinction_threshold
    trajs = simulate_ensemble(model, y0, cfg, trials, workers=workers)
    stats = [occupation_stats(t, near_zero=near_zero) for t in trajs]
    freqs = _frequencies_from(trajs, stats, thr, slope_tol)
    checks, metrics = [], {}
    kind = outcome.kind

    if kind is OutcomeKind.PERSISTENCE:
        floor = thr if min_mean is None else min_mean
        means = np.array([s.mean for s in stats])
        low = float(means.min())
        metrics["min_time_average"] = low
        checks.append(Check("time averages", low > floor,
                            f"smallest time-average density {low:.4g} (need > {floor:g})"))
        t0 = cfg.burn_steps * cfg.dt
        xs = np.concatenate([t.states[t.times >= t0 - 1e-12] for t in trajs])
        mass = float(np.mean(xs.min(axis=1) < near_zero))
        metrics["near_zero_mass"] = mass
        checks.append(Check("min-species mass near zero", mass < max_near_zero_mass,
                            f"{mass:.2%} of samples have a density below {near_zero:g} "
                            f"(need < {max_near_zero_mass:.0%})"))
    elif kind is OutcomeKind.ATTRACTOR_SET:
        contract = attractor_probability_contract(outcome)
        fails = contract.check(freqs.frequencies, min_frequency=min_frequency)
        metrics["contract"] = contract.statements()
        checks.append(Check("probability contract", not fails and freqs.resolved > 0,
                            "; ".join(fails) if fails else "; ".join(contract.statements())))
        uf = freqs.unresolved_fraction
        checks.append(Check("unresolved trials", uf <= max_unresolved,
                            f"{freqs.unresolved}/{trials} unresolved (allowed {max_unresolved:.0%})"))
    elif kind is OutcomeKind.RPS_BOUNDARY_ATTRACTION:
        decayed = sum(float(s.terminal.min()) < thr for s in stats)
        need = int(np.ceil(min_decayed_fraction * trials))
        metrics["decayed_trials"] = decayed
        checks.append(Check("min density decayed", decayed >= need,
                            f"min density decayed in {decayed}/{trials} (need {need})"))
        t0 = cfg.burn_steps * cfg.dt
        xs = np.concatenate([t.states[t.times >= t0 - 1e-12] for t in trajs])
        mass = float(np.mean(distance_to_axes(xs) < axis_radius))
        metrics["near_axis_mass"] = mass
        checks.append(Check("near-axis occupation (heuristic)", mass >= min_axis_mass,
                            f"{mass:.1%} of samples within {axis_radius:g} of an axis "
                            f"(need >= {min_axis_mass:.0%})"))
    elif kind is OutcomeKind.ALL_EXTINCT:
        dead = sum(bool(np.all(s.terminal < thr)) for s in stats)
        checks.append(Check("all species extinct", dead == trials, f"all extinct in {dead}/{trials}"))
    # Degenerate outcomes predict nothing; the report carries no checks and is not ok.
    return VerificationReport(outcome, checks, freqs, trials, metrics)

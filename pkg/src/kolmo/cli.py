"""Command-line interface: classify, exponents, simulate, verify, sweep.

Exit codes: 0 definitive result or passed verification, 1 input error,
2 degenerate outcome, 3 verification mismatch.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import click
import numpy as np

from . import __version__, zoo
from .classifier import classify
from .core import (
    ClassificationOutcome,
    KolmoError,
    LVModel,
    NonErgodicSuspect,
    NonFinite,
    NonpositiveMean,
    OutcomeKind,
    SingularSystem,
    Tolerances,
    complement,
    format_support,
    parse_support,
    support_label,
    validate_lv,
)
from .lv_analysis import ExponentTable, build_measure_tree, lv_measure
from .modelfile import LoadedModel, ModelFileError, load_model, model_from_dict
from .sde.engine import (
    SimConfig,
    build_table_mc,
    estimate_exponents,
    occupation_stats,
    simulate,
    write_stats_csv,
)
from .sde.ensemble import verify_classification

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_MISMATCH = 0, 1, 2, 3

# Monte Carlo face simulations for models without closed-form exponents.
MC_T_FINAL, MC_DT = 2000.0, 1e-2


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def default_seed() -> int:
    raw = os.environ.get("KOLMO_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        v = int(raw, 0)
    except ValueError:
        raise InputError(f"KOLMO_SEED must be an integer, got {raw!r}") from None
    if not 0 <= v < 2**64:
        raise InputError("KOLMO_SEED must be a 64-bit unsigned integer")
    return v


def _load(path) -> LoadedModel:
    try:
        return load_model(path)
    except ModelFileError as exc:
        raise InputError(str(exc)) from None


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InputError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def _cfg(**kw) -> SimConfig:
    try:
        return SimConfig(**kw)
    except KolmoError as exc:
        raise InputError(str(exc)) from None


def _manifest_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".manifest.json"


def write_manifest(out: str, command: list, sha: str, config: dict, seed: Optional[int]) -> str:
    path = _manifest_path(out)
    record = {
        "command": command,
        "model_sha256": sha,
        "config": config,
        "seed": seed,
        "version": __version__,
    }
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _command_line() -> list:
    return ["kolmo"] + sys.argv[1:]


# ----------------------------------------------------------------------------
# analysis shared by classify, verify and sweep


@dataclass
class Analysis:
    table: Optional[ExponentTable]
    outcome: ClassificationOutcome
    method: str
    warnings: tuple = ()


def _degenerate_from_error(exc: Exception, method: str, table=None) -> Analysis:
    out = ClassificationOutcome(OutcomeKind.DEGENERATE, case="unsolvable", evidence={"error": str(exc)})
    return Analysis(table, out, method)


def analyze(loaded_model, spec: Optional[dict], tol: Tolerances, method: str = "auto",
            mc_cfg: Optional[SimConfig] = None) -> Analysis:
    model = loaded_model
    if model.n > 3:
        raise InputError("classification is defined for at most 3 species")
    warnings = ()
    if isinstance(model, LVModel):
        warnings = validate_lv(model).violations
    analytic = None
    if method in ("auto", "analytic"):
        if isinstance(model, LVModel):
            try:
                analytic = build_measure_tree(model, tol)
            except (SingularSystem, NonpositiveMean) as exc:
                a = _degenerate_from_error(exc, "analytic")
                a.warnings = warnings
                return a
        elif spec is not None and spec.get("type") == "builtin":
            try:
                analytic = zoo.builtin_table(spec["name"], spec.get("params"), tol)
            except KolmoError as exc:
                raise InputError(str(exc)) from None
        if analytic is None and method == "analytic":
            raise InputError("analytic exponents need a Lotka-Volterra model; use --method mc")
    if analytic is not None:
        return Analysis(analytic, classify(analytic, tol), "analytic", warnings)
    cfg = mc_cfg or SimConfig(t_final=MC_T_FINAL, dt=MC_DT, seed=default_seed(), stride=1000)
    try:
        table = build_table_mc(model, cfg, tol)
    except (NonErgodicSuspect, NonFinite) as exc:
        return _degenerate_from_error(exc, "mc")
    return Analysis(table, classify(table, tol), "mc", warnings)


def table_to_rows(table: ExponentTable) -> list:
    rows = []
    for s in table.supports():
        r = table.rows[s]
        rec = {
            "support": sorted(s),
            "label": support_label(s),
            "mean": r.mean.tolist(),
            "exponents": r.exponents.tolist(),
            "provenance": r.provenance.value,
        }
        if r.stderr is not None:
            rec["stderr"] = r.stderr.tolist()
        rows.append(rec)
    return rows


def outcome_to_dict(a: Analysis) -> dict:
    o = a.outcome
    d = {
        "outcome": o.kind.value,
        "summary": o.summary(),
        "case": o.case,
        "criterion": o.criterion,
        "attractors": [sorted(s) for s in o.supports] if o.kind is OutcomeKind.ATTRACTOR_SET else [],
        "degeneracy_flags": [{"support": sorted(s), "species": k} for s, k in o.flags],
        "method": a.method,
        "warnings": list(a.warnings),
    }
    if a.table is not None:
        d["table"] = table_to_rows(a.table)
        d["halted"] = [sorted(s) for s in sorted(a.table.halted, key=lambda s: (len(s), sorted(s)))]
    if "error" in o.evidence:
        d["error"] = o.evidence["error"]
    return d


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def _print_analysis(a: Analysis) -> None:
    d = outcome_to_dict(a)
    click.echo(d["summary"])
    click.echo(f"case: {d['case'] or '-'}    method: {d['method']}")
    for w in d["warnings"]:
        click.echo(f"warning: {w}")
    if "error" in d:
        click.echo(f"error: {d['error']}")
    if a.table is not None:
        click.echo(f"{'measure':<8} {'support':<9} {'mean':<32} exponents")
        for r in d["table"]:
            line = f"{r['label']:<8} {format_support(r['support']):<9} {_fmt_vec(r['mean']):<32} {_fmt_vec(r['exponents'])}"
            if "stderr" in r:
                line += f"  se {_fmt_vec(r['stderr'])}"
            click.echo(line)
        if d["halted"]:
            click.echo("halted faces: " + ", ".join(format_support(s) for s in d["halted"]))
    if d["degeneracy_flags"]:
        click.echo("degenerate exponents: " + ", ".join(
            f"lambda_{f['species']}({support_label(f['support'])})" for f in d["degeneracy_flags"]))


def _exit_for(outcome: ClassificationOutcome) -> int:
    return EXIT_DEGENERATE if outcome.kind is OutcomeKind.DEGENERATE else EXIT_OK


# ----------------------------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="kolmo")
def cli():
    """Long-run classification of 3-species stochastic Kolmogorov models."""


_seed_opt = click.option("--seed", type=int, default=None, help="Noise seed (default: $KOLMO_SEED or 0).")


def _seed(seed):
    return default_seed() if seed is None else seed


@cli.command("classify")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Zero band for exponents.")
@click.option("--method", type=click.Choice(["auto", "analytic", "mc"]), default="auto", show_default=True)
@click.option("--t-final", type=float, default=MC_T_FINAL, show_default=True, help="Horizon for Monte Carlo faces.")
@click.option("--dt", type=float, default=MC_DT, show_default=True, help="Step for Monte Carlo faces.")
@_seed_opt
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
def classify_cmd(model_file, tol, method, t_final, dt, seed, as_json):
    """Classify the long-run behaviour of a model."""
    lm = _load(model_file)
    tols = _tol(tol)
    a = analyze(lm.model, lm.spec, tols, method,
                _cfg(t_final=t_final, dt=dt, seed=_seed(seed), stride=1000))
    if as_json:
        click.echo(json.dumps(outcome_to_dict(a), indent=2))
    else:
        _print_analysis(a)
    sys.exit(_exit_for(a.outcome))


def _tol(tol):
    try:
        return Tolerances(tol_zero=tol)
    except KolmoError as exc:
        raise InputError(str(exc)) from None


@cli.command("exponents")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--support", "support_text", default="", help="Species of the face measure, e.g. 1,3 (empty: origin).")
@click.option("--method", type=click.Choice(["analytic", "mc"]), default="analytic", show_default=True)
@click.option("--t-final", type=float, default=2e4, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@_seed_opt
@click.option("--allow-full", is_flag=True, help="Report the all-zero row for the full support.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the row as CSV.")
@click.option("--json", "as_json", is_flag=True)
def exponents_cmd(model_file, support_text, method, t_final, dt, seed, allow_full, out, as_json):
    """External Lyapunov exponents of one boundary measure."""
    lm = _load(model_file)
    model = lm.model
    try:
        s = parse_support(support_text)
        complement(s, model.n)
    except (ValueError, KolmoError):
        raise InputError(f"--support must list species in 1..{model.n}, got {support_text!r}") from None
    seed = _seed(seed)
    cfg = None
    if len(s) == model.n:
        if not allow_full:
            raise InputError("exponents are defined for boundary supports only (use --allow-full for the zero row)")
        mean = np.full(model.n, np.nan)
        if isinstance(model, LVModel):
            try:
                mean = lv_measure(model, s).mean
            except (SingularSystem, NonpositiveMean):
                pass
        row = {"mean": mean, "exponents": np.zeros(model.n), "stderr": None, "provenance": "analytic"}
    elif method == "analytic":
        row = _analytic_row(lm, s)
    else:
        cfg = _cfg(t_final=t_final, dt=dt, seed=seed, stride=1000)
        try:
            info = estimate_exponents(model, s, cfg)
        except NonErgodicSuspect as exc:
            click.echo(f"warning: {exc}", err=True)
            info = exc.info
        except NonFinite as exc:
            raise InputError(f"{exc} (time {exc.time:g})") from None
        row = {"mean": info.mean, "exponents": info.exponents, "stderr": info.stderr, "provenance": "monte_carlo"}
    rec = {
        "support": sorted(s),
        "label": support_label(s),
        "mean": np.asarray(row["mean"]).tolist(),
        "exponents": np.asarray(row["exponents"]).tolist(),
        "stderr": None if row["stderr"] is None else np.asarray(row["stderr"]).tolist(),
        "provenance": row["provenance"],
    }
    if out:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["support", "species", "mean", "exponent", "stderr"])
            for i in range(model.n):
                se = "" if rec["stderr"] is None else repr(rec["stderr"][i])
                w.writerow([support_label(s), i + 1, repr(rec["mean"][i]), repr(rec["exponents"][i]), se])
        write_manifest(out, _command_line(), lm.sha256,
                       {"support": sorted(s), "method": method, **(cfg.to_dict() if cfg else {}), "outputs": [out]},
                       seed if cfg else None)
    if as_json:
        click.echo(json.dumps(rec, indent=2))
    else:
        click.echo(f"{rec['label']} ({rec['provenance']})")
        click.echo("mean:      " + _fmt_vec(rec["mean"]))
        click.echo("exponents: " + _fmt_vec(rec["exponents"]))
        if rec["stderr"] is not None:
            click.echo("stderr:    " + _fmt_vec(rec["stderr"]))


def _analytic_row(lm: LoadedModel, s) -> dict:
    model = lm.model
    if isinstance(model, LVModel):
        try:
            info = lv_measure(model, s)
        except (SingularSystem, NonpositiveMean) as exc:
            raise InputError(f"no ergodic measure on {format_support(s)}: {exc}") from None
        return {"mean": info.mean, "exponents": info.exponents, "stderr": None, "provenance": "analytic"}
    table = None
    if lm.builtin_name:
        try:
            table = zoo.builtin_table(lm.builtin_name, lm.spec.get("params"))
        except KolmoError as exc:
            raise InputError(str(exc)) from None
    if table is None:
        raise InputError("analytic exponents need a Lotka-Volterra model; use --method mc")
    if s not in table:
        raise InputError(f"no ergodic measure on {format_support(s)} for this model")
    info = table[s]
    return {"mean": info.mean, "exponents": info.exponents, "stderr": None, "provenance": "analytic"}


@cli.command("simulate")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--y0", "y0_text", required=True, help="Initial densities, e.g. 0.5,0.5,0.5.")
@click.option("--t-final", type=float, required=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@_seed_opt
@click.option("--stride", type=int, default=1, show_default=True, help="Store every stride-th step.")
@click.option("--burn-in", type=float, default=0.2, show_default=True)
@click.option("--scheme", type=click.Choice(["log_euler", "euler"]), default="log_euler", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Trajectory CSV (default: stdout).")
@click.option("--stats", "stats_out", type=click.Path(dir_okay=False), default=None, help="Occupation statistics CSV.")
@click.option("--json", "as_json", is_flag=True, help="Print occupation statistics as JSON.")
def simulate_cmd(model_file, y0_text, t_final, dt, seed, stride, burn_in, scheme, out, stats_out, as_json):
    """Simulate one trajectory and write t,x1..xn as CSV."""
    lm = _load(model_file)
    y0 = _floats(y0_text, "--y0")
    if y0.shape != (lm.model.n,):
        raise InputError(f"--y0 must have {lm.model.n} entries, got {y0.size}")
    seed = _seed(seed)
    cfg = _cfg(t_final=t_final, dt=dt, seed=seed, stride=stride, burn_in=burn_in, scheme=scheme)
    try:
        traj = simulate(lm.model, y0, cfg)
    except NonFinite as exc:
        raise InputError(f"{exc}") from None
    except KolmoError as exc:
        raise InputError(str(exc)) from None
    outputs = []
    if out:
        traj.to_csv(out)
        outputs.append(out)
    elif not as_json:
        buf = io.StringIO()
        traj.to_csv(buf)
        click.echo(buf.getvalue(), nl=False)
    stats = occupation_stats(traj)
    if stats_out:
        write_stats_csv(stats, stats_out)
        outputs.append(stats_out)
    config = {**cfg.to_dict(), "y0": y0.tolist(), "outputs": outputs}
    for path in outputs:
        write_manifest(path, _command_line(), lm.sha256, config, seed)
    if as_json:
        click.echo(json.dumps({"points": int(traj.times.size), "stats": stats.to_dict(), "outputs": outputs}, indent=2))
    elif out:
        click.echo(f"wrote {traj.times.size} points to {out}")


@cli.command("verify")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--t-final", type=float, default=200.0, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@_seed_opt
@click.option("--y0", "y0_text", default=None, help="Initial densities (default 0.5 each).")
@click.option("--stride", type=int, default=100, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--min-mean", type=float, default=None, help="Persistence: time-average floor (default extinction threshold).")
@click.option("--min-frequency", type=float, default=0.0, show_default=True,
              help="Attractor set: frequency each declared pattern must exceed.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Per-trial CSV.")
@click.option("--json", "as_json", is_flag=True)
def verify_cmd(model_file, trials, t_final, dt, seed, y0_text, stride, tol, min_mean, min_frequency,
               workers, out, as_json):
    """Check the classification against a simulated ensemble."""
    lm = _load(model_file)
    model = lm.model
    seed = _seed(seed)
    cfg = _cfg(t_final=t_final, dt=dt, seed=seed, stride=stride)
    y0 = None if y0_text is None else _floats(y0_text, "--y0")
    if y0 is not None and y0.shape != (model.n,):
        raise InputError(f"--y0 must have {model.n} entries")
    if trials < 1:
        raise InputError("--trials must be at least 1")
    a = analyze(model, lm.spec, _tol(tol), "auto", _cfg(t_final=MC_T_FINAL, dt=MC_DT, seed=seed, stride=1000))
    if a.outcome.kind is OutcomeKind.DEGENERATE:
        if as_json:
            click.echo(json.dumps({"outcome": outcome_to_dict(a), "passed": None, "checks": []}, indent=2))
        else:
            click.echo(f"{a.outcome.summary()}: nothing to verify")
        sys.exit(EXIT_DEGENERATE)
    try:
        rep = verify_classification(model, a.outcome, cfg, trials, y0=y0, min_mean=min_mean,
                                    min_frequency=min_frequency, workers=workers)
    except NonFinite as exc:
        raise InputError(f"{exc}") from None
    d = rep.to_dict()
    d["outcome"] = outcome_to_dict(a)
    if out:
        _write_trials_csv(out, rep)
        write_manifest(out, _command_line(), lm.sha256,
                       {**cfg.to_dict(), "trials": trials, "y0": None if y0 is None else y0.tolist(),
                        "outputs": [out]}, seed)
    if as_json:
        click.echo(json.dumps(d, indent=2))
    else:
        click.echo(f"analytic outcome: {a.outcome.summary()}")
        freq = rep.frequencies.to_dict()
        pats = ", ".join(f"{k}: {v:.3f}" for k, v in freq["frequencies"].items()) or "-"
        click.echo(f"survivor patterns over {trials} trials: {pats} (unresolved {freq['unresolved']})")
        for c in rep.checks:
            click.echo(f"{c.name}: {'PASS' if c.passed else 'FAIL'} ({c.detail})")
        click.echo("verification: " + ("PASS" if rep.ok else "FAIL"))
    sys.exit(EXIT_OK if rep.ok else EXIT_MISMATCH)


def _write_trials_csv(path, rep):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "pattern"])
        for k, p in enumerate(rep.frequencies.patterns):
            w.writerow([k, "unresolved" if p is None else support_label(p)])


# ----------------------------------------------------------------------------
# sweep


def parse_range(text: str) -> list:
    """``a:b:h`` (inclusive, step h) or a comma list of values."""
    try:
        if ":" in text:
            a, b, h = (float(t) for t in text.split(":"))
            if not h > 0 or b < a:
                raise ValueError
            k = int(math.floor((b - a) / h + 1e-9))
            return [round(a + i * h, 12) for i in range(k + 1)]
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"bad parameter range {text!r}; use start:stop:step or v1,v2,...") from None


_LV_KEY = {"m": 1, "a": 2, "sigma": 2}


def _apply_param(spec: dict, name: str, value: float, n: Optional[int]) -> None:
    kind = spec.get("type")
    if kind == "builtin":
        spec.setdefault("params", {})[name] = value
        return
    if kind == "lotka_volterra":
        if name == "sigma":
            spec["sigma"] = value
            return
        for key, nd in _LV_KEY.items():
            if name.startswith(key) and name[len(key):].isdigit() and len(name) - len(key) == nd:
                idx = [int(c) - 1 for c in name[len(key):]]
                if any(not 0 <= i < n for i in idx):
                    break
                field = {"m": "m", "a": "A", "sigma": "sigma"}[key]
                if field == "sigma" and np.ndim(spec["sigma"]) < 2:
                    spec["sigma"] = np.diag(np.broadcast_to(np.asarray(spec["sigma"], float), (n,))).tolist()
                arr = np.array(spec[field], dtype=float)
                arr[tuple(idx)] = value
                spec[field] = arr.tolist()
                return
    raise InputError(f"unknown parameter {name!r} for this template")


_BUILTIN_PARAMS = {
    "rps": ("alpha", "beta", "sigma"),
    "switching": ("r", "beta", "d", "c", "eps"),
    "figure1": ("noise", "c"),
    "logistic": ("m", "a", "sigma"),
}


def _sweep_point(spec, names, values, tol):
    s = json.loads(json.dumps(spec))
    n = len(s["m"]) if s.get("type") == "lotka_volterra" else None
    for k, v in zip(names, values):
        _apply_param(s, k, v, n)
    row = {k: v for k, v in zip(names, values)}
    try:
        model = model_from_dict(s)
        a = analyze(model, s, tol, "analytic")
    except (ModelFileError, InputError, KolmoError) as exc:
        msg = exc.format_message() if isinstance(exc, click.ClickException) else str(exc)
        row.update(outcome="Invalid", case="", criterion="", attractors="", error=msg)
        return row
    o = a.outcome
    row.update(
        outcome=o.kind.value,
        case=o.case,
        criterion="" if o.criterion is None else repr(float(o.criterion)),
        attractors=" ".join(support_label(x) for x in o.supports) if o.kind is OutcomeKind.ATTRACTOR_SET else "",
        error=o.evidence.get("error", ""),
    )
    if s.get("type") == "builtin" and s.get("name") == "switching":
        try:
            row["ode_permanence"] = zoo.switching_ode_permanence(zoo.SwitchParams(**s.get("params", {}))).value
        except KolmoError:
            row["ode_permanence"] = ""
    return row


@cli.command("sweep")
@click.argument("template", type=click.Path(dir_okay=False))
@click.option("--param", "params", multiple=True, required=True,
              help="name=start:stop:step or name=v1,v2 (repeatable).")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Grid CSV (default: stdout).")
@click.option("--json", "as_json", is_flag=True)
def sweep_cmd(template, params, tol, workers, out, as_json):
    """Classify every point of a parameter grid."""
    lm = _load(template)
    spec = lm.spec
    names, axes = [], []
    for p in params:
        if "=" not in p:
            raise InputError(f"--param must look like name=start:stop:step, got {p!r}")
        name, rng = p.split("=", 1)
        name = name.strip()
        if spec.get("type") == "builtin":
            allowed = _BUILTIN_PARAMS.get(spec.get("name"), ())
            if name not in allowed:
                raise InputError(f"unknown parameter {name!r}; {spec.get('name')} takes {', '.join(allowed)}")
        elif spec.get("type") != "lotka_volterra":
            raise InputError("sweeps need a builtin or lotka_volterra template")
        if name in names:
            raise InputError(f"parameter {name!r} given twice")
        names.append(name)
        axes.append(parse_range(rng))
    if spec.get("type") == "lotka_volterra":
        _apply_param(json.loads(json.dumps(spec)), names[0], axes[0][0], len(spec["m"]))
    tols = _tol(tol)
    grid = list(itertools.product(*axes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _sweep_point(spec, names, v, tols), grid))
    else:
        rows = [_sweep_point(spec, names, v, tols) for v in grid]
    cols = names + ["outcome", "case", "criterion", "attractors", "error"]
    if any("ode_permanence" in r for r in rows):
        cols.append("ode_permanence")
    if as_json:
        click.echo(json.dumps({"columns": cols, "rows": rows}, indent=2))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in cols})
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
        write_manifest(out, _command_line(), lm.sha256,
                       {"params": dict(zip(names, map(str, params))), "tol": tol, "outputs": [out]}, None)
        if not as_json:
            click.echo(f"wrote {len(rows)} grid points to {out}")
    elif not as_json:
        click.echo(buf.getvalue(), nl=False)


def main(argv=None) -> int:
    """Entry point; maps every usage or input problem to exit code 1."""
    try:
        cli.main(args=argv, prog_name="kolmo", standalone_mode=False)
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INPUT
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except KolmoError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

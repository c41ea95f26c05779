"""JSON model files.

Three shapes are accepted::

    {"type": "lotka_volterra", "m": [...], "A": [[...]], "sigma": ...}
    {"type": "builtin", "name": "rps", "params": {...}}
    {"type": "custom_expression", "f": ["1 - x1 - 2*x2", ...], "sigma": ...}

``sigma`` is a scalar variance, a vector of variances or a full matrix.
Custom expressions use numbers, variables x1..xn, + - * / and parentheses.
A custom drift that is affine in x becomes a Lotka-Volterra model so the
analytic machinery applies to it.
"""
from __future__ import annotations

import ast
import hashlib
import json
import operator
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import KolmoError, KolmogorovModel, LVModel, NoiseCovariance, ParameterError
from . import zoo


class ModelFileError(KolmoError, ValueError):
    """Unreadable or invalid model file; the message names the offending field."""


@dataclass(frozen=True)
class LoadedModel:
    model: object
    spec: dict
    sha256: str

    @property
    def builtin_name(self) -> Optional[str]:
        return self.spec.get("name") if self.spec.get("type") == "builtin" else None


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_VAR = re.compile(r"^x([1-9][0-9]*)$")


def compile_expression(text: str, n: int, where: str = "f"):
    """Compile an arithmetic expression in x1..xn to a function of an (..., n) array."""
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ModelFileError(f"field {where}: cannot parse {text!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, left, right = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda x: op(left(x), right(x))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            op, arg = _UNARY[type(node.op)], build(node.operand)
            return lambda x: op(arg(x))
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            v = float(node.value)
            return lambda x: v
        if isinstance(node, ast.Name):
            m = _VAR.match(node.id)
            if not m or not 1 <= int(m.group(1)) <= n:
                raise ModelFileError(f"field {where}: unknown variable {node.id!r} (use x1..x{n})")
            k = int(m.group(1)) - 1
            return lambda x: x[..., k]
        seg = ast.get_source_segment(str(text).strip(), node) or type(node).__name__
        raise ModelFileError(
            f"field {where}: unsupported syntax {seg!r} (allowed: numbers, x1..x{n}, + - * / and parentheses)"
        )

    return build(tree.body)


def _drift_from_expressions(exprs):
    n = len(exprs)
    fns = [compile_expression(e, n, f"f[{i}]") for i, e in enumerate(exprs)]

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(np.shape(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            for i, fn in enumerate(fns):
                out[..., i] = fn(x)
        return out

    return f


def affine_part(f, n: int, probes: int = 6, seed: int = 0):
    """``(m, A)`` if ``f(x) == m + A x`` at the origin, unit vectors and random probes, else None."""
    m = f(np.zeros(n))
    if not np.all(np.isfinite(m)):
        return None
    A = np.column_stack([f(np.eye(n)[j]) - m for j in range(n)])
    if not np.all(np.isfinite(A)):
        return None
    pts = np.random.default_rng(seed).uniform(0.0, 10.0, size=(probes, n))
    vals = f(pts)
    pred = m + pts @ A.T
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals - pred) / (1.0 + np.abs(vals))) > 1e-9:
        return None
    return m, A


def _need(spec, key, where=""):
    if key not in spec:
        raise ModelFileError(f"missing field {where}{key!r}")
    return spec[key]


def model_from_dict(spec: dict):
    if not isinstance(spec, dict):
        raise ModelFileError("model file must contain a JSON object")
    kind = _need(spec, "type")
    try:
        if kind == "lotka_volterra":
            m = np.asarray(_need(spec, "m"), dtype=float)
            A = np.asarray(_need(spec, "A"), dtype=float)
            if m.ndim != 1:
                raise ModelFileError("field 'm': must be a list of numbers")
            n = m.shape[0]
            if A.shape != (n, n):
                raise ModelFileError(f"field 'A': A must be n×n with n={n}, got shape {A.shape}")
            return LVModel(m, A, _sigma(_need(spec, "sigma"), n), name=spec.get("name", "lotka_volterra"))
        if kind == "builtin":
            name = _need(spec, "name")
            params = spec.get("params", {}) or {}
            if not isinstance(params, dict):
                raise ModelFileError("field 'params': must be an object")
            try:
                return zoo.builtin(name, params)
            except TypeError as exc:
                raise ModelFileError(f"field 'params': {exc}") from None
        if kind == "custom_expression":
            exprs = _need(spec, "f")
            if not isinstance(exprs, list) or not exprs or not all(isinstance(e, str) for e in exprs):
                raise ModelFileError("field 'f': must be a nonempty list of expression strings")
            n = len(exprs)
            sigma = _sigma(_need(spec, "sigma"), n)
            f = _drift_from_expressions(exprs)
            name = spec.get("name", "custom")
            aff = affine_part(f, n)
            if aff is not None:
                return LVModel(aff[0], aff[1], sigma, name=name)
            return KolmogorovModel(n, f, sigma, name=name, params={"f": list(exprs)})
    except ModelFileError:
        raise
    except (ParameterError, ValueError) as exc:
        raise ModelFileError(str(exc)) from None
    raise ModelFileError(f"field 'type': expected lotka_volterra, builtin or custom_expression, got {kind!r}")


def _sigma(raw, n):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ModelFileError("field 'sigma': must be a number, a list or a matrix") from None
    try:
        if arr.ndim == 0:
            return NoiseCovariance.isotropic(float(arr), n)
        if arr.ndim == 1:
            if arr.shape[0] != n:
                raise ModelFileError(f"field 'sigma': expected {n} variances, got {arr.shape[0]}")
            return NoiseCovariance(np.diag(arr))
        if arr.shape != (n, n):
            raise ModelFileError(f"field 'sigma': must be {n}×{n}, got shape {arr.shape}")
        return NoiseCovariance(arr)
    except ParameterError as exc:
        raise ModelFileError(f"field 'sigma': {exc}") from None


def load_model(path: str) -> LoadedModel:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError:
        raise ModelFileError(f"{path}: not UTF-8 text") from None
    return LoadedModel(model_from_dict(spec), spec, hashlib.sha256(raw).hexdigest())


def model_to_dict(model) -> dict:
    """Model-file record for an LV model (general drift has no file form)."""
    if not isinstance(model, LVModel):
        raise ModelFileError("only Lotka-Volterra models can be serialized; use a builtin reference")
    return {
        "type": "lotka_volterra",
        "name": model.name,
        "m": model.m.tolist(),
        "A": model.A.tolist(),
        "sigma": model.sigma.matrix.tolist(),
    }

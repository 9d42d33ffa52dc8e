"""JSON descriptors in, JSON-ready structures and aligned text out."""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import SigkitError
from .lifetimes import Exponential, LifetimeModel, Uniform, Weibull
from .quality import PermutationModel
from .reliability import EmpiricalStates, IIDProductStates, IndependentProductStates
from .structure import StructureFunction, from_min_path_sets, from_truth_table


class DescriptorError(SigkitError):
    """A JSON descriptor is malformed; the message names the file and the key path."""


def _fail(where: str, msg: str):
    raise DescriptorError(f"{where}: {msg}")


def read_json(path) -> tuple[Any, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DescriptorError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text), str(path)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _require(obj, key, where):
    if not isinstance(obj, dict):
        _fail(where, "expected a JSON object")
    if key not in obj:
        _fail(where, f"missing key {key!r}")
    return obj[key]


def _positive_int(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        _fail(where, f"expected a positive integer, got {value!r}")
    return value


def _wrap(where, fn, *args):
    try:
        return fn(*args)
    except DescriptorError:
        raise
    except SigkitError as exc:
        raise DescriptorError(f"{where}: {exc}") from exc


def parse_system(obj, where="<system>") -> StructureFunction:
    n = _positive_int(_require(obj, "n", where), f"{where}/n")
    if "path_sets" in obj:
        paths = obj["path_sets"]
        if not isinstance(paths, list) or not all(isinstance(p, list) for p in paths):
            _fail(f"{where}/path_sets", "expected a list of lists of components")
        return _wrap(f"{where}/path_sets", from_min_path_sets, n, paths)
    if "truth_table" in obj:
        table = obj["truth_table"]
        if not isinstance(table, str):
            _fail(f"{where}/truth_table", "expected a string of 0/1 characters")
        return _wrap(f"{where}/truth_table", from_truth_table, n, table)
    _fail(where, "expected 'path_sets' or 'truth_table'")


def load_system(path) -> StructureFunction:
    obj, where = read_json(path)
    return parse_system(obj, where)


_PERM_KEY = re.compile(r"[\s()\[\]]")


def parse_permutation_model(obj, where="<model>") -> PermutationModel:
    n = _positive_int(_require(obj, "n", where), f"{where}/n")
    probs = _require(obj, "probs", where)
    if not isinstance(probs, dict):
        _fail(f"{where}/probs", "expected an object mapping orderings to 'p/q' strings")
    parsed = {}
    for key, value in probs.items():
        try:
            sigma = tuple(int(tok) for tok in _PERM_KEY.sub("", key).split(",") if tok)
        except ValueError:
            _fail(f"{where}/probs/{key}", "ordering keys look like '(1,2,3)'")
        if isinstance(value, float):
            _fail(f"{where}/probs/{key}", "floating-point probabilities are not accepted; use 'p/q' strings")
        parsed[sigma] = value
    return _wrap(f"{where}/probs", PermutationModel, n, parsed)


def load_permutation_model(path) -> PermutationModel:
    obj, where = read_json(path)
    return parse_permutation_model(obj, where)


def parse_marginal(obj, where="<marginal>"):
    if not isinstance(obj, dict) or len(obj) != 1:
        _fail(where, "expected one of {'exponential': rate}, {'weibull': [shape, scale]}, {'uniform': upper}")
    (name, params), = obj.items()
    try:
        if name == "exponential":
            return Exponential(_number(params, where))
        if name == "weibull":
            if isinstance(params, dict):
                return Weibull(_number(params.get("shape"), where), _number(params.get("scale", 1.0), where))
            if isinstance(params, list) and len(params) in (1, 2):
                return Weibull(*(_number(p, where) for p in params))
            _fail(where, "weibull takes [shape, scale] or {'shape': .., 'scale': ..}")
        if name == "uniform":
            return Uniform(_number(params, where))
    except SigkitError as exc:
        if isinstance(exc, DescriptorError):
            raise
        raise DescriptorError(f"{where}: {exc}") from exc
    _fail(where, f"unknown distribution {name!r}")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(where, f"expected a finite number, got {value!r}")
    return float(value)


def parse_lifetime_model(obj, where="<lifetimes>") -> LifetimeModel:
    n = _positive_int(_require(obj, "n", where), f"{where}/n")
    kind = _require(obj, "kind", where)
    if kind == "iid":
        return _wrap(where, LifetimeModel.iid, n, parse_marginal(_require(obj, "marginal", where), f"{where}/marginal"))
    if kind == "independent":
        margs = _require(obj, "marginals", where)
        if not isinstance(margs, list):
            _fail(f"{where}/marginals", "expected a list")
        if len(margs) != n:
            _fail(f"{where}/marginals", f"expected {n} marginals, got {len(margs)}")
        parsed = [parse_marginal(m, f"{where}/marginals/{i}") for i, m in enumerate(margs)]
        return _wrap(where, LifetimeModel.independent, parsed)
    if kind == "exchangeable-mixture":
        comps = _require(obj, "components", where)
        if not isinstance(comps, list) or not comps:
            _fail(f"{where}/components", "expected a nonempty list")
        parsed = []
        for i, c in enumerate(comps):
            w = f"{where}/components/{i}"
            parsed.append((_number(_require(c, "weight", w), w), parse_marginal(_require(c, "marginal", w), f"{w}/marginal")))
        return _wrap(where, LifetimeModel.exchangeable_mixture, n, parsed)
    _fail(f"{where}/kind", f"unknown kind {kind!r}")


def load_lifetime_model(path) -> LifetimeModel:
    obj, where = read_json(path)
    return parse_lifetime_model(obj, where)


DEFAULT_STATE_SAMPLES = 100_000


def parse_state_model(obj, where="<states>"):
    """Component state model from a lifetime-model descriptor.

    ``iid`` and ``independent`` give the analytic product models. Any
    other lifetime model (or ``"kind": "empirical"`` wrapping one under
    ``"model"``) gives an empirical model; ``"samples"`` and ``"seed"``
    control its Monte Carlo sample.
    """
    kind = _require(obj, "kind", where)
    if kind == "empirical":
        model = parse_lifetime_model(_require(obj, "model", where), f"{where}/model")
    else:
        model = parse_lifetime_model(obj, where)
        if model.kind == "iid":
            return IIDProductStates(model.n, model.marginals[0])
        if model.kind == "independent":
            return IndependentProductStates(model.marginals)
    samples = _positive_int(obj.get("samples", DEFAULT_STATE_SAMPLES), f"{where}/samples")
    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        _fail(f"{where}/seed", "expected a nonnegative integer")
    return EmpiricalStates(model, samples, seed)


def load_state_model(path):
    obj, where = read_json(path)
    return parse_state_model(obj, where)


# --------------------------------------------------------------------------
# output


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def rational_json(values):
    """Nested lists of 'num/den' strings; accepts vectors, matrices and object arrays."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    if isinstance(values, (list, tuple)):
        return [rational_json(v) for v in values]
    return frac_str(Fraction(values))


def common_denominator(values: Sequence[Fraction], n: int | None = None) -> int:
    """Shared denominator for display.

    1 when every value is an integer. Otherwise, given the component count
    ``n``, the lcm of the binomial coefficients ``C(n, k)`` when every value
    fits over it (so 4-component signatures print in twelfths), else the lcm
    of the reduced denominators.
    """
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    if d == 1 or n is None:
        return d
    natural = math.lcm(*(math.comb(n, k) for k in range(n + 1)))
    return natural if natural % d == 0 else d


def format_rationals(values: Sequence[Fraction], denominator: int | None = None, n: int | None = None) -> list[str]:
    """Render over a shared denominator: ``[1/2, 1/3, 0]`` -> ``['3/6', '2/6', '0']``."""
    values = [Fraction(v) for v in values]
    d = denominator or common_denominator(values, n)
    out = []
    for v in values:
        if v == 0:
            out.append("0")
        elif d == 1:
            out.append(str(v.numerator))
        else:
            out.append(f"{v * d}/{d}")
    return out


def text_matrix(rows: Sequence[Sequence], n: int | None = None) -> str:
    flat = [v for r in rows for v in r]
    if flat and all(isinstance(v, Fraction) for v in flat):
        d = common_denominator(flat, n)
        cells = [format_rationals(r, d) for r in rows]
    else:
        cells = [[f"{float(v):.6g}" for v in r] for r in rows]
    width = max((len(c) for r in cells for c in r), default=1)
    return "\n".join(" ".join(c.rjust(width) for c in r) for r in cells)


def format_float(x) -> str:
    return repr(float(x))

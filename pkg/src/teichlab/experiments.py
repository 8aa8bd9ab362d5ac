"""Named experiments: reproducible runs wiring the library into CSV/JSON files.

Every experiment validates its config against a JSON schema (unknown keys are
rejected), runs deterministically for a given seed, and writes its outputs
atomically (temp file + rename).  CSV files open with a version comment line;
bodies are byte-identical across reruns with the same config and seed.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .dimension import accumulate_cover, estimate_dimension, hausdorff_sum_check
from .dynamics import (ObservableF, birkhoff_average_continuous, bump_observable,
                       capped_systole_observable, correlation_decay_test,
                       deviation_masks, non_recurrent_cover)
from .errors import ConfigError
from .heights import (ContractionParams, HeightFunction, verify_circle_average,
                      verify_horocycle_average)
from .iet import IET, parse_rational
from .permutations import Permutation, classify_type_w, is_irreducible
from .suspension import (SuspensionData, compare_first_return, first_return_oracle,
                         standard_transversal, suspend, verify_local_product)
from .surfaces import SL2Matrix, TranslationSurface, surface_by_name

CSV_VERSION = "teich-lab-csv v1"


# ----------------------------------------------------------------------------
# plumbing
# ----------------------------------------------------------------------------

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(experiment: str, header: list[str], rows: list[list]) -> str:
    lines = [f"# {CSV_VERSION} experiment={experiment}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def _surface_from_params(params: dict) -> TranslationSurface:
    spec = params.get("surface", "square_torus")
    if isinstance(spec, str):
        return surface_by_name(spec)
    return TranslationSurface.from_json(spec)


def _iet_from_params(params: dict) -> IET:
    if "rotation" in params:
        return IET.circle_rotation(parse_rational(params["rotation"]))
    return IET.from_json(params["iet"])


def _observable(name: str) -> ObservableF:
    if name == "capped_systole":
        return capped_systole_observable()
    raise ConfigError(f"unknown observable {name!r}")


_SURFACE_SCHEMA = {
    "oneOf": [
        {"type": "string"},
        {"type": "object"},
    ]
}
_IET_SCHEMA = {
    "type": "object",
    "properties": {
        "lengths": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        "perm": {"type": "array", "items": {"type": "integer"}, "minItems": 2},
    },
    "required": ["lengths", "perm"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    schema: dict
    runner: Callable


EXPERIMENTS: dict[str, Experiment] = {}


def _experiment(name: str, description: str, param_schema: dict):
    schema = {
        "type": "object",
        "properties": {
            "experiment": {"const": name},
            "seed": {"type": "integer", "minimum": 0},
            "params": {"type": "object", "properties": param_schema,
                       "additionalProperties": False},
        },
        "required": ["experiment", "params"],
        "additionalProperties": False,
    }

    def wrap(fn):
        EXPERIMENTS[name] = Experiment(name=name, description=fn.__doc__.strip().splitlines()[0],
                                       schema=schema, runner=fn)
        return fn

    return wrap


def list_experiments() -> list[dict]:
    """Stable catalogue of experiment names and one-line descriptions."""
    return [{"name": e.name, "description": e.description}
            for e in sorted(EXPERIMENTS.values(), key=lambda e: e.name)]


def run_experiment(config: dict, out_dir: Path, seed: Optional[int] = None,
                   threads: int = 1) -> dict:
    """Validate, run, and write outputs; returns the summary dict."""
    name = config.get("experiment")
    if not isinstance(name, str) or name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; available: "
            + ", ".join(e["name"] for e in list_experiments()))
    exp = EXPERIMENTS[name]
    errors = sorted(Draft202012Validator(exp.schema).iter_errors(config),
                    key=lambda e: list(e.path))
    if errors:
        raise ConfigError("; ".join(e.message for e in errors[:5]))
    cfg = dict(config)
    if seed is not None:
        cfg["seed"] = seed
    cfg.setdefault("seed", 0)
    out_dir = Path(out_dir)
    started = time.monotonic()
    outputs: dict[str, str] = {}

    def emit(filename: str, text: str):
        _atomic_write(out_dir / filename, text)
        outputs[filename] = hashlib.sha256(text.encode()).hexdigest()

    summary = exp.runner(cfg["params"], int(cfg["seed"]), emit, threads)
    manifest = {
        "experiment": name,
        "config_sha256": _config_hash(cfg),
        "seed": cfg["seed"],
        "package_version": __version__,
        "kernel": KERNEL_IMPLEMENTATION,
        "wall_time_s": round(time.monotonic() - started, 3),
        "outputs": outputs,
    }
    _atomic_write(out_dir / f"{name}.manifest.json", json.dumps(manifest, indent=2) + "\n")
    summary = {"experiment": name, **summary, "outputs": sorted(outputs)}
    return summary


_worker_fn = None


def _invoke_worker(item):
    return _worker_fn(item)


def _parallel_map(fn, items, threads: int):
    """Deterministic ordered map, optionally over a fork-based process pool.

    The worker closure travels to the children through fork inheritance (the
    module global is set before the pool starts), so arbitrary closures work
    as long as items and results pickle.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    import multiprocessing

    global _worker_fn
    _worker_fn = fn
    try:
        with multiprocessing.get_context("fork").Pool(threads) as pool:
            return pool.map(_invoke_worker, items)
    finally:
        _worker_fn = None


# ----------------------------------------------------------------------------
# experiments
# ----------------------------------------------------------------------------

@_experiment("typew_scan", "Classify permutations as type W over a range of letter counts.", {
    "d_min": {"type": "integer", "minimum": 2},
    "d_max": {"type": "integer", "minimum": 2},
    "mode": {"enum": ["reversal", "random"]},
    "samples": {"type": "integer", "minimum": 1},
})
def _run_typew_scan(params, seed, emit, threads):
    """Classify permutations as type W over a range of letter counts."""
    d_min = params.get("d_min", 3)
    d_max = params.get("d_max", 11)
    mode = params.get("mode", "reversal")
    samples = params.get("samples", 50)
    rows = []
    for d in range(d_min, d_max + 1):
        perms = []
        if mode == "reversal":
            perms = [Permutation.reversal(d)]
        else:
            rng = np.random.default_rng([seed, d])
            for _ in range(samples):
                perms.append(Permutation(tuple(int(v) + 1 for v in rng.permutation(d))))
        for p in perms:
            if not is_irreducible(p):
                rows.append([d, str(p), False, "", ""])
                continue
            res = classify_type_w(p)
            rows.append([d, str(p), True, res.type_w,
                         " ".join(str(a) for a in res.trace)])
    emit("typew_scan.csv", _csv("typew_scan",
                                ["d", "perm", "irreducible", "type_w", "trace"], rows))
    n_typew = sum(1 for r in rows if r[3] is True)
    return {"rows": len(rows), "type_w": n_typew}


@_experiment("iet_epsn", "Shortest partition intervals n*eps_n along a schedule.", {
    "iet": _IET_SCHEMA,
    "rotation": {"type": "string"},
    "n_max": {"type": "integer", "minimum": 1},
    "schedule": {"enum": ["geometric", "linear"]},
    "points": {"type": "integer", "minimum": 1},
})
def _run_iet_epsn(params, seed, emit, threads):
    """Shortest partition intervals n*eps_n along a schedule."""
    iet = _iet_from_params(params)
    n_max = params.get("n_max", 1000)
    diag = iet.short_intervals_diagnostic(n_max, params.get("schedule", "geometric"),
                                          params.get("points", 60))
    rows = []
    for n, n_eps in diag:
        eps = n_eps / n
        rows.append([n, eps.numerator, eps.denominator, float(n_eps)])
    emit("iet_epsn.csv", _csv("iet_epsn",
                              ["n", "epsilon_n_num", "epsilon_n_den", "n_eps_float"], rows))
    return {"points": len(rows), "final_n_eps": float(diag[-1][1])}


@_experiment("weakmix_pipeline", "Run the weak-mixing sufficient criterion on an IET.", {
    "iet": _IET_SCHEMA,
    "rotation": {"type": "string"},
    "depth": {"type": "integer", "minimum": 1},
    "n_max": {"type": "integer", "minimum": 1},
    "threshold": {"type": "string"},
})
def _run_weakmix(params, seed, emit, threads):
    """Run the weak-mixing sufficient criterion on an IET."""
    iet = _iet_from_params(params)
    report = iet.weak_mixing_verdict(params.get("depth", 1000), params.get("n_max", 2000),
                                     parse_rational(params.get("threshold", "1/20")))
    emit("weakmix_pipeline.json", json.dumps(
        {"verdict": report.verdict, "evidence": report.evidence}, indent=2) + "\n")
    return {"verdict": report.verdict}


@_experiment("suspend_verify", "Suspend an IET and verify first-return and local product structure.", {
    "iet": _IET_SCHEMA,
    "rotation": {"type": "string"},
    "b": {"type": "array", "items": {"type": "number"}},
    "samples": {"type": "integer", "minimum": 1},
    "shears": {"type": "integer", "minimum": 1},
})
def _run_suspend_verify(params, seed, emit, threads):
    """Suspend an IET and verify first-return and local product structure."""
    base = _iet_from_params(params)
    data = SuspensionData(base=base, b=tuple(params["b"]))
    surf = suspend(data)
    tr = standard_transversal(data)
    rng = np.random.default_rng([seed, 1])
    table = first_return_oracle(surf, tr, params.get("samples", 500), rng)
    err = compare_first_return(table, base)
    n_shears = params.get("shears", 21)
    limit = 0.9 * data.max_shear()
    shears = [limit * (2 * k / (n_shears - 1) - 1) for k in range(n_shears)] \
        if n_shears > 1 else [0.0]
    disc = verify_local_product(data, shears)
    rows = [[u, v, tau] for u, v, tau in table.entries]
    emit("suspend_verify.csv", _csv("suspend_verify", ["u_in", "u_out", "return_time"], rows))
    report = {
        "first_return_max_err": err,
        "local_product_max_discrepancy": disc,
        "genus": surf.genus,
        "cone_orders": [c.order for c in surf.cone_points],
        "area": surf.area,
        "area_expected": data.area,
        "max_shear": data.max_shear(),
        "resampled": table.resampled,
    }
    emit("suspend_verify.json", json.dumps(report, indent=2) + "\n")
    return {"first_return_max_err": err, "local_product_max_discrepancy": disc}


@_experiment("height_inequalities", "Check the circle/horocycle averaging inequalities for the systole height.", {
    "surface": _SURFACE_SCHEMA,
    "exponent": {"type": "number", "exclusiveMinimum": 0},
    "a": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "b": {"type": "number"},
    "t_values": {"type": "array", "items": {"type": "number"}},
    "basepoints": {"type": "integer", "minimum": 1},
    "alpha_cap": {"type": "number"},
    "quadrature_n": {"type": "integer", "minimum": 8},
})
def _run_heights(params, seed, emit, threads):
    """Check the circle/horocycle averaging inequalities for the systole height."""
    x0 = _surface_from_params(params)
    exponent = params.get("exponent", 0.5)
    a = params.get("a", 0.5)
    t_values = params.get("t_values", [2.0, 3.0, 4.0])
    n_base = params.get("basepoints", 50)
    cap = params.get("alpha_cap", 10.0)
    quad = params.get("quadrature_n", 128)
    t0 = min(t_values) - 1.0
    h = HeightFunction(exponent=exponent,
                       params=ContractionParams(a=a, b=1.0, sigma=exponent, t0=t0))

    basepoints = []
    k = 0
    while len(basepoints) < n_base and k < 50 * n_base:
        rng = np.random.default_rng([seed, k])
        m = (SL2Matrix.geodesic(float(rng.uniform(0, 1.5)))
             @ SL2Matrix.horocycle(float(rng.uniform(-1, 1)))
             @ SL2Matrix.rotation(float(rng.uniform(0, 2 * math.pi))))
        k += 1
        y = x0.act(m)
        if h(y) <= cap:
            basepoints.append((k - 1, y))
    if len(basepoints) < n_base:
        raise ConfigError("could not sample enough basepoints under the alpha cap")

    def one(args):
        idx, y = args
        alpha = h(y)
        out = []
        for t in t_values:
            for mode in ("circle", "interval", "gaussian"):
                if mode == "circle":
                    chk = verify_circle_average(h, y, t, quadrature_n=quad, a=a, b=1.0)
                else:
                    chk = verify_horocycle_average(h, y, t, mode=mode, quadrature_n=quad + 1,
                                                   a=a, b=1.0)
                out.append([idx, t, mode, alpha, chk.lhs, chk.lhs - a * alpha])
        return out

    results = _parallel_map(one, basepoints, threads)
    rows = [r for chunk in results for r in chunk]
    max_excess = max(r[5] for r in rows)
    b_cal = max_excess * 1.1 if max_excess > 0 else params.get("b", 1.0)
    b = params.get("b", b_cal)
    final_rows = [r + [r[4] <= a * r[3] + b] for r in rows]
    emit("height_inequalities.csv", _csv(
        "height_inequalities",
        ["basepoint", "t", "mode", "alpha_x", "lhs", "excess", "satisfied"], final_rows))
    summary = {
        "basepoints": len(basepoints),
        "max_excess": max_excess,
        "calibrated_b": b_cal,
        "b_used": b,
        "all_satisfied": all(r[-1] for r in final_rows),
    }
    emit("height_inequalities.json", json.dumps(summary, indent=2) + "\n")
    return summary


@_experiment("correlation_decay", "Fit the decay rate of horocycle correlations of a bump observable.", {
    "surface": _SURFACE_SCHEMA,
    "bump_eps": {"type": "number", "exclusiveMinimum": 0},
    "bump_width": {"type": "number", "exclusiveMinimum": 0},
    "beta": {"type": "number"},
    "t_values": {"type": "array", "items": {"type": "number"}},
    "quadrature_n": {"type": "integer", "minimum": 64},
})
def _run_correlation(params, seed, emit, threads):
    """Fit the decay rate of horocycle correlations of a bump observable."""
    x = _surface_from_params(params)
    phi = bump_observable(params.get("bump_eps", 0.2), params.get("bump_width", 0.3))
    ts = params.get("t_values", [1.0, 1.5, 2.0, 2.5, 3.0])
    pairs = [(t1, t2) for t1 in ts for t2 in ts if t1 <= t2]
    rep = correlation_decay_test(x, phi, params.get("beta", 1.0), pairs,
                                 params.get("quadrature_n", 20001))
    rows = [[r.t1, r.t2, abs(r.t1 - r.t2), r.integral, r.quad_error, r.reliable]
            for r in rep.rows]
    emit("correlation_decay.csv", _csv(
        "correlation_decay", ["t1", "t2", "dt", "integral", "quad_error", "reliable"], rows))
    summary = {"slope": rep.slope, "intercept": rep.intercept, "excluded": rep.excluded,
               "all_zero": rep.all_zero}
    emit("correlation_decay.json", json.dumps(summary, indent=2) + "\n")
    return summary


@_experiment("birkhoff_deviation", "Deviation masks F_i for window averages of an observable.", {
    "surface": _SURFACE_SCHEMA,
    "observable": {"enum": ["capped_systole"]},
    "reference_value": {"type": "number"},
    "reference_directions": {"type": "integer", "minimum": 1},
    "reference_T": {"type": "number", "exclusiveMinimum": 0},
    "eps": {"type": "number", "exclusiveMinimum": 0},
    "N": {"type": "number", "exclusiveMinimum": 0},
    "i_range": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    "restrict_eps": {"type": "number"},
})
def _run_birkhoff_deviation(params, seed, emit, threads):
    """Deviation masks F_i for window averages of an observable."""
    x = _surface_from_params(params)
    f = _observable(params.get("observable", "capped_systole"))
    N = params.get("N", 1.0)
    i_range = params.get("i_range", [1, 2, 3, 4])
    if "reference_value" in params:
        ref = params["reference_value"]
        ref_source = "config"
        avg_rows = []
    else:
        rng = np.random.default_rng([seed, 0])
        n_dirs = params.get("reference_directions", 64)
        T = params.get("reference_T", 40.0)
        avg_rows = []
        for s in rng.uniform(-1, 1, n_dirs):
            value, quad_error = birkhoff_average_continuous(
                x, float(s), T, f, dt=T / 400, return_error=True)
            avg_rows.append([float(s), value, quad_error])
        ref = float(np.mean([r[1] for r in avg_rows]))
        ref_source = "empirical (long-run average over random directions)"
    if avg_rows:
        emit("birkhoff_averages.csv", _csv(
            "birkhoff_deviation", ["s", "value", "quad_error"], avg_rows))
    masks = deviation_masks(x, f, ref, params.get("eps", 0.05), N, i_range,
                            restrict_to_compact=params.get("restrict_eps"))
    rows = [[m.meta["i"], m.grid.count, m.count_bad,
             m.count_bad / m.grid.count] for m in masks]
    emit("birkhoff_deviation.csv", _csv(
        "birkhoff_deviation", ["i", "intervals", "bad", "fraction"], rows))
    payload = {"reference_value": ref, "reference_source": ref_source,
               "masks": [m.to_json() for m in masks]}
    emit("birkhoff_deviation_masks.json", json.dumps(payload, indent=2) + "\n")
    return {"reference_value": ref, "bad_counts": [m.count_bad for m in masks]}


@_experiment("divergence_cover", "Cover-growth estimate of the non-recurrent direction set dimension.", {
    "surface": _SURFACE_SCHEMA,
    "eps": {"type": "number", "exclusiveMinimum": 0},
    "t": {"type": "number", "exclusiveMinimum": 0},
    "delta": {"type": "number", "minimum": 0, "maximum": 1},
    "n_levels": {"type": "integer", "minimum": 3},
    "slack": {"type": "number", "minimum": 0},
    "beta_checks": {"type": "array", "items": {"type": "number"}},
})
def _run_divergence_cover(params, seed, emit, threads):
    """Cover-growth estimate of the non-recurrent direction set dimension."""
    x = _surface_from_params(params)
    t = params.get("t", 1.0)
    masks = non_recurrent_cover(x, eps=params.get("eps", 0.45), t=t,
                                delta=params.get("delta", 0.9),
                                n_levels=params.get("n_levels", 12),
                                slack=params.get("slack", 0.0))
    report = accumulate_cover(masks, t=t)
    est = estimate_dimension(report)
    rows = [[n, w, c] for n, w, c in report.to_rows()]
    emit("divergence_cover.csv", _csv("divergence_cover", ["n", "width", "count"], rows))
    sums = {}
    for beta in params.get("beta_checks", []):
        sums[str(beta)] = [[n, v] for n, v in hausdorff_sum_check(report, beta)]
    est_payload = {
        "dim_upper": est.dim_upper,
        "slope": est.slope,
        "levels_used": list(est.levels_used),
        "residuals": list(est.residuals),
        "empty_cover": est.empty_cover,
        "hausdorff_sums": sums,
        "masks": [m.to_json() for m in masks],
    }
    emit("divergence_cover.json", json.dumps(est_payload, indent=2) + "\n")
    return {"dim_upper": est.dim_upper, "empty_cover": est.empty_cover,
            "bad_counts": [m.count_bad for m in masks]}

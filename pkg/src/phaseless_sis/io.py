"""CSV and JSON readers and writers for coefficients, samples, results and reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from gmpy2 import mpfr

from ._precision import is_mp, working_precision
from .harness import TrialReport
from .pdcr import ReconstructionResult
from .sampling import MagnitudeSamples, SampleDesign


def _num(x) -> str:
    """Round-trippable decimal; ``mpfr`` values keep all their digits."""
    return str(x) if is_mp(x) else repr(float(x))


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_coeffs_csv(path, coeffs) -> None:
    c = np.asarray(coeffs, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for k, ck in enumerate(c):
            w.writerow([k, _num(ck.real), _num(ck.imag)])


def read_coeffs_csv(path) -> np.ndarray:
    """Coefficients c_0..c_N; real dtype when every imaginary part is zero."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no coefficients")
    try:
        idx = [int(r["index"]) for r in rows]
        c = np.array([complex(float(r["re"]), float(r.get("im") or 0.0)) for r in rows])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed coefficient row ({exc})") from None
    if sorted(idx) != list(range(len(idx))):
        raise ValueError(f"{path}: indices must be exactly 0..{len(idx) - 1}")
    c = c[np.argsort(idx)]
    return c.real.copy() if not np.any(c.imag) else c


def write_samples_csv(path, samples: MagnitudeSamples) -> Path:
    """Rows (n, t, value) with n = 0 for t0; noise metadata goes to a JSON sidecar."""
    path = Path(path)
    d = samples.design
    vals = [v if is_mp(v) else float(v) for v in samples.values]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "t", "value"])
        w.writerow([0, _num(d.t0), _num(vals[0])])
        for n in range(1, d.n_max + 1):
            offs, mags = d.offsets[n - 1], vals[1 + (n - 1) * d.density: 1 + n * d.density]
            for t, m in zip(offs, mags):
                w.writerow([n, _num(t), _num(m)])
    sidecar = path.with_suffix(".json")
    write_json(sidecar, {"density": d.density, "n_max": d.n_max, "noise": samples.noise_meta})
    return sidecar


def read_samples_csv(path, precision: int | None = None) -> MagnitudeSamples:
    """Inverse of :func:`write_samples_csv`.  Every interval 1..n_max must be complete.

    With ``precision`` the magnitudes are parsed as ``mpfr`` of that many bits,
    so extended-precision measurements survive the round trip.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        parsed = [(int(r["n"]), float(r["t"]), _parse_value(r["value"], precision)) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed sample row ({exc})") from None
    groups: dict[int, list[tuple[float, float]]] = {}
    for n, t, v in parsed:
        groups.setdefault(n, []).append((t, v))
    if len(groups.get(0, [])) != 1:
        raise ValueError(f"{path}: need exactly one sample with n = 0")
    n_max = max(groups)
    missing = [n for n in range(1, n_max + 1) if n not in groups]
    if missing:
        raise ValueError(f"{path}: no samples on intervals {missing}")
    sizes = {len(groups[n]) for n in range(1, n_max + 1)}
    if len(sizes) > 1:
        raise ValueError(f"{path}: intervals carry different sample counts {sorted(sizes)}")
    density = sizes.pop() if sizes else 3
    meta = None
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        side = json.loads(sidecar.read_text())
        meta = side.get("noise")
        density = side.get("density", density) if n_max == 0 else density
    offsets = np.array([[t for t, _ in groups[n]] for n in range(1, n_max + 1)]).reshape(n_max, density)
    values = [groups[0][0][1]] + [v for n in range(1, n_max + 1) for _, v in groups[n]]
    values = np.array(values, dtype=object if precision else float)
    return MagnitudeSamples(SampleDesign(groups[0][0][0], offsets), values, meta)


def _parse_value(text: str, precision: int | None):
    if precision is None:
        return float(text)
    float(text)  # reject malformed input with the float parser's message
    with working_precision(precision):
        return mpfr(text)


def write_result(out_dir, result: ReconstructionResult, extra: dict | None = None) -> None:
    """``coefficients.csv`` and ``diagnostics.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_coeffs_csv(out / "coefficients.csv", result.coeffs)
    payload = {
        "status": result.status,
        "failed_step": result.failed_step,
        "message": result.message,
        "phases": result.phases,
        "steps": result.diagnostics,
    }
    payload.update(extra or {})
    write_json(out / "diagnostics.json", payload)


def write_report(out_dir, report: TrialReport) -> None:
    """``report.json``, ``errors.csv`` and ``cdf.csv``; timing goes to ``timing.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = report.summary()
    timing = summary.pop("wall_clock_s")
    write_json(out / "report.json", summary)
    write_json(out / "timing.json", {"wall_clock_s": timing})
    with open(out / "errors.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "error", "status"])
        for t, (e, s) in enumerate(zip(report.errors, report.statuses)):
            w.writerow([t, _num(e), s])
    with open(out / "cdf.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "cdf"])
        for x, p in report.cdf:
            w.writerow([_num(x), _num(p)])


def write_table_csv(path, header, table: dict[str, list[float]], row_label: str = "a") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([row_label] + [f"{s:g}" for s in header])
        for label, rates in table.items():
            w.writerow([label] + [f"{r:.4f}" for r in rates])

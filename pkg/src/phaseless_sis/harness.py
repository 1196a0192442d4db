"""Monte Carlo driver: random signals, random designs, reconstruction, scoring."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .generators import Generator, from_spec
from .pdcr import ReconOptions, reconstruct_complex, reconstruct_real
from .sampling import SamplePlan, add_noise, draw_design, measure
from .signals import CausalSignal, max_gap

ERROR_FLOOR = -16.0
NOISELESS_PRECISION = 160
DEFAULT_CDF_GRID = np.round(np.arange(-16.0, 1.0 + 1e-9, 0.1), 10)


def _relative_log_error(truth: np.ndarray, diff_norm: float) -> float:
    ratio = diff_norm / np.linalg.norm(truth)
    if ratio == 0:
        return ERROR_FLOOR
    return max(math.log10(ratio), ERROR_FLOOR)


def _pair(truth, recovered, dtype):
    c = np.asarray(truth, dtype=dtype)
    ct = np.asarray(recovered, dtype=dtype)
    if c.shape != ct.shape or c.ndim != 1:
        raise ValueError(f"coefficient vectors differ in shape: {c.shape} vs {ct.shape}")
    if not np.any(c):
        raise ValueError("truth must be nonzero")
    return c, ct


def align_complex(truth, recovered) -> complex:
    """The unimodular g minimising ||truth - g recovered||."""
    c, ct = _pair(truth, recovered, complex)
    d = np.vdot(ct, c)
    return d / abs(d) if d != 0 else 1.0 + 0j


def error_complex(truth, recovered) -> float:
    """log10 of the relative coefficient error after the best global phase, floored at -16."""
    c, ct = _pair(truth, recovered, complex)
    g = align_complex(c, ct)
    return _relative_log_error(c, float(np.linalg.norm(c - g * ct)))


def error_real(truth, recovered) -> float:
    """log10 of the relative coefficient error after the best global sign, floored at -16."""
    c, ct = _pair(truth, recovered, float)
    return _relative_log_error(c, float(min(np.linalg.norm(c - ct), np.linalg.norm(c + ct))))


def cdf(errors, x: float) -> float:
    """Fraction of errors at or below ``x``."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise ValueError("cdf of an empty error list")
    return float(np.count_nonzero(e <= x) / e.size)


def cdf_curve(errors, grid=DEFAULT_CDF_GRID) -> np.ndarray:
    """(len(grid), 2) array of (x, cdf(x))."""
    e = np.sort(np.asarray(errors, dtype=float))
    if e.size == 0:
        raise ValueError("cdf of an empty error list")
    grid = np.asarray(grid, dtype=float)
    return np.column_stack([grid, np.searchsorted(e, grid, side="right") / e.size])


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo experiment.

    ``num_coeffs`` is the length N + 1 of the ground truth.  Full
    reconstructions sample up to interval N + s - 1; ``local`` ones only up
    to N.  ``coeffs`` fixes the truth instead of drawing it per trial.
    ``precision`` is ``"auto"`` (extended precision when noiseless, float64
    otherwise), ``None`` or a bit count.
    """

    generator: dict
    mode: str = "complex"
    trials: int = 1000
    num_coeffs: int | None = None
    snr_db: float | None = None
    threshold: float = -1.8
    seed: int = 0
    coeffs: tuple | None = None
    local: bool = False
    precision: int | str | None = "auto"
    tie_ratio: float = 0.5

    def __post_init__(self):
        if self.mode not in ("complex", "real"):
            raise ValueError(f"mode must be 'complex' or 'real', got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.threshold < 0:
            raise ValueError("threshold must be negative")
        if self.coeffs is not None:
            object.__setattr__(self, "coeffs", tuple(self.coeffs))
            if self.num_coeffs not in (None, len(self.coeffs)):
                raise ValueError("num_coeffs disagrees with the fixed coefficients")
        if self.precision not in ("auto", None) and (not isinstance(self.precision, int) or self.precision < 53):
            raise ValueError("precision must be 'auto', None or an integer >= 53")
        gen = self.build_generator()
        if gen.is_complex and self.mode == "real":
            raise ValueError("real mode needs a real generator")

    def build_generator(self) -> Generator:
        return _generator(json.dumps(self.generator, sort_keys=True))

    @property
    def length(self) -> int:
        if self.coeffs is not None:
            return len(self.coeffs)
        if self.num_coeffs is not None:
            return self.num_coeffs
        return 16 if self.mode == "complex" else 21

    @property
    def n_max(self) -> int:
        s = self.build_generator().support
        return self.length - 1 if self.local else self.length + s - 2

    @property
    def density(self) -> int:
        return 3 if self.mode == "complex" else 2

    @property
    def bits(self) -> int | None:
        if self.precision == "auto":
            return NOISELESS_PRECISION if self.snr_db is None else None
        return self.precision

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if self.coeffs is not None:
            d["coeffs"] = [[float(np.real(c)), float(np.imag(c))] for c in self.coeffs]
        return d


@lru_cache(maxsize=32)
def _generator(spec_json: str) -> Generator:
    return from_spec(json.loads(spec_json))


@dataclass
class TrialReport:
    config: TrialConfig
    errors: np.ndarray
    statuses: list[str]
    failed_steps: list[int | None]
    wall_clock: float
    cdf: np.ndarray = field(init=False)

    def __post_init__(self):
        self.cdf = cdf_curve(self.errors)

    @property
    def success_rate(self) -> float:
        return cdf(self.errors, self.config.threshold)

    def failures(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.statuses:
            if s != "ok":
                out[s] = out.get(s, 0) + 1
        return out

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "success_rate": self.success_rate,
            "trials": int(self.errors.size),
            "median_error": float(np.median(self.errors)),
            "failures": self.failures(),
            "wall_clock_s": self.wall_clock,
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from (master seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def draw_truth(cfg: TrialConfig, gen: Generator, rng: np.random.Generator) -> np.ndarray:
    """Random ground truth: unit-disk uniform (complex) or U[-1, 1] with |c_0| >= 0.1 (real)."""
    if cfg.coeffs is not None:
        dtype = complex if cfg.mode == "complex" else float
        return np.asarray(cfg.coeffs, dtype=dtype)
    n = cfg.length
    while True:
        if cfg.mode == "complex":
            c = np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
            ok = c[0] != 0
        else:
            c = rng.uniform(-1.0, 1.0, n)
            ok = abs(c[0]) >= 0.1
        if ok and max_gap(c) < gen.support - 1:
            return c


def run_one(cfg: TrialConfig, trial: int) -> tuple[float, str, int | None]:
    """(error, status, failed step) for trial ``trial``; failures score 0."""
    gen = cfg.build_generator()
    rng = trial_rng(cfg.seed, trial)
    truth = draw_truth(cfg, gen, rng)
    f = CausalSignal(truth, gen)
    design = draw_design(f, SamplePlan(cfg.density, cfg.n_max), rng)
    samples = measure(f, design, cfg.bits if cfg.snr_db is None else None)
    if cfg.snr_db is not None:
        samples = add_noise(samples, cfg.snr_db, rng)
    opts = ReconOptions(precision=cfg.bits, tie_ratio=cfg.tie_ratio)
    recon = reconstruct_complex if cfg.mode == "complex" else reconstruct_real
    res = recon(samples, gen, opts)
    if not res.ok:
        return 0.0, res.status, res.failed_step
    score = error_complex if cfg.mode == "complex" else error_real
    return score(truth, res.leading(truth.size)), res.status, None


def _run_chunk(args):
    cfg, lo, hi = args
    return [run_one(cfg, t) for t in range(lo, hi)]


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def run_trials(cfg: TrialConfig, jobs: int | None = 1) -> TrialReport:
    """Run every trial and aggregate in trial order.

    Results do not depend on ``jobs``: each trial draws from its own stream.
    """
    jobs = default_jobs() if jobs is None else max(1, jobs)
    start = time.perf_counter()
    if jobs == 1 or cfg.trials < 2:
        rows = _run_chunk((cfg, 0, cfg.trials))
    else:
        size = max(1, math.ceil(cfg.trials / (4 * jobs)))
        chunks = [(cfg, lo, min(lo + size, cfg.trials)) for lo in range(0, cfg.trials, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = [r for part in pool.map(_run_chunk, chunks) for r in part]
    errors = np.array([r[0] for r in rows])
    return TrialReport(cfg, errors, [r[1] for r in rows], [r[2] for r in rows],
                       time.perf_counter() - start)


def snr_sweep(cfg: TrialConfig, snr_list, jobs: int | None = 1) -> list[tuple[float, TrialReport]]:
    """One report per SNR in ``snr_list``; an empty list gives an empty table."""
    return [(float(snr), run_trials(dataclasses.replace(cfg, snr_db=float(snr)), jobs))
            for snr in snr_list]


def sweep_table(rows: dict[str, list[tuple[float, TrialReport]]]) -> tuple[list[float], dict[str, list[float]]]:
    """Success-rate grid: SNR header and one row per label."""
    header: list[float] = []
    table: dict[str, list[float]] = {}
    for label, sweep in rows.items():
        snrs = [s for s, _ in sweep]
        if header and snrs != header:
            raise ValueError("rows were swept over different SNR lists")
        header = snrs
        table[label] = [r.success_rate for _, r in sweep]
    return header, table

"""Random sample designs, magnitude measurement and additive noise."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from gmpy2 import mpfr

from ._precision import working_precision
from .signals import CausalSignal

DEGENERATE_REL_TOL = 1e-12


@dataclass(frozen=True)
class SamplePlan:
    """How many points to draw: ``density`` per unit interval n = 1..n_max."""

    density: int
    n_max: int
    seed: int | None = None

    def __post_init__(self):
        if self.density not in (2, 3):
            raise ValueError(f"density must be 2 or 3, got {self.density}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be nonnegative, got {self.n_max}")

    @property
    def count(self) -> int:
        return 1 + self.density * self.n_max


@dataclass(frozen=True, eq=False)
class SampleDesign:
    """Offsets in (0, 1): ``t0`` on the first interval, ``offsets[n-1, j]`` on (n, n+1)."""

    t0: float
    offsets: np.ndarray

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=float)
        if off.ndim != 2:
            raise ValueError("offsets must be a 2-d array (n_max, density)")
        pts = np.append(off.ravel(), self.t0)
        if not np.all((pts > 0) & (pts < 1)):
            raise ValueError("sample offsets must lie strictly inside (0, 1)")
        off.setflags(write=False)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "offsets", off)

    @property
    def n_max(self) -> int:
        return self.offsets.shape[0]

    @property
    def density(self) -> int:
        return self.offsets.shape[1]

    @property
    def count(self) -> int:
        return 1 + self.offsets.size

    def locations(self) -> np.ndarray:
        """Absolute sample positions: t0 first, then n + t_{n_j} row by row."""
        n = np.arange(1, self.n_max + 1)[:, None]
        return np.concatenate([[self.t0], (n + self.offsets).ravel()])

    def __eq__(self, other):
        if not isinstance(other, SampleDesign):
            return NotImplemented
        return self.t0 == other.t0 and np.array_equal(self.offsets, other.offsets)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MagnitudeSamples:
    """Measured |f| on a design.

    ``values`` follows :meth:`SampleDesign.locations`.  It is a float array,
    or an object array of ``mpfr`` when measured with extended precision.
    Noisy values may be negative.
    """

    design: SampleDesign
    values: np.ndarray
    noise_meta: dict | None = field(default=None)

    def __post_init__(self):
        if len(self.values) != self.design.count:
            raise ValueError(f"expected {self.design.count} values, got {len(self.values)}")

    @property
    def count(self) -> int:
        return self.design.count

    @property
    def value0(self):
        return self.values[0]

    def interval(self, n: int):
        """(offsets, magnitudes) of the samples on (n, n+1), n >= 1."""
        d = self.design.density
        return self.design.offsets[n - 1], self.values[1 + (n - 1) * d: 1 + n * d]

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def truncated(self, n_max: int) -> "MagnitudeSamples":
        """The samples on intervals 0..n_max only."""
        if not 0 <= n_max <= self.design.n_max:
            raise ValueError(f"cannot truncate to n_max={n_max}")
        design = SampleDesign(self.design.t0, self.design.offsets[:n_max])
        return replace(self, design=design, values=self.values[:design.count])


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    bad = u <= 0.0
    while bad.any():
        u[bad] = rng.random(int(bad.sum()))
        bad = u <= 0.0
    return u


def draw_points(plan: SamplePlan, rng: np.random.Generator | None = None) -> SampleDesign:
    """i.i.d. U(0, 1) offsets; ``rng`` defaults to one seeded from ``plan.seed``."""
    rng = rng if rng is not None else np.random.default_rng(plan.seed)
    t0 = _open_uniform(rng, 1)[0]
    return SampleDesign(t0, _open_uniform(rng, (plan.n_max, plan.density)))


def draw_design(f: CausalSignal, plan: SamplePlan, rng: np.random.Generator | None = None,
                rel_tol: float = DEGENERATE_REL_TOL, max_redraws: int = 100) -> SampleDesign:
    """Like :func:`draw_points`, redrawing points where phi or f (nearly) vanish.

    Those events have probability zero; the redraw only guards against
    floating point coincidences.
    """
    rng = rng if rng is not None else np.random.default_rng(plan.seed)
    design = draw_points(plan, rng)
    gen = f.generator
    phi_floor = rel_tol * gen.peak
    f_floor = rel_tol * max(float(np.max(np.abs(f.coeffs))), 1e-300) * gen.peak
    t0 = design.t0
    off = np.array(design.offsets)
    n = np.arange(1, plan.n_max + 1)[:, None]
    for _ in range(max_redraws):
        bad0 = abs(gen(t0)) <= phi_floor or abs(f(t0)) <= f_floor
        bad = (np.abs(gen(off)) <= phi_floor) | (np.abs(f(n + off)) <= f_floor)
        if not bad0 and not bad.any():
            return SampleDesign(t0, off)
        if bad0:
            t0 = _open_uniform(rng, 1)[0]
        off[bad] = _open_uniform(rng, int(bad.sum()))
    raise RuntimeError("could not draw a nondegenerate design")


def measure(f: CausalSignal, design: SampleDesign, precision: int | None = None) -> MagnitudeSamples:
    """|f| at every design location, in float64 or at ``precision`` bits."""
    if design.n_max > 0 and design.n_max > len(f) + f.support - 2:
        raise ValueError("design extends past the last interval touched by f")
    if precision is None:
        return MagnitudeSamples(design, np.abs(f(design.locations())))
    with working_precision(precision):
        vals = [abs(f.value(mpfr(design.t0)))]
        for n in range(1, design.n_max + 1):
            vals.extend(abs(f.value(n + mpfr(t))) for t in design.offsets[n - 1])
    return MagnitudeSamples(design, np.array(vals, dtype=object))


def noise_variance(values, snr_db: float, count: int | None = None) -> tuple[float, float]:
    """(||F||^2, sigma^2) with 10 log10(||F||^2 / (K sigma^2)) = snr_db."""
    v = np.array([float(x) for x in values])
    k = v.size if count is None else count
    energy = float(np.dot(v, v))
    return energy, energy / (k * 10.0 ** (snr_db / 10.0))


def add_noise(samples: MagnitudeSamples, snr_db: float, rng: np.random.Generator) -> MagnitudeSamples:
    """Add i.i.d. N(0, sigma^2) to every magnitude; K is the sample count."""
    if samples.noise_meta is not None:
        raise ValueError("samples already carry noise")
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    clean = samples.as_float()
    energy, sigma2 = noise_variance(clean, snr_db)
    noisy = clean + rng.normal(0.0, np.sqrt(sigma2), clean.size)
    meta = {"snr_db": float(snr_db), "sigma2": sigma2, "energy": energy, "count": int(clean.size)}
    return MagnitudeSamples(samples.design, noisy, meta)

"""Compactly supported generators and the randomized GHC certificate.

A generator is a function supported in the open interval ``(0, s)``.  Every
generator exposes two evaluation paths:

* ``gen(x)``: vectorised float64 evaluation on array-likes;
* ``gen.value(x)``: scalar evaluation; a Python float returns a Python
  number, a ``gmpy2.mpfr`` returns an ``mpfr``/``mpc`` computed at the active
  context precision.

Both paths return exactly zero outside ``(0, s)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ._precision import is_mp

KINDS = ("chirp", "chirp_real_part", "cubic_bspline", "tabulated", "modulated")
SYSTEM_LABELS = ("Xi_phi", "Lambda_phi_1", "Lambda_phi_2", "Lambda_varphi")


class Generator:
    """Base class; subclasses implement the three ``_eval*`` hooks on (0, s)."""

    kind: str = ""
    support: int = 0
    is_complex: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex if self.is_complex else float)
        inside = (x > 0) & (x < self.support)
        if inside.any():
            out[inside] = self._eval_array(x[inside])
        return out if out.ndim else out[()]

    def value(self, x):
        if is_mp(x):
            if 0 < x < self.support:
                return self._eval_mp(x)
            return mpc(0) if self.is_complex else mpfr(0)
        x = float(x)
        if 0.0 < x < self.support:
            return self._eval_scalar(x)
        return 0j if self.is_complex else 0.0

    @cached_property
    def peak(self) -> float:
        """Approximate sup |phi|; used as the scale for degeneracy tolerances."""
        grid = np.linspace(0.0, self.support, 8 * 1024 + 1)[1:-1]
        return float(np.max(np.abs(self(grid))))

    def to_spec(self) -> dict:
        raise NotImplementedError

    def _eval_array(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _eval_scalar(self, x: float):
        return self._eval_array(np.array([x]))[0].item()

    def _eval_mp(self, x):
        raise NotImplementedError


def _check_chirp_params(a: float, b: float) -> None:
    if a == 0:
        raise ValueError("chirp rate a must be nonzero")
    if b == 0:
        raise ValueError("chirp parameter b must be nonzero")


@dataclass(frozen=True, eq=True)
class Chirp(Generator):
    """Windowed linear chirp

    phi(x) = (2/3) sqrt(2 pi |b|) exp(-i a (x-2)^2 / (2b)) exp(-i p (x-2) / b)
             cos^2(pi (x-2) / 4)           on (0, 4).
    """

    a: float
    b: float
    p: float = 1.0
    kind = "chirp"
    support = 4
    is_complex = True

    def __post_init__(self):
        _check_chirp_params(self.a, self.b)

    @property
    def amplitude(self) -> float:
        return 2.0 / 3.0 * math.sqrt(2.0 * math.pi * abs(self.b))

    def _phase(self, u):
        return -(self.a * u * u / (2.0 * self.b) + self.p * u / self.b)

    def _eval_array(self, x):
        u = x - 2.0
        return self.amplitude * np.exp(1j * self._phase(u)) * np.cos(np.pi * u / 4.0) ** 2

    def _eval_scalar(self, x):
        u = x - 2.0
        return self.amplitude * cmath.exp(1j * self._phase(u)) * math.cos(math.pi * u / 4.0) ** 2

    def _mp_parts(self, x):
        pi = gmpy2.const_pi()
        b = mpfr(self.b)
        amp = 2 * gmpy2.sqrt(2 * pi * abs(b)) / 3
        u = x - 2
        theta = -(mpfr(self.a) * u * u / (2 * b) + mpfr(self.p) * u / b)
        env = gmpy2.cos(pi * u / 4)
        return theta, amp * env * env

    def _eval_mp(self, x):
        theta, mag = self._mp_parts(x)
        return mpc(gmpy2.cos(theta) * mag, gmpy2.sin(theta) * mag)

    def to_spec(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "p": self.p}


@dataclass(frozen=True, eq=True)
class ChirpRealPart(Chirp):
    """Real part of :class:`Chirp`; a real-valued generator on (0, 4)."""

    kind = "chirp_real_part"
    is_complex = False

    def _eval_array(self, x):
        u = x - 2.0
        return self.amplitude * np.cos(self._phase(u)) * np.cos(np.pi * u / 4.0) ** 2

    def _eval_scalar(self, x):
        u = x - 2.0
        return self.amplitude * math.cos(self._phase(u)) * math.cos(math.pi * u / 4.0) ** 2

    def _eval_mp(self, x):
        theta, mag = self._mp_parts(x)
        return gmpy2.cos(theta) * mag


@dataclass(frozen=True, eq=True)
class CubicBSpline(Generator):
    """Cardinal cubic B-spline with knots 0, 1, 2, 3, 4."""

    kind = "cubic_bspline"
    support = 4
    is_complex = False

    @staticmethod
    def _piece(x):
        if x < 1:
            return x * x * x / 6
        if x < 2:
            return (-3 * x * x * x + 12 * x * x - 12 * x + 4) / 6
        if x < 3:
            return (3 * x * x * x - 24 * x * x + 60 * x - 44) / 6
        y = 4 - x
        return y * y * y / 6

    def _eval_array(self, x):
        return np.array([self._piece(float(t)) for t in x])

    def _eval_scalar(self, x):
        return self._piece(x)

    def _eval_mp(self, x):
        return self._piece(x)

    def to_spec(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class Tabulated(Generator):
    """Piecewise-linear interpolant of values on the uniform grid j*s/(M-1).

    The endpoint values are kept for interpolation but the generator is still
    zero at and outside the support boundary.
    """

    values: np.ndarray
    support: int = 4
    kind = "tabulated"

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("tabulated generator needs at least two grid values")
        if self.support < 2:
            raise ValueError("support length must be an integer >= 2")
        if np.iscomplexobj(vals) and np.any(vals.imag != 0):
            vals = vals.astype(complex)
        else:
            vals = np.real(vals).astype(float)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "is_complex", np.iscomplexobj(vals))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.support, self.values.size)

    def _eval_array(self, x):
        g = self.grid
        if self.is_complex:
            return np.interp(x, g, self.values.real) + 1j * np.interp(x, g, self.values.imag)
        return np.interp(x, g, self.values)

    def _eval_mp(self, x):
        step = mpfr(self.support) / (self.values.size - 1)
        j = min(int(gmpy2.floor(x / step)), self.values.size - 2)
        w = x / step - j
        lo, hi = self.values[j], self.values[j + 1]
        if self.is_complex:
            return mpc(complex(lo)) * (1 - w) + mpc(complex(hi)) * w
        return mpfr(float(lo)) * (1 - w) + mpfr(float(hi)) * w

    def to_spec(self):
        if self.is_complex:
            vals = [[v.real, v.imag] for v in self.values.tolist()]
        else:
            vals = self.values.tolist()
        return {"kind": self.kind, "support": self.support, "values": vals}


@dataclass(frozen=True, eq=True)
class Modulated(Generator):
    """Linear-phase modulation exp(i alpha x) * base(x) of a real generator."""

    base: Generator
    alpha: float
    kind = "modulated"
    is_complex = True

    def __post_init__(self):
        if self.base.is_complex:
            raise ValueError("modulated generator needs a real-valued base")
        if self.alpha == 0:
            raise ValueError("modulation alpha must be nonzero")
        object.__setattr__(self, "support", self.base.support)

    def _eval_array(self, x):
        return np.exp(1j * self.alpha * x) * self.base._eval_array(x)

    def _eval_scalar(self, x):
        return cmath.exp(1j * self.alpha * x) * self.base._eval_scalar(x)

    def _eval_mp(self, x):
        theta = mpfr(self.alpha) * x
        r = self.base._eval_mp(x)
        return mpc(gmpy2.cos(theta) * r, gmpy2.sin(theta) * r)

    def to_spec(self):
        return {"kind": self.kind, "alpha": self.alpha, "base": self.base.to_spec()}


_SPEC_KEYS = {
    "chirp": {"a", "b", "p", "support"},
    "chirp_real_part": {"a", "b", "p", "support"},
    "cubic_bspline": {"support"},
    "tabulated": {"values", "support"},
    "modulated": {"alpha", "base", "support"},
}


def from_spec(spec: dict) -> Generator:
    """Build a generator from its config-file description.

    Raises ``ValueError`` for unknown kinds, unknown keys or invalid parameters.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("generator spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in _SPEC_KEYS:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {KINDS}")
    extra = set(spec) - _SPEC_KEYS[kind] - {"kind"}
    if extra:
        raise ValueError(f"unknown keys for {kind} generator: {sorted(extra)}")
    support = spec.get("support")
    if kind in ("chirp", "chirp_real_part", "cubic_bspline") and support not in (None, 4):
        raise ValueError(f"{kind} generator has support length 4, got {support}")
    if kind in ("chirp", "chirp_real_part"):
        try:
            a, b = float(spec["a"]), float(spec["b"])
        except KeyError as exc:
            raise ValueError(f"{kind} generator needs field {exc.args[0]!r}") from None
        cls = Chirp if kind == "chirp" else ChirpRealPart
        return cls(a, b, float(spec.get("p", 1.0)))
    if kind == "cubic_bspline":
        return CubicBSpline()
    if kind == "tabulated":
        raw = spec.get("values")
        if raw is None:
            raise ValueError("tabulated generator needs 'values'")
        vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v for v in raw]
        return Tabulated(np.array(vals), int(spec.get("support", 4)))
    base = from_spec(spec.get("base", {"kind": "cubic_bspline"}))
    return Modulated(base, float(spec["alpha"]))


@dataclass(frozen=True)
class FunctionSystem:
    """Ordered functions on (0, 1) whose linear independence is certified."""

    members: tuple[Callable[[np.ndarray], np.ndarray], ...]
    label: str

    def __len__(self):
        return len(self.members)

    def matrix(self, points: Sequence[float]) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        return np.stack([np.asarray(g(x)) for g in self.members], axis=1)


def build_system(gen: Generator, label: str) -> FunctionSystem:
    """Associated function system of ``gen`` restricted to (0, 1).

    ``Xi_phi`` lists Re(conj(phi) phi(.+k)) for k = 1..s-1, then
    Im(conj(phi) phi(.+k)) for k = 1..s-1, then |phi|^2.  The ``Lambda``
    systems are the s shifts phi(.+k) (or phi * conj(phi(.+k))), k = 0..s-1.
    """
    if label not in SYSTEM_LABELS:
        raise ValueError(f"unknown system label {label!r}")
    s = gen.support
    if label == "Lambda_varphi":
        if gen.is_complex:
            raise ValueError("Lambda_varphi needs a real-valued generator")
    elif not gen.is_complex:
        raise ValueError(f"{label} needs a complex-valued generator")

    def shift(k):
        return lambda x: gen(np.asarray(x) + k)

    if label in ("Lambda_varphi", "Lambda_phi_1"):
        members = [shift(k) for k in range(s)]
    elif label == "Lambda_phi_2":
        members = [lambda x, k=k: gen(x) * np.conj(gen(np.asarray(x) + k)) for k in range(s)]
    else:
        cross = [lambda x, k=k: np.conj(gen(x)) * gen(np.asarray(x) + k) for k in range(1, s)]
        members = [lambda x, g=g: np.real(g(x)) for g in cross]
        members += [lambda x, g=g: np.imag(g(x)) for g in cross]
        members.append(lambda x: np.abs(gen(x)) ** 2)
    return FunctionSystem(tuple(members), label)


@dataclass(frozen=True)
class GhcReport:
    tuples_tested: int
    max_abs_determinant: float
    passing_tuple: tuple[float, ...] | None
    verdict: str
    tol: float = field(default=1e-10)

    def to_dict(self) -> dict:
        return {
            "tuples_tested": self.tuples_tested,
            "max_abs_determinant": self.max_abs_determinant,
            "passing_tuple": list(self.passing_tuple) if self.passing_tuple else None,
            "verdict": self.verdict,
            "tol": self.tol,
        }


def _open_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    x = rng.random(size)
    while np.any(x == 0.0):
        zero = x == 0.0
        x[zero] = rng.random(int(zero.sum()))
    return x


def check_ghc(system: FunctionSystem, num_tuples: int = 100, seed: int = 0,
              tol: float = 1e-10) -> GhcReport:
    """Randomized linear-independence certificate for ``system`` on (0, 1).

    Draws point tuples uniformly from (0, 1)^m and evaluates the determinant
    of [g_j(x_i)] after dividing the matrix by its largest entry modulus.  The
    first tuple whose scaled determinant exceeds ``tol`` certifies linear
    independence; the measure-zero part of the condition is not checkable and
    is only reported as ``plausible``.
    """
    rng = np.random.default_rng(seed)
    m = len(system)
    best, tested = 0.0, 0
    for _ in range(num_tuples):
        pts = np.sort(_open_unit(rng, m))
        tested += 1
        mat = system.matrix(pts)
        scale = np.max(np.abs(mat))
        det = abs(np.linalg.det(mat / scale)) if scale > 0 else 0.0
        best = max(best, float(det))
        if det > tol:
            return GhcReport(tested, best, tuple(pts.tolist()), "plausible", tol)
    return GhcReport(tested, best, None, "inconclusive", tol)

"""Causal signals f = sum_k c_k phi(. - k) and their structural quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._precision import MPC, is_mp, lift_complex, lift_real
from .generators import CubicBSpline, Generator, Modulated


@dataclass(frozen=True, eq=False)
class CausalSignal:
    """Finite coefficient sequence c_0..c_N over a generator, with c_0 != 0.

    Real coefficients over a real generator give a real signal; anything else
    is stored as complex.
    """

    coeffs: np.ndarray
    generator: Generator

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if c[0] == 0:
            raise ValueError("causal signal needs c_0 != 0")
        if self.generator.is_complex or (np.iscomplexobj(c) and np.any(c.imag != 0)):
            c = c.astype(complex)
        else:
            c = np.real(c).astype(float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs)

    @property
    def max_index(self) -> int:
        """Largest k with c_k != 0."""
        return int(np.flatnonzero(self.coeffs)[-1])

    @property
    def support(self) -> int:
        return self.generator.support

    def __len__(self):
        return self.coeffs.size

    def __call__(self, x):
        return evaluate(self, x)

    def value(self, x):
        """Scalar evaluation; exact-precision when ``x`` is an ``mpfr``."""
        mp = is_mp(x)
        s = self.support
        lo = max(0, math.floor(float(x)) - s + 1)
        hi = min(len(self) - 1, math.floor(float(x)))
        total = lift_complex(0j, mp) if not self.is_real else lift_real(0.0, mp)
        for k in range(lo, hi + 1):
            total += _scalar(self.coeffs[k], mp) * self.generator.value(x - k)
        return total

    def with_coeffs(self, coeffs) -> "CausalSignal":
        return CausalSignal(np.asarray(coeffs), self.generator)


def evaluate(f: CausalSignal, x):
    """f(x) = sum_k c_k phi(x - k); vectorised over array-like ``x``."""
    if is_mp(x):
        return f.value(x)
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex if not f.is_real else float)
    for k, ck in enumerate(f.coeffs):
        if ck != 0:
            out = out + ck * f.generator(x - k)
    return out if out.ndim else out[()]


def index_set(n: int, s: int) -> range:
    """Indices k whose shifted generator overlaps (n, n+1), excluding k = n."""
    if n < 1:
        raise ValueError(f"index set needs n >= 1, got {n}")
    if s < 2:
        raise ValueError(f"support length must be >= 2, got {s}")
    return range(0, n) if n <= s - 1 else range(n - s + 1, n)


def aux_v(coeffs, gen: Generator, n: int, x):
    """v_n(x) = sum_{k in I_n} c_k phi(n + x - k) for x in (0, 1).

    Only the coefficients indexed by ``index_set(n, s)`` are read, so
    ``coeffs`` may be the partial sequence c_0..c_{n-1} of a reconstruction.
    It satisfies f(n + x) = v_n(x) + c_n phi(x).
    """
    idx = index_set(n, gen.support)
    if len(coeffs) < idx.stop:
        raise ValueError(f"aux_v for n={n} needs c_0..c_{idx.stop - 1}, got {len(coeffs)} coefficients")
    if isinstance(x, np.ndarray):
        return sum(coeffs[k] * gen(n + x - k) for k in idx)
    mp = is_mp(x)
    total = lift_complex(0j, mp) if gen.is_complex else lift_real(0.0, mp)
    for k in idx:
        total = total + _scalar(coeffs[k], mp) * gen.value(n + x - k)
    return total


def _scalar(c, mp: bool):
    """Python or gmpy2 scalar from a possibly-numpy coefficient."""
    if isinstance(c, np.generic):
        c = c.item()
    if not mp:
        return c
    return lift_complex(c, True) if isinstance(c, (complex, MPC)) else lift_real(c, True)


def max_gap(f) -> int:
    """Longest run of zero coefficients c_i..c_{i+g-1}, i >= 1, followed by a nonzero.

    Accepts a :class:`CausalSignal` or a plain coefficient sequence.  Trailing
    zeros are not a gap.
    """
    c = np.asarray(f.coeffs if isinstance(f, CausalSignal) else f)
    best = run = 0
    for ck in c[1:]:
        if ck == 0:
            run += 1
        else:
            best = max(best, run)
            run = 0
    return best


def is_nonseparable_candidate(f: CausalSignal) -> bool:
    """Necessary condition for nonseparability: max gap < s - 1.

    ``False`` proves separability; ``True`` does not prove the converse.
    """
    return max_gap(f) < f.support - 1


def ambiguous_pair(varphi: Generator | None = None, alpha: float = 1.0, beta: float = 0.0,
                   N: int = 2, free: complex = 1.0) -> tuple[CausalSignal, CausalSignal]:
    """Two signals with equal magnitudes that are not unimodular multiples.

    Over phi = exp(i alpha .) varphi, take c_0 = 1, c_1 = exp(i beta) and
    c_2..c_N = ``free``; the partner has coefficients exp(2 i alpha k) conj(c_k).
    """
    varphi = varphi if varphi is not None else CubicBSpline()
    if N < 2:
        raise ValueError("N must be at least 2")
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if abs(math.sin(alpha - beta)) < 1e-12:
        raise ValueError("alpha - beta must not be a multiple of pi")
    phi = Modulated(varphi, alpha)
    c = np.full(N + 1, complex(free))
    c[0] = 1.0
    c[1] = np.exp(1j * beta)
    k = np.arange(N + 1)
    partner = np.exp(2j * alpha * k) * np.conj(c)
    return CausalSignal(c, phi), CausalSignal(partner, phi)


def theta_grid_residual(c, c_tilde, num: int = 36000) -> float:
    """min over a uniform theta grid of ||c - exp(i theta) c_tilde|| / ||c||."""
    c = np.asarray(c, dtype=complex)
    c_tilde = np.asarray(c_tilde, dtype=complex)
    theta = np.linspace(0.0, 2.0 * np.pi, num, endpoint=False)
    diffs = c[None, :] - np.exp(1j * theta)[:, None] * c_tilde[None, :]
    return float(np.min(np.linalg.norm(diffs, axis=1)) / np.linalg.norm(c))

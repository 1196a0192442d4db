"""Phase decoding and coefficient recovery from magnitude samples.

For each unit interval n the unknown coefficient c_n enters
f(n + x) = v_n(x) + c_n phi(x) linearly, where v_n only involves coefficients
already recovered.  Two magnitudes on (n, n+1) give a quadratic whose roots
contain the phase z of f(n + x); a third magnitude gives a second quadratic,
and the root the two share is the phase.  Real generators need only two
samples per interval, because the phase is a sign and the quadratic's roots
multiply to one.

All arithmetic is scalar and runs on Python floats or on gmpy2 numbers at a
chosen precision.  The recursion amplifies rounding error from one interval
to the next, so noiseless experiments on long signals need extended
precision to reach errors far below float64 resolution.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from ._precision import MPC, csqrt, is_mp, lift_complex, lift_real, phase, working_precision
from .generators import Generator
from .sampling import MagnitudeSamples
from .signals import CausalSignal, aux_v

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate_sample"
STATUS_AMBIGUOUS = "ambiguous_root"


class ReconstructionError(Exception):
    status = ""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DegenerateSampleError(ReconstructionError):
    """phi vanishes (to tolerance) at a point the recursion divides by."""

    status = STATUS_DEGENERATE


class AmbiguousRootError(ReconstructionError):
    """The phase quadratic is degenerate or its common root is not unique."""

    status = STATUS_AMBIGUOUS


@dataclass(frozen=True)
class ReconOptions:
    """Knobs of the recursion.

    ``anchor`` picks which sample of an interval carries the decoded phase:
    ``"max_phi"`` uses the point where |phi| is largest, ``"first"`` the
    first drawn.  ``tie_ratio`` is the margin the winning cross-pair root
    distance must keep below the runner-up; 1.0 is a plain argmin.
    ``precision`` is the gmpy2 mantissa size, ``None`` for float64.
    """

    initial_phase: float = 0.0
    anchor: str = "max_phi"
    tol: float = 1e-12
    tie_ratio: float = 0.5
    coincide_tol: float = 1e-6
    precision: int | None = None

    def __post_init__(self):
        if self.anchor not in ("max_phi", "first"):
            raise ValueError(f"unknown anchor rule {self.anchor!r}")
        if not 0 < self.tie_ratio <= 1:
            raise ValueError("tie_ratio must lie in (0, 1]")
        if self.tol < 0 or self.coincide_tol < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class QuadraticData:
    """Coefficients of (A + Bi) z^2 - C z + (A - Bi) = 0.

    ``scale`` bounds the size of the terms summed into ``ab``; it sets the
    yardstick for calling ``ab`` zero.
    """

    ab: complex
    c: float
    scale: float = 1.0


@dataclass(eq=False)
class ReconstructionResult:
    """Recovered c_0..c_m (m = last decoded interval) plus per-step records.

    ``phases`` follows :meth:`SampleDesign.locations` for the samples that
    were consumed.  On failure ``coeffs`` holds what was recovered before
    ``failed_step``.
    """

    coeffs: np.ndarray
    generator: Generator
    phases: list[float]
    status: str = STATUS_OK
    failed_step: int | None = None
    message: str = ""
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def signal(self) -> CausalSignal:
        return CausalSignal(self.coeffs, self.generator)

    @property
    def selected_roots(self) -> list[complex]:
        return [d["selected"] for d in self.diagnostics]

    def leading(self, k: int) -> np.ndarray:
        """c_0..c_{k-1}, zero-padded if fewer were recovered."""
        out = np.zeros(k, dtype=self.coeffs.dtype)
        m = min(k, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def _conj(z):
    return z.conjugate()


def _quad(mx, my, px, py, vx, vy) -> QuadraticData:
    """Quadratic data from magnitudes, phi values and v values at x and y."""
    px2, py2 = _abs2(px), _abs2(py)
    t1 = _conj(px) * py * _conj(vy)
    t2 = _conj(vx) * py2
    ab = mx / px2 * (t1 - t2)
    c = (my * my - _abs2(vy) + 2 * (vx * _conj(vy) * py / px).real
         - py2 / px2 * (mx * mx + _abs2(vx)))
    scale = float(abs(mx) / px2 * (abs(t1) + abs(t2)))
    return QuadraticData(ab, c, scale)


def _quad_real(mx, my, px, py, vx, vy):
    px2, py2 = px * px, py * py
    t1 = px * py * vy
    t2 = vx * py2
    a = mx / px2 * (t1 - t2)
    c = my * my - vy * vy + 2 * vx * vy * py / px - py2 / px2 * (mx * mx + vx * vx)
    return a, c, float(abs(mx) / px2 * (abs(t1) + abs(t2)))


def _unimodular(theta: float, mp: bool):
    """exp(i theta), of modulus one to working precision."""
    if not mp:
        return cmath.exp(1j * theta)
    t = mpfr(theta)
    return mpc(gmpy2.cos(t), gmpy2.sin(t))


def _check_phi(px, gen: Generator, tol: float, step):
    if abs(px) <= tol * gen.peak:
        raise DegenerateSampleError(f"|phi| vanishes at an anchor sample (step {step})", step)


def _lift_coeffs(coeffs, mp: bool):
    out = []
    for c in coeffs:
        c = c.item() if isinstance(c, np.generic) else c
        out.append(lift_complex(c, mp) if isinstance(c, (complex, MPC)) else lift_real(c, mp))
    return out


def quad_data(coeffs, gen: Generator, n: int, x, y, mag_x, mag_y, tol: float = 1e-12) -> QuadraticData:
    """A + Bi and C for the pair (x, y) on interval n.

    ``coeffs`` must contain c_k for every k in the index set of n.
    """
    mp = is_mp(x)
    coeffs = _lift_coeffs(coeffs, mp)
    px, py = gen.value(x), gen.value(y)
    _check_phi(px, gen, tol, n)
    vx, vy = aux_v(coeffs, gen, n, x), aux_v(coeffs, gen, n, y)
    return _quad(mag_x, mag_y, px, py, vx, vy)


def quad_data_real(coeffs, gen: Generator, n: int, x, y, mag_x, mag_y, tol: float = 1e-12):
    """(A, C) of the real-path quadratic A z^2 - C z + A = 0 on interval n."""
    if gen.is_complex:
        raise ValueError("the real path needs a real generator")
    mp = is_mp(x)
    coeffs = _lift_coeffs(coeffs, mp)
    px, py = gen.value(x), gen.value(y)
    _check_phi(px, gen, tol, n)
    vx, vy = aux_v(coeffs, gen, n, x), aux_v(coeffs, gen, n, y)
    a, c, _ = _quad_real(mag_x, mag_y, px, py, vx, vy)
    return a, c


def solve_phase_quadratic(q: QuadraticData, tol: float = 1e-12, step: int | None = None):
    """Both roots of (A + Bi) z^2 - C z + (A - Bi) = 0.

    The larger-magnitude numerator is formed first and the partner root comes
    from the product (A - Bi)/(A + Bi), which avoids cancellation.  A negative
    discriminant (the noiseless case) takes the principal complex root.
    """
    ab, c = q.ab, q.c
    if abs(ab) <= tol * q.scale or ab == 0:
        raise AmbiguousRootError(f"|A + Bi| vanishes (step {step})", step)
    mp = is_mp(ab) or is_mp(c)
    disc = c * c - 4 * _abs2(ab)
    d = csqrt(lift_complex(complex(disc) if not mp else disc, mp))
    num = c + d if abs(c + d) >= abs(c - d) else c - d
    z1 = num / (2 * ab)
    z2 = _conj(ab) / (ab * z1)
    return z1, z2


def select_root(pair_xy2, pair_xy3, tie_ratio: float = 0.5, coincide_tol: float = 1e-6,
                step: int | None = None):
    """The root of the first pair closest to the second pair, scaled to |z| = 1.

    Returns ``(z, best, runner_up)``.  If the first pair's roots coincide
    (a double root, as for real data) either one is the answer.  Otherwise
    the winner's distance must be at most ``tie_ratio`` times the runner-up's.
    """
    z1, z2 = pair_xy2
    z3, z4 = pair_xy3
    d1 = min(abs(z1 - z3), abs(z1 - z4))
    d2 = min(abs(z2 - z3), abs(z2 - z4))
    if abs(z1 - z2) <= coincide_tol:
        z, best, runner = (z1 + z2) / 2, min(d1, d2), max(d1, d2)
    else:
        (best, z), (runner, _) = sorted([(d1, z1), (d2, z2)], key=lambda t: t[0])
        if best > tie_ratio * runner:
            raise AmbiguousRootError(
                f"no unique common root: distances {float(best):.3g} vs {float(runner):.3g} (step {step})", step)
    if z == 0:
        raise AmbiguousRootError(f"selected root is zero (step {step})", step)
    return z / abs(z), float(best), float(runner)


def recover_coefficient(v_anchor, phi_anchor, mag_anchor, z):
    """c_n = (z |f(n + t)| - v_n(t)) / phi(t) at the anchor sample t."""
    return (z * mag_anchor - v_anchor) / phi_anchor


def sign_decode(a_re, c_re, scale: float = 0.0, tol: float = 1e-12, step: int | None = None) -> int:
    """sgn(C / A); the sign of f at the anchor sample."""
    if a_re == 0 or abs(a_re) <= tol * scale:
        raise AmbiguousRootError(f"A vanishes on the real path (step {step})", step)
    r = c_re / a_re
    if r == 0:
        raise AmbiguousRootError(f"C vanishes on the real path (step {step})", step)
    return 1 if r > 0 else -1


def _order(gen: Generator, pts, opts: ReconOptions):
    """Point order with the anchor first; phi values in the same order."""
    phis = [gen.value(t) for t in pts]
    idx = list(range(len(pts)))
    if opts.anchor == "max_phi":
        a = max(idx, key=lambda j: abs(phis[j]))
        idx = [a] + [j for j in idx if j != a]
    return idx, phis


def decode_step_complex(coeffs: list, gen: Generator, n: int, pts, mags, opts: ReconOptions):
    """One recursion step on interval n from three samples.

    Returns ``(c_n, phases, record)``; phases follow the order of ``pts``.
    """
    idx, phis = _order(gen, pts, opts)
    a, j2, j3 = idx
    vs = [aux_v(coeffs, gen, n, t) for t in pts]
    _check_phi(phis[a], gen, opts.tol, n)
    q2 = _quad(mags[a], mags[j2], phis[a], phis[j2], vs[a], vs[j2])
    q3 = _quad(mags[a], mags[j3], phis[a], phis[j3], vs[a], vs[j3])
    r2 = solve_phase_quadratic(q2, opts.tol, n)
    r3 = solve_phase_quadratic(q3, opts.tol, n)
    z, best, runner = select_root(r2, r3, opts.tie_ratio, opts.coincide_tol, n)
    cn = recover_coefficient(vs[a], phis[a], mags[a], z)
    phases = [phase(vs[j] + cn * phis[j]) for j in range(len(pts))]
    phases[a] = phase(z)
    record = {
        "n": n,
        "anchor": a,
        "abs_ab": [float(abs(q2.ab)), float(abs(q3.ab))],
        "discriminant": float(q2.c * q2.c - 4 * _abs2(q2.ab)),
        "roots": [complex(r) for r in (*r2, *r3)],
        "root_distance": best,
        "runner_up_distance": runner,
        "selected": complex(z),
    }
    return cn, phases, record


def decode_step_real(coeffs: list, gen: Generator, n: int, pts, mags, opts: ReconOptions):
    """One real-path step on interval n from two samples."""
    idx, phis = _order(gen, pts, opts)
    a, b = idx
    vs = [aux_v(coeffs, gen, n, t) for t in pts]
    _check_phi(phis[a], gen, opts.tol, n)
    ar, cr, scale = _quad_real(mags[a], mags[b], phis[a], phis[b], vs[a], vs[b])
    sign = sign_decode(ar, cr, scale, opts.tol, n)
    z1, z2 = solve_phase_quadratic(QuadraticData(ar, cr, scale), opts.tol, n)
    cn = recover_coefficient(vs[a], phis[a], mags[a], sign)
    phases = [phase(vs[j] + cn * phis[j]) for j in range(len(pts))]
    phases[a] = 0.0 if sign > 0 else float(np.pi)
    record = {
        "n": n,
        "anchor": a,
        "a": float(ar),
        "c": float(cr),
        "roots": [complex(z1), complex(z2)],
        "root_product": complex(z1 * z2),
        "selected": float(sign),
    }
    return cn, phases, record


def _run(samples: MagnitudeSamples, gen: Generator, opts: ReconOptions, mode: str) -> ReconstructionResult:
    design = samples.design
    need = 3 if mode == "complex" else 2
    if design.n_max > 0 and design.density < need:
        raise ValueError(f"{mode} reconstruction needs density {need}, got {design.density}")
    if mode == "real" and gen.is_complex:
        raise ValueError("real reconstruction needs a real generator")
    mp = opts.precision is not None
    out_dtype = complex if mode == "complex" else float
    coeffs: list = []
    phases: list[float] = []
    diags: list[dict] = []
    with working_precision(opts.precision):
        num = mpfr if mp else float
        t0 = num(design.t0)
        m0 = num(samples.value0)
        p0 = gen.value(t0)
        try:
            _check_phi(p0, gen, opts.tol, 0)
            if mode == "complex":
                u0 = _unimodular(opts.initial_phase, mp)
            else:
                u0 = lift_real(1.0 if opts.initial_phase == 0 else -1.0, mp)
            coeffs.append(u0 * m0 / p0)
            phases.append(phase(u0))
            step = decode_step_complex if mode == "complex" else decode_step_real
            for n in range(1, design.n_max + 1):
                offs, mags = samples.interval(n)
                pts = [num(t) for t in offs[:need]]
                mags = [num(m) for m in mags[:need]]
                cn, ph, rec = step(coeffs, gen, n, pts, mags, opts)
                coeffs.append(cn)
                phases.extend(ph)
                diags.append(rec)
        except ReconstructionError as exc:
            return ReconstructionResult(
                np.array([complex(c) if mode == "complex" else float(c) for c in coeffs], dtype=out_dtype),
                gen, phases, exc.status, exc.step, str(exc), diags)
    arr = np.array([complex(c) if mode == "complex" else float(c) for c in coeffs], dtype=out_dtype)
    return ReconstructionResult(arr, gen, phases, STATUS_OK, None, "", diags)


def reconstruct_complex(samples: MagnitudeSamples, gen: Generator,
                        opts: ReconOptions | None = None) -> ReconstructionResult:
    """Recover c_0..c_{n_max} up to one unimodular factor from density-3 samples.

    Intervals beyond the last nonzero coefficient decode coefficients that
    come out (numerically) zero, so a signal with N + 1 coefficients needs
    samples up to interval N + s - 1 and its result is ``leading(N + 1)``.
    """
    return _run(samples, gen, opts or ReconOptions(), "complex")


def reconstruct_real(samples: MagnitudeSamples, gen: Generator,
                     opts: ReconOptions | None = None) -> ReconstructionResult:
    """Recover real c_0..c_{n_max} up to a global sign from density-2 samples.

    ``opts.initial_phase`` 0 assigns c_0 > 0 relative to phi(t0); any other
    value flips it.
    """
    return _run(samples, gen, opts or ReconOptions(), "real")


def reconstruct_local(samples: MagnitudeSamples, gen: Generator, opts: ReconOptions | None = None,
                      mode: str = "complex") -> ReconstructionResult:
    """Recover c_0..c_{L-1}, hence f on [0, L], from samples on intervals 0..L-1."""
    if mode == "complex":
        return reconstruct_complex(samples, gen, opts)
    if mode == "real":
        return reconstruct_real(samples, gen, opts)
    raise ValueError(f"mode must be 'complex' or 'real', got {mode!r}")

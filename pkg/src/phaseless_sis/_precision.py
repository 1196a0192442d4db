"""Scalar arithmetic helpers that work for both float64 and gmpy2 values.

The reconstruction recursion amplifies rounding error from one unit interval
to the next, so noiseless experiments can opt into multiple-precision
arithmetic.  Everything below dispatches on the operand type: Python
``float``/``complex`` use :mod:`cmath`, ``mpfr``/``mpc`` use :mod:`gmpy2`
under whatever context precision is active.
"""

from __future__ import annotations

import cmath
import contextlib
from typing import Iterator

import gmpy2
from gmpy2 import mpc, mpfr

MPFR = type(mpfr(0))
MPC = type(mpc(0))
MP_TYPES = (MPFR, MPC)


def is_mp(x) -> bool:
    return isinstance(x, MP_TYPES)


@contextlib.contextmanager
def working_precision(bits: int | None) -> Iterator[None]:
    """Run the body with ``bits`` of mantissa, or unchanged when ``None``."""
    if bits is None:
        yield
        return
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield


def lift_real(x, mp: bool):
    return mpfr(x) if mp and not is_mp(x) else x


def lift_complex(z, mp: bool):
    if not mp:
        return z
    return z if isinstance(z, MPC) else mpc(z)


def csqrt(z):
    if is_mp(z):
        return gmpy2.sqrt(mpc(z))
    return cmath.sqrt(z)


def phase(z) -> float:
    """Argument of ``z`` as a float in (-pi, pi]; the phase of zero is 0."""
    z = complex(z)
    return cmath.phase(z) if z != 0 else 0.0

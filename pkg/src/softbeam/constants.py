"""Physical constants and Bessel constants shared across modules."""

from functools import lru_cache

import numpy as np
from scipy import constants as _c
from scipy import optimize, special

HBAR = _c.hbar
K_B = _c.k
C_LIGHT = _c.c
EPS0 = _c.epsilon_0
E_CHARGE = _c.e
H_PLANCK = _c.h
ALPHA_FS = _c.fine_structure
TWO_PI = 2.0 * np.pi


def hz_to_rad(f):
    """Convert an ordinary frequency in Hz to an angular one in rad/s."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def rad_to_hz(w):
    """Convert an angular frequency in rad/s to Hz."""
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


@lru_cache(maxsize=None)
def bessel_x11() -> float:
    """First positive zero of J1, refined by Newton iteration."""
    x0 = float(special.jn_zeros(1, 1)[0])
    return float(optimize.newton(lambda x: special.j1(x), x0,
                                 fprime=lambda x: special.jvp(1, x), tol=1e-14))


@lru_cache(maxsize=None)
def bessel_xstar() -> float:
    """First positive root of J0(x) = J2(x), where |J1| is maximal.

    From the recurrence J0 - J2 = 2 J1', this is the first zero of J1'.
    """
    x0 = float(special.jnp_zeros(1, 1)[0])
    return float(optimize.newton(lambda x: special.j0(x) - special.jv(2, x), x0,
                                 tol=1e-14))

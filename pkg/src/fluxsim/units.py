"""Unit conversions.

All internal frequencies are angular (rad/ns) and all times are ns.
User-facing configs quote plain frequencies nu = omega / 2pi in GHz or MHz,
converted once at the boundary.
"""

import math

TWO_PI = 2.0 * math.pi


def ghz(nu):
    """Plain frequency in GHz -> angular frequency in rad/ns."""
    return TWO_PI * nu


def mhz(nu):
    """Plain frequency in MHz -> angular frequency in rad/ns."""
    return TWO_PI * 1e-3 * nu


def to_ghz(omega):
    """Angular frequency in rad/ns -> plain frequency in GHz."""
    return omega / TWO_PI


def to_mhz(omega):
    """Angular frequency in rad/ns -> plain frequency in MHz."""
    return omega / TWO_PI * 1e3

"""Closed-form reference results for the double-scattering signal.

Everything in this module is an explicit function of the on-resonance
saturation parameter s and of the reduced Rabi frequency; nothing touches
the master-equation machinery.  Intensities are quoted in the same
normalized units as IntensityTerms.normalized(): the squared coupling
modulus and the orientation factor are divided out, so the isotropic
configuration average multiplies every term by 2/15.
"""

from __future__ import annotations

import numpy as np


def saturation_polynomials(s):
    """Polynomials (R1, R2, P) governing the crossed and ladder totals."""
    s = np.asarray(s, dtype=float)
    r1 = (2.0 / 9.0) * (
        6912.0 * s + 3168.0 * s**2 + 264.0 * s**3 + 20.0 * s**4 + s**5
    )
    r2 = (1.0 / 3.0) * (1152.0 * s + 528.0 * s**2 + 132.0 * s**3 + 7.0 * s**4)
    p = (1.0 + s) ** 2 * (12.0 + s) * (32.0 + 20.0 * s + s**2)
    return r1, r2, p


def total_terms(s):
    """Normalized (ladder_total, crossed_total) as functions of s."""
    r1, r2, p = saturation_polynomials(s)
    return r2 / p, r1 / ((4.0 + s) * p)


def elastic_terms(s):
    """Normalized (ladder_elastic, crossed_elastic); the two coincide."""
    s = np.asarray(s, dtype=float)
    value = s / (1.0 + s) ** 4
    return value, value


def inelastic_terms(s):
    """Normalized (ladder_inelastic, crossed_inelastic)."""
    s = np.asarray(s, dtype=float)
    _, _, p = saturation_polynomials(s)
    crossed = (
        20736.0 * s**2
        + 23424.0 * s**3
        + 7108.0 * s**4
        + 601.0 * s**5
        + 44.0 * s**6
        + 2.0 * s**7
    ) / (9.0 * (1.0 + s) ** 2 * (4.0 + s) * p)
    ladder = (
        2016.0 * s**2 + 2244.0 * s**3 + 796.0 * s**4 + 146.0 * s**5 + 7.0 * s**6
    ) / (3.0 * (1.0 + s) ** 2 * p)
    return ladder, crossed


def enhancement_factor(s):
    """Backscattering enhancement 1 + crossed/ladder.

    Tends to 2 for s -> 0 (perfect two-wave contrast) and to 23/21 for
    s -> infinity.
    """
    s = np.asarray(s, dtype=float)
    r1, r2, _ = saturation_polynomials(s)
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = 1.0 + r1 / ((4.0 + s) * r2)
    alpha = np.where(s == 0, 2.0, alpha)
    return alpha if alpha.ndim else float(alpha)


def lineshape(x1, x2):
    """Normalized Lorentzian kernel x1 / (pi (x1^2 + x2^2)).

    With x1 the half width and x2 the offset this is an even unit-area
    peak; swapping the arguments turns it into the matching dispersive
    (odd) profile.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any((x1 == 0) & (x2 == 0)):
        raise ValueError("lineshape arguments must not both vanish")
    return x1 / (np.pi * (x1**2 + x2**2))


def weak_field_spectra(nu, omega, gamma: float = 1.0):
    """Leading weak-drive inelastic spectra (ladder, crossed).

    Valid to leading order (omega/gamma)^4; the ladder integrates to
    (7/16)(omega/gamma)^4 and the crossed term to (3/8)(omega/gamma)^4.
    """
    nu = np.asarray(nu, dtype=float)
    drive4 = (omega / gamma) ** 4
    lorsq = gamma**2 + nu**2
    ladder = drive4 * gamma**3 * (2.0 * gamma**2 + nu**2) / (2.0 * np.pi * lorsq**2) / lorsq
    crossed = drive4 * gamma**5 / (np.pi * lorsq**3)
    return ladder, crossed


def strong_field_spectra(nu, omega, gamma: float = 1.0):
    """Strong-drive asymptotic inelastic spectra (ladder, crossed).

    Sum of Lorentzian resonances at 0, +-omega/2, +-omega and +-2 omega
    carrying weights of order (gamma/omega)^2, plus a dispersive doublet
    at +-omega/2 of order (gamma/omega)^3 in the crossed term.  Total
    weights: 14/3 (gamma/omega)^2 ladder, 4/9 (gamma/omega)^2 crossed.
    """
    nu = np.asarray(nu, dtype=float)
    g, w = gamma, omega
    eps2 = (g / w) ** 2

    ladder = eps2 * (
        0.5 * lineshape(g, nu)
        + 0.25 * lineshape(3 * g, nu)
        + (1.0 / 72.0) * (lineshape(3 * g, nu - 2 * w) + lineshape(3 * g, nu + 2 * w))
        + (1.0 / 9.0) * (lineshape(1.5 * g, nu - w) + lineshape(1.5 * g, nu + w))
        + (5.0 / 18.0) * (lineshape(2.5 * g, nu - w) + lineshape(2.5 * g, nu + w))
        + (14.0 / 9.0) * (lineshape(1.5 * g, nu - 0.5 * w) + lineshape(1.5 * g, nu + 0.5 * w))
    )
    crossed = eps2 * (
        0.5 * lineshape(2 * g, nu)
        + 0.25 * lineshape(3 * g, nu)
        + (1.0 / 72.0) * (lineshape(3 * g, nu - 2 * w) + lineshape(3 * g, nu + 2 * w))
        - (1.0 / 6.0) * (lineshape(2.5 * g, nu - w) + lineshape(2.5 * g, nu + w))
    ) + eps2 * (g / w) * (208.0 / 45.0) * (
        lineshape(nu + 0.5 * w, 1.5 * g) - lineshape(nu - 0.5 * w, 1.5 * g)
    )
    return ladder, crossed

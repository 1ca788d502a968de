"""Geometry, polarization and parameter types for two-atom backscattering.

Conventions used throughout the package:

* The laser propagates along +z and is right-circularly polarized, so its
  polarization vector is the q = +1 helicity unit vector.  Helicity vectors
  follow the Condon-Shortley phase convention and are orthonormal under the
  conjugated dot product, e_q* . e_q' = delta_qq'.
* Backscattered light is analyzed in the helicity-preserving channel, which
  in terms of fixed vectors means detection along the q = -1 unit vector.
* All rates are quoted in units of the single-level radiative half width
  gamma; the excited-state population decay rate is 2*gamma.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

SQRT2 = math.sqrt(2.0)

#: Minimum admissible reduced interatomic distance.  Below roughly one
#: wavelength the far-field (radiation zone) form of the exchange coupling
#: stops being a controlled approximation.
MIN_K0R = 10.0

#: Below this reduced distance a warning is issued: far-field corrections
#: of relative order 1/(k0 r) are no longer comfortably small.
FARFIELD_SAFE_K0R = 50.0


def helicity_unit_vector(q: int) -> np.ndarray:
    """Return the helicity basis vector e_q (q in {-1, 0, +1}) in Cartesian
    components, Condon-Shortley phases."""
    if q == 1:
        return np.array([-1.0, -1.0j, 0.0]) / SQRT2
    if q == 0:
        return np.array([0.0, 0.0, 1.0], dtype=complex)
    if q == -1:
        return np.array([1.0, -1.0j, 0.0]) / SQRT2
    raise ValueError(f"helicity index must be -1, 0 or +1, got {q}")


def transverse_projector(n_hat: np.ndarray) -> np.ndarray:
    """Projector onto the plane transverse to the unit vector n_hat,
    Delta = 1 - n n."""
    n = np.asarray(n_hat, dtype=float)
    if n.shape != (3,):
        raise ValueError("n_hat must be a 3-vector")
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("n_hat must be a unit vector (|n| - 1 within 1e-9)")
    return np.eye(3) - np.outer(n, n)


def exchange_coupling(k0_r: float) -> complex:
    """Far-field photon-exchange coupling between the two atoms.

    Scalar prefactor of the transverse projector in the exchange part of
    the master equation: (3i / (2 k0 r)) * exp(i k0 r).  Dimensionless;
    modulus 3/(2 k0 r).
    """
    if k0_r < MIN_K0R:
        raise ValueError(
            f"k0_r = {k0_r} below the far-field validity floor {MIN_K0R}"
        )
    if k0_r < FARFIELD_SAFE_K0R:
        warnings.warn(
            f"k0_r = {k0_r} is close to the far-field validity floor; "
            "near-field corrections are only suppressed by 1/(k0 r)",
            stacklevel=2,
        )
    return (1.5j / k0_r) * complex(math.cos(k0_r), math.sin(k0_r))


def transverse_helicity_element(n_hat: np.ndarray) -> complex:
    """(+1, +1) helicity element of the transverse projector, without
    conjugation of the left vector: e_{+1} . Delta(n) . e_{+1}.

    Equals -(n_x + i n_y)^2 / 2.  Its squared modulus carries the entire
    orientation dependence of the helicity-preserving double-scattering
    signal; the isotropic average of |.|^2 is 2/15.
    """
    n = np.asarray(n_hat, dtype=float)
    e_p = helicity_unit_vector(+1)
    return e_p @ transverse_projector(n) @ e_p


@dataclass(frozen=True)
class PhysParams:
    """Single-atom drive parameters.  omega is the Rabi frequency of the
    laser-driven ground-to-m=+1 transition, delta the laser detuning."""

    omega: float
    gamma: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")

    @property
    def saturation(self) -> float:
        """Saturation parameter s = omega^2 / (2 (gamma^2 + delta^2))."""
        return self.omega**2 / (2.0 * (self.gamma**2 + self.delta**2))

    @classmethod
    def from_saturation(cls, s: float, gamma: float = 1.0, delta: float = 0.0) -> "PhysParams":
        if s < 0:
            raise ValueError("saturation must be non-negative")
        omega = math.sqrt(2.0 * s * (gamma**2 + delta**2))
        return cls(omega=omega, gamma=gamma, delta=delta)


@dataclass(frozen=True)
class Configuration:
    """Geometry of one realization of the atom pair.

    n_hat is the interatomic direction, k0_r the reduced distance between
    the atoms, ell_k0 the reduced mean distance used by the configuration
    average, theta the detection angle away from exact backscattering and
    phi_L the accumulated laser phase difference between the two atoms.
    """

    n_hat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    k0_r: float = 1000.0
    ell_k0: float = 1000.0
    theta: float = 0.0
    phi_L: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.n_hat, dtype=float)
        if n.shape != (3,):
            raise ValueError("n_hat must be a 3-vector")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("n_hat must be a unit vector (|n| - 1 within 1e-12)")
        object.__setattr__(self, "n_hat", n)
        if self.k0_r < MIN_K0R:
            raise ValueError(
                f"k0_r = {self.k0_r} below the far-field validity floor {MIN_K0R}"
            )
        if self.k0_r < FARFIELD_SAFE_K0R:
            warnings.warn(
                f"k0_r = {self.k0_r} is close to the far-field validity floor",
                stacklevel=2,
            )
        if self.ell_k0 < MIN_K0R:
            raise ValueError("ell_k0 below the far-field validity floor")
        if self.theta < 0:
            raise ValueError("theta must be non-negative")

    @property
    def coupling(self) -> complex:
        """Exchange coupling evaluated at this configuration's distance."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return exchange_coupling(self.k0_r)

    @property
    def geometry_weight(self) -> float:
        """|e_{+1} . Delta(n) . e_{+1}|^2 for this orientation."""
        return abs(transverse_helicity_element(self.n_hat)) ** 2

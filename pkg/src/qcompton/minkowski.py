"""Four-vector algebra and Compton kinematics.

Metric convention diag(1, -1, -1, -1).  The drive propagates along +z;
arbitrary electron incidence is handled by rotating the electron
direction, never the field.  All components are energies in eV
(natural units).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import ELECTRON_MASS_EV


class KinematicallyForbidden(ValueError):
    """Raised when a requested configuration lies above the kinematic ceiling."""


@dataclass(frozen=True)
class FourVector:
    """Real four-vector (t, x, y, z), components in eV."""

    t: float
    x: float
    y: float
    z: float

    def __add__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.t + other.t, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.t - other.t, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __mul__(self, c: float) -> "FourVector":
        return FourVector(c * self.t, c * self.x, c * self.y, c * self.z)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ComplexFourVector:
    """Complex four-vector, used for polarization (dimensionless components)."""

    t: complex
    x: complex
    y: complex
    z: complex

    def conjugate(self) -> "ComplexFourVector":
        return ComplexFourVector(self.t.conjugate(), self.x.conjugate(),
                                 self.y.conjugate(), self.z.conjugate())


@dataclass(frozen=True)
class ElectronState:
    """Initial electron: four-momentum, Lorentz factor and flight direction."""

    p: FourVector
    gamma: float
    direction: tuple[float, float, float]


@dataclass(frozen=True)
class EmissionGeometry:
    """Emission direction: polar angle theta and azimuth phi, radians.

    theta is measured from the drive propagation axis (+z).
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")

    def unit_vector(self) -> tuple[float, float, float]:
        st = math.sin(self.theta)
        return (st * math.cos(self.phi), st * math.sin(self.phi),
                math.cos(self.theta))


def mdot(a, b):
    """Minkowski product a.b = a^t b^t - a^x b^x - a^y b^y - a^z b^z.

    No implicit conjugation: where a modulus of a complex product is
    meant, callers conjugate explicitly.
    """
    return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z


def photon_wavevector(omega: float, theta: float, phi: float) -> FourVector:
    """Null four-wavevector omega * (1, sin t cos p, sin t sin p, cos t).

    Args:
        omega: photon energy in eV, > 0.
        theta, phi: propagation direction in radians.
    """
    if omega <= 0.0:
        raise ValueError(f"photon energy must be positive, got {omega}")
    st = math.sin(theta)
    return FourVector(omega, omega * st * math.cos(phi),
                      omega * st * math.sin(phi), omega * math.cos(theta))


def electron_momentum(gamma: float, direction) -> ElectronState:
    """Electron four-momentum for a given Lorentz factor and unit direction.

    p = (gamma m_e, sqrt(gamma^2 - 1) m_e * direction).  The direction is
    renormalized internally (after validating |direction| = 1 within 1e-12)
    so the mass-shell condition p.p = m_e^2 holds to machine accuracy.
    """
    if gamma < 1.0:
        raise ValueError(f"Lorentz factor must be >= 1, got {gamma}")
    dx, dy, dz = (float(c) for c in direction)
    norm = math.sqrt(dx * dx + dy * dy + dz * dz)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |d| = {norm}")
    dx, dy, dz = dx / norm, dy / norm, dz / norm
    pmag = math.sqrt(gamma * gamma - 1.0) * ELECTRON_MASS_EV
    p = FourVector(gamma * ELECTRON_MASS_EV, pmag * dx, pmag * dy, pmag * dz)
    return ElectronState(p=p, gamma=gamma, direction=(dx, dy, dz))


def scattered_momentum(p: FourVector, k: FourVector,
                       kprime: FourVector) -> FourVector:
    """Scattered electron momentum from energy-momentum conservation.

    p' = p + (p.k')/(p.k - k.k') k - k'.  Valid below the absolute
    kinematic ceiling p.k - k.k' > 0; on-shell p'.p' = m_e^2 follows
    algebraically.
    """
    denom = mdot(p, k) - mdot(k, kprime)
    if denom <= 0.0:
        raise KinematicallyForbidden(
            f"p.k - k.k' = {denom} <= 0: above the kinematic ceiling")
    n = mdot(p, kprime) / denom
    return p + n * k - kprime


def circular_polarization() -> ComplexFourVector:
    """Circular drive polarization (0, 1, i, 0)/sqrt(2)."""
    r = 1.0 / math.sqrt(2.0)
    return ComplexFourVector(0.0, r, 1j * r, 0.0)

"""
Shift Module
Spectral shift zeta, the sector weight c(phi) and the near-spectrum weight rho_flat
"""
from dataclasses import dataclass

import numpy as np

from errors import DomainError


@dataclass(frozen=True)
class Shift:
    """zeta = |zeta| e^{i phi} off the nonnegative half-line"""

    zeta: complex
    phi: float
    c_phi: float

    @property
    def modulus(self) -> float:
        return abs(self.zeta)

    def conjugate(self) -> "Shift":
        return shift_from_zeta(np.conj(self.zeta))


def _argument(z: complex) -> float:
    """arg z normalized into [0, 2pi)"""
    return float(np.mod(np.angle(z), 2.0 * np.pi))


def c_of_phi(phi: float) -> float:
    """
    Sector weight: 1/|sin phi| on (0, pi/2) and (3pi/2, 2pi), 1 on [pi/2, 3pi/2]

    Args:
        phi: Angle in the open interval (0, 2pi)

    Returns:
        c(phi) >= 1
    """
    if not 0.0 < phi < 2.0 * np.pi:
        raise DomainError(f"phi must lie in (0, 2pi), got {phi}")
    if np.pi / 2 <= phi <= 3 * np.pi / 2:
        return 1.0
    return float(1.0 / abs(np.sin(phi)))


def shift_from_zeta(zeta: complex) -> Shift:
    """Shift record for zeta outside [0, inf)"""
    zeta = complex(zeta)
    if zeta.imag == 0.0 and zeta.real >= 0.0:
        raise DomainError(f"zeta must lie off [0, inf), got {zeta}")
    phi = _argument(zeta)
    return Shift(zeta=zeta, phi=phi, c_phi=c_of_phi(phi))


def rho_flat(zeta: complex, c_flat: float) -> float:
    """
    Weight c(theta)^2 / |zeta - c_flat|^2 near the cut, c(theta)^2 away from it

    Args:
        zeta: Shift off the cut [c_flat, inf)
        c_flat: Positive lower bound for the first nonzero eigenvalues

    Returns:
        rho_flat(zeta)
    """
    if c_flat <= 0:
        raise DomainError(f"c_flat must be positive, got {c_flat}")
    offset = complex(zeta) - c_flat
    if offset.imag == 0.0 and offset.real >= 0.0:
        raise DomainError(f"zeta={zeta} lies on the cut [{c_flat}, inf)")
    weight = c_of_phi(_argument(offset)) ** 2
    distance = abs(offset)
    if distance < 1.0:
        return weight / distance ** 2
    return weight


def flat_resolvent_weight(zeta: complex, c_flat: float, points: int = 4096) -> float:
    """
    sup over x >= c_flat of (x + 1) / |x - zeta|, sampled on a logarithmic grid

    Bounded above by (c_flat + 2) rho_flat(zeta)^{1/2}.
    """
    if c_flat <= 0:
        raise DomainError(f"c_flat must be positive, got {c_flat}")
    zeta = complex(zeta)
    x = c_flat + np.concatenate([[0.0], np.logspace(-8, 8, points)])
    if zeta.imag == 0.0 and c_flat <= zeta.real:
        raise DomainError(f"zeta={zeta} lies on the cut [{c_flat}, inf)")
    # add the projection of zeta onto the half-line, where the ratio peaks
    if zeta.real > c_flat:
        x = np.append(x, zeta.real)
    return float(np.max((x + 1.0) / np.abs(x - zeta)))

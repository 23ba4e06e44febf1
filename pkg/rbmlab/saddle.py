"""
Energy-derived saddle constants shared by the sphere operator and the
transfer-operator diagnostics.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .charpoly_mc import semicircle_rho
from .errors import DomainError

L_MATRIX = np.diag([1.0, -1.0])


@dataclass(frozen=True, eq=False)
class SaddleData:
    """
    Constants fixed by the spectral center E:

    - a_plus, a_minus = ±sqrt(1 - E^2/4), the saddle eigenvalues
    - c_plus, c_minus = a_+(sqrt(4 - E^2) ± iE)/2, curvatures of g at a_±
    - C_plus = (a_+ + iE/2)^2/2 - log(a_+ - iE/2), so that g(a_+) = 0
    - t_star = (a_+ - a_-)^2 = 4π^2ρ(E)^2
    - c_star_eff = C_*/t_star when a C_* is supplied
    """
    e: float
    rho: float
    a_plus: float
    a_minus: float
    c_plus: complex
    c_minus: complex
    C_plus: complex
    t_star: float
    c_star: Optional[float] = None
    c_star_eff: Optional[float] = None
    x_plus: np.ndarray = field(default=None, repr=False)
    x_minus: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_energy(cls, e: float, c_star: Optional[float] = None) -> "SaddleData":
        if not abs(e) < 2:
            raise DomainError(f"Energy {e} must lie strictly inside (-2, 2)")
        rho = semicircle_rho(e)
        a_plus = math.sqrt(1.0 - e * e / 4.0)
        a_minus = -a_plus
        root = math.sqrt(4.0 - e * e)
        c_plus = a_plus * complex(root, e) / 2.0
        c_minus = a_plus * complex(root, -e) / 2.0
        C_plus = (a_plus + 0.5j * e) ** 2 / 2.0 - cmath.log(a_plus - 0.5j * e)
        t_star = (a_plus - a_minus) ** 2

        c_star_eff = None
        if c_star is not None:
            if c_star < 0:
                raise DomainError(f"c_star must be non-negative, got {c_star}")
            c_star_eff = c_star / (2.0 * math.pi * rho) ** 2

        return cls(
            e=e,
            rho=rho,
            a_plus=a_plus,
            a_minus=a_minus,
            c_plus=c_plus,
            c_minus=c_minus,
            C_plus=C_plus,
            t_star=t_star,
            c_star=c_star,
            c_star_eff=c_star_eff,
            x_plus=a_plus * np.eye(2),
            x_minus=a_minus * np.eye(2),
        )

    def saddle_surface_point(self, u: np.ndarray) -> np.ndarray:
        """X_±(U) = a_+ U L U*."""
        return self.a_plus * (u @ L_MATRIX @ u.conj().T)

"""
Limiting transfer operator on the zonal subspace of U(2)/U(1)×U(1).

Zonal functions depend on U only through c = ν(U) = 1 - 2|U_12|^2, so the
sphere reduces to c in [-1, 1] with the probability measure dc/2. In the
orthonormal Legendre basis φ_j = sqrt(2j+1) P_j(c):

- the Laplacian -d/dc (1 - c^2) d/dc is diagonal with eigenvalues j(j+1)
- multiplication by c is the Jacobi matrix with off-diagonals a_j
- the kernel K* acts diagonally with the Funk–Hecke eigenvalues λ_j(t)

The crossover limit is (e^{-G} e_0, e_0) with G = C*Δ + iπξ c.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm
from scipy.special import eval_legendre, ive

from .errors import AccuracyWarning, InvalidArgumentError, NumericalError
from .saddle import L_MATRIX, SaddleData

logger = logging.getLogger(__name__)

MIN_ORDER = 8
MAX_ORDER = 256
DEFAULT_ORDER = 16
CONVERGENCE_TOL = 1e-10
MIN_NYSTROM_NODES = 64
MIN_NYSTROM_ANGLES = 256


@dataclass(frozen=True, eq=False)
class LegendreBasis:
    """Orthonormal Legendre basis φ_0..φ_L under ∫·dc/2."""
    order: int
    offdiag: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise InvalidArgumentError(f"Basis order must be >= 1, got {self.order}")
        j = np.arange(self.order, dtype=float)
        offdiag = (j + 1.0) / np.sqrt((2.0 * j + 1.0) * (2.0 * j + 3.0))
        offdiag.setflags(write=False)
        object.__setattr__(self, "offdiag", offdiag)
        self._check_orthonormal()

    @property
    def dimension(self) -> int:
        return self.order + 1

    def evaluate(self, c) -> np.ndarray:
        """Basis values, shape (len(c), L+1)."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        j = np.arange(self.dimension)
        return np.sqrt(2.0 * j + 1.0)[None, :] * eval_legendre(j[None, :], c[:, None])

    def jacobi_matrix(self) -> np.ndarray:
        """Multiplication by c, truncated to the first L+1 basis functions."""
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def _check_orthonormal(self) -> None:
        nodes, weights = leggauss(self.dimension + 1)
        values = self.evaluate(nodes)
        gram = values.T @ (values * (weights / 2.0)[:, None])
        error = float(np.max(np.abs(gram - np.eye(self.dimension))))
        if error > 1e-10:
            raise NumericalError(
                f"Legendre basis of order {self.order} is not orthonormal (error {error:.2e})",
                details={"order": self.order, "gram_error": error},
            )


@dataclass(frozen=True, eq=False)
class SphereGenerator:
    diagonal: np.ndarray = field(repr=False)
    offdiagonal: np.ndarray = field(repr=False)
    c_star_eff: float
    xi: float

    @property
    def dimension(self) -> int:
        return self.diagonal.shape[0]

    @property
    def order(self) -> int:
        return self.dimension - 1

    def matrix(self) -> np.ndarray:
        """Dense complex-symmetric tridiagonal matrix."""
        g = np.diag(self.diagonal.astype(complex))
        g += np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)
        return g


def build_generator(c_star: float, e: float, xi: float, L: int = DEFAULT_ORDER) -> SphereGenerator:
    """
    G = C*_eff Δ + iπξ c on φ_0..φ_L, where C*_eff = C_*/(2πρ(E))^2.

    The iπξ off-diagonal (rather than iξ) is what reproduces the
    sin(πξ)/(πξ) limit as C_* -> 0.
    """
    if not c_star >= 0:
        raise InvalidArgumentError(f"c_star must be >= 0, got {c_star}")
    if L < MIN_ORDER:
        raise InvalidArgumentError(f"L must be >= {MIN_ORDER}, got {L}")
    saddle = SaddleData.from_energy(e, c_star=c_star)

    basis = LegendreBasis(L)
    j = np.arange(basis.dimension, dtype=float)
    return SphereGenerator(
        diagonal=saddle.c_star_eff * j * (j + 1.0),
        offdiagonal=1j * math.pi * xi * basis.offdiag,
        c_star_eff=saddle.c_star_eff,
        xi=float(xi),
    )


def expm_apply(generator: Union[SphereGenerator, np.ndarray], v: np.ndarray) -> np.ndarray:
    """e^{-G} v by scaling-and-squaring Padé on the dense matrix."""
    g = generator.matrix() if isinstance(generator, SphereGenerator) else np.asarray(generator)
    v = np.asarray(v)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidArgumentError(f"Generator must be square, got shape {g.shape}")
    if v.shape[0] != g.shape[0]:
        raise InvalidArgumentError(f"Vector of length {v.shape[0]} does not match dimension {g.shape[0]}")
    return expm(-g) @ v


@dataclass(frozen=True)
class LimitValue:
    value: complex
    order: int
    converged: bool

    @property
    def imag_residual(self) -> float:
        return abs(self.value.imag)


def truncated_limit(c_star: float, e: float, xi: float, L: int) -> complex:
    """(e^{-G} e_0, e_0) at a fixed truncation order, no convergence control."""
    generator = build_generator(c_star, e, xi, L)
    e0 = np.zeros(generator.dimension, dtype=complex)
    e0[0] = 1.0
    return complex(expm_apply(generator, e0)[0])


def limit_formula(c_star: float, e: float, xi: float, L: int = DEFAULT_ORDER) -> LimitValue:
    """
    Crossover limit (e^{-C*Δ - iπξν} 1, 1).

    L is doubled until two successive values agree to 1e-10, with
    MAX_ORDER as the last order tried. If they still disagree there, the
    last value is returned unconverged and an AccuracyWarning is issued.
    """
    order = min(int(L), MAX_ORDER)
    previous = truncated_limit(c_star, e, xi, order // 2) if order >= MAX_ORDER else None
    value = truncated_limit(c_star, e, xi, order)

    while previous is None or abs(value - previous) >= CONVERGENCE_TOL:
        if order >= MAX_ORDER:
            message = (
                f"limit_formula(c_star={c_star}, e={e}, xi={xi}) not converged at L={order}: "
                f"last change {abs(value - previous):.2e}"
            )
            logger.warning(message)
            warnings.warn(message, AccuracyWarning)
            return LimitValue(value=value, order=order, converged=False)
        order = min(2 * order, MAX_ORDER)
        previous, value = value, truncated_limit(c_star, e, xi, order)
        logger.debug("limit_formula: L=%d value=%r", order, value)

    return LimitValue(value=value, order=order, converged=True)


def crossover_scan(
        xi: float,
        e: float,
        c_star_min: float,
        c_star_max: float,
        points: int,
        L: int = DEFAULT_ORDER
) -> List[Tuple[float, LimitValue]]:
    """limit_formula on a log-spaced C_* grid between the two endpoints."""
    if not 0 < c_star_min <= c_star_max:
        raise InvalidArgumentError(f"Need 0 < cstar_min <= cstar_max, got {c_star_min}, {c_star_max}")
    if points < 1:
        raise InvalidArgumentError(f"points must be positive, got {points}")
    grid = np.geomspace(c_star_min, c_star_max, points)
    return [(float(c), limit_formula(float(c), e, xi, L)) for c in grid]


# Zonal kernel K*

def _check_kernel_args(t: float, w: float) -> None:
    if not t > 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    if not w >= 1:
        raise InvalidArgumentError(f"W must be >= 1, got {w}")


def zonal_kernel(t: float, w: float, c) -> np.ndarray:
    """k(c) = W^2 t exp(-(W^2 t/2)(1 - c))."""
    w2t = w * w * t
    return w2t * np.exp(-0.5 * w2t * (1.0 - np.asarray(c, dtype=float)))


def default_quad_order(t: float, w: float, j_max: int) -> int:
    """
    A Gauss–Legendre order that resolves the kernel peak at c = 1.

    The peak has width 1/(W^2 t) and node spacing near c = 1 is O(1/N^2),
    so N grows like W sqrt(t).
    """
    return max(4 * j_max, int(math.ceil(6.0 * w * math.sqrt(t))) + 64)


def funk_hecke_eigs(t: float, w: float, j_max: int, quad_order: Optional[int] = None) -> np.ndarray:
    """λ_j = (1/2) ∫ k(c) P_j(c) dc for j = 0..j_max by Gauss–Legendre quadrature."""
    _check_kernel_args(t, w)
    if j_max < 0:
        raise InvalidArgumentError(f"j_max must be >= 0, got {j_max}")
    if quad_order is None:
        quad_order = default_quad_order(t, w, j_max)
    if quad_order < 1:
        raise InvalidArgumentError(f"quad_order must be positive, got {quad_order}")
    if quad_order < 4 * j_max:
        warnings.warn(
            f"quad_order={quad_order} is below 4*j_max={4 * j_max}; λ_j may be inaccurate",
            AccuracyWarning,
        )

    nodes, weights = leggauss(quad_order)
    weighted = zonal_kernel(t, w, nodes) * weights / 2.0
    j = np.arange(j_max + 1)
    return eval_legendre(j[:, None], nodes[None, :]) @ weighted


def zonal_eigenvalues_exact(t: float, w: float, j_max: int) -> np.ndarray:
    """Closed form λ_j = sqrt(2πs) I_{j+1/2}(s) e^{-s}, s = W^2 t / 2."""
    _check_kernel_args(t, w)
    s = 0.5 * w * w * t
    j = np.arange(j_max + 1, dtype=float)
    return math.sqrt(2.0 * math.pi * s) * ive(j + 0.5, s)


def asymptotic_eigenvalues(t: float, w: float, j_max: int) -> np.ndarray:
    """Leading large-W^2 t form (1 - e^{-W^2 t})(1 - j(j+1)/(W^2 t))."""
    w2t = w * w * t
    j = np.arange(j_max + 1, dtype=float)
    return -math.expm1(-w2t) * (1.0 - j * (j + 1.0) / w2t)


def zonal_nystrom(t: float, w: float, nodes: int, angles: int = MIN_NYSTROM_ANGLES) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nyström matrix of K* restricted to zonal functions, and its c-grid.

    Row a, column b holds the θ-average of k(c_a c_b + s_a s_b cos θ)
    times w_b/2, where (c, w) is the Gauss–Legendre rule and
    s = sqrt(1 - c^2).
    """
    _check_kernel_args(t, w)
    if nodes < MIN_NYSTROM_NODES:
        raise InvalidArgumentError(f"nodes must be >= {MIN_NYSTROM_NODES}, got {nodes}")
    if angles < MIN_NYSTROM_ANGLES:
        raise InvalidArgumentError(f"angles must be >= {MIN_NYSTROM_ANGLES}, got {angles}")

    c, weights = leggauss(nodes)
    sines = np.sqrt(1.0 - c * c)
    aligned = np.outer(c, c)
    transverse = np.outer(sines, sines)

    averaged = np.zeros((nodes, nodes))
    for theta in 2.0 * math.pi * np.arange(angles) / angles:
        averaged += zonal_kernel(t, w, aligned + transverse * math.cos(theta))
    averaged /= angles
    return averaged * (weights / 2.0)[None, :], c


def unitary_from_angles(phi: float, theta: float) -> np.ndarray:
    """U = [[cos φ, sin φ e^{iθ}], [-sin φ e^{-iθ}, cos φ]]."""
    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    phase = complex(math.cos(theta), math.sin(theta))
    return np.array([
        [cos_phi, sin_phi * phase],
        [-sin_phi * phase.conjugate(), cos_phi],
    ], dtype=complex)


def nu_of_unitary(u: np.ndarray) -> float:
    return float(1.0 - 2.0 * abs(u[0, 1]) ** 2)


def kstar_kernel(t: float, w: float, u1: np.ndarray, u2: np.ndarray) -> float:
    """K*(t; U1, U2) = W^2 t exp(t W^2 Tr(V L V* L)/4 - t W^2/2), V = U1 U2*."""
    v = u1 @ u2.conj().T
    trace = np.trace(v @ L_MATRIX @ v.conj().T @ L_MATRIX).real
    w2t = w * w * t
    return float(w2t * math.exp(w2t * trace / 4.0 - w2t / 2.0))


def kstar_spectrum(t: float, w: float, j_max: int, quad_order: Optional[int] = None) -> List[Tuple[int, float, float, float]]:
    """Rows (j, λ_j by quadrature, asymptotic λ_j, relative deviation)."""
    quadrature = funk_hecke_eigs(t, w, j_max, quad_order)
    asymptotic = asymptotic_eigenvalues(t, w, j_max)
    rows = []
    for j in range(j_max + 1):
        rel_dev = abs(quadrature[j] - asymptotic[j]) / abs(quadrature[j]) if quadrature[j] else math.inf
        rows.append((j, float(quadrature[j]), float(asymptotic[j]), float(rel_dev)))
    return rows


def finite_transfer_power(c_star: float, e: float, xi: float, n: int, L: int = 32) -> complex:
    """
    (K^{n-1} e_0, e_0) for the finite-n zonal transfer operator
    K = M K* M at W^2 = n/C_*.

    K* is diagonal with λ_j(t*) and M is multiplication by
    exp(-iπξc/(2n)), so that K ~ 1 - (C*Δ + iπξc)/n.
    """
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    if not c_star > 0:
        raise InvalidArgumentError(f"c_star must be positive, got {c_star}")
    saddle = SaddleData.from_energy(e, c_star=c_star)
    basis = LegendreBasis(L)

    w = math.sqrt(n / c_star)
    eigenvalues = zonal_eigenvalues_exact(saddle.t_star, w, L)
    half_step = expm(-1j * math.pi * xi / (2.0 * n) * basis.jacobi_matrix())
    transfer = half_step @ (eigenvalues[:, None] * half_step)

    v = np.zeros(basis.dimension, dtype=complex)
    v[0] = 1.0
    for _ in range(n - 1):
        v = transfer @ v
    return complex(v[0])

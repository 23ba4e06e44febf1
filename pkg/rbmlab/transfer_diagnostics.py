"""
Scalar ingredients of the transfer-operator representation:

- g(x) = (x + iE/2)^2/2 - log(x - iE/2) - C_+
- 𝓕(X) = exp{-Tr(X + iE/2)^2/4 + log det(X - iE/2)/2 + C_+} on Herm(2)
- the one-dimensional A-kernel e^{-g(x)/2} N_W(x - y) e^{-g(y)/2}

With this sign of C_+, 𝓕(diag(a, b)) = e^{-g(a)/2 - g(b)/2} and
|𝓕(X)| = Π e^{-Re g(λ)/2} over the eigenvalues λ of X, where
Re g(λ) = (s - 1 - log s)/2 >= 0 for s = λ^2 + E^2/4. Hence |𝓕| <= 1 with
equality exactly on the saddle set.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from .ensemble import RngStreamPolicy
from .errors import InvalidArgumentError, NumericalError, SingularPointError
from .saddle import SaddleData

logger = logging.getLogger(__name__)

MIN_KERNEL_NODES = 200
DEFAULT_HALF_WIDTH = 3.0
DEFAULT_KERNEL_NODES = 400
EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 5000
EIGEN_BLOCK = 4
BRANCH_CUT_TOL = 1e-9


@dataclass(frozen=True)
class Herm2Point:
    """X = [[a, (x+iy)/√2], [(x-iy)/√2, b]]."""
    a: float
    b: float
    x: float = 0.0
    y: float = 0.0

    def matrix(self) -> np.ndarray:
        off = complex(self.x, self.y) / math.sqrt(2.0)
        return np.array([[self.a, off], [off.conjugate(), self.b]], dtype=complex)


def g_of(x: float, e: float) -> complex:
    """g(x) on the principal branch; g(a_+) = 0."""
    if e == 0 and x == 0:
        raise SingularPointError("g is singular at x = 0 when E = 0")
    saddle = SaddleData.from_energy(e)
    return _g_values(np.array([x], dtype=float), saddle)[0]


def _g_values(x: np.ndarray, saddle: SaddleData) -> np.ndarray:
    """Vectorized g; the singular point comes out as +inf real part."""
    z = np.asarray(x, dtype=complex)
    shift = 0.5j * saddle.e
    with np.errstate(divide="ignore"):
        return (z + shift) ** 2 / 2.0 - np.log(z - shift) - saddle.C_plus


def _log_det_shifted(m: np.ndarray, e: float) -> complex:
    shifted = m - 0.5j * e * np.eye(2)
    det = shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0]
    if det == 0:
        raise SingularPointError("X - iE/2 is singular")
    return cmath.log(det)


def on_branch_cut(m: np.ndarray, e: float) -> bool:
    """Whether det(X - iE/2) sits on the negative real axis, where the principal log jumps."""
    shifted = m - 0.5j * e * np.eye(2)
    det = complex(shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0])
    return det.real < 0 and abs(det.imag) <= BRANCH_CUT_TOL * abs(det)


def _curly_f_matrix(m: np.ndarray, saddle: SaddleData) -> complex:
    shifted = m + 0.5j * saddle.e * np.eye(2)
    trace_sq = complex(np.sum(shifted * shifted.T))
    return cmath.exp(-trace_sq / 4.0 + _log_det_shifted(m, saddle.e) / 2.0 + saddle.C_plus)


def curly_f(p: Herm2Point, e: float) -> complex:
    return _curly_f_matrix(p.matrix(), SaddleData.from_energy(e))


def curly_f_xi(p: Herm2Point, e: float, xi: float, n: int) -> complex:
    """𝓕(X) exp(-i Tr(X ξ̂)/(2nρ)) with ξ̂ = diag(ξ, -ξ)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    saddle = SaddleData.from_energy(e)
    phase = -xi * (p.a - p.b) / (2.0 * n * saddle.rho)
    return _curly_f_matrix(p.matrix(), saddle) * cmath.exp(1j * phase)


def saddle_curvature_residual(e: float, sign: int, h: float) -> float:
    """|(g(a_± + h) - g(a_±))/h^2 - c_±|, which is O(h)."""
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
    saddle = SaddleData.from_energy(e)
    a, c = (saddle.a_plus, saddle.c_plus) if sign > 0 else (saddle.a_minus, saddle.c_minus)
    values = _g_values(np.array([a + h, a]), saddle)
    return float(abs((values[0] - values[1]) / (h * h) - c))


def haar_unitaries(count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` Haar-distributed U(2) matrices, shape (count, 2, 2)."""
    if count < 1:
        raise InvalidArgumentError(f"count must be positive, got {count}")
    draws = unitary_group.rvs(2, size=count, random_state=rng)
    return np.asarray(draws).reshape(count, 2, 2)


def required_kernel_nodes(w: float, half_width: float = DEFAULT_HALF_WIDTH) -> int:
    """Smallest even node count meeting spacing <= 1/(4W), at least the default."""
    nodes = int(math.ceil(2.0 * half_width * 4.0 * w)) + 1
    nodes += nodes % 2
    return max(DEFAULT_KERNEL_NODES, nodes)


def a_kernel_nystrom(
        e: float,
        w: float,
        half_width: float = DEFAULT_HALF_WIDTH,
        nodes: int = DEFAULT_KERNEL_NODES
) -> np.ndarray:
    """
    Trapezoidal Nyström matrix of A(x, y) = (2π)^{-1/2} W e^{-g(x)/2} e^{-W^2(x-y)^2/2} e^{-g(y)/2}.

    The matrix is built in the symmetric form f_a G_ab f_b with
    f = sqrt(weight) e^{-g/2}, so M == M.T exactly. Where the grid hits
    the singular point (E = 0, x = 0) the factor takes its limit 0.
    """
    if nodes < MIN_KERNEL_NODES:
        raise InvalidArgumentError(f"nodes must be >= {MIN_KERNEL_NODES}, got {nodes}")
    if not half_width > 0:
        raise InvalidArgumentError(f"half_width must be positive, got {half_width}")
    saddle = SaddleData.from_energy(e)
    if not saddle.a_plus < half_width:
        raise InvalidArgumentError(
            f"Grid [-{half_width}, {half_width}] does not contain the saddles ±{saddle.a_plus:.6g}"
        )
    grid, spacing = np.linspace(-half_width, half_width, nodes, retstep=True)
    if spacing > 1.0 / (4.0 * w):
        raise InvalidArgumentError(
            f"Node spacing {spacing:.4g} exceeds 1/(4W) = {1.0 / (4.0 * w):.4g}; "
            f"use at least {required_kernel_nodes(w, half_width)} nodes"
        )

    weights = np.full(nodes, spacing)
    weights[0] = weights[-1] = spacing / 2.0
    factor = np.exp(-_g_values(grid, saddle) / 2.0)
    factor[~np.isfinite(factor)] = 0.0
    f = np.sqrt(weights) * factor

    gaussian = np.exp(-0.5 * (w * (grid[:, None] - grid[None, :])) ** 2)
    return (w / math.sqrt(2.0 * math.pi)) * np.outer(f, f) * gaussian


@dataclass(frozen=True)
class EigenResult:
    value: complex
    iterations: int
    residual: float


def leading_eigenvalue(
        m: np.ndarray,
        tol: float = EIGEN_TOL,
        max_iter: int = EIGEN_MAX_ITER,
        block: int = EIGEN_BLOCK
) -> EigenResult:
    """
    Eigenvalue of largest modulus by block power iteration with
    Rayleigh–Ritz extraction.

    A block of several vectors separates eigenvalues that share a modulus
    but not a phase (the two saddle wells of the A-kernel), which a
    single-vector iteration cannot. Among Ritz pairs of (numerically)
    maximal modulus, the first one whose relative residual
    |Mx - θx| / |θ| drops below tol is returned.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"Matrix must be square, got shape {m.shape}")
    size = m.shape[0]
    block = max(1, min(block, size))

    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((size, block)) + 1j * rng.standard_normal((size, block)))
    best = (0j, math.inf)

    for iteration in range(1, max_iter + 1):
        z = m @ q
        ritz_values, ritz_vectors = np.linalg.eig(q.conj().T @ z)
        order = np.argsort(-np.abs(ritz_values))
        top = abs(ritz_values[order[0]])

        for index in order:
            theta = ritz_values[index]
            if abs(theta) < top * (1.0 - math.sqrt(tol)):
                break
            y = ritz_vectors[:, index]
            x = q @ y
            scale = np.linalg.norm(x)
            residual = float(np.linalg.norm(z @ y - theta * x) / scale)
            relative = residual / abs(theta) if theta != 0 else residual
            if relative < best[1]:
                best = (complex(theta), relative)
            if relative <= tol:
                logger.debug("leading_eigenvalue: %r after %d iterations", theta, iteration)
                return EigenResult(value=complex(theta), iterations=iteration, residual=relative)

        q, _ = np.linalg.qr(z)

    raise NumericalError(
        f"Power iteration did not converge in {max_iter} iterations",
        details={"iterations": max_iter, "estimate": [best[0].real, best[0].imag], "residual": best[1]},
    )


def diagnostics_report(
        e: float,
        w: float,
        half_width: float = DEFAULT_HALF_WIDTH,
        nodes: Optional[int] = None,
        seed: int = 0,
        haar_count: int = 100
) -> dict:
    """
    JSON-ready checks of the saddle structure at (E, W).

    Covers saddle constants, g at both saddles, curvature residuals,
    |𝓕| residuals at X_± and on the saddle surface over Haar samples
    (with branch-cut hits counted), and the A-kernel λ_0 together with
    its change under node doubling.
    """
    saddle = SaddleData.from_energy(e)
    nodes = nodes or required_kernel_nodes(w, half_width)

    surface = [saddle.saddle_surface_point(u) for u in haar_unitaries(haar_count, RngStreamPolicy(seed).generator(0))]
    surface_residual = max(abs(abs(_curly_f_matrix(x, saddle)) - 1.0) for x in surface)
    branch_hits = sum(on_branch_cut(x, e) for x in surface)
    if branch_hits:
        logger.info("diagnostics E=%g: %d of %d surface points on the log-det branch cut", e, branch_hits, haar_count)

    g_plus, g_minus = _g_values(np.array([saddle.a_plus, saddle.a_minus]), saddle)

    kernel = leading_eigenvalue(a_kernel_nystrom(e, w, half_width, nodes))
    doubled = leading_eigenvalue(a_kernel_nystrom(e, w, half_width, 2 * nodes))

    def pair(z):
        return [float(z.real), float(z.imag)]

    return {
        "e": e,
        "w": w,
        "saddle": {
            "rho": saddle.rho,
            "a_plus": saddle.a_plus,
            "a_minus": saddle.a_minus,
            "c_plus": pair(saddle.c_plus),
            "c_minus": pair(saddle.c_minus),
            "C_plus": pair(saddle.C_plus),
            "t_star": saddle.t_star,
        },
        "g": {"a_plus": pair(g_plus), "a_minus": pair(g_minus)},
        "curvature_residual": {
            "plus": saddle_curvature_residual(e, 1, 1e-4),
            "minus": saddle_curvature_residual(e, -1, 1e-4),
        },
        "curly_f": {
            "x_plus_residual": abs(abs(_curly_f_matrix(saddle.x_plus, saddle)) - 1.0),
            "x_minus_residual": abs(abs(_curly_f_matrix(saddle.x_minus, saddle)) - 1.0),
            "surface_max_residual": float(surface_residual),
            "surface_samples": haar_count,
            "branch_cut_hits": int(branch_hits),
        },
        "a_kernel": {
            "half_width": half_width,
            "nodes": nodes,
            "lambda0": pair(kernel.value),
            "modulus": abs(kernel.value),
            "iterations": kernel.iterations,
            "residual": kernel.residual,
            "doubled_nodes": 2 * nodes,
            "doubling_delta": abs(abs(doubled.value) - abs(kernel.value)),
        },
    }

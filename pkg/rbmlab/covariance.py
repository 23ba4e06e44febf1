"""
Band covariance profile J = (-W^2 Δ + 1)^{-1} on the lattice [1, n].

This module handles:
- the Neumann discrete Laplacian
- the covariance matrix J via a banded symmetric solve
- structural checks (residual, row sums, decay away from the diagonal)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import LinAlgError, solveh_banded

from .errors import InvalidArgumentError, NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatticeSpec:
    """Number of sites n and bandwidth W (c_star kept for provenance only)."""
    n: int
    w: float
    c_star: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"n must be a positive integer, got {self.n}")
        if not math.isfinite(self.w) or self.w < 1:
            raise InvalidArgumentError(f"W must be >= 1, got {self.w}")
        if self.c_star is not None:
            if self.c_star <= 0:
                raise InvalidArgumentError(f"c_star must be positive, got {self.c_star}")
            if abs(self.n - self.c_star * self.w ** 2) >= 1:
                raise InvalidArgumentError(
                    f"n={self.n} is inconsistent with c_star*W^2={self.c_star * self.w ** 2:.6g}"
                )

    @classmethod
    def critical(cls, c_star: float, w: float) -> "LatticeSpec":
        """Lattice on the critical line n = C_* W^2."""
        n = int(round(c_star * w ** 2))
        if n < 1:
            raise InvalidArgumentError(f"c_star*W^2 rounds to n={n}")
        return cls(n=n, w=float(w), c_star=float(c_star))


@dataclass(frozen=True, eq=False)
class CovarianceProfile:
    spec: LatticeSpec
    entries: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def w(self) -> float:
        return self.spec.w

    def row_sum_error(self) -> float:
        """Largest deviation of a row sum from 1."""
        return float(np.max(np.abs(self.entries.sum(axis=1) - 1.0)))


def build_neumann_laplacian(n: int) -> sparse.csr_matrix:
    """
    Discrete Laplacian on [1, n] with Neumann (zero-flux) boundary rows.

    Interior rows are (1, -2, 1); the two boundary rows are (-1, 1) and
    (1, -1), so that Δ·1 = 0. For n = 1 this is the 1x1 zero matrix.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    n = int(n)
    if n == 1:
        return sparse.csr_matrix((1, 1), dtype=float)

    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sparse.diags([off, main, off], offsets=[-1, 0, 1], format="csr")


def _operator_bands(spec: LatticeSpec) -> np.ndarray:
    """Upper banded storage of -W^2 Δ + 1 for solveh_banded."""
    n = spec.n
    w2 = spec.w ** 2
    laplacian = build_neumann_laplacian(n)
    ab = np.zeros((2, n))
    ab[1] = 1.0 - w2 * laplacian.diagonal()
    if n > 1:
        ab[0, 1:] = -w2 * laplacian.diagonal(1)
    return ab


def build_covariance(spec: LatticeSpec) -> CovarianceProfile:
    """
    Solve (-W^2 Δ + 1) J = I for the covariance profile.

    The operator is symmetric positive definite, so the banded Cholesky
    solver is used on all n unit columns at once. A failed factorization
    is reported as a numerical error.
    """
    ab = _operator_bands(spec)
    try:
        entries = solveh_banded(ab, np.eye(spec.n), lower=False)
    except LinAlgError as e:
        raise NumericalError(f"Banded Cholesky solve failed: {e}")

    entries.setflags(write=False)

    profile = CovarianceProfile(spec=spec, entries=entries)
    logger.debug(
        "Built covariance n=%d W=%g row_sum_err=%.2e",
        spec.n, spec.w, profile.row_sum_error(),
    )
    return profile


def laplacian_residual(profile: CovarianceProfile) -> float:
    """Max-norm of (-W^2 Δ + 1) J - I."""
    n = profile.n
    operator = sparse.identity(n, format="csr") - profile.w ** 2 * build_neumann_laplacian(n)
    residual = operator @ profile.entries - np.eye(n)
    return float(np.max(np.abs(residual)))


def decay_profile(profile: CovarianceProfile) -> List[Tuple[int, float]]:
    """
    Off-diagonal decay of J: for each offset k, max_i J[i, i+k] / J[i, i].

    Each row of J decays monotonically away from the diagonal, so the
    sequence is nonincreasing; the running minimum only removes rounding.
    """
    entries = profile.entries
    diag = np.diag(entries)
    ratios = np.array([
        np.max(np.diag(entries, k) / diag[: profile.n - k])
        for k in range(profile.n)
    ])
    ratios[0] = 1.0
    ratios = np.minimum.accumulate(ratios)
    return [(k, float(r)) for k, r in enumerate(ratios)]

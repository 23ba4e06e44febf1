"""
Monte Carlo estimation of the normalized characteristic polynomial correlator

    F̄2(ξ) = E{det(x1 - H) det(x2 - H)} / E{det(E - H)^2},
    x_{1,2} = E ± ξ / (2 n ρ(E)).

Each sample is diagonalized once; its eigenvalues serve every ξ of the grid
and the denominator point. Products are accumulated in log space with a
shared running offset, and the ratio of means carries a delta-method
standard error built from the numerator/denominator covariance.
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .covariance import CovarianceProfile, LatticeSpec, build_covariance
from .ensemble import RbmSample, RngStreamPolicy, draw_rbm
from .errors import (
    AccuracyWarning, DomainError, InsufficientDataError, InvalidArgumentError,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
DROP_FLAG_FRACTION = 1e-3
_BATCH_ROWS = 1024


def semicircle_rho(e: float) -> float:
    """Semicircle density (2π)^{-1} sqrt(4 - e^2) on [-2, 2]."""
    if abs(e) > 2:
        raise DomainError(f"Energy {e} lies outside the spectrum [-2, 2]")
    return math.sqrt(max(4.0 - e * e, 0.0)) / (2.0 * math.pi)


@dataclass(frozen=True)
class EnergyWindow:
    """Spectral center E, the ξ grid, and the matrix size n that scales it."""
    e: float
    xi_grid: Tuple[float, ...]
    n: int

    def __post_init__(self):
        if not abs(self.e) < 2:
            raise DomainError(f"Energy {self.e} must lie strictly inside (-2, 2)")
        if self.n < 1:
            raise InvalidArgumentError(f"n must be positive, got {self.n}")
        object.__setattr__(self, "xi_grid", tuple(sorted(float(x) for x in self.xi_grid)))
        for xi in self.xi_grid:
            x1, x2 = self.points(xi)
            if not (abs(x1) < 2 and abs(x2) < 2):
                raise DomainError(f"ξ={xi} puts the evaluation points ({x1}, {x2}) outside (-2, 2)")

    @property
    def rho(self) -> float:
        return semicircle_rho(self.e)

    def points(self, xi: float) -> Tuple[float, float]:
        shift = xi / (2.0 * self.n * self.rho)
        return self.e + shift, self.e - shift


def _log_abs_products(eigenvalues: np.ndarray, abscissae: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """log|∏_k (x - λ_k)| and its sign for every x in abscissae."""
    diffs = abscissae[:, None] - eigenvalues[None, :]
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(diffs)).sum(axis=1)
    signs = np.prod(np.sign(diffs), axis=1)
    return logs, signs


def charpoly_log_pair(sample: RbmSample, x1: float, x2: float) -> Tuple[float, float]:
    """
    log|det(x1 - H) det(x2 - H)| and the sign of the product.

    The product is real for Hermitian H and real x1, x2. Eigensolver
    failures propagate as numpy.linalg.LinAlgError.
    """
    eigenvalues = np.linalg.eigvalsh(sample.h)
    logs, signs = _log_abs_products(eigenvalues, np.array([x1, x2], dtype=float))
    return float(logs[0] + logs[1]), float(signs[0] * signs[1])


class LogProductAccumulator:
    """
    Running moments of sign·exp(log_magnitude) over several channels.

    All channels share one offset (the running maximum log magnitude), so
    the stored sums stay O(1) whatever the size of the products. Cross
    moments against the reference channel (the last one by default) are
    kept for ratio estimates. Merging is associative.
    """

    def __init__(self, channels: int = 1, reference: int = -1):
        self.channels = channels
        self.reference = reference % channels
        self.offset = -math.inf
        self.sums = np.zeros(channels)
        self.squares = np.zeros(channels)
        self.cross = np.zeros(channels)
        self.count = 0

    def _rebase(self, new_offset: float) -> None:
        if new_offset <= self.offset:
            return
        if self.count:
            scale = math.exp(self.offset - new_offset)
            self.sums *= scale
            self.squares *= scale * scale
            self.cross *= scale * scale
        self.offset = new_offset

    def update(self, log_magnitudes, signs) -> None:
        logs = np.atleast_2d(np.asarray(log_magnitudes, dtype=float))
        signs = np.atleast_2d(np.asarray(signs, dtype=float))
        if logs.shape[1] != self.channels:
            raise InvalidArgumentError(f"Expected {self.channels} channels, got {logs.shape[1]}")
        if logs.shape[0] == 0:
            return

        batch_max = np.max(logs)
        if math.isfinite(batch_max):
            self._rebase(float(batch_max))

        values = signs * np.exp(logs - self.offset) if math.isfinite(self.offset) else np.zeros_like(logs)
        self.sums += values.sum(axis=0)
        self.squares += (values * values).sum(axis=0)
        self.cross += (values * values[:, [self.reference]]).sum(axis=0)
        self.count += logs.shape[0]

    def merge(self, other: "LogProductAccumulator") -> "LogProductAccumulator":
        if other.channels != self.channels:
            raise InvalidArgumentError("Cannot merge accumulators with different channel counts")
        if other.count == 0:
            return self
        self._rebase(other.offset)
        scale = math.exp(other.offset - self.offset) if math.isfinite(other.offset) else 0.0
        self.sums += other.sums * scale
        self.squares += other.squares * scale * scale
        self.cross += other.cross * scale * scale
        self.count += other.count
        return self

    def mean(self, channel: int = 0) -> Tuple[float, float]:
        """(log|mean|, sign of mean) of one channel."""
        if self.count == 0:
            raise InsufficientDataError("Accumulator is empty")
        total = self.sums[channel]
        log_mean = math.log(abs(total)) if total != 0 else -math.inf
        return log_mean + self.offset - math.log(self.count), float(np.sign(total))

    def ess_ratio(self, channel: int = 0) -> float:
        """mean^2 / mean-of-squares; near 1 for well-behaved, near 0 for heavy tails."""
        if self.count == 0 or self.squares[channel] == 0:
            return 0.0
        return float(self.sums[channel] ** 2 / (self.count * self.squares[channel]))

    def ratio(self, channel: int) -> Tuple[float, float]:
        """
        Ratio of the channel mean to the reference mean, with its
        delta-method standard error for correlated numerator and denominator.
        """
        count = self.count
        if count < 2:
            raise InsufficientDataError(f"Need at least 2 samples for a ratio, got {count}")
        ref = self.reference
        x_sum, y_sum = self.sums[channel], self.sums[ref]
        if y_sum == 0:
            raise InsufficientDataError("Denominator mean vanished")

        value = x_sum / y_sum
        x_bar, y_bar = x_sum / count, y_sum / count
        s_xx = (self.squares[channel] - count * x_bar * x_bar) / (count - 1)
        s_yy = (self.squares[ref] - count * y_bar * y_bar) / (count - 1)
        s_xy = (self.cross[channel] - count * x_bar * y_bar) / (count - 1)
        variance = (s_xx - 2.0 * value * s_xy + value * value * s_yy) / (count * y_bar * y_bar)
        return float(value), float(math.sqrt(max(variance, 0.0)))


@dataclass(frozen=True)
class F2Estimate:
    xi: float
    value: float
    stderr: float
    n_samples: int
    rng_policy: RngStreamPolicy
    ess_ratio: float = 1.0


@dataclass
class F2Run:
    """Estimates for one ξ grid plus sampling bookkeeping."""
    estimates: List[F2Estimate]
    dropped: int = 0
    attempted: int = 0
    flagged: bool = False
    warnings: List[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.estimates)

    def __len__(self):
        return len(self.estimates)

    def __getitem__(self, index):
        return self.estimates[index]


def _channel_layout(window: EnergyWindow) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distinct abscissae and, per channel, the index pair into them.

    Channels are the ξ grid followed by the denominator (E, E). The
    denominator and ξ = 0 resolve to the same pair, so they are computed
    bit-for-bit identically.
    """
    pairs = [window.points(xi) for xi in window.xi_grid] + [(window.e, window.e)]
    abscissae, inverse = np.unique(np.array(pairs, dtype=float).ravel(), return_inverse=True)
    return abscissae, inverse.reshape(-1, 2)


def _run_stream(
        profile: CovarianceProfile,
        window: EnergyWindow,
        rng_policy: RngStreamPolicy,
        stream: int,
        count: int
) -> Tuple[LogProductAccumulator, int]:
    abscissae, pair_index = _channel_layout(window)
    channels = pair_index.shape[0]
    accumulator = LogProductAccumulator(channels=channels)
    rng = rng_policy.generator(stream)
    dropped = 0

    logs = np.empty((_BATCH_ROWS, channels))
    signs = np.empty((_BATCH_ROWS, channels))
    filled = 0
    for _ in range(count):
        h = draw_rbm(profile, rng)
        try:
            eigenvalues = np.linalg.eigvalsh(h)
        except np.linalg.LinAlgError as e:
            dropped += 1
            logger.warning("Stream %d: eigensolve failed, sample dropped (%s)", stream, e)
            continue

        point_logs, point_signs = _log_abs_products(eigenvalues, abscissae)
        logs[filled] = point_logs[pair_index[:, 0]] + point_logs[pair_index[:, 1]]
        signs[filled] = point_signs[pair_index[:, 0]] * point_signs[pair_index[:, 1]]
        filled += 1
        if filled == _BATCH_ROWS:
            accumulator.update(logs, signs)
            filled = 0

    if filled:
        accumulator.update(logs[:filled], signs[:filled])
    return accumulator, dropped


def estimate_fbar(
        profile: CovarianceProfile,
        window: EnergyWindow,
        n_samples: int,
        rng_policy: RngStreamPolicy,
        workers: Optional[int] = None
) -> F2Run:
    """
    Estimate F̄2 at every ξ of the window.

    Streams run on up to `workers` threads; per-stream accumulators are
    merged in stream order, so the result depends only on rng_policy.
    """
    if n_samples < MIN_SAMPLES:
        raise InvalidArgumentError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    if window.n != profile.n:
        raise InvalidArgumentError(f"Window n={window.n} does not match covariance n={profile.n}")

    counts = rng_policy.split(n_samples)
    workers = max(1, min(workers or rng_policy.stream_count, rng_policy.stream_count))
    logger.info(
        "Sampling n=%d W=%g E=%g: %d samples over %d streams on %d workers",
        profile.n, profile.w, window.e, n_samples, rng_policy.stream_count, workers,
    )

    def task(stream):
        return _run_stream(profile, window, rng_policy, stream, counts[stream])

    if workers == 1:
        results = [task(stream) for stream in range(rng_policy.stream_count)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(rng_policy.stream_count)))

    total = LogProductAccumulator(channels=len(window.xi_grid) + 1)
    dropped = 0
    for accumulator, stream_dropped in results:
        total.merge(accumulator)
        dropped += stream_dropped

    run = F2Run(estimates=[], dropped=dropped, attempted=n_samples)
    if total.count < 2:
        raise InsufficientDataError(
            f"Only {total.count} of {n_samples} samples survived the eigensolver",
            details={"dropped": dropped, "attempted": n_samples},
        )
    if dropped:
        message = f"{dropped} of {n_samples} samples dropped after eigensolver failures"
        logger.warning(message)
        if dropped > DROP_FLAG_FRACTION * n_samples:
            run.flagged = True
            run.warnings.append(message)
            warnings.warn(message, AccuracyWarning)

    for channel, xi in enumerate(window.xi_grid):
        value, stderr = total.ratio(channel)
        run.estimates.append(F2Estimate(
            xi=xi,
            value=value,
            stderr=stderr,
            n_samples=total.count,
            rng_policy=rng_policy,
            ess_ratio=total.ess_ratio(channel),
        ))
    return run


@dataclass(frozen=True)
class CrossoverRow:
    xi: float
    mc_value: float
    mc_stderr: float
    limit_value: float

    @property
    def abs_gap(self) -> float:
        return abs(self.mc_value - self.limit_value)


@dataclass
class CrossoverTable:
    rows: List[CrossoverRow]
    run: F2Run
    spec: LatticeSpec


def crossover_experiment(
        c_star: float,
        w: float,
        window: EnergyWindow,
        n_samples: int,
        rng_policy: RngStreamPolicy,
        workers: Optional[int] = None
) -> CrossoverTable:
    """
    Monte Carlo F̄2 on the critical line n = C_* W^2 next to the crossover
    limit evaluated at the same (C_*, E, ξ).
    """
    from .sphere_operator import limit_formula

    spec = LatticeSpec.critical(c_star, w)
    if spec.n < 8:
        raise InvalidArgumentError(f"c_star*W^2 gives n={spec.n}; need n >= 8")
    if window.n != spec.n:
        raise InvalidArgumentError(f"Window n={window.n} does not match round(c_star*W^2)={spec.n}")

    profile = build_covariance(spec)
    run = estimate_fbar(profile, window, n_samples, rng_policy, workers=workers)

    rows = []
    for estimate in run:
        limit = limit_formula(c_star, window.e, estimate.xi)
        rows.append(CrossoverRow(
            xi=estimate.xi,
            mc_value=estimate.value,
            mc_stderr=estimate.stderr,
            limit_value=float(limit.value.real),
        ))
    return CrossoverTable(rows=rows, run=run, spec=spec)

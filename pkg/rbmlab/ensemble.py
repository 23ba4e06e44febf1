"""
Gaussian Hermitian band matrices with E{H_ij H_lk} = δ_ik δ_jl J_ij.

Off-diagonal entries are complex Gaussian with E|H_ij|^2 = J_ij and
E H_ij^2 = 0; diagonal entries are real Gaussian with variance J_ii.
Every draw comes from a counter-based (Philox) stream keyed by
(master_seed, stream), so results never depend on thread scheduling.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, List, Tuple

import numpy as np

from .covariance import CovarianceProfile
from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

SAMPLE_MAGIC = b"RBM1"
_HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class SeedRecord:
    seed: int
    stream: int


@dataclass(frozen=True)
class RngStreamPolicy:
    """Master seed plus the number of independent substreams."""
    master_seed: int
    stream_count: int = 1

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise InvalidArgumentError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.stream_count < 1:
            raise InvalidArgumentError(f"stream_count must be positive, got {self.stream_count}")

    def record(self, stream: int) -> SeedRecord:
        return SeedRecord(seed=self.master_seed, stream=stream)

    def generator(self, stream: int) -> np.random.Generator:
        return stream_generator(self.record(stream))

    def split(self, total: int) -> List[int]:
        """Per-stream sample counts; the first streams absorb the remainder."""
        base, extra = divmod(int(total), self.stream_count)
        return [base + (1 if s < extra else 0) for s in range(self.stream_count)]


def stream_generator(seed_record: SeedRecord) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed_record.seed, spawn_key=(seed_record.stream,))
    return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True, eq=False)
class RbmSample:
    h: np.ndarray = field(repr=False)
    seed_record: SeedRecord

    @property
    def n(self) -> int:
        return self.h.shape[0]


@lru_cache(maxsize=8)
def _entry_scales(profile: CovarianceProfile) -> Tuple[np.ndarray, np.ndarray]:
    """Strict upper-triangle scales sqrt(J_ij / 2) and diagonal scales sqrt(J_ii)."""
    entries = profile.entries
    upper = np.triu(np.sqrt(np.clip(entries, 0.0, None) / 2.0), k=1)
    return upper, np.sqrt(np.diag(entries))


def draw_rbm(profile: CovarianceProfile, rng: np.random.Generator) -> np.ndarray:
    """One Hermitian draw; the lower triangle is the exact conjugate of the upper."""
    n = profile.n
    upper_scale, diag_scale = _entry_scales(profile)

    g = rng.standard_normal((2, n, n))
    upper = upper_scale * (g[0] + 1j * g[1])
    h = upper + upper.conj().T
    h[np.diag_indices(n)] = diag_scale * rng.standard_normal(n)
    return h


def sample_rbm(profile: CovarianceProfile, seed_record: SeedRecord) -> RbmSample:
    """Draw the first matrix of the stream named by seed_record."""
    rng = stream_generator(seed_record)
    return RbmSample(h=draw_rbm(profile, rng), seed_record=seed_record)


def sample_stream(
        profile: CovarianceProfile,
        seed_record: SeedRecord,
        count: int
) -> Iterator[RbmSample]:
    """Draw `count` consecutive matrices from one stream."""
    rng = stream_generator(seed_record)
    for _ in range(count):
        yield RbmSample(h=draw_rbm(profile, rng), seed_record=seed_record)


@dataclass(frozen=True, eq=False)
class EmpiricalCovariance:
    mean_abs_square: np.ndarray
    mean_square: np.ndarray
    abs_square_stderr: np.ndarray
    square_stderr: np.ndarray
    count: int


def empirical_covariance(samples: Iterable[RbmSample]) -> EmpiricalCovariance:
    """
    Entrywise moments E|H_ij|^2 and E H_ij^2 with standard errors.

    Samples are consumed one at a time, so a generator of any length works.
    The standard error of the complex mean square combines the variances of
    its real and imaginary parts.
    """
    count = 0
    shape = None
    sum_abs2 = sum_abs4 = None
    sum_sq = sum_sq_re2 = sum_sq_im2 = None

    for sample in samples:
        h = sample.h
        if shape is None:
            shape = h.shape
            sum_abs2 = np.zeros(shape)
            sum_abs4 = np.zeros(shape)
            sum_sq = np.zeros(shape, dtype=complex)
            sum_sq_re2 = np.zeros(shape)
            sum_sq_im2 = np.zeros(shape)
        elif h.shape != shape:
            raise InvalidArgumentError(f"Sample shape {h.shape} differs from {shape}")

        abs2 = h.real ** 2 + h.imag ** 2
        sq = h * h
        sum_abs2 += abs2
        sum_abs4 += abs2 * abs2
        sum_sq += sq
        sum_sq_re2 += sq.real * sq.real
        sum_sq_im2 += sq.imag * sq.imag
        count += 1

    if count < 2:
        raise InvalidArgumentError(f"Need at least 2 samples, got {count}")

    def _stderr(total, total_sq):
        mean = total / count
        variance = np.clip(total_sq / count - mean * mean, 0.0, None) * count / (count - 1)
        return np.sqrt(variance / count)

    mean_sq = sum_sq / count
    square_stderr = np.sqrt(
        _stderr(sum_sq.real, sum_sq_re2) ** 2 + _stderr(sum_sq.imag, sum_sq_im2) ** 2
    )
    return EmpiricalCovariance(
        mean_abs_square=sum_abs2 / count,
        mean_square=mean_sq,
        abs_square_stderr=_stderr(sum_abs2, sum_abs4),
        square_stderr=square_stderr,
        count=count,
    )


def write_samples(samples: List[RbmSample], path: Path) -> dict:
    """
    Write samples in the RBM1 layout and return the JSON manifest.

    Layout (little-endian): magic "RBM1", n as u32, count as u32, then
    `count` blocks of n^2 complex values as interleaved f64 (re, im),
    row-major.
    """
    if not samples:
        raise InvalidArgumentError("No samples to write")
    n = samples[0].n
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(SAMPLE_MAGIC, n, len(samples)))
        for sample in samples:
            fh.write(np.ascontiguousarray(sample.h, dtype="<c16").tobytes())

    return {
        "format": SAMPLE_MAGIC.decode(),
        "n": n,
        "count": len(samples),
        "seed_records": [[s.seed_record.seed, s.seed_record.stream] for s in samples],
        "file": path.name,
    }


def read_samples(path: Path) -> np.ndarray:
    """Read an RBM1 file back as an array of shape (count, n, n)."""
    data = Path(path).read_bytes()
    magic, n, count = _HEADER.unpack_from(data)
    if magic != SAMPLE_MAGIC:
        raise InvalidArgumentError(f"Not an RBM1 file: magic {magic!r}")
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if body.size != count * n * n:
        raise InvalidArgumentError(f"Truncated RBM1 file: {body.size} values for {count}x{n}x{n}")
    return body.reshape(count, n, n)


def write_manifest(manifest: dict, path: Path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

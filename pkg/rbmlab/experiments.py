"""
Experiment orchestration: one validated config in, output files plus a
RunRecord out.

This module handles:
- config validation and canonical JSON (ExperimentConfig)
- dispatch to the numerical module that owns each mode
- CSV/JSON output with sha256 checksums
- capture of inner-module warnings into the RunRecord
- mapping failures onto exit codes (2 usage, 3 numerical)
"""

import hashlib
import json
import logging
import subprocess
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from django.db import DatabaseError
from django.utils import timezone

from . import __version__
from .charpoly_mc import EnergyWindow, crossover_experiment, estimate_fbar
from .covariance import LatticeSpec, build_covariance, decay_profile, laplacian_residual
from .ensemble import RngStreamPolicy, sample_stream, write_manifest, write_samples
from .errors import ConfigError, DomainError, InvalidArgumentError, NumericalError
from .forms import MODE_FORMS
from .models import RunRecord
from .sphere_operator import crossover_scan, kstar_spectrum, limit_formula
from .transfer_diagnostics import diagnostics_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
SHARED_KEYS = ('seed', 'streams', 'out')


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0
    streams: int = 1
    out: str = ''

    @classmethod
    def from_mapping(cls, mode: str, data: dict) -> "ExperimentConfig":
        """Validate a flat mapping with the form registered for `mode`."""
        form_class = MODE_FORMS.get(mode)
        if form_class is None:
            raise ConfigError(
                f"Unknown mode {mode!r}",
                errors={'mode': [f"Expected one of {sorted(MODE_FORMS)}"]},
            )

        data = dict(data)
        if data.pop('mode', mode) != mode:
            raise ConfigError("Config file mode does not match the command", errors={'mode': ['mismatch']})
        unknown = sorted(set(data) - set(form_class.base_fields))
        if unknown:
            raise ConfigError(
                f"Unknown parameters for {mode}: {', '.join(unknown)}",
                errors={key: ['Unknown parameter.'] for key in unknown},
            )

        form = form_class(data)
        if not form.is_valid():
            raise ConfigError(f"Invalid {mode} configuration", errors=form.errors.get_json_data())

        return cls(
            mode=mode,
            params=form.params(),
            seed=form.cleaned_data['seed'],
            streams=form.cleaned_data['streams'],
            out=form.cleaned_data['out'],
        )

    def to_mapping(self) -> dict:
        mapping = {'mode': self.mode, 'seed': self.seed, 'streams': self.streams, 'out': self.out}
        mapping.update(self.params)
        return mapping

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}")
        if not isinstance(data, dict) or 'mode' not in data:
            raise ConfigError("Config must be a JSON object with a 'mode' key")
        return cls.from_mapping(data['mode'], data)

    @property
    def rng_policy(self) -> RngStreamPolicy:
        return RngStreamPolicy(master_seed=self.seed, stream_count=self.streams)


@lru_cache(maxsize=1)
def tool_version() -> str:
    """`git describe` of the checkout, or v<package version> outside git."""
    try:
        result = subprocess.run(
            ['git', 'describe', '--tags', '--always', '--dirty'],
            cwd=settings.BASE_DIR,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        described = result.stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), '.17g')


def format_csv(header: Optional[Sequence[str]], rows: Iterable[Sequence]) -> bytes:
    """CSV with 17 significant digits, '.' decimals and '\\n' line endings."""
    lines = [','.join(header)] if header else []
    lines.extend(','.join(_format_value(v) for v in row) for row in rows)
    return ('\n'.join(lines) + '\n').encode('ascii')


def format_json(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + '\n').encode('utf-8')


def resolve_prefix(out: str) -> Path:
    """A bare prefix lands in RBMLAB_OUTPUT_DIR; anything with a directory is used as given."""
    path = Path(out)
    if not path.is_absolute() and path.parent == Path('.'):
        path = Path(settings.RBMLAB_OUTPUT_DIR) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write(prefix: Path, suffix: str, payload: bytes) -> Path:
    path = prefix.with_name(prefix.name + suffix)
    path.write_bytes(payload)
    return path


# Mode handlers: (config, prefix, workers) -> (written paths, notes for the RunRecord)

Handler = Callable[[ExperimentConfig, Path, Optional[int]], Tuple[List[Path], List[str]]]


def _run_covariance(config, prefix, workers):
    p = config.params
    profile = build_covariance(LatticeSpec(n=p['n'], w=p['w']))
    sidecar = {
        'n': profile.n,
        'w': profile.w,
        'row_sum_max_err': profile.row_sum_error(),
        'laplacian_residual': laplacian_residual(profile),
        'decay_profile': [[k, r] for k, r in decay_profile(profile)],
    }
    return [
        _write(prefix, '.csv', format_csv(None, profile.entries)),
        _write(prefix, '.json', format_json(sidecar)),
    ], []


def _run_sample(config, prefix, workers):
    p = config.params
    profile = build_covariance(LatticeSpec(n=p['n'], w=p['w']))
    policy = config.rng_policy
    samples = []
    for stream, count in enumerate(policy.split(p['count'])):
        samples.extend(sample_stream(profile, policy.record(stream), count))

    data_path = prefix.with_name(prefix.name + '.rbm')
    manifest = write_samples(samples, data_path)
    manifest['w'] = profile.w
    manifest_path = prefix.with_name(prefix.name + '.json')
    write_manifest(manifest, manifest_path)
    return [data_path, manifest_path], []


def _run_mc_f2(config, prefix, workers):
    p = config.params
    profile = build_covariance(LatticeSpec(n=p['n'], w=p['w']))
    window = EnergyWindow(e=p['e'], xi_grid=tuple(p['xi']), n=p['n'])
    run = estimate_fbar(profile, window, p['samples'], config.rng_policy, workers=workers)

    rows = [(est.xi, est.value, est.stderr, est.n_samples, est.ess_ratio) for est in run]
    notes = [f"dropped_samples: {run.dropped} of {run.attempted}"] if run.dropped else []
    header = ('xi', 'value', 'stderr', 'n_samples', 'ess_ratio')
    return [_write(prefix, '.csv', format_csv(header, rows))], notes


def _run_limit(config, prefix, workers):
    p = config.params
    rows = []
    for xi in p['xi_list']:
        limit = limit_formula(p['cstar'], p['e'], xi, p['L'])
        rows.append((xi, limit.value.real, limit.imag_residual, limit.order))
    header = ('xi', 'value', 'imag_residual', 'L_used')
    return [_write(prefix, '.csv', format_csv(header, rows))], []


def _run_kstar_spectrum(config, prefix, workers):
    p = config.params
    rows = kstar_spectrum(p['t'], p['w'], p['jmax'], p['quad_order'])
    header = ('j', 'lambda_quadrature', 'lambda_asymptotic', 'rel_dev')
    return [_write(prefix, '.csv', format_csv(header, rows))], []


def _run_crossover_scan(config, prefix, workers):
    p = config.params
    scan = crossover_scan(p['xi'], p['e'], p['cstar_min'], p['cstar_max'], p['points'], p['L'])
    rows = [(c_star, limit.value.real, limit.imag_residual, limit.order) for c_star, limit in scan]
    header = ('cstar', 'value', 'imag_residual', 'L_used')
    return [_write(prefix, '.csv', format_csv(header, rows))], []


def _run_compare(config, prefix, workers):
    p = config.params
    spec = LatticeSpec.critical(p['cstar'], p['w'])
    window = EnergyWindow(e=p['e'], xi_grid=tuple(p['xi_list']), n=spec.n)
    table = crossover_experiment(p['cstar'], p['w'], window, p['samples'], config.rng_policy, workers=workers)

    rows = [(r.xi, r.mc_value, r.mc_stderr, r.limit_value, r.abs_gap) for r in table.rows]
    notes = [f"dropped_samples: {table.run.dropped} of {table.run.attempted}"] if table.run.dropped else []
    header = ('xi', 'mc_value', 'mc_stderr', 'limit_value', 'abs_gap')
    return [_write(prefix, '.csv', format_csv(header, rows))], notes


def _run_diagnostics(config, prefix, workers):
    p = config.params
    report = diagnostics_report(p['e'], p['w'], half_width=p['half_width'], nodes=p['nodes'], seed=config.seed)
    return [_write(prefix, '.json', format_json(report))], []


HANDLERS: Dict[str, Handler] = {
    'covariance': _run_covariance,
    'sample': _run_sample,
    'mc-f2': _run_mc_f2,
    'limit': _run_limit,
    'kstar-spectrum': _run_kstar_spectrum,
    'crossover-scan': _run_crossover_scan,
    'compare': _run_compare,
    'diagnostics': _run_diagnostics,
}


def error_payload(error: Exception) -> dict:
    """Machine-readable description of a failure."""
    payload = {'error': type(error).__name__, 'message': str(error)}
    if isinstance(error, ConfigError) and error.errors:
        payload['errors'] = error.errors
    if isinstance(error, NumericalError) and error.details:
        payload['details'] = error.details
    return payload


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _collect_warnings(caught, notes: List[str]) -> List[str]:
    messages = [f"{w.category.__name__}: {w.message}" for w in caught] + notes
    return list(dict.fromkeys(messages))


def run(config: ExperimentConfig, workers: Optional[int] = None) -> RunRecord:
    """
    Execute one experiment and return its RunRecord.

    Failures inside the experiment do not propagate: the record carries
    status, exit code and the error JSON, and a `<prefix>.run.json` sidecar
    is written when the output directory allows it. An output prefix whose
    directory cannot be created raises ConfigError before anything runs.
    """
    started_at = timezone.now()
    start = time.perf_counter()
    try:
        prefix = resolve_prefix(config.out or config.mode)
    except OSError as e:
        raise ConfigError(f"Cannot create output directory for {config.out or config.mode}: {e}")
    written: List[Path] = []
    notes: List[str] = []
    status, exit_code, error = 'success', EXIT_OK, None

    logger.info("Starting %s run -> %s", config.mode, prefix)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        try:
            written, notes = HANDLERS[config.mode](config, prefix, workers)
        except (ConfigError, InvalidArgumentError, DomainError) as e:
            status, exit_code, error = 'usage_error', EXIT_USAGE, error_payload(e)
            logger.error("%s run rejected: %s", config.mode, e)
        except OSError as e:
            status, exit_code, error = 'usage_error', EXIT_USAGE, error_payload(e)
            logger.error("%s run could not write its outputs: %s", config.mode, e)
        except (NumericalError, np.linalg.LinAlgError, MemoryError) as e:
            status, exit_code, error = 'numerical_error', EXIT_NUMERICAL, error_payload(e)
            logger.error("%s run failed numerically: %s", config.mode, e)

    record = RunRecord(
        mode=config.mode,
        config=config.to_mapping(),
        tool_version=tool_version(),
        status=status,
        exit_code=exit_code,
        started_at=started_at,
        duration_seconds=time.perf_counter() - start,
        checksums={path.name: _sha256(path) for path in written},
        warnings=_collect_warnings(caught, notes),
        error=error,
    )
    try:
        _write(prefix, '.run.json', format_json(record.to_dict()))
    except OSError:
        logger.exception("Could not write the run sidecar for %s", prefix)

    if settings.RBMLAB_RECORD_RUNS:
        try:
            record.save()
        except DatabaseError:
            logger.exception("Could not persist RunRecord for %s; outputs are on disk", config.mode)

    logger.info(
        "Finished %s run in %.2fs (exit %d, %d warning(s))",
        config.mode, record.duration_seconds, exit_code, len(record.warnings),
    )
    return record

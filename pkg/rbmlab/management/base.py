import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rbmlab.errors import ConfigError
from rbmlab.experiments import EXIT_USAGE, ExperimentConfig, error_payload, run


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing for the experiment subcommands.

    Values come from form defaults, then the --config JSON file, then
    explicit flags. Subclasses set `mode` and declare their flags in
    add_mode_arguments with default=None so unset flags never override
    the file.
    """
    mode = None

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='Master seed (64-bit)')
        parser.add_argument('--streams', type=int, help='Number of independent RNG streams')
        parser.add_argument('--out', help='Output prefix; a bare name goes under RBMLAB_OUTPUT_DIR')
        parser.add_argument('--config', help='Flat JSON config file; flags override its values')
        parser.add_argument(
            '--workers',
            type=int,
            help='Worker threads for Monte Carlo sampling (default: RBMLAB_WORKERS)',
        )
        self.add_mode_arguments(parser)

    def add_mode_arguments(self, parser):
        pass

    def config_keys(self):
        from rbmlab.forms import MODE_FORMS
        return list(MODE_FORMS[self.mode].base_fields)

    def load_config_file(self, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return data

    def build_config(self, options):
        data = self.load_config_file(options['config']) if options.get('config') else {}
        for key in self.config_keys():
            if options.get(key) is not None:
                data[key] = options[key]
        return ExperimentConfig.from_mapping(self.mode, data)

    def handle(self, *args, **options):
        try:
            config = self.build_config(options)
            workers = options.get('workers') or settings.RBMLAB_WORKERS
            self.stdout.write(f"Running {config.mode} (seed={config.seed}, streams={config.streams})...")
            record = run(config, workers=workers)
        except ConfigError as e:
            raise CommandError(json.dumps(error_payload(e), sort_keys=True), returncode=EXIT_USAGE)

        for message in record.warnings:
            self.stdout.write(self.style.WARNING(f"⚠️  {message}"))
        if record.exit_code:
            raise CommandError(json.dumps(record.error, sort_keys=True), returncode=record.exit_code)

        for name, digest in record.checksums.items():
            self.stdout.write(f"  {name}  sha256:{digest[:16]}")
        self.stdout.write(self.style.SUCCESS(
            f"✅ {config.mode} finished in {record.duration_seconds:.2f}s ({record.tool_version})"
        ))

from rbmlab.errors import ConfigError
from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Run any experiment from a flat JSON config; its 'mode' key picks the handler"

    def config_keys(self):
        return ['seed', 'streams', 'out']

    def build_config(self, options):
        if not options.get('config'):
            raise ConfigError('run_experiment needs --config', errors={'config': ['This option is required.']})
        self.mode = self.load_config_file(options['config']).get('mode')
        return super().build_config(options)

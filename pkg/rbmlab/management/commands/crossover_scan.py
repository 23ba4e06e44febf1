from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Scan the crossover limit over a log-spaced range of C_* at fixed ξ'
    mode = 'crossover-scan'

    def add_mode_arguments(self, parser):
        parser.add_argument('--xi', type=float, help='ξ')
        parser.add_argument('--e', type=float, help='Spectral center E in (-2, 2)')
        parser.add_argument('--cstar-min', type=float, help='Smallest C_*')
        parser.add_argument('--cstar-max', type=float, help='Largest C_*')
        parser.add_argument('--points', type=int, help='Number of log-spaced points')
        parser.add_argument('--L', type=int, help='Starting Legendre truncation order (>= 8)')

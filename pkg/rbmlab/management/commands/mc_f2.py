from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Monte Carlo estimate of the normalized characteristic polynomial correlator F2(ξ)'
    mode = 'mc-f2'

    def add_mode_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Matrix size')
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')
        parser.add_argument('--e', type=float, help='Spectral center E in (-2, 2)')
        parser.add_argument('--xi', help='Comma-separated ξ values')
        parser.add_argument('--samples', type=int, help='Number of matrices (>= 100)')

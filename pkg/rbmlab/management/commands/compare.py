from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Monte Carlo F2 on the critical line n = C_* W^2 against the crossover limit'
    mode = 'compare'

    def add_mode_arguments(self, parser):
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')
        parser.add_argument('--cstar', type=float, help='C_* > 0; n = round(C_* W^2)')
        parser.add_argument('--e', type=float, help='Spectral center E in (-2, 2)')
        parser.add_argument('--xi-list', help='Comma-separated ξ values')
        parser.add_argument('--samples', type=int, help='Number of matrices (>= 100)')

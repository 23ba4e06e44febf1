from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Evaluate the crossover limit (e^{-C*Δ - iπξν} 1, 1) for a list of ξ'
    mode = 'limit'

    def add_mode_arguments(self, parser):
        parser.add_argument('--cstar', type=float, help='C_* >= 0')
        parser.add_argument('--e', type=float, help='Spectral center E in (-2, 2)')
        parser.add_argument('--xi-list', help='Comma-separated ξ values')
        parser.add_argument('--L', type=int, help='Starting Legendre truncation order (>= 8)')

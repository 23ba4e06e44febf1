from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Build the band covariance J = (-W^2 Δ + 1)^-1 and write it as CSV with a JSON sidecar'
    mode = 'covariance'

    def add_mode_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Number of lattice sites')
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')

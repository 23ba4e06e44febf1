from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Draw random band matrices and write them in the RBM1 binary layout'
    mode = 'sample'

    def add_mode_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Matrix size')
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')
        parser.add_argument('--count', type=int, help='Number of matrices to draw')

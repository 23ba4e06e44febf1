from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'JSON report on the saddle structure and the A-kernel leading eigenvalue'
    mode = 'diagnostics'

    def add_mode_arguments(self, parser):
        parser.add_argument('--e', type=float, help='Spectral center E in (-2, 2)')
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')
        parser.add_argument('--half-width', type=float, help='A-kernel grid is [-half_width, half_width]')
        parser.add_argument('--nodes', type=int, help='A-kernel grid size (default meets spacing <= 1/(4W))')

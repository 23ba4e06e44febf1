from rbmlab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Funk–Hecke eigenvalues of the zonal kernel K* next to their large-W^2 t asymptotics'
    mode = 'kstar-spectrum'

    def add_mode_arguments(self, parser):
        parser.add_argument('--t', type=float, help='Saddle coordinate t > 0')
        parser.add_argument('--w', type=float, help='Bandwidth W >= 1')
        parser.add_argument('--jmax', type=int, help='Highest harmonic index')
        parser.add_argument('--quad-order', type=int, help='Gauss–Legendre order (default resolves the kernel peak)')

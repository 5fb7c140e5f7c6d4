import argparse
import logging

import numpy as np

from app_service.defect_lab import DefectLab
from profile_solver.mesh import MeshSpec
from qtensor.core import BulkParams

logger = logging.getLogger(__name__)


def solver_order(lab: DefectLab, params: BulkParams, r_max: float, nodes: int):
    """ Max-norm differences of u between N and 2N and between 2N and 4N on shared nodes, and their ratio. """
    coarse, middle, fine = (lab.solve(params, MeshSpec(r_max, nodes * factor)) for factor in (1, 2, 4))
    first = float(np.max(np.abs(coarse.u - middle.u[::2])))
    second = float(np.max(np.abs(middle.u - fine.u[::2])))
    return first, second, first / second


def core_energy_drift(lab: DefectLab, params: BulkParams, r_max: float, nodes: int):
    """ Core energy on [0, r_max] and on [0, 2 r_max] with the same spacing. """
    mesh = MeshSpec(r_max, nodes)
    near = lab.energy(lab.solve(params, mesh))[0].core_energy
    far = lab.energy(lab.solve(params, mesh.doubled()))[0].core_energy
    return near, far


def main():
    parser = argparse.ArgumentParser(description='Solver order and core-energy drift.')
    parser.add_argument('--t', type=float, nargs='+', default=[0.1, 1.0 / 3.0, 1.0])
    parser.add_argument('--k', type=int, default=1)
    parser.add_argument('--rmax', type=float, default=40.0)
    parser.add_argument('--nodes', type=int, default=2048)
    args = parser.parse_args()
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(filename)s:%(lineno)d - %(levelname)s - %(message)s'
    )
    lab = DefectLab()
    print(f"{'t':>10} {'|du| N/2N':>12} {'|du| 2N/4N':>12} {'ratio':>8} {'E_core(R)':>14} {'E_core(2R)':>14}")
    for t in args.t:
        params = BulkParams(t, args.k)
        first, second, ratio = solver_order(lab, params, args.rmax, args.nodes)
        near, far = core_energy_drift(lab, params, args.rmax, args.nodes)
        print(f"{t:>10.6g} {first:>12.3e} {second:>12.3e} {ratio:>8.3f} {near:>14.8f} {far:>14.8f}")


if __name__ == "__main__":
    main()

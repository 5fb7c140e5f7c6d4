import argparse
import logging

from app_service.defect_lab import DefectLab
from profile_solver.mesh import MeshSpec
from qtensor.core import BulkParams

logger = logging.getLogger(__name__)


def main():
    parser = argparse.ArgumentParser(description='Near-zero eigenvalues of the kernel blocks at r_max and 2 r_max.')
    parser.add_argument('--t', type=float, default=0.5)
    parser.add_argument('--k', type=int, default=1)
    parser.add_argument('--rmax', type=float, default=40.0)
    parser.add_argument('--nodes', type=int, default=1024)
    parser.add_argument('--threads', type=int, default=1)
    args = parser.parse_args()
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(filename)s:%(lineno)d - %(levelname)s - %(message)s'
    )
    lab = DefectLab(threads=args.threads)
    profile = lab.solve(BulkParams(args.t, args.k), MeshSpec(args.rmax, args.nodes))
    outcome = lab.stability(profile, n_max=4, m_max=max(4, abs(args.k)), kernel_doubling=True)
    print(f"verdict: {outcome.verdict.value}, near-zero modes: {outcome.kernel.total_near_zero}")
    for name, similarity in outcome.kernel.similarities.items():
        print(f"{name}: similarity {similarity:.6f}")
    for label, values in outcome.kernel.near_zero_eigenvalues.items():
        ratios = outcome.decay.get(label, [])
        print(f"{label}: {', '.join(f'{value:.4e}' for value in values)}; "
              f"ratio R/2R {', '.join(f'{ratio:.3f}' for ratio in ratios)}")


if __name__ == "__main__":
    main()

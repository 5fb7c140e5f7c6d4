"""Stability sweep over the Fourier blocks, kernel matching and the stability verdict."""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.lab_exceptions import PreconditionError
from profile_solver.profile import Profile
from spectral.blocks import BlockSpec, Sector, sweep_blocks
from spectral.eigen import eig_smallest, inertia_below
from spectral.pencil import Pencil, assemble_block
from variation_forms.fields import J0_FIRST_ZERO, ModeCoefficients, bessel_taper, smooth_taper
from variation_forms.kernel import KERNEL_NAMES, kernel_vectors

logger = logging.getLogger(__name__)

MIN_TRUNCATION = 4
NEAR_ZERO_FACTOR = 1.6
EXPECTED_KERNEL_DIMENSION = 5
MONOTONE_SLACK = 1e-10
# Translation modes are cut off in the far field only, all others by the J0 profile
TRANSLATION_MODES = ('V1', 'V2')


class Verdict(Enum):
    STABLE = 'stable'
    UNSTABLE = 'unstable'
    INDETERMINATE = 'indeterminate'


@dataclass(frozen=True)
class BlockSpectrum:
    spec: BlockSpec
    eigenvalues: np.ndarray
    residuals: np.ndarray
    inertia: int
    method: str
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])


@dataclass(frozen=True)
class SpectralReport:
    t: float
    k: int
    r_max: float
    nodes: int
    n_max: int
    m_max: int
    shift: float
    tol: float
    blocks: Tuple[BlockSpectrum, ...]
    monotone_in_n: bool
    monotone_in_m: bool

    @property
    def near_zero_threshold(self) -> float:
        return near_zero_threshold(self.r_max)

    def block(self, label: str) -> BlockSpectrum:
        for entry in self.blocks:
            if entry.label == label:
                return entry
        raise KeyError(label)

    def near_zero_counts(self) -> Dict[str, int]:
        """ Near-zero eigenvalues per block, counted with the multiplicity of the block in the full operator. """
        threshold = self.near_zero_threshold
        return {entry.label: entry.spec.multiplicity * int(np.sum(np.abs(entry.eigenvalues) < threshold))
                for entry in self.blocks}

    @property
    def residuals_within_tolerance(self) -> bool:
        return all(np.all(entry.residuals <= self.tol) for entry in self.blocks)


@dataclass(frozen=True, slots=True)
class KernelMatch:
    similarities: Dict[str, float]
    near_zero_counts: Dict[str, int]
    near_zero_eigenvalues: Dict[str, List[float]]
    total_near_zero: int
    expected_counts: Dict[str, int] = field(default_factory=dict)

    @property
    def dimension_matches(self) -> bool:
        return self.total_near_zero == EXPECTED_KERNEL_DIMENSION

    @property
    def placement_matches(self) -> bool:
        """ Near-zero modes sit exactly in the kernel-bearing blocks with the expected counts, none elsewhere. """
        found = {label: count for label, count in self.near_zero_counts.items() if count}
        return found == self.expected_counts

    @property
    def contract_holds(self) -> bool:
        return self.dimension_matches and self.placement_matches


def near_zero_threshold(r_max: float) -> float:
    """ Eigenvalues below this magnitude are truncation images of zero modes. """
    return NEAR_ZERO_FACTOR * (J0_FIRST_ZERO / r_max) ** 2


def kernel_blocks(k: int) -> Dict[str, BlockSpec]:
    """ Block carrying each kernel vector. """
    rotation, translation = BlockSpec(Sector.A0_2, k), BlockSpec(Sector.A_N, k, 1)
    tilt = BlockSpec(Sector.B_PAIR, k, abs(k))
    return {'V0': rotation, 'V1': translation, 'V2': translation, 'V3': tilt, 'V4': tilt}


def expected_kernel_counts(k: int) -> Dict[str, int]:
    """ Near-zero modes each kernel-bearing block must hold: one per kernel vector it carries. """
    return dict(Counter(spec.label for spec in kernel_blocks(k).values()))


def _block_spectrum(profile: Profile, spec: BlockSpec, count: int, shift: float, tol: float, seed: int,
                    keep_vectors: bool) -> BlockSpectrum:
    pencil = assemble_block(profile, spec)
    pairs = eig_smallest(pencil, min(count, pencil.dimension), tol, seed)
    inertia = inertia_below(pencil, shift)
    below = int(np.sum(pairs.values < shift))
    if below < len(pairs.values) and below != inertia:
        logger.warning(f'{spec.label}: {below} computed eigenvalues below {shift:.3e} but inertia {inertia}')
    logger.info(f'{spec.label}: lambda_min={pairs.values[0]:.6e}, inertia below shift {inertia}, '
                f'max residual {pairs.max_residual:.2e}')
    return BlockSpectrum(spec=spec, eigenvalues=pairs.values, residuals=pairs.residuals, inertia=inertia,
                         method=pairs.method, vectors=pairs.vectors if keep_vectors else None)


def _nondecreasing(values: Sequence[float], scale: float) -> bool:
    return all(b >= a - MONOTONE_SLACK * scale for a, b in zip(values, values[1:]))


def stability_sweep(profile: Profile, n_max: int = 8, m_max: int = 8, eps: float = 1e-6, count: int = 4,
                    tol: float = 1e-8, seed: int = 0, threads: int = 1) -> SpectralReport:
    """ Smallest eigenvalues and certified inertia below -eps s+^2 of every block up to n_max and m_max.
    Eigenvectors are retained for the kernel-bearing blocks.
    Args:
        profile: solved profile.
        n_max: largest A-sector angular index, at least 4.
        m_max: largest B pair index, at least 4.
        eps: relative shift; the inertia shift is -eps s+^2.
        count: eigenpairs per block.
        tol: residual contract of the eigenpairs.
        seed: start-block seed of the iterative eigensolver.
        threads: parallel blocks.
    Returns:
        SpectralReport in block order.
    Raises:
        PreconditionError: if n_max or m_max is below 4.
    """
    if n_max < MIN_TRUNCATION or m_max < MIN_TRUNCATION:
        raise PreconditionError(f"n_max and m_max must be at least {MIN_TRUNCATION}, got {n_max}, {m_max}.")
    k, s = profile.params.k, profile.s_plus
    shift = -eps * s * s
    specs = sweep_blocks(k, n_max, m_max)
    kept = {spec.label for spec in kernel_blocks(k).values()}
    logger.info(f'Stability sweep t={profile.params.t}, k={k}: {len(specs)} blocks on {max(threads, 1)} threads')

    def run(spec: BlockSpec) -> BlockSpectrum:
        return _block_spectrum(profile, spec, count, shift, tol, seed, spec.label in kept)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        blocks = tuple(pool.map(run, specs))

    a_minima = [entry.lambda_min for entry in blocks if entry.spec.sector is Sector.A_N]
    b_minima = [entry.lambda_min for entry in blocks if entry.spec.sector is Sector.B_PAIR]
    return SpectralReport(t=profile.params.t, k=k, r_max=profile.mesh.r_max, nodes=profile.mesh.nodes,
                          n_max=n_max, m_max=m_max, shift=shift, tol=tol, blocks=blocks,
                          monotone_in_n=_nondecreasing(a_minima, s * s),
                          monotone_in_m=_nondecreasing(b_minima, s * s))


def kernel_representation(profile: Profile, pencil: Pencil, name: str, vector: ModeCoefficients) -> np.ndarray:
    """ DOF vector of a kernel vector cut off at r_max. Index-0 channels take the J0 Bessel profile, the
    translation modes the far-field smooth taper that leaves the core untouched. """
    r, r_max = profile.r, profile.mesh.r_max
    taper = smooth_taper(r, r_max) if name in TRANSLATION_MODES else bessel_taper(r, r_max)
    candidates = vector.scaled(taper).block_fields(pencil.spec)
    fields = max(candidates, key=lambda values: float(np.sum(values * values)))
    return pencil.embed(fields)


def _span_similarity(pencil: Pencil, basis: np.ndarray, vector: np.ndarray) -> float:
    norm = math.sqrt(float(vector @ (pencil.mass * vector)))
    if norm == 0.0 or basis.shape[1] == 0:
        return 0.0
    overlaps = basis.T @ (pencil.mass * vector)
    return float(np.linalg.norm(overlaps) / norm)


def kernel_match(profile: Profile, report: SpectralReport) -> KernelMatch:
    """ Cosine similarity, in the M inner product, between every kernel vector and the span of the near-zero
    eigenvectors of its block, together with the near-zero census over all blocks.
    Raises:
        PreconditionError: if a kernel-bearing block has no retained eigenvectors.
    """
    profile.require_derivatives()
    threshold = report.near_zero_threshold
    similarities = {}
    vectors = kernel_vectors(profile).raw
    for name in KERNEL_NAMES:
        spec = kernel_blocks(report.k)[name]
        try:
            entry = report.block(spec.label)
        except KeyError:
            raise PreconditionError(f"Report has no block {spec.label} for kernel vector {name}.")
        if entry.vectors is None:
            raise PreconditionError(f"Block {spec.label} was swept without eigenvectors.")
        pencil = assemble_block(profile, spec)
        near = np.abs(entry.eigenvalues) < threshold
        similarities[name] = _span_similarity(pencil, entry.vectors[:, near],
                                              kernel_representation(profile, pencil, name, vectors[name]))
        logger.debug(f'{name} vs {spec.label}: similarity {similarities[name]:.6f}')
    counts = report.near_zero_counts()
    eigenvalues = {entry.label: [float(value) for value in entry.eigenvalues if abs(value) < threshold]
                   for entry in report.blocks}
    match = KernelMatch(similarities=similarities, near_zero_counts=counts,
                        near_zero_eigenvalues={label: values for label, values in eigenvalues.items() if values},
                        total_near_zero=sum(counts.values()), expected_counts=expected_kernel_counts(report.k))
    if not match.contract_holds:
        logger.warning(f'Near-zero census {match.near_zero_eigenvalues} does not match the kernel '
                       f'{match.expected_counts}')
    return match


def truncation_decay(report: SpectralReport, doubled: SpectralReport) -> Dict[str, List[float]]:
    """ Ratios lambda(r_max) / lambda(2 r_max) of the near-zero eigenvalues of the kernel-bearing blocks. """
    ratios = {}
    for spec in {spec.label: spec for spec in kernel_blocks(report.k).values()}.values():
        small, large = report.block(spec.label), doubled.block(spec.label)
        near = np.abs(small.eigenvalues) < report.near_zero_threshold
        ratios[spec.label] = [float(a / b) for a, b in zip(small.eigenvalues[near], large.eigenvalues[near])]
    return ratios


def stability_verdict(report: SpectralReport) -> Verdict:
    """ Unstable on any certified negative count, stable when none and every residual contract holds. """
    if any(entry.inertia > 0 for entry in report.blocks):
        return Verdict.UNSTABLE
    if report.residuals_within_tolerance:
        return Verdict.STABLE
    return Verdict.INDETERMINATE

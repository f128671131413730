"""Sharp dilations of covariant bin observables.

Every normalized family of effects is the compression of a projection-valued
measure on a larger space.  The larger space used here is the quotient of
the direct sum of one copy of the model space per bin: block k carries the
retained eigendirections of effect k, weighted by the square roots of the
eigenvalues.  In those coordinates the sharp measure is literally a diagonal
0/1 indicator, the embedding of the model space is an isometry, and the
one-step time shift becomes a cyclic block permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_eigh
from .model import CovariantPOVM, StateVector, validate_povm

__all__ = [
    "Dilation",
    "build_dilation",
    "check_compression",
    "check_imprimitivity",
    "check_restriction",
    "check_occurrence_consistency",
    "shift_power_deviation",
]


@dataclass(frozen=True)
class Dilation:
    """Quotient-space data of a sharp dilation.

    ``embedding`` is the (rank x dim) isometry from the model space into the
    quotient; its block of rows for bin k is sqrt(L_k) W_k^dagger with
    (W_k, L_k) the retained eigenpairs of effect k.  ``shift`` implements
    one covariance step and ``projection`` projects the quotient onto the
    embedded copy of the model space.  ``lift_blocks[k]`` maps bin-k
    quotient coordinates back to model vectors (W_k L_k^{-1/2}).
    """

    povm: CovariantPOVM
    rank: int
    bin_slices: tuple
    embedding: np.ndarray
    shift: np.ndarray
    projection: np.ndarray
    lift_blocks: tuple
    kept_eigenvalues: tuple
    discarded_count: int

    def sharp_indicator(self, bins) -> np.ndarray:
        """Diagonal of the sharp measure for a set of bins."""
        d = np.zeros(self.rank)
        for k in np.atleast_1d(np.asarray(bins, dtype=int)):
            d[self.bin_slices[int(k) % self.povm.n_bins]] = 1.0
        return d

    def sharp_effect(self, bins) -> np.ndarray:
        return np.diag(self.sharp_indicator(bins)).astype(complex)

    def embed(self, state: StateVector) -> np.ndarray:
        return self.embedding @ state.amplitudes


def build_dilation(povm: CovariantPOVM, eps: float = 1e-12, validate_tol: float = 1e-10) -> Dilation:
    """Construct the quotient-space dilation of a validated observable.

    The family is checked against its axioms first; a family that is not
    complete, covariant, positive and additive at ``validate_tol`` has no
    dilation of this kind, and the error says which axiom failed.  Block
    eigenvalues below ``eps`` times the block maximum are treated as exact
    zeros and dropped from the quotient; an eigenvalue below -1e-8 times
    the block maximum means the input was not an effect at all.
    """
    report = validate_povm(povm, tol=validate_tol)
    if not report.passed:
        failed = [
            name
            for name, ok in [
                ("completeness", report.complete),
                ("covariance", report.covariant),
                ("positivity", report.positive),
                ("additivity", report.additive),
            ]
            if not ok
        ]
        raise ValueError(f"observable fails validation ({', '.join(failed)}); cannot dilate")

    n, dim = povm.n_bins, povm.dim
    blocks = []
    lifts = []
    kept = []
    slices = []
    start = 0
    discarded = 0
    for k in range(n):
        sp = hermitian_eigh(povm.effect(k))
        w, v = sp.eigenvalues, sp.eigenvectors
        wmax = float(w[-1]) if w.size else 0.0
        if wmax <= 0.0:
            raise ValueError(f"effect {k} vanishes; the bin carries no probability at all")
        if float(w[0]) < -1e-8 * wmax:
            raise ValueError(f"effect {k} has negative eigenvalue {w[0]:.3e}; not a positive operator")
        keep = w > eps * wmax
        wk = w[keep]
        vk = v[:, keep]
        r_k = int(wk.size)
        discarded += dim - r_k
        root = np.sqrt(wk)
        blocks.append(root[:, None] * vk.conj().T)
        lifts.append(vk / root[None, :])
        kept.append(wk)
        slices.append(slice(start, start + r_k))
        start += r_k

    rank = start
    embedding = np.vstack(blocks)
    phases = np.exp(1j * povm.grid.energies * povm.lattice.tau)
    shift = np.zeros((rank, rank), dtype=complex)
    for k in range(n):
        nxt = (k + 1) % n
        shift[slices[nxt], slices[k]] = blocks[nxt] @ (phases[:, None] * lifts[k])
    projection = embedding @ embedding.conj().T

    return Dilation(
        povm=povm,
        rank=rank,
        bin_slices=tuple(slices),
        embedding=embedding,
        shift=shift,
        projection=projection,
        lift_blocks=tuple(lifts),
        kept_eigenvalues=tuple(kept),
        discarded_count=discarded,
    )


def _random_bin_sets(n_bins: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    sets = []
    for _ in range(count):
        size = int(rng.integers(1, n_bins + 1))
        sets.append(np.sort(rng.choice(n_bins, size=size, replace=False)))
    return sets


def check_compression(dilation: Dilation, bin_sets=None, count: int = 100, seed: int = 0) -> float:
    """Largest entrywise gap between compressed sharp effects and bin sums.

    For every tested bin set B this compares V^dagger E(B) V against the sum
    of the effects over B, where V is the embedding.  With no explicit
    ``bin_sets`` a seeded collection of random subsets is used.
    """
    povm = dilation.povm
    if bin_sets is None:
        bin_sets = _random_bin_sets(povm.n_bins, count, seed)
    emb = dilation.embedding
    worst = 0.0
    for bins in bin_sets:
        ind = dilation.sharp_indicator(bins)
        compressed = (emb.conj().T * ind[None, :]) @ emb
        direct = np.zeros((povm.dim, povm.dim), dtype=complex)
        for k in np.atleast_1d(np.asarray(bins, dtype=int)):
            direct += povm.effect(int(k))
        worst = max(worst, float(np.max(np.abs(compressed - direct))))
    return worst


def check_imprimitivity(dilation: Dilation) -> float:
    """How far the shift fails to advance the sharp measure by one bin.

    Returns the largest entrywise residual of S E({k}) S^dagger = E({k+1})
    over all bins, together with the unitarity defect of S folded in: a
    shift that is not unitary cannot implement a group step.
    """
    s = dilation.shift
    rank = dilation.rank
    worst = float(np.max(np.abs(s.conj().T @ s - np.eye(rank))))
    n = dilation.povm.n_bins
    for k in range(n):
        ind = dilation.sharp_indicator([k])
        moved = (s * ind[None, :]) @ s.conj().T
        target = np.diag(dilation.sharp_indicator([(k + 1) % n]))
        worst = max(worst, float(np.max(np.abs(moved - target))))
    return worst


def check_restriction(dilation: Dilation) -> float:
    """Largest entry of S V - V U(tau): the shift must extend the evolution."""
    povm = dilation.povm
    phases = np.exp(1j * povm.grid.energies * povm.lattice.tau)
    lhs = dilation.shift @ dilation.embedding
    rhs = dilation.embedding * phases[None, :]
    return float(np.max(np.abs(lhs - rhs)))


def check_occurrence_consistency(dilation: Dilation, states) -> float:
    """Gap between model occurrence probabilities and quotient bin masses."""
    povm = dilation.povm
    worst = 0.0
    for state in states:
        probs = povm.occurrence_probabilities(state)
        q = dilation.embed(state)
        masses = np.array([float(np.sum(np.abs(q[sl]) ** 2)) for sl in dilation.bin_slices])
        worst = max(worst, float(np.max(np.abs(masses - probs))))
    return worst


def shift_power_deviation(dilation: Dilation) -> float:
    """Largest entry of S^n - phase * I after one full period.

    On grids whose offset is an integer multiple of the spacing the phase
    is exactly one and S^n is the identity; otherwise the full period
    contributes a global phase exp(2*pi*i*offset/de), which is quotiented
    out before measuring the deviation.
    """
    povm = dilation.povm
    n = povm.n_bins
    power = np.linalg.matrix_power(dilation.shift, n)
    phase = np.exp(2j * np.pi * povm.grid.offset / povm.grid.de)
    return float(np.max(np.abs(power - phase * np.eye(dilation.rank))))

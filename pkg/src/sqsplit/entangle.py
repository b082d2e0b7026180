"""Logarithmic negativity between the two wells.

For a pure conditional state the trace norm of the partial transpose is
(sum of Schmidt coefficients)^2, so E = log2 ||rho^{T_L}||_1 comes from
a singular value decomposition of the amplitude matrix.  For the
sector mixture, blocks with different left atom number stay mutually
orthogonal under left partial transposition, so the trace norms add
with their sector weights.  A dense route that materializes the full
two-well density matrix and transposes the left factor explicitly is
kept as an independent cross-check for small N.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import log_binomial
from .statekit import ConditionalState, SplitFullState, SplitMixedState

__all__ = [
    "SchmidtSpectrum",
    "schmidt",
    "log_negativity_pure",
    "log_negativity_mixed",
    "log_negativity_bracket",
    "log_negativity_dense",
]


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Nonincreasing Schmidt coefficients of a bipartite pure state."""

    coefficients: np.ndarray

    def __post_init__(self):
        lam = self.coefficients
        if np.any(lam < -1e-14):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if np.any(np.diff(lam) > 1e-12):
            raise ValueError("Schmidt coefficients must be sorted nonincreasing")
        if abs(float(np.sum(lam * lam)) - 1.0) > 1e-10:
            raise ValueError("squared Schmidt coefficients must sum to 1")


def schmidt(state):
    """Schmidt spectrum of a ConditionalState across the two wells."""
    lam = np.linalg.svd(state.psi, compute_uv=False)
    return SchmidtSpectrum(lam)


def log_negativity_pure(state):
    """log2 of the partial-transpose trace norm of a pure two-well state.

    Equals 2 log2(sum of Schmidt coefficients); zero iff the state is a
    product across the wells, at most log2(min(N_L, N_R) + 1).
    """
    lam = schmidt(state).coefficients
    return 2.0 * math.log2(float(np.sum(lam)))


def _block_trace_norms(mixture):
    terms = []
    for weight, block in mixture.blocks:
        lam = np.linalg.svd(block.psi, compute_uv=False)
        terms.append((weight, float(np.sum(lam)) ** 2))
    return terms


def log_negativity_mixed(mixture):
    """Logarithmic negativity of the sector mixture.

    Blocks at different left atom number remain orthogonal after left
    partial transposition, so ||rho^{T_L}||_1 = sum_l p_l (sum lambda^(l))^2.
    Requires the untruncated mixture; for truncated ones use
    log_negativity_bracket.
    """
    deficit = 1.0 - mixture.retained_mass
    if deficit > 1e-9:
        raise ValueError(
            "mixture is truncated; log_negativity_bracket gives certified bounds"
        )
    total = sum(w * s for w, s in _block_trace_norms(mixture))
    return math.log2(total)


def log_negativity_bracket(mixture):
    """Certified [lower, upper] bounds on the mixed log negativity.

    Missing sectors contribute a trace-norm factor between 1 (product)
    and min(N_L, N_R) + 1 (maximally entangled), weighted by their
    untruncated probabilities.
    """
    n = mixture.n_total
    total = sum(w * s for w, s in _block_trace_norms(mixture))
    present = {block.n_left for _, block in mixture.blocks}
    low_extra = 0.0
    high_extra = 0.0
    for l in range(n + 1):
        if l in present:
            continue
        p = math.exp(log_binomial(n, l) - n * math.log(2.0))
        low_extra += p
        high_extra += p * (min(l, n - l) + 1)
    return math.log2(total + low_extra), math.log2(total + high_extra)


def _dense_basis(n):
    """Index map for the full two-well one-species-per-well Fock space:
    every (well atom number, mode-a count) pair, dim (n+1)(n+2)/2."""
    index = {}
    for pop in range(n + 1):
        for k in range(pop + 1):
            index[(pop, k)] = len(index)
    return index


def log_negativity_dense(state, max_n=8):
    """Dense partial-transpose route, independent of the Schmidt identity.

    Materializes the density matrix on the full tensor product of the
    two well spaces, transposes the left factor explicitly, and sums the
    absolute eigenvalues.  Exponential in memory, so refuses n_total
    beyond max_n (default 8).
    """
    if isinstance(state, ConditionalState):
        n = state.n_total
        parts = [(1.0, [(state.n_left, state.psi)])]
    elif isinstance(state, SplitMixedState):
        n = state.n_total
        parts = [(w, [(b.n_left, b.psi)]) for w, b in state.blocks]
    elif isinstance(state, SplitFullState):
        # coherent superposition over sectors, still one pure vector
        n = state.n_total
        parts = [(1.0, [(l, state.sector(l)) for l in range(n + 1)])]
    else:
        raise TypeError(
            "expected a ConditionalState, SplitMixedState or SplitFullState"
        )
    if n > max_n:
        raise ValueError(f"dense route limited to n_total <= {max_n}")

    index = _dense_basis(n)
    d = len(index)
    rho = np.zeros((d * d, d * d), dtype=complex)
    for weight, sectors in parts:
        vec = np.zeros(d * d, dtype=complex)
        for n_left, psi in sectors:
            for k_l in range(n_left + 1):
                il = index[(n_left, k_l)]
                for k_r in range(n - n_left + 1):
                    ir = index[(n - n_left, k_r)]
                    vec[il * d + ir] = psi[k_l, k_r]
        rho += weight * np.outer(vec, vec.conj())

    pt = np.transpose(rho.reshape(d, d, d, d), (2, 1, 0, 3)).reshape(d * d, d * d)
    scale = max(1.0, float(np.abs(pt).max()))
    if np.abs(pt - pt.conj().T).max() > 1e-10 * scale:
        raise AssertionError("partial transpose lost Hermiticity")
    eig = np.linalg.eigvalsh(pt)
    return math.log2(float(np.sum(np.abs(eig))))

"""State preparation and splitting for two-component ensembles.

A single ensemble of N atoms in two internal modes (a, b) lives in the
symmetric Fock basis |k> with k atoms in mode a, k = 0..N.  States are
prepared as spin coherent states, squeezed by one-axis twisting (a pure
phase map in this basis), and distributed over two spatial wells by a
50/50 beam splitter acting on both internal modes.  Measuring the atom
number N_L in the left well collapses the split state onto a sector;
the conditional two-well states and the binomial mixture over sectors
are the objects every downstream module consumes.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .specfun import log_binomial

__all__ = [
    "StateVector",
    "SplitFullState",
    "ConditionalState",
    "SplitMixedState",
    "ZeroProbabilityError",
    "spin_coherent",
    "one_axis_twist",
    "split",
    "project_left_number",
    "effective_evolution",
    "mixed_split_state",
]

_LN2 = math.log(2.0)


class ZeroProbabilityError(ValueError):
    """Raised when projecting on a measurement outcome of zero probability."""


@dataclass(frozen=True)
class StateVector:
    """Pure state of one N-atom ensemble, amplitudes[k] on Fock state |k>."""

    n_total: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_total < 0:
            raise ValueError("n_total must be nonnegative")
        if self.amplitudes.shape != (self.n_total + 1,):
            raise ValueError("amplitude vector must have length n_total + 1")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state vector is not normalized (norm^2 = {norm})")


@dataclass(frozen=True)
class ConditionalState:
    """Normalized two-well pure state at fixed left atom number.

    psi[k_l, k_r] is the amplitude for k_l atoms of mode a in the left
    well and k_r in the right well.
    """

    n_left: int
    n_right: int
    psi: np.ndarray

    def __post_init__(self):
        if self.n_left < 0 or self.n_right < 0:
            raise ValueError("well populations must be nonnegative")
        if self.psi.shape != (self.n_left + 1, self.n_right + 1):
            raise ValueError("amplitude matrix shape must be (n_left+1, n_right+1)")
        norm = float(np.vdot(self.psi, self.psi).real)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"conditional state is not normalized (norm^2 = {norm})")

    @property
    def n_total(self):
        return self.n_left + self.n_right


@dataclass(frozen=True)
class SplitMixedState:
    """Classical mixture of conditional states over left-well sectors.

    blocks is a list of (weight, ConditionalState) sorted by n_left;
    weights are the untruncated sector probabilities, so they sum to at
    most one (less when a truncation window was applied).
    """

    n_total: int
    blocks: list

    def __post_init__(self):
        total = 0.0
        seen = set()
        for weight, state in self.blocks:
            if not 0.0 < weight <= 1.0:
                raise ValueError("block weights must lie in (0, 1]")
            if state.n_left + state.n_right != self.n_total:
                raise ValueError("block particle numbers must sum to n_total")
            if state.n_left in seen:
                raise ValueError("duplicate sector in mixture")
            seen.add(state.n_left)
            total += weight
        if total > 1.0 + 1e-9:
            raise ValueError("mixture weights exceed 1")

    @property
    def retained_mass(self):
        return float(sum(w for w, _ in self.blocks))


class SplitFullState:
    """Lazy view of a beam-split state, organized by left atom number.

    Sector matrices are materialized one at a time (O(N^2) memory per
    call); nothing quadratic in the number of sectors is ever stored.
    """

    def __init__(self, source):
        self._source = source

    @property
    def n_total(self):
        return self._source.n_total

    def sector(self, n_left):
        """Unnormalized amplitude matrix of the n_left sector.

        For input amplitudes c_k the split amplitude is
        2^{-N/2} sqrt(C(k, k_l) C(N-k, N_L-k_l)) c_k with k = k_l + k_r,
        which is the generic 50/50 beam splitter expansion for any
        state, not just twisted coherent ones.
        """
        n = self.n_total
        if not 0 <= n_left <= n:
            raise ValueError("n_left out of range")
        n_right = n - n_left
        k_l = np.arange(n_left + 1)[:, None]
        k_r = np.arange(n_right + 1)[None, :]
        k = k_l + k_r
        logw = 0.5 * (
            log_binomial(k, k_l) + log_binomial(n - k, n_left - k_l)
        ) - 0.5 * n * _LN2
        return np.exp(logw) * self._source.amplitudes[k]

    def sector_mass(self, n_left):
        a = self.sector(n_left)
        return float(np.vdot(a, a).real)

    def sector_masses(self):
        return np.array([self.sector_mass(l) for l in range(self.n_total + 1)])


def spin_coherent(alpha, beta, n):
    """Spin coherent state with amplitudes sqrt(C(n,k)) alpha^k beta^(n-k).

    (alpha, beta) are the single-atom mode amplitudes; |alpha|^2 + |beta|^2
    must equal 1 within 1e-10.  Assembled in log space so it stays finite
    for any n.
    """
    alpha = complex(alpha)
    beta = complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise ValueError("mode amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    if n < 0:
        raise ValueError("atom number must be nonnegative")
    k = np.arange(n + 1)
    log_mag = 0.5 * log_binomial(n, k)
    phase = np.zeros(n + 1)
    with np.errstate(divide="ignore"):
        if abs(alpha) > 0.0:
            log_mag = log_mag + k * math.log(abs(alpha))
            phase = phase + k * np.angle(alpha)
        else:
            log_mag = np.where(k == 0, log_mag, -np.inf)
        if abs(beta) > 0.0:
            log_mag = log_mag + (n - k) * math.log(abs(beta))
            phase = phase + (n - k) * np.angle(beta)
        else:
            log_mag = np.where(k == n, log_mag, -np.inf)
    amps = np.exp(log_mag) * np.exp(1j * phase)
    return StateVector(n, amps)


def one_axis_twist(state, t):
    """One-axis twisting for time t: amplitude phases exp(i (2k - N)^2 t)."""
    n = state.n_total
    k = np.arange(n + 1)
    phases = np.exp(1j * t * (2 * k - n) ** 2)
    return StateVector(n, state.amplitudes * phases)


def split(state):
    """Send the ensemble through a 50/50 beam splitter into two wells."""
    return SplitFullState(state)


def project_left_number(full, n_left):
    """Project the split state on left atom number n_left.

    Returns (probability, normalized ConditionalState).  A zero-mass
    sector is an impossible measurement outcome and raises.
    """
    a = full.sector(n_left)
    mass = float(np.vdot(a, a).real)
    if mass <= 1e-300:
        raise ZeroProbabilityError(
            f"sector n_left = {n_left} has zero probability; cannot condition on it"
        )
    return mass, ConditionalState(n_left, full.n_total - n_left, a / math.sqrt(mass))


@lru_cache(maxsize=None)
def _coherent_half_weights(n):
    """sqrt(C(n,k)/2^n) as a read-only vector."""
    k = np.arange(n + 1)
    w = np.exp(0.5 * (log_binomial(n, k) - n * _LN2))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _sum_index(n_left, n_right):
    s = np.add.outer(np.arange(n_left + 1), np.arange(n_right + 1))
    s.setflags(write=False)
    return s


@lru_cache(maxsize=None)
def _imbalance_sq(n):
    m2 = (2.0 * np.arange(n + 1) - n) ** 2
    m2.setflags(write=False)
    return m2


def effective_evolution(n_left, n_right, t):
    """Conditional state built directly from its closed form.

    Equals exp(i (S_L^z + S_R^z)^2 t) applied to the product of two
    x-polarized coherent states: amplitudes
    sqrt(C(N_L,k_l) C(N_R,k_r) / 2^N) exp(i (2 k_l + 2 k_r - N)^2 t).
    Identical (to 1e-12) to split-then-project on the twisted coherent
    state; that equivalence is what run_equivalence_suite certifies.
    """
    if n_left < 0 or n_right < 0:
        raise ValueError("well populations must be nonnegative")
    n = n_left + n_right
    mag = np.outer(_coherent_half_weights(n_left), _coherent_half_weights(n_right))
    phase = np.exp(1j * t * _imbalance_sq(n))
    psi = mag * phase[_sum_index(n_left, n_right)]
    return ConditionalState(n_left, n_right, psi)


def _window_order(n):
    """Sector indices from the center of the binomial outwards, in
    symmetric pairs (center block alone for even n)."""
    groups = []
    if n % 2 == 0:
        groups.append((n // 2,))
        for d in range(1, n // 2 + 1):
            groups.append((n // 2 - d, n // 2 + d))
    else:
        for d in range(0, (n + 1) // 2):
            groups.append(((n - 1) // 2 - d, (n + 1) // 2 + d))
    return groups


def mixed_split_state(n, t, window=1e-12):
    """Binomial mixture of conditional states after splitting.

    Sector n_left carries weight C(n, n_left)/2^n.  `window` is the
    truncation epsilon: the smallest centered window of sectors with
    total weight >= 1 - window is retained (window = 0 keeps all).
    Opposite sectors are exact transposes of each other, so the high
    half of the window is stored as transposed views of the low half.
    """
    if n < 0:
        raise ValueError("atom number must be nonnegative")
    if window < 0:
        raise ValueError("truncation window must be nonnegative")
    weights = np.exp(log_binomial(n, np.arange(n + 1)) - n * _LN2)
    retained = []
    cum = 0.0
    for group in _window_order(n):
        retained.extend(group)
        cum += sum(weights[l] for l in group)
        if window > 0.0 and cum >= 1.0 - window:
            break
    retained.sort()
    low = {}
    blocks = []
    for l in retained:
        mirror = n - l
        if l <= mirror:
            state = effective_evolution(l, mirror, t)
            low[l] = state
        else:
            state = ConditionalState(l, mirror, low[mirror].psi.T)
        blocks.append((float(weights[l]), state))
    return SplitMixedState(n, blocks)

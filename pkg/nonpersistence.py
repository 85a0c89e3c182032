# nonpersistence.py: het gebeurtenis-multisetmodel en de symmetrisatie:
# amplitudes (permanent / determinant), toestanden (gereduceerde ruimte en de
# formele uitbreiding), observabelen en het Dirac-contrast.
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, combinations_with_replacement, permutations
from typing import Dict, List, Tuple, Union

import numpy as np

from common import ExclusionError, NullProjectionError
from lattice import SingleParticleState, as_matrix, determinant, permanent, permutation_sign
from persistence import (
    LabelledConfig,
    PermutationAmplitudes,
    PersistenceState,
    evolve_persistence,
    labelled_state,
)

NORM_TOL = 1e-10
NULL_NORM = 1e-12

Events = Tuple[int, ...]


class ExchangeStatistics(Enum):
    BOSON = "boson"
    FERMION = "fermion"

    @property
    def sign(self) -> int:
        return 1 if self is ExchangeStatistics.BOSON else -1

    def combine(self, block: np.ndarray) -> complex:
        """Permanent for bosons, determinant for fermions."""
        return permanent(block) if self is ExchangeStatistics.BOSON else determinant(block)

    def permutation_factor(self, perm) -> int:
        return 1 if self is ExchangeStatistics.BOSON else permutation_sign(perm)

    @classmethod
    def parse(cls, value: Union[str, "ExchangeStatistics"]) -> "ExchangeStatistics":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown statistics {value!r} (expected 'boson' or 'fermion')") from None


@dataclass(frozen=True)
class EventMultiset:
    """Sorted tuple of event sites; which event 'was' which particle is not recorded."""
    events: Events

    def __post_init__(self):
        ev = tuple(sorted(int(e) for e in self.events))
        if not ev:
            raise ValueError("an event multiset needs at least one event")
        if ev[0] < 0:
            raise ValueError(f"negative site in {ev}")
        object.__setattr__(self, "events", ev)

    @property
    def n(self) -> int:
        return len(self.events)

    @property
    def has_coincidence(self) -> bool:
        return len(set(self.events)) < self.n

    def check(self, sites: int, stats: ExchangeStatistics) -> None:
        if self.events[-1] >= sites:
            raise ValueError(f"events {self.events} outside a {sites}-site lattice")
        if stats is ExchangeStatistics.FERMION and self.has_coincidence:
            raise ExclusionError(f"coincident fermionic events {self.events} violate exclusion")


def event_tuple(x) -> Events:
    return x.events if isinstance(x, EventMultiset) else EventMultiset(tuple(x)).events


def multiplicity_weight(events) -> float:
    """1 / prod_j mult_j! over the distinct sites of the multiset."""
    counts = Counter(event_tuple(events))
    return 1.0 / math.prod(math.factorial(c) for c in counts.values())


def final_multisets(sites: int, n: int, stats: ExchangeStatistics) -> List[EventMultiset]:
    pick = combinations_with_replacement if stats is ExchangeStatistics.BOSON else combinations
    return [EventMultiset(ev) for ev in pick(range(sites), n)]


def admissible_events(events, stats: ExchangeStatistics) -> Events:
    ev = event_tuple(events)
    if stats is ExchangeStatistics.FERMION and len(set(ev)) < len(ev):
        raise ExclusionError(f"fermionic events must be distinct, got {ev}")
    return ev


# ============================================================
# --- Amplitudes ---
# ============================================================

def symmetrize_amp(amps: PermutationAmplitudes, stats: ExchangeStatistics) -> complex:
    """sum_sigma (+1 or sgn sigma) * amps[sigma]; for two particles alpha12 +- alpha21."""
    expected = set(permutations(range(amps.n)))
    if set(amps.amps) != expected:
        raise ValueError(f"incomplete permutation map: {len(expected - set(amps.amps))} permutations missing")
    total = 0j
    for sigma in sorted(amps.amps):
        total += stats.permutation_factor(sigma) * amps.amps[sigma]
    return total


def symmetrized_amplitude(u, from_events, to_events, stats: ExchangeStatistics) -> complex:
    """Same amplitude as symmetrize_amp, evaluated as per/det of M[j, k] = U[to_j, from_k]."""
    src, dst = event_tuple(from_events), event_tuple(to_events)
    if len(src) != len(dst):
        raise ValueError(f"event counts differ: {len(src)} vs {len(dst)}")
    block = as_matrix(u)[np.ix_(dst, src)]
    return stats.combine(block)


def transition_probability(u, from_events, to_events, stats: ExchangeStatistics) -> float:
    src, dst = admissible_events(from_events, stats), admissible_events(to_events, stats)
    amp = symmetrized_amplitude(u, src, dst, stats)
    return abs(amp) ** 2 * multiplicity_weight(src) * multiplicity_weight(dst)


def transition_map(u, from_events, stats: ExchangeStatistics) -> Dict[EventMultiset, float]:
    src = admissible_events(from_events, stats)
    sites = as_matrix(u).shape[0]
    return {m: transition_probability(u, src, m, stats) for m in final_multisets(sites, len(src), stats)}


def reidentifiability_gap(amps: PermutationAmplitudes, stats: ExchangeStatistics) -> float:
    """How far |H(alpha)|^2 is from the probability of the dominant persistence path."""
    return abs(abs(symmetrize_amp(amps, stats)) ** 2 - max(amps.masses().values()))


# ============================================================
# --- Toestanden ---
# ============================================================

@dataclass(frozen=True)
class NonpersistenceState:
    """
    psid over event multisets. The probability weight of a multiset m is
    w(m) * |psid(m)|^2 with w(m) = 1/prod mult!, so bosonic diagonal entries
    carry the plain permanent without rescaling.
    """
    psid: Dict[Events, complex] = field(repr=False)
    sites: int
    statistics: ExchangeStatistics
    norm_factor: float = 1.0

    def __post_init__(self):
        if not self.psid:
            raise ValueError("empty nonpersistence state")
        norm = weighted_norm(self.psid)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"nonpersistence state is not normalized (norm {norm:.12f})")

    @property
    def n(self) -> int:
        return len(next(iter(self.psid)))

    def probabilities(self) -> Dict[Events, float]:
        return {m: multiplicity_weight(m) * abs(a) ** 2 for m, a in self.psid.items()}

    def amplitude(self, events) -> complex:
        return self.psid.get(event_tuple(events), 0j)


def weighted_norm(psid: Dict[Events, complex]) -> float:
    return math.sqrt(sum(multiplicity_weight(m) * abs(a) ** 2 for m, a in psid.items()))


def _normalized(psid: Dict[Events, complex], sites: int, stats: ExchangeStatistics) -> NonpersistenceState:
    norm = weighted_norm(psid)
    if norm < NULL_NORM:
        raise NullProjectionError(f"{stats.value} projection leaves nothing (norm {norm:.2e})")
    return NonpersistenceState({m: a / norm for m, a in psid.items()}, sites, stats, norm_factor=1.0 / norm)


@dataclass(frozen=True)
class ExtendedState:
    """psi_tilde over the full labelled space; (anti)symmetric under relabelling."""
    psi_tilde: np.ndarray = field(repr=False)
    statistics: ExchangeStatistics

    def __post_init__(self):
        psi = np.asarray(self.psi_tilde, dtype=complex)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"extended state is not normalized (norm {norm:.12f})")
        object.__setattr__(self, "psi_tilde", psi)

    @property
    def n(self) -> int:
        return self.psi_tilde.ndim

    @property
    def sites(self) -> int:
        return self.psi_tilde.shape[0]

    def sector_defect(self) -> float:
        """max over adjacent label swaps of || P psi -/+ psi ||."""
        psi, s = self.psi_tilde, self.statistics.sign
        return max((float(np.linalg.norm(np.swapaxes(psi, i, i + 1) - s * psi)) for i in range(self.n - 1)),
                   default=0.0)

    def evolve(self, h: np.ndarray, t: float) -> "ExtendedState":
        moved = evolve_persistence(PersistenceState(self.psi_tilde), h, t)
        return ExtendedState(moved.psi, self.statistics)


def symmetrize_state(psi: PersistenceState, stats: ExchangeStatistics) -> NonpersistenceState:
    """
    psid(x1 <= ... <= xn) = sum_sigma (+-1)^sigma psi(sigma-permuted arguments),
    renormalized; the factor applied is kept in `norm_factor`.
    """
    n = psi.n
    sym = np.zeros_like(psi.psi)
    for sigma in permutations(range(n)):
        sym += stats.permutation_factor(sigma) * np.transpose(psi.psi, sigma)
    psid = {m.events: complex(sym[m.events]) for m in final_multisets(psi.sites, n, stats)}
    return _normalized(psid, psi.sites, stats)


def extend_state(state: NonpersistenceState) -> ExtendedState:
    n = state.n
    psi = np.zeros((state.sites,) * n, dtype=complex)
    scale = 1.0 / math.sqrt(math.factorial(n))
    for m, a in state.psid.items():
        for sigma in permutations(range(n)):
            x = tuple(m[sigma[i]] for i in range(n))
            psi[x] = state.statistics.permutation_factor(sigma) * a * scale
    return ExtendedState(psi, state.statistics)


def restrict_state(state: ExtendedState) -> NonpersistenceState:
    psid = {m.events: complex(state.psi_tilde[m.events])
            for m in final_multisets(state.sites, state.n, state.statistics)}
    return _normalized(psid, state.sites, state.statistics)


def lift_events(events, sites: int) -> PersistenceState:
    """Labelled state with the left-most event as particle 1."""
    return labelled_state(LabelledConfig(event_tuple(events)), sites)


def evolve_events(u, from_events, stats: ExchangeStatistics) -> NonpersistenceState:
    """State reached from a definite initial multiset, built from symmetrized amplitudes."""
    src = admissible_events(from_events, stats)
    sites = as_matrix(u).shape[0]
    root_w = math.sqrt(multiplicity_weight(src))
    psid = {m.events: symmetrized_amplitude(u, src, m, stats) * root_w
            for m in final_multisets(sites, len(src), stats)}
    return NonpersistenceState(psid, sites, stats)


def propagate_nonpersistence(state: NonpersistenceState, u) -> NonpersistenceState:
    """psid'(m) = sum_l w(l) psid(l) per/det(U[m, l])."""
    stats = state.statistics
    out = {}
    for m in final_multisets(state.sites, state.n, stats):
        out[m.events] = sum(multiplicity_weight(l) * a * symmetrized_amplitude(u, l, m, stats)
                            for l, a in state.psid.items())
    return NonpersistenceState(out, state.sites, stats)


def evolve_nonpersistence(state: NonpersistenceState, h: np.ndarray, t: float) -> NonpersistenceState:
    """State route: extend, evolve with a label-symmetric Hamiltonian, restrict."""
    return restrict_state(extend_state(state).evolve(h, t))


# ============================================================
# --- Observabelen ---
# ============================================================

def leftmost_distribution(state: NonpersistenceState) -> np.ndarray:
    """P(x) for the position of the left-most event."""
    out = np.zeros(state.sites)
    for m, p in state.probabilities().items():
        out[m[0]] += p
    return out


def distance_distribution(state: NonpersistenceState) -> np.ndarray:
    """P(d) for the spread max - min of the events (the inter-particle distance for two)."""
    if state.n < 2:
        raise ValueError("a distance needs at least two events")
    out = np.zeros(state.sites)
    for m, p in state.probabilities().items():
        out[m[-1] - m[0]] += p
    return out


# ---------- Dirac-contrast ----------

def dirac_symmetrize(phi_a: SingleParticleState, phi_b: SingleParticleState,
                     stats: ExchangeStatistics) -> ExtendedState:
    a, b = phi_a.vector, phi_b.vector
    if a.shape != b.shape:
        raise ValueError("one-particle states live on different lattices")
    psi = np.multiply.outer(a, b) + stats.sign * np.multiply.outer(b, a)
    norm = np.linalg.norm(psi)
    if norm < NULL_NORM:
        raise NullProjectionError("antisymmetrizing two equal one-particle states gives the null state")
    return ExtendedState(psi / norm, stats)


def reduced_density(state: Union[ExtendedState, PersistenceState], which: int) -> np.ndarray:
    psi = state.psi_tilde if isinstance(state, ExtendedState) else state.psi
    if psi.ndim != 2:
        raise ValueError("reduced densities are defined here for two-particle states")
    if which == 1:
        return np.einsum("xk,yk->xy", psi, psi.conj())
    if which == 2:
        return np.einsum("kx,ky->xy", psi, psi.conj())
    raise ValueError(f"label must be 1 or 2, got {which}")


def projector(phi: SingleParticleState) -> np.ndarray:
    return np.multiply.outer(phi.vector, phi.vector.conj())

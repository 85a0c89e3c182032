# reidentification.py: sporen volgen met waarschijnlijkheden (swapkans,
# isolatie, beste permutatie per interval), het bellenvat-beeld.
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from common import DEFAULT_EPSILON, UnreachableTransitionError
from lattice import LatticeSpec, Packet, SingleParticlePropagator, as_matrix, build_hamiltonian, permanent, propagator
from nonpersistence import EventMultiset
from persistence import PERMUTATION_MAX_N, PermutationAmplitudes, all_permutation_amps

logger = logging.getLogger(__name__)

UNREACHABLE = 1e-300


def _scaled_masses(amps: PermutationAmplitudes) -> Dict[Tuple[int, ...], float]:
    # schalen voor het kwadrateren, anders underflow bij |alpha| ~ 1e-200
    top = max(abs(a) for a in amps.amps.values())
    if top < UNREACHABLE:
        raise UnreachableTransitionError("every permutation amplitude vanishes")
    return {p: (abs(a) / top) ** 2 for p, a in amps.amps.items()}


def swap_probability(amps: PermutationAmplitudes) -> float:
    """
    |alpha21|^2 / (|alpha12|^2 + |alpha21|^2): the indirect path given the observed
    endpoints. For more particles, the mass of every non-identity permutation.
    """
    m = _scaled_masses(amps)
    if amps.n == 2:
        return m[(1, 0)] / (m[(0, 1)] + m[(1, 0)])
    return 1.0 - m[amps.identity] / sum(m.values())


def is_isolated(amps: PermutationAmplitudes, epsilon: float = DEFAULT_EPSILON) -> bool:
    m = _scaled_masses(amps)
    if amps.n == 2:
        lo, hi = sorted(m.values())
        return lo / hi < epsilon
    return max(m.values()) / sum(m.values()) > 1.0 - epsilon


@dataclass(frozen=True)
class EventHistory:
    times: Tuple[float, ...]
    events: Tuple[EventMultiset, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        events = tuple(e if isinstance(e, EventMultiset) else EventMultiset(tuple(e)) for e in self.events)
        if len(times) != len(events):
            raise ValueError(f"{len(times)} times but {len(events)} event multisets")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("times must be strictly increasing")
        if len({e.n for e in events}) > 1:
            raise ValueError("every observation must contain the same number of events")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class TrackStep:
    t_from: float
    t_to: float
    permutation: Tuple[int, ...]
    step_probability: float
    swap_probability: float
    isolated: bool

    def record(self) -> Dict[str, object]:
        return {
            "t_from": self.t_from,
            "t_to": self.t_to,
            "permutation": " ".join(str(p) for p in self.permutation),
            "step_probability": self.step_probability,
            "swap_probability": self.swap_probability,
            "isolated": int(self.isolated),
        }


@dataclass(frozen=True)
class TrackAssignment:
    steps: Tuple[TrackStep, ...]
    confidence: float

    @property
    def permutations(self) -> List[Tuple[int, ...]]:
        return [s.permutation for s in self.steps]

    @property
    def swap_probability_per_step(self) -> List[float]:
        return [s.swap_probability for s in self.steps]

    @property
    def flagged(self) -> List[int]:
        return [k for k, s in enumerate(self.steps) if not s.isolated]


def _track_step(u, src: EventMultiset, dst: EventMultiset, t_from: float, t_to: float, epsilon: float) -> TrackStep:
    block = as_matrix(u)[np.ix_(dst.events, src.events)]
    w = np.abs(block) ** 2  # w[j, k]: particle k -> final event j
    total = permanent(w).real
    if total < UNREACHABLE:
        raise UnreachableTransitionError(f"{src.events} -> {dst.events} has no permutation with weight")
    rows, cols = linear_sum_assignment(-np.log(np.maximum(w.T, UNREACHABLE)))
    sigma = tuple(int(c) for c in cols[np.argsort(rows)])
    best = float(np.prod(w[list(sigma), np.arange(src.n)]))
    amps = all_permutation_amps(u, src, dst)
    return TrackStep(t_from, t_to, sigma, min(1.0, best / total), swap_probability(amps), is_isolated(amps, epsilon))


def assign_tracks(history: EventHistory, propagators: Sequence[SingleParticlePropagator],
                  epsilon: float = DEFAULT_EPSILON) -> TrackAssignment:
    """
    Per interval the permutation maximizing prod_k |U[m_sigma(k), l_k]|^2.
    Confidence is the product over intervals of best mass / total mass.
    """
    if len(propagators) != len(history) - 1:
        raise ValueError(f"{len(history)} observations need {len(history) - 1} propagators, got {len(propagators)}")
    if history.events and history.events[0].n > PERMUTATION_MAX_N:
        raise ValueError(f"track assignment is limited to n <= {PERMUTATION_MAX_N}")
    steps = []
    for k, u in enumerate(propagators):
        steps.append(_track_step(u, history.events[k], history.events[k + 1],
                                 history.times[k], history.times[k + 1], epsilon))
    confidence = float(np.prod([s.step_probability for s in steps])) if steps else 1.0
    result = TrackAssignment(tuple(steps), min(1.0, max(0.0, confidence)))
    if result.flagged:
        logger.info("tracks: %d of %d intervals not isolated", len(result.flagged), len(steps))
    return result


def packet_history(spec: LatticeSpec, packets: Sequence[Packet],
                   times: Sequence[float]) -> Tuple[EventHistory, List[SingleParticlePropagator]]:
    """
    Scripted observations: at every time each packet (evolved on its own) is
    detected at its peak site. Returns the history and one propagator per interval.
    """
    h = build_hamiltonian(spec)
    states = [p.state(spec) for p in packets]
    events = []
    for t in times:
        u = propagator(h, t - times[0])
        events.append(EventMultiset(tuple(int(np.argmax(s.evolve(u).density())) for s in states)))
    props = [propagator(h, b - a, t_from=a) for a, b in zip(times, times[1:])]
    return EventHistory(tuple(times), tuple(events)), props

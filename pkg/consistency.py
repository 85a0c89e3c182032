# consistency.py: numerieke controle van de voorwaarden waaruit de
# symmetrisatieregel volgt: isolatie, compositie over drie tijden en het
# falsifiëren van andere kandidaat-synthesefuncties.
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from common import DEFAULT_TOLERANCES, n_jobs
from lattice import SingleParticlePropagator, random_unitary
from nonpersistence import (
    EventMultiset,
    ExchangeStatistics,
    admissible_events,
    event_tuple,
    final_multisets,
    multiplicity_weight,
    symmetrize_amp,
)
from persistence import PermutationAmplitudes, all_permutation_amps

logger = logging.getLogger(__name__)

PROBE_STEP = 1e-5
PROBE_POINTS = 16


class Condition(Enum):
    ISOLATION = "isolation"
    COMPOSITION = "composition"


# ---------- Kandidaten ----------

def _plus(a12: complex, a21: complex) -> complex:
    return a12 + a21


def _minus(a12: complex, a21: complex) -> complex:
    return a12 - a21


def _phase(theta: float, a12: complex, a21: complex) -> complex:
    return a12 + np.exp(1j * theta) * a21


def _abs_sum(a12: complex, a21: complex) -> complex:
    return complex(abs(a12) + abs(a21))


def _first_only(a12: complex, a21: complex) -> complex:
    return a12


@dataclass(frozen=True)
class CandidateH:
    name: str
    fn: Callable[[complex, complex], complex] = field(repr=False)
    statistics: Optional[ExchangeStatistics] = None
    continuous: bool = True
    holomorphic: bool = True

    def __call__(self, a12: complex, a21: complex) -> complex:
        return complex(self.fn(a12, a21))

    def synthesize(self, amps: PermutationAmplitudes) -> complex:
        if amps.n == 2:
            return self(amps.direct, amps.indirect)
        if self.statistics is None:
            raise ValueError(f"candidate {self.name!r} only combines two amplitudes")
        return symmetrize_amp(amps, self.statistics)


def probe(fn: Callable[[complex, complex], complex], seed: int = 0) -> Tuple[bool, bool]:
    """
    Finite-difference probes on random points: (continuous, holomorphic).

    Holomorphy is the Cauchy-Riemann test: the derivative along the real axis
    must match the one along the imaginary axis, in both arguments.
    """
    rng = np.random.default_rng(seed)
    h = PROBE_STEP
    continuous, holomorphic = True, True
    for _ in range(PROBE_POINTS):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        for slot in range(2):
            e = np.zeros(2, dtype=complex)
            e[slot] = 1.0
            f = lambda w: complex(fn(*w))
            d_re = (f(z + h * e) - f(z - h * e)) / (2 * h)
            d_im = (f(z + 1j * h * e) - f(z - 1j * h * e)) / (2j * h)
            if abs(f(z + h * e) - f(z)) > 1e3 * h or abs(f(z + 1j * h * e) - f(z)) > 1e3 * h:
                continuous = False
            if abs(d_re - d_im) > 1e-6 * max(1.0, abs(d_re)):
                holomorphic = False
    return continuous, holomorphic


def make_candidate(name: str, fn: Callable[[complex, complex], complex],
                   statistics: Optional[ExchangeStatistics] = None) -> CandidateH:
    continuous, holomorphic = probe(fn)
    if not continuous:
        raise ValueError(f"candidate {name!r} fails the continuity probe")
    return CandidateH(name, fn, statistics, continuous, holomorphic)


def default_registry(theta: float = math.pi / 2) -> Dict[str, CandidateH]:
    cands = [
        make_candidate("plus", _plus, ExchangeStatistics.BOSON),
        make_candidate("minus", _minus, ExchangeStatistics.FERMION),
        make_candidate(f"phase({theta:.4g})", partial(_phase, theta)),
        make_candidate("abs-sum", _abs_sum),
        make_candidate("first-only", _first_only),
    ]
    return {c.name: c for c in cands}


# ---------- Rapporten ----------

@dataclass(frozen=True)
class ConsistencyReport:
    condition: Condition
    candidate: str
    max_violation: float
    samples: int
    tolerance: float
    convention: Optional[str] = None
    counterexample: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_violation < self.tolerance)

    def record(self) -> Dict[str, object]:
        return {
            "candidate": self.candidate,
            "condition": self.condition.value,
            "convention": self.convention or "",
            "samples": self.samples,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "pass": int(self.passed),
            "counterexample": self.counterexample,
        }


def check_isolation(candidate: CandidateH, samples: int = 1000,
                    tol: float = DEFAULT_TOLERANCES["isolation"], seed: int = 0) -> ConsistencyReport:
    """| |H(a, 0)|^2 - |a|^2 | and | |H(0, b)|^2 - |b|^2 | over random complex a, b."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
    b = rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
    worst, where = 0.0, ""
    for x, y in zip(a, b):
        for args, ref in (((x, 0j), x), ((0j, y), y)):
            v = abs(abs(candidate(*args)) ** 2 - abs(ref) ** 2)
            if v > worst:
                worst, where = v, f"H{tuple(complex(z) for z in args)}"
    return ConsistencyReport(Condition.ISOLATION, candidate.name, float(worst), samples, tol, counterexample=where)


@dataclass(frozen=True)
class CompositionScenario:
    u: SingleParticlePropagator = field(repr=False)
    v: SingleParticlePropagator = field(repr=False)
    from_events: EventMultiset
    to_events: EventMultiset
    seed: int = 0

    @property
    def sites(self) -> int:
        return self.u.sites


def random_scenarios(count: int, seed: int = 0, sites: Tuple[int, int] = (4, 8), n: int = 2) -> List[CompositionScenario]:
    """Random unitary pairs and distinct initial/final events; one child seed per scenario."""
    out = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        rng = np.random.default_rng(child)
        s = int(rng.integers(max(sites[0], n), sites[1] + 1))
        u, v = random_unitary(s, rng), random_unitary(s, rng)
        src = EventMultiset(tuple(rng.choice(s, n, replace=False)))
        dst = EventMultiset(tuple(rng.choice(s, n, replace=False)))
        out.append(CompositionScenario(u, v, src, dst, seed=k))
    return out


def composition_routes(candidate: CandidateH, u: SingleParticlePropagator, v: SingleParticlePropagator,
                       from_events, to_events, stats: ExchangeStatistics) -> Tuple[complex, complex]:
    """(direct three-time amplitude, sum over intermediate multisets of per-leg amplitudes)."""
    if u.sites != v.sites:
        raise ValueError(f"propagators act on {u.sites} and {v.sites} sites")
    src, dst = admissible_events(from_events, stats), admissible_events(to_events, stats)
    if len(src) != len(dst):
        raise ValueError(f"event counts differ: {len(src)} vs {len(dst)}")
    direct = candidate.synthesize(all_permutation_amps(u.then(v), src, dst))
    via = 0j
    for k in final_multisets(u.sites, len(src), stats):
        via += (multiplicity_weight(k)
                * candidate.synthesize(all_permutation_amps(u, src, k))
                * candidate.synthesize(all_permutation_amps(v, k, dst)))
    return direct, via


def check_composition(candidate: CandidateH, u: SingleParticlePropagator, v: SingleParticlePropagator,
                      from_events, to_events, stats: ExchangeStatistics,
                      tol: float = DEFAULT_TOLERANCES["composition"]) -> ConsistencyReport:
    direct, via = composition_routes(candidate, u, v, from_events, to_events, stats)
    viol = abs(direct - via)
    where = f"{_events_str(from_events)} -> {_events_str(to_events)}: {direct:.6g} vs {via:.6g}"
    return ConsistencyReport(Condition.COMPOSITION, candidate.name, float(viol), 1, tol, stats.value, where)


def brute_force_composition(candidate: CandidateH, u: SingleParticlePropagator, v: SingleParticlePropagator,
                            from_events, to_events) -> complex:
    """Sum over every labelled intermediate configuration, divided by n!."""
    src, dst = event_tuple(from_events), event_tuple(to_events)
    n = len(src)
    total = 0j
    for k in product(range(u.sites), repeat=n):
        total += (candidate.synthesize(all_permutation_amps(u, src, k))
                  * candidate.synthesize(all_permutation_amps(v, k, dst)))
    return total / math.factorial(n)


def _events_str(events) -> str:
    return "{" + ",".join(str(e) for e in event_tuple(events)) + "}"


def _scenario_violation(candidate: CandidateH, sc: CompositionScenario, stats: ExchangeStatistics) -> Tuple[float, str]:
    rep = check_composition(candidate, sc.u, sc.v, sc.from_events, sc.to_events, stats)
    return rep.max_violation, f"scenario {sc.seed} ({sc.sites} sites) {rep.counterexample}"


def composition_report(candidate: CandidateH, scenarios: Sequence[CompositionScenario],
                       stats: ExchangeStatistics, tol: float = DEFAULT_TOLERANCES["composition"]) -> ConsistencyReport:
    """Worst composition violation over independent scenarios (joblib, order-independent)."""
    results = Parallel(n_jobs=n_jobs())(delayed(_scenario_violation)(candidate, sc, stats) for sc in scenarios)
    worst, where = max(results, key=lambda r: r[0], default=(0.0, ""))
    return ConsistencyReport(Condition.COMPOSITION, candidate.name, float(worst), len(results), tol, stats.value, where)


# ---------- Scan ----------

@dataclass(frozen=True)
class CandidateScan:
    candidate: CandidateH
    isolation: ConsistencyReport
    composition: ConsistencyReport

    @property
    def survived(self) -> bool:
        return self.isolation.passed and self.composition.passed

    @property
    def worst(self) -> ConsistencyReport:
        # het rapport met de duidelijkste overtreding (tegenvoorbeeld)
        return max((self.isolation, self.composition), key=lambda r: r.max_violation / r.tolerance)

    def record(self) -> Dict[str, object]:
        return {
            "candidate": self.candidate.name,
            "holomorphic": int(self.candidate.holomorphic),
            "isolation_violation": self.isolation.max_violation,
            "composition_violation": self.composition.max_violation,
            "convention": self.composition.convention or "",
            "survived": int(self.survived),
            "counterexample": "" if self.survived else self.worst.counterexample,
        }


def scan_candidates(registry: Dict[str, CandidateH] | Iterable[CandidateH],
                    scenarios: Sequence[CompositionScenario],
                    tolerances: Optional[Dict[str, float]] = None,
                    isolation_samples: int = 1000, seed: int = 0) -> List[CandidateScan]:
    """
    Isolation and composition for every candidate. Candidates without an
    inherent statistics are scored under both intermediate-sum conventions and
    keep the better one.
    """
    cands = list(registry.values()) if isinstance(registry, dict) else list(registry)
    if not cands:
        raise ValueError("empty candidate registry")
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    out: List[CandidateScan] = []
    for cand in cands:
        iso = check_isolation(cand, isolation_samples, tol["isolation"], seed)
        conventions = [cand.statistics] if cand.statistics else list(ExchangeStatistics)
        comp = min((composition_report(cand, scenarios, st, tol["composition"]) for st in conventions),
                   key=lambda r: r.max_violation)
        out.append(CandidateScan(cand, iso, comp))
    survivors = [s.candidate.name for s in out if s.survived]
    logger.info("candidate scan over %d scenarios: survivors %s", len(scenarios), survivors)
    return out


def survivors(scan: Sequence[CandidateScan]) -> List[str]:
    return [s.candidate.name for s in scan if s.survived]

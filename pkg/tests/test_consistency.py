import math

import numpy as np
import pytest

from consistency import (
    Condition,
    brute_force_composition,
    check_composition,
    check_isolation,
    composition_report,
    composition_routes,
    default_registry,
    make_candidate,
    random_scenarios,
    scan_candidates,
    survivors,
)
from lattice import random_unitary
from nonpersistence import ExchangeStatistics
from persistence import all_permutation_amps

BOSON, FERMION = ExchangeStatistics.BOSON, ExchangeStatistics.FERMION


@pytest.fixture(scope="module")
def registry():
    return default_registry()


def test_registry_names_and_flags(registry):
    assert list(registry) == ["plus", "minus", "phase(1.571)", "abs-sum", "first-only"]
    assert registry["plus"].holomorphic and registry["minus"].holomorphic
    assert not registry["abs-sum"].holomorphic


def test_conjugating_candidate_is_not_holomorphic():
    cand = make_candidate("conj", lambda a, b: np.conj(a) + np.conj(b))
    assert cand.continuous and not cand.holomorphic


@pytest.mark.parametrize("name, passes", [("plus", True), ("minus", True), ("abs-sum", True), ("first-only", False)])
def test_isolation(registry, name, passes):
    rep = check_isolation(registry[name], samples=200, seed=3)
    assert rep.condition is Condition.ISOLATION
    assert rep.passed is passes


def test_reports_hold_plain_numbers(registry):
    rep = check_isolation(registry["first-only"], samples=50, seed=1)
    assert type(rep.max_violation) is float
    assert type(rep.passed) is bool
    sc = random_scenarios(1, seed=2)[0]
    comp = check_composition(registry["abs-sum"], sc.u, sc.v, sc.from_events, sc.to_events, BOSON)
    assert type(comp.max_violation) is float
    assert type(comp.passed) is bool
    assert type(composition_report(registry["plus"], [sc], BOSON).max_violation) is float


def test_isolation_needs_samples(registry):
    with pytest.raises(ValueError):
        check_isolation(registry["plus"], samples=0)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("stats, name", [(BOSON, "plus"), (FERMION, "minus")])
def test_composition_holds_for_symmetrization(registry, n, stats, name):
    rep = composition_report(registry[name], random_scenarios(10, seed=5, n=n), stats)
    assert rep.samples == 10
    assert rep.max_violation < 1e-10


def test_composition_routes_agree_with_brute_force(registry):
    sc = random_scenarios(1, seed=11)[0]
    for stats, name in ((BOSON, "plus"), (FERMION, "minus")):
        direct, via = composition_routes(registry[name], sc.u, sc.v, sc.from_events, sc.to_events, stats)
        brute = brute_force_composition(registry[name], sc.u, sc.v, sc.from_events, sc.to_events)
        assert via == pytest.approx(brute, abs=1e-12)
        assert direct == pytest.approx(via, abs=1e-10)


def test_phase_candidate_breaks_composition(registry):
    phase = registry[f"phase({math.pi / 2:.4g})"]
    scenarios = random_scenarios(5, seed=2)
    worst = min(composition_report(phase, scenarios, st).max_violation for st in (BOSON, FERMION))
    assert worst > 1e-3


def test_composition_report_is_order_independent(registry):
    scenarios = random_scenarios(6, seed=9)
    a = composition_report(registry["abs-sum"], scenarios, BOSON)
    b = composition_report(registry["abs-sum"], scenarios[::-1], BOSON)
    assert a.max_violation == b.max_violation


def test_random_scenarios_are_reproducible():
    a, b = random_scenarios(3, seed=4), random_scenarios(3, seed=4)
    for x, y in zip(a, b):
        assert np.array_equal(x.u.matrix, y.u.matrix)
        assert x.from_events == y.from_events and x.to_events == y.to_events


def test_composition_needs_matching_lattices(registry, rng):
    with pytest.raises(ValueError):
        check_composition(registry["plus"], random_unitary(4, rng), random_unitary(5, rng), (0, 1), (1, 2), BOSON)


def test_two_amplitude_candidate_rejects_three_particles(registry, rng):
    amps = all_permutation_amps(random_unitary(5, rng), (0, 1, 2), (2, 3, 4))
    with pytest.raises(ValueError):
        registry["abs-sum"].synthesize(amps)


def test_scan_keeps_exactly_plus_and_minus(registry):
    scan = scan_candidates(registry, random_scenarios(8, seed=1), isolation_samples=200)
    assert sorted(survivors(scan)) == ["minus", "plus"]
    for s in scan:
        if not s.survived:
            assert s.record()["counterexample"]
            assert s.worst.max_violation > 1e-3


def test_scan_needs_candidates():
    with pytest.raises(ValueError):
        scan_candidates({}, random_scenarios(1))

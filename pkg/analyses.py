# analyses.py: voert de analyses van een scenario uit en schrijft per
# analyse één tabel (CSV met '#'-metadata) weg.
from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
from joblib import Parallel, delayed

from common import AnalysisError, LabError, n_jobs
from consistency import (
    check_composition,
    check_isolation,
    default_registry,
    random_scenarios,
    scan_candidates,
    survivors,
)
from lattice import SingleParticlePropagator, build_hamiltonian, propagator
from nonpersistence import (
    EventMultiset,
    ExchangeStatistics,
    ExtendedState,
    NonpersistenceState,
    dirac_symmetrize,
    distance_distribution,
    extend_state,
    final_multisets,
    leftmost_distribution,
    projector,
    reduced_density,
    reidentifiability_gap,
    restrict_state,
    symmetrize_state,
    transition_map,
)
from persistence import PersistenceState, all_permutation_amps, evolve_free, symmetric_hamiltonian, two_path_demo
from reidentification import EventHistory, assign_tracks, is_isolated, packet_history, swap_probability
from scenario import ResultTable, Scenario

logger = logging.getLogger(__name__)


# ---------- Hulpjes ----------

def _event_columns(n: int) -> List[str]:
    return [f"e{k + 1}" for k in range(n)]


def _metadata(sc: Scenario, name: str, **extra) -> Dict[str, object]:
    meta = {
        "analysis": name,
        "scenario_hash": sc.source_hash,
        "seed": sc.seed,
        "statistics": sc.statistics.value,
        "sites": sc.lattice.sites,
        "tolerances": sc.tolerances,
    }
    meta.update(extra)
    return meta


def _one_particle(sc: Scenario, t: float) -> SingleParticlePropagator:
    # de begintoestand hoort bij schedule[0]
    return propagator(build_hamiltonian(sc.lattice), t - sc.schedule[0], t_from=sc.schedule[0])


def _legs(sc: Scenario) -> Tuple[SingleParticlePropagator, SingleParticlePropagator]:
    """Two consecutive intervals from the schedule; missing ones fall back to dt."""
    h = build_hamiltonian(sc.lattice)
    times = list(sc.schedule)
    while len(times) < 3:
        times.append(times[-1] + sc.lattice.dt)
    return (propagator(h, times[1] - times[0], t_from=times[0]),
            propagator(h, times[2] - times[1], t_from=times[1]))


def _require_events(sc: Scenario, name: str) -> EventMultiset:
    events = sc.initial_events
    if events is None:
        raise ValueError(f"{name} needs initial events or packets")
    return events


def nonpersistence_states(sc: Scenario) -> List[Tuple[float, NonpersistenceState]]:
    """
    State route over the schedule: symmetrize the initial labelled state,
    extend it, evolve it and restrict it again at every observation time.
    """
    ext = extend_state(symmetrize_state(sc.initial_state(), sc.statistics))
    out = []
    if sc.interaction:
        h = symmetric_hamiltonian(sc.lattice, sc.n, sc.interaction)
        for t in sc.schedule:
            out.append((t, restrict_state(ext.evolve(h, t - sc.schedule[0]))))
        return out
    for t in sc.schedule:
        moved = evolve_free(PersistenceState(ext.psi_tilde), _one_particle(sc, t))
        out.append((t, restrict_state(ExtendedState(moved.psi, sc.statistics))))
    return out


def _history(sc: Scenario) -> Tuple[EventHistory, List[SingleParticlePropagator]]:
    h = build_hamiltonian(sc.lattice)
    props = [propagator(h, b - a, t_from=a) for a, b in zip(sc.schedule, sc.schedule[1:])]
    if sc.observations:
        return EventHistory(sc.schedule, sc.observations), props
    if sc.packets:
        return packet_history(sc.lattice, sc.ordered_packets, sc.schedule)
    events = _require_events(sc, "an event history")
    return EventHistory(sc.schedule, (events,) * len(sc.schedule)), props


# ============================================================
# --- Analyses ---
# ============================================================

def transition_map_table(sc: Scenario) -> ResultTable:
    n = sc.n
    rows = []
    worst = 0.0
    if sc.events is not None and not sc.interaction:
        for t in sc.schedule:
            probs = transition_map(_one_particle(sc, t), sc.events, sc.statistics)
            worst = max(worst, abs(sum(probs.values()) - 1.0))
            rows += [(t, *m.events, p) for m, p in probs.items()]
    else:
        for t, state in nonpersistence_states(sc):
            probs = state.probabilities()
            worst = max(worst, abs(sum(probs.values()) - 1.0))
            rows += [(t, *m.events, probs.get(m.events, 0.0))
                     for m in final_multisets(sc.lattice.sites, n, sc.statistics)]
    tol = sc.tolerances["normalization"]
    return ResultTable("transition_map", ["time", *_event_columns(n), "probability"], rows,
                       _metadata(sc, "transition_map", tolerance=tol, max_normalization_defect=worst,
                                 passed=int(worst < tol)))


def composition_check_table(sc: Scenario) -> ResultTable:
    src = _require_events(sc, "composition_check")
    cand = default_registry(sc.theta)["plus" if sc.statistics is ExchangeStatistics.BOSON else "minus"]
    u, v = _legs(sc)
    tol = sc.tolerances["composition"]
    rows, worst = [], 0.0
    for dst in final_multisets(sc.lattice.sites, src.n, sc.statistics):
        rep = check_composition(cand, u, v, src, dst, sc.statistics, tol)
        worst = max(worst, rep.max_violation)
        rows.append((*dst.events, rep.max_violation))
    return ResultTable("composition_check", [*_event_columns(src.n), "violation"], rows,
                       _metadata(sc, "composition_check", candidate=cand.name, tolerance=tol,
                                 max_violation=worst, passed=int(worst < tol)))


def isolation_check_table(sc: Scenario) -> ResultTable:
    tol = sc.tolerances["isolation"]
    reports = [check_isolation(c, sc.isolation_samples, tol, sc.seed) for c in default_registry(sc.theta).values()]
    return ResultTable.from_records("isolation_check", [r.record() for r in reports],
                                    _metadata(sc, "isolation_check", tolerance=tol))


def candidate_scan_table(sc: Scenario) -> ResultTable:
    scenarios = random_scenarios(sc.scan_scenarios, sc.seed)
    scan = scan_candidates(default_registry(sc.theta), scenarios, sc.tolerances, sc.isolation_samples, sc.seed)
    return ResultTable.from_records("candidate_scan", [s.record() for s in scan],
                                    _metadata(sc, "candidate_scan", survivors=" ".join(survivors(scan)),
                                              scenarios=len(scenarios)))


def swap_table(sc: Scenario) -> ResultTable:
    history, props = _history(sc)
    rows = []
    for k, u in enumerate(props):
        src, dst = history.events[k], history.events[k + 1]
        amps = all_permutation_amps(u, src, dst)
        masses = amps.masses()
        rows.append((history.times[k], history.times[k + 1],
                     " ".join(map(str, src.events)), " ".join(map(str, dst.events)),
                     masses[amps.identity], sum(masses.values()), swap_probability(amps),
                     int(is_isolated(amps, sc.epsilon)), reidentifiability_gap(amps, sc.statistics)))
    cols = ["t_from", "t_to", "from_events", "to_events", "direct_mass", "total_mass",
            "swap_probability", "isolated", "reidentifiability_gap"]
    return ResultTable("swap", cols, rows, _metadata(sc, "swap", epsilon=sc.epsilon))


def tracks_table(sc: Scenario) -> ResultTable:
    history, props = _history(sc)
    result = assign_tracks(history, props, sc.epsilon)
    cols = ["t_from", "t_to", "permutation", "step_probability", "swap_probability", "isolated"]
    return ResultTable.from_records("tracks", [s.record() for s in result.steps],
                                    _metadata(sc, "tracks", epsilon=sc.epsilon, confidence=result.confidence,
                                              flagged=" ".join(map(str, result.flagged))),
                                    columns=cols)


def leftmost_table(sc: Scenario) -> ResultTable:
    ref = sc.ordered_packets[0].state(sc.lattice) if sc.packets else None
    rows, worst = [], 0.0
    for t, state in nonpersistence_states(sc):
        dist = leftmost_distribution(state)
        if ref is None:
            rows += [(t, x, p) for x, p in enumerate(dist)]
            continue
        single = ref.evolve(_one_particle(sc, t)).density()
        worst = max(worst, float(np.max(np.abs(dist - single))))
        rows += [(t, x, p, q) for x, (p, q) in enumerate(zip(dist, single))]
    cols = ["time", "x", "probability"] + (["single_packet"] if ref is not None else [])
    extra = {"tolerance": sc.tolerances["reidentification"]}
    if ref is not None:
        extra["max_deviation"] = worst
    return ResultTable("leftmost", cols, rows, _metadata(sc, "leftmost", **extra))


def distance_table(sc: Scenario) -> ResultTable:
    rows = []
    for t, state in nonpersistence_states(sc):
        rows += [(t, d, p) for d, p in enumerate(distance_distribution(state))]
    return ResultTable("distance", ["time", "distance", "probability"], rows, _metadata(sc, "distance"))


def dirac_contrast_table(sc: Scenario) -> ResultTable:
    if len(sc.packets) != 2:
        raise ValueError("dirac_contrast needs exactly two packets")
    pa, pb = (p.state(sc.lattice) for p in sc.ordered_packets)
    rows = []
    dirac_dev, leftmost_dev = 0.0, 0.0
    for t, state in nonpersistence_states(sc):
        u = _one_particle(sc, t)
        a, b = pa.evolve(u), pb.evolve(u)
        ext = dirac_symmetrize(a, b, sc.statistics)
        rho1, rho2 = reduced_density(ext, 1), reduced_density(ext, 2)
        mixture = (projector(a) + projector(b)) / 2
        dirac_dev = max(dirac_dev, float(np.max(np.abs(rho1 - mixture))), float(np.max(np.abs(rho2 - mixture))))
        left, phi_a = leftmost_distribution(state), a.density()
        leftmost_dev = max(leftmost_dev, float(np.max(np.abs(left - phi_a))))
        diag1, diag2, diagm = np.diag(rho1).real, np.diag(rho2).real, np.diag(mixture).real
        rows += [(t, x, diag1[x], diag2[x], diagm[x], left[x], phi_a[x]) for x in range(sc.lattice.sites)]
    cols = ["time", "x", "rho1", "rho2", "mixture", "leftmost", "phi_a_density"]
    return ResultTable("dirac_contrast", cols, rows,
                       _metadata(sc, "dirac_contrast", tolerance=sc.tolerances["dirac"],
                                 dirac_deviation=dirac_dev, leftmost_deviation=leftmost_dev))


def sum_rule_table(sc: Scenario) -> ResultTable:
    u, v = _legs(sc)
    rep = two_path_demo(u, v, sc.sum_rule.source, sc.sum_rule.target, sc.sum_rule.via)
    row = []
    for z in (rep.a, rep.b, rep.c, rep.path_sum, rep.direct):
        row += [z.real, z.imag]
    row.append(rep.difference)
    cols = [f"{name}_{part}" for name in ("a", "b", "a_plus_b", "path_sum", "direct") for part in ("re", "im")]
    tol = sc.tolerances["sum_rule"]
    return ResultTable("sum_rule_demo", cols + ["difference"], [tuple(row)],
                       _metadata(sc, "sum_rule_demo", tolerance=tol, source=sc.sum_rule.source,
                                 target=sc.sum_rule.target,
                                 via=" ".join(map(str, sc.sum_rule.via)), passed=int(rep.difference < tol)))


ANALYSIS_FUNCS: Dict[str, Callable[[Scenario], ResultTable]] = {
    "transition_map": transition_map_table,
    "composition_check": composition_check_table,
    "isolation_check": isolation_check_table,
    "candidate_scan": candidate_scan_table,
    "swap": swap_table,
    "tracks": tracks_table,
    "leftmost": leftmost_table,
    "distance": distance_table,
    "dirac_contrast": dirac_contrast_table,
    "sum_rule_demo": sum_rule_table,
}


# ============================================================
# --- Uitvoeren ---
# ============================================================

def run_analysis(sc: Scenario, name: str) -> ResultTable:
    try:
        table = ANALYSIS_FUNCS[name](sc)
    except (LabError, ValueError) as e:
        raise AnalysisError(name, e) from e
    logger.info("analysis %s: %d rows", name, len(table.rows))
    return table


def run(sc: Scenario, out_dir: str | os.PathLike) -> List[ResultTable]:
    """Every requested analysis, one CSV per analysis plus the resolved scenario as JSON."""
    tables = Parallel(n_jobs=n_jobs())(delayed(run_analysis)(sc, name) for name in sc.analyses)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = out_dir / "scenario.json"
    tmp = echo.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(sc.echo(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, echo)
    for table in tables:
        table.write(out_dir)
    return tables

# scenario.py: scenario-bestanden (TOML) inlezen en valideren, plus de
# resultaattabellen die `lab.py run` wegschrijft.
from __future__ import annotations

import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from common import DEFAULT_EPSILON, DEFAULT_TOLERANCES, ScenarioError, stable_hash
from lattice import LatticeSpec, Packet
from nonpersistence import EventMultiset, ExchangeStatistics
from persistence import LabelledConfig, PersistenceState, product_state

ANALYSES: Tuple[str, ...] = (
    "transition_map",
    "composition_check",
    "isolation_check",
    "candidate_scan",
    "swap",
    "tracks",
    "leftmost",
    "distance",
    "dirac_contrast",
    "sum_rule_demo",
)


@dataclass(frozen=True)
class SumRuleSpec:
    source: int = 0
    target: int = 1
    via: Tuple[int, int] = (0, 1)


@dataclass(frozen=True)
class Scenario:
    lattice: LatticeSpec
    statistics: ExchangeStatistics
    schedule: Tuple[float, ...]
    analyses: Tuple[str, ...]
    events: Optional[EventMultiset] = None
    packets: Tuple[Packet, ...] = ()
    amplitudes: Dict[Tuple[int, ...], complex] = field(default_factory=dict, repr=False)
    observations: Tuple[EventMultiset, ...] = ()
    seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    epsilon: float = DEFAULT_EPSILON
    interaction: float = 0.0
    theta: float = math.pi / 2
    scan_scenarios: int = 20
    isolation_samples: int = 1000
    sum_rule: SumRuleSpec = SumRuleSpec()
    source_hash: str = ""

    @property
    def n(self) -> int:
        if self.events is not None:
            return self.events.n
        if self.packets:
            return len(self.packets)
        return len(next(iter(self.amplitudes)))

    @property
    def ordered_packets(self) -> Tuple[Packet, ...]:
        # links-eerst: pakket 1 is het meest linkse
        return tuple(sorted(self.packets, key=lambda p: p.x0))

    @property
    def initial_events(self) -> Optional[EventMultiset]:
        if self.events is not None:
            return self.events
        if self.packets:
            return EventMultiset(tuple(int(round(p.x0)) for p in self.packets))
        return None

    def initial_state(self) -> PersistenceState:
        sites = self.lattice.sites
        if self.events is not None:
            psi = np.zeros((sites,) * self.n, dtype=complex)
            psi[LabelledConfig(self.events.events).positions] = 1.0
            return PersistenceState(psi)
        if self.packets:
            return product_state(*(p.state(self.lattice) for p in self.ordered_packets))
        psi = np.zeros((sites,) * self.n, dtype=complex)
        for config, amp in self.amplitudes.items():
            psi[config] = amp
        return PersistenceState.normalized(psi)

    def echo(self) -> Dict[str, Any]:
        """Every resolved field, defaults included."""
        return {
            "lattice": {
                "sites": self.lattice.sites,
                "boundary": self.lattice.boundary,
                "hopping": self.lattice.hopping,
                "potential": list(self.lattice.potential),
                "dt": self.lattice.dt,
            },
            "statistics": self.statistics.value,
            "schedule": list(self.schedule),
            "analyses": list(self.analyses),
            "initial": {
                "events": list(self.events.events) if self.events else None,
                "packets": [vars(p) for p in self.packets],
                "amplitudes": [[list(c), a.real, a.imag] for c, a in sorted(self.amplitudes.items())],
            },
            "observations": [list(e.events) for e in self.observations],
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "options": {
                "epsilon": self.epsilon,
                "interaction": self.interaction,
                "theta": self.theta,
                "scan_scenarios": self.scan_scenarios,
                "isolation_samples": self.isolation_samples,
                "sum_rule": {"source": self.sum_rule.source, "target": self.sum_rule.target,
                             "via": list(self.sum_rule.via)},
            },
        }


# ---------- Inlezen ----------

def _get(tree: Dict[str, Any], key: str, kind, default, where: str):
    if key not in tree:
        return default
    v = tree[key]
    try:
        if kind is float and isinstance(v, bool):
            raise TypeError
        return kind(v)
    except (TypeError, ValueError):
        raise ScenarioError(f"expected {kind.__name__}, got {v!r}", f"{where}{key}") from None


def _int_list(v: Any, where: str) -> Tuple[int, ...]:
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ScenarioError(f"expected a list of integers, got {v!r}", where)
    return tuple(v)


def load_scenario(path: str | os.PathLike) -> Scenario:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e.strerror}", str(path)) from None
    try:
        tree = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        # TOMLDecodeError noemt zelf regel en kolom
        raise ScenarioError(f"parse error: {e}", str(path)) from None
    return scenario_from_dict(tree, source_hash=stable_hash(tree))


def scenario_from_dict(tree: Dict[str, Any], source_hash: str = "") -> Scenario:
    known = {"lattice", "statistics", "schedule", "analyses", "initial", "observations",
             "seed", "tolerances", "options", "particles"}
    for key in tree:
        if key not in known:
            raise ScenarioError("unknown key", key)

    lat = tree.get("lattice")
    if not isinstance(lat, dict):
        raise ScenarioError("missing [lattice] table", "lattice")
    if "sites" not in lat:
        raise ScenarioError("missing", "lattice.sites")
    try:
        lattice = LatticeSpec(
            sites=_get(lat, "sites", int, 0, "lattice."),
            boundary=_get(lat, "boundary", str, "periodic", "lattice."),
            hopping=_get(lat, "hopping", float, 1.0, "lattice."),
            potential=tuple(float(x) for x in lat.get("potential", ())),
            dt=_get(lat, "dt", float, 0.1, "lattice."),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(str(e), "lattice") from None

    try:
        stats = ExchangeStatistics.parse(tree.get("statistics", "boson"))
    except ValueError as e:
        raise ScenarioError(str(e), "statistics") from None

    raw_schedule = tree.get("schedule", [0.0, lattice.dt])
    if not isinstance(raw_schedule, list) or not all(isinstance(t, (int, float)) for t in raw_schedule):
        raise ScenarioError(f"expected a list of times, got {raw_schedule!r}", "schedule")
    schedule = tuple(float(t) for t in raw_schedule)
    if len(schedule) < 1:
        raise ScenarioError("needs at least one time", "schedule")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ScenarioError("schedule not increasing", "schedule")

    analyses = tree.get("analyses", [])
    if not isinstance(analyses, list):
        raise ScenarioError(f"expected a list of names, got {analyses!r}", "analyses")
    analyses = tuple(analyses)
    for a in analyses:
        if a not in ANALYSES:
            raise ScenarioError(f"unknown analysis {a!r} (known: {', '.join(ANALYSES)})", "analyses")

    events, packets, amplitudes = _initial(tree.get("initial"), lattice, stats)
    n = events.n if events else len(packets) or len(next(iter(amplitudes)))
    if "particles" in tree and _get(tree, "particles", int, n, "") != n:
        raise ScenarioError(f"declares {tree['particles']} particles but the initial data has {n}", "particles")

    observations = tuple(EventMultiset(_int_list(e, "observations.events"))
                         for e in (tree.get("observations") or {}).get("events", ()))
    if observations:
        if len(observations) != len(schedule):
            raise ScenarioError(f"{len(observations)} observations for {len(schedule)} schedule times",
                                "observations.events")
        for ev in observations:
            if ev.n != n:
                raise ScenarioError(f"observation {ev.events} does not have {n} events", "observations.events")
            _check_events(ev, lattice, stats, "observations.events")

    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in (tree.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ScenarioError("unknown tolerance", f"tolerances.{k}")
        tolerances[k] = _get(tree["tolerances"], k, float, 0.0, "tolerances.")

    opts = tree.get("options") or {}
    sr = opts.get("sum_rule") or {}
    via = _int_list(sr.get("via", [0, 1]), "options.sum_rule.via")
    if len(via) != 2:
        raise ScenarioError("needs exactly two intermediate sites", "options.sum_rule.via")
    sum_rule = SumRuleSpec(_get(sr, "source", int, 0, "options.sum_rule."),
                           _get(sr, "target", int, 1, "options.sum_rule."), via)
    for site in (sum_rule.source, sum_rule.target, *sum_rule.via):
        if not 0 <= site < lattice.sites:
            raise ScenarioError(f"site {site} outside the lattice", "options.sum_rule")

    return Scenario(
        lattice=lattice,
        statistics=stats,
        schedule=schedule,
        analyses=analyses,
        events=events,
        packets=packets,
        amplitudes=amplitudes,
        observations=observations,
        seed=_get(tree, "seed", int, 0, ""),
        tolerances=tolerances,
        epsilon=_get(opts, "epsilon", float, DEFAULT_EPSILON, "options."),
        interaction=_get(opts, "interaction", float, 0.0, "options."),
        theta=_get(opts, "theta", float, math.pi / 2, "options."),
        scan_scenarios=_get(opts, "scan_scenarios", int, 20, "options."),
        isolation_samples=_get(opts, "isolation_samples", int, 1000, "options."),
        sum_rule=sum_rule,
        source_hash=source_hash,
    )


def _check_events(ev: EventMultiset, lattice: LatticeSpec, stats: ExchangeStatistics, where: str) -> None:
    try:
        ev.check(lattice.sites, stats)
    except ValueError as e:
        raise ScenarioError(str(e), where) from None


def _initial(init: Any, lattice: LatticeSpec, stats: ExchangeStatistics):
    if not isinstance(init, dict):
        raise ScenarioError("missing [initial] table", "initial")
    given = [k for k in ("events", "packets", "amplitudes") if k in init]
    if len(given) != 1:
        raise ScenarioError("give exactly one of events, packets, amplitudes", "initial")

    if "events" in init:
        ev = EventMultiset(_int_list(init["events"], "initial.events"))
        _check_events(ev, lattice, stats, "initial.events")
        return ev, (), {}

    if "packets" in init:
        packets = []
        for k, p in enumerate(init["packets"]):
            where = f"initial.packets[{k}]."
            if not isinstance(p, dict) or "x0" not in p:
                raise ScenarioError("needs at least x0", where.rstrip("."))
            pk = Packet(_get(p, "x0", float, 0.0, where), _get(p, "p0", float, 0.0, where),
                        _get(p, "sigma", float, 1.0, where))
            try:
                pk.state(lattice)
            except ValueError as e:
                raise ScenarioError(str(e), where.rstrip(".")) from None
            packets.append(pk)
        if not packets:
            raise ScenarioError("no packets", "initial.packets")
        centres = EventMultiset(tuple(int(round(p.x0)) for p in packets))
        _check_events(centres, lattice, stats, "initial.packets")
        return None, tuple(packets), {}

    amplitudes: Dict[Tuple[int, ...], complex] = {}
    for k, rec in enumerate(init["amplitudes"]):
        where = f"initial.amplitudes[{k}]"
        if not isinstance(rec, dict) or "config" not in rec:
            raise ScenarioError("needs a config", where)
        config = _int_list(rec["config"], where + ".config")
        if amplitudes and len(config) != len(next(iter(amplitudes))):
            raise ScenarioError("configs differ in particle count", where + ".config")
        if min(config) < 0 or max(config) >= lattice.sites:
            raise ScenarioError(f"config {config} outside the lattice", where + ".config")
        amplitudes[config] = complex(_get(rec, "re", float, 0.0, where + "."), _get(rec, "im", float, 0.0, where + "."))
    if not amplitudes or not any(abs(a) > 0 for a in amplitudes.values()):
        raise ScenarioError("no nonzero amplitudes", "initial.amplitudes")
    return None, (), amplitudes


# ============================================================
# --- Resultaattabellen ---
# ============================================================

@dataclass
class ResultTable:
    name: str
    columns: List[str]
    rows: List[Tuple[Any, ...]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for k, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {k} of {self.name} has {len(row)} values for {len(self.columns)} columns")

    @classmethod
    def from_records(cls, name: str, records: Sequence[Dict[str, Any]],
                     metadata: Optional[Dict[str, Any]] = None,
                     columns: Optional[List[str]] = None) -> "ResultTable":
        cols = columns or (list(records[0]) if records else [])
        return cls(name, cols, [tuple(r[c] for c in cols) for r in records], dict(metadata or {}))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def to_text(self) -> str:
        head = "".join(f"# {k}: {_meta_value(self.metadata[k])}\n" for k in sorted(self.metadata))
        return head + self.to_frame().to_csv(index=False, float_format="%.17g", lineterminator="\n")

    def write(self, directory: str | os.PathLike) -> Path:
        """Atomic write of <directory>/<name>.csv."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / f"{self.name}.csv"
        tmp = target.with_suffix(".csv.tmp")
        tmp.write_text(self.to_text(), encoding="utf-8")
        os.replace(tmp, target)
        return target


def _meta_value(v: Any) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={_meta_value(v[k])}" for k in sorted(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)

# lab_ui.py: UI helpers voor het deeltjeslab (kaarten, tabellen, zijbalk) + stabiele keys
from __future__ import annotations

import html
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import streamlit as st

from analyses import dirac_contrast_table, leftmost_table, swap_table, tracks_table
from common import LabError, fmt_float
from consistency import default_registry, random_scenarios, scan_candidates, survivors
from lattice import OPEN, PERIODIC, LatticeSpec, build_hamiltonian, propagator
from nonpersistence import ExchangeStatistics, transition_map
from scenario import ResultTable, Scenario, scenario_from_dict

logger = logging.getLogger(__name__)

STATS_LABELS = {"Bosonen": ExchangeStatistics.BOSON, "Fermionen": ExchangeStatistics.FERMION}


# ---------- Keys / utils ----------

def _uniq_key(prefix: str) -> str:
    """Return a unique key for this session (prevents StreamlitDuplicateElementKey)."""
    st.session_state.setdefault("_lab_keyseq", 0)
    st.session_state["_lab_keyseq"] += 1
    return f"{prefix}_{st.session_state['_lab_keyseq']}"


def lattice_sidebar() -> LatticeSpec:
    """Lattice controls in the sidebar; the choice is kept in session_state for the other pages."""
    saved = st.session_state.get("lab_lattice", {})
    with st.sidebar:
        st.markdown("## Rooster")
        sites = st.slider("Aantal sites", 2, 40, int(saved.get("sites", 16)), 1)
        boundary = st.radio("Rand", [PERIODIC, OPEN], horizontal=True,
                            index=0 if saved.get("boundary", PERIODIC) == PERIODIC else 1,
                            format_func=lambda b: "periodiek" if b == PERIODIC else "open")
        hopping = st.number_input("Hopping J", 0.1, 5.0, float(saved.get("hopping", 1.0)), 0.1)
    st.session_state["lab_lattice"] = {"sites": sites, "boundary": boundary, "hopping": hopping}
    return LatticeSpec(sites, boundary=boundary, hopping=hopping)


def stats_picker(key: str) -> ExchangeStatistics:
    label = st.radio("Statistiek", list(STATS_LABELS), horizontal=True, key=key)
    return STATS_LABELS[label]


# ---------- Berekeningen (gecachet) ----------

def _spec_dict(spec: LatticeSpec) -> Dict[str, object]:
    return {"sites": spec.sites, "boundary": spec.boundary, "hopping": spec.hopping}


@st.cache_data(show_spinner=False, ttl=60 * 30)
def cached_transition_map(lattice: Dict[str, object], events: Tuple[int, ...], t: float, stats: str) -> pd.DataFrame:
    spec = LatticeSpec(**lattice)
    probs = transition_map(propagator(build_hamiltonian(spec), t), events, ExchangeStatistics(stats))
    rows = [{"uitkomst": "{" + ",".join(map(str, m.events)) + "}", **{f"e{k + 1}": e for k, e in enumerate(m.events)},
             "kans": p} for m, p in probs.items()]
    return pd.DataFrame(rows)


def packet_scenario(lattice: Dict[str, object], packets: List[Dict[str, float]], t_end: float,
                    steps: int, stats: str) -> Scenario:
    return scenario_from_dict({
        "lattice": dict(lattice),
        "statistics": stats,
        "schedule": [float(t) for t in np.linspace(0.0, t_end, steps + 1)],
        "initial": {"packets": packets},
    })


@st.cache_data(show_spinner=False, ttl=60 * 30)
def cached_tracks(lattice: Dict[str, object], packets: List[Dict[str, float]], t_end: float,
                  steps: int, stats: str) -> Tuple[ResultTable, ResultTable, ResultTable]:
    sc = packet_scenario(lattice, packets, t_end, steps, stats)
    return tracks_table(sc), swap_table(sc), leftmost_table(sc)


@st.cache_data(show_spinner=False, ttl=60 * 30)
def cached_dirac(lattice: Dict[str, object], packets: List[Dict[str, float]], t_end: float, stats: str) -> ResultTable:
    return dirac_contrast_table(packet_scenario(lattice, packets, t_end, 1, stats))


@st.cache_data(show_spinner=False, ttl=60 * 60)
def cached_scan(count: int, seed: int, theta: float) -> Tuple[pd.DataFrame, List[str]]:
    scan = scan_candidates(default_registry(theta), random_scenarios(count, seed), seed=seed)
    return pd.DataFrame([s.record() for s in scan]), survivors(scan)


# ---------- UI blocks ----------

def card(title: str, value: float | str, meta: str = "", ok: Optional[bool] = None):
    shown = fmt_float(value) if isinstance(value, float) else str(value)
    badge = ""
    if ok is not None:
        badge = f'<span class="lab-badge {"lab-pass" if ok else "lab-fail"}">{"ok" if ok else "faalt"}</span>'
    st.markdown(
        f"""
        <div class="lab-card">
          <div class="lab-card-title">{html.escape(title)}{badge}</div>
          <div class="lab-card-value">{html.escape(shown)}</div>
          <div class="lab-meta">{html.escape(meta)}</div>
        </div>
        """,
        unsafe_allow_html=True,
    )


def render_table(table: ResultTable, title: Optional[str] = None):
    st.markdown(f"### {title or table.name}")
    meta = {k: v for k, v in table.metadata.items() if k != "tolerances"}
    if meta:
        st.caption(" • ".join(f"{k}: {v}" for k, v in sorted(meta.items())))
    st.dataframe(table.to_frame(), width="stretch", hide_index=True)
    st.download_button("Download CSV", table.to_text(), file_name=f"{table.name}.csv",
                       mime="text/csv", key=_uniq_key(f"dl_{table.name}"))


def render_error(e: Exception):
    # fouten uit het lab netjes tonen; de rest van de pagina blijft staan
    if isinstance(e, LabError):
        st.error(f"{type(e).__name__}: {e}")
    else:
        logger.exception("unexpected error in the dashboard")
        st.error(e)

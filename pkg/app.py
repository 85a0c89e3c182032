import math

import streamlit as st

from acceptance import run_criterion
from common import DEFAULT_TOLERANCES, LabError
from lab_ui import cached_transition_map, card, lattice_sidebar, render_error
from style import inject_css

st.set_page_config(page_title="Deeltjeslab", page_icon="⚛️", layout="wide")
inject_css()

spec = lattice_sidebar()
with st.sidebar:
    if st.button("🔄 Cache legen", width="stretch"):
        st.cache_data.clear()
        st.rerun()

st.markdown("# ⚛️ Deeltjeslab")
st.markdown(
    "Identieke deeltjes op een 1-D rooster: gelabelde paden (persistentie) tegenover "
    "uitkomsten als multiset (non-persistentie), de symmetrisatieregel en wanneer je "
    "deeltjes tóch kunt volgen."
)
st.caption(f"Rooster: {spec.sites} sites, {spec.boundary}, J = {spec.hopping}")

# Hong-Ou-Mandel op twee sites: altijd goedkoop, dus altijd tonen
st.markdown("## Bunching op twee sites")
c1, c2 = st.columns(2, gap="large")
for col, stats in zip((c1, c2), ("boson", "fermion")):
    with col:
        try:
            frame = cached_transition_map({"sites": 2, "boundary": "open", "hopping": 1.0},
                                          (0, 1), math.pi / 4, stats)
            for _, row in frame.iterrows():
                card(f"{stats} {row['uitkomst']}", float(row["kans"]))
        except LabError as e:
            render_error(e)

st.markdown("## Pagina's")
for label, page in (
    ("Bunching en uitsluiting", "pages/01_Bunching.py"),
    ("Sporen volgen", "pages/02_Sporen.py"),
    ("Kandidaten falsifiëren", "pages/03_Consistentie.py"),
    ("Dirac-contrast", "pages/04_Dirac.py"),
    ("Scenario draaien", "pages/05_Scenario.py"),
):
    if st.button(label, key=f"goto_{page}", width="stretch"):
        st.switch_page(page)

st.markdown("## Snelle controle")
if st.button("Draai kernels, bunching en somregel", width="stretch"):
    with st.spinner("Controleren…"):
        for name in ("kernels", "bunching", "sum_rule"):
            res = run_criterion(name, dict(DEFAULT_TOLERANCES))
            card(name, res.value, f"tol {res.tolerance:.0e} • {res.detail}", ok=res.passed)

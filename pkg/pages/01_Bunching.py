import streamlit as st

from common import LabError
from lab_ui import cached_transition_map, card, lattice_sidebar, render_error, stats_picker
from style import inject_css

st.set_page_config(page_title="Bunching", page_icon="🫧", layout="wide")
inject_css()
spec = lattice_sidebar()

st.markdown("# Bunching en uitsluiting")
st.caption("Kans op elke eindmultiset, vanuit twee gebeurtenissen, na tijd t.")

stats = stats_picker("bunching_stats")
c1, c2, c3 = st.columns([1, 1, 1.2], gap="small")
with c1:
    e1 = st.number_input("Gebeurtenis 1", 0, spec.sites - 1, min(3, spec.sites - 1), 1)
with c2:
    e2 = st.number_input("Gebeurtenis 2", 0, spec.sites - 1, min(4, spec.sites - 1), 1)
with c3:
    t = st.slider("Tijd t", 0.0, 10.0, 1.0, 0.05)

try:
    frame = cached_transition_map({"sites": spec.sites, "boundary": spec.boundary, "hopping": spec.hopping},
                                  (int(e1), int(e2)), float(t), stats.value)
except LabError as e:
    render_error(e)
    st.stop()

coincident = frame[frame["e1"] == frame["e2"]]["kans"].sum()
k1, k2 = st.columns(2)
with k1:
    card("Som over alle uitkomsten", float(frame["kans"].sum()))
with k2:
    card("Kans op samenvallen", float(coincident),
         "fermionen: altijd 0" if stats.value == "fermion" else "bosonen klonteren")

st.markdown("### Kaart e1 × e2")
st.dataframe(frame.pivot(index="e1", columns="e2", values="kans").fillna(0.0), width="stretch")
st.markdown("### Grootste uitkomsten")
st.dataframe(frame.sort_values("kans", ascending=False).head(20)[["uitkomst", "kans"]],
             width="stretch", hide_index=True)

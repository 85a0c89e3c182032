import streamlit as st

from common import LabError
from lab_ui import cached_tracks, card, lattice_sidebar, render_error, render_table, stats_picker
from style import inject_css

st.set_page_config(page_title="Sporen", page_icon="🛤️", layout="wide")
inject_css()
spec = lattice_sidebar()

st.markdown("# Sporen volgen")
st.caption("Twee golfpakketten, waargenomen op hun piek. Per interval de beste permutatie en de swapkans.")

stats = stats_picker("tracks_stats")
c1, c2, c3, c4, c5 = st.columns(5, gap="small")
with c1:
    xa = st.number_input("x0 pakket a", 0.0, float(spec.sites - 1), float(spec.sites // 4), 1.0)
with c2:
    xb = st.number_input("x0 pakket b", 0.0, float(spec.sites - 1), float(3 * spec.sites // 4), 1.0)
with c3:
    sigma = st.number_input("Breedte σ", 0.3, 5.0, 1.0, 0.1)
with c4:
    t_end = st.slider("Eindtijd T", 0.1, 10.0, 0.5, 0.1)
with c5:
    steps = st.slider("Stappen K", 1, 40, 10, 1)

packets = [{"x0": xa, "sigma": sigma}, {"x0": xb, "sigma": sigma}]
lattice = {"sites": spec.sites, "boundary": spec.boundary, "hopping": spec.hopping}
try:
    with st.spinner("Sporen berekenen…"):
        tracks, swaps, leftmost = cached_tracks(lattice, packets, float(t_end), int(steps), stats.value)
except LabError as e:
    render_error(e)
    st.stop()

k1, k2 = st.columns(2)
with k1:
    card("Vertrouwen", float(tracks.metadata["confidence"]), "product van beste / totale massa per stap",
         ok=tracks.metadata["confidence"] > 0.999)
with k2:
    flagged = tracks.metadata["flagged"]
    card("Niet-geïsoleerde stappen", flagged or "geen", f"epsilon {tracks.metadata['epsilon']}")

st.markdown("### Swapkans per stap")
st.line_chart(swaps.to_frame().set_index("t_to")["swap_probability"])
render_table(tracks, "Permutaties")

frame = leftmost.to_frame()
last = frame[frame["time"] == frame["time"].max()].set_index("x")
st.markdown("### Meest linkse gebeurtenis vs. los pakket (laatste tijd)")
st.line_chart(last[["probability", "single_packet"]])

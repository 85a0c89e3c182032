import streamlit as st

from common import LabError
from lab_ui import cached_dirac, card, lattice_sidebar, render_error, render_table, stats_picker
from style import inject_css

st.set_page_config(page_title="Dirac", page_icon="🪞", layout="wide")
inject_css()
spec = lattice_sidebar()

st.markdown("# Dirac-contrast")
st.caption(
    "Gesymmetriseerde toestand: beide gereduceerde dichtheden zijn het gemiddelde van de twee pakketten. "
    "De meest linkse gebeurtenis volgt daarentegen pakket a."
)

stats = stats_picker("dirac_stats")
c1, c2, c3 = st.columns(3, gap="small")
with c1:
    xa = st.number_input("x0 pakket a", 0.0, float(spec.sites - 1), float(spec.sites // 4), 1.0)
with c2:
    xb = st.number_input("x0 pakket b", 0.0, float(spec.sites - 1), float(3 * spec.sites // 4), 1.0)
with c3:
    t_end = st.slider("Tijd t", 0.0, 5.0, 0.5, 0.1)

lattice = {"sites": spec.sites, "boundary": spec.boundary, "hopping": spec.hopping}
packets = [{"x0": xa}, {"x0": xb}]
try:
    table = cached_dirac(lattice, packets, max(float(t_end), 1e-9), stats.value)
except LabError as e:
    render_error(e)
    st.stop()

k1, k2 = st.columns(2)
with k1:
    card("Gereduceerde dichtheid vs. mengsel", float(table.metadata["dirac_deviation"]),
         "max-norm, beide labels", ok=table.metadata["dirac_deviation"] < table.metadata["tolerance"])
with k2:
    card("Meest links vs. |φa|²", float(table.metadata["leftmost_deviation"]), "max-norm")

frame = table.to_frame()
last = frame[frame["time"] == frame["time"].max()].set_index("x")
st.line_chart(last[["rho1", "mixture", "leftmost", "phi_a_density"]])
render_table(table)

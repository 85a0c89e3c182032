import math

import streamlit as st

from common import LabError
from lab_ui import cached_scan, card, render_error
from style import inject_css

st.set_page_config(page_title="Consistentie", page_icon="🧪", layout="wide")
inject_css()

st.markdown("# Kandidaten falsifiëren")
st.caption("Elke kandidaat-synthesefunctie H moet isolatie én compositie over drie tijden doorstaan.")

c1, c2, c3 = st.columns(3, gap="small")
with c1:
    count = st.slider("Aantal scenario's", 5, 200, 20, 5)
with c2:
    seed = st.number_input("Seed", 0, 2**31 - 1, 0, 1)
with c3:
    theta = st.slider("θ voor de fase-kandidaat", 0.0, 2 * math.pi, math.pi / 2, 0.01)

try:
    with st.spinner("Scan loopt…"):
        frame, alive = cached_scan(int(count), int(seed), float(theta))
except LabError as e:
    render_error(e)
    st.stop()

card("Overlevers", " ".join(alive) or "geen", f"{count} scenario's, seed {seed}",
     ok=sorted(alive) == ["minus", "plus"])
st.dataframe(frame, width="stretch", hide_index=True)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import streamlit as st

from analyses import run_analysis
from common import LabError, stable_hash
from lab_ui import render_error, render_table
from scenario import scenario_from_dict
from style import inject_css

st.set_page_config(page_title="Scenario", page_icon="📄", layout="wide")
inject_css()

st.markdown("# Scenario draaien")
st.caption("Upload een scenariobestand (TOML); elke analyse verschijnt als tabel met CSV-download.")

upload = st.file_uploader("Scenario (.toml)", type=["toml"])
if upload is None:
    st.info("Nog geen scenario gekozen. Voorbeelden staan in de map scenarios/.")
    st.stop()

try:
    tree = tomllib.loads(upload.getvalue().decode("utf-8"))
    scenario = scenario_from_dict(tree, source_hash=stable_hash(tree))
except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
    st.error(f"Kan het bestand niet lezen: {e}")
    st.stop()
except LabError as e:
    render_error(e)
    st.stop()

with st.expander("Scenario (met standaardwaarden)"):
    st.json(scenario.echo())

for name in scenario.analyses:
    with st.spinner(f"{name}…"):
        try:
            render_table(run_analysis(scenario, name))
        except LabError as e:
            render_error(e)

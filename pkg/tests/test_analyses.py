import pickle

import pytest

from analyses import ANALYSIS_FUNCS, nonpersistence_states, run, run_analysis
from common import AnalysisError
from scenario import ANALYSES, load_scenario, scenario_from_dict


def test_every_analysis_has_a_function():
    assert set(ANALYSIS_FUNCS) == set(ANALYSES)


def test_bunching_run(root, tmp_path):
    sc = load_scenario(root / "scenarios" / "bunching.toml")
    tables = {t.name: t for t in run(sc, tmp_path)}
    frame = tables["transition_map"].to_frame()
    last = frame[frame["time"] == frame["time"].max()]
    assert last["probability"].sum() == pytest.approx(1.0, abs=1e-10)
    probs = {(r.e1, r.e2): r.probability for r in last.itertuples()}
    assert probs[(0, 0)] == pytest.approx(0.5, abs=1e-10)
    assert probs[(0, 1)] == pytest.approx(0.0, abs=1e-10)
    assert tables["composition_check"].metadata["passed"] == 1
    assert (tmp_path / "transition_map.csv").exists()
    assert (tmp_path / "scenario.json").exists()


def test_run_is_byte_identical(root, tmp_path):
    sc = load_scenario(root / "scenarios" / "fermion.toml")
    run(sc, tmp_path / "a")
    run(sc, tmp_path / "b")
    for path in sorted((tmp_path / "a").iterdir()):
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()


def test_tables_carry_tolerances(root):
    sc = load_scenario(root / "scenarios" / "fermion.toml")
    text = run_analysis(sc, "transition_map").to_text()
    assert "# tolerances: " in text
    assert f"# scenario_hash: {sc.source_hash}" in text


def test_candidate_scan_survivors(root):
    sc = load_scenario(root / "scenarios" / "candidate_scan.toml")
    table = run_analysis(sc, "candidate_scan")
    assert sorted(table.metadata["survivors"].split()) == ["minus", "plus"]
    assert len(table.rows) == 5


def test_sum_rule_difference(root):
    sc = load_scenario(root / "scenarios" / "sum_rule.toml")
    table = run_analysis(sc, "sum_rule_demo")
    row = dict(zip(table.columns, table.rows[0]))
    assert row["difference"] < 1e-12
    assert row["a_plus_b_re"] == pytest.approx(row["a_re"] + row["b_re"])


def test_crossing_scenario_flags_both_steps(root):
    sc = load_scenario(root / "scenarios" / "crossing.toml")
    tracks = run_analysis(sc, "tracks")
    assert tracks.metadata["confidence"] == pytest.approx(0.25)
    assert tracks.metadata["flagged"] == "0 1"
    swaps = run_analysis(sc, "swap").to_frame()
    assert swaps["swap_probability"].tolist() == pytest.approx([0.5, 0.5])


def test_disjoint_packets(root):
    sc = load_scenario(root / "scenarios" / "tracks.toml")
    assert run_analysis(sc, "leftmost").metadata["max_deviation"] < 1e-6
    assert run_analysis(sc, "dirac_contrast").metadata["dirac_deviation"] < 1e-10
    assert run_analysis(sc, "tracks").metadata["confidence"] > 0.999


def test_interacting_states_stay_normalized(root):
    sc = load_scenario(root / "scenarios" / "interacting.toml")
    for _, state in nonpersistence_states(sc):
        assert sum(state.probabilities().values()) == pytest.approx(1.0, abs=1e-10)
    frame = run_analysis(sc, "distance").to_frame()
    assert frame.groupby("time")["probability"].sum().tolist() == pytest.approx([1.0] * 3, abs=1e-10)


def test_errors_name_the_analysis():
    sc = scenario_from_dict({"lattice": {"sites": 6}, "initial": {"events": [1, 3]},
                             "analyses": ["dirac_contrast"]})
    with pytest.raises(AnalysisError, match="dirac_contrast") as err:
        run_analysis(sc, "dirac_contrast")
    assert err.value.analysis == "dirac_contrast"


def test_analysis_error_pickles():
    err = pickle.loads(pickle.dumps(AnalysisError("tracks", ValueError("boom"))))
    assert err.analysis == "tracks"
    assert str(err) == "tracks: ValueError: boom"


def test_errors_cross_worker_processes(monkeypatch, tmp_path):
    monkeypatch.setenv("LAB_N_JOBS", "2")
    sc = scenario_from_dict({"lattice": {"sites": 6}, "initial": {"events": [1, 3]},
                             "analyses": ["transition_map", "dirac_contrast"]})
    with pytest.raises(AnalysisError, match="dirac_contrast") as err:
        run(sc, tmp_path)
    assert err.value.analysis == "dirac_contrast"

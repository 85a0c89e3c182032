import math

import pytest

from common import DEFAULT_EPSILON, DEFAULT_TOLERANCES, ScenarioError
from nonpersistence import ExchangeStatistics
from scenario import ResultTable, load_scenario, scenario_from_dict

MINIMAL = """
statistics = "boson"
analyses = ["transition_map"]

[lattice]
sites = 4

[initial]
events = [0, 1]
"""


def _write(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_minimal_scenario_gets_defaults(tmp_path):
    sc = load_scenario(_write(tmp_path, MINIMAL))
    assert sc.statistics is ExchangeStatistics.BOSON
    assert sc.n == 2
    assert sc.tolerances == DEFAULT_TOLERANCES
    assert sc.epsilon == DEFAULT_EPSILON
    assert sc.seed == 0
    assert sc.lattice.boundary == "periodic"
    assert sc.schedule == (0.0, sc.lattice.dt)
    assert sc.theta == pytest.approx(math.pi / 2)
    assert len(sc.source_hash) == 16
    echo = sc.echo()
    assert echo["tolerances"]["composition"] == DEFAULT_TOLERANCES["composition"]
    assert echo["initial"]["events"] == [0, 1]


def test_schedule_must_increase(tmp_path):
    with pytest.raises(ScenarioError, match="schedule not increasing") as err:
        load_scenario(_write(tmp_path, "schedule = [2.0, 1.0]\n" + MINIMAL))
    assert err.value.field == "schedule"


def test_coincident_fermions_cite_exclusion(tmp_path):
    text = MINIMAL.replace('"boson"', '"fermion"').replace("[0, 1]", "[2, 2]")
    with pytest.raises(ScenarioError, match="exclusion"):
        load_scenario(_write(tmp_path, text))


def test_unknown_analysis(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, MINIMAL.replace("transition_map", "bogus")))
    assert err.value.field == "analyses"


def test_parse_error_names_the_line(tmp_path):
    with pytest.raises(ScenarioError, match="line"):
        load_scenario(_write(tmp_path, MINIMAL + "\nsites = = 3\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.toml")


@pytest.mark.parametrize("tree, field", [
    ({"initial": {"events": [0, 1]}}, "lattice"),
    ({"lattice": {"sites": 4}}, "initial"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 9]}}, "initial.events"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 1], "packets": []}}, "initial"),
    ({"lattice": {"sites": 4, "boundary": "twisted"}, "initial": {"events": [0, 1]}}, "lattice"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 1]}, "tolerances": {"speed": 1.0}}, "tolerances.speed"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 1]}, "particles": 3}, "particles"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 1]}, "schedule": [0.0, 1.0],
      "observations": {"events": [[0, 1]]}}, "observations.events"),
    ({"lattice": {"sites": 4}, "initial": {"events": [0, 1]}, "colour": "red"}, "colour"),
])
def test_validation_names_the_field(tree, field):
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(tree)
    assert err.value.field == field


def test_packet_scenario():
    sc = scenario_from_dict({
        "lattice": {"sites": 32},
        "initial": {"packets": [{"x0": 24.0}, {"x0": 8.0, "sigma": 1.5}]},
    })
    assert sc.n == 2
    assert [p.x0 for p in sc.ordered_packets] == [8.0, 24.0]
    assert sc.initial_events.events == (8, 24)
    assert sc.initial_state().psi.shape == (32, 32)


def test_amplitude_scenario_is_normalized():
    sc = scenario_from_dict({
        "lattice": {"sites": 5},
        "initial": {"amplitudes": [{"config": [0, 3], "re": 3.0}, {"config": [3, 0], "im": 4.0}]},
    })
    psi = sc.initial_state().psi
    assert abs(psi[0, 3]) == pytest.approx(0.6)
    assert abs(psi[3, 0]) == pytest.approx(0.8)
    assert sc.initial_events is None


def test_tolerance_override_is_merged():
    sc = scenario_from_dict({"lattice": {"sites": 4}, "initial": {"events": [0, 1]},
                             "tolerances": {"composition": 1e-8}})
    assert sc.tolerances["composition"] == 1e-8
    assert sc.tolerances["kernels"] == DEFAULT_TOLERANCES["kernels"]


def test_example_scenarios_load(root):
    files = sorted((root / "scenarios").glob("*.toml"))
    assert files
    for path in files:
        assert load_scenario(path).analyses


def test_result_table_width_check():
    with pytest.raises(ValueError):
        ResultTable("t", ["a", "b"], [(1.0,)])


def test_result_table_text_and_write(tmp_path):
    table = ResultTable("demo", ["x", "p"], [(0, 0.25), (1, 0.75)], {"seed": 3, "analysis": "demo"})
    text = table.to_text()
    assert text.splitlines()[:3] == ["# analysis: demo", "# seed: 3", "x,p"]
    assert text.splitlines()[3] == "0,0.25"
    path = table.write(tmp_path / "out")
    assert path.read_text(encoding="utf-8") == text
    assert not list((tmp_path / "out").glob("*.tmp"))


def test_result_table_from_records():
    table = ResultTable.from_records("r", [{"a": 1, "b": 2.0}, {"a": 3, "b": 4.0}])
    assert table.columns == ["a", "b"]
    assert table.to_frame()["b"].sum() == 6.0

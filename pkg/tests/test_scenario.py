import pytest

from indoor_noma.scenario import BUNDLED, ScenarioError, load_scenario, scenario_from_dict


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_bundled_scenarios_load_and_validate(name):
    sc = load_scenario(name)
    assert sc.num_irs == 2
    assert len(sc.source_digest) == 64
    assert sc.serving_ap.role == "serving"


def test_paper_room_grid_dimensions():
    g = load_scenario("paper-room").grid
    assert (g.n_x, g.n_y, g.cell_size) == (110, 60, 0.5)


def test_link_defaults(tiny):
    assert tiny.demand_bps == 60_000 and tiny.bandwidth_hz == 15_000
    assert tiny.noise_dbm == pytest.approx(-58.239, abs=1e-3)
    assert tiny.budget_mw == pytest.approx(100.0)
    assert tiny.t_total == 50


def test_rectangle_obstacles_expand(tiny):
    assert tiny.layout.occupied.sum() == 5


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d["aps"].pop(0), "exactly one serving AP"),
        (lambda d: d["irs"][0].update(start=[9.0, 0.5]), "outside the room"),
        (lambda d: d["irs"][0].update(destination=[1.75, 0.75]), "blocked cell"),
        (lambda d: d["obstacles"].append({"cells": [[3, 5], [3, 5]], "z": [0, 2.5]}), "no obstacle-free path"),
        (lambda d: d["link"].update(v_max=0), "v_max"),
        (lambda d: d["link"].update(speed=1), "unknown link keys"),
        (lambda d: d["obstacles"].append({"cells": [[3, 5]], "z": [0, 1]}), r"obstacles\[1\]"),
        (lambda d: d["aps"][0].pop("position"), r"aps\[0\]"),
        (lambda d: d["irs"][1].pop("destination"), r"irs\[1\]"),
        (lambda d: d["link"].update(ma_mode="tdma"), "ma_mode"),
    ],
)
def test_invalid_documents_are_rejected(tiny_doc, mutate, match):
    mutate(tiny_doc)
    with pytest.raises(ScenarioError, match=match):
        scenario_from_dict(tiny_doc)


def test_load_errors(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: [unclosed\n")
    with pytest.raises(ScenarioError, match="YAML"):
        load_scenario(bad)

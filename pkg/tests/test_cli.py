import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relnbody import Body, Formulation, IntegratorSettings, Scenario
from relnbody import scenarios
from relnbody.cli import main
from relnbody.scenarios import ScenarioError


def run(args):
    return main([str(a) for a in args])


def summary(outdir, name):
    return json.loads((outdir / f"{name}.summary.json").read_text())


def test_two_body_kepler_run(tmp_path, capsys):
    assert run(["run", "two_body_kepler", tmp_path]) == 0
    s = summary(tmp_path, "two_body_kepler")
    assert s["termination"] == "ReachedTEnd"
    assert s["invariants"]["max_identity_residual"] <= 1e-8
    assert s["two_body_contradiction"] == pytest.approx(0.5)
    with open(tmp_path / "two_body_kepler.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "r12_x", "r12_y", "r12_z", "v12_x", "v12_y", "v12_z"]
    assert len(rows) == 102
    assert "ReachedTEnd" in capsys.readouterr().out


def test_unequal_masses_verdict(tmp_path):
    assert run(["run", "bcos3_unequal_masses", tmp_path, "--report-invariants"]) == 0
    s = summary(tmp_path, "bcos3_unequal_masses")
    assert s["bcos3"]["verdict"] == "InconsistentMassRatio"
    assert s["invariants"]["samples_checked"] == s["samples"]
    assert s["invariants"]["min_accelerating_bodies"] >= 2


def test_rs2_run_reports_triangle_residual(tmp_path):
    assert run(["run", "rs2_random_n5", tmp_path]) == 0
    s = summary(tmp_path, "rs2_random_n5")
    assert s["triangle_max_residual"] <= 1e-12
    assert s["invariants"]["bound_ok"]


def test_nonexistent_file(tmp_path, capsys):
    assert run(["run", tmp_path / "missing.json", tmp_path]) == 1
    assert run(["check", tmp_path / "missing.json"]) == 1
    assert "missing.json" in capsys.readouterr().err


def test_check_antipodal(capsys):
    assert run(["check", "bcos3_antipodal"]) == 0
    assert "bcos3: Consistent" in capsys.readouterr().out


def test_check_unequal_prints_residual(capsys):
    assert run(["check", "bcos3_unequal_masses"]) == 0
    out = capsys.readouterr().out
    assert "InconsistentMassRatio" in out
    assert "constraint residual 1.000000e+00" in out


def test_check_coincident_bodies_names_pair(tmp_path, capsys):
    doc = scenarios.scenario_to_dict(scenarios.bundled("bcos3_unequal_masses"))
    doc["bodies"][2]["position"] = doc["bodies"][1]["position"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(["check", path]) == 1
    assert "(2,3)" in capsys.readouterr().out
    assert run(["run", path, tmp_path]) == 1


def collision_file(tmp_path):
    sc = Scenario("crash", [Body(1, [0, 0, 0], [0, 0, 0]), Body(1, [1, 0, 0], [0, 0, 0])],
                  Formulation.NCME, 5.0)
    path = tmp_path / "crash.json"
    scenarios.save(sc, path)
    return path


def test_exit_codes_for_guard_and_budget(tmp_path):
    path = collision_file(tmp_path)
    assert run(["run", path, tmp_path]) == 2
    assert summary(tmp_path, "crash")["guard_pair"] == [1, 2]
    doc = json.loads(path.read_text())
    doc["integrator"]["max_steps"] = 3
    doc["name"] = "budget"
    path.write_text(json.dumps(doc))
    assert run(["run", path, tmp_path]) == 3


def test_formulation_override(tmp_path):
    assert run(["run", "two_body_kepler", tmp_path, "--formulation", "RS2"]) == 0
    s = summary(tmp_path, "two_body_kepler")
    assert s["formulation"] == "RS2"


def test_sweep(tmp_path, capsys):
    code = run(["sweep", tmp_path, "two_body_kepler", "bcos3_antipodal", "--workers", "2"])
    assert code == 0
    assert (tmp_path / "bcos3_antipodal.csv").exists()
    assert run(["sweep", tmp_path, "two_body_kepler", collision_file(tmp_path)]) == 2


def test_trajectory_table_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["run", "body_frame_identity", a]) == 0
    assert run(["run", "body_frame_identity", b]) == 0
    assert (a / "body_frame_identity.csv").read_bytes() == (b / "body_frame_identity.csv").read_bytes()
    assert summary(a, "body_frame_identity")["body_frame_max_residual"] <= 1e-12


def test_list_and_show(capsys):
    assert run(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert names == list(scenarios.BUNDLED)
    assert run(["show", "bcos3_antipodal"]) == 0
    assert scenarios.loads(capsys.readouterr().out).name == "bcos3_antipodal"
    assert run(["show", "nope"]) == 1


@pytest.mark.parametrize("name", list(scenarios.BUNDLED))
def test_bundled_round_trip(name):
    sc = scenarios.bundled(name)
    again = scenarios.loads(scenarios.dumps(sc))
    assert scenarios.scenario_to_dict(again) == scenarios.scenario_to_dict(sc)
    assert again.settings == sc.settings


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=5),
    st.integers(0, 2**32 - 1),
    st.sampled_from(list(Formulation)),
    st.sampled_from(["RK4", "RK45"]),
)
def test_round_trip_preserves_every_field(masses, seed, formulation, method):
    if formulation is not Formulation.NCME and len(masses) < 2:
        formulation = Formulation.NCME
    rng = np.random.default_rng(seed)
    bodies = [Body(m, rng.normal(size=3), rng.normal(size=3)) for m in masses]
    sc = Scenario("rt", bodies, formulation, float(rng.uniform(0.1, 10)), G=float(rng.uniform(0.5, 2)),
                  settings=IntegratorSettings(method=method, dt=1e-2, sample_interval=0.1))
    again = scenarios.loads(scenarios.dumps(sc))
    assert again.formulation is sc.formulation and again.G == sc.G and again.t_end == sc.t_end
    assert again.settings == sc.settings
    for b0, b1 in zip(sc.bodies, again.bodies):
        assert b0.mass == b1.mass
        np.testing.assert_array_equal(b0.position, b1.position)
        np.testing.assert_array_equal(b0.velocity, b1.velocity)


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d["bodies"][1].update(mass=-1), "bodies[1].mass"),
        (lambda d: d["bodies"][0].update(position=[1, 2]), "bodies[0].position"),
        (lambda d: d["bodies"][2].pop("velocity"), "bodies[2].velocity"),
        (lambda d: d.update(formulation="XYZ"), "formulation"),
        (lambda d: d.update(t_end="soon"), "t_end"),
        (lambda d: d["integrator"].update(method="Euler"), "integrator.method"),
        (lambda d: d["integrator"].update(rel_tol=0), "integrator.rel_tol"),
        (lambda d: d.update(bodies=[]), "bodies"),
        (lambda d: d.pop("name"), "name"),
    ],
)
def test_malformed_fields_are_named(tmp_path, capsys, mutate, field):
    doc = scenarios.scenario_to_dict(scenarios.bundled("bcos3_unequal_masses"))
    mutate(doc)
    with pytest.raises(ScenarioError, match=__import__("re").escape(field)):
        scenarios.scenario_from_dict(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(["run", path, tmp_path]) == 1
    assert field in capsys.readouterr().err


def test_json_syntax_error_names_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  "G": ,\n}')
    assert run(["check", path]) == 1
    assert "line 3" in capsys.readouterr().err

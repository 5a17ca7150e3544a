"""Scenario files (JSON) and the bundled reproduction scenarios."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Body, Formulation, Scenario
from .integrate import IntegratorSettings


class ScenarioError(ValueError):
    """Malformed scenario document; the message names the offending field."""


def _number(doc, key, where, *, positive=False, required=True, default=None):
    if key not in doc:
        if required:
            raise ScenarioError(f"{where}{key}: missing")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}{key}: expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ScenarioError(f"{where}{key}: must be finite")
    if positive and value <= 0:
        raise ScenarioError(f"{where}{key}: must be > 0, got {value}")
    return value


def _vector(doc, key, where):
    if key not in doc:
        raise ScenarioError(f"{where}{key}: missing")
    v = doc[key]
    if (
        not isinstance(v, list)
        or len(v) != 3
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)
    ):
        raise ScenarioError(f"{where}{key}: expected three numbers, got {v!r}")
    return [float(c) for c in v]


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: expected a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: expected a non-empty string")
    G = _number(doc, "G", "", positive=True, required=False, default=1.0)
    try:
        formulation = Formulation(doc.get("formulation", "NCME"))
    except ValueError:
        choices = ", ".join(f.value for f in Formulation)
        raise ScenarioError(f"formulation: expected one of {choices}, got {doc.get('formulation')!r}")
    t_end = _number(doc, "t_end", "")

    raw = doc.get("bodies")
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("bodies: expected a non-empty list")
    bodies = []
    for i, b in enumerate(raw):
        where = f"bodies[{i}]."
        if not isinstance(b, dict):
            raise ScenarioError(f"bodies[{i}]: expected an object")
        mass = _number(b, "mass", where, positive=True)
        bodies.append(Body(mass, _vector(b, "position", where), _vector(b, "velocity", where)))

    integ = doc.get("integrator", {})
    if not isinstance(integ, dict):
        raise ScenarioError("integrator: expected an object")
    defaults = IntegratorSettings()
    method = integ.get("method", defaults.method)
    if not isinstance(method, str) or method.upper() not in ("RK4", "RK45"):
        raise ScenarioError(f"integrator.method: expected RK4 or RK45, got {method!r}")
    max_steps = integ.get("max_steps", defaults.max_steps)
    if isinstance(max_steps, bool) or not isinstance(max_steps, int) or max_steps <= 0:
        raise ScenarioError(f"integrator.max_steps: expected a positive integer, got {max_steps!r}")
    settings = IntegratorSettings(
        method=method,
        dt=_number(integ, "dt", "integrator.", positive=True, required=False, default=defaults.dt),
        rel_tol=_number(integ, "rel_tol", "integrator.", positive=True, required=False, default=defaults.rel_tol),
        abs_tol=_number(integ, "abs_tol", "integrator.", positive=True, required=False, default=defaults.abs_tol),
        max_steps=max_steps,
        sample_interval=_number(doc, "sample_interval", "", positive=True, required=False),
        collision_guard=_number(doc, "collision_guard", "", positive=True, required=False),
    )
    try:
        return Scenario(name, bodies, formulation, t_end, G=G, settings=settings)
    except ValueError as exc:
        raise ScenarioError(f"scenario: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    s = sc.settings
    doc = {
        "name": sc.name,
        "G": sc.G,
        "formulation": sc.formulation.value,
        "t_end": sc.t_end,
        "bodies": [
            {"mass": b.mass, "position": b.position.tolist(), "velocity": b.velocity.tolist()}
            for b in sc.bodies
        ],
        "integrator": {
            "method": s.method,
            "dt": s.dt,
            "rel_tol": s.rel_tol,
            "abs_tol": s.abs_tol,
            "max_steps": s.max_steps,
        },
    }
    if s.sample_interval is not None:
        doc["sample_interval"] = s.sample_interval
    if s.collision_guard is not None:
        doc["collision_guard"] = s.collision_guard
    return doc


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def dumps(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def load(path) -> Scenario:
    return loads(Path(path).read_text())


def save(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc))


# --- bundled scenarios --------------------------------------------------------


def _two_body_kepler() -> Scenario:
    # circular relative orbit under mu = G (m1 + m2) = 1.5
    mu = 1.5
    period = 2 * np.pi / np.sqrt(mu)
    bodies = [Body(1.0, [1.0, 0, 0], [0, np.sqrt(mu), 0]), Body(0.5, [0, 0, 0], [0, 0, 0])]
    return Scenario(
        "two_body_kepler", bodies, Formulation.RS1, period,
        settings=IntegratorSettings(rel_tol=1e-12, abs_tol=1e-14, sample_interval=period / 100),
    )


def _bcos3_antipodal() -> Scenario:
    # m2 = m3 = 4, r2 = -r3: the companions orbit under G (m1 + m3/4) = 2
    v = np.sqrt(2.0)
    bodies = [
        Body(1.0, [0, 0, 0], [0, 0, 0]),
        Body(4.0, [-1.0, 0, 0], [0, -v, 0]),
        Body(4.0, [1.0, 0, 0], [0, v, 0]),
    ]
    period = 2 * np.pi / v
    return Scenario(
        "bcos3_antipodal", bodies, Formulation.BCOS_REDUCED, period,
        settings=IntegratorSettings(rel_tol=1e-12, abs_tol=1e-14, sample_interval=period / 100),
    )


def _bcos3_unequal_masses() -> Scenario:
    bodies = [
        Body(1.0, [0, 0, 0], [0, 0, 0]),
        Body(1.0, [-1.0, 0, 0], [0, -1.2, 0]),
        Body(2.0, [1.0, 0, 0], [0, 1.0, 0]),
    ]
    return Scenario(
        "bcos3_unequal_masses", bodies, Formulation.BCOS_REDUCED, 2.0,
        settings=IntegratorSettings(sample_interval=0.02),
    )


def _rs2_random_n5() -> Scenario:
    # heavy primary plus four lighter bodies on perturbed circular orbits
    rng = np.random.default_rng(5)
    bodies = [Body(10.0, [0, 0, 0], [0, 0, 0])]
    for i in range(4):
        a = 1.0 + 1.5 * i + 0.3 * rng.random()
        phase = rng.uniform(0, 2 * np.pi)
        tilt = 0.1 * rng.standard_normal()
        pos = a * np.array([np.cos(phase), np.sin(phase), tilt])
        speed = np.sqrt(10.0 / a) * (1 + 0.05 * rng.standard_normal())
        vel = speed * np.array([-np.sin(phase), np.cos(phase), 0.0])
        bodies.append(Body(float(rng.uniform(0.1, 1.0)), pos, vel))
    return Scenario(
        "rs2_random_n5", bodies, Formulation.RS2, 10.0,
        settings=IntegratorSettings(sample_interval=0.1),
    )


def _body_frame_identity() -> Scenario:
    bodies = [
        Body(3.0, [0.3, -0.2, 0.1], [0.05, 0.1, 0.0]),
        Body(1.0, [2.0, 0.5, 0.0], [-0.3, 1.1, 0.05]),
        Body(0.5, [-1.5, 1.0, 0.2], [-0.6, -0.9, 0.0]),
        Body(0.8, [0.4, -2.5, -0.1], [1.0, 0.1, -0.05]),
    ]
    return Scenario(
        "body_frame_identity", bodies, Formulation.NCME, 3.0,
        settings=IntegratorSettings(sample_interval=0.05),
    )


BUNDLED = {
    "two_body_kepler": _two_body_kepler,
    "bcos3_antipodal": _bcos3_antipodal,
    "bcos3_unequal_masses": _bcos3_unequal_masses,
    "rs2_random_n5": _rs2_random_n5,
    "body_frame_identity": _body_frame_identity,
}


def bundled(name: str) -> Scenario:
    try:
        return BUNDLED[name]()
    except KeyError:
        raise KeyError(f"no bundled scenario {name!r}; choose from {sorted(BUNDLED)}") from None

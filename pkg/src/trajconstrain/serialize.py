"""JSON serialization for PMBM densities and scenarios.

Field names mirror the in-memory types; matrices are row-major nested lists,
times are integers. Round-trips are exact up to float repr (well within
1e-12).
"""

from __future__ import annotations

import json
from typing import Dict, List

import numpy as np

from .core import TimeWindow, Trajectory
from .gaussian import BirthDeathPmf, GaussianSequence, TrajectoryDensity
from .rfs import BernoulliTrajectory, GlobalHypothesis, PmbmDensity, PppTrajectory
from .scenario import Measurement, Scenario

PMBM_SCHEMA = "trajconstrain-pmbm-v1"
SCENARIO_SCHEMA = "trajconstrain-scenario-v1"


def density_to_dict(td: TrajectoryDensity) -> dict:
    return {
        "dim": td.dim,
        "pmf": [
            {"birth": b, "death": e, "prob": float(p)}
            for (b, e), p in td.pmf.items()
        ],
        "conditionals": [
            {"mean": g.mean.tolist(), "cov": g.cov.tolist()} for g in td.conditionals
        ],
    }


def density_from_dict(d: dict) -> TrajectoryDensity:
    pairs = tuple((int(e["birth"]), int(e["death"])) for e in d["pmf"])
    probs = np.array([e["prob"] for e in d["pmf"]], dtype=np.float64)
    dim = int(d["dim"])
    conds = tuple(
        GaussianSequence(np.array(c["mean"]), np.array(c["cov"]), dim)
        for c in d["conditionals"]
    )
    return TrajectoryDensity(BirthDeathPmf(pairs, probs), conds)


def pmbm_to_dict(m: PmbmDensity) -> dict:
    return {
        "schema": PMBM_SCHEMA,
        "ppp": {"mu": m.ppp.mu, "density": density_to_dict(m.ppp.density)},
        "hypotheses": [
            {
                "weight": h.weight,
                "tracks": [
                    {"r": t.r, "density": density_to_dict(t.density)} for t in h.tracks
                ],
            }
            for h in m.hypotheses
        ],
    }


def pmbm_from_dict(d: dict) -> PmbmDensity:
    if d.get("schema") != PMBM_SCHEMA:
        raise ValueError(f"unexpected schema {d.get('schema')!r}, want {PMBM_SCHEMA!r}")
    ppp = PppTrajectory(float(d["ppp"]["mu"]), density_from_dict(d["ppp"]["density"]))
    hyps = tuple(
        GlobalHypothesis(
            float(h["weight"]),
            tuple(
                BernoulliTrajectory(float(t["r"]), density_from_dict(t["density"]))
                for t in h["tracks"]
            ),
        )
        for h in d["hypotheses"]
    )
    return PmbmDensity(ppp, hyps)


def pmbm_to_json(m: PmbmDensity) -> str:
    return json.dumps(pmbm_to_dict(m), indent=2, sort_keys=True)


def pmbm_from_json(s: str) -> PmbmDensity:
    return pmbm_from_dict(json.loads(s))


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "schema": SCENARIO_SCHEMA,
        "window": {"alpha": sc.window.alpha, "gamma": sc.window.gamma},
        "truth": [
            {"birth": t.birth, "death": t.death, "states": t.states.tolist()}
            for t in sc.truth
        ],
        "measurements": {
            str(k): [
                {"value": m.value.tolist(), "source": m.source} for m in ms
            ]
            for k, ms in sc.measurements.items()
        },
    }


def scenario_from_dict(d: dict) -> Scenario:
    if d.get("schema") != SCENARIO_SCHEMA:
        raise ValueError(f"unexpected schema {d.get('schema')!r}, want {SCENARIO_SCHEMA!r}")
    window = TimeWindow(int(d["window"]["alpha"]), int(d["window"]["gamma"]))
    truth = [
        Trajectory(int(t["birth"]), int(t["death"]), np.array(t["states"]))
        for t in d["truth"]
    ]
    measurements: Dict[int, List[Measurement]] = {}
    for k, ms in d.get("measurements", {}).items():
        measurements[int(k)] = [
            Measurement(int(k), np.array(m["value"]), m.get("source")) for m in ms
        ]
    return Scenario(window, truth, measurements)


def scenario_to_json(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True)


def scenario_from_json(s: str) -> Scenario:
    return scenario_from_dict(json.loads(s))

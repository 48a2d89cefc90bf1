"""Shared builders for a compact two-reservoir test basin.

Layout: head -> up (plant) -> mid_farm -> low -> end_farm (sink). The "low"
reservoir plays the downstream-level role, so the reliability objective and
the energy objective both stay exercised with few nodes.
"""

import copy

from nile_momdp.config import parse_config

SMALL_DOC = {
    "basin": {
        "reservoirs": [
            {
                "name": "up",
                "capacity": 1.0e9,
                "dead_storage": 1.0e8,
                "max_release": 5000.0,
                "level_storage_table": [[0.0, 100.0, 5.0e7], [1.0e9, 150.0, 1.5e8]],
                "evap_rate_by_month": [0.1] * 12,
            },
            {
                "name": "low",
                "capacity": 2.0e9,
                "dead_storage": 2.0e8,
                "max_release": 5000.0,
                "level_storage_table": [[0.0, 10.0, 6.0e7], [2.0e9, 40.0, 2.0e8]],
                "evap_rate_by_month": [0.1] * 12,
            },
        ],
        "plants": [
            {
                "name": "up_power",
                "reservoir": "up",
                "efficiency": 0.9,
                "installed_capacity": 1.0e9,
                "turbine_max_flow": 2000.0,
                "tailwater_level": 95.0,
            },
        ],
        "demands": [
            {"name": "mid_farm", "monthly_demand": [2.0e8] * 12},
            {"name": "end_farm", "monthly_demand": [4.0e8] * 12},
        ],
        "inflows": [
            {
                "name": "head",
                "monthly_mean": [400.0] * 12,
                "monthly_cv": [0.3] * 12,
                "mode": "stochastic-lognormal",
            },
        ],
        "topology": [
            {"name": "head", "kind": "inflow", "downstream": "up"},
            {"name": "up", "kind": "reservoir", "downstream": "mid_farm"},
            {"name": "mid_farm", "kind": "demand", "downstream": "low"},
            {"name": "low", "kind": "reservoir", "downstream": "end_farm"},
            {"name": "end_farm", "kind": "demand", "downstream": None},
        ],
    },
    "env": {
        "horizon": 24,
        "gamma": 1.0,
        "initial_storages": {"up": 5.0e8, "low": 1.0e9},
        "min_power_level_had": 25.0,
        "deficit_power": 1.0,
    },
    "emodps": {"n_rbf": 2, "pop": 8, "nfe": 40},
}


def small_doc(*, horizon=24, deterministic=False, deficit_power=1.0,
              emodps=None):
    doc = copy.deepcopy(SMALL_DOC)
    doc["env"]["horizon"] = horizon
    doc["env"]["deficit_power"] = deficit_power
    if deterministic:
        for inflow in doc["basin"]["inflows"]:
            inflow["mode"] = "deterministic-trace"
    if emodps is not None:
        doc["emodps"].update(emodps)
    return doc


def small_config(**kwargs):
    return parse_config(small_doc(**kwargs))

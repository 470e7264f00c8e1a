import math
import os

import numpy as np
import pytest

import nsf

CONFIGS = os.environ.get("NSF_CONFIGS_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))

TINY = """
grid.nx = 8
grid.ny = 8
basis.n_modes = 2
v0.kind = mode
v0.amplitude = 0.5
theta_b.left = 1
theta_b.right = 2
theta_b.bottom = 1+s
theta_b.top = 1+s
run.dt = 0.01
run.t_end = 0.05
run.snapshots = false
"""


def test_scalar_oracles():
    assert nsf.t_k(2, 3) == 2
    assert nsf.g_k(2, 4) == 6
    assert nsf.conductivity(1.0, "rational") == 1.5
    s = nsf.stress((1.0, 0.0, -1.0), 1.0, p=3)
    assert s[0] == pytest.approx(math.sqrt(2), abs=1e-15)
    assert s[2] == pytest.approx(-math.sqrt(2), abs=1e-15)


def test_kirchhoff_round_trip():
    for s in (0.3, 1.0, 4.0):
        u = nsf.kirchhoff(s, profile="rational", lo=0.5, hi=3.0)
        assert nsf.kirchhoff_inverse(u, profile="rational", lo=0.5, hi=3.0) == pytest.approx(s, rel=1e-10)


def test_equilibrium_linear_profile():
    a = nsf.equilibrium(10, 6, "1", "2", "1+s", "1+s")
    assert a.shape == (8, 12)
    x = np.linspace(0.0, 1.0, 12)
    assert np.max(np.abs(a - (1.0 + x)[None, :])) < 1e-11


def test_run_returns_records_and_state():
    r = nsf.run(TINY)
    assert r["status"] == 0
    assert r["steps"] == 5
    assert all(v["passed"] for v in r["invariants"].values())
    recs = nsf.records(r)
    assert recs[0]["t"] == 0.0
    assert recs[-1]["t"] == pytest.approx(0.05)
    assert recs[-1]["kinetic_energy"] < recs[0]["kinetic_energy"]
    assert r["final_theta"].shape == (10, 10)
    assert r["final_theta"].min() >= r["mu"] - 1e-12


def test_run_is_deterministic():
    a = nsf.run(TINY, ["v0.kind=random", "run.seed=5"])
    b = nsf.run(TINY, ["v0.kind=random", "run.seed=5"])
    assert a["records"] == b["records"]


def test_config_errors():
    with pytest.raises(nsf.ConfigError):
        nsf.parse_config("nope = 1\n")
    with pytest.raises(ValueError):
        nsf.parse_config("grid.nx = x\n")
    r = nsf.run(TINY, ["theta0.kind=constant", "theta0.value=0"])
    assert r["status"] == 1
    assert "mu" in r["message"]


def test_config_hash_ignores_order():
    assert nsf.config_hash("run.dt=1\ngrid.nx=4\n") == nsf.config_hash("grid.nx = 4\nrun.dt = 1\n")


def test_verify_suites():
    rows = nsf.verify("truncation")
    assert rows and all(r["passed"] for r in rows)
    broken = nsf.verify("laws", True)
    assert not all(r["passed"] for r in broken)


def test_shipped_configs_parse():
    for name in sorted(os.listdir(CONFIGS)):
        if name.endswith(".cfg"):
            with open(os.path.join(CONFIGS, name)) as f:
                assert nsf.parse_config(f.read())

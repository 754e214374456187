import numpy as np
import pytest

import pdint


def test_problem_names():
    assert set(pdint.problem_names()) == {"robertson", "mapk", "stratospheric", "kdv"}


def test_robertson_final_stage_is_nonnegative_and_conservative():
    r = pdint.integrate("robertson", correction="final", atol=1e-6, rtol=1e-6)
    assert r["status"] == "completed"
    assert r["y"].shape[1] == 3
    assert r["t"][-1] == pytest.approx(1e4)
    assert r["min_component"].min() >= 0.0
    assert np.allclose(r["y"].sum(axis=1), 1.0, rtol=0, atol=1e-12)
    assert r["invariant_errors"]["mass"] <= 1e-12


def test_fixed_mode_uniform_steps():
    r = pdint.integrate("mapk", params={"alpha": "1"}, mode="fixed", h=0.5, tf=5.0)
    assert r["accepted_steps"] == 10
    assert np.allclose(r["h_used"][1:], 0.5)


def test_invariants_rows():
    rows = pdint.invariants("robertson", tf=100.0)
    assert {row["correction"] for row in rows} == {"none", "final", "all"}
    assert all(row["error"] <= 1e-12 for row in rows)


def test_convergence_slope():
    rep = pdint.convergence("mapk", correction="final", mode="fixed", tf=5.0, sweep=[0.05, 0.025, 0.0125])
    assert rep["status"] == "completed"
    assert 1.8 <= abs(rep["slope"]) <= 2.2


def test_steptrace():
    tr = pdint.steptrace("robertson", tf=10.0)
    assert tr["status"] == "completed"
    assert len(tr["h"]) == len(tr["accepted"]) > 0


def test_tableau():
    t = pdint.tableau("sdirk43")
    assert t["gamma"] == 0.25
    assert sum(t["b"]) == pytest.approx(1.0)


def test_invalid_spec_raises():
    with pytest.raises(ValueError):
        pdint.integrate("robertson", t0=1.0, tf=1.0)
    with pytest.raises(ValueError):
        pdint.integrate("nosuch")

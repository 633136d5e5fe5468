import json
import math

import numpy as np
import pytest

from oracles import GOLDEN
from reflexcycle import params as P
from reflexcycle.dynamics import (CSV_COLUMNS, FIELDS, SimulationError, accounting_residuals, initial_state,
                                  iterate, read_trajectory_csv, run, step, step_with_draws)
from reflexcycle.equilibrium import EquilibriumError, solve_ces
from reflexcycle.stochastic import ShockStreams


def test_golden_first_step(base):
    g = json.loads(GOLDEN.read_text())
    streams = ShockStreams.from_seed(g["seed"])
    assert float(streams.normals(1)[0]) == g["eps"]
    assert float(streams.uniforms(1)[0]) == g["u"]
    state = step_with_draws(initial_state(base), g["eps"], g["u"], base)
    for name, ref in g["state"].items():
        got = getattr(state, name)
        if name == "profit_residual":
            assert abs(got) < 1e-15
        else:
            assert got == pytest.approx(ref, rel=1e-9, abs=1e-15), name


def test_step_equals_run(short):
    p = P.with_overrides(short, {"engine.burn_in": 0, "engine.horizon": 40})
    traj = run(p)
    states = list(iterate(p, ShockStreams.from_seed(p.engine.seed), 40))
    assert np.array_equal(traj.data, np.array([s.to_array() for s in states]))


def test_burn_in_discarded(short):
    full = run(P.with_overrides(short, {"engine.burn_in": 0, "engine.horizon": 300}))
    tail = run(P.with_overrides(short, {"engine.burn_in": 100, "engine.horizon": 200}))
    assert np.array_equal(full.data[100:], tail.data)
    assert tail["t"][0] == 101
    assert np.array_equal(tail.before.to_array(), full.data[99])


def test_deterministic(short, tmp_path):
    a, b = run(short), run(short)
    assert np.array_equal(a.data, b.data)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert not np.array_equal(a.data, run(P.with_overrides(short, {"engine.seed": 1})).data)


def test_time_strictly_increasing(short):
    t = run(short)["t"]
    assert np.all(np.diff(t) == 1) and len(t) == short.engine.horizon


def test_no_inflow_no_depreciation_keeps_capital(short):
    p = P.with_overrides(short, {"delta": 0.0, "f_min": 0.0, "f_max": 0.0})
    traj = run(p)
    k0 = initial_state(p).k
    assert np.all(traj["k"] == k0)
    assert np.all(traj["F"] == 0)


def test_full_allocation_buys_no_bonds(short):
    p = P.with_overrides(short, {"f_min": 1.0, "f_max": 1.0})
    assert np.all(run(p)["b"] == 0.0)


def test_empty_horizon(short):
    traj = run(P.with_overrides(short, {"engine.horizon": 0}))
    assert len(traj) == 0 and traj.data.shape == (0, len(FIELDS))
    assert traj.metadata["seed"] == short.engine.seed and traj.metadata["params_hash"]
    assert accounting_residuals(traj)["budget_split"] == 0.0


def test_noiseless_steady_state(base):
    p = P.with_overrides(base, {"sigma_z": 0.0, "a": math.inf, "delta": 0.0,
                                "engine.horizon": 3000, "engine.burn_in": 2000})
    traj = run(p)
    for name in ("c", "n", "k", "b", "w", "q", "G", "F", "S", "income"):
        assert np.ptp(traj[name][-1000:]) == 0.0, name
    c_ref = p.z0 * solve_ces(traj["k"][-1], traj["G"][-1], p).c_tilde
    assert traj["c"][-1] == pytest.approx(c_ref, rel=1e-12)
    # near the abundant-capital value, which is the leading-order estimate
    assert traj["c"][-1] == pytest.approx(p.z0 * math.sqrt(p.g_max / 2), rel=0.05)


def test_invariants_along_run(short):
    traj = run(short)
    res = accounting_residuals(traj)
    assert res["budget_split"] < 1e-12
    assert res["capital_law"] < 1e-10
    assert res["rent_bounds"] == 0.0
    assert np.all(traj["k"] > 0) and np.all(traj["b"] >= 0) and np.all(traj["c"] > 0)
    assert np.all(np.abs(traj["profit_residual"]) < 1e-12)


def test_lagged_mode_is_exact(short):
    traj = run(P.with_overrides(short, {"coupling_mode": "lagged"}))
    res = accounting_residuals(traj)
    assert res["capital_law"] < 1e-14 and res["budget_split"] < 1e-12


def test_lagged_vs_simultaneous_mean_consumption(base):
    p = P.with_overrides(base, {"engine.horizon": 50_000})
    a = run(p)["c"].mean()
    b = run(P.with_overrides(p, {"coupling_mode": "lagged"}))["c"].mean()
    assert abs(a - b) / a < 0.02


def test_fixed_point_failure_names_period(short):
    p = P.with_overrides(short, {"solver.fp_max_iter": 1})
    with pytest.raises(SimulationError) as exc:
        run(p)
    assert exc.value.period >= 1


def test_equilibrium_failure_aborts(short):
    p = P.with_overrides(short, {"solver.max_iter": 2})
    with pytest.raises(EquilibriumError):
        initial_state(p)
    with pytest.raises(SimulationError) as exc:
        run(p, init=initial_state(short))
    assert exc.value.period == 1


def test_step_uses_streams(short):
    s1 = step(initial_state(short), ShockStreams.from_seed(0), short)
    s2 = step(initial_state(short), ShockStreams.from_seed(0), short)
    assert s1 == s2 and s1.t == 1


def test_csv_roundtrip(short, tmp_path):
    traj = run(P.with_overrides(short, {"engine.horizon": 100}))
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    cols = read_trajectory_csv(path)
    for name in CSV_COLUMNS:
        assert np.array_equal(cols[name], traj[name]), name

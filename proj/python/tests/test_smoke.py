import json
import math

import numpy as np
import pytest

import atlas_lab as al


def test_reflection_inverse():
    for m in (1, 2, 7):
        r = np.asarray(al.reflection_matrix(m))
        inv = np.asarray(al.reflection_matrix_inverse(m))
        assert np.allclose(r @ inv, np.eye(m), atol=1e-12)


def test_solver_example():
    out = al.solve_skorokhod([-0.2, 0.5])
    assert out["local_time_increments"] == pytest.approx([0.2, 0.0])
    assert out["new_gaps"] == pytest.approx([0.0, 0.4], abs=1e-12)


def test_atlas_rates():
    rates = al.ModelSpec.atlas(4).stationary_gap_rates()
    assert rates == pytest.approx([1.5, 1.0, 0.5])
    assert al.ModelSpec.alt(3, 1.0).rank_drifts == pytest.approx([0.75, -0.25, -0.5, -0.75])


def test_simulate_shapes_and_replay():
    spec = al.ModelSpec.atlas(6)
    a = al.simulate(spec, [0.5] * 5, horizon=1.0, dt=1e-2, sample_every=10, seed=3)
    b = al.simulate(spec, [0.5] * 5, horizon=1.0, dt=1e-2, sample_every=10, seed=3)
    assert a["gaps"].shape == (11, 5)
    assert np.array_equal(a["gaps"], b["gaps"])
    assert (a["gaps"] >= -1e-12).all()
    assert np.all(np.diff(a["local_times"], axis=0) >= 0)


def test_coupling_identity():
    lower = al.sample_pi_a(0.0, 8, seed=1)
    upper = [x + 0.5 for x in lower]
    rec = al.couple(al.ModelSpec.atlas(9), lower, upper, horizon=1.0, dt=1e-3)
    assert rec["l1_defect"] < 1e-10
    assert rec["monotone_violation"] < 1e-10
    delta = rec["gaps_upper"] - rec["gaps_lower"]
    ex = al.detect_excursions(rec["time"].tolist(), delta, k=1, epsilon=0.1)
    assert ex["n_t"] >= len(ex["decrements"])


def test_stats():
    assert al.ks_to_exponential([math.log(2.0)], 1.0) == pytest.approx(0.5)
    assert al.normal_tail(0.0) == 0.5
    assert al.excursion_length_threshold(1.0, 1, math.e) == pytest.approx(192.0)
    b = al.analytic_bounds(1, 1, 1, 1.0, 0.0, [0.0, 0.0, 1.0])
    assert b["sup_clamped"]


def test_run_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(
        "[experiment]\nkind = coupling\nseed = 4\n[model]\nparticles = 5\ndt = 1e-3\nhorizon = 0.5\n"
        "sample_every = 50\n[initial]\nkind = stationary_pi_a\n[coupling]\nruns = 2\n"
    )
    summary = al.run_experiment(cfg, tmp_path / "run")
    assert summary["kind"] == "coupling"
    assert (tmp_path / "run" / "summary.json").exists()
    assert json.loads((tmp_path / "run" / "summary.json").read_text())["seed"] == 4
    assert "[model]" in al.render_config(str(cfg))


def test_config_error(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[experiment]\nkind = nope\n")
    with pytest.raises(al.ConfigError):
        al.render_config(str(cfg))

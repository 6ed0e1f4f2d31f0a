import math

import numpy as np
import pytest

import oseen_decay as od


def test_heat_kernel_peak():
    assert od.heat_kernel([0, 0, 0], 1.0) == pytest.approx((4 * math.pi) ** -1.5)


def test_oseen_is_drifted_stokes():
    z = np.array([0.7, 0.2, -0.4])
    a = od.oseen_kernel(z, 0.8, 1.3)
    b = od.stokes_kernel(z - 0.8 * 1.3 * np.array([1.0, 0, 0]), 0.8)
    assert a.shape == (3, 3)
    assert np.allclose(a, b, rtol=1e-14, atol=0)
    assert np.allclose(a, a.T)


def test_wake_weight():
    assert od.wake_weight([5, 0, 0]) == pytest.approx(1.0)
    assert od.wake_weight([-5, 0, 0]) == pytest.approx(11.0)


def test_rates_by_hand():
    rho1, rho2 = od.predict_linear_rates(od.RateInputs())
    assert rho1 == 0.5
    assert rho2 == 1.0
    bad = od.RateInputs()
    bad.q0 = 1.6
    with pytest.raises(ValueError, match="q0"):
        od.predict_linear_rates(bad)


def test_z_bound():
    assert od.z_value(0, 1, 0.6) == pytest.approx(-0.1)
    grid = [(i + 0.5) / 1000 for i in range(1000)]
    assert od.z_bound_counterexamples(grid) == []


def test_initial_potential_mass():
    t = 1000.0
    v = od.initial_potential("vector_bump", [0, 2.5, 0], 1.0, [0, 0, 1], [t, 2.5, 0], t, 1.0)
    mass = 4 * math.pi * 16 / 315
    assert v[2] * (4 * math.pi * t) ** 1.5 == pytest.approx(mass, rel=0.02)


def test_kernel_checks_pass():
    rows = od.kernel_checks(3)
    assert rows and all(r["pass"] for r in rows)


def test_config_round_trip(tmp_path):
    cfg = od.default_config()
    cfg["output_dir"] = str(tmp_path / "out")
    assert od.validate_config(cfg) == []
    cfg["rates"]["q0"] = 1.6
    kinds = [k for k, _, _ in od.validate_config(cfg)]
    assert kinds == ["domain"]
    cfg["rates"]["q0"] = 1.1
    cfg["experiments"] = [{"kind": "rates"}, {"kind": "z-bound", "grid": 100}]
    rc, log = od.run(cfg)
    assert rc == 0
    assert "z-bound" in log
    failed, table = od.report(tmp_path / "out")
    assert failed == 0
    assert (tmp_path / "out" / "summary.json").exists()

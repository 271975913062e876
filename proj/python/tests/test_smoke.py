import json
import math

import pytest

import leaky_spectra as ls

A = 2.0 * math.pi
SINE = {"period_a": A, "gamma": {"kind": "sine", "params": {"amplitude": 0.5}}}
FLAT = {"period_a": A, "gamma": {"kind": "flat"}}


def test_bessel_values():
    assert ls.bessel_k0(1.0) == pytest.approx(0.42102443824070834, rel=1e-14)
    assert ls.bessel_k1(1.0) == pytest.approx(0.60190723019723457, rel=1e-14)
    assert ls.k_ratio(1.0) == pytest.approx(0.42102443824070834 / 0.60190723019723457, rel=1e-14)
    with pytest.raises(ValueError):
        ls.bessel_k0(-1.0)


def test_straight_threshold():
    t = ls.find_threshold(FLAT, 1.0)
    assert t["eps0"] == pytest.approx(-0.25, rel=1e-3)
    assert ls.find_threshold(SINE, 1.0)["eps0"] < t["eps0"]


def test_line_symbol():
    mu = ls.line_mu_max(FLAT, 1.0, 0.5, 120.0, 1200)
    assert mu == pytest.approx(1.0, rel=0.02)


def test_bands_symmetric():
    b = ls.band_structure(SINE, 1.0, n_theta=9, bands=1, n_cell=16)
    e = b["energies"]
    assert all(s == "ok" for s in b["status"])
    for k in range(len(e)):
        assert e[k] == pytest.approx(e[-1 - k], rel=1e-9)


def test_square_band_bottom():
    assert -1.0 < ls.square_array_band_bottom(1.0, 2.0, 4.0) < 0.0


def test_run_threshold_is_deterministic():
    cfg = {"curve": SINE, "alpha": 1.0, "threshold": {"n_cell": 16, "refine": False}}
    a = ls.run("threshold", cfg)
    b = ls.run("threshold", json.dumps(cfg))
    assert a == b
    rec = a["files"]["threshold.json"]
    assert rec["config_hash"] == a["config_hash"]
    assert len(a["config_hash"]) == 64


def test_errors():
    with pytest.raises(ls.ConfigError):
        ls.run("threshold", {"curve": SINE, "alpha": 1.0, "threshold": {"ncell": 4}})
    with pytest.raises(ls.ConfigError):
        ls.run("nope", {"alpha": 1.0})
    with pytest.raises(ls.NumericalError):
        ls.run("threshold", {"curve": SINE, "alpha": 20.0, "threshold": {"n_cell": 16}})
    with pytest.raises(ValueError):
        ls.find_threshold({"period_a": -1.0, "gamma": {"kind": "flat"}}, 1.0)

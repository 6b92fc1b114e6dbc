import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringsource.errors import DomainError, ValidationError
from ringsource.noisemodel import (
    DetectionChain,
    NoiseParams,
    car,
    car_curve,
    coincidence_rates,
    raman_noise_rates,
    singles_rates,
    thermal_occupancy,
)
from ringsource.pairgen import pair_generation_rate
from ringsource.quantities import H, K_B

from oracles import bose

CHAIN = DetectionChain(eta_s_db=16.4, eta_i_db=24.1, window=1152e-12)
NO_NOISE = NoiseParams(0.0, 0.0, 0.0)


def test_thermal_occupancy_examples():
    assert thermal_occupancy(3.652e12, 295) == pytest.approx(float(bose(3.652e12, 295)), rel=1e-12)
    assert thermal_occupancy(3.652e12, 295) == pytest.approx(1.233, abs=1e-3)
    assert thermal_occupancy(3.652e12, 1e-6) == 0.0
    nu = K_B * 300 * math.log(2) / H
    assert thermal_occupancy(nu, 300) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        thermal_occupancy(0.0, 295)


def test_raman_examples():
    n_th = thermal_occupancy(3.652e12, 295)
    n_s, n_i = raman_noise_rates(1e9, 1e-3, 3.652e12, 295)
    assert (n_s, n_i) == pytest.approx((1e6 * n_th, 1e6 * (n_th + 1)), rel=1e-14)
    assert n_s == pytest.approx(1.2324e6, rel=1e-4)
    assert raman_noise_rates(1e9, 0.0, 3.652e12, 295) == (0.0, 0.0)


@given(st.floats(1e3, 1e12), st.floats(1e-6, 1.0), st.floats(1e11, 2e13), st.floats(10, 1000))
def test_detailed_balance(k, p, nu, t):
    n_s, n_i = raman_noise_rates(k, p, nu, t)
    if n_s > 0:
        assert n_i / n_s == pytest.approx(math.exp(H * nu / (K_B * t)), rel=1e-9)


def test_singles_examples():
    r_s, _ = singles_rates(1e6, 0.0, 0.0, NO_NOISE, CHAIN)
    assert r_s == pytest.approx(22908.67652767773, rel=1e-10)
    dark = NoiseParams(0.0, 250.0, 250.0)
    assert singles_rates(0.0, 0.0, 0.0, dark, CHAIN)[0] == 250.0
    assert singles_rates(1e6, 2e6, 0.0, dark, CHAIN)[0] == pytest.approx(68976.02958303319, rel=1e-10)
    with pytest.raises(ValidationError):
        singles_rates(-1.0, 0.0, 0.0, NO_NOISE, CHAIN)


def test_coincidence_examples():
    cc, _ = coincidence_rates(1122018.4543019634, 0.0, 0.0, CHAIN)
    assert cc == pytest.approx(100.0, rel=1e-10)
    _, ac = coincidence_rates(0.0, 22910.0, 3890.0, CHAIN)
    assert ac == pytest.approx(0.1026661248, rel=1e-10)
    assert coincidence_rates(0.0, 5.0, 5.0, CHAIN)[0] == 0.0


def test_car_examples():
    assert car(100, 0.1027) == pytest.approx(973.71, abs=0.01)
    assert car(0, 3.0) == 0.0
    assert car(5.0, 0.0) == math.inf
    assert math.isnan(car(0.0, 0.0))
    g = 1e6
    r_s, r_i = singles_rates(g, 0, 0, NO_NOISE, CHAIN)
    cc, ac = coincidence_rates(g, r_s, r_i, CHAIN)
    assert car(cc, ac) == pytest.approx(868.0555555555555, rel=1e-10)


def test_car_curve_empty(device):
    assert car_curve(device, []) == []


def test_car_curve_noiseless_collapse(device):
    quiet = device.replace(noise__raman_coefficient=0.0, noise__dark_count_signal=0.0,
                           noise__dark_count_idler=0.0)
    powers = np.linspace(0.05e-3, 2e-3, 25)
    for pt in car_curve(quiet, powers):
        assert pt.car * pt.pair_rate * quiet.chain.window == pytest.approx(1.0, rel=1e-10)
        assert pt.ac >= pt.cc * pt.pair_rate * quiet.chain.window * (1 - 1e-12)


def test_car_curve_rejects_unsorted(device):
    with pytest.raises(ValidationError):
        car_curve(device, [2e-3, 1e-3])


def test_car_curve_shape(device):
    pts = car_curve(device, np.linspace(0.05e-3, 2e-3, 40))
    cars = np.array([p.car for p in pts])
    # dark counts limit the low end, multi-pair accidentals the high end
    assert np.argmax(cars) not in (0, cars.size - 1)
    assert np.all(np.diff(cars[-10:]) < 0)


@given(st.floats(0.01, 100))
def test_car_invariant_under_eta_exchange(a):
    g, n_s, n_i = 5e5, 2e6, 3e6
    es, ei = 0.02, 0.004
    def ratio(es_, ei_):
        r_s = (n_s + g) * es_
        r_i = (n_i + g) * ei_
        return (g * es_ * ei_) / (r_s * r_i * 1e-9)
    assert ratio(es * a, ei / a) == pytest.approx(ratio(es, ei), rel=1e-12)


def test_singles_curvature(device):
    """R_s is affine without pairs and convex with them (finite differences)."""
    p = np.array([0.5e-3, 1.0e-3, 1.5e-3])
    no_pairs = device.replace(nonlinear__n_nl=1e-40)
    r_lin = np.array([q.r_s for q in car_curve(no_pairs, p)])
    assert r_lin[0] - 2 * r_lin[1] + r_lin[2] == pytest.approx(0.0, abs=1e-9 * r_lin[1])
    r = np.array([q.r_s for q in car_curve(device, p)])
    second = r[0] - 2 * r[1] + r[2]
    g = pair_generation_rate(device, p)
    expected = device.chain.eta_s * (g[0] - 2 * g[1] + g[2])
    assert second > 0
    assert second == pytest.approx(expected, rel=1e-6)


def test_detection_chain_validation():
    with pytest.raises(ValidationError):
        DetectionChain(1.0, 1.0, window=0.0)
    with pytest.raises(ValidationError):
        DetectionChain(1.0, 1.0, window=1e-9, detector_qe=1.5)
    with pytest.raises(ValidationError):
        NoiseParams(-1.0, 0.0, 0.0)

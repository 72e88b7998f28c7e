"""Elliptic integrals against brute-force quadrature of the defining
integrals (x = sin u removes the endpoint singularity)."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from otsuki_bipolar.elliptic import (
    complete_E,
    complete_K,
    complete_Pi,
    dE_dk,
    dK_dk,
    dPi_dk,
    dPi_dn,
)
from otsuki_bipolar.errors import DomainError

HALF_PI = 0.5 * math.pi


def quad_K(k):
    return quad(lambda u: 1.0 / math.sqrt(1.0 - (k * math.sin(u)) ** 2),
                0.0, HALF_PI, epsabs=1e-14, epsrel=1e-14)[0]


def quad_E(k):
    return quad(lambda u: math.sqrt(1.0 - (k * math.sin(u)) ** 2),
                0.0, HALF_PI, epsabs=1e-14, epsrel=1e-14)[0]


def quad_Pi(n, k):
    return quad(lambda u: 1.0 / ((1.0 - n * math.sin(u) ** 2)
                                 * math.sqrt(1.0 - (k * math.sin(u)) ** 2)),
                0.0, HALF_PI, epsabs=1e-14, epsrel=1e-14)[0]


def test_special_values():
    assert complete_K(0.0) == pytest.approx(HALF_PI, abs=1e-15)
    assert complete_E(0.0) == pytest.approx(HALF_PI, abs=1e-15)
    assert complete_E(1.0) == 1.0
    assert complete_Pi(0.0, 0.0) == pytest.approx(HALF_PI, abs=1e-15)


@pytest.mark.parametrize("k", [0.1, 0.3, 0.5, 0.7, 0.9, 0.99])
def test_K_matches_quadrature(k):
    assert complete_K(k) == pytest.approx(quad_K(k), rel=1e-12)


@pytest.mark.parametrize("k", [0.1, 0.3, 0.6, 0.9, 0.999])
def test_E_matches_quadrature(k):
    assert complete_E(k) == pytest.approx(quad_E(k), rel=1e-12)


@pytest.mark.parametrize("n,k", [(0.5, 0.5), (0.2, 0.8), (0.9, 0.3),
                                 (0.3, 0.4), (0.75, 0.75)])
def test_Pi_matches_quadrature(n, k):
    assert complete_Pi(n, k) == pytest.approx(quad_Pi(n, k), rel=1e-12)


def test_Pi_characteristic_zero_degenerates_to_K():
    for k in (0.0, 0.2, 0.7, 0.95):
        assert complete_Pi(0.0, k) == pytest.approx(complete_K(k), rel=1e-14)


def test_legendre_relation_on_grid():
    for k in np.linspace(0.01, 0.99, 50):
        kp = math.sqrt(1.0 - k * k)
        lhs = (complete_E(k) * complete_K(kp) + complete_E(kp) * complete_K(k)
               - complete_K(k) * complete_K(kp))
        assert abs(lhs - HALF_PI) < 1e-11


def test_Pi_increasing_in_characteristic():
    for k in (0.1, 0.5, 0.9):
        vals = [complete_Pi(n, k) for n in np.linspace(0.0, 0.95, 20)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


@pytest.mark.parametrize("k", [0.2, 0.5, 0.8])
def test_dE_dk_matches_finite_difference(k):
    assert dE_dk(k) == pytest.approx(_central(complete_E, k, 1e-6), abs=1e-8)


@pytest.mark.parametrize("k", [0.2, 0.5, 0.8])
def test_dK_dk_matches_finite_difference(k):
    assert dK_dk(k) == pytest.approx(_central(complete_K, k, 1e-6), abs=1e-8)


def test_dE_dk_vanishes_at_zero_modulus():
    assert abs(dE_dk(1e-8)) < 1e-7


@pytest.mark.parametrize("n,k", [(0.3, 0.4), (0.6, 0.5), (0.2, 0.7)])
def test_dPi_dn_matches_finite_difference(n, k):
    fd = _central(lambda x: complete_Pi(x, k), n, 1e-6)
    assert dPi_dn(n, k) == pytest.approx(fd, abs=1e-7)


@pytest.mark.parametrize("n,k", [(0.3, 0.4), (0.6, 0.5), (0.2, 0.7)])
def test_dPi_dk_matches_finite_difference(n, k):
    fd = _central(lambda x: complete_Pi(n, x), k, 1e-6)
    assert dPi_dk(n, k) == pytest.approx(fd, abs=1e-7)


def test_dPi_dk_degenerates_to_dK_dk():
    for k in (0.3, 0.6):
        assert dPi_dk(1e-10, k) == pytest.approx(dK_dk(k), rel=1e-6)


def test_derivative_identity_from_K():
    # k(1-k^2) K'(k) = E(k) - (1-k^2) K(k), and the right side is positive
    for k in np.linspace(0.05, 0.95, 19):
        lhs = k * (1.0 - k * k) * dK_dk(k)
        rhs = complete_E(k) - (1.0 - k * k) * complete_K(k)
        assert abs(lhs - rhs) < 1e-11
        assert rhs > 0.0


def test_domain_errors():
    for bad in (-0.1, 1.0, 1.5, float("nan")):
        with pytest.raises(DomainError):
            complete_K(bad)
    with pytest.raises(DomainError):
        complete_E(1.0 + 1e-9)
    with pytest.raises(DomainError):
        complete_Pi(1.0, 0.5)
    with pytest.raises(DomainError):
        dE_dk(0.0)
    with pytest.raises(DomainError):
        dK_dk(1.0)
    with pytest.raises(DomainError):
        dPi_dn(0.25, 0.5)   # n = k^2 singular line
    with pytest.raises(DomainError):
        dPi_dk(0.25, 0.5)

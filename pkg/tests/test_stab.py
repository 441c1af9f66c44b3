import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import admissible_params, rel
from vertexlab.checks import AUTOMORPHY_TOL, envelope_battery, sample_points
from vertexlab.errors import NearDiagonal, Resonance
from vertexlab.model import Chamber, FixedPoint, fixed_points
from vertexlab.presets import random_params
from vertexlab.qseries import theta
from vertexlab.stab import (StabSpec, diagonal_regularity, f_building_block, fixed_point_coords, mirror_mu,
                            mirror_params, stab_envelope, stab_restrict, stab_terms, weyl_vector, wheel_check,
                            z_quasi_periodicity_factor)


class TestWeylVector:
    @pytest.mark.parametrize("k", range(1, 7))
    def test_shape(self, k):
        v = weyl_vector(k)
        assert sum(v) == 0 and v[0] == k - 1
        assert all(a - b == 2 for a, b in zip(v, v[1:]))


class TestBuildingBlock:
    def test_n1_is_single_theta_ratio(self, rng):
        p = random_params(1, 1, rng)
        x, z = 0.7 + 0.2j, 0.4 - 0.1j
        c = p.c_m(1)
        expected = theta(c * x / (z * p.a[0]), p) / theta(c / z, p)
        assert rel(f_building_block(1, x, z, p), expected) < 1e-14

    def test_c_m_uses_square_root(self, p24):
        for m in range(1, 5):
            assert rel(p24.c_m(m), (-1) ** 4 * p24.hbar_sqrt ** (2 * m - 4)) < 1e-15

    def test_vanishes_at_earlier_node(self, p24):
        for m in range(2, 5):
            for i in range(1, m):
                assert f_building_block(m, p24.a[i - 1], p24.z, p24) == 0

    @given(admissible_params(1, 3), st.integers(1, 3))
    def test_z_shift(self, p, m):
        x = 0.9 * cmath.exp(0.4j)
        ratio = f_building_block(m, x, p.q * p.z, p) / f_building_block(m, x, p.z, p)
        assert rel(ratio, x / p.a[m - 1]) < 1e-10

    def test_resonant_z(self, p12):
        with pytest.raises(Resonance):
            f_building_block(1, 0.5, p12.c_m(1) * p12.q, p12)

    def test_m_out_of_range(self, p12):
        with pytest.raises(ValueError):
            f_building_block(3, 0.5, p12.z, p12)


class TestEnvelope:
    def test_k1_is_building_block(self, p12):
        x = 0.8 + 0.3j
        for mu in (1, 2):
            s = StabSpec(FixedPoint((mu,)), Chamber.PLUS, p12)
            assert stab_envelope(s, [x]) == f_building_block(mu, x, p12.z, p12)

    def test_k2_summands_written_out(self, p23):
        # tau = identity: slot 1 (2rho = 1) takes mu_2, slot 2 (2rho = -1) takes mu_1
        p = p23
        s = StabSpec(FixedPoint((1, 3)), Chamber.PLUS, p)
        x1, x2 = 0.9 * cmath.exp(0.3j), 1.1 * cmath.exp(2.1j)
        r12 = theta(p.hbar * x1 / x2, p) / theta(x1 / x2, p)
        r21 = theta(p.hbar * x2 / x1, p) / theta(x2 / x1, p)
        f = lambda m, x, e: f_building_block(m, x, p.z * p.hbar ** e, p)
        ident = r12 * f(3, x1, 1) * f(1, x2, -1)
        swap = r21 * f(1, x1, -1) * f(3, x2, 1)
        terms = stab_terms(s, [x1, x2])
        assert rel(terms[0], ident) < 1e-13 and rel(terms[1], swap) < 1e-13

    def test_array_broadcast(self, p23, rng):
        s = StabSpec(FixedPoint((1, 2)), Chamber.PLUS, p23)
        pts = sample_points(p23, 5, rng)
        arr = stab_envelope(s, [np.array([x[0] for x in pts]), np.array([x[1] for x in pts])])
        for v, x in zip(arr, pts):
            assert rel(v, stab_envelope(s, x)) < 1e-13

    def test_near_diagonal_raises(self, p23):
        s = StabSpec(FixedPoint((1, 2)), Chamber.PLUS, p23)
        with pytest.raises(NearDiagonal):
            stab_envelope(s, [0.5, 0.5 * p23.q * (1 + 1e-10)])

    def test_wrong_length(self, p23):
        with pytest.raises(ValueError):
            stab_envelope(StabSpec(FixedPoint((1, 2)), Chamber.PLUS, p23), [0.5])

    def test_invalid_mu(self, p23):
        with pytest.raises(ValueError):
            StabSpec(FixedPoint((1, 4)), Chamber.PLUS, p23)


@pytest.mark.parametrize("chamber", [Chamber.PLUS, Chamber.MINUS])
@pytest.mark.parametrize("k,n", [(1, 2), (2, 3), (2, 4), (3, 4)])
def test_battery(k, n, chamber):
    p = random_params(k, n, np.random.default_rng(100 * k + n))
    for mu in fixed_points(k, n):
        for res in envelope_battery(StabSpec(mu, chamber, p), samples=3, seed=1):
            assert res.passed, (mu, res)


class TestWheel:
    def test_k2_n2(self, rng):
        # (1, 2) is the only fixed point of T*Gr(2, 2)
        p = random_params(2, 2, rng)
        for chamber in (Chamber.PLUS, Chamber.MINUS):
            assert wheel_check(StabSpec(FixedPoint((1, 2)), chamber, p), 1).relative < 1e-9

    def test_equal_pair_is_not_wheel(self, p23):
        s = StabSpec(FixedPoint((1, 2)), Chamber.PLUS, p23)
        a = p23.a[0]
        assert abs(stab_envelope(s, [a, a * (1 + 1e-3)])) > 1e-6

    def test_k3_slots_1_3(self, rng):
        p = random_params(3, 4, rng)
        for mu in fixed_points(3, 4):
            s = StabSpec(mu, Chamber.PLUS, p)
            for l in range(1, 5):
                assert wheel_check(s, l, samples=4, slots=(1, 3)).relative < 1e-9

    def test_scale_is_nonzero(self, p24):
        s = StabSpec(FixedPoint((2, 4)), Chamber.PLUS, p24)
        assert wheel_check(s, 2).scale > 0

    def test_k1_rejected(self, p12):
        with pytest.raises(ValueError):
            wheel_check(StabSpec(FixedPoint((1,)), Chamber.PLUS, p12), 1)


class TestDiagonalRegularity:
    def test_differences_shrink_tenfold(self, p23, rng):
        s = StabSpec(FixedPoint((1, 3)), Chamber.PLUS, p23)
        for x in sample_points(p23, 3, rng):
            ratios = diagonal_regularity(s, x)["ratios"]
            assert all(5 <= r <= 20 for r in ratios)


class TestRestriction:
    def test_k1_off_diagonal_value(self, p12):
        s = StabSpec(FixedPoint((1,)), Chamber.PLUS, p12)
        c = p12.c_m(1)
        # the i > m product contributes theta(hbar a_2 / a_2) = theta(hbar)
        expected = theta(c * p12.a[1] / (p12.z * p12.a[0]), p12) / theta(c / p12.z, p12) * theta(p12.hbar, p12)
        assert rel(stab_restrict(s, FixedPoint((2,))), expected) < 1e-14
        assert expected != 0

    def test_k1_forced_zero(self, p12):
        assert stab_restrict(StabSpec(FixedPoint((2,)), Chamber.PLUS, p12), FixedPoint((1,))) == 0

    @pytest.mark.parametrize("chamber", [Chamber.PLUS, Chamber.MINUS])
    def test_diagonal_nonzero(self, chamber, rng):
        for _ in range(20):
            p = random_params(2, 3, rng)
            for mu in fixed_points(2, 3):
                assert abs(stab_restrict(StabSpec(mu, chamber, p), mu)) > 1e-12

    def test_minus_chamber_coordinates(self, p24):
        nu = FixedPoint((1, 3))
        coords = fixed_point_coords(nu, Chamber.MINUS, p24)
        assert coords == pytest.approx([p24.a[0] / p24.hbar, p24.a[2] / p24.hbar], rel=1e-15)


class TestZFactor:
    def test_k2_n4_fifty_points(self, p24, rng):
        for mu in fixed_points(2, 4):
            s = StabSpec(mu, Chamber.PLUS, p24)
            shifted = s.with_params(p24.with_z(p24.q * p24.z))
            factor = z_quasi_periodicity_factor(s)
            for x in sample_points(p24, 50 // len(fixed_points(2, 4)) + 1, rng):
                ratio = stab_envelope(shifted, x) / stab_envelope(s, x)
                assert rel(ratio, factor.evaluate(p24, x)) < AUTOMORPHY_TOL

    def test_k1_matches_block(self, p12):
        s = StabSpec(FixedPoint((2,)), Chamber.PLUS, p12)
        x = 0.7 + 0.6j
        assert rel(z_quasi_periodicity_factor(s).evaluate(p12, [x]), x / p12.a[1]) < 1e-15

    def test_at_fixed_point(self, p24):
        for chamber in (Chamber.PLUS, Chamber.MINUS):
            for mu, nu in itertools.product(fixed_points(2, 4), repeat=2):
                s = StabSpec(mu, chamber, p24)
                val = z_quasi_periodicity_factor(s).evaluate(p24, fixed_point_coords(nu, chamber, p24))
                expected = np.prod([p24.a[j - 1] for j in nu.mu]) / np.prod([p24.a[j - 1] for j in mu.mu])
                assert rel(val, expected) < 1e-14


class TestMinusChamber:
    def test_mirror_is_involution(self, p24):
        back = mirror_params(mirror_params(p24))
        assert all(rel(a, b) < 1e-15 for a, b in zip(back.a, p24.a))
        assert rel(back.z, p24.z) < 1e-14
        assert mirror_mu(mirror_mu(FixedPoint((1, 3)), 4), 4) == FixedPoint((1, 3))

    def test_restrictions_are_upper_triangular(self, p24):
        basis = fixed_points(2, 4)
        for (i, nu), (j, mu) in itertools.product(enumerate(basis), repeat=2):
            if i > j:
                assert stab_restrict(StabSpec(mu, Chamber.MINUS, p24), nu) == 0

    def test_plus_restrictions_are_lower_triangular(self, p24):
        basis = fixed_points(2, 4)
        for (i, nu), (j, mu) in itertools.product(enumerate(basis), repeat=2):
            if i < j:
                assert stab_restrict(StabSpec(mu, Chamber.PLUS, p24), nu) == 0

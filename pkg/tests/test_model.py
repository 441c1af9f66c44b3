import cmath
import itertools
import json
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import admissible_params
from vertexlab.errors import DomainError, Resonance, ResonantParams
from vertexlab.model import (Chamber, FixedPoint, Monomial, Params, VirtualCharacter, automorphy_exponents,
                             c_sigma, c_sigma_general, complex_from_json, fixed_points, in_q_lattice,
                             polarization_form, sigma_dual, tangent_blocks, tangent_character,
                             validate_params)


def make(q, hbar, a, z, k=1):
    return Params(q, hbar, cmath.sqrt(hbar), tuple(a), z, k, len(a))


class TestValidateParams:
    def test_accepts_textbook_point(self):
        p = make(0.05, 0.2, (0.5, 0.7), 0.011)
        assert validate_params(p) is p

    def test_z_equal_hbar_q_is_resonant_for_n2(self):
        # c_2 = hbar for n = 2, so z = hbar * q lies on the resonance locus
        with pytest.raises(ResonantParams, match="c_2"):
            validate_params(make(0.05, 0.2, (0.5, 0.7), 0.01))

    def test_rejects_q_above_hbar(self):
        with pytest.raises(DomainError, match=r"\|q\| < \|hbar\|"):
            validate_params(make(0.3, 0.2, (0.5, 0.7), 0.01))

    def test_rejects_a_outside_unit_disc(self):
        with pytest.raises(DomainError, match=r"\|a_2\| < 1"):
            validate_params(make(0.05, 0.2, (0.5, 1.2), 0.01))

    def test_resonant_z_equal_c1(self):
        # n = 2: c_1 = (-1)^2 hbar^{1 - 1} = 1
        with pytest.raises(DomainError, match="resonance") as info:
            validate_params(make(0.05, 0.2, (0.5, 0.7), 1.0))
        assert isinstance(info.value, Resonance)

    def test_resonant_z_shifted_by_q(self):
        p = make(0.05, 0.2, (0.5, 0.7), 0.3)
        with pytest.raises(ResonantParams):
            validate_params(p.with_z(p.c_m(2) * p.q ** -3))

    @pytest.mark.parametrize("q,hbar,a", [
        (0.05, 0.2, (0.5, 0.5)),          # a_1/a_2 = 1
        (0.1, 0.5, (0.9, 0.45)),          # a_2/a_1 = hbar
        (0.4, 0.5, (0.9, 0.72)),          # a_2/a_1 = q/hbar
        (0.1, 0.5, (0.9, 0.9 * 0.1)),     # ratio q, also breaks |hbar| < |a_2|
    ])
    def test_nongeneric_a_ratio(self, q, hbar, a):
        with pytest.raises(DomainError):
            validate_params(make(q, hbar, a, 0.3))

    def test_square_root_checked(self):
        p = Params(0.05, 0.2, 0.5, (0.5, 0.7), 0.3, 1, 2)
        with pytest.raises(DomainError, match="hbar_sqrt"):
            validate_params(p)

    @given(admissible_params(k=2, n=3))
    def test_random_admissible_round_trip(self, p):
        back = Params.from_json(json.loads(json.dumps(p.to_json())))
        assert back == p


def test_complex_json_rejects_non_finite():
    with pytest.raises(DomainError):
        complex_from_json([float("nan"), 0.0])
    with pytest.raises(DomainError):
        complex_from_json([1.0, 2.0, 3.0])
    assert complex_from_json(0.5) == 0.5


def test_in_q_lattice():
    q = 0.3 * cmath.exp(0.4j)
    assert in_q_lattice(q ** 5 * 0.7, q) is None
    assert in_q_lattice(q ** -7, q) == -7
    assert in_q_lattice(q ** 70, q) is None  # outside the default window


class TestFixedPoint:
    def test_parse_and_str(self):
        assert str(FixedPoint.parse("1, 3")) == "1,3"

    @pytest.mark.parametrize("mu", [(2, 1), (1, 1), (0, 2)])
    def test_rejects_invalid(self, mu):
        with pytest.raises(ValueError):
            FixedPoint(mu).check(2, 3)

    def test_enumeration_is_lexicographic(self):
        pts = fixed_points(2, 4)
        assert [p.mu for p in pts] == sorted(itertools.combinations(range(1, 5), 2))

    def test_chamber_parse(self):
        assert Chamber.parse("+") is Chamber.PLUS
        assert Chamber.parse("-") is Chamber.MINUS
        with pytest.raises(ValueError):
            Chamber.parse("0")


class TestTangentCharacter:
    def test_k1_n1_four_monomials(self):
        blocks = tangent_blocks(1, 1)
        assert sum(len(b) for b in blocks.values()) == 4
        chi = tangent_character(1, 1)
        expected = {
            Monomial(0, 0, (-1,), (1,)): 1,      # x/a
            Monomial(0, -2, (1,), (-1,)): 1,     # a/(hbar x)
            Monomial(0, 0, (0,), (0,)): -1,      # -1
            Monomial(0, 2, (0,), (0,)): 1,       # hbar
        }
        assert dict(chi.terms) == expected

    def test_k2_n1_raw_block_sizes(self):
        blocks = tangent_blocks(2, 1)
        assert [len(blocks[b]) for b in ("hom_wv", "hom_vw", "gauge", "pfield")] == [2, 2, 4, 4]
        assert all(m == -1 for _, m in blocks["gauge"])

    @pytest.mark.parametrize("k,n", [(1, 1), (1, 3), (2, 3), (3, 5)])
    def test_rank_is_2kn(self, k, n):
        assert tangent_character(k, n).rank() == 2 * k * n

    @pytest.mark.parametrize("k,n", [(1, 2), (2, 4)])
    def test_tx_block_self_dual_up_to_hbar(self, k, n):
        blocks = tangent_blocks(k, n)
        tx = VirtualCharacter(tuple(blocks["hom_wv"] + blocks["hom_vw"]))
        hinv = Monomial(0, -2, (0,) * n, (0,) * k)
        assert tx.dual().times(hinv).as_counter() == tx.as_counter()


class TestVirtualCharacter:
    def test_cancellation_and_sorting(self):
        m = Monomial(1, 0, (1, 0), (0,))
        v = VirtualCharacter(((m, 2), (m, -2)))
        assert v.terms == ()
        w = VirtualCharacter(((m, 1),)) + VirtualCharacter(((m.inverse(), 3),))
        assert -(-w) == w
        assert w.rank() == 4


class TestPolarization:
    def test_examples(self):
        assert polarization_form((0,), (0, 0)) == 0
        assert polarization_form((1, 1), (1, 0)) == 2

    @pytest.mark.parametrize("k,n,l", [(1, 2, 1), (2, 3, 2), (3, 5, 1)])
    def test_elementary_cocharacter_norm_is_n(self, k, n, l):
        xi = tuple(1 if i == l - 1 else 0 for i in range(k))
        assert polarization_form(xi, (0,) * n) == n
        assert automorphy_exponents(xi, k, n) == (n, n)

    @given(st.lists(st.integers(-4, 4), min_size=1, max_size=4),
           st.lists(st.integers(-4, 4), min_size=1, max_size=4), st.randoms())
    def test_symmetric_and_nonnegative(self, xi, alpha, r):
        value = polarization_form(xi, alpha)
        assert value >= 0
        xs, al = list(xi), list(alpha)
        r.shuffle(xs)
        r.shuffle(al)
        assert polarization_form(xs, al) == value


class TestSigma:
    def test_sigma_dual_k1_n2(self):
        p = make(0.05, 0.2, (0.5, 0.7), 0.3)
        m = sigma_dual(1, p)
        assert m == Monomial(0, 0, (-1, -1), (2,))
        x = [0.9 + 0.2j]
        assert abs(m.evaluate(p, x) - x[0] ** 2 / (0.5 * 0.7)) < 1e-15
        assert abs(m.evaluate(p, [0.5]) - 0.5 / 0.7) < 1e-15

    @given(admissible_params(k=1, n=2))
    def test_c_sigma_multiplies_out(self, p):
        x = [0.8 * cmath.exp(0.3j)]
        c = c_sigma(1, p, x)
        check = c * p.q ** (p.n / 2) * (p.hbar_sqrt * cmath.sqrt(p.q)) ** p.n * sigma_dual(1, p).evaluate(p, x)
        assert abs(check - 1) < 1e-10

    def test_c_sigma_real_for_real_inputs(self):
        p = make(0.05, 0.2, (0.5, 0.7), 0.3)
        assert abs(c_sigma(1, p, [0.8]).imag) < 1e-15

    def test_general_composes_two_shifts(self):
        p = make(0.05 * cmath.exp(0.2j), 0.2 * cmath.exp(1j), (0.5, 0.7j, -0.6), 0.3, k=2)
        x = [0.9 + 0.1j, -0.3 + 0.8j]
        shifted = [p.q * x[0], x[1]]
        two_step = c_sigma(1, p, x) * c_sigma(1, p, shifted)
        assert abs(c_sigma_general((2, 0), p, x) / two_step - 1) < 1e-12


def test_monomial_evaluate_arrays():
    p = make(0.05, 0.2, (0.5, 0.7), 0.3, k=2)
    m = Monomial(1, 1, (1, -1), (2, -1))
    import numpy as np
    xs = [np.array([1.0, 2.0]), np.array([0.5, 0.25])]
    expected = 0.05 * cmath.sqrt(0.2) * 0.5 / 0.7 * xs[0] ** 2 / xs[1]
    np.testing.assert_allclose(m.evaluate(p, xs), expected, rtol=1e-14)
    assert (m * m.inverse()) == Monomial.one(2, 2)
    assert Counter(dict(VirtualCharacter(((m, 1),)).terms)) == Counter({m: 1})

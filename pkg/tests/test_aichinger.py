import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leibniz3 import counterexample as cx
from leibniz3.aichinger import (
    EXP_GUARD,
    SymbolG,
    box_samples,
    conjugate_jet,
    conjugate_P,
    cube_residual,
    family_symbol,
    fit_quadratic,
    fit_symbol,
    induced_symbol,
    recover_coefficients,
)
from leibniz3.config import DEFAULT_OPERATORS, build_operator
from leibniz3.corpus import constant, lookup
from leibniz3.errors import DomainError, NotInFamily, RankDeficient
from leibniz3.operators import Characterized, Composition, LogPolynomial, SecondDerivativeOnly

CHARACTERIZED = [build_operator(n, s) for n, s in DEFAULT_OPERATORS
                 if s["family"] == "characterized"]


class TestConjugation:
    def test_log_term_on_constant(self):
        D = Characterized(c0=2.5)
        for t in (-1.5, 0.3, 4.0):
            assert conjugate_P(D, constant("t", t), 0.1) == pytest.approx(2.5 * t, rel=1e-14)

    @pytest.mark.parametrize("D", CHARACTERIZED + [SecondDerivativeOnly()], ids=lambda d: d.name)
    def test_zero_function(self, D):
        assert conjugate_P(D, constant("zero", 0.0), 0.7) == 0.0

    def test_second_derivative_of_exp(self):
        for x in (-1.0, 0.0, 2.0):
            assert conjugate_P(SecondDerivativeOnly(), lookup("identity"), x) == \
                pytest.approx(1.0, rel=1e-14)

    def test_guard(self):
        with pytest.raises(DomainError):
            conjugate_jet(Characterized(c0=1.0), 0.0, (EXP_GUARD + 1, 0.0, 0.0))

    def test_family_symbol_closed_form(self):
        D = Characterized(1.0, 2.0, 3.0, 4.0)
        G = induced_symbol(D)
        for v in box_samples(3, 20, 1):
            assert G(0.0, v) == pytest.approx(family_symbol(1, 2, 3, 4, v), rel=1e-12, abs=1e-13)


class TestCube:
    def test_square_passes(self):
        r = cube_residual(lambda x, v: v[0] ** 2, 0.0, (1,), (1,), (1,))
        assert r.value == 0.0

    def test_cube_fails(self):
        assert cube_residual(lambda x, v: v[0] ** 3, 0.0, (1,), (1,), (1,)).value == 6.0

    def test_origin_gives_G0(self):
        assert cube_residual(lambda x, v: 5.0 + v[0], 0.0, (0,), (0,), (0,)).value == 5.0

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            cube_residual(lambda x, v: 0.0, 0.0, (0, 1), (0,), (0,))

    @pytest.mark.parametrize("D", CHARACTERIZED, ids=lambda d: d.name)
    def test_induced_symbol(self, D):
        G = induced_symbol(D)
        rng = random.Random(17)
        assert G(0.3, (0.0,) * G.n) == 0.0
        for _ in range(64):
            x = rng.uniform(-2, 2)
            vs = [tuple(rng.uniform(-1, 1) for _ in range(G.n)) for _ in range(3)]
            assert cube_residual(G, x, *vs).ok(1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=9, max_size=9),
           st.lists(st.floats(-1, 1), min_size=9, max_size=9))
    def test_homogeneous_quadratic(self, q, vs):
        Q = np.array(q).reshape(3, 3)

        def G(x, v):
            v = np.asarray(v)
            return float(v @ Q @ v)

        r = cube_residual(G, 0.0, vs[0:3], vs[3:6], vs[6:9])
        assert abs(r.value) <= 1e-12 * max(1.0, r.scale)


class TestFit:
    def test_round_trip(self):
        pts = box_samples(2, 30, 4)
        m = fit_quadratic([(v, 2 * v[0] + 3 * v[0] * v[1]) for v in pts], 2)
        assert m.constant == pytest.approx(0, abs=1e-12)
        assert m.linear == pytest.approx((2, 0), abs=1e-12)
        assert m.quadratic[1][0] == pytest.approx(3, abs=1e-12)
        assert m.quadratic[0][0] == pytest.approx(0, abs=1e-12)
        assert m.quadratic[1][1] == pytest.approx(0, abs=1e-12)
        assert m.quadratic[0][1] == 0.0
        assert m.residual <= 1e-10

    def test_norm_cubed_is_not_quadratic(self):
        pts = box_samples(2, 50, 0)
        m = fit_quadratic([(v, math.hypot(*v) ** 3) for v in pts], 2)
        assert m.residual > 0.01

    def test_zero_samples(self):
        m = fit_quadratic([(v, 0.0) for v in box_samples(3, 20, 2)], 3)
        assert m.residual == 0.0
        assert m.constant == 0.0 and all(c == 0.0 for c in m.linear)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            fit_quadratic([((0.1, 0.2), 1.0)] * 3, 2)
        with pytest.raises(RankDeficient):
            fit_quadratic([((t, t), t) for t in np.linspace(-1, 1, 20)], 2)

    def test_model_evaluates_like_samples(self):
        G = SymbolG(2, lambda x, v: 1 - v[0] + 0.5 * v[1] ** 2 + v[0] * v[1])
        m = fit_symbol(G, 0.0, 30, 5)
        for v in box_samples(2, 10, 6):
            assert m(v) == pytest.approx(G(0.0, v), abs=1e-12)

    @pytest.mark.parametrize("D", CHARACTERIZED, ids=lambda d: d.name)
    def test_induced_symbol_is_quadratic(self, D):
        assert fit_symbol(induced_symbol(D), 0.9, 50, 3).residual <= 1e-8


class TestRecovery:
    def test_constant_1234(self):
        rec = recover_coefficients(Characterized(1.0, 2.0, 3.0, 4.0), 0.25)
        assert rec.coefficients == pytest.approx((1, 2, 3, 4), abs=1e-8)

    def test_second_derivative(self):
        rec = recover_coefficients(SecondDerivativeOnly(5.0), -1.0)
        assert rec.coefficients == pytest.approx((0, 0, 5, 0), abs=1e-8)

    @pytest.mark.parametrize("D", CHARACTERIZED[-8:], ids=lambda d: d.name)
    def test_round_trip_16_points(self, D):
        rng = random.Random(55)
        for _ in range(16):
            x = rng.uniform(-3, 3)
            want = tuple(c(x) for c in D.coefficients)
            got = recover_coefficients(D, x).coefficients
            for g, w in zip(got, want):
                assert abs(g - w) <= 1e-8 * max(1.0, abs(w))

    def test_counterexample_rejected(self):
        D = Composition(cx.build_d(cx.PsiSolution()))
        with pytest.raises(NotInFamily):
            recover_coefficients(D, 0.0)

    def test_cross_term_rejected(self):
        D = LogPolynomial((0.0, 0.0, 0.0), ((0, 1.0, 0), (0, 0, 0), (0, 0, 0)))
        with pytest.raises(NotInFamily):
            recover_coefficients(D, 0.0)

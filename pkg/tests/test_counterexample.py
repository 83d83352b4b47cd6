import math
import threading

import pytest
from hypothesis import given, settings, strategies as st

from leibniz3 import counterexample as cx
from leibniz3.corpus import DomainSet, constant, lookup, sample_points
from leibniz3.errors import DomainError, PreconditionError

SOL = cx.PsiSolution()
D = cx.build_d(SOL)


class TestPsi:
    def test_seed_interval(self):
        assert SOL(0.5) == 0.125

    def test_one_step(self):
        u = cx.S3 + 0.1
        want = 3 * cx.cubic_seed(cx.S2 + 0.1) - 3 * cx.cubic_seed(0.1)
        assert SOL(u) == pytest.approx(want, rel=1e-14)

    def test_recurrence_32_points(self):
        for u in cx.sample_u(32, 1, hi=4.0):
            r = SOL.recurrence_residual(u)
            assert abs(r.value) <= 1e-10 * max(1.0, r.scale)

    def test_recurrence_128_points(self):
        assert cx.recurrence_sweep(SOL, cx.sample_u(128, 2)) <= 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            SOL(-0.1)
        with pytest.raises(DomainError):
            SOL(cx.U_CAP + 1)
        with pytest.raises(DomainError):
            SOL.phi(1.0)

    def test_memo_is_consistent(self):
        fresh = cx.PsiSolution()
        us = cx.sample_u(50, 3)
        first = [fresh(u) for u in us]
        assert [fresh(u) for u in us] == first
        assert [cx.PsiSolution()(u) for u in us] == first

    def test_threaded_access(self):
        sol = cx.PsiSolution()
        us = cx.sample_u(200, 4)
        want = [cx.PsiSolution()(u) for u in us]
        out = {}

        def work(i):
            out[i] = [sol(u) for u in us]

        threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(v == want for v in out.values())

    def test_quadratic_phi_seed_is_exact(self):
        sol = cx.PsiSolution(cx.phi_quadratic_seed, "e^2u")
        for t in (1.5, 4.0, 30.0, 200.0):
            assert sol.phi(t) == pytest.approx(t * t, rel=1e-10)


class TestD:
    def test_cube_relation(self):
        for x in sample_points(DomainSet.interval(math.e, 20), 16, 5):
            assert cx.cube_relation_residual(D, x).ok(1e-9)

    def test_domain_edge(self):
        with pytest.raises(DomainError):
            D(math.e)
        with pytest.raises(DomainError):
            D(2.0)

    def test_unwinds_to_phi(self):
        for x in sample_points(DomainSet.interval(math.e, 50), 16, 6):
            assert D(x) / x == pytest.approx(SOL.phi(math.log(x)), rel=1e-14)

    def test_powers_on_constant(self):
        assert cx.residual_powers_composition(D, constant("four", 4.0), 0.0).ok(1e-9)

    def test_powers_on_three_plus_x2(self):
        f = lookup("three_plus_x2")
        for x in sample_points(DomainSet.interval(-2, 2), 16, 7):
            assert cx.residual_powers_composition(D, f, x).ok(1e-9)

    def test_powers_needs_range_above_e(self):
        with pytest.raises(DomainError):
            cx.residual_powers_composition(D, lookup("square"), 1.0)

    def test_not_additive(self):
        assert abs(cx.nonlinearity_witness(D, 4.0, 5.0)) > 1e-6


class TestViolation:
    def test_found_with_default_seed(self):
        v = cx.find_violation_triple(D, seed=0, trials=1000, threshold=1e-6)
        assert abs(v.residual) > 1e-6
        assert min(v.x, v.y, v.z) > math.e and max(v.x, v.y, v.z) < 20

    def test_residual_is_xyz_times_phi_cube(self):
        v = cx.find_violation_triple(D)
        phi = cx.cube_phi(SOL, math.log(v.x), math.log(v.y), math.log(v.z))
        assert phi.value != 0.0
        assert v.residual == pytest.approx(v.x * v.y * v.z * phi.value, rel=1e-9)

    def test_infinite_threshold(self):
        with pytest.raises(PreconditionError, match="no violation found"):
            cx.find_violation_triple(D, threshold=math.inf)

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            cx.find_violation_triple(D, trials=0)
        with pytest.raises(ValueError):
            cx.find_violation_triple(D, threshold=0.0)

    def test_quadratic_phi_has_no_violation(self):
        dq = cx.build_d(cx.PsiSolution(cx.phi_quadratic_seed, "e^2u"))
        with pytest.raises(PreconditionError):
            cx.find_violation_triple(dq, trials=1000, threshold=1e-6)

    def test_u_squared_seed_still_violates(self):
        # u^2 in log coordinates is ln(t)^2 in t, not a quadratic in t
        d2 = cx.build_d(cx.PsiSolution(lambda u: u * u, "u^2"))
        v = cx.find_violation_triple(d2, trials=1000, threshold=1e-6)
        assert abs(v.residual) > 1e-6


class TestPhi:
    def test_cube_vanishes_for_quadratic_phi(self):
        sol = cx.PsiSolution(cx.phi_quadratic_seed, "e^2u")
        r = cx.cube_phi(sol, 1.3, 2.2, 1.7)
        assert abs(r.value) <= 1e-10 * max(1.0, r.scale)

    def test_cube_domain(self):
        with pytest.raises(DomainError):
            cx.cube_phi(SOL, 0.5, 2.0, 2.0)

    def test_continuity_in_seed(self):
        base = cx.cube_phi(SOL, 1.5, 1.5, 1.5).value
        diffs = []
        for eps in (1e-4, 1e-6):
            pert = cx.PsiSolution(lambda u, e=eps: u**3 + e * u, "perturbed")
            diffs.append(abs(cx.cube_phi(pert, 1.5, 1.5, 1.5).value - base))
        assert diffs[1] < diffs[0] < 1e-1
        assert diffs[1] < 1e-3

    def test_phi_is_not_quadratic(self):
        assert cx.phi_quadratic_fit(SOL).residual > 0.01

    def test_quadratic_phi_fits(self):
        sol = cx.PsiSolution(cx.phi_quadratic_seed, "e^2u")
        assert cx.phi_quadratic_fit(sol).residual < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.0, max_value=8.0))
def test_recurrence_property(u):
    r = SOL.recurrence_residual(u)
    assert abs(r.value) <= 1e-10 * max(1.0, r.scale)

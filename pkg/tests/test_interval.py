import cmath
import math

import numpy as np
import pytest

from blaschke_transfer import (
    BlaschkeParam,
    DualFunctional,
    branch_closed_form,
    branch_matching_residuals,
    chebyshev_lobatto,
    collocation_matrix,
    dual_functional_check,
    intertwine_check,
    interval_branch,
    interval_spectrum_predicted,
    make_context,
    projection,
    tau_eval,
    transfer_interval_apply,
    T_deriv,
    T_deriv_at_fixed_point,
    T_eval,
)
from blaschke_transfer.interval import _branch_data
from conftest import MAYER_LAMBDA, pairing_error


def circle_distance(a, b, period=2.0):
    """Distance on the interval with endpoints identified."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % period
    return np.minimum(d, period - d)


class TestContext:
    def test_projection_anchors_fixed_point(self, grid_param):
        ctx = make_context(grid_param)
        assert abs(projection(ctx, -1.0) - ctx.z0) < 1e-14
        assert abs(T_eval(ctx, -1.0) - (-1.0)) < 1e-12

    def test_real_lambda_branch_point_is_zero(self):
        ctx = make_context(BlaschkeParam(0.4))
        assert abs(ctx.branch_point) < 1e-14

    def test_only_standard_interval(self):
        with pytest.raises(ValueError):
            make_context(BlaschkeParam(0.4), x0=0.0, x1=1.0)


class TestIntervalMap:
    def test_doubling_reduction(self):
        ctx = make_context(BlaschkeParam(0))
        x = np.linspace(-1, 1, 201)[:-1]
        expected = np.mod(2 * x + 1 + 1, 2) - 1
        assert np.max(circle_distance(T_eval(ctx, x), expected)) < 1e-12

    def test_projection_identity(self, grid_param):
        ctx = make_context(grid_param)
        x = np.linspace(-1, 1, 257)
        lhs = projection(ctx, T_eval(ctx, x))
        rhs = tau_eval(grid_param, projection(ctx, x))
        assert np.max(np.abs(lhs - rhs)) < 1e-11

    def test_lift_reduction_for_real_lambda(self):
        from blaschke_transfer import lift_F

        p = BlaschkeParam(0.4)
        ctx = make_context(p)
        x = np.linspace(-1, 1, 101)[:-1]
        reduced = np.mod(lift_F(p, x) + 1, 2) - 1
        assert np.max(circle_distance(T_eval(ctx, x), reduced)) < 1e-12

    def test_out_of_domain_rejected(self):
        ctx = make_context(BlaschkeParam(0.4))
        with pytest.raises(ValueError):
            T_eval(ctx, 1.5)

    def test_derivative_via_finite_differences(self, grid_param):
        ctx = make_context(grid_param)
        x = np.linspace(-0.95, 0.93, 41)
        h = 1e-6
        fd = (T_eval(ctx, x + h) - T_eval(ctx, x - h)) / (2 * h)
        interior = np.abs(np.diff(T_eval(ctx, x))) < 1.0  # skip the wrap
        ok = np.abs(T_deriv(ctx, x) - fd)[:-1][interior] < 1e-6
        assert np.all(ok)

    def test_fixed_point_derivative_values(self):
        assert abs(T_deriv_at_fixed_point(make_context(BlaschkeParam(0.4))) - 10 / 7) < 1e-14
        assert abs(T_deriv_at_fixed_point(make_context(BlaschkeParam(0))) - 2.0) < 1e-14
        ctx = make_context(BlaschkeParam(MAYER_LAMBDA))
        assert abs(T_deriv_at_fixed_point(ctx) - 15 / 7) < 1e-13

    def test_fixed_point_derivative_one_sided_fd(self, grid_param):
        ctx = make_context(grid_param)
        h = 1e-7
        fd = (T_eval(ctx, -1.0 + h) - T_eval(ctx, -1.0)) / h
        assert abs(fd - T_deriv_at_fixed_point(ctx)) < 1e-5


class TestBranches:
    def test_real_lambda_first_branch_endpoints(self):
        ctx = make_context(BlaschkeParam(0.4))
        assert abs(interval_branch(ctx, 1, -1.0)[0] - (-1.0)) < 1e-14
        assert abs(interval_branch(ctx, 1, 1.0)[0] - 0.0) < 1e-14
        assert abs(interval_branch(ctx, 2, 1.0)[0] - 1.0) < 1e-14

    def test_doubling_branches_affine(self):
        ctx = make_context(BlaschkeParam(0))
        x = np.linspace(-1, 1, 65)
        phi1, dphi1, phi2, dphi2 = _branch_data(ctx, x)
        assert np.max(np.abs(phi1 - (x - 1) / 2)) < 1e-14
        assert np.max(np.abs(phi2 - (x + 1) / 2)) < 1e-14
        assert np.max(np.abs(dphi1 - 0.5)) < 1e-14
        assert np.max(np.abs(dphi2 - 0.5)) < 1e-14

    @pytest.mark.parametrize("lam", [-0.9, -0.7, -0.3, 0.4, 0.7, 0.9])
    def test_closed_form_cross_check(self, lam):
        ctx = make_context(BlaschkeParam(lam))
        x = np.linspace(-1, 1, 257)
        phi1, _, phi2, _ = _branch_data(ctx, x)
        assert np.max(np.abs(phi1 - branch_closed_form(lam, x))) < 1e-12
        assert np.max(np.abs(phi2 - (x - branch_closed_form(lam, x)))) < 1e-12

    def test_branch_inverts_map(self, grid_param):
        ctx = make_context(grid_param)
        x = np.linspace(-1, 1, 128)
        phi1, _, phi2, _ = _branch_data(ctx, x)
        assert np.max(circle_distance(T_eval(ctx, phi1), x)) < 1e-11
        assert np.max(circle_distance(T_eval(ctx, phi2), x)) < 1e-11

    def test_values_stay_in_interval(self, grid_param):
        ctx = make_context(grid_param)
        x = np.linspace(-1, 1, 512)
        phi1, dphi1, phi2, dphi2 = _branch_data(ctx, x)
        for arr in (phi1, phi2):
            assert np.all(arr >= -1 - 1e-12) and np.all(arr <= 1 + 1e-12)
        assert np.all(dphi1 > 0) and np.all(dphi2 > 0)

    def test_derivative_is_reciprocal_of_map_slope(self, grid_param):
        ctx = make_context(grid_param)
        for k in (1, 2):
            for x in (-0.73, 0.21, 0.94):
                value, deriv = interval_branch(ctx, k, x)
                assert abs(deriv - 1.0 / T_deriv(ctx, value)) < 1e-10

    def test_branch_label_validation(self):
        ctx = make_context(BlaschkeParam(0.4))
        with pytest.raises(ValueError):
            interval_branch(ctx, 3, 0.0)

    def test_matching_conditions(self, grid_param):
        ctx = make_context(grid_param)
        res = branch_matching_residuals(ctx)
        assert res["order0"] < 1e-10
        assert res["order1"] < 1e-10
        assert res["order2"] < 1e-6


class TestCollocation:
    def test_reproduces_operator_on_polynomials(self, grid_param):
        ctx = make_context(grid_param)
        disc = collocation_matrix(ctx, 24)
        rng = np.random.default_rng(2)
        coeffs = rng.normal(size=20)
        poly = np.polynomial.Polynomial(coeffs)
        direct = transfer_interval_apply(ctx, poly, disc.nodes)
        assert np.max(np.abs(disc.matrix @ poly(disc.nodes) - direct)) < 1e-10

    def test_constant_function_invariant(self, grid_param):
        # uniform density is preserved: sum of branch derivatives is 1
        ctx = make_context(grid_param)
        disc = collocation_matrix(ctx, 40)
        ones = np.ones(disc.m)
        assert np.max(np.abs(disc.matrix @ ones - ones)) < 1e-11

    def test_doubling_spectrum(self):
        ctx = make_context(BlaschkeParam(0))
        disc = collocation_matrix(ctx, 20)
        eigs = sorted(disc.eigenvalues(refine_top=8), key=abs, reverse=True)[:5]
        expected = [1.0, 0.5, 0.25, 0.125, 0.0625]
        assert pairing_error(expected, eigs) < 1e-9

    def test_real_lambda_split_spectrum(self):
        ctx = make_context(BlaschkeParam(0.4))
        disc = collocation_matrix(ctx, 40)
        eigs = sorted(disc.eigenvalues(refine_top=10), key=abs, reverse=True)[:8]
        pred = interval_spectrum_predicted(ctx, 8).expanded()[:8]
        expected = [1.0, 0.7, 0.49, 0.4, 0.4, 0.343, 0.2401, 0.7 ** 5]
        assert pairing_error(expected, pred) < 1e-12
        assert pairing_error(pred, eigs) < 1e-8

    @pytest.mark.parametrize(
        "lam,depth", [(-0.7, 8), (0.0, 5), (0.4, 8)]
    )
    def test_top_spectrum_matches_prediction(self, lam, depth):
        # for lam = 0 the fast geometric decay puts 2^-5 and below on the
        # non-normal conditioning floor, so the comparison stops at 2^-4
        ctx = make_context(BlaschkeParam(lam))
        disc = collocation_matrix(ctx, 40)
        eigs = sorted(disc.eigenvalues(refine_top=10), key=abs, reverse=True)[:depth]
        pred = interval_spectrum_predicted(ctx, 10).expanded()[:depth]
        assert pairing_error(pred, eigs) < 1e-8

    def test_real_lambda_top_eigenvalues_are_real(self):
        # ghost imaginary parts appear only in the deep, ill-conditioned
        # cluster (moduli below ~0.05 at M=40); the top of the spectrum
        # must be real to rounding
        for lam in (-0.7, 0.0, 0.4):
            ctx = make_context(BlaschkeParam(lam))
            eigs = sorted(
                collocation_matrix(ctx, 40).eigenvalues(refine_top=10),
                key=abs,
                reverse=True,
            )[:8]
            assert max(abs(v.imag) for v in eigs) < 1e-8

    def test_convergence_in_node_count(self):
        # strong form at a well-separated parameter
        ctx = make_context(BlaschkeParam(-0.7))
        tops = []
        for m in (40, 56):
            eigs = collocation_matrix(ctx, m).eigenvalues(refine_top=10)
            tops.append(sorted(eigs, key=abs, reverse=True)[:8])
        assert pairing_error(tops[0], tops[1]) < 1e-9

    def test_convergence_floor_documented(self):
        # at lam = 0.4 the eighth eigenvalue (0.7^5, adjacent to the double
        # 0.16) already feels the conditioning floor: agreement between
        # M = 40 and M = 56 saturates near 1e-7 rather than 1e-9
        ctx = make_context(BlaschkeParam(0.4))
        tops = []
        for m in (40, 56):
            eigs = collocation_matrix(ctx, m).eigenvalues(refine_top=10)
            tops.append(sorted(eigs, key=abs, reverse=True)[:8])
        assert pairing_error(tops[0], tops[1]) < 1e-6

    def test_minimum_node_count(self):
        with pytest.raises(ValueError):
            collocation_matrix(make_context(BlaschkeParam(0.4)), 4)

    def test_lobatto_nodes(self):
        nodes = chebyshev_lobatto(9)
        assert nodes[0] == -1.0 and nodes[-1] == 1.0
        assert np.all(np.diff(nodes) > 0)


class TestPredictedSpectrum:
    def test_real_case(self):
        ctx = make_context(BlaschkeParam(0.4))
        pred = interval_spectrum_predicted(ctx, 4)
        values = sorted(pred.expanded(), key=abs, reverse=True)
        expected = sorted(
            [1.0, 0.4, 0.4, 0.16, 0.16, 0.064, 0.064, 0.0256, 0.0256,
             0.7, 0.49, 0.343, 0.2401],
            reverse=True,
        )
        assert pairing_error(expected, values) < 1e-12

    def test_doubling_case(self):
        ctx = make_context(BlaschkeParam(0))
        values = sorted(interval_spectrum_predicted(ctx, 6).expanded(), key=abs, reverse=True)
        assert np.max(np.abs(np.array(values) - [1, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625])) < 1e-14

    def test_mayer_case_contains_small_nonreal_values(self):
        ctx = make_context(BlaschkeParam(MAYER_LAMBDA))
        pred = interval_spectrum_predicted(ctx, 3)
        values = pred.expanded()
        lam = complex(MAYER_LAMBDA)
        for target in (lam, np.conj(lam), lam ** 2, np.conj(lam) ** 2, lam ** 3):
            assert min(abs(v - target) for v in values) < 1e-14
        for n in (1, 2, 3):
            assert min(abs(v - (7 / 15) ** n) for v in values) < 1e-13
        small_nonreal = [v for v in values if abs(v.imag) > 1e-12 and abs(v) < 0.1]
        assert small_nonreal  # arbitrarily small modulus as the depth grows


class TestDualFunctionals:
    def test_linearity(self):
        ell = DualFunctional(1)
        f = np.array([0.0, 1.0, 2.0, -1.0])
        g = np.array([1.0, 0.0, 0.5, 0.25])
        lhs = ell.ell(2.0 * f[: len(g)] + 3.0 * g)
        assert abs(lhs - (2 * ell.ell(f[: len(g)]) + 3 * ell.ell(g))) < 1e-12

    def test_order0_identity_linear_function(self):
        ctx = make_context(BlaschkeParam(0.4))
        report = dual_functional_check(ctx, [0.0, 1.0], 0)
        assert report.passed
        assert abs(report.rhs - 0.7 * 2.0) < 1e-13

    def test_order0_constant_trivial(self):
        ctx = make_context(BlaschkeParam(0.4))
        report = dual_functional_check(ctx, [3.0], 0)
        assert report.passed
        assert abs(report.lhs) < 1e-12 and report.rhs == 0.0

    def test_order1_identity(self):
        ctx = make_context(BlaschkeParam(0.4))
        report = dual_functional_check(ctx, [-1.0, 0.0, 1.0], 1)
        assert report.passed
        assert abs(report.rhs - 0.49 * 4.0) < 1e-13

    def test_order1_requires_vanishing_endpoint_difference(self):
        ctx = make_context(BlaschkeParam(0.4))
        with pytest.raises(ValueError):
            dual_functional_check(ctx, [0.0, 1.0], 1)

    def test_identities_hold_for_complex_parameter(self, grid_param):
        ctx = make_context(grid_param)
        assert dual_functional_check(ctx, [0.0, 1.0], 0).passed
        assert dual_functional_check(ctx, [-1.0, 0.0, 1.0], 1).passed

    def test_degree_cap(self):
        ctx = make_context(BlaschkeParam(0.4))
        with pytest.raises(ValueError):
            dual_functional_check(ctx, np.ones(14), 0)


class TestIntertwining:
    def test_constant_circle_function(self):
        assert intertwine_check(make_context(BlaschkeParam(0.4)), [1.0]) < 1e-11

    def test_identity_circle_function(self):
        assert intertwine_check(make_context(BlaschkeParam(0.4)), [0.0, 0.0, 1.0]) < 1e-9

    def test_random_functions_at_figure_parameter(self):
        ctx = make_context(BlaschkeParam(0.4 * cmath.exp(1.318j)))
        rng = np.random.default_rng(9)
        for _ in range(5):
            f = rng.normal(size=9) + 1j * rng.normal(size=9)
            assert intertwine_check(ctx, f) < 1e-9

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosewave import dispersion as dsp
from bosewave.errors import (
    DomainError,
    NoInteriorMaximumError,  # noqa: F401  (re-exported path check)
    SingularDenominatorError,
)

# frozen oracle values (computed from the closed forms; see test bodies)
LAMBDA_H1_T0 = 0.7850017617921874 + 0.1273882491316916j      # sqrt(0.6+0.2j)
LAMBDA_1PLUS1J = 1.09868411346781 + 0.45508986056222733j     # sqrt(1+1j)


def roots_multiset_close(a, b, tol=1e-9):
    a = sorted(a, key=lambda u: (u.real, u.imag))
    b = sorted(b, key=lambda u: (u.real, u.imag))
    return len(a) == len(b) and all(
        abs(x - y) <= tol * max(1.0, abs(y)) for x, y in zip(a, b))


# ---------------------------------------------------------------- assembly

def test_assemble_n2_theta0_degree_collapses_to_one():
    poly = dsp.assemble_polynomial(1.0, 0.0, 2)
    assert poly.degree == 1
    # monic form of -(2+i)u + (1+i)
    root = -poly.coeffs[1] / poly.coeffs[0]
    assert root == pytest.approx((1 + 1j) / (2 + 1j), rel=1e-14)


def test_assemble_n2_pi4_matches_factorization():
    poly = dsp.assemble_polynomial(1.0, math.pi / 4, 2)
    assert poly.degree == 2
    # (u-1)(u-(1+i)) = u^2 - (2+i)u + (1+i)
    np.testing.assert_allclose(poly.coeffs,
                               [1.0, -(2 + 1j), (1 + 1j)], rtol=1e-14)


def test_assemble_hydrodynamic_root_near_one():
    poly = dsp.assemble_polynomial(1e6, 0.3, 2)
    assert poly.degree == 2
    roots = dsp.solve_roots(poly)
    assert min(abs(u - 1.0) for u in roots) < 1e-3


def test_assemble_quadratic_closed_form_any_theta():
    # full-degree case: coefficients proportional to
    # sin^2(2θ) u^2 - (2+ih)u + (1+ih)
    h_b, theta = 2.5, 0.4
    poly = dsp.assemble_polynomial(h_b, theta, 2)
    s = math.sin(2 * theta) ** 2
    want = np.array([s, -(2 + 1j * h_b), (1 + 1j * h_b)]) / s
    np.testing.assert_allclose(poly.coeffs, want, rtol=1e-13)


def test_assemble_rejects_bad_params():
    with pytest.raises(DomainError):
        dsp.assemble_polynomial(-1.0, 0.0, 2)
    with pytest.raises(DomainError):
        dsp.assemble_polynomial(1.0, 0.0, 1)


# ------------------------------------------------------------ root solving

def test_solve_factored_quadratic():
    poly = dsp.assemble_polynomial(1.0, math.pi / 4, 2)
    roots = sorted(dsp.solve_roots(poly), key=lambda u: abs(u))
    assert roots[0] == pytest.approx(1.0 + 0j, abs=1e-12)
    assert roots[1] == pytest.approx(1.0 + 1.0j, abs=1e-12)


def test_solve_linear_case():
    poly = dsp.assemble_polynomial(1.0, 0.0, 2)
    (root,) = dsp.solve_roots(poly)
    assert root == pytest.approx(0.6 + 0.2j, rel=1e-14)


def test_solve_degree_zero_errors():
    poly = dsp.DispersionPolynomial(coeffs=np.array([1.0 + 0j]), degree=0,
                                    params=(1.0, 0.0, 2))
    with pytest.raises(DomainError):
        dsp.solve_roots(poly)


def test_oracle_equivalence_1000_random():
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        h_b = 10.0 ** rng.uniform(-3, 3)
        theta = rng.uniform(0.0, math.pi / 2)
        got = dsp.solve_roots(dsp.assemble_polynomial(h_b, theta, 2))
        want = dsp.closed_form_n2(h_b, theta)
        assert roots_multiset_close(list(got), list(want)), (h_b, theta)


@settings(max_examples=200, deadline=None)
@given(h_b=st.floats(min_value=-3.0, max_value=3.0).map(lambda e: 10.0 ** e),
       theta=st.floats(min_value=1e-3, max_value=math.pi / 2 - 1e-3))
def test_oracle_equivalence_property(h_b, theta):
    got = dsp.solve_roots(dsp.assemble_polynomial(h_b, theta, 2))
    want = dsp.closed_form_n2(h_b, theta)
    assert roots_multiset_close(list(got), list(want))


# ------------------------------------------------------------- closed form

def test_closed_form_linear_root():
    (u,) = dsp.closed_form_n2(1.0, 0.0)
    assert u == pytest.approx(0.6 + 0.2j, rel=1e-15)


def test_closed_form_pi4_factorization():
    roots = sorted(dsp.closed_form_n2(1.0, math.pi / 4), key=abs)
    assert roots[0] == pytest.approx(1.0 + 0j, abs=1e-14)
    assert roots[1] == pytest.approx(1.0 + 1.0j, abs=1e-14)


def test_closed_form_small_hb_limit():
    (u,) = dsp.closed_form_n2(1e-12, 0.0)
    assert u == pytest.approx(0.5, abs=1e-11)


# -------------------------------------------------------- principal lambda

def test_principal_lambda_identity():
    assert dsp.principal_lambda(1.0 + 0j) == 1.0 + 0j


def test_principal_lambda_frozen_values():
    lam = dsp.principal_lambda(0.6 + 0.2j)
    assert lam == pytest.approx(LAMBDA_H1_T0, rel=1e-14)
    lam = dsp.principal_lambda(1 + 1j)
    assert lam == pytest.approx(LAMBDA_1PLUS1J, rel=1e-14)


def test_principal_lambda_branch_convention():
    # negative real u: Re lam = 0 so Im lam >= 0
    lam = dsp.principal_lambda(-4.0 + 0j)
    assert lam == pytest.approx(2j, abs=1e-15)
    lam = dsp.principal_lambda(complex(-4.0, -0.0))
    assert lam.imag >= 0 or lam.real > 0


@given(u=st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6,
                            allow_nan=False, allow_infinity=False))
def test_principal_lambda_squares_back(u):
    lam = dsp.principal_lambda(u)
    assert lam.real >= 0
    assert cmath.isclose(lam * lam, u, rel_tol=1e-12)


# ----------------------------------------------------------------- residual

def test_residual_exact_zero_at_pi4_root():
    assert dsp.residual(1.0 + 0j, 1.0, math.pi / 4, 2) == pytest.approx(0, abs=1e-15)


def test_residual_half_at_theta0():
    # 1 - (i/2)[1/(i-1) + 1/(1+i)] = 1/2
    val = dsp.residual(1.0 + 0j, 1.0, 0.0, 2)
    assert val == pytest.approx(0.5 + 0j, abs=1e-15)


def test_residual_small_at_acoustic_roots():
    rng = np.random.default_rng(7)
    for _ in range(50):
        h_b = 10.0 ** rng.uniform(-2, 2)
        theta = rng.uniform(1e-3, math.pi / 2 - 1e-3)
        n = int(rng.integers(2, 5))
        root = dsp.acoustic_root(h_b, theta, n)
        assert root.residual < 1e-9


def test_residual_singular_denominator_raises():
    # secondary root at theta=pi/4: u = 1 + i h_b makes both denominators zero
    lam = dsp.principal_lambda(1 + 1j)
    with pytest.raises(SingularDenominatorError):
        dsp.residual(lam, 1.0, math.pi / 4, 2)
    # the certification fallback still gives a small polynomial residual
    assert dsp.root_residual(lam, 1.0, math.pi / 4, 2) < 1e-9


# --------------------------------------------------------------- mode shape

def test_mode_shape_symmetric_at_pi4():
    shape = dsp.mode_shape(1.0 + 0j, 1.0, math.pi / 4, 2)
    np.testing.assert_allclose(shape.amplitudes, [1.0, 1.0], rtol=1e-12)


def test_mode_shape_theta0_distinct_finite():
    root = dsp.acoustic_root(1.0, 0.0, 2)
    shape = dsp.mode_shape(root.lam, 1.0, 0.0, 2)
    a = shape.amplitudes
    assert np.all(np.isfinite(a.view(float)))
    assert abs(a[0] - a[1]) > 1e-3
    assert np.max(np.abs(a)) == pytest.approx(1.0, rel=1e-12)


def test_mode_shape_rows_satisfy_eigenproblem():
    rng = np.random.default_rng(11)
    for _ in range(25):
        h_b = 10.0 ** rng.uniform(-2, 2)
        theta = rng.uniform(1e-2, math.pi / 2 - 1e-2)
        n = int(rng.integers(2, 5))
        root = dsp.acoustic_root(h_b, theta, n)
        a = dsp.mode_shape(root.lam, h_b, theta, n).amplitudes
        c2 = np.cos(theta + np.arange(n) * np.pi / n) ** 2
        rows = (1 + 1j * h_b - 2 * root.lam ** 2 * c2) * a \
            - (1j * h_b / n) * np.sum(a)
        assert np.max(np.abs(rows)) < 1e-9


def test_mode_shape_requires_a_root():
    with pytest.raises(DomainError):
        dsp.mode_shape(0.5 + 0.5j, 1.0, 0.3, 2)


def test_mode_shape_singular_at_pi4_secondary():
    lam = dsp.principal_lambda(1 + 1j)
    with pytest.raises(SingularDenominatorError):
        dsp.mode_shape(lam, 1.0, math.pi / 4, 2)


# ----------------------------------------------------------- branch select

def test_select_acoustic_at_pi4_is_unity():
    roots = dsp.solve_roots(dsp.assemble_polynomial(1.0, math.pi / 4, 2))
    root = dsp.select_branch(roots, 1.0, math.pi / 4, 2, policy="acoustic")
    assert abs(root.lam - 1.0) < 1e-10
    assert root.branch == "acoustic"


def test_select_all_orders_secondary_by_attenuation():
    roots = dsp.solve_roots(dsp.assemble_polynomial(1.0, math.pi / 4, 2))
    out = dsp.select_branch(roots, 1.0, math.pi / 4, 2, policy="all")
    assert [r.branch for r in out] == ["acoustic", "secondary(1)"]
    assert out[1].lam == pytest.approx(LAMBDA_1PLUS1J, rel=1e-12)


def test_select_acoustic_hydrodynamic():
    roots = dsp.solve_roots(dsp.assemble_polynomial(1e4, 0.0, 2))
    root = dsp.select_branch(roots, 1e4, 0.0, 2, policy="acoustic")
    assert abs(root.lam - 1.0) < 1e-3


def test_select_branch_empty_roots_rejected():
    with pytest.raises(DomainError):
        dsp.select_branch(np.array([]), 1.0, 0.0, 2)


def test_select_branch_degenerate_crossing_reported():
    # at theta=pi/4 the two roots are 1 and 1+i*h_b: within 1e-8 of each
    # other for tiny h_b, which must be reported, not resolved silently
    from bosewave.errors import BranchAmbiguityError
    h_b = 1e-9
    roots = dsp.solve_roots(dsp.assemble_polynomial(h_b, math.pi / 4, 2))
    with pytest.raises(BranchAmbiguityError):
        dsp.select_branch(roots, h_b, math.pi / 4, 2)


def test_dispersion_root_u_is_lambda_squared():
    for h_b, theta, n in [(0.5, 0.2, 2), (3.0, 0.6, 3), (12.0, 0.1, 4)]:
        for root in dsp.select_branch(
                dsp.solve_roots(dsp.assemble_polynomial(h_b, theta, n)),
                h_b, theta, n, policy="all"):
            assert abs(root.lam ** 2 - root.u) <= 1e-12 * max(1.0, abs(root.u))


# ------------------------------------------------------------- continuation

def test_continuation_matches_closed_form_oracle():
    h_grid = np.array([1e4, 10.0, 1.0])
    tracked = dsp.continuation_track(0.0, 2, 0.0, h_grid)
    for h, root in zip(h_grid, tracked):
        (u,) = dsp.closed_form_n2(h, 0.0)
        assert root.lam == pytest.approx(dsp.principal_lambda(u), rel=1e-12)
        assert root.residual < 1e-9


def test_continuation_pi4_constant_unity():
    h_grid = np.geomspace(1e4, 1e-2, 30)
    tracked = dsp.continuation_track(math.pi / 4, 2, 0.0, h_grid)
    for root in tracked:
        assert abs(root.lam - 1.0) < 1e-10


def test_continuation_hb_collapse_between_b_values():
    # same h_b reached through different (h, B) pairs gives identical lambdas
    h_grid = np.geomspace(1e4, 0.1, 25)
    a = dsp.continuation_track(0.3, 2, 0.7, h_grid)
    b = dsp.continuation_track(0.3, 2, 0.0, h_grid * 1.7)
    for ra, rb in zip(a, b):
        assert ra.lam == rb.lam


def test_continuation_requires_descending_seeded_grid():
    with pytest.raises(DomainError):
        dsp.continuation_track(0.0, 2, 0.0, np.array([10.0, 1.0]))
    with pytest.raises(DomainError):
        dsp.continuation_track(0.0, 2, 0.0, np.array([1e4, 1.0, 10.0]))


# ------------------------------------------------------ spec invariants

@pytest.mark.parametrize("n", [2, 3, 4])
def test_theta_symmetry_multiset(n):
    rng = np.random.default_rng(100 + n)
    thetas = np.linspace(1e-3, math.pi / n - 1e-3, 50)
    for theta in thetas:
        h_b = 10.0 ** rng.uniform(-2, 2)
        base = list(dsp.solve_roots(dsp.assemble_polynomial(h_b, theta, n)))
        shifted = list(dsp.solve_roots(
            dsp.assemble_polynomial(h_b, theta + math.pi / n, n)))
        mirrored = list(dsp.solve_roots(
            dsp.assemble_polynomial(h_b, math.pi / n - theta, n)))
        assert roots_multiset_close(base, shifted)
        assert roots_multiset_close(base, mirrored)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hydrodynamic_limit_all_theta(n):
    for theta in np.linspace(0.0, math.pi / n, 7):
        root = dsp.acoustic_root(1e6, float(theta), n)
        assert abs(root.lam - 1.0) < 1e-4


def test_acoustic_lambda_i_nonnegative_over_grid():
    for theta in np.linspace(0.0, math.pi / 2, 9):
        for h_b in np.geomspace(1e-2, 1e2, 17):
            root = dsp.acoustic_root(float(h_b), float(theta), 2)
            assert root.lam.imag >= -1e-12


def test_theta_normalization_does_not_move_roots():
    # solving at theta and theta + pi/n gives identical root multisets
    got = list(dsp.solve_roots(dsp.assemble_polynomial(2.0, 0.35, 3)))
    other = list(dsp.solve_roots(
        dsp.assemble_polynomial(2.0, 0.35 + math.pi / 3, 3)))
    assert roots_multiset_close(got, other, tol=1e-10)

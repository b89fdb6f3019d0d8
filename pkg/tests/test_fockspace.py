import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from toeplitz_wells.fockspace import (
    AntiWickPolynomial,
    ConvergenceError,
    FockTruncation,
    PolyGaussian,
    TruncationError,
    WeylQuadratic,
    antiwick_matrix,
    antiwick_spectrum,
    antiwick_to_weyl_quadratic,
    apply_scaling,
    bargmann_hermite_check,
    dump_matrix_csv,
    fock_symbols,
    ladder_apply,
    model_bergman_kernel,
    model_laplacian,
    model_laplacian_spectrum,
    monomial_norm,
    scaling_constant,
    weyl_quadratic_spectrum,
    weyl_to_antiwick,
)

ZBZ = AntiWickPolynomial(1, {((1,), (1,)): 1.0})


def radial_moment(k: int) -> float:
    """Independent oracle: int_C |z|^{2k} e^{-|z|^2} dZ in polar coordinates."""
    val, _ = integrate.quad(lambda r: r ** (2 * k + 1) * math.exp(-r * r), 0, np.inf)
    return 2 * math.pi * val


class TestMonomialNorm:
    def test_low_degrees(self):
        t = FockTruncation(5)
        assert monomial_norm((0,), t) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert monomial_norm((1,), t) == pytest.approx(math.sqrt(math.pi), rel=1e-15)

    def test_cubic_against_quadrature(self):
        frozen = math.sqrt(6 * math.pi)  # sqrt(18.84955592153876)
        assert math.sqrt(radial_moment(3)) == pytest.approx(frozen, rel=1e-10)
        assert monomial_norm((3,), FockTruncation(3)) == pytest.approx(frozen, rel=1e-14)

    def test_two_dimensional_product(self):
        t = FockTruncation(6, (1.0, 2.0))
        assert monomial_norm((2, 3), t) == pytest.approx(math.sqrt(math.pi**2 * 2 * 6))

    def test_out_of_truncation(self):
        with pytest.raises(TruncationError):
            monomial_norm((4,), FockTruncation(3))

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            FockTruncation(3, (1.0, -1.0))


def test_basis_gram_matrix_by_quadrature():
    t = FockTruncation(6)
    # Gauss-Laguerre in s = r^2 plus an exact angular trapezoid rule
    s, w = np.polynomial.laguerre.laggauss(40)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    z = np.sqrt(s)[:, None] * np.exp(1j * theta)[None, :]
    weight = (w[:, None] * np.full_like(theta, 2 * np.pi / 64)[None, :]) / 2
    vecs = [z ** k[0] / monomial_norm(k, t) for k in t.basis]
    G = np.array([[np.sum(u * np.conj(v) * weight) for v in vecs] for u in vecs])
    assert np.abs(G - np.eye(len(vecs))).max() < 1e-12


def test_basis_ordering_and_dimension():
    t = FockTruncation(3, (1.0, 1.0))
    assert t.dim == len(t.basis) == 10
    assert t.basis[0] == (0, 0)
    assert all(sum(a) <= sum(b) for a, b in zip(t.basis, t.basis[1:]))


class TestBergmanKernel:
    def test_origin(self):
        t = FockTruncation(1)
        assert model_bergman_kernel(np.zeros(2), np.zeros(2), t) == pytest.approx(1 / (2 * np.pi))

    def test_diagonal_constant(self):
        t = FockTruncation(1)
        Z = np.random.default_rng(1).normal(size=(20, 2)) * 3
        vals = model_bergman_kernel(Z, Z, t)
        assert np.allclose(vals, 1 / (2 * np.pi), rtol=0, atol=1e-15)

    def test_hermitian(self):
        t = FockTruncation(1, (1.7,))
        rng = np.random.default_rng(2)
        Z, Zp = rng.normal(size=(10, 2)), rng.normal(size=(10, 2))
        a = model_bergman_kernel(Z, Zp, t)
        b = model_bergman_kernel(Zp, Z, t)
        assert np.abs(a - np.conj(b)).max() < 1e-16

    def test_normalisation_two_dims(self):
        t = FockTruncation(1, (2.0, 3.0))
        assert model_bergman_kernel(np.zeros(4), np.zeros(4), t) == pytest.approx(6 / (2 * np.pi) ** 2)


def _random_polygaussian(rng, a, deg=3, terms=4):
    coeffs = {}
    for _ in range(terms):
        al = (int(rng.integers(0, deg + 1)),)
        be = (int(rng.integers(0, deg + 1)),)
        coeffs[(al, be)] = complex(rng.normal(), rng.normal())
    return PolyGaussian((a,), coeffs)


def _to_sympy(f: PolyGaussian):
    z, zb = fock_symbols(1)
    poly = sum(c * z[0] ** al[0] * zb[0] ** be[0] for (al, be), c in f.coeffs.items())
    gauss = sympy.exp(-sympy.nsimplify(f.a[0]) * z[0] * zb[0] / 4)
    return poly * gauss, gauss


class TestLadder:
    def test_b_plus_kills_kernel_column(self):
        # P(., 0) is a multiple of the ground Gaussian
        col = PolyGaussian.monomial((1.0,), (0,), (0,), 1 / (2 * np.pi))
        assert ladder_apply("b_plus", 0, col).coeffs == {}
        assert model_laplacian(col).coeffs == {}

    def test_b_on_constant_symbolic(self):
        z, zb = fock_symbols(1)
        assert sympy.simplify(ladder_apply("b", 0, sympy.Integer(1), a=(2,)) - zb[0]) == 0

    def test_commutator_is_minus_two_a(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            f = _random_polygaussian(rng, 1.0)
            comm = ladder_apply("b", 0, ladder_apply("b_plus", 0, f)) - ladder_apply(
                "b_plus", 0, ladder_apply("b", 0, f)
            )
            diff = comm - f.scale(-2.0)
            assert diff.max_abs_coeff() < 1e-12

    def test_matches_symbolic_differentiation(self):
        z, zb = fock_symbols(1)
        rng = np.random.default_rng(7)
        a = 1.5
        for which in ("b", "b_plus"):
            f = _random_polygaussian(rng, a)
            expr, gauss = _to_sympy(f)
            sym = sympy.expand(sympy.simplify(ladder_apply(which, 0, expr, a=(a,)) / gauss))
            num = ladder_apply(which, 0, f)
            poly = sympy.Poly(sym, z[0], zb[0])
            got = {((m[0],), (m[1],)): complex(c) for m, c in zip(poly.monoms(), poly.coeffs())}
            keys = set(got) | set(num.coeffs)
            assert max(abs(got.get(k, 0) - num.coeffs.get(k, 0)) for k in keys) < 1e-12

    def test_laplacian_kills_projection_kernel_symbolically(self):
        z, zb = fock_symbols(1)
        w, wb = sympy.symbols("w wb")
        a = sympy.Rational(3, 2)
        kernel = a / (2 * sympy.pi) * sympy.exp(-a / 4 * (z[0] * zb[0] + w * wb - 2 * z[0] * wb))
        assert sympy.simplify(model_laplacian(kernel, a=(a,))) == 0

    def test_unknown_operator(self):
        with pytest.raises(ValueError):
            ladder_apply("c", 0, PolyGaussian((1.0,), {}))

    def test_symbolic_needs_weights(self):
        with pytest.raises(ValueError):
            ladder_apply("b", 0, sympy.Integer(1))


class TestModelLaplacianSpectrum:
    def test_unit_weight(self):
        assert np.allclose(model_laplacian_spectrum(FockTruncation(4), 5), [0, 2, 4, 6, 8])

    def test_scaled_weight(self):
        assert np.allclose(model_laplacian_spectrum(FockTruncation(4, (3.0,)), 3), [0, 6, 12])

    def test_two_ladders_merge(self):
        vals = model_laplacian_spectrum(FockTruncation(2, (1.0, 2.0)), 5)
        assert np.allclose(vals, [0, 2, 4, 4, 6])

    def test_truncation_raised_automatically(self):
        assert np.allclose(model_laplacian_spectrum(FockTruncation(0), 4), [0, 2, 4, 6])


class TestAntiWickMatrix:
    def test_identity(self):
        M = antiwick_matrix(AntiWickPolynomial.constant(1, 1.0), FockTruncation(7)).matrix
        assert np.array_equal(M, np.eye(8))

    def test_number_operator_plus_one(self):
        N = 12
        res = antiwick_matrix(ZBZ, FockTruncation(N))
        assert np.array_equal(res.matrix.real, np.diag(np.arange(1.0, N + 2)))
        assert not res.truncation_warning

    def test_quartic_against_symbolic_derivative(self):
        z = sympy.Symbol("z")
        N = 10
        oracle = [sympy.diff(z**2 * z**j, z, 2) / z**j for j in range(N + 1)]
        oracle = [float(sympy.simplify(e)) for e in oracle]
        M = antiwick_matrix(AntiWickPolynomial(1, {((2,), (2,)): 1.0}), FockTruncation(N)).matrix
        assert np.allclose(np.diag(M).real, oracle, rtol=1e-14)
        assert np.allclose(M - np.diag(np.diag(M)), 0)

    def test_truncation_warning(self):
        assert antiwick_matrix(AntiWickPolynomial(1, {((2,), (2,)): 1.0}), FockTruncation(3)).truncation_warning

    def test_large_truncation_no_overflow(self):
        M = antiwick_matrix(AntiWickPolynomial.from_real_quadratic(np.diag([1.0, 3.0])), FockTruncation(200)).matrix
        assert np.isfinite(M).all()

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
    def test_hermitian_for_self_adjoint(self, c):
        P = AntiWickPolynomial(
            1,
            {
                ((1,), (1,)): c[0],
                ((0,), (2,)): complex(c[1], c[2]),
                ((2,), (0,)): complex(c[1], -c[2]),
                ((1,), (2,)): complex(c[3], c[4]),
                ((2,), (1,)): complex(c[3], -c[4]),
                ((0,), (0,)): c[5],
            },
        )
        assert P.is_self_adjoint()
        M = antiwick_matrix(P, FockTruncation(15)).matrix
        assert np.abs(M - M.conj().T).max() <= 1e-13 * max(1.0, np.abs(M).max())

    def test_self_adjoint_flag_and_degree(self):
        P = AntiWickPolynomial(1, {((0,), (2,)): 1j, ((1,), (1,)): 2.0})
        assert not P.is_self_adjoint()
        assert P.degree == 2


class TestWeylBridge:
    def test_number_operator(self):
        W = antiwick_to_weyl_quadratic(ZBZ)
        assert np.allclose(W.M, 0.5 * np.eye(2))
        assert W.trace_correction == pytest.approx(0.5)
        vals = weyl_quadratic_spectrum(W, 10)
        assert np.abs(vals - np.arange(1, 11)).max() < 1e-12
        direct = np.diag(antiwick_matrix(ZBZ, FockTruncation(9)).matrix).real
        assert np.abs(vals - direct).max() < 1e-12

    def test_real_diagonal_form(self):
        alpha, beta = 1.0, 4.0
        W = antiwick_to_weyl_quadratic(AntiWickPolynomial.from_real_quadratic(np.diag([alpha, beta])))
        assert np.allclose(W.M, 0.5 * np.diag([alpha, beta]), atol=1e-15)

    def test_cross_term(self):
        W = antiwick_to_weyl_quadratic(AntiWickPolynomial.from_real_quadratic(np.array([[0, 0.5], [0.5, 0]])))
        assert np.allclose(W.M, W.M.T)
        assert W.M[0, 0] == W.M[1, 1] == 0
        assert W.M[0, 1] != 0
        assert W.trace_correction == 0

    def test_spectrum_formula(self):
        assert np.allclose(weyl_quadratic_spectrum(WeylQuadratic(0.5 * np.eye(2), 0.5), 4), [1, 2, 3, 4])
        M = 0.5 * np.diag([1.0, 4.0])
        vals = weyl_quadratic_spectrum(WeylQuadratic(M, 1.25), 5)
        assert np.allclose(vals, 2 * np.arange(5) + 2.25, rtol=0, atol=1e-14)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="positive definite"):
            weyl_quadratic_spectrum(WeylQuadratic(0 * np.eye(2), 0.0), 3)

    def test_non_quadratic_rejected(self):
        with pytest.raises(ValueError, match="degree"):
            antiwick_to_weyl_quadratic(AntiWickPolynomial(1, {((2,), (2,)): 1.0}))

    def test_round_trip(self):
        P = AntiWickPolynomial.from_real_quadratic(np.array([[2.0, 0.3], [0.3, 1.0]]))
        back = weyl_to_antiwick(antiwick_to_weyl_quadratic(P))
        keys = set(P.coeffs) | set(back.coeffs)
        assert max(abs(P.coeffs.get(k, 0) - back.coeffs.get(k, 0)) for k in keys) < 1e-14

    def test_two_dimensional_routes_agree(self):
        Q = np.diag([1.0, 2.0, 3.0, 1.5])
        P = AntiWickPolynomial.from_real_quadratic(Q)
        vals = weyl_quadratic_spectrum(antiwick_to_weyl_quadratic(P), 4)
        direct, _ = antiwick_spectrum(P, 4)
        assert np.allclose(vals, direct, atol=1e-10)


def _rotated(l1, l2, theta):
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    return R @ np.diag([l1, l2]) @ R.T


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0, np.pi))
def test_two_routes_agree_on_random_positive_quadratics(l1, l2, theta):
    P = AntiWickPolynomial.from_real_quadratic(_rotated(l1, l2, theta))
    weyl = weyl_quadratic_spectrum(antiwick_to_weyl_quadratic(P), 6)
    trunc, _ = antiwick_spectrum(P, 6)
    assert np.abs(weyl - trunc).max() < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(1.0, 2.0), st.floats(0, np.pi))
def test_half_of_truncated_levels_are_exact_for_mild_anisotropy(l1, ratio, theta):
    # with stronger squeezing fewer than N/2 levels of a truncation converge
    P = AntiWickPolynomial.from_real_quadratic(_rotated(l1, ratio * l1, theta))
    N = 128
    low = np.linalg.eigvalsh(antiwick_matrix(P, FockTruncation(N)).matrix)[: N // 2]
    weyl = weyl_quadratic_spectrum(antiwick_to_weyl_quadratic(P), N // 2)
    assert np.abs(low - weyl).max() < 1e-8 * max(1.0, weyl[-1])


def test_lowest_eigenvalue_monotone_in_truncation():
    P = AntiWickPolynomial.from_real_quadratic(np.diag([0.3, 4.0]))
    lows = [np.linalg.eigvalsh(antiwick_matrix(P, FockTruncation(N)).matrix)[0] for N in range(2, 40)]
    assert all(b <= a + 1e-12 for a, b in zip(lows, lows[1:]))


def test_convergence_cap_reported():
    P = AntiWickPolynomial.from_real_quadratic(np.diag([0.01, 10.0]))
    with pytest.raises(ConvergenceError) as info:
        antiwick_spectrum(P, 6, cap=20)
    assert info.value.N is not None


class TestBargmann:
    def test_ground_state_maps_to_constant(self):
        res = bargmann_hermite_check(0)
        assert res.constant_residual < 1e-8
        assert res.converged

    def test_ladder_recursion(self):
        for j in range(6):
            assert bargmann_hermite_check(j).ladder_residual < 1e-8

    def test_third_hermite_function(self):
        res = bargmann_hermite_check(3)
        assert res.residual < 1e-6

    def test_coarse_quadrature_flags_failure(self):
        assert not bargmann_hermite_check(4, grid=(3.0, 21)).converged


class TestScaling:
    def test_isometry_constant(self):
        for a in (0.5, 1.0, 3.0):
            c = scaling_constant([a])
            # ||S 1||^2 = c^2 int exp(-a|z|^2/2) dZ must equal ||1||^2 = pi
            assert c * c * 2 * np.pi / a == pytest.approx(np.pi)

    def test_isometry_on_monomial_numerically(self):
        a = 2.5
        Su = apply_scaling(lambda w: w[..., 0] ** 2, [a])
        val, _ = integrate.dblquad(
            lambda y, x: abs(Su(np.array([x + 1j * y]))) ** 2, -8, 8, -8, 8, epsabs=1e-11
        )
        assert val == pytest.approx(monomial_norm((2,), FockTruncation(2)) ** 2, rel=1e-8)

    def test_printed_prefactor_is_not_an_isometry(self):
        a = 3.0
        assert abs((a / 2) ** 2 * 2 * np.pi / a - np.pi) > 0.1


def test_matrix_csv(tmp_path):
    M = antiwick_matrix(ZBZ, FockTruncation(3)).matrix
    path = tmp_path / "m.csv"
    dump_matrix_csv(M, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 5

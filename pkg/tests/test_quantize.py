import math

import numpy as np
import pytest
import scipy.integrate
import scipy.sparse as sp

from ncquant.expr import NotPolynomialError
from ncquant.quantize import (
    ActionAngleSpace,
    AffineObservable,
    DiscreteOperator,
    NonHermitianError,
    QuantizationParams,
    UnsupportedObservableError,
    WaveFunction,
    casimir_operator,
    dirac_convergence,
    dirac_residual,
    gauge_spectrum_check,
    hamiltonian_operator,
    inner_product,
    interior_norm,
    noncommutativity_witness,
    quantize_observable,
    self_adjointness_residual,
    spectrum,
)
from ncquant.so3 import So3Model

TORUS = ActionAngleSpace.canonical(periodic=[("r", "alpha")])
CYL = ActionAngleSpace.canonical(periodic=[("J", "alpha")], noncompact=[("p", "q")])
LINE = ActionAngleSpace.canonical(noncompact=[("p", "q")])
SO3 = So3Model.build().action_angle_space()


def torus_params(lam=0.0, kmax=5):
    return QuantizationParams(TORUS, (lam,), kmax)


def cyl_params(lam=0.0, kmax=4, N=101, L=10.0):
    return QuantizationParams(CYL, (lam,), kmax, ((L, N),))


def op(src, params):
    return quantize_observable(AffineObservable.from_expr(src, params.space), params)


# ---------------------------------------------------------------- parameters


def test_params_validation():
    with pytest.raises(ValueError):
        QuantizationParams(CYL, (0.0,), 3, ((10.0, 100),))
    with pytest.raises(ValueError):
        QuantizationParams(CYL, (0.0,), 3, ((10.0, 1),))
    with pytest.raises(ValueError):
        QuantizationParams(CYL, (0.0,), 0)
    with pytest.raises(ValueError):
        QuantizationParams(CYL, (0.0,), 3, ((-1.0, 11),))
    with pytest.raises(ValueError):
        QuantizationParams(CYL, (0.0, 1.0), 3)


def test_canonical_lambda_and_dimension():
    p = QuantizationParams(CYL, (2.25,), 3, ((5.0, 11),))
    vals, shifts = p.canonical_lambda()
    assert vals == (0.25,) and shifts == (2,)
    assert QuantizationParams(CYL, (-0.75,), 3).canonical_lambda() == ((0.25,), (-1,))
    assert p.dim == 7 * 11
    assert quantize_observable(AffineObservable.from_expr("J", CYL), p).matrix.shape == (77, 77)


# ------------------------------------------------------------- wavefunctions


def test_inner_product_fourier_orthogonality():
    p = cyl_params(N=51)
    phi = lambda q: np.exp(-q**2)  # noqa: E731
    a = WaveFunction.from_modes(p, {1: phi})
    b = WaveFunction.from_modes(p, {-2: phi})
    assert inner_product(a, b) == 0
    psi = WaveFunction.random_compact(p, np.random.default_rng(0))
    nrm = inner_product(psi, psi)
    assert nrm.imag == 0 and nrm.real > 0


def _bump(q, a=5.0):
    out = np.zeros_like(q, dtype=float)
    inside = np.abs(q) < a
    out[inside] = np.exp(-1.0 / (1.0 - (q[inside] / a) ** 2))
    return out


def test_inner_product_against_quadrature():
    norm2, _ = scipy.integrate.quad(lambda x: _bump(np.array([x]))[0] ** 2, -5, 5, epsabs=1e-14, epsrel=1e-14)
    p = QuantizationParams(LINE, (), 1, ((10.0, 201),))
    psi = WaveFunction.from_modes(p, {(): lambda q: _bump(q) / math.sqrt(norm2)})
    assert abs(inner_product(psi, psi) - 1.0) < 1e-6


def test_compact_support_battery():
    p = cyl_params(N=21)
    psi = WaveFunction.random_compact(p, np.random.default_rng(1))
    assert psi.is_compactly_supported()
    assert abs(inner_product(psi, psi) - 1.0) < 1e-12


# ----------------------------------------------------------------- operators


def test_action_operator_is_diagonal_shift():
    p = torus_params(lam=0.3, kmax=4)
    J = op("r", p)
    assert J.is_diagonal()
    assert np.array_equal(J.matrix.diagonal().real, np.arange(-4, 5) - 0.3)


def test_constant_is_multiple_of_identity():
    p = cyl_params(N=11)
    for c in (1.0, -2.5):
        d = op(repr(c), p).matrix - c * sp.identity(p.dim, format="csr")
        assert d.nnz == 0 or np.max(np.abs(d.data)) == 0.0


def test_momentum_operator_second_order():
    # p^ = -i d/dq on a Gaussian against the analytic derivative
    errors, steps = [], []
    for N in (51, 101, 201):
        p = QuantizationParams(LINE, (), 1, ((10.0, N),))
        q = p.grid_points(0)
        psi = WaveFunction.from_modes(p, {(): lambda x: np.exp(-x**2 / 2)})
        out = op("p", p).apply(psi).coefficients
        exact = -1j * (-q) * np.exp(-q**2 / 2)
        errors.append(np.max(np.abs(out[2:-2] - exact[2:-2])))
        steps.append(p.spacing(0))
    order = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert 1.9 < order < 2.1


def test_linearity_and_identity():
    p = QuantizationParams(SO3, (0.0,), 3, ((10.0, 31),))
    f, g, c = "sin(gamma)*x1 + cos(alpha)*r", "gamma^2*x1 + sin(alpha) + 3", 2.5
    lhs = op(f"{f} + {c}*({g})", p).matrix
    rhs = op(f, p).matrix + c * op(g, p).matrix
    assert np.max(np.abs((lhs - rhs).data)) < 1e-12
    one = op("1", p).matrix - sp.identity(p.dim, format="csr")
    assert one.nnz == 0 or np.max(np.abs(one.data)) == 0.0


@pytest.mark.parametrize(
    "src", ["r", "x1", "sin(alpha)", "gamma^2", "sin(gamma)*x1 + cos(alpha)*r + gamma", "cos(2*alpha)*x1"]
)
def test_real_observables_are_hermitian(src):
    p = QuantizationParams(SO3, (0.37,), 3, ((10.0, 31),))
    assert op(src, p).hermitian_residual() < 1e-12


def test_unsupported_observables():
    with pytest.raises(UnsupportedObservableError):
        AffineObservable.from_expr("r^2", SO3)
    with pytest.raises(UnsupportedObservableError):
        AffineObservable.from_expr("r*x1", SO3)
    with pytest.raises(UnsupportedObservableError):
        AffineObservable(SO3, (("gamma", 1.0),))
    with pytest.raises(UnsupportedObservableError):
        op("r*alpha", torus_params())


def test_non_trig_polynomial_in_torus_angle_rejected():
    with pytest.raises(UnsupportedObservableError):
        op("sqrt(sin(alpha)^2)*r", torus_params())


# ------------------------------------------------------------- hamiltonians


def test_spherical_top_operator():
    p = torus_params(0.0, 3)
    H = hamiltonian_operator("0.5*I*r^2", p, {"I": 1.0})
    assert list(H.matrix.diagonal().real) == [k * k / 2 for k in range(-3, 4)]


def test_spherical_top_half_integer_lambda():
    p = torus_params(0.5, 3)
    H = hamiltonian_operator("0.5*I*r^2", p, {"I": 2.0})
    expected = [(k - 0.5) ** 2 * 2.0 * 0.5 for k in range(-3, 4)]
    assert list(H.matrix.diagonal().real) == expected


def test_constant_hamiltonian():
    p = cyl_params(N=11)
    H = hamiltonian_operator("2.5", p)
    assert np.array_equal(H.matrix.diagonal(), np.full(p.dim, 2.5))
    assert H.matrix.nnz == p.dim


def test_casimir_operator():
    assert list(casimir_operator("r", torus_params(0.0, 3)).matrix.diagonal().real) == list(range(-3, 4))
    C = casimir_operator("r", torus_params(0.25, 3))
    assert list(C.matrix.diagonal().real) == [k - 0.25 for k in range(-3, 4)]
    H = hamiltonian_operator("0.5*r^2 + r^3", torus_params(0.25, 3))
    assert interior_norm(H.commutator(C), H.params, 0) < 1e-12


def test_hamiltonian_matches_quantization_when_affine():
    p = QuantizationParams(SO3, (0.2,), 3, ((10.0, 31),))
    for h in ("2*r + 1", "x1 - 3", "0.5*r + 2*x1"):
        d = hamiltonian_operator(h, p).matrix - op(h, p).matrix
        assert d.nnz == 0 or np.max(np.abs(d.data)) < 1e-12


def test_mixed_action_hamiltonian_commutes_with_torus_action():
    p = QuantizationParams(SO3, (0.0,), 3, ((10.0, 31),))
    H = hamiltonian_operator("r^2 + x1^2", p)
    R = op("r", p)
    assert H.hermitian_residual() < 1e-12
    assert interior_norm(H.commutator(R), p) < 1e-12


def test_hamiltonian_errors():
    p = torus_params()
    with pytest.raises(NotPolynomialError):
        hamiltonian_operator("sin(r)", p)
    with pytest.raises(NotPolynomialError):
        hamiltonian_operator("r^9", p)


# ------------------------------------------------------------------- spectra


def test_spectrum_examples():
    top = hamiltonian_operator("0.5*r^2", torus_params(0.0, 3))
    assert spectrum(top) == [(0.0, 1), (0.5, 2), (2.0, 2), (4.5, 2)]
    p = cyl_params(N=11)
    eye = DiscreteOperator(sp.identity(p.dim, format="csr"), p)
    assert spectrum(eye) == [(1.0, p.dim)]
    J = op("r", torus_params(0.5, 2))
    assert spectrum(J) == [(-2.5, 1), (-1.5, 1), (-0.5, 1), (0.5, 1), (1.5, 1)]
    assert spectrum(top, count=3) == [(0.0, 1), (0.5, 2)]


def test_spectrum_of_non_diagonal_operator_agrees_with_dense_solver():
    p = cyl_params(N=21, kmax=2)
    A = op("cos(alpha)*J + sin(q)*p + q^2", p)
    values = [v for v, m in spectrum(A) for _ in range(m)]
    assert np.allclose(values, np.linalg.eigvalsh(A.dense()), atol=1e-10, rtol=0)


def test_spectrum_rejects_non_hermitian():
    p = torus_params(0.0, 2)
    with pytest.raises(NonHermitianError):
        spectrum(DiscreteOperator(sp.eye(p.dim, k=1, format="csr"), p))


def test_gauge_examples():
    p = torus_params(0.0, 5)
    g = gauge_spectrum_check(0.0, 1.0, p)
    assert g.window == (-4.0, 4.0) and g.matched == 9 and g.agree and g.integer_difference
    same = gauge_spectrum_check(0.3, 0.3, p)
    assert same.window == (-5.3, 4.7) and same.matched == 11 and same.agree
    half = gauge_spectrum_check(0.0, 0.5, p)
    assert half.matched == 0 and not half.agree and not half.integer_difference


# -------------------------------------------------------- Dirac and witness


def test_dirac_torus_sector_exact():
    p = cyl_params()
    assert dirac_residual("J", "sin(alpha)", p) < 1e-12
    assert dirac_residual("cos(alpha)*J", "sin(2*alpha)*J + cos(alpha)", p) < 1e-12
    assert dirac_residual("sin(q)*p + J", "sin(q)*p + J", p) == 0.0


def test_dirac_noncompact_sector_second_order():
    conv = dirac_convergence("p", "q^3", cyl_params(), (51, 101, 201))
    assert not conv.exact and 1.8 <= conv.order <= 2.2
    conv = dirac_convergence("J", "sin(alpha)", cyl_params(), (51, 101, 201))
    assert conv.exact and conv.passed()


def test_noncommutativity_witness():
    p = QuantizationParams(SO3, (0.0,), 3, ((10.0, 201),))
    w = noncommutativity_witness("sin(gamma)", "x1", p)
    assert abs(w.measured - 0.5) < 1e-3 and abs(w.analytic - 0.5) < 1e-3
    one = noncommutativity_witness("1", "x1", p)
    assert one.measured == 0.0 and one.analytic == 0.0
    torus = noncommutativity_witness("sin(alpha)", "r", torus_params(0.0, 5))
    assert abs(torus.measured - 0.5) < 1e-12 and abs(torus.analytic - 0.5) < 1e-12


# ---------------------------------------------------------- self-adjointness


def test_self_adjointness_examples():
    p = cyl_params(N=51)
    assert self_adjointness_residual(op("J", p), p) < 1e-12
    assert self_adjointness_residual(op("p", p), p) < 1e-10
    assert self_adjointness_residual(op("q^2 + cos(alpha)", p), p) < 1e-14
    assert self_adjointness_residual(op("sin(q)*p + cos(alpha)*J", p), p) < 1e-10


def test_self_adjointness_is_seeded():
    p = cyl_params(N=51)
    A = op("sin(q)*p + q", p)
    assert self_adjointness_residual(A, p, seed=7) == self_adjointness_residual(A, p, seed=7)

"""Quantum operators of affine observables in the angle polarization.

For ``f = sum_k a^k(angles) J_k + b(angles)`` the operator is::

    f^ = sum_k [ -(i/2) (a^k d_k + d_k a^k) - lambda_k a^k ] + b

with ``lambda_k = 0`` for noncompact angles. The symmetric product equals
``-i a^k d_k - (i/2) d_k a^k`` and is Hermitian on the discrete space.
Periodic derivatives act exactly on Fourier indices (``d -> i n``);
noncompact derivatives are second-order central differences with zero
values beyond the grid. Multiplication by a function of the angles is a
band (convolution) matrix in the modes and diagonal on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from ..expr import (
    ZERO,
    Const,
    NotPolynomialError,
    ScalarExpr,
    UnknownIdentifierError,
    Var,
    add,
    as_expr,
    differentiate,
    evaluate,
    mul,
    parse,
    polynomial_coefficients,
    substitute,
    to_string,
    variables,
)
from .space import ActionAngleSpace, QuantizationParams
from .wavefunction import WaveFunction

__all__ = [
    "UnsupportedObservableError",
    "AffineObservable",
    "DiscreteOperator",
    "quantize_observable",
    "multiplication_operator",
    "angle_derivative",
    "fourier_coefficients",
    "hamiltonian_operator",
    "casimir_operator",
    "MAX_POLY_DEGREE",
]

MAX_POLY_DEGREE = 8


class UnsupportedObservableError(ValueError):
    pass


# ------------------------------------------------------------ observables


@dataclass(frozen=True)
class AffineObservable:
    """``sum_k a^k J_k + b`` with coefficients depending on the angles only."""

    space: ActionAngleSpace
    coefficients: tuple[tuple[str, ScalarExpr], ...] = ()
    offset: ScalarExpr = ZERO

    def __post_init__(self):
        coeffs = self.coefficients
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        chart = self.space.chart
        cleaned = {}
        for action, a in coeffs:
            if action not in self.space.actions:
                raise UnsupportedObservableError(f"{action!r} is not an action coordinate")
            a = parse(a, chart) if isinstance(a, str) else as_expr(a)
            cleaned[action] = a
        offset = parse(self.offset, chart) if isinstance(self.offset, str) else as_expr(self.offset)
        angles = set(self.space.angles)
        for e in list(cleaned.values()) + [offset]:
            bad = variables(e) - angles
            if bad:
                raise UnsupportedObservableError(
                    f"coefficient {to_string(e)!r} depends on {sorted(bad)}; only angles are allowed"
                )
        ordered = tuple((a, cleaned[a]) for a in self.space.actions if a in cleaned and cleaned[a] != ZERO)
        object.__setattr__(self, "coefficients", ordered)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def from_expr(cls, expr: ScalarExpr | str, space: ActionAngleSpace) -> "AffineObservable":
        """Split an expression affine in the actions into coefficients and offset."""
        if isinstance(expr, str):
            expr = parse(expr, space.chart)
        extra = variables(expr) - set(space.chart.names)
        if extra:
            raise UnknownIdentifierError(sorted(extra)[0])
        coeffs = {}
        for action in space.actions:
            a = differentiate(expr, action)
            if variables(a) & set(space.actions):
                raise UnsupportedObservableError(f"{to_string(expr)!r} is not affine in {action!r}")
            coeffs[action] = a
        offset = substitute(expr, {a: 0.0 for a in space.actions})
        return cls(space, tuple(coeffs.items()), offset)

    def coefficient(self, action: str) -> ScalarExpr:
        return dict(self.coefficients).get(action, ZERO)

    def to_expr(self) -> ScalarExpr:
        e = self.offset
        for action, a in self.coefficients:
            e = add(mul(a, Var(action)), e)
        return e

    def __str__(self):
        return to_string(self.to_expr())


# -------------------------------------------------------------- operators


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Sparse matrix over the flattened (modes x grid) basis."""

    matrix: sp.csr_matrix
    params: QuantizationParams
    description: str = ""

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape != (self.params.dim, self.params.dim):
            raise ValueError(f"matrix shape {m.shape} does not match dimension {self.params.dim}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.params.dim

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, psi: WaveFunction) -> WaveFunction:
        return WaveFunction.from_vector(self.params, self.matrix @ psi.vector)

    def is_diagonal(self) -> bool:
        m = self.matrix.tocoo()
        return bool(np.all((m.row == m.col) | (m.data == 0)))

    def hermitian_residual(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def _wrap(self, m, description) -> "DiscreteOperator":
        return DiscreteOperator(m, self.params, description)

    def __add__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        return self._wrap(self.matrix + other.matrix, f"({self.description}) + ({other.description})")

    def __sub__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        return self._wrap(self.matrix - other.matrix, f"({self.description}) - ({other.description})")

    def __matmul__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        return self._wrap(self.matrix @ other.matrix, f"({self.description})({other.description})")

    def __mul__(self, s: complex) -> "DiscreteOperator":
        return self._wrap(self.matrix * s, f"{s}*({self.description})")

    __rmul__ = __mul__

    def commutator(self, other: "DiscreteOperator") -> "DiscreteOperator":
        m = self.matrix @ other.matrix - other.matrix @ self.matrix
        return self._wrap(m, f"[{self.description}, {other.description}]")


def _kron_all(factors) -> sp.csr_matrix:
    out = sp.identity(1, dtype=complex, format="csr")
    for f in factors:
        out = sp.kron(out, f, format="csr")
    return out


def _embed(op1d, axis: int, params: QuantizationParams) -> sp.csr_matrix:
    sizes = params.shape
    factors = [sp.identity(n, dtype=complex, format="csr") for n in sizes]
    factors[axis] = sp.csr_matrix(op1d, dtype=complex)
    return _kron_all(factors)


def _axis_of_angle(space: ActionAngleSpace, angle: str) -> int:
    periodic = [y for _, y in space.periodic_pairs]
    noncompact = [y for _, y in space.noncompact_pairs]
    if angle in periodic:
        return periodic.index(angle)
    return len(periodic) + noncompact.index(angle)


def central_difference(n: int, h: float) -> sp.csr_matrix:
    """``(u[j+1] - u[j-1]) / 2h`` with zero values beyond the ends (antisymmetric)."""
    return sp.diags([np.full(n - 1, -1.0), np.full(n - 1, 1.0)], [-1, 1], format="csr") / (2.0 * h)


def angle_derivative(angle: str, params: QuantizationParams) -> sp.csr_matrix:
    """Matrix of ``d/d angle``: exact ``i n`` on modes, central differences on the grid."""
    space = params.space
    axis = _axis_of_angle(space, angle)
    if axis < params.n_periodic:
        return _embed(sp.diags(1j * params.mode_values), axis, params)
    g = axis - params.n_periodic
    return _embed(central_difference(params.grid[g][1], params.spacing(g)), axis, params)


def fourier_coefficients(
    e: ScalarExpr, params: QuantizationParams, max_degree: int | None = None
) -> dict[tuple[int, ...], np.ndarray]:
    """Fourier coefficients in the periodic angles of ``e``, sampled on the grid.

    Returns ``{k: c_k}`` with ``c_k`` of shape ``params.grid_shape`` and
    ``e = sum_k c_k exp(i k.alpha)``. Only harmonics up to ``max_degree``
    (default ``2 kmax``) are returned. Raises UnsupportedObservableError if
    ``e`` is not a trigonometric polynomial in the periodic angles.
    """
    space = params.space
    periodic = [y for _, y in space.periodic_pairs]
    noncompact = [y for _, y in space.noncompact_pairs]
    r = len(periodic)
    max_degree = 2 * params.kmax if max_degree is None else max_degree
    depends = bool(variables(e) & set(periodic))
    if not depends:
        values = _sample(e, params, periodic, noncompact, None)
        return {(0,) * r: values.reshape(params.grid_shape)}

    cap = max(16, max_degree)
    m1 = 4 * cap
    m2 = m1 + 8
    c1 = _fft_coefficients(e, params, periodic, noncompact, m1)
    c2 = _fft_coefficients(e, params, periodic, noncompact, m2)
    scale = max(1.0, float(np.max(np.abs(c1))))
    tol = 1e-12 * scale
    freqs1 = np.rint(np.fft.fftfreq(m1) * m1).astype(int)
    freqs2 = np.rint(np.fft.fftfreq(m2) * m2).astype(int)
    high = np.zeros((m1,) * r, dtype=bool)
    for axis in range(r):
        shape = [1] * r
        shape[axis] = m1
        high |= (np.abs(freqs1) > cap).reshape(shape)
    if np.any(np.abs(c1[high]) > tol):
        raise UnsupportedObservableError(
            f"{to_string(e)!r} is not a trigonometric polynomial of degree <= {cap} in {periodic}"
        )
    out = {}
    for k in np.ndindex(*((2 * cap + 1,) * r)):
        k = tuple(v - cap for v in k)
        i1 = tuple(int(np.flatnonzero(freqs1 == v)[0]) for v in k)
        i2 = tuple(int(np.flatnonzero(freqs2 == v)[0]) for v in k)
        if np.any(np.abs(c1[i1] - c2[i2]) > tol):
            raise UnsupportedObservableError(f"{to_string(e)!r} is not a trigonometric polynomial")
        if max(abs(v) for v in k) > max_degree:
            continue
        ck = np.where(np.abs(c1[i1]) > 1e-14 * scale, c1[i1], 0.0)
        if np.any(ck != 0):
            out[k] = ck
    # real input: enforce c_{-k} = conj(c_k) exactly
    sym = {}
    for k, ck in out.items():
        mk = tuple(-v for v in k)
        cm = out.get(mk, np.zeros_like(ck))
        sym[k] = 0.5 * (ck + np.conj(cm))
    return sym


def _sample(e, params, periodic, noncompact, m):
    """Evaluate ``e`` on ([m] * r periodic samples) x grid, broadcast to full shape."""
    r, s = len(periodic), len(noncompact)
    ndim = (r if m else 0) + s
    point = {}
    if m:
        alpha = 2.0 * np.pi * np.arange(m) / m
        for i, y in enumerate(periodic):
            shape = [1] * ndim
            shape[i] = m
            point[y] = alpha.reshape(shape)
    off = r if m else 0
    for a, q in enumerate(noncompact):
        shape = [1] * ndim
        shape[off + a] = params.grid[a][1]
        point[q] = params.grid_points(a).reshape(shape)
    full = ((m,) * r if m else ()) + params.grid_shape
    return np.broadcast_to(np.asarray(evaluate(e, point), dtype=float), full)


def _fft_coefficients(e, params, periodic, noncompact, m):
    values = _sample(e, params, periodic, noncompact, m)
    r = len(periodic)
    return np.fft.fftn(values, axes=tuple(range(r))) / float(m) ** r


def multiplication_operator(e: ScalarExpr, params: QuantizationParams) -> sp.csr_matrix:
    """Matrix of multiplication by a real function of the angles."""
    if isinstance(e, Const):
        return sp.identity(params.dim, dtype=complex, format="csr") * e.value
    K = params.kmax
    n_modes = 2 * K + 1
    out = sp.csr_matrix((params.dim, params.dim), dtype=complex)
    for k, ck in fourier_coefficients(e, params).items():
        # (T_k)_{nm} = 1 iff n - m = k
        shifts = [sp.eye(n_modes, k=-v, dtype=complex, format="csr") for v in k]
        out = out + sp.kron(_kron_all(shifts), sp.diags(ck.ravel().astype(complex)), format="csr")
    return out


def quantize_observable(f: AffineObservable, params: QuantizationParams) -> DiscreteOperator:
    if f.space != params.space:
        raise ValueError("observable and parameters refer to different spaces")
    space = params.space
    lam = dict(zip([a for a, _ in space.periodic_pairs], params.lambdas))
    m = multiplication_operator(f.offset, params) if f.offset != ZERO else sp.csr_matrix(
        (params.dim, params.dim), dtype=complex
    )
    for action, a in f.coefficients:
        A = multiplication_operator(a, params)
        D = angle_derivative(space.conjugate(action), params)
        m = m + (-0.5j) * (A @ D + D @ A)
        if action in lam and lam[action] != 0.0:
            m = m - lam[action] * A
    return DiscreteOperator(m.tocsr(), params, str(f))


# ------------------------------------------------------ functions of actions


def hamiltonian_operator(
    H: ScalarExpr | str,
    params: QuantizationParams,
    constants: Mapping[str, float] | None = None,
    description: str | None = None,
) -> DiscreteOperator:
    """Operator ``H(J^)`` of a polynomial in the action symbols.

    Each Fourier mode ``n`` carries ``H(J_i^, n_mu - lambda_mu)``. When ``H``
    involves only the torus actions the matrix is diagonal and its entries
    are ``H`` evaluated at ``n_mu - lambda_mu``.
    """
    space = params.space
    if isinstance(H, str):
        H = parse(H, set(space.actions) | set(constants or {}), constants)
    elif constants:
        H = substitute(H, constants)
    actions = space.actions
    for name in variables(H):
        if name not in actions:
            raise UnknownIdentifierError(name)
    poly = polynomial_coefficients(H, actions)
    degree = max((sum(k) for k in poly), default=0)
    if degree > MAX_POLY_DEGREE:
        raise NotPolynomialError(f"degree {degree} exceeds the cap of {MAX_POLY_DEGREE}")
    description = description or to_string(H)
    torus = [a for a, _ in space.periodic_pairs]

    if variables(H) <= set(torus):
        r = params.n_periodic
        point = {}
        for i, (a, lam) in enumerate(zip(torus, params.lambdas)):
            shape = [1] * r
            shape[i] = 2 * params.kmax + 1
            point[a] = (params.mode_values - lam).reshape(shape)
        vals = np.broadcast_to(np.asarray(evaluate(H, point), dtype=float), params.mode_shape)
        grid_size = int(np.prod(params.grid_shape, dtype=int))
        diag = np.repeat(vals.ravel(), grid_size)
        return DiscreteOperator(sp.diags(diag.astype(complex), format="csr"), params, description)

    J = {a: quantize_observable(AffineObservable(space, ((a, Const(1.0)),)), params).matrix for a in actions}
    eye = sp.identity(params.dim, dtype=complex, format="csr")
    total = sp.csr_matrix((params.dim, params.dim), dtype=complex)
    for exps, c in sorted(poly.items()):
        term = eye
        for a, e in zip(actions, exps):
            for _ in range(e):
                term = term @ J[a]
        total = total + c * term
    return DiscreteOperator(total.tocsr(), params, description)


def casimir_operator(C, params, constants=None) -> DiscreteOperator:
    """Operator of a Casimir function written in the actions; same law as hamiltonian_operator."""
    return hamiltonian_operator(C, params, constants)

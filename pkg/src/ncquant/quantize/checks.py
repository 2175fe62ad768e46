"""Verification of the quantized algebra: the commutator/bracket correspondence,
ordering ambiguities, self-adjointness, spectra and gauge equivalence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..expr import ScalarExpr, differentiate, evaluate, parse, variables
from ..poisson import bracket
from .operators import (
    AffineObservable,
    DiscreteOperator,
    multiplication_operator,
    quantize_observable,
)
from .space import QuantizationParams
from .wavefunction import WaveFunction, inner_product

__all__ = [
    "NonHermitianError",
    "interior_norm",
    "dirac_residual_operator",
    "dirac_residual",
    "dirac_consistency_residual",
    "DiracConvergence",
    "dirac_convergence",
    "WitnessResult",
    "noncommutativity_witness",
    "spectrum",
    "GaugeReport",
    "gauge_spectrum_check",
    "self_adjointness_residual",
    "EXACT_TOL",
]

EXACT_TOL = 1e-12
MERGE_TOL = 1e-9


class NonHermitianError(ValueError):
    pass


def interior_norm(op: DiscreteOperator | sp.spmatrix, params: QuantizationParams, margin: int = 2) -> float:
    """Max column-sum norm of the operator restricted to interior indices."""
    m = op.matrix if isinstance(op, DiscreteOperator) else sp.csr_matrix(op)
    idx = np.flatnonzero(params.interior_mask(margin).ravel())
    sub = m[idx][:, idx]
    if sub.nnz == 0:
        return 0.0
    return float(np.max(np.asarray(abs(sub).sum(axis=0))))


def _as_observable(f, params) -> AffineObservable:
    if isinstance(f, AffineObservable):
        return f
    return AffineObservable.from_expr(f, params.space)


def dirac_residual_operator(f, g, params: QuantizationParams) -> DiscreteOperator:
    """``[f^, g^] + i {f, g}^``; zero when the correspondence holds exactly."""
    f, g = _as_observable(f, params), _as_observable(g, params)
    F = quantize_observable(f, params)
    G = quantize_observable(g, params)
    fg = bracket(f.to_expr(), g.to_expr(), params.space.bivector)
    B = quantize_observable(AffineObservable.from_expr(fg, params.space), params)
    return F.commutator(G) + 1j * B


def dirac_residual(f, g, params: QuantizationParams, margin: int = 2) -> float:
    """Interior operator norm of ``[f^, g^] + i {f, g}^``.

    Exact (rounding level) in the Fourier sector. Along noncompact angles the
    discrete commutator of a difference operator with a multiplication is
    only weakly consistent, so this norm stays O(1) there; use
    dirac_consistency_residual for convergence.
    """
    return interior_norm(dirac_residual_operator(f, g, params), params, margin)


def dirac_consistency_residual(f, g, params: QuantizationParams, probe: WaveFunction | None = None, margin: int = 2) -> float:
    """Max modulus of ``([f^, g^] + i {f, g}^) psi`` over interior indices for a smooth probe."""
    probe = probe or WaveFunction.smooth_probe(params)
    R = dirac_residual_operator(f, g, params)
    out = R.matrix @ probe.vector
    mask = params.interior_mask(margin).ravel()
    return float(np.max(np.abs(out[mask]))) if mask.any() else 0.0


@dataclass(frozen=True)
class DiracConvergence:
    grid_n: tuple[int, ...]
    spacings: tuple[float, ...]
    residuals: tuple[float, ...]
    order: float | None

    @property
    def exact(self) -> bool:
        return max(self.residuals) < EXACT_TOL

    def passed(self, min_order: float = 1.8) -> bool:
        return self.exact or (self.order is not None and self.order >= min_order)


def dirac_convergence(f, g, params: QuantizationParams, ladder=(51, 101, 201)) -> DiracConvergence:
    """Consistency residual on a ladder of grid sizes (same half-widths) and its fitted order."""
    residuals, spacings = [], []
    for n in ladder:
        p = params.replace(grid=tuple((L, n) for L, _ in params.grid))
        residuals.append(dirac_consistency_residual(f, g, p))
        spacings.append(p.spacing(0) if p.grid else float("nan"))
    order = None
    if params.grid and max(residuals) >= EXACT_TOL:
        slope = np.polyfit(np.log(spacings), np.log(residuals), 1)[0]
        order = float(slope)
    return DiracConvergence(tuple(ladder), tuple(spacings), tuple(residuals), order)


@dataclass(frozen=True)
class WitnessResult:
    measured: float
    analytic: float

    @property
    def vanishes(self) -> bool:
        return self.measured == 0.0 and self.analytic == 0.0


def noncommutativity_witness(a: ScalarExpr | str, action: str, params: QuantizationParams, margin: int = 2) -> WitnessResult:
    """Compare ``a^ J^`` with ``(a J)^`` for a function ``a`` of the angles.

    The difference is multiplication by ``(i/2) d a / d y`` with ``y`` the angle
    conjugate to ``action``; returns its measured interior norm and
    ``max |d a / d y| / 2`` over the interior sample points.
    """
    space = params.space
    if isinstance(a, str):
        a = parse(a, space.chart)
    A = DiscreteOperator(multiplication_operator(a, params), params, f"{a}")
    J = quantize_observable(AffineObservable(space, ((action, 1.0),)), params)
    aJ = quantize_observable(AffineObservable(space, ((action, a),)), params)
    measured = interior_norm(A @ J - aJ, params, margin)

    da = differentiate(a, space.conjugate(action))
    if not variables(da):
        analytic = 0.5 * abs(evaluate(da, {}))
    else:
        point = {}
        periodic = [y for _, y in space.periodic_pairs]
        noncompact = [y for _, y in space.noncompact_pairs]
        ndim = len(periodic) + len(noncompact)
        samples = 2 * 64
        for i, y in enumerate(periodic):
            shape = [1] * ndim
            shape[i] = samples
            point[y] = (2 * np.pi * np.arange(samples) / samples).reshape(shape)
        for j, q in enumerate(noncompact):
            N = params.grid[j][1]
            shape = [1] * ndim
            shape[len(periodic) + j] = N - 2 * margin
            point[q] = params.grid_points(j)[margin : N - margin].reshape(shape)
        analytic = 0.5 * float(np.max(np.abs(evaluate(da, point))))
    return WitnessResult(measured, analytic)


# ---------------------------------------------------------------- spectra


def spectrum(op: DiscreteOperator, count: int | None = None, tol: float = 1e-8) -> list[tuple[float, int]]:
    """Ascending eigenvalues with multiplicities (values within 1e-9 merged).

    Diagonal operators are read off directly; otherwise a dense Hermitian
    eigensolver is used. ``count`` keeps the lowest eigenvalues only.
    """
    res = op.hermitian_residual()
    if res > tol:
        raise NonHermitianError(f"operator is not Hermitian (residual {res:.3g} > {tol:.3g})")
    if op.is_diagonal():
        vals = np.sort(op.matrix.diagonal().real)
    else:
        vals = scipy.linalg.eigvalsh(op.dense())
    if count is not None:
        vals = vals[:count]
    out: list[tuple[float, int]] = []
    start = None
    for v in vals:
        if start is not None and v - start <= MERGE_TOL:
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((float(v), 1))
            start = v
    return out


@dataclass(frozen=True)
class GaugeReport:
    lam: float
    lam_prime: float
    window: tuple[float, float]
    matched: int
    mismatches: tuple[float, ...]
    integer_difference: bool

    @property
    def agree(self) -> bool:
        return self.matched > 0 and not self.mismatches


def gauge_spectrum_check(lam: float, lam_prime: float, params: QuantizationParams, action: str | None = None) -> GaugeReport:
    """Compare the spectra of ``J^`` for two flat-connection parameters.

    Integer differences are gauge equivalent: the truncated spectra agree on
    the window ``[-K + |d|, K - |d|] - lam``, ``d = lam - lam_prime``, i.e.
    the symmetric window shifted along with the first spectrum.
    """
    space = params.space
    torus = [a for a, _ in space.periodic_pairs]
    if not torus:
        raise ValueError("the space has no periodic angle")
    action = action or torus[0]
    mu = torus.index(action)
    d = lam - lam_prime
    integer = math.isclose(d, round(d), abs_tol=1e-12)

    def values(lv):
        lambdas = list(params.lambdas)
        lambdas[mu] = lv
        p = params.replace(lambdas=tuple(lambdas))
        J = quantize_observable(AffineObservable(space, ((action, 1.0),)), p)
        return spectrum(J)

    lo, hi = -params.kmax + abs(d) - lam, params.kmax - abs(d) - lam
    s1 = [(v, m) for v, m in values(lam) if lo - MERGE_TOL <= v <= hi + MERGE_TOL]
    s2 = [(v, m) for v, m in values(lam_prime) if lo - MERGE_TOL <= v <= hi + MERGE_TOL]
    matched, mismatches = 0, []
    i = j = 0
    while i < len(s1) or j < len(s2):
        if i < len(s1) and j < len(s2) and abs(s1[i][0] - s2[j][0]) <= MERGE_TOL:
            if s1[i][1] == s2[j][1]:
                matched += 1
            else:
                mismatches.append(s1[i][0])
            i += 1
            j += 1
        elif j >= len(s2) or (i < len(s1) and s1[i][0] < s2[j][0]):
            mismatches.append(s1[i][0])
            i += 1
        else:
            mismatches.append(s2[j][0])
            j += 1
    return GaugeReport(lam, lam_prime, (lo, hi), matched, tuple(mismatches), integer)


def self_adjointness_residual(op: DiscreteOperator, params: QuantizationParams | None = None, pairs: int = 20, seed: int = 42) -> float:
    """Max ``|<op psi, phi> - <psi, op phi>|`` over seeded random compact-support pairs."""
    params = params or op.params
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        psi = WaveFunction.random_compact(params, rng)
        phi = WaveFunction.random_compact(params, rng)
        d = inner_product(op.apply(psi), phi) - inner_product(psi, op.apply(phi))
        worst = max(worst, abs(d))
    return worst

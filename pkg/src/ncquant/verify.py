"""The full verification battery for the so(3) example and its quantization.

Every check returns ``(residual, tolerance)`` and passes iff
``residual <= tolerance``. All sampling draws from one generator seeded
with ``seed``, consumed in a fixed order, so reports are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .expr import evaluate
from .poisson import (
    bracket,
    casimir_residual,
    corank_at,
    hamiltonian_vector_field,
    structure_matrix,
    wedge_determinant,
)
from .quantize import (
    ActionAngleSpace,
    AffineObservable,
    QuantizationParams,
    dirac_convergence,
    dirac_residual,
    gauge_spectrum_check,
    hamiltonian_operator,
    interior_norm,
    noncommutativity_witness,
    quantize_observable,
    self_adjointness_residual,
    spectrum,
)
from .so3 import So3Model, from_action_angle, to_action_angle

__all__ = ["Check", "run_verification", "top_closed_form", "TORUS_DIRAC_PAIRS", "GRID_DIRAC_PAIRS", "REAL_OBSERVABLES"]

# observables on the so(3) action-angle space: r <-> alpha (periodic), x1 <-> gamma (noncompact)
TORUS_DIRAC_PAIRS = (
    ("r", "sin(alpha)"),
    ("r", "cos(2*alpha) + sin(alpha)^2"),
    ("cos(alpha)*r", "sin(alpha)*r + cos(alpha)"),
)
GRID_DIRAC_PAIRS = (
    ("x1", "gamma^3"),
    ("x1", "sin(gamma)"),
    ("sin(gamma)*x1", "gamma^2*x1"),
    ("cos(alpha)*x1 + r", "sin(gamma)*r + gamma^2"),
)
REAL_OBSERVABLES = (
    "r",
    "x1",
    "sin(alpha)",
    "gamma^2",
    "sin(gamma)*x1 + cos(alpha)*r + gamma",
    "cos(alpha)*x1 + sin(2*alpha)*r",
)
DIRAC_LADDER = (51, 101, 201)


@dataclass(frozen=True)
class Check:
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_json(self) -> dict:
        return {"pass": self.passed, "residual": float(self.residual), "tolerance": float(self.tolerance)}


def top_closed_form(inertia: float, lam: float, kmax: int) -> list[tuple[float, int]]:
    """Levels ``I (k - lam)^2 / 2``, k in [-K, K], with their multiplicities."""
    vals = sorted(0.5 * inertia * (k - lam) ** 2 for k in range(-kmax, kmax + 1))
    out: list[tuple[float, int]] = []
    for v in vals:
        if out and v - out[-1][0] <= 1e-9:
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((v, 1))
    return out


def _torus_space() -> ActionAngleSpace:
    return ActionAngleSpace.canonical(periodic=[("r", "alpha")])


def run_verification(
    lambdas=(0.0,),
    kmax: int = 5,
    grid_n: int = 201,
    grid_l: float = 10.0,
    inertia: float = 1.0,
    seed: int = 42,
) -> dict[str, Check]:
    rng = np.random.default_rng(seed)
    model = So3Model.build(inertia)
    lam = float(lambdas[0])
    checks: dict[str, Check] = {}

    # -- classical so(3)
    lp = model.lie_poisson
    H = model.integrals
    pts = model.random_coalgebra_points(rng, 100)
    worst = 0.0
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        b = bracket(H[i], H[j], lp)
        worst = max(worst, max(abs(evaluate(b, p) - p[f"x{k + 1}"]) for p in pts))
    checks["so3.bracket_table"] = Check(worst, 1e-10)

    S = structure_matrix(list(H), lp)
    generic = model.random_coalgebra_points(rng, 50)
    checks["so3.corank_generic"] = Check(max(abs(corank_at(S, p) - 1) for p in generic), 0)
    checks["so3.corank_origin"] = Check(abs(corank_at(S, {"x1": 0.0, "x2": 0.0, "x3": 0.0}) - 3), 0)

    checks["so3.casimir"] = Check(casimir_residual(model.casimir, lp, model.random_coalgebra_points(rng, 100)), 1e-10)
    checks["so3.chart_cis"] = Check(model.chart_cis_relations(model.random_chart_points(rng, 50)).max_deviation, 1e-12)

    fields = model.integral_vector_fields()
    chart_pts = model.random_chart_points(rng, 50)
    checks["so3.wedge_independence"] = Check(max(abs(wedge_determinant(fields, p) - p["r"]) for p in chart_pts), 1e-9)

    worst = 0.0
    for p in model.random_coalgebra_points(rng, 100):
        x = (p["x1"], p["x2"], p["x3"])
        back = from_action_angle(*to_action_angle(x))
        worst = max(worst, max(abs(a - b) for a, b in zip(back, x)))
    checks["so3.chart_roundtrip"] = Check(worst, 1e-12)

    worst = 0.0
    for v, h in zip(fields, model.aa_integrals):
        hv = hamiltonian_vector_field(h, model.aa_bivector)
        worst = max(worst, max(float(np.max(np.abs(v.at(p) - hv.at(p)))) for p in chart_pts))
    checks["so3.integral_fields"] = Check(worst, 1e-9)

    worst = 0.0
    for i in range(3):
        eps = model.coadjoint_field(i + 1)
        hv = hamiltonian_vector_field(H[i], lp)
        worst = max(worst, max(float(np.max(np.abs(eps.at(p) - hv.at(p)))) for p in pts[:20]))
        worst = max(worst, max(abs(evaluate(eps.apply(model.casimir), p)) for p in pts[:20]))
    checks["so3.coadjoint_fields"] = Check(worst, 1e-12)

    worst = 0.0
    pull_pts = model.random_coalgebra_points(rng, 50)
    for i, j in itertools.combinations(range(3), 2):
        lhs = bracket(H[i], H[j], lp)
        rhs = bracket(model.aa_integrals[i], model.aa_integrals[j], model.aa_bivector)
        for p in pull_pts:
            worst = max(worst, abs(evaluate(lhs, p) - evaluate(rhs, model.lift_point(p))))
    checks["so3.pullback_consistency"] = Check(worst, 1e-9)
    checks["so3.darboux"] = Check(model.darboux_residual(pull_pts), 1e-9)

    h_co, h_aa = model.hamiltonian, model.aa_hamiltonian
    checks["so3.hamiltonian"] = Check(
        max(abs(evaluate(h_co, p) - evaluate(h_aa, model.lift_point(p))) for p in pull_pts), 1e-12
    )
    jac_pts = model.random_coalgebra_points(rng, 20)
    checks["poisson.jacobi_lie_poisson"] = Check(lp.jacobi_residual(jac_pts), 1e-10)
    checks["poisson.jacobi_action_angle"] = Check(model.aa_bivector.jacobi_residual(chart_pts[:20]), 1e-10)

    # -- quantization, torus-only space (spectra)
    torus = _torus_space()
    tp = QuantizationParams(torus, (lam,), kmax)
    J = quantize_observable(AffineObservable(torus, (("r", 1.0),)), tp)
    expected = sorted(n - lam for n in range(-kmax, kmax + 1))
    got = [v for v, m in spectrum(J) for _ in range(m)]
    checks["quantize.action_spectrum"] = Check(
        max(abs(a - b) for a, b in zip(got, expected)) if len(got) == len(expected) else float("inf"), 0.0
    )
    g = gauge_spectrum_check(lam, lam + 1.0, tp)
    checks["quantize.gauge_integer_shift"] = Check(len(g.mismatches) + (0 if g.matched else 1), 0)

    top = hamiltonian_operator("0.5*I*r^2", tp, {"I": inertia})
    closed = top_closed_form(inertia, lam, kmax)
    levels = spectrum(top)
    diag = sorted(top.matrix.diagonal().real)
    exact = sorted(0.5 * inertia * (k - lam) ** 2 for k in range(-kmax, kmax + 1))
    checks["quantize.top_spectrum"] = Check(max(abs(a - b) for a, b in zip(diag, exact)), 0.0)
    checks["quantize.top_degeneracy"] = Check(
        0 if [m for _, m in levels] == [m for _, m in closed] else 1, 0
    )
    checks["quantize.top_commutator"] = Check(interior_norm(top.commutator(J), tp, 0), 1e-12)

    # -- quantization, full so(3) action-angle space
    space = model.action_angle_space()
    params = QuantizationParams(space, (lam,), kmax, ((grid_l, grid_n),))
    checks["quantize.dirac_torus"] = Check(max(dirac_residual(f, g, params) for f, g in TORUS_DIRAC_PAIRS), 1e-12)
    worst = 0.0
    for f, gg in GRID_DIRAC_PAIRS:
        conv = dirac_convergence(f, gg, params, DIRAC_LADDER)
        worst = max(worst, 0.0 if conv.exact else abs(conv.order - 2.0))
    checks["quantize.dirac_grid_order"] = Check(worst, 0.2)

    w201 = params.replace(grid=((grid_l, 201),))
    wit = noncommutativity_witness("sin(gamma)", "x1", w201)
    checks["quantize.witness"] = Check(abs(wit.measured - wit.analytic), 1e-3)

    worst = 0.0
    for f in REAL_OBSERVABLES:
        op = quantize_observable(AffineObservable.from_expr(f, space), params)
        worst = max(worst, self_adjointness_residual(op, params, 20, int(rng.integers(2**31))))
    checks["quantize.self_adjoint"] = Check(worst, 1e-10)

    f = AffineObservable.from_expr("sin(gamma)*x1 + cos(alpha)*r", space)
    g2 = AffineObservable.from_expr("gamma^2*x1 + sin(alpha) + 3", space)
    c = 2.5
    fg = AffineObservable.from_expr(f.to_expr() + c * g2.to_expr(), space)
    lhs = quantize_observable(fg, params).matrix
    rhs = quantize_observable(f, params).matrix + c * quantize_observable(g2, params).matrix
    diff = lhs - rhs
    checks["quantize.linearity"] = Check(float(np.max(np.abs(diff.data))) if diff.nnz else 0.0, 1e-12)

    one = quantize_observable(AffineObservable(space, (), 1.0), params)
    d = one.matrix - sp.identity(params.dim, dtype=complex, format="csr")
    checks["quantize.identity"] = Check(float(np.max(np.abs(d.data))) if d.nnz else 0.0, 0.0)

    worst = 0.0
    for h in ("2*r + 1", "x1 - 3", "0.5*r + 2*x1"):
        a = hamiltonian_operator(h, params).matrix
        b = quantize_observable(AffineObservable.from_expr(h, space), params).matrix
        dd = a - b
        worst = max(worst, float(np.max(np.abs(dd.data))) if dd.nnz else 0.0)
    checks["quantize.affine_hamiltonian_agreement"] = Check(worst, 1e-12)

    return dict(sorted(checks.items()))

"""The so(3) example: Lie-Poisson structure on the coalgebra, its action-angle
chart ``(r, x1, gamma, alpha)`` and the spherical top ``H = I r^2 / 2``.

On the coalgebra the integrals of motion are the coordinates themselves,
``H_i = x_i``, with ``{x1, x2} = x3`` and cyclic. The chart map is::

    r  = sqrt(x1^2 + x2^2 + x3^2)
    x2 = sqrt(r^2 - x1^2) sin(gamma)
    x3 = sqrt(r^2 - x1^2) cos(gamma)

and ``alpha`` is the flow parameter of the Hamiltonian vector field of ``r``.
It is never computed from coalgebra data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import ACTION, NONCOMPACT, PERIODIC, Chart, ScalarExpr, Var, evaluate, parse
from .poisson import (
    PoissonBivector,
    VectorField,
    bracket,
    canonical_bivector,
    lie_poisson,
)

__all__ = [
    "SingularChartError",
    "SO3_STRUCTURE_CONSTANTS",
    "So3Model",
    "CisReport",
    "to_action_angle",
    "from_action_angle",
]

TWO_PI = 2.0 * math.pi


class SingularChartError(ValueError):
    """The point lies on the poles ``r = |x1|`` where the chart degenerates."""


def _levi_civita() -> np.ndarray:
    c = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return c


SO3_STRUCTURE_CONSTANTS = _levi_civita()


def to_action_angle(x) -> tuple[float, float, float]:
    """Coalgebra point ``(x1, x2, x3)`` to ``(r, x1, gamma)``, gamma in (-pi, pi]."""
    x1, x2, x3 = (float(v) for v in x)
    if x2 == 0.0 and x3 == 0.0:
        raise SingularChartError(f"point {(x1, x2, x3)} lies on the singular locus x2 = x3 = 0")
    r = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
    gamma = math.atan2(x2, x3)
    if gamma == -math.pi:
        gamma = math.pi
    return r, x1, gamma


def from_action_angle(r: float, x1: float, gamma: float) -> tuple[float, float, float]:
    if not r > abs(x1):
        raise SingularChartError(f"need r > |x1|, got r={r}, x1={x1}")
    rho = math.sqrt(r * r - x1 * x1)
    return x1, rho * math.sin(gamma), rho * math.cos(gamma)


@dataclass(frozen=True)
class CisReport:
    """Max deviations of ``{r, x1}``, ``{r, gamma}``, ``{x1, gamma}`` from (0, 0, 1)."""

    n_points: int
    deviation_r_x1: float
    deviation_r_gamma: float
    deviation_x1_gamma: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviation_r_x1, self.deviation_r_gamma, self.deviation_x1_gamma)


@dataclass(frozen=True)
class So3Model:
    coalgebra_chart: Chart
    aa_chart: Chart
    lie_poisson: PoissonBivector
    aa_bivector: PoissonBivector
    integrals: tuple[ScalarExpr, ScalarExpr, ScalarExpr]
    aa_integrals: tuple[ScalarExpr, ScalarExpr, ScalarExpr]
    casimir: ScalarExpr
    inertia: float = 1.0

    @classmethod
    def build(cls, inertia: float = 1.0) -> "So3Model":
        if not inertia > 0:
            raise ValueError("the rotational constant must be positive")
        coalgebra = Chart.of("x1", "x2", "x3")
        aa = Chart.of(("r", ACTION), ("x1", ACTION), ("gamma", NONCOMPACT), ("alpha", PERIODIC, TWO_PI))
        lp = lie_poisson(coalgebra, SO3_STRUCTURE_CONSTANTS)
        W = canonical_bivector(aa, [("r", "alpha"), ("x1", "gamma")])
        integrals = tuple(Var(n) for n in coalgebra.names)
        aa_integrals = (
            parse("x1", aa),
            parse("sqrt(r^2 - x1^2)*sin(gamma)", aa),
            parse("sqrt(r^2 - x1^2)*cos(gamma)", aa),
        )
        casimir = parse("sqrt(x1^2 + x2^2 + x3^2)", coalgebra)
        return cls(coalgebra, aa, lp, W, integrals, aa_integrals, casimir, float(inertia))

    # -- functions on the two charts

    @property
    def hamiltonian(self) -> ScalarExpr:
        """``I (H1^2 + H2^2 + H3^2) / 2`` on the coalgebra."""
        return parse(f"0.5*{self.inertia!r}*(x1^2 + x2^2 + x3^2)", self.coalgebra_chart)

    @property
    def aa_hamiltonian(self) -> ScalarExpr:
        """``I r^2 / 2`` on the action-angle chart."""
        return parse(f"0.5*{self.inertia!r}*r^2", self.aa_chart)

    def coadjoint_field(self, i: int) -> VectorField:
        """Coadjoint generator ``e_i`` with ``e_i(x_j) = c_ij^h x_h``, as displayed for so(3)."""
        displayed = {
            1: ("0", "x3", "-x2"),
            2: ("-x3", "0", "x1"),
            3: ("x2", "-x1", "0"),
        }
        if i not in displayed:
            raise IndexError(f"so(3) has generators 1..3, got {i}")
        return VectorField(self.coalgebra_chart, tuple(parse(s, self.coalgebra_chart) for s in displayed[i]))

    def integral_vector_fields(self) -> tuple[VectorField, VectorField, VectorField]:
        """Hamiltonian vector fields of H1, H2, H3 written out on the (r, x1, gamma, alpha) chart."""
        c = self.aa_chart
        rows = [
            ("0", "0", "1", "0"),
            (
                "0",
                "-sqrt(r^2 - x1^2)*cos(gamma)",
                "-x1/sqrt(r^2 - x1^2)*sin(gamma)",
                "r/sqrt(r^2 - x1^2)*sin(gamma)",
            ),
            (
                "0",
                "sqrt(r^2 - x1^2)*sin(gamma)",
                "-x1/sqrt(r^2 - x1^2)*cos(gamma)",
                "r/sqrt(r^2 - x1^2)*cos(gamma)",
            ),
        ]
        return tuple(VectorField(c, tuple(parse(s, c) for s in row)) for row in rows)

    def chart_cis_relations(self, points=None, n: int = 50, rng=None) -> CisReport:
        if points is None:
            points = self.random_chart_points(np.random.default_rng(rng), n)
        r, x1, gamma = Var("r"), Var("x1"), Var("gamma")
        W = self.aa_bivector
        pairs = [(bracket(r, x1, W), 0.0), (bracket(r, gamma, W), 0.0), (bracket(x1, gamma, W), 1.0)]
        devs = [max(abs(evaluate(b, p) - target) for p in points) for b, target in pairs]
        return CisReport(len(points), *devs)

    def darboux_residual(self, points) -> float:
        """Push the Lie-Poisson bivector forward through the chart map at coalgebra points.

        The result should be ``d/dx1 ^ d/dgamma`` with ``r`` a Casimir; returns the
        max entry deviation of the pushed-forward 3x3 matrix in (r, x1, gamma).
        """
        target = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
        worst = 0.0
        for p in points:
            x = np.array([p["x1"], p["x2"], p["x3"]])
            r = float(np.linalg.norm(x))
            rho2 = x[1] ** 2 + x[2] ** 2
            if rho2 == 0.0:
                raise SingularChartError("point on the singular locus")
            jac = np.array([x / r, [1.0, 0.0, 0.0], [0.0, x[2] / rho2, -x[1] / rho2]])
            w = self.lie_poisson.matrix_at(p)
            worst = max(worst, float(np.max(np.abs(jac @ w @ jac.T - target))))
        return worst

    def lift_point(self, p, alpha: float = 0.0) -> dict:
        """Coalgebra point to an action-angle chart point (alpha is a free parameter)."""
        r, x1, gamma = to_action_angle((p["x1"], p["x2"], p["x3"]))
        return {"r": r, "x1": x1, "gamma": gamma, "alpha": alpha}

    def action_angle_space(self):
        from .quantize import ActionAngleSpace

        return ActionAngleSpace(self.aa_chart, (("r", "alpha"), ("x1", "gamma")))

    # -- sampling

    @staticmethod
    def random_coalgebra_points(rng, n: int, scale: float = 2.0) -> list[dict]:
        """Uniform points in a cube, kept away from the origin and the x1 axis."""
        out = []
        while len(out) < n:
            x = rng.uniform(-scale, scale, size=3)
            if x[1] ** 2 + x[2] ** 2 > 1e-2:
                out.append({"x1": float(x[0]), "x2": float(x[1]), "x3": float(x[2])})
        return out

    @staticmethod
    def random_chart_points(rng, n: int) -> list[dict]:
        """Points with ``r`` in [0.5, 3] and ``|x1| <= 0.9 r``."""
        out = []
        for _ in range(n):
            r = rng.uniform(0.5, 3.0)
            out.append(
                {
                    "r": float(r),
                    "x1": float(r * rng.uniform(-0.9, 0.9)),
                    "gamma": float(rng.uniform(-math.pi, math.pi)),
                    "alpha": float(rng.uniform(0.0, TWO_PI)),
                }
            )
        return out

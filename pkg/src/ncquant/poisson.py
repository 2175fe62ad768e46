"""Poisson bivectors on a chart: brackets, Hamiltonian vector fields and
rank analysis of the bracket matrix of a family of integrals of motion.

Bracket convention::

    {f, g} = sum_ij W^ij  d_i f  d_j g

so a Darboux pair with ``W^{p,q} = +1`` gives ``{p, q} = 1`` and the
Hamiltonian vector field of ``p`` is ``d/dq``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .expr import (
    ZERO,
    Chart,
    Const,
    ScalarExpr,
    Var,
    add,
    as_expr,
    differentiate,
    evaluate,
    mul,
    parse,
    sub,
    variables,
)

__all__ = [
    "ChartMismatchError",
    "PoissonBivector",
    "VectorField",
    "StructureMatrix",
    "bracket",
    "hamiltonian_vector_field",
    "structure_matrix",
    "matrix_rank",
    "corank_at",
    "casimir_residual",
    "wedge_determinant",
    "lie_poisson",
    "canonical_bivector",
    "load_bivector",
]

Point = Mapping[str, float]


class ChartMismatchError(ValueError):
    pass


def _check_over(chart: Chart, *exprs: ScalarExpr):
    for e in exprs:
        extra = variables(e) - set(chart.names)
        if extra:
            raise ChartMismatchError(f"coordinates {sorted(extra)} are not in chart {chart.names}")


@dataclass(frozen=True)
class PoissonBivector:
    chart: Chart
    components: tuple[tuple[ScalarExpr, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(as_expr(c) for c in row) for row in self.components)
        n = len(self.chart)
        if len(comps) != n or any(len(row) != n for row in comps):
            raise ValueError(f"bivector components must be {n}x{n}")
        for row in comps:
            _check_over(self.chart, *row)
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_upper(cls, chart: Chart, entries: Mapping[tuple[str, str], object]) -> "PoissonBivector":
        """Build from ``{(x_i, x_j): W^ij}``; the transposed entries are filled by antisymmetry."""
        n = len(chart)
        comps = [[ZERO] * n for _ in range(n)]
        for (a, b), value in entries.items():
            i, j = chart.index(a), chart.index(b)
            if i == j:
                raise ValueError("diagonal bivector entries must vanish")
            e = parse(value, chart) if isinstance(value, str) else as_expr(value)
            comps[i][j] = e
            comps[j][i] = -e
        return cls(chart, tuple(tuple(r) for r in comps))

    def __getitem__(self, ij) -> ScalarExpr:
        i, j = ij
        if isinstance(i, str):
            i = self.chart.index(i)
        if isinstance(j, str):
            j = self.chart.index(j)
        return self.components[i][j]

    def matrix_at(self, point: Point) -> np.ndarray:
        n = len(self.chart)
        m = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                m[i, j] = evaluate(self.components[i][j], point)
        return m

    def antisymmetry_residual(self, points: Iterable[Point]) -> float:
        worst = 0.0
        for p in points:
            m = self.matrix_at(p)
            worst = max(worst, float(np.max(np.abs(m + m.T))))
        return worst

    def jacobi_residual(self, points: Iterable[Point]) -> float:
        """Max over points and index triples of the Jacobiator of the components."""
        n = len(self.chart)
        names = self.chart.names
        dW = [[[differentiate(self.components[j][k], x) for x in names] for k in range(n)] for j in range(n)]
        worst = 0.0
        for p in points:
            w = self.matrix_at(p)
            d = np.array([[[evaluate(dW[j][k][l], p) for l in range(n)] for k in range(n)] for j in range(n)])
            # jac[i,j,k] = sum_l W^li d_l W^jk + W^lj d_l W^ki + W^lk d_l W^ij
            t = np.einsum("li,jkl->ijk", w, d)
            jac = t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))
            worst = max(worst, float(np.max(np.abs(jac))))
        return worst

    def to_json(self) -> dict:
        from .expr import to_string

        return {
            "chart": self.chart.to_json(),
            "components": [[to_string(c) for c in row] for row in self.components],
        }


def load_bivector(source) -> PoissonBivector:
    """Load a bivector from a JSON document, a path to one, or an already decoded dict."""
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        data = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        data = json.loads(source)
    else:
        data = source
    chart = Chart.from_json(data["chart"])
    rows = tuple(tuple(parse(str(c), chart) for c in row) for row in data["components"])
    return PoissonBivector(chart, rows)


def lie_poisson(chart: Chart, structure_constants) -> PoissonBivector:
    """Linear bivector ``W^ij = c_ij^h x_h`` from structure constants ``c[i][j][h]``."""
    c = np.asarray(structure_constants, dtype=float)
    k = len(chart)
    if c.shape != (k, k, k):
        raise ValueError(f"structure constants must have shape {(k, k, k)}")
    if not np.allclose(c, -np.transpose(c, (1, 0, 2))):
        raise ValueError("structure constants must be antisymmetric in the first two indices")
    xs = [Var(n) for n in chart.names]
    comps = []
    for i in range(k):
        row = []
        for j in range(k):
            e = ZERO
            for h in range(k):
                if c[i, j, h] != 0.0:
                    e = add(e, mul(Const(c[i, j, h]), xs[h]))
            row.append(e)
        comps.append(tuple(row))
    return PoissonBivector(chart, tuple(comps))


def canonical_bivector(chart: Chart, pairs: Iterable[tuple[str, str]]) -> PoissonBivector:
    """Constant Darboux bivector ``sum d/dP ^ d/dQ`` over ``(P, Q)`` pairs."""
    return PoissonBivector.from_upper(chart, {(p, q): 1.0 for p, q in pairs})


# ---------------------------------------------------------------- brackets


def bracket(f: ScalarExpr, g: ScalarExpr, W: PoissonBivector) -> ScalarExpr:
    """Poisson bracket ``sum_{i<j} W^ij (d_i f d_j g - d_j f d_i g)``."""
    _check_over(W.chart, f, g)
    if f == g:
        return ZERO
    names = W.chart.names
    df = [differentiate(f, x) for x in names]
    dg = [differentiate(g, x) for x in names]
    out = ZERO
    n = len(names)
    for i in range(n):
        for j in range(i + 1, n):
            wij = W.components[i][j]
            if wij == ZERO:
                continue
            out = add(out, mul(wij, sub(mul(df[i], dg[j]), mul(df[j], dg[i]))))
    return out


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple[ScalarExpr, ...]

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != len(self.chart):
            raise ValueError(f"vector field needs {len(self.chart)} components, got {len(comps)}")
        _check_over(self.chart, *comps)
        object.__setattr__(self, "components", comps)

    def at(self, point: Point) -> np.ndarray:
        return np.array([evaluate(c, point) for c in self.components], dtype=float)

    def apply(self, g: ScalarExpr) -> ScalarExpr:
        """Derivative of ``g`` along the field."""
        _check_over(self.chart, g)
        out = ZERO
        for x, v in zip(self.chart.names, self.components):
            out = add(out, mul(v, differentiate(g, x)))
        return out


def hamiltonian_vector_field(f: ScalarExpr, W: PoissonBivector) -> VectorField:
    """``v_f`` with ``v_f(g) = {f, g}``, i.e. ``v_f^j = sum_i W^ij d_i f``."""
    _check_over(W.chart, f)
    names = W.chart.names
    df = [differentiate(f, x) for x in names]
    comps = []
    for j in range(len(names)):
        e = ZERO
        for i in range(len(names)):
            e = add(e, mul(W.components[i][j], df[i]))
        comps.append(e)
    return VectorField(W.chart, tuple(comps))


# --------------------------------------------------------- rank analysis


@dataclass(frozen=True)
class StructureMatrix:
    """Matrix of brackets ``s_ij = {H_i, H_j}`` of k integrals of motion."""

    chart: Chart
    entries: tuple[tuple[ScalarExpr, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def at(self, point: Point) -> np.ndarray:
        k = self.size
        m = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                m[i, j] = evaluate(self.entries[i][j], point)
        return m


def structure_matrix(integrals: Sequence[ScalarExpr], W: PoissonBivector) -> StructureMatrix:
    _check_over(W.chart, *integrals)
    k = len(integrals)
    rows = [[ZERO] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            s = bracket(integrals[i], integrals[j], W)
            rows[i][j] = s
            rows[j][i] = -s
    return StructureMatrix(W.chart, tuple(tuple(r) for r in rows))


def matrix_rank(m: np.ndarray, rel_tol: float = 1e-10) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts as zero below ``rel_tol * max(max|m_ij|, 1)``.
    """
    a = np.array(m, dtype=float, copy=True)
    rows, cols = a.shape
    tau = rel_tol * max(float(np.max(np.abs(a))) if a.size else 0.0, 1.0)
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[p, c]) < tau:
            continue
        a[[rank, p]] = a[[p, rank]]
        a[rank + 1 :] -= np.outer(a[rank + 1 :, c] / a[rank, c], a[rank])
        rank += 1
    return rank


def corank_at(S: StructureMatrix, point: Point) -> int:
    return S.size - matrix_rank(S.at(point))


def casimir_residual(C: ScalarExpr, W: PoissonBivector, points: Iterable[Point]) -> float:
    """Max over points and coordinates ``x_j`` of ``|{C, x_j}|``."""
    _check_over(W.chart, C)
    brackets = [bracket(C, Var(x), W) for x in W.chart.names]
    worst = 0.0
    for p in points:
        for b in brackets:
            worst = max(worst, abs(evaluate(b, p)))
    return worst


def wedge_determinant(fields: Sequence[VectorField], point: Point) -> float:
    """Largest absolute maximal minor of the fields' component matrix at ``point``.

    Zero iff the fields are linearly dependent there.
    """
    if not fields:
        raise ValueError("need at least one vector field")
    chart = fields[0].chart
    if any(f.chart != chart for f in fields):
        raise ChartMismatchError("vector fields live on different charts")
    k, n = len(fields), len(chart)
    if k > n:
        raise ValueError(f"{k} vector fields on a {n}-dimensional chart are always dependent")
    m = np.array([f.at(point) for f in fields])
    return max(abs(float(np.linalg.det(m[:, list(cols)]))) for cols in itertools.combinations(range(n), k))

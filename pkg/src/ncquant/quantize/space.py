"""Action-angle phase spaces and discretization parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..expr import ACTION, NONCOMPACT, PERIODIC, Chart
from ..poisson import PoissonBivector, canonical_bivector

__all__ = ["ActionAngleSpace", "QuantizationParams"]


@dataclass(frozen=True)
class ActionAngleSpace:
    """A chart of action coordinates paired with their conjugate angles.

    ``pairs`` lists ``(action, angle)``; ``{action, angle} = 1`` under the
    canonical bivector. Periodic angles must have period 2*pi.
    """

    chart: Chart
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(a), str(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        used = [n for p in pairs for n in p]
        if sorted(used) != sorted(self.chart.names):
            raise ValueError(f"pairs {pairs} must use every chart coordinate exactly once")
        for action, angle in pairs:
            if self.chart[action].kind != ACTION:
                raise ValueError(f"{action!r} is not an action coordinate")
            c = self.chart[angle]
            if c.kind == ACTION:
                raise ValueError(f"{angle!r} is an action, not an angle")
            if c.kind == PERIODIC and not math.isclose(c.period, 2 * math.pi, rel_tol=1e-15):
                raise ValueError(f"periodic angle {angle!r} must have period 2*pi")

    @classmethod
    def canonical(
        cls,
        periodic: Sequence[tuple[str, str]] = (),
        noncompact: Sequence[tuple[str, str]] = (),
    ) -> "ActionAngleSpace":
        """Space ``T^r x R^s`` from ``(action, angle)`` pairs of each kind."""
        coords = [(a, ACTION) for a, _ in periodic] + [(a, ACTION) for a, _ in noncompact]
        coords += [(y, PERIODIC, 2 * math.pi) for _, y in periodic]
        coords += [(q, NONCOMPACT) for _, q in noncompact]
        return cls(Chart.of(*coords), tuple(periodic) + tuple(noncompact))

    @property
    def periodic_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(p for p in self.pairs if self.chart[p[1]].kind == PERIODIC)

    @property
    def noncompact_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(p for p in self.pairs if self.chart[p[1]].kind == NONCOMPACT)

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.pairs)

    @property
    def angles(self) -> tuple[str, ...]:
        return tuple(y for _, y in self.pairs)

    def conjugate(self, action: str) -> str:
        for a, y in self.pairs:
            if a == action:
                return y
        raise KeyError(f"{action!r} is not an action of this space")

    def is_periodic(self, action: str) -> bool:
        return self.chart[self.conjugate(action)].kind == PERIODIC

    @property
    def bivector(self) -> PoissonBivector:
        return canonical_bivector(self.chart, self.pairs)


@dataclass(frozen=True)
class QuantizationParams:
    """Fourier truncation ``|n_mu| <= kmax`` and uniform grids ``(L, N)`` on ``[-L, L]``.

    ``lambdas`` are the flat-connection parameters, one per periodic angle,
    stored as given (any real).
    """

    space: ActionAngleSpace
    lambdas: tuple[float, ...] = field(default=None)
    kmax: int = 5
    grid: tuple[tuple[float, int], ...] = field(default=None)

    def __post_init__(self):
        r = len(self.space.periodic_pairs)
        s = len(self.space.noncompact_pairs)
        lambdas = (0.0,) * r if self.lambdas is None else tuple(float(v) for v in self.lambdas)
        grid = ((10.0, 201),) * s if self.grid is None else tuple((float(L), int(N)) for L, N in self.grid)
        if len(lambdas) != r:
            raise ValueError(f"need {r} lambda values, got {len(lambdas)}")
        if len(grid) != s:
            raise ValueError(f"need {s} grid specs, got {len(grid)}")
        if int(self.kmax) != self.kmax or self.kmax < 1:
            raise ValueError(f"kmax must be an integer >= 1, got {self.kmax}")
        for L, N in grid:
            if not L > 0:
                raise ValueError(f"grid half-width must be positive, got {L}")
            if N < 3 or N % 2 == 0:
                raise ValueError(f"grid point count must be odd and >= 3, got {N}")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "kmax", int(self.kmax))

    @classmethod
    def build(cls, space, lambdas=None, kmax=5, L=10.0, N=201) -> "QuantizationParams":
        """Same grid ``(L, N)`` on every noncompact angle."""
        grid = ((L, N),) * len(space.noncompact_pairs)
        return cls(space, None if lambdas is None else tuple(lambdas), kmax, grid)

    def canonical_lambda(self) -> tuple[tuple[float, ...], tuple[int, ...]]:
        """Reduce each lambda into [0, 1); returns the reduced values and integer shifts."""
        shifts = tuple(int(math.floor(v)) for v in self.lambdas)
        return tuple(v - s for v, s in zip(self.lambdas, shifts)), shifts

    def replace(self, **changes) -> "QuantizationParams":
        return replace(self, **changes)

    # -- discretization geometry

    @property
    def n_periodic(self) -> int:
        return len(self.lambdas)

    @property
    def mode_values(self) -> np.ndarray:
        return np.arange(-self.kmax, self.kmax + 1, dtype=float)

    @property
    def mode_shape(self) -> tuple[int, ...]:
        return (2 * self.kmax + 1,) * self.n_periodic

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(N for _, N in self.grid)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mode_shape + self.grid_shape

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape, dtype=int))

    def grid_points(self, axis: int) -> np.ndarray:
        L, N = self.grid[axis]
        return np.linspace(-L, L, N)

    def spacing(self, axis: int) -> float:
        L, N = self.grid[axis]
        return 2.0 * L / (N - 1)

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Boolean mask over ``shape``: drops ``margin`` outer Fourier bands and grid layers."""
        if self.kmax - margin < 0:
            raise ValueError(f"kmax={self.kmax} leaves no interior Fourier bands for margin {margin}")
        masks = []
        for _ in range(self.n_periodic):
            masks.append(np.abs(self.mode_values) <= self.kmax - margin)
        for _, N in self.grid:
            if N - 2 * margin < 1:
                raise ValueError(f"grid of {N} points has no interior for margin {margin}")
            m = np.zeros(N, dtype=bool)
            m[margin : N - margin] = True
            masks.append(m)
        out = np.ones(self.shape, dtype=bool)
        for axis, m in enumerate(masks):
            shape = [1] * len(self.shape)
            shape[axis] = len(m)
            out &= m.reshape(shape)
        return out

    def to_json(self) -> dict:
        return {
            "pairs": [list(p) for p in self.space.pairs],
            "lambda": list(self.lambdas),
            "kmax": self.kmax,
            "grid": [{"L": L, "N": N} for L, N in self.grid],
        }

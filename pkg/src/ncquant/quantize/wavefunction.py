"""Wavefunctions as truncated Fourier series in the periodic angles with
coefficients sampled on the grid of the noncompact angles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .space import QuantizationParams

__all__ = ["WaveFunction", "inner_product", "trapezoid_weights"]


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """``psi = sum_n phi_n(q) exp(i n.alpha)`` stored as one complex array.

    The leading axes index Fourier modes ``n_mu = -K..K``; the trailing axes
    index grid points of the noncompact angles.
    """

    params: QuantizationParams
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != self.params.shape:
            raise ValueError(f"coefficient array has shape {c.shape}, expected {self.params.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def vector(self) -> np.ndarray:
        return self.coefficients.ravel()

    @classmethod
    def from_vector(cls, params: QuantizationParams, v) -> "WaveFunction":
        return cls(params, np.asarray(v).reshape(params.shape))

    @classmethod
    def from_modes(
        cls,
        params: QuantizationParams,
        modes: Mapping[tuple[int, ...], Callable | np.ndarray | complex],
        compact: bool = True,
    ) -> "WaveFunction":
        """Assemble from ``{(n_1, ..., n_r): phi}``; ``phi`` is an array on the grid,
        a callable of the grid coordinates, or a constant.

        With ``compact`` the two outermost grid layers are zeroed.
        """
        c = np.zeros(params.shape, dtype=complex)
        grids = np.meshgrid(*[params.grid_points(a) for a in range(len(params.grid))], indexing="ij")
        for n, phi in modes.items():
            n = tuple(int(v) for v in np.atleast_1d(n)) if params.n_periodic else ()
            if len(n) != params.n_periodic or any(abs(v) > params.kmax for v in n):
                raise ValueError(f"mode {n} outside the truncation window")
            idx = tuple(v + params.kmax for v in n)
            c[idx] = phi(*grids) if callable(phi) else phi
        wf = cls(params, c)
        return wf.compactified() if compact else wf

    @classmethod
    def random_compact(cls, params: QuantizationParams, rng: np.random.Generator) -> "WaveFunction":
        """Random complex coefficients, zero on the two outer grid layers, unit norm."""
        c = rng.standard_normal(params.shape) + 1j * rng.standard_normal(params.shape)
        wf = cls(params, c).compactified()
        return wf.scaled(1.0 / np.sqrt(inner_product(wf, wf).real))

    @classmethod
    def smooth_probe(cls, params: QuantizationParams, width: float | None = None) -> "WaveFunction":
        """Gaussian in every noncompact angle on modes ``|n_mu| <= 1``.

        The default width is an eighth of the grid half-width, so the
        profile is negligible at the grid edges.
        """
        c = np.zeros(params.shape, dtype=complex)
        profile = np.ones(params.grid_shape)
        for a, (L, _) in enumerate(params.grid):
            w = width if width is not None else L / 8.0
            q = params.grid_points(a)
            shape = [1] * len(params.grid)
            shape[a] = len(q)
            profile = profile * np.exp(-0.5 * (q / w) ** 2).reshape(shape)
        weights = {-1: 0.5, 0: 1.0, 1: 0.25j}
        for n in np.ndindex(*((3,) * params.n_periodic)):
            n = tuple(v - 1 for v in n)
            amp = np.prod([weights[v] for v in n]) if n else 1.0
            c[tuple(v + params.kmax for v in n)] = amp * profile
        return cls(params, c).compactified()

    def compactified(self, layers: int = 2) -> "WaveFunction":
        c = np.array(self.coefficients)
        r = self.params.n_periodic
        for a in range(len(self.params.grid)):
            sl = [slice(None)] * c.ndim
            sl[r + a] = slice(0, layers)
            c[tuple(sl)] = 0
            sl[r + a] = slice(c.shape[r + a] - layers, None)
            c[tuple(sl)] = 0
        return WaveFunction(self.params, c)

    def is_compactly_supported(self, layers: int = 2) -> bool:
        return bool(np.array_equal(self.compactified(layers).coefficients, self.coefficients))

    def mode(self, n) -> np.ndarray:
        n = tuple(int(v) for v in np.atleast_1d(n)) if self.params.n_periodic else ()
        return self.coefficients[tuple(v + self.params.kmax for v in n)]

    def scaled(self, s: complex) -> "WaveFunction":
        return WaveFunction(self.params, s * self.coefficients)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        return WaveFunction(self.params, self.coefficients + other.coefficients)


def trapezoid_weights(params: QuantizationParams) -> np.ndarray:
    """Quadrature weights on the grid (trapezoid rule), shape ``params.grid_shape``."""
    w = np.ones(params.grid_shape)
    for a in range(len(params.grid)):
        h = params.spacing(a)
        wa = np.full(params.grid[a][1], h)
        wa[0] = wa[-1] = h / 2
        shape = [1] * len(params.grid)
        shape[a] = len(wa)
        w = w * wa.reshape(shape)
    return w


def inner_product(psi: WaveFunction, phi: WaveFunction, params: QuantizationParams | None = None) -> complex:
    """``<psi|phi> = (2 pi)^-r int psi conj(phi)``.

    The angle integral is exact in the mode representation (Fourier
    orthogonality); the noncompact integral uses the trapezoid rule.
    """
    params = params or psi.params
    if psi.coefficients.shape != phi.coefficients.shape:
        raise ValueError(f"shape mismatch {psi.coefficients.shape} vs {phi.coefficients.shape}")
    w = trapezoid_weights(params)
    # real arithmetic so that <psi|psi> has an exactly zero imaginary part
    a, b = psi.coefficients, phi.coefficients
    re = np.sum(w * (a.real * b.real + a.imag * b.imag))
    im = np.sum(w * (a.imag * b.real - a.real * b.imag))
    return complex(re, im)

"""Discrete calculus on the 2-D periodic torus, built from exact Fourier multipliers.

Every linear operator in this module (spectral derivatives, the inverse
Laplacian, the divergence-free projection, smoothing) is a pointwise
multiplier on the discrete Fourier coefficients. Because they are all
diagonal in the same basis, the algebraic identities the solvers lean on
(idempotence of the projection, commutation of smoothing with projection
and differentiation, Hodge orthogonality) hold to rounding error rather
than to a discretization tolerance.

Conventions
-----------
* Fields are real, sampled on an ``n x n`` grid covering ``[0, L)^2``;
  entry ``[i, j]`` sits at ``(i * L/n, j * L/n)``.
* Forward transforms carry a ``1/n^2`` scaling, so Parseval reads
  ``mean(field**2) == sum(|coeffs|**2)`` and all norms are resolution
  independent.
* Nonlinear products elsewhere in the package are stabilized with the
  2/3-rule low-pass (`dealias`); derivative kernels zero the Nyquist
  mode, the standard convention for FFT differentiation on even grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, length)^2`` with its Fourier dual.

    ``n`` must be even and at least 8 (powers of two give the fastest
    transforms). Wavenumbers are ``2*pi/length`` times the integer modes
    ``0, 1, ..., n/2-1, -n/2, ..., -1``; the set is symmetric about zero
    except for the unpaired Nyquist mode ``-n/2``.
    """

    n: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 8:
            raise ValueError(f"grid resolution must be even and >= 8, got n={self.n}")
        if not self.length > 0:
            raise ValueError(f"grid period must be positive, got {self.length}")

    @property
    def d(self) -> int:
        return 2

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates ``(X, Y)`` with 'ij' indexing."""
        x = np.arange(self.n) * self.spacing
        X, Y = np.meshgrid(x, x, indexing="ij")
        return X, Y

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers along one axis (fftfreq layout)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Physical wavenumbers along one axis: ``2*pi/length * modes``."""
        return TWO_PI / self.length * self.modes

    @cached_property
    def kx(self) -> np.ndarray:
        return self.wavenumbers[:, None] * np.ones((1, self.n))

    @cached_property
    def ky(self) -> np.ndarray:
        return np.ones((self.n, 1)) * self.wavenumbers[None, :]

    @cached_property
    def k_sq(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def wavenumbers_deriv(self) -> np.ndarray:
        """Wavenumbers with the Nyquist mode zeroed.

        The unpaired Nyquist frequency has no well-defined sign on the
        grid, so every direction-sensitive multiplier (derivatives, the
        divergence-free projection, the acoustic coupling) treats it as
        frequency zero; only then do those operators map real fields to
        real fields and compose exactly.
        """
        k = self.wavenumbers.copy()
        k[self.n // 2] = 0.0
        return k

    @cached_property
    def kx_d(self) -> np.ndarray:
        return self.wavenumbers_deriv[:, None] * np.ones((1, self.n))

    @cached_property
    def ky_d(self) -> np.ndarray:
        return np.ones((self.n, 1)) * self.wavenumbers_deriv[None, :]

    @cached_property
    def k_sq_d(self) -> np.ndarray:
        return self.kx_d**2 + self.ky_d**2

    @cached_property
    def inv_k_sq_d(self) -> np.ndarray:
        """``1/|k|^2`` over derivative wavenumbers, 0 where those vanish."""
        out = np.zeros_like(self.k_sq_d)
        np.divide(1.0, self.k_sq_d, out=out, where=self.k_sq_d > 0)
        return out

    @cached_property
    def deriv_kx(self) -> np.ndarray:
        """``i*kx`` with the Nyquist row zeroed (odd-derivative kernel)."""
        return 1j * self.kx_d

    @cached_property
    def deriv_ky(self) -> np.ndarray:
        return 1j * self.ky_d

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the 2/3 rule: both |mode indices| <= n/3."""
        cut = self.n / 3.0
        m = np.abs(self.modes)
        return (m[:, None] <= cut) & (m[None, :] <= cut)


@dataclass(frozen=True)
class ScalarField:
    """Real samples of a scalar on a `Grid`, one value per node, row-major."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"field shape {vals.shape} does not match grid n={self.grid.n}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        X, Y = grid.coords
        return cls(grid, np.broadcast_to(np.asarray(fn(X, Y), dtype=np.float64), (grid.n, grid.n)).copy())

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.n, grid.n), float(value)))

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class VectorField:
    """d scalar components sharing a single grid."""

    grid: Grid
    components: tuple[ScalarField, ScalarField]

    def __post_init__(self):
        for c in self.components:
            if c.grid != self.grid:
                raise ValueError("all vector components must share one grid")

    @classmethod
    def from_arrays(cls, grid: Grid, vx: np.ndarray, vy: np.ndarray) -> "VectorField":
        return cls(grid, (ScalarField(grid, vx), ScalarField(grid, vy)))

    @classmethod
    def from_functions(cls, grid: Grid, fx, fy) -> "VectorField":
        return cls(grid, (ScalarField.from_function(grid, fx), ScalarField.from_function(grid, fy)))

    @classmethod
    def zero(cls, grid: Grid) -> "VectorField":
        return cls.from_arrays(grid, np.zeros((grid.n, grid.n)), np.zeros((grid.n, grid.n)))

    @property
    def x(self) -> np.ndarray:
        return self.components[0].values

    @property
    def y(self) -> np.ndarray:
        return self.components[1].values

    @property
    def is_finite(self) -> bool:
        return all(c.is_finite for c in self.components)


@dataclass(frozen=True)
class SpectralCoefficients:
    """Complex Fourier coefficients of a real field, mean-square scaled."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"coefficient shape {data.shape} does not match grid n={self.grid.n}"
            )
        object.__setattr__(self, "data", data)


class MollifierKind(Enum):
    """Smoothing multiplier family: value 1 at frequency zero, <= 1 everywhere.

    GAUSSIAN_MULTIPLIER applies ``exp(-eps^2 |k|^2)``; SHARP_CUTOFF keeps
    modes with ``|k| <= 1/eps`` and zeroes the rest. Both are real, radial
    and non-increasing in ``|k|``, which is all the energy arguments use.
    """

    GAUSSIAN_MULTIPLIER = "gaussian"
    SHARP_CUTOFF = "sharp_cutoff"


# ---------------------------------------------------------------------------
# transforms


def transform_forward(field: ScalarField) -> SpectralCoefficients:
    """FFT with 1/n^2 scaling; coefficients of a real field are conjugate-symmetric."""
    n = field.grid.n
    return SpectralCoefficients(field.grid, np.fft.fft2(field.values) / (n * n))


def transform_inverse(coeffs: SpectralCoefficients) -> ScalarField:
    n = coeffs.grid.n
    return ScalarField(coeffs.grid, np.fft.ifft2(coeffs.data * (n * n)).real)


def _fft(values: np.ndarray) -> np.ndarray:
    # unscaled transform for internal multiplier application
    return np.fft.fft2(values)


def _ifft(data: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(data).real


def apply_multiplier(field: ScalarField, multiplier: np.ndarray) -> ScalarField:
    """Apply a Fourier multiplier m(k) to a real field."""
    return ScalarField(field.grid, _ifft(multiplier * _fft(field.values)))


# ---------------------------------------------------------------------------
# derivatives


def gradient(field: ScalarField) -> VectorField:
    """Spectral gradient: multiplication by i*k_j, Nyquist-zeroed."""
    g = field.grid
    fh = _fft(field.values)
    return VectorField.from_arrays(g, _ifft(g.deriv_kx * fh), _ifft(g.deriv_ky * fh))


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    out = _ifft(g.deriv_kx * _fft(v.x)) + _ifft(g.deriv_ky * _fft(v.y))
    return ScalarField(g, out)


def laplacian(field: ScalarField) -> ScalarField:
    """Spectral Laplacian over derivative wavenumbers: equals div(grad(.)) exactly."""
    g = field.grid
    return ScalarField(g, _ifft(-g.k_sq_d * _fft(field.values)))


def solve_poisson(rhs: ScalarField) -> ScalarField:
    """Solve ``laplacian(u) = rhs`` spectrally with the zero-mean convention.

    Modes outside the range of the Laplacian (the mean, and the Nyquist
    modes the derivative convention maps to zero) are discarded; the
    returned u has mean 0.
    """
    g = rhs.grid
    uh = -g.inv_k_sq_d * _fft(rhs.values)
    return ScalarField(g, _ifft(uh))


# ---------------------------------------------------------------------------
# divergence-free projection


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields: multiplier I - k k^T / |k|^2.

    Uses the derivative wavenumber convention, consistent with
    `divergence`: the divergence of the output vanishes identically. The
    zero mode (spatial mean) is preserved, so constant velocities pass
    through unchanged and pure mean-free gradients are annihilated.
    """
    g = v.grid
    vxh, vyh = _fft(v.x), _fft(v.y)
    # longitudinal amplitude (k . vh) / |k|^2, zero where k vanishes
    lon = (g.kx_d * vxh + g.ky_d * vyh) * g.inv_k_sq_d
    return VectorField.from_arrays(g, _ifft(vxh - g.kx_d * lon), _ifft(vyh - g.ky_d * lon))


def gradient_part(v: VectorField) -> VectorField:
    """The complement (I - P)v of the divergence-free projection."""
    p = leray_project(v)
    return VectorField.from_arrays(v.grid, v.x - p.x, v.y - p.y)


# ---------------------------------------------------------------------------
# mollification


def mollifier_multiplier(grid: Grid, eps: float, kind: MollifierKind) -> np.ndarray:
    if not eps > 0:
        raise ValueError(f"mollifier scale must be positive, got {eps}")
    if kind is MollifierKind.GAUSSIAN_MULTIPLIER:
        return np.exp(-(eps * eps) * grid.k_sq)
    if kind is MollifierKind.SHARP_CUTOFF:
        return (grid.k_sq <= 1.0 / (eps * eps)).astype(np.float64)
    raise ValueError(f"unknown mollifier kind {kind!r}")


def mollify(field: ScalarField, eps: float, kind: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER) -> ScalarField:
    """Smooth a field with the multiplier family `kind` at scale `eps`.

    Linear, symmetric in the mean-square inner product, and commuting with
    every other multiplier here (projection, derivatives), since all are
    diagonal in the Fourier basis.
    """
    return apply_multiplier(field, mollifier_multiplier(field.grid, eps, kind))


def mollify_vector(v: VectorField, eps: float, kind: MollifierKind = MollifierKind.GAUSSIAN_MULTIPLIER) -> VectorField:
    m = mollifier_multiplier(v.grid, eps, kind)
    return VectorField.from_arrays(v.grid, _ifft(m * _fft(v.x)), _ifft(m * _fft(v.y)))


# ---------------------------------------------------------------------------
# norms and inner products


def inner(a: ScalarField | VectorField, b: ScalarField | VectorField) -> float:
    """Mean-square L2 inner product (average over nodes, not the integral)."""
    if isinstance(a, VectorField) and isinstance(b, VectorField):
        return float(np.mean(a.x * b.x + a.y * b.y))
    if isinstance(a, ScalarField) and isinstance(b, ScalarField):
        return float(np.mean(a.values * b.values))
    raise TypeError("inner expects two fields of the same kind")


def sobolev_norm(field: ScalarField | VectorField, s: float) -> float:
    """Fourier-weighted norm ``(sum_k (1+|k|^2)^s |coeff_k|^2)^(1/2)``.

    Monotone in s; at s = 0 it is the mean-square norm (Parseval).
    """
    if s < 0:
        raise ValueError(f"Sobolev index must be nonnegative, got {s}")
    if isinstance(field, VectorField):
        return float(np.sqrt(sum(sobolev_norm(c, s) ** 2 for c in field.components)))
    g = field.grid
    weight = (1.0 + g.k_sq) ** s
    coeffs = np.fft.fft2(field.values) / (g.n * g.n)
    return float(np.sqrt(np.sum(weight * np.abs(coeffs) ** 2)))


def l2_norm(field: ScalarField | VectorField) -> float:
    return sobolev_norm(field, 0.0)


# ---------------------------------------------------------------------------
# dealiasing


def dealias(coeffs: SpectralCoefficients) -> SpectralCoefficients:
    """Zero every mode whose index magnitude exceeds n/3 on either axis."""
    return SpectralCoefficients(coeffs.grid, coeffs.data * coeffs.grid.dealias_mask)


def dealias_field(field: ScalarField) -> ScalarField:
    g = field.grid
    return ScalarField(g, _ifft(g.dealias_mask * _fft(field.values)))


def dealias_vector(v: VectorField) -> VectorField:
    g = v.grid
    return VectorField.from_arrays(
        g, _ifft(g.dealias_mask * _fft(v.x)), _ifft(g.dealias_mask * _fft(v.y))
    )

"""Periodic grid, discrete Fourier transforms and dealiased products.

Coefficients follow the Fourier-series convention
``u(x) = sum_k uhat(k) exp(i k x)`` on ``[0, 2 pi)``, so the forward
transform carries the ``1/N`` factor. Arrays are kept in numpy FFT order
(``0, 1, ..., N/2 - 1, -N/2, ..., -1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from fractions import Fraction

import numpy as np

PRODUCT_METHODS = ("fft", "direct")


@dataclass(frozen=True)
class Grid:
    n_collocation: int = 64
    dealias_fraction: Fraction = Fraction(2, 3)
    domain_length: float = 2 * math.pi

    def __post_init__(self):
        n = self.n_collocation
        if not isinstance(n, (int, np.integer)) or n < 8 or n % 2:
            raise ValueError(f"n_collocation must be an even integer >= 8, got {n!r}")
        frac = Fraction(self.dealias_fraction)
        if not 0 < frac <= 1:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {frac}")
        object.__setattr__(self, "dealias_fraction", frac)
        if self.domain_length != 2 * math.pi:
            raise ValueError("only the 2*pi periodic domain is supported")

    @property
    def k_max(self) -> int:
        """Largest retained |k| after dealiasing."""
        return math.floor(self.dealias_fraction * self.n_collocation / 2)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_collocation, 1.0 / self.n_collocation).astype(int)

    @cached_property
    def retained(self) -> np.ndarray:
        return np.abs(self.wavenumbers) <= self.k_max

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_collocation) * (2 * math.pi / self.n_collocation)

    def index(self, k: int) -> int:
        if not -self.n_collocation // 2 <= k < self.n_collocation // 2:
            raise IndexError(f"wavenumber {k} not representable on N={self.n_collocation}")
        return k % self.n_collocation


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a periodic field on ``grid``."""

    grid: Grid
    coeffs: np.ndarray
    reality_flag: bool = False
    time_stamp: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_collocation,):
            raise ValueError(
                f"expected {self.grid.n_collocation} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, k: int) -> complex:
        return complex(self.coeffs[self.grid.index(k)])

    def as_dict(self) -> dict[int, complex]:
        return {int(k): complex(c) for k, c in zip(self.grid.wavenumbers, self.coeffs)}

    def with_coeffs(self, coeffs: np.ndarray, **changes) -> "SpectralField":
        return replace(self, coeffs=coeffs, **changes)

    @classmethod
    def zeros(cls, grid: Grid, reality_flag: bool = False) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_collocation, complex), reality_flag)

    @classmethod
    def from_modes(cls, grid: Grid, modes: dict[int, complex], reality_flag: bool = False):
        c = np.zeros(grid.n_collocation, complex)
        for k, v in modes.items():
            c[grid.index(k)] = v
        return cls(grid, c, reality_flag)

    def is_half_space(self) -> bool:
        """True when every coefficient with k <= 0 is exactly zero."""
        return not np.any(self.coeffs[self.grid.wavenumbers <= 0])


def _check_same_grid(a: SpectralField, b: SpectralField, grid: Grid) -> None:
    if a.grid != grid or b.grid != grid:
        raise ValueError("fields live on different grids")


def forward_transform(values, grid: Grid, reality_flag: bool | None = None) -> SpectralField:
    values = np.asarray(values)
    if values.shape != (grid.n_collocation,):
        raise ValueError(
            f"expected {grid.n_collocation} collocation values, got shape {values.shape}"
        )
    if reality_flag is None:
        reality_flag = not np.iscomplexobj(values) or not np.any(np.imag(values))
    return SpectralField(grid, np.fft.fft(values) / grid.n_collocation, reality_flag)


def inverse_transform(field: SpectralField) -> np.ndarray:
    vals = np.fft.ifft(field.coeffs) * field.grid.n_collocation
    return vals.real if field.reality_flag else vals


def _padded_product(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    n = grid.n_collocation
    m = 3 * n // 2
    keep = grid.retained
    k = grid.wavenumbers[keep]
    pa = np.zeros(m, complex)
    pb = np.zeros(m, complex)
    pa[k % m] = a[keep]
    pb[k % m] = b[keep]
    prod = np.fft.fft(np.fft.ifft(pa) * np.fft.ifft(pb)) * m
    out = np.zeros(n, complex)
    out[keep] = prod[k % m]
    return out


def _direct_product(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    km = grid.k_max
    order = np.arange(-km, km + 1) % grid.n_collocation
    full = np.convolve(a[order], b[order])  # wavenumbers -2km .. 2km
    out = np.zeros(grid.n_collocation, complex)
    out[order] = full[km : 3 * km + 1]
    return out


def product_coeffs(a: np.ndarray, b: np.ndarray, grid: Grid, method: str = "fft") -> np.ndarray:
    """Array-level dealiased product in FFT order (no field bookkeeping)."""
    if method == "fft":
        out = _padded_product(a, b, grid)
    elif method == "direct":
        out = _direct_product(a, b, grid)
    else:
        raise ValueError(f"unknown product method {method!r}; expected one of {PRODUCT_METHODS}")
    nonpos = grid.wavenumbers <= 0
    if not (np.any(a[nonpos]) or np.any(b[nonpos])):
        # support is exactly k >= 2; the FFT would leave rounding residue at k <= 0
        out[nonpos] = 0
    return out


def dealiased_product(
    a: SpectralField, b: SpectralField, grid: Grid | None = None, method: str = "fft"
) -> SpectralField:
    """Coefficients of ``a * b`` truncated to ``|k| <= k_max``.

    ``method="fft"`` uses a 3/2-padded transform, ``"direct"`` the O(N^2)
    truncated convolution. Both give the same truncated convolution up to
    rounding; the direct sum has no absolute noise floor, which matters for
    coefficients far below ``eps * max|uhat|``.
    """
    grid = a.grid if grid is None else grid
    _check_same_grid(a, b, grid)
    out = product_coeffs(a.coeffs, b.coeffs, grid, method)
    return SpectralField(grid, out, a.reality_flag and b.reality_flag, a.time_stamp)


def nonlinear_coeffs(c: np.ndarray, grid: Grid, method: str = "fft") -> np.ndarray:
    return -0.5j * grid.wavenumbers * product_coeffs(c, c, grid, method)


def nonlinear_term(u: SpectralField, grid: Grid | None = None, method: str = "fft") -> SpectralField:
    """Spectral form of ``-u u_x``, i.e. ``-(ik/2) * FFT(u^2)`` per mode."""
    grid = u.grid if grid is None else grid
    _check_same_grid(u, u, grid)
    return u.with_coeffs(nonlinear_coeffs(u.coeffs, grid, method))

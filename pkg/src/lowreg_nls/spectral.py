"""Periodic grids, complex fields and diagonal Fourier multipliers.

Conventions
-----------
* The torus is ``[0, L)^d`` with ``n`` points per axis and the same ``L`` and
  ``n`` on every axis.
* Frequencies are stored in the wrap-around order of :func:`numpy.fft.fftfreq`
  on every axis, i.e. ``(2*pi/L) * (0, 1, ..., n/2-1, -n/2, ..., -1)``.
* The forward transform carries the factor ``1/n^d`` and the inverse carries
  ``1``, so the zero mode is the spatial mean.  With this choice

      ||f||_{L^2}^2 = sum_x |f(x)|^2 (L/n)^d = L^d * sum_xi |f_hat(xi)|^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

PHYSICAL = "physical"
FREQUENCY = "frequency"

MAX_POINTS_PER_AXIS = {1: 2**20, 2: 4096, 3: 512}


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, L)^d``."""

    d: int
    n: int
    length: float = 2 * np.pi

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"points per axis must be an even integer >= 4, got {self.n}")
        if self.n > MAX_POINTS_PER_AXIS[self.d]:
            raise ValueError(
                f"n={self.n} exceeds the cap {MAX_POINTS_PER_AXIS[self.d]} for d={self.d}"
            )
        if not self.length > 0:
            raise ValueError(f"torus length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def plancherel_weight(self) -> float:
        """Weight ``w`` with ``||f||_{L^2}^2 = w * sum |f_hat|^2``."""
        return self.length**self.d

    @property
    def xi_max(self) -> float:
        """Largest frequency modulus along one axis, ``(2*pi/L) * n/2``."""
        return 2 * np.pi / self.length * (self.n // 2)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """One-axis angular wavenumbers in wrap-around order."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return (2 * np.pi / self.length) * k

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        """Broadcastable per-axis frequency components."""
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.n
            out.append(self.wavenumbers.reshape(shape))
        return tuple(out)

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """``|xi|^2`` on the full frequency lattice."""
        k2 = np.zeros(self.shape)
        for comp in self.xi:
            k2 = k2 + comp**2
        k2.flags.writeable = False
        return k2

    @cached_property
    def xi_norm(self) -> np.ndarray:
        r = np.sqrt(self.xi_squared)
        r.flags.writeable = False
        return r

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * self.dx
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.n
            out.append(x.reshape(shape))
        return tuple(out)

    def reflect_index(self, values: np.ndarray) -> np.ndarray:
        """Return ``g`` with ``g[xi] = values[-xi]`` on the lattice.

        ``-(-n/2)`` is identified with ``-n/2`` (the Nyquist line is its own
        reflection modulo ``n``).
        """
        out = values
        for axis in range(-self.d, 0):
            out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
        return out


def make_grid(d: int, n: int, length: float = 2 * np.pi) -> Grid:
    return Grid(d=d, n=n, length=length)


def fft(values: np.ndarray, d: int) -> np.ndarray:
    axes = tuple(range(-d, 0))
    return scipy.fft.fftn(values, axes=axes, norm="forward")


def ifft(values: np.ndarray, d: int) -> np.ndarray:
    axes = tuple(range(-d, 0))
    return scipy.fft.ifftn(values, axes=axes, norm="forward")


@dataclass(frozen=True)
class Field:
    """Complex samples on a grid in either physical or frequency representation."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    representation: str = PHYSICAL

    def __post_init__(self):
        if self.representation not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown representation {self.representation!r}")
        values = np.array(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} values for grid {self.grid.shape}, got {values.size}"
            )
        values = values.reshape(self.grid.shape)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        """Sample ``func(*coords)`` on the grid."""
        vals = np.broadcast_to(func(*grid.coordinates), grid.shape)
        return cls(grid, vals, PHYSICAL)

    @classmethod
    def zeros(cls, grid: Grid, representation: str = PHYSICAL) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=complex), representation)

    @classmethod
    def plane_wave(cls, grid: Grid, mode, amplitude: complex = 1.0) -> "Field":
        """``amplitude * exp(i xi.x)`` with ``xi = (2*pi/L) * mode`` (integer mode)."""
        mode = np.broadcast_to(np.asarray(mode, dtype=float), (grid.d,))
        scale = 2 * np.pi / grid.length

        def f(*x):
            phase = sum(scale * m * xa for m, xa in zip(mode, x))
            return amplitude * np.exp(1j * phase)

        return cls.from_function(grid, f)

    @property
    def physical(self) -> np.ndarray:
        return self.values if self.representation == PHYSICAL else ifft(self.values, self.grid.d)

    @property
    def spectrum(self) -> np.ndarray:
        return self.values if self.representation == FREQUENCY else fft(self.values, self.grid.d)

    def with_values(self, values: np.ndarray, representation: str | None = None) -> "Field":
        return Field(self.grid, values, representation or self.representation)

    def as_representation(self, representation: str) -> "Field":
        if representation == PHYSICAL:
            return self.with_values(self.physical, PHYSICAL)
        return self.with_values(self.spectrum, FREQUENCY)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        other = other.as_representation(self.representation)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        other = other.as_representation(self.representation)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__


def to_frequency(f: Field) -> Field:
    if f.representation != PHYSICAL:
        raise ValueError("to_frequency expects a field in physical representation")
    return Field(f.grid, fft(f.values, f.grid.d), FREQUENCY)


def to_physical(f: Field) -> Field:
    if f.representation != FREQUENCY:
        raise ValueError("to_physical expects a field in frequency representation")
    return Field(f.grid, ifft(f.values, f.grid.d), PHYSICAL)


def _check_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True)
class Multiplier:
    """Operator acting diagonally on Fourier coefficients."""

    grid: Grid
    symbol: np.ndarray = field(repr=False)

    def __post_init__(self):
        sym = np.array(np.broadcast_to(self.symbol, self.grid.shape))
        sym.flags.writeable = False
        object.__setattr__(self, "symbol", sym)

    def __matmul__(self, other: "Multiplier") -> "Multiplier":
        """Composition ``self o other``."""
        _check_same_grid(self.grid, other.grid)
        return Multiplier(self.grid, self.symbol * other.symbol)

    def __call__(self, f: Field) -> Field:
        return apply_multiplier(self, f)

    @classmethod
    def identity(cls, grid: Grid) -> "Multiplier":
        return cls(grid, np.ones(grid.shape))


def apply_multiplier(m: Multiplier, f: Field) -> Field:
    _check_same_grid(m.grid, f.grid)
    out = m.symbol * f.spectrum
    if f.representation == FREQUENCY:
        return Field(f.grid, out, FREQUENCY)
    return Field(f.grid, ifft(out, f.grid.d), PHYSICAL)


def free_flow_symbol(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-1j * t * grid.xi_squared)


def free_flow(grid: Grid, t: float) -> Multiplier:
    """The free Schroedinger group ``exp(i t Laplacian)``."""
    return Multiplier(grid, free_flow_symbol(grid, t))


def l2_norm(f: Field) -> float:
    """Plancherel-weighted L^2 norm computed from the spectrum."""
    return float(np.sqrt(f.grid.plancherel_weight * np.sum(np.abs(f.spectrum) ** 2)))

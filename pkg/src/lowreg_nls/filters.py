"""Frequency cutoffs, the filter projector, phi_1 and Littlewood-Paley blocks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, Multiplier

SMOOTH = "smooth"
SHARP = "sharp"

PHI1_SWITCH = 1e-4


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 1 on ``r <= 1``, 0 on ``r >= 2``.

    ``smooth`` blends with ``g(t) = exp(-1/t)``; ``sharp`` is the indicator of
    ``r <= 1``.
    """

    variant: str = SMOOTH

    def __post_init__(self):
        aliases = {"smooth-bump": SMOOTH, "sharp-indicator": SHARP}
        variant = aliases.get(self.variant, self.variant)
        if variant not in (SMOOTH, SHARP):
            raise ValueError(f"unknown cutoff variant {self.variant!r}")
        object.__setattr__(self, "variant", variant)

    def __call__(self, r):
        return chi(self, r)


def _g(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def chi(profile: CutoffProfile, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("chi is defined for r >= 0")
    if profile.variant == SHARP:
        out = (r_arr <= 1.0).astype(float)
    else:
        a = _g(2.0 - r_arr)
        b = _g(r_arr - 1.0)
        out = np.where(r_arr <= 1.0, 1.0, np.where(r_arr >= 2.0, 0.0, a / np.where(a + b > 0, a + b, 1.0)))
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class FilterParams:
    """Cutoff scale ``K`` and (when coupled to a step) exponent ``alpha``."""

    K: float
    alpha: float | None = None

    def __post_init__(self):
        if not self.K >= 1:
            raise ValueError(f"filter scale K must be >= 1, got {self.K}")
        if self.alpha is not None and self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    @classmethod
    def from_tau(cls, tau: float, alpha: float) -> "FilterParams":
        """Couple the cutoff to a step size through ``K = tau^(-alpha/2)``."""
        if not 0 < tau < 1:
            raise ValueError(f"coupling needs tau in (0, 1), got {tau}")
        return cls(K=tau ** (-alpha / 2), alpha=alpha)


def projector_symbol(grid: Grid, K: float, profile: CutoffProfile = CutoffProfile()) -> np.ndarray:
    return chi(profile, grid.xi_norm / K) ** 2


def make_projector(grid: Grid, params: FilterParams | float, profile: CutoffProfile = CutoffProfile()) -> Multiplier:
    """The filter ``Pi_K`` with symbol ``chi(|xi|/K)^2``."""
    K = params.K if isinstance(params, FilterParams) else float(params)
    if not K >= 1:
        raise ValueError(f"filter scale K must be >= 1, got {K}")
    return Multiplier(grid, projector_symbol(grid, K, profile))


def phi1(z):
    """``(exp(z) - 1) / z`` with a Taylor branch for ``|z| <= 1e-4``."""
    z_arr = np.asarray(z, dtype=complex)
    small = np.abs(z_arr) <= PHI1_SWITCH
    safe = np.where(small, 1.0, z_arr)
    direct = np.expm1(safe) / safe
    series = 1 + z_arr * (1 / 2 + z_arr * (1 / 6 + z_arr * (1 / 24 + z_arr / 120)))
    out = np.where(small, series, direct)
    return complex(out) if np.ndim(z) == 0 else out


def phi1_symbol(grid: Grid, tau: float, sign: int = 1) -> np.ndarray:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return phi1(sign * 2j * tau * grid.xi_squared)


def phi1_multiplier(grid: Grid, tau: float, sign: int = 1) -> Multiplier:
    """``phi_1(-2 i tau Laplacian)`` for ``sign=+1``; the symbol is ``phi_1(2 i tau |xi|^2)``."""
    return Multiplier(grid, phi1_symbol(grid, tau, sign))


def phi1_hs_constant(grid: Grid, tau: float, s: float) -> float:
    """``sup_xi |phi_1(2 i tau |xi|^2)| (1 + tau |xi|^2)^(s/2)`` over the lattice."""
    sym = np.abs(phi1_symbol(grid, tau))
    return float(np.max(sym * (1 + tau * grid.xi_squared) ** (s / 2)))


def lp_max_block(grid: Grid) -> int:
    r_max = float(np.max(grid.xi_norm))
    return max(0, int(np.ceil(np.log2(max(r_max, 1.0)))) + 1)


def lp_symbol(grid: Grid, k: int) -> np.ndarray:
    # theta(|xi| / 2^k) - theta(|xi| / 2^(k-1)); block -1 is theta(2|xi|)
    if k < -1:
        raise ValueError(f"block index must be >= -1, got {k}")
    theta = CutoffProfile(SMOOTH)
    r = grid.xi_norm
    outer = chi(theta, r / 2.0**k) if k >= 0 else chi(theta, 2 * r)
    if k == -1:
        return outer
    return outer - chi(theta, r / 2.0 ** (k - 1))


def lp_block(grid: Grid, k: int) -> Multiplier:
    """Dyadic block ``k``; ``k >= 0`` lives on ``2^(k-1) <= |xi| <= 2^(k+1)``."""
    return Multiplier(grid, lp_symbol(grid, k))


def lp_blocks(grid: Grid) -> list[Multiplier]:
    """All blocks needed to cover the lattice; their symbols sum to one."""
    return [lp_block(grid, k) for k in range(-1, lp_max_block(grid) + 1)]

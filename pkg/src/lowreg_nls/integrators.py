"""Time steppers for the cubic NLS ``i u_t = -Lap u + mu |u|^2 u`` on a periodic grid.

Every stepper works on Fourier coefficients.  The array kernels accept
leading batch axes so ensembles can be advanced together; the
:class:`~lowreg_nls.spectral.Field` based functions are thin wrappers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .filters import CutoffProfile, FilterParams, phi1_symbol, projector_symbol
from .spectral import FREQUENCY, Field, Grid, fft, free_flow_symbol, ifft

LRI_FILTERED = "lri-filtered"
LRI_UNFILTERED = "lri-unfiltered"
LIE = "lie"
LIE_FILTERED = "lie-filtered"
STRANG = "strang"
SCHEMES = (LRI_FILTERED, LRI_UNFILTERED, LIE, LIE_FILTERED, STRANG)
FILTERED_SCHEMES = (LRI_FILTERED, LIE_FILTERED)

DEFOCUSING = 1
FOCUSING = -1


class BlowUpError(FloatingPointError):
    """A step produced non-finite values."""

    def __init__(self, step: int, scheme: str = ""):
        self.step = step
        self.scheme = scheme
        super().__init__(f"non-finite state after step {step} ({scheme or 'unknown scheme'})")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str
    tau: float
    steps: int = 1
    filter: FilterParams | None = None
    mu: int = DEFOCUSING
    profile: CutoffProfile = field(default_factory=CutoffProfile)
    dealias: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps}")
        mu = {"defocusing": DEFOCUSING, "focusing": FOCUSING}.get(self.mu, self.mu)
        if mu not in (DEFOCUSING, FOCUSING):
            raise ValueError(f"mu must be +1 (defocusing) or -1 (focusing), got {self.mu}")
        object.__setattr__(self, "mu", mu)
        if self.scheme == LIE_FILTERED and self.filter is None:
            object.__setattr__(self, "filter", FilterParams.from_tau(self.tau, 1.0))
        if self.scheme == LRI_FILTERED and self.filter is None:
            raise ValueError("lri-filtered needs FilterParams")
        if self.dealias and self.scheme in FILTERED_SCHEMES:
            raise ValueError("padding is only offered for unfiltered schemes")

    @property
    def filtered(self) -> bool:
        return self.scheme in FILTERED_SCHEMES

    @property
    def T(self) -> float:
        return self.steps * self.tau


def _padded_index(n: int, d: int):
    m = 2 * n
    keep = np.r_[0 : n // 2, m - n // 2 : m]
    return m, (Ellipsis,) + np.ix_(*([keep] * d))


def _cube_padded(a_hat: np.ndarray, b_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectrum of ``A^2 B`` on a 2x zero-padded grid (alias free for cubic terms)."""
    n, d = grid.n, grid.d
    m, index = _padded_index(n, d)

    def pad(h):
        out = np.zeros(h.shape[:-d] + (m,) * d, dtype=complex)
        out[index] = h
        return out

    A = ifft(pad(a_hat), d)
    return fft(A * A * ifft(pad(b_hat), d), d)[index]


class Stepper:
    """Precomputed symbols for one (grid, config) pair; advances spectra in place of a Field."""

    def __init__(self, grid: Grid, cfg: SchemeConfig):
        self.grid = grid
        self.cfg = cfg
        d, tau = grid.d, cfg.tau
        self.proj = projector_symbol(grid, cfg.filter.K, cfg.profile) if cfg.filtered else None
        self.flow = free_flow_symbol(grid, tau)
        self.half_flow = free_flow_symbol(grid, tau / 2) if cfg.scheme == STRANG else None
        self.phi = phi1_symbol(grid, tau) if cfg.scheme in (LRI_FILTERED, LRI_UNFILTERED) else None
        self._d = d
        self._kernel = {
            LRI_FILTERED: self._lri,
            LRI_UNFILTERED: self._lri,
            LIE: self._lie,
            LIE_FILTERED: self._lie_filtered,
            STRANG: self._strang,
        }[cfg.scheme]

    def initialize(self, v: np.ndarray) -> np.ndarray:
        return self.proj * v if self.proj is not None else np.array(v, dtype=complex)

    def step(self, v: np.ndarray) -> np.ndarray:
        return self._kernel(v)

    def _lri(self, v):
        d, tau, mu = self._d, self.cfg.tau, self.cfg.mu
        a = self.proj * v if self.proj is not None else v
        # spectrum of conj(Pi u) is the reflected conjugate spectrum
        b = self.phi * np.conj(self.grid.reflect_index(a))
        if self.cfg.dealias:
            cubic = _cube_padded(a, b, self.grid)
        else:
            A = ifft(a, d)
            cubic = fft(A * A * ifft(b, d), d)
        if self.proj is not None:
            cubic = self.proj * cubic
        return self.flow * (v - 1j * tau * mu * cubic)

    def _kick(self, v):
        d = self._d
        if self.cfg.dealias:
            raise NotImplementedError("padding applies to the low-regularity integrator only")
        A = ifft(v, d)
        A = A * np.exp(-1j * self.cfg.tau * self.cfg.mu * np.abs(A) ** 2)
        return fft(A, d)

    def _lie(self, v):
        return self.flow * self._kick(v)

    def _strang(self, v):
        return self.half_flow * self._kick(self.half_flow * v)

    def _lie_filtered(self, v):
        return self.flow * (self.proj * self._kick(self.proj * v))




def _finish(u: Field, v: np.ndarray, step: int, scheme: str) -> Field:
    if not np.all(np.isfinite(v)):
        raise BlowUpError(step, scheme)
    return Field(u.grid, v, FREQUENCY).as_representation(u.representation)


def _step(u: Field, cfg: SchemeConfig, scheme: str) -> Field:
    if cfg.scheme != scheme:
        cfg = replace(cfg, scheme=scheme)
    stepper = Stepper(u.grid, cfg)
    return _finish(u, stepper.step(u.spectrum), 1, scheme)


def step_lri(u: Field, cfg: SchemeConfig) -> Field:
    """One step of the (filtered) low-regularity Fourier integrator.

    ``u -> e^{i tau Lap} (u - i tau mu Pi_K((Pi_K u)^2 phi_1(-2 i tau Lap) Pi_K conj(u)))``,
    with ``Pi_K`` the identity for ``lri-unfiltered``.
    """
    scheme = cfg.scheme if cfg.scheme in (LRI_FILTERED, LRI_UNFILTERED) else LRI_UNFILTERED
    return _step(u, cfg, scheme)


def step_lie(u: Field, cfg: SchemeConfig) -> Field:
    return _step(u, cfg, LIE)


def step_strang(u: Field, cfg: SchemeConfig) -> Field:
    """Half free flow, exact nonlinear step, half free flow."""
    return _step(u, cfg, STRANG)


def step_lie_filtered(u: Field, cfg: SchemeConfig) -> Field:
    """Lie splitting with ``Pi_K`` applied before and after the nonlinear sub-flow."""
    if cfg.scheme != LIE_FILTERED:
        cfg = SchemeConfig(LIE_FILTERED, cfg.tau, cfg.steps, cfg.filter, cfg.mu, cfg.profile)
    return _step(u, cfg, LIE_FILTERED)


def step(u: Field, cfg: SchemeConfig) -> Field:
    """Dispatch on ``cfg.scheme``."""
    return _step(u, cfg, cfg.scheme)


def initialize(u0: Field, cfg: SchemeConfig) -> Field:
    if not cfg.filtered:
        return u0
    v = projector_symbol(u0.grid, cfg.filter.K, cfg.profile) * u0.spectrum
    return Field(u0.grid, v, FREQUENCY).as_representation(u0.representation)


@dataclass(frozen=True)
class Trajectory:
    config: SchemeConfig
    times: tuple[float, ...]
    snapshots: tuple[Field, ...]
    l2_norms: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.times and self.times[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def final(self) -> Field:
        return self.snapshots[-1]


def snapshot_indices(times, tau: float, steps: int) -> list[int]:
    out = []
    for t in times:
        k = int(round(t / tau))
        if abs(t - k * tau) > 1e-9 * max(1.0, abs(t)) or not 0 <= k <= steps:
            raise ValueError(f"snapshot time {t} is not a multiple of tau={tau} within [0, {steps * tau}]")
        out.append(k)
    return out


def evolve(u0: Field, cfg: SchemeConfig, snapshot_times=None) -> Trajectory:
    """Step ``cfg.steps`` times from ``initialize(u0)``.

    Snapshots default to ``t = 0`` and the final time; ``t = 0`` is always
    included.
    """
    grid = u0.grid
    if snapshot_times is None:
        snapshot_times = [0.0, cfg.T]
    idx = sorted(set([0] + snapshot_indices(snapshot_times, cfg.tau, cfg.steps)))
    stepper = Stepper(grid, cfg)
    v = stepper.initialize(u0.spectrum)
    w = grid.plancherel_weight
    norms = np.empty(cfg.steps + 1)
    norms[0] = np.sqrt(w * np.sum(np.abs(v) ** 2))
    snaps = {}
    if 0 in idx:
        snaps[0] = Field(grid, v, FREQUENCY)
    wanted = set(idx)
    # overflow is reported through BlowUpError instead of warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, cfg.steps + 1):
            v = stepper.step(v)
            norms[n] = np.sqrt(w * np.sum(np.abs(v) ** 2))
            if not np.isfinite(norms[n]):
                raise BlowUpError(n, cfg.scheme)
            if n in wanted:
                snaps[n] = Field(grid, v, FREQUENCY)
    rep = u0.representation
    return Trajectory(
        config=cfg,
        times=tuple(k * cfg.tau for k in idx),
        snapshots=tuple(snaps[k].as_representation(rep) for k in idx),
        l2_norms=norms,
    )


def filtered_nonlinear_rk4(v: np.ndarray, grid: Grid, proj: np.ndarray, h: float, mu: int = 1) -> np.ndarray:
    """One RK4 step of ``w' = -i mu Pi(|Pi w|^2 Pi w)`` on spectra."""
    d = grid.d

    def rhs(w):
        A = ifft(proj * w, d)
        return -1j * mu * proj * fft(np.abs(A) ** 2 * A, d)

    k1 = rhs(v)
    k2 = rhs(v + 0.5 * h * k1)
    k3 = rhs(v + 0.5 * h * k2)
    k4 = rhs(v + h * k3)
    return v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

"""Discrete function-space norms and dispersive / Strichartz diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filters import CutoffProfile, projector_symbol
from .spectral import FREQUENCY, Field, Grid, free_flow_symbol, ifft

INF = math.inf


def _as_exponent(q) -> float:
    if isinstance(q, str):
        q = INF if q.strip().lower() in ("inf", "infinity", "oo") else float(q)
    return float(q)


def _lq(values: np.ndarray, q: float, cell: float, d: int) -> np.ndarray:
    """L^q norm over the last ``d`` axes of physical samples."""
    axes = tuple(range(-d, 0))
    a = np.abs(values)
    if q == INF:
        return np.max(a, axis=axes)
    return (np.sum(a**q, axis=axes) * cell) ** (1.0 / q)


def norm_lq(f: Field, q) -> float:
    q = _as_exponent(q)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return float(_lq(f.physical, q, f.grid.cell_volume, f.grid.d))


def norm_hs(f: Field, s: float) -> float:
    """Bessel-potential Sobolev norm ``||<xi>^s f_hat||`` with the Plancherel weight."""
    g = f.grid
    weight = (1 + g.xi_squared) ** s
    return float(np.sqrt(g.plancherel_weight * np.sum(weight * np.abs(f.spectrum) ** 2)))


def bessel_potential(f: Field, sigma: float) -> Field:
    """``(1 - Lap)^(sigma/2) f``."""
    g = f.grid
    return Field(g, (1 + g.xi_squared) ** (sigma / 2) * f.spectrum, FREQUENCY)


def norm_wsq(f: Field, sigma: float, q) -> float:
    q = _as_exponent(q)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if not 1 < q < INF:
        raise ValueError(f"W^(sigma,q) needs q in (1, inf), got {q}")
    return norm_lq(bessel_potential(f, sigma), q)


@dataclass(frozen=True)
class SpaceTimeSeries:
    tau: float
    fields: tuple[Field, ...]

    def __post_init__(self):
        fields = tuple(self.fields)
        if not fields:
            raise ValueError("a space-time series needs at least one field")
        if any(f.grid != fields[0].grid for f in fields):
            raise ValueError("all fields in a series must share a grid")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "fields", fields)


def lp_tau(values: np.ndarray, tau: float, p: float) -> float:
    """``(tau * sum_k a_k^p)^(1/p)``; the supremum for ``p = inf``."""
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise ValueError("empty sequence")
    if p == INF:
        return float(np.max(a))
    return float((tau * np.sum(a**p)) ** (1.0 / p))


def norm_spacetime(series: SpaceTimeSeries, p, q) -> float:
    """Discrete ``l^p_tau L^q`` norm of a time series of fields."""
    p, q = _as_exponent(p), _as_exponent(q)
    if p < 1 or q < 1:
        raise ValueError("exponents must be >= 1")
    return lp_tau([norm_lq(f, q) for f in series.fields], series.tau, p)


@dataclass(frozen=True)
class AdmissiblePair:
    p: float
    q: float
    d: int

    @property
    def endpoint(self) -> bool:
        return self.p == 2

    def __str__(self):
        fmt = lambda x: "inf" if x == INF else f"{x:g}"
        return f"({fmt(self.p)},{fmt(self.q)})"


def check_admissible(p, q, d: int) -> AdmissiblePair:
    """Validate ``p, q >= 2``, ``2/p + d/q = d/2`` and ``(p, q, d) != (2, inf, 2)``."""
    p, q = _as_exponent(p), _as_exponent(q)
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    if p < 2 or q < 2:
        raise ValueError(f"admissible pairs need p, q >= 2, got ({p}, {q})")
    if (p, q, d) == (2, INF, 2):
        raise ValueError("(2, inf) is excluded in dimension 2")
    lhs = 2 / p + d / q
    if abs(lhs - d / 2) > 1e-12:
        raise ValueError(f"2/p + d/q = {lhs} differs from d/2 = {d / 2}")
    return AdmissiblePair(p, q, d)


def fit_loglog(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log y`` against ``log x`` and the RMS residual."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if np.ptp(lx) == 0:
        return math.nan, math.nan
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


# --- Strichartz ---------------------------------------------------------------


def strichartz_candidates(grid: Grid, K: float, ensemble_size: int = 32, seed: int = 0) -> np.ndarray:
    """Spectra of L^2-normalised test data for the filtered group.

    Random-phase Gaussian spectra on ``|xi| <= 2K`` plus wave packets centred
    at ``|xi|`` in ``{0, K/2, K, 3K/2}`` with widths ``K/4`` and ``K``.
    """
    rng = np.random.default_rng(seed)
    support = grid.xi_norm <= 2 * K
    cands = []
    for _ in range(ensemble_size):
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        cands.append(np.where(support, c, 0))
    xi0_axis = grid.xi[0]
    for centre in (0.0, 0.5 * K, K, 1.5 * K):
        for width in (0.25 * K, K):
            dist2 = (xi0_axis - centre) ** 2 + (grid.xi_squared - xi0_axis**2)
            cands.append(np.exp(-dist2 / (2 * width**2)) + 0j)
    cands = np.stack([np.broadcast_to(c, grid.shape) for c in cands]).astype(complex)
    norms = np.sqrt(grid.plancherel_weight * np.sum(np.abs(cands) ** 2, axis=tuple(range(1, grid.d + 1))))
    return cands / norms.reshape((-1,) + (1,) * grid.d)


@dataclass
class StrichartzTable:
    pair: AdmissiblePair
    alpha: float
    taus: np.ndarray
    Ks: np.ndarray
    ratios: np.ndarray
    member_ratios: np.ndarray = field(repr=False)
    growth_exponent: float = math.nan
    tau_exponent: float = math.nan

    @property
    def scale(self) -> np.ndarray:
        return self.Ks * np.sqrt(self.taus)

    def rows(self):
        for tau, K, x, r in zip(self.taus, self.Ks, self.scale, self.ratios):
            yield {"tau": tau, "K": K, "K_sqrt_tau": x, "ratio": r}


def strichartz_ratios(grid: Grid, spectra: np.ndarray, K: float, tau: float, n_steps: int, p, q,
                      profile: CutoffProfile = CutoffProfile()) -> np.ndarray:
    """``||S_K(n tau) f||_{l^p_tau L^q}`` for each spectrum in the batch, ``0 <= n <= n_steps``."""
    p, q = _as_exponent(p), _as_exponent(q)
    d = grid.d
    proj = projector_symbol(grid, K, profile)
    flow = free_flow_symbol(grid, tau)
    v = proj * spectra
    per_time = np.empty((n_steps + 1, spectra.shape[0]))
    for n in range(n_steps + 1):
        if n:
            v = flow * v
        per_time[n] = _lq(ifft(v, d), q, grid.cell_volume, d) if q != 2 else np.sqrt(
            grid.plancherel_weight * np.sum(np.abs(v) ** 2, axis=tuple(range(1, d + 1)))
        )
    if p == INF:
        return per_time.max(axis=0)
    return (tau * np.sum(per_time**p, axis=0)) ** (1.0 / p)


def measure_strichartz_growth(grid: Grid, profile: CutoffProfile, pair: AdmissiblePair, tau_list, alpha: float,
                              ensemble_size: int = 32, seed: int = 0, horizon: float = 0.25,
                              n_steps: int | None = None) -> StrichartzTable:
    """Ensemble lower bounds on the discrete Strichartz constant of ``S_K(n tau)``.

    For each ``tau`` (``K = tau^(-alpha/2)``) the ratio is the ensemble maximum
    of ``||S_K(n tau) f||_{l^p_tau L^q} / ||f||_{L^2}`` over ``n tau <= horizon``
    (or ``n <= n_steps``).
    """
    if pair.endpoint:
        raise ValueError("the endpoint p = 2 is excluded")
    pair = check_admissible(pair.p, pair.q, pair.d)
    if pair.d != grid.d:
        raise ValueError("pair dimension does not match the grid")
    taus = np.asarray(sorted(tau_list, reverse=True), dtype=float)
    Ks, ratios, members = [], [], []
    for tau in taus:
        K = tau ** (-alpha / 2)
        if K * math.sqrt(tau) < 1 - 1e-12:
            raise ValueError(f"K sqrt(tau) = {K * math.sqrt(tau)} < 1")
        steps = n_steps if n_steps is not None else max(1, int(round(horizon / tau)))
        spectra = strichartz_candidates(grid, K, ensemble_size, seed)
        r = strichartz_ratios(grid, spectra, K, tau, steps, pair.p, pair.q, profile)
        Ks.append(K)
        ratios.append(r.max())
        members.append(r)
    Ks = np.asarray(Ks)
    ratios = np.asarray(ratios)
    table = StrichartzTable(pair, alpha, taus, Ks, ratios, np.asarray(members))
    table.growth_exponent = fit_loglog(Ks * np.sqrt(taus), ratios)[0]
    table.tau_exponent = fit_loglog(1 / taus, ratios)[0]
    return table


# --- dispersive decay ---------------------------------------------------------


def dispersive_guard(grid: Grid, K: float, revival_fraction: float = 0.05) -> float:
    """Largest time at which the filtered kernel still disperses as on ``R^d``.

    The smaller of ``revival_fraction * L^2 / (2 pi)`` and the wrap-around
    time ``L / (8 K)`` (group speed ``2|xi| <= 4K`` meeting the periodic image
    half a period away).
    """
    L = grid.length
    return min(revival_fraction * L**2 / (2 * np.pi), L / (8 * K))


@dataclass
class DispersiveTable:
    K: float
    times: np.ndarray
    linf: np.ndarray
    l2: np.ndarray
    guard: float
    window: tuple[float, float]
    decay_exponent: float
    fit_residual: float

    def rows(self):
        for t, a, b in zip(self.times, self.linf, self.l2):
            yield {"t": t, "linf": a, "l2": b}


def filtered_delta_kernel(grid: Grid, K: float, t: float, profile: CutoffProfile = CutoffProfile()) -> np.ndarray:
    """Physical samples of ``S_K(t) delta`` with the L^1-normalised discrete delta at the origin."""
    spec = np.full(grid.shape, 1.0 / grid.plancherel_weight, dtype=complex)
    spec = spec * projector_symbol(grid, K, profile) * free_flow_symbol(grid, t)
    return ifft(spec, grid.d)


def measure_dispersive_decay(grid: Grid, K: float, t_list=None, profile: CutoffProfile = CutoffProfile(),
                             revival_fraction: float = 0.05, window_start: float = 10.0,
                             n_times: int = 40) -> DispersiveTable:
    """``||S_K(t) delta||_{L^inf}`` over ``t`` and the fitted decay exponent.

    The fit uses ``window_start / K^2 <= t <= guard``; below ``1/K^2`` the
    kernel has not yet left its initial plateau of height ``~K^d``.
    """
    guard = dispersive_guard(grid, K, revival_fraction)
    lo = window_start / K**2
    if t_list is None:
        t_list = np.concatenate([[0.0], np.geomspace(lo, guard, n_times)])
    times = np.asarray(t_list, dtype=float)
    if np.any(times > guard * (1 + 1e-12)):
        raise ValueError(f"times beyond the dispersive guard t <= {guard:.4g}")
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    linf, l2 = [], []
    for t in times:
        ker = filtered_delta_kernel(grid, K, t, profile)
        linf.append(np.max(np.abs(ker)))
        l2.append(np.sqrt(np.sum(np.abs(ker) ** 2) * grid.cell_volume))
    linf, l2 = np.asarray(linf), np.asarray(l2)
    sel = (times >= lo) & (times <= guard)
    if sel.sum() >= 2:
        slope, resid = fit_loglog(times[sel], linf[sel])
    else:
        slope, resid = math.nan, math.nan
    return DispersiveTable(K, times, linf, l2, guard, (lo, guard), slope, resid)


# --- borderline Sobolev ---------------------------------------------------------


def borderline_sobolev_ratio(grid: Grid, K: float, seed: int = 0, n_random: int = 4) -> float:
    """``max ||u||_inf / ((log K)^(2/3) ||u||_{W^{1,3}})`` over test fields band-limited to ``|xi| <= 4K``.

    Candidates are random-phase fields and the aligned profile ``<xi>^(-3)``;
    this is a monitored lower bound, not a sharp constant.
    """
    if grid.d != 3:
        raise ValueError("the borderline estimate is stated in dimension 3")
    if K <= 1:
        raise ValueError("K must exceed 1 so that log K > 0")
    rng = np.random.default_rng(seed)
    band = grid.xi_norm <= 4 * K
    weight = (1 + grid.xi_squared) ** -1.5
    cands = [np.where(band, weight, 0).astype(complex)]
    for _ in range(n_random):
        phase = np.exp(2j * np.pi * rng.random(grid.shape))
        cands.append(np.where(band, weight * phase, 0))
    best = 0.0
    for c in cands:
        u = Field(grid, c, FREQUENCY)
        ratio = norm_lq(u, INF) / (math.log(K) ** (2 / 3) * norm_wsq(u, 1.0, 3))
        best = max(best, ratio)
    return best

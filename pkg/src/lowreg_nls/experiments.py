"""Rough initial data, reference solutions and convergence-order measurements."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import fit_loglog
from .filters import CutoffProfile, FilterParams, projector_symbol
from .integrators import (
    FILTERED_SCHEMES,
    LIE_FILTERED,
    STRANG,
    BlowUpError,
    SchemeConfig,
    Stepper,
    filtered_nonlinear_rk4,
)
from .spectral import FREQUENCY, Field, Grid, free_flow_symbol

# alpha in K = tau^(-alpha/2) that balances filter and time errors for H^1 data
OPTIMAL_ALPHA = {1: 5 / 3, 2: 3 / 2, 3: 4 / 3}

DEFAULT_LADDERS = {1: range(4, 12), 2: range(4, 10), 3: range(4, 9)}
DEFAULT_GRIDS = {1: 4096, 2: 256, 3: 64}
DEFAULT_LENGTH = 16 * math.pi


class ReferenceCheckError(RuntimeError):
    """The reference solution is not converged well enough for the requested errors."""


@dataclass(frozen=True)
class RoughDataSpec:
    s: float = 1.0
    epsilon: float = 0.01
    seed: int = 0
    normalization: float = 1.0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"regularity s must be non-negative, got {self.s}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.normalization > 0:
            raise ValueError("normalization must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


def generate_rough_data(grid: Grid, spec: RoughDataSpec) -> Field:
    """Random-phase data with ``|u_hat(xi)| ~ <xi>^-(s + d/2 + epsilon)``, scaled to ``||u||_{H^s} = normalization``."""
    rng = np.random.default_rng(int(spec.seed))
    phases = np.exp(2j * np.pi * rng.random(grid.shape))
    decay = (1 + grid.xi_squared) ** (-(spec.s + grid.d / 2 + spec.epsilon) / 2)
    coef = phases * decay
    hs = np.sqrt(grid.plancherel_weight * np.sum((1 + grid.xi_squared) ** spec.s * np.abs(coef) ** 2))
    return Field(grid, coef * (spec.normalization / hs), FREQUENCY)


def choose_K(tau: float, d: int) -> FilterParams:
    """``K = tau^(-5/6)``, ``tau^(-3/4)``, ``tau^(-2/3)`` for ``d = 1, 2, 3``."""
    if d not in OPTIMAL_ALPHA:
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return FilterParams.from_tau(tau, OPTIMAL_ALPHA[d])


def fit_order(taus, errors, log_power: float = 0.0) -> tuple[float, float]:
    """Slope of ``log(error / |log tau|^log_power)`` against ``log tau``; returns (order, rms residual)."""
    taus = np.asarray(taus, dtype=float)
    errs = np.asarray(errors, dtype=float)
    if log_power:
        errs = errs / np.abs(np.log(taus)) ** log_power
    return fit_loglog(taus, errs)


# --- reference solutions ------------------------------------------------------


def _strang_states(v0: np.ndarray, grid: Grid, tau_ref: float, checkpoints: list[int], mu: int,
                   proj: np.ndarray | None) -> list[np.ndarray]:
    """Strang splitting with ``tau_ref``; returns the spectra at the requested step counts."""
    if proj is None:
        stepper = Stepper(grid, SchemeConfig(STRANG, tau_ref, mu=mu))
        advance = stepper.step
    else:
        half = free_flow_symbol(grid, tau_ref / 2)

        def advance(v):
            return half * filtered_nonlinear_rk4(half * v, grid, proj, tau_ref, mu)

    out, v, n = [], v0, 0
    for target in checkpoints:
        while n < target:
            v = advance(v)
            n += 1
        if not np.all(np.isfinite(v)):
            raise BlowUpError(n, "reference")
        out.append(v)
    return out


def _steps(T: float, tau: float) -> int:
    n = int(round(T / tau))
    if abs(n * tau - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T = {T} is not a multiple of tau = {tau}")
    return n


@dataclass
class Reference:
    """Semi-discrete reference states at ``times`` plus the halving self-check."""

    times: np.ndarray
    states: list[np.ndarray] = field(repr=False)
    tau_ref: float
    halving_change: float

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, t):
            raise KeyError(f"no reference state at t = {t}")
        return self.states[i]


def compute_reference(u0: Field, T: float, tau_ref: float, times=None, mu: int = 1,
                      filter_K: float | None = None, profile: CutoffProfile = CutoffProfile()) -> Reference:
    """Reference for ``i u_t = -Lap u + mu |u|^2 u`` (or the filtered equation when ``filter_K`` is given).

    Strang splitting with ``tau_ref`` and ``tau_ref / 2``; the finer run is
    returned and the L^2 change between the two at ``T`` is recorded.
    Without a filter the nonlinear sub-flow is exact; with a filter it is one
    RK4 step of ``w' = -i mu Pi(|Pi w|^2 Pi w)``.
    """
    grid = u0.grid
    times = np.asarray([T] if times is None else times, dtype=float)
    if np.any(np.diff(times) <= 0) or times[-1] != T:
        raise ValueError("reference times must increase and end at T")
    v0 = u0.spectrum
    proj = None
    if filter_K is not None:
        proj = projector_symbol(grid, filter_K, profile)
        v0 = proj * v0
    fine = tau_ref / 2
    coarse_final = _strang_states(v0, grid, tau_ref, [_steps(T, tau_ref)], mu, proj)[-1]
    states = _strang_states(v0, grid, fine, [_steps(t, fine) for t in times], mu, proj)
    change = float(np.sqrt(grid.plancherel_weight * np.sum(np.abs(states[-1] - coarse_final) ** 2)))
    return Reference(times, states, fine, change)


def reference_solution(u0: Field, T: float, tau_ref: float, mu: int = 1, tolerance: float | None = None) -> Field:
    """Semi-discrete NLS solution at ``T``; raises if halving ``tau_ref`` moves it by more than ``tolerance``."""
    if T == 0:
        return u0
    ref = compute_reference(u0, T, tau_ref, mu=mu)
    if tolerance is not None and ref.halving_change > tolerance:
        raise ReferenceCheckError(
            f"halving tau_ref={tau_ref} changed the reference by {ref.halving_change:.3e} > {tolerance:.3e}"
        )
    return Field(u0.grid, ref.states[-1], FREQUENCY).as_representation(u0.representation)


# --- convergence --------------------------------------------------------------


@dataclass
class ConvergenceReport:
    scheme: str
    d: int
    n: int
    length: float
    s: float
    T: float
    seeds: list[int]
    alpha: float | None
    taus: list[float]
    Ks: list[float | None]
    errors: list[float]
    errors_max_n: list[float]
    errors_per_seed: list[list[float]]
    order: float
    residual: float
    order_log_compensated: float | None
    tau_ref: float
    reference_change: float
    runtimes: list[float]
    failures: list[str] = field(default_factory=list)

    def rows(self):
        seed = ";".join(str(s) for s in self.seeds)
        for tau, K, e, em in zip(self.taus, self.Ks, self.errors, self.errors_max_n):
            yield {
                "d": self.d,
                "n": self.n,
                "L": self.length,
                "scheme": self.scheme,
                "alpha": "" if self.alpha is None else self.alpha,
                "K": "" if K is None else K,
                "tau": tau,
                "T": self.T,
                "s_init": self.s,
                "seed": seed,
                "error_L2": e,
                "error_L2_max_n": em,
            }

    def to_dict(self) -> dict:
        return asdict(self)


def _l2(grid: Grid, v: np.ndarray) -> float:
    return float(np.sqrt(grid.plancherel_weight * np.sum(np.abs(v) ** 2)))


def _run_scheme(u0: Field, cfg: SchemeConfig, checkpoints: list[int]) -> list[np.ndarray]:
    stepper = Stepper(u0.grid, cfg)
    v = stepper.initialize(u0.spectrum)
    out, n = [], 0
    for target in checkpoints:
        while n < target:
            v = stepper.step(v)
            n += 1
            if not np.all(np.isfinite(v)):
                raise BlowUpError(n, cfg.scheme)
        out.append(v)
    return out


def scheme_config(scheme: str, tau: float, steps: int, d: int, alpha: float | None = None,
                  profile: CutoffProfile = CutoffProfile(), mu: int = 1) -> SchemeConfig:
    """Build a config, coupling ``K`` to ``tau`` for filtered schemes.

    ``alpha=None`` means :func:`choose_K` for the low-regularity integrator and
    ``K = tau^(-1/2)`` for filtered Lie.
    """
    filt = None
    if scheme in FILTERED_SCHEMES:
        if alpha is not None:
            filt = FilterParams.from_tau(tau, alpha)
        elif scheme == LIE_FILTERED:
            filt = FilterParams.from_tau(tau, 1.0)
        else:
            filt = choose_K(tau, d)
    return SchemeConfig(scheme, tau, steps, filt, mu, profile)


def run_convergence(scheme: str, grid: Grid, spec: RoughDataSpec, tau_list, T: float, alpha: float | None = None,
                    seeds=None, profile: CutoffProfile = CutoffProfile(), mu: int = 1,
                    ref_factor: int = 64, check_fraction: float = 0.01,
                    reference_cache: dict | None = None) -> ConvergenceReport:
    """Errors at ``T`` against the semi-discrete reference for each ``tau``.

    ``seeds`` (default ``[spec.seed]``) are run independently and their
    errors averaged per ``tau``.  ``tau_ref = min(tau) / ref_factor``.  The
    secondary column is the maximum error over the checkpoints
    ``t = j * max(tau)``.  A failing ``tau`` is recorded in ``failures`` and
    left out of the fit; a reference that moves by more than
    ``check_fraction`` of the smallest error raises
    :class:`ReferenceCheckError`.  Passing the same ``reference_cache`` dict
    to several calls reuses references across schemes.
    """
    taus = sorted((float(t) for t in tau_list), reverse=True)
    if len(set(taus)) != len(taus):
        raise ValueError("tau list must not repeat values")
    seeds = [spec.seed] if seeds is None else [int(s) for s in seeds]
    tau_ref = taus[-1] / ref_factor
    coarse = taus[0]
    n_check = _steps(T, coarse)
    check_times = [coarse * j for j in range(1, n_check + 1)]
    for tau in taus:
        _steps(coarse, tau)

    per_seed, per_seed_max, runtimes, failures = [], [], [0.0] * len(taus), []
    ref_change = 0.0
    Ks = []
    for seed in seeds:
        u0 = generate_rough_data(grid, RoughDataSpec(spec.s, spec.epsilon, seed, spec.normalization))
        key = (grid, spec.s, spec.epsilon, spec.normalization, seed, T, tau_ref, mu, tuple(check_times))
        if reference_cache is not None and key in reference_cache:
            ref = reference_cache[key]
        else:
            ref = compute_reference(u0, T, tau_ref, times=check_times, mu=mu)
            if reference_cache is not None:
                reference_cache[key] = ref
        ref_change = max(ref_change, ref.halving_change)
        errs, errs_max = [], []
        Ks = []
        for i, tau in enumerate(taus):
            steps = _steps(T, tau)
            cfg = scheme_config(scheme, tau, steps, grid.d, alpha, profile, mu)
            Ks.append(cfg.filter.K if cfg.filter is not None else None)
            t0 = time.perf_counter()
            try:
                states = _run_scheme(u0, cfg, [_steps(t, tau) for t in check_times])
            except BlowUpError as exc:
                failures.append(f"seed={seed} tau={tau}: {exc}")
                errs.append(math.nan)
                errs_max.append(math.nan)
                continue
            runtimes[i] += time.perf_counter() - t0
            diffs = [_l2(grid, a - b) for a, b in zip(states, ref.states)]
            errs.append(diffs[-1])
            errs_max.append(max(diffs))
        per_seed.append(errs)
        per_seed_max.append(errs_max)

    errors = np.mean(per_seed, axis=0)
    errors_max = np.mean(per_seed_max, axis=0)
    ok = np.isfinite(errors) & (errors > 0)
    if ok.any() and ref_change > check_fraction * np.min(errors[ok]):
        raise ReferenceCheckError(
            f"reference moved by {ref_change:.3e} when halving tau_ref; "
            f"limit is {check_fraction:g} x smallest error {np.min(errors[ok]):.3e}"
        )
    t_ok = np.asarray(taus)[ok]
    if ok.sum() >= 2:
        order, resid = fit_order(t_ok, errors[ok])
        order_log = fit_order(t_ok, errors[ok], log_power=2 / 3)[0] if grid.d == 3 else None
    else:
        order, resid, order_log = math.nan, math.nan, None
    if alpha is None and scheme in FILTERED_SCHEMES:
        alpha = 1.0 if scheme == LIE_FILTERED else OPTIMAL_ALPHA[grid.d]
    return ConvergenceReport(
        scheme=scheme,
        d=grid.d,
        n=grid.n,
        length=grid.length,
        s=spec.s,
        T=T,
        seeds=seeds,
        alpha=alpha,
        taus=taus,
        Ks=Ks,
        errors=[float(e) for e in errors],
        errors_max_n=[float(e) for e in errors_max],
        errors_per_seed=[[float(e) for e in row] for row in per_seed],
        order=order,
        residual=resid,
        order_log_compensated=order_log,
        tau_ref=tau_ref / 2,
        reference_change=ref_change,
        runtimes=runtimes,
        failures=failures,
    )


# --- local error ----------------------------------------------------------------


@dataclass
class LocalOrderResult:
    scheme: str
    taus: list[float]
    errors: list[float]
    order: float
    residual: float


def run_local_order(scheme: str, u0: Field, tau_list, alpha: float | None = None, mu: int = 1,
                    ref_factor: int = 64, profile: CutoffProfile = CutoffProfile()) -> LocalOrderResult:
    """One-step errors ``||Phi^tau(u0) - u(tau)||_{L^2}`` and their fitted slope.

    The exact flow is the Strang reference with ``tau / ref_factor`` (exact for
    plane waves).
    """
    grid = u0.grid
    taus = sorted((float(t) for t in tau_list), reverse=True)
    errors = []
    for tau in taus:
        cfg = scheme_config(scheme, tau, 1, grid.d, alpha, profile, mu)
        stepper = Stepper(grid, cfg)
        approx = stepper.step(stepper.initialize(u0.spectrum))
        exact = compute_reference(u0, tau, tau / ref_factor, mu=mu).states[-1]
        errors.append(_l2(grid, approx - exact))
    errs = np.asarray(errors)
    if np.all(errs == 0):
        return LocalOrderResult(scheme, taus, errors, math.nan, math.nan)
    order, resid = fit_order(taus, errs)
    return LocalOrderResult(scheme, taus, errors, order, resid)


# --- filtered vs unfiltered ------------------------------------------------------


@dataclass
class FilterGapResult:
    Ks: list[float]
    gaps: list[float]
    slope: float
    residual: float
    T: float
    tau_ref: float


def run_filter_gap(grid: Grid, spec: RoughDataSpec, K_list, T: float, tau_ref: float = 2.0**-10,
                   n_checkpoints: int = 16, mu: int = 1, profile: CutoffProfile = CutoffProfile()) -> FilterGapResult:
    """``max_t ||u(t) - u^K(t)||_{L^2}`` over checkpoints for each ``K``, and the slope against ``K``.

    ``u`` solves the unfiltered semi-discrete NLS and ``u^K`` the filtered one
    with ``u^K(0) = Pi_K u0``.
    """
    u0 = generate_rough_data(grid, spec)
    dt = T / n_checkpoints
    times = [dt * (j + 1) for j in range(n_checkpoints)]
    _steps(dt, tau_ref)
    base = compute_reference(u0, T, tau_ref, times=times, mu=mu)
    Ks, gaps = [], []
    for K in sorted(float(k) for k in K_list):
        filt = compute_reference(u0, T, tau_ref, times=times, mu=mu, filter_K=K, profile=profile)
        gap = max(_l2(grid, a - b) for a, b in zip(base.states, filt.states))
        gap = max(gap, _l2(grid, (1 - projector_symbol(grid, K, profile)) * u0.spectrum))
        Ks.append(K)
        gaps.append(gap)
    gaps_arr = np.asarray(gaps)
    if np.all(gaps_arr > 0) and len(Ks) >= 2:
        slope, resid = fit_loglog(Ks, gaps_arr)
    else:
        slope, resid = math.nan, math.nan
    return FilterGapResult(Ks, gaps, slope, resid, T, base.tau_ref)


def split_error(u_num: np.ndarray, u_filtered: np.ndarray, u_exact: np.ndarray, grid: Grid) -> tuple[float, float, float]:
    """Total error and the two legs ``||u^n - u^K||``, ``||u^K - u||``."""
    return _l2(grid, u_num - u_exact), _l2(grid, u_num - u_filtered), _l2(grid, u_filtered - u_exact)



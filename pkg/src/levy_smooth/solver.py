"""Integrating-factor pseudo-spectral solver for nonlocal drift-diffusion.

Solves ``d_t theta + u.grad theta + L theta - eps Lap theta = f`` on the torus.
The linear part (diffusion symbol, viscosity and any constant drift) is
integrated exactly; advection by a variable drift and the forcing are
advanced with Heun's method on the transformed variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import FrequencyLattice, dealiaser, lp_norm, resample
from .kernels import LevyKernelSpec, QuadratureConfig, SymbolGrid, symbol_grid
from .littlewood_paley import (
    DyadicPartition, build_partition, chi, holder_seminorm,
)


class CFLError(RuntimeError):
    pass


class BlowUpError(FloatingPointError):
    pass


DRIFT_MODES = ("none", "constant", "weierstrass", "sqg")
FORCING_MODES = ("none", "constant", "holder")
DATA_KINDS = ("rough", "modes", "gaussian", "smooth", "zero")


@dataclass(frozen=True)
class DriftSpec:
    """Drift field.

    ``weierstrass`` is the lacunary series ``sum_n 2^{-n delta} cos(2^n s + phase_n)``
    with ``s = x`` in 1-D; in 2-D the shear ``(W1(y), W2(x))``, which is
    divergence free.  ``omega`` makes prescribed drifts oscillate as
    ``cos(omega t)``.
    """

    mode: str = "none"
    amplitude: float = 1.0
    delta: float = 0.9
    velocity: tuple[float, ...] = ()
    omega: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in DRIFT_MODES:
            raise ValueError(f"unknown drift mode {self.mode!r}")
        if not 0 < self.delta <= 1:
            raise ValueError("drift delta must lie in (0, 1]")

    def divergence_free(self, d: int) -> bool:
        if self.mode == "weierstrass":
            return d == 2
        return True


@dataclass(frozen=True)
class ForcingSpec:
    mode: str = "none"
    amplitude: float = 0.0
    delta: float = 0.9
    seed: int = 1

    def __post_init__(self):
        if self.mode not in FORCING_MODES:
            raise ValueError(f"unknown forcing mode {self.mode!r}")


@dataclass(frozen=True)
class DataSpec:
    """Initial data family.

    ``rough``: random phases with ``|theta_hat(k)| = |k|^{-d}``; phases are
    drawn per integer mode from a fixed master table so that resolutions
    ``N`` and ``2N`` share their common modes.  ``modes``: sum of
    ``cos(k.x)`` over ``modes``.  ``smooth``: random phases with ``e^{-|k|/2}``
    amplitudes.  ``gaussian``: periodised bump of width ``width``.
    """

    kind: str = "rough"
    amplitude: float = 1.0
    seed: int = 0
    modes: tuple[tuple[int, ...], ...] = ((1,),)
    width: float = 0.3

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}")


@dataclass(frozen=True)
class SolverConfig:
    d: int = 1
    N: int = 128
    L: float = 1.0
    operator: LevyKernelSpec = field(default_factory=LevyKernelSpec)
    epsilon: float = 0.0
    dt: float = 1e-2
    T: float = 1.0
    drift: DriftSpec = field(default_factory=DriftSpec)
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    data: DataSpec = field(default_factory=DataSpec)
    epsilon_m: float = 0.0
    cfl: float = 0.5
    record_every: int = 1
    snapshot_times: tuple[float, ...] = ()
    p_norms: tuple[float, ...] = (2.0,)

    def __post_init__(self):
        if self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.operator.d != self.d:
            raise ValueError("operator dimension differs from grid dimension")
        if self.epsilon < 0 or self.dt <= 0 or self.T <= 0:
            raise ValueError("need epsilon >= 0, dt > 0, T > 0")
        if not 0 < self.cfl <= 0.5:
            raise ValueError("CFL number must lie in (0, 0.5]")
        if self.drift.mode == "sqg" and self.d != 2:
            raise ValueError("SQG drift needs d = 2")
        if self.drift.mode == "constant" and len(self.drift.velocity) != self.d:
            raise ValueError("constant drift needs one velocity component per dimension")

    @property
    def lattice(self) -> FrequencyLattice:
        return FrequencyLattice(self.d, self.N, self.L)


# --------------------------------------------------------------------------
# data, drift and forcing fields


_MASTER = {1: 8192, 2: 2048}


def _master_phases(d, seed):
    M = _MASTER[d]
    return np.random.default_rng(seed).uniform(0, 2 * np.pi, (M,) * d), M


def _band_field(lat, amp_of_n, seed):
    """Real field ``Re sum_n a(|n|) e^{i(phase_n + k.x)}`` over integer modes n."""
    phases, M = _master_phases(lat.d, seed)
    if lat.N > M:
        raise ValueError(f"random data supports N <= {M} in {lat.d}-D")
    n1 = np.fft.fftfreq(lat.N, 1.0 / lat.N).astype(int)
    idx = np.ix_(*([n1 % M] * lat.d))
    nmag = lat.kmag * lat.L
    with np.errstate(divide="ignore"):
        amp = np.where(nmag > 0, amp_of_n(np.where(nmag > 0, nmag, 1.0)), 0.0)
    coef = amp * np.exp(1j * phases[idx])
    coef[lat.nyquist_mask] = 0.0
    return np.fft.ifftn(coef, axes=tuple(range(lat.d))).real * lat.N**lat.d


def initial_data(cfg: SolverConfig) -> np.ndarray:
    lat = cfg.lattice
    spec = cfg.data
    if spec.kind == "zero":
        return np.zeros(lat.shape)
    if spec.kind == "rough":
        f = _band_field(lat, lambda n: n ** (-float(lat.d)), spec.seed)
    elif spec.kind == "smooth":
        f = _band_field(lat, lambda n: np.exp(-n / 2), spec.seed)
    elif spec.kind == "modes":
        f = np.zeros(lat.shape)
        for m in spec.modes:
            f = f + np.cos(sum(mi / lat.L * xi for mi, xi in zip(m, lat.x)))
    else:
        f = np.zeros(lat.shape)
        c = np.pi * lat.L
        r2 = sum(np.minimum(np.abs(xi - c), 2 * c - np.abs(xi - c)) ** 2 for xi in lat.x)
        f = np.exp(-r2 / (2 * spec.width**2))
    return spec.amplitude * f


def mollify_data(raw: np.ndarray, epsilon_m: float, lattice: FrequencyLattice):
    """Multiply the spectrum by ``chi(epsilon_m |k|)``.

    Returns the smoothed field and the overshoot
    ``eta = max(0, ||out||_inf / ||raw||_inf - 1)``.
    """
    if epsilon_m < 0:
        raise ValueError("epsilon_m must be nonnegative")
    if epsilon_m == 0:
        return raw.copy(), 0.0
    out = lattice.ifft(lattice.fft(raw) * chi(epsilon_m * lattice.kmag))
    top = np.abs(raw).max()
    eta = max(0.0, np.abs(out).max() / top - 1.0) if top > 0 else 0.0
    return out, float(eta)


def lacunary(s, delta, n_max, rng):
    out = np.zeros_like(s)
    for n in range(n_max + 1):
        out += 2.0 ** (-n * delta) * np.cos(2.0**n * s + rng.uniform(0, 2 * np.pi))
    return out


def _lacunary_terms(lat):
    # keep every term below a third of the Nyquist frequency
    return max(0, int(math.floor(math.log2(lat.N / 6))))


def prescribed_drift(cfg: SolverConfig) -> np.ndarray | None:
    """Time-independent drift profile of shape ``(d, N, ...)``."""
    lat = cfg.lattice
    dr = cfg.drift
    if dr.mode in ("none", "sqg"):
        return None
    if dr.mode == "constant":
        return np.array([np.full(lat.shape, v) for v in dr.velocity])
    rng = np.random.default_rng(dr.seed)
    nt = _lacunary_terms(lat)
    if lat.d == 1:
        return dr.amplitude * lacunary(lat.x[0] / lat.L, dr.delta, nt, rng)[None]
    u1 = lacunary(lat.x[1] / lat.L, dr.delta, nt, rng)
    u2 = lacunary(lat.x[0] / lat.L, dr.delta, nt, rng)
    return dr.amplitude * np.array([u1, u2])


def forcing_field(cfg: SolverConfig) -> np.ndarray:
    lat = cfg.lattice
    fo = cfg.forcing
    if fo.mode == "none":
        return np.zeros(lat.shape)
    if fo.mode == "constant":
        return np.full(lat.shape, fo.amplitude)
    rng = np.random.default_rng(fo.seed)
    nt = _lacunary_terms(lat)
    f = lacunary(lat.x[0] / lat.L, fo.delta, nt, rng)
    if lat.d == 2:
        f = f + lacunary(lat.x[1] / lat.L, fo.delta, nt, rng)
    return fo.amplitude * f


def riesz_drift(th_hat, lat):
    """SQG velocity ``(-R2 theta, R1 theta)`` in spectral form."""
    km = np.where(lat.kmag > 0, lat.kmag, 1.0)
    r1 = lat.ik[0] / km
    r2 = lat.ik[1] / km
    return np.array([-r2 * th_hat, r1 * th_hat])


# --------------------------------------------------------------------------
# time stepping


@dataclass
class State:
    t: float
    theta_hat: np.ndarray


class Model:
    """Precomputed operators for one configuration."""

    def __init__(self, cfg: SolverConfig, quad: QuadratureConfig | None = None):
        self.cfg = cfg
        lat = self.lattice = cfg.lattice
        self.symbol: SymbolGrid = symbol_grid(cfg.operator, lat, quad)
        lin = self.symbol.values + cfg.epsilon * lat.kmag**2
        u0 = prescribed_drift(cfg)
        self.u_profile = None
        self.u_hat = None
        self.u_max = 0.0
        if cfg.drift.mode == "constant":
            # constant transport is linear: fold it into the integrating factor
            lin = lin + sum(c * ik for c, ik in zip(cfg.drift.velocity, lat.ik))
        elif u0 is not None:
            self.u_profile = u0
            self.u_hat = np.array([lat.fft(c) for c in u0])
            self.u_pad = [dealiaser(lat).physical(c) for c in self.u_hat]
            self.u_max = float(np.max(np.sqrt(np.sum(u0**2, axis=0))))
        self.lin = lin
        self.dealias = dealiaser(lat)
        f = forcing_field(cfg)
        self.forcing = f
        self.f_hat = lat.fft(f)
        self.has_forcing = bool(np.any(f != 0))
        self._E: dict[float, np.ndarray] = {}
        self.drift_seminorm = (
            holder_seminorm(u0, min(cfg.drift.delta, 0.999), lat)
            if self.u_profile is not None else 0.0
        )

    def E(self, h: float) -> np.ndarray:
        if h not in self._E:
            if len(self._E) > 8:
                self._E.clear()
            self._E[h] = np.exp(-h * self.lin)
        return self._E[h]

    def drift_hat(self, th_hat, t):
        mode = self.cfg.drift.mode
        if mode == "sqg":
            return riesz_drift(th_hat, self.lattice)
        if self.u_hat is None:
            return None
        w = self.cfg.drift.omega
        return self.u_hat * (math.cos(w * t) if w else 1.0)

    def speed(self, th_hat, t) -> float:
        if self.cfg.drift.mode == "sqg":
            u = np.array([self.lattice.ifft(c) for c in riesz_drift(th_hat, self.lattice)])
            return float(np.max(np.sqrt(np.sum(u**2, axis=0))))
        w = self.cfg.drift.omega
        return self.u_max * (abs(math.cos(w * t)) if w else 1.0)

    def rhs(self, th_hat, t):
        out = np.zeros_like(th_hat)
        mode = self.cfg.drift.mode
        if mode == "sqg":
            uh = riesz_drift(th_hat, self.lattice)
            out -= self.dealias.advect([self.dealias.physical(c) for c in uh], th_hat)
        elif self.u_hat is not None:
            w = self.cfg.drift.omega
            fac = math.cos(w * t) if w else 1.0
            out -= fac * self.dealias.advect(self.u_pad, th_hat)
        if self.has_forcing:
            out += self.f_hat
        return out

    @property
    def nonlinear(self) -> bool:
        return self.u_hat is not None or self.cfg.drift.mode == "sqg" or self.has_forcing


def step(state: State, model: Model, h: float | None = None) -> State:
    """Advance one integrating-factor Heun step of size ``h`` (default ``dt``)."""
    h = model.cfg.dt if h is None else h
    E = model.E(h)
    th = state.theta_hat
    if not model.nonlinear:
        return State(state.t + h, E * th)
    speed = model.speed(th, state.t)
    limit = model.cfg.cfl * model.lattice.dx
    if speed * h > limit:
        raise CFLError(
            f"dt={h:.3g} exceeds CFL limit {limit / speed:.3g} at t={state.t:.4g} (|u|={speed:.3g})"
        )
    k1 = model.rhs(th, state.t)
    pred = E * (th + h * k1)
    k2 = model.rhs(pred, state.t + h)
    new = E * (th + 0.5 * h * k1) + 0.5 * h * k2
    if not np.all(np.isfinite(new)):
        raise BlowUpError(f"non-finite values at t={state.t + h:.4g}")
    return State(state.t + h, new)


@dataclass
class Trajectory:
    """Recorded solver output.

    Scalar norms are recorded every step; ``block_linf[i, j+1]`` is
    ``||Delta_j theta(block_times[i])||_inf``, recorded every
    ``record_every`` steps and at every snapshot; ``block_lp[p]`` likewise.
    """

    config: SolverConfig
    times: np.ndarray
    linf: np.ndarray
    lp: dict[float, np.ndarray]
    block_j: np.ndarray
    block_times: np.ndarray
    block_linf: np.ndarray
    block_lp: dict[float, np.ndarray]
    snapshots: dict[float, np.ndarray]
    theta0: np.ndarray
    final: np.ndarray
    forcing_linf: float
    forcing_lp: dict[float, float]
    drift_seminorm: float
    mollifier_overshoot: float = 0.0
    config_hash: str = ""

    @property
    def lattice(self) -> FrequencyLattice:
        return self.config.lattice

    @property
    def partition(self) -> DyadicPartition:
        return build_partition(self.lattice)

    def snapshot(self, t: float) -> np.ndarray:
        best = min(self.snapshots, key=lambda s: abs(s - t))
        if abs(best - t) > 1e-9 * max(1.0, t):
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[best]


def _segments(cfg):
    targets = sorted({float(t) for t in cfg.snapshot_times if 0 < t < cfg.T} | {float(cfg.T)})
    return targets


def solve(cfg: SolverConfig, quad: QuadratureConfig | None = None,
          model: Model | None = None) -> Trajectory:
    """Integrate to ``T``, landing exactly on every snapshot time."""
    from .io import config_hash

    model = model or Model(cfg, quad)
    lat = model.lattice
    part = build_partition(lat)
    raw = initial_data(cfg)
    theta0, eta = mollify_data(raw, cfg.epsilon_m, lat)
    th_hat = lat.fft(theta0)
    th_hat[lat.nyquist_mask] = 0.0
    theta0 = lat.ifft(th_hat)
    state = State(0.0, th_hat)
    js = np.array(list(part.indices))
    mults = [part.multiplier(j) for j in js]

    times, linf, lp = [], [], {p: [] for p in cfg.p_norms}
    btimes, blin, blp = [], [], {p: [] for p in cfg.p_norms}

    def record(st, blocks_too):
        field_ = lat.ifft(st.theta_hat)
        times.append(st.t)
        linf.append(lp_norm(field_, np.inf))
        for p in cfg.p_norms:
            lp[p].append(lp_norm(field_, p))
        if blocks_too:
            btimes.append(st.t)
            blocks = [lat.ifft(st.theta_hat * m) for m in mults]
            blin.append([lp_norm(b, np.inf) for b in blocks])
            for p in cfg.p_norms:
                blp[p].append([lp_norm(b, p) for b in blocks])
        return field_

    record(state, True)
    snaps = {0.0: theta0}
    count = 0
    for target in _segments(cfg):
        n = max(1, math.ceil((target - state.t) / cfg.dt - 1e-9))
        h = (target - state.t) / n
        for i in range(n):
            state = step(state, model, h)
            count += 1
            if i == n - 1:
                state.t = target
                snaps[target] = record(state, True)
            else:
                record(state, count % cfg.record_every == 0)

    f = model.forcing
    return Trajectory(
        config=cfg,
        times=np.array(times),
        linf=np.array(linf),
        lp={p: np.array(v) for p, v in lp.items()},
        block_j=js,
        block_times=np.array(btimes),
        block_linf=np.array(blin),
        block_lp={p: np.array(v) for p, v in blp.items()},
        snapshots=snaps,
        theta0=theta0,
        final=snaps[float(cfg.T)],
        forcing_linf=lp_norm(f, np.inf),
        forcing_lp={p: lp_norm(f, p) for p in cfg.p_norms},
        drift_seminorm=model.drift_seminorm,
        mollifier_overshoot=eta,
        config_hash=config_hash(cfg),
    )


def diffusion_closed_form(cfg: SolverConfig, t: float) -> np.ndarray:
    """Exact ``e^{-t(A + eps |k|^2)} theta_0`` for runs without drift or forcing."""
    model = Model(cfg)
    lat = model.lattice
    theta0, _ = mollify_data(initial_data(cfg), cfg.epsilon_m, lat)
    th = lat.fft(theta0)
    th[lat.nyquist_mask] = 0.0
    return lat.ifft(np.exp(-t * model.lin) * th)


# --------------------------------------------------------------------------
# sweeps


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("LEVY_SMOOTH_THREADS", "1")))
    except ValueError:
        return 1


def _final_field(cfg):
    return solve(cfg).final


def run_many(configs, workers: int | None = None):
    """Final fields of several runs, fanned out over a process pool."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(configs) <= 1:
        return [_final_field(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_final_field, configs))


@dataclass
class ConvergenceReport:
    eps: np.ndarray
    differences: np.ndarray  # ||theta_{eps_i}(T) - theta_{eps_{i+1}}(T)||_inf
    slope: float  # fitted exponent of differences against eps_i
    monotone: bool


def vanishing_viscosity_sweep(cfg: SolverConfig, eps_list, workers: int | None = None) -> ConvergenceReport:
    eps = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps) > 0) or eps[-1] < 0:
        raise ValueError("eps_list must be nonincreasing and nonnegative")
    finals = run_many([replace(cfg, epsilon=float(e)) for e in eps], workers)
    return convergence_from_finals(eps, finals)


def convergence_from_finals(eps, finals) -> ConvergenceReport:
    """Successive sup-norm differences of final fields and their log-log slope in ``eps``."""
    eps = np.asarray(eps, dtype=float)
    diffs = np.array([np.abs(a - b).max() for a, b in zip(finals[:-1], finals[1:])])
    good = (diffs > 0) & (eps[:-1] > 0)
    if good.sum() >= 2:
        slope = float(np.polyfit(np.log(eps[:-1][good]), np.log(diffs[good]), 1)[0])
    else:
        slope = float("nan")
    return ConvergenceReport(eps, diffs, slope, bool(np.all(np.diff(diffs) <= 0)))


def resolution_pair(cfg: SolverConfig):
    """Final fields at ``N`` and ``2N``, the latter resampled onto the coarse grid."""
    fine_cfg = replace(cfg, N=2 * cfg.N)
    a = solve(cfg).final
    b = solve(fine_cfg).final
    return a, resample(b, fine_cfg.lattice, cfg.lattice)

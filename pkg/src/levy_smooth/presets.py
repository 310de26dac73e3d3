"""Named verification presets.

Each preset pairs a default solver configuration (a function of the seed)
with the checks run on it.  ``run_preset`` accepts an optional
configuration that replaces the default, so a check can be pointed at any
operator, for example a signed kernel for ``mp-31``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .harness import (
    EstimateReport, IterationSchedule, check_block_decay, check_c1gamma,
    check_lp_bound, check_lp_smoothing_ladder, check_maximum_principle,
    check_smoothing_rate, check_symbol_lower_bound, check_time_weight_lemma,
    check_vanishing_viscosity, check_waypoint_ladder,
)
from .kernels import LevyKernelSpec, signed_kernel, truncated_power_kernel
from .solver import (
    DataSpec, DriftSpec, ForcingSpec, SolverConfig, solve,
    vanishing_viscosity_sweep,
)

EPS_SWEEP = (0.1, 0.05, 0.025)


# --------------------------------------------------------------------------
# reference configurations


def max_principle_config(seed: int = 0, operator: LevyKernelSpec | None = None) -> SolverConfig:
    """2D run with a shear Weierstrass drift and mollified rough data."""
    if operator is None:
        choices = (LevyKernelSpec(2, 0.5), LevyKernelSpec(2, 0.8),
                   truncated_power_kernel(2, 0.6))
        operator = choices[seed % len(choices)]
    return SolverConfig(
        d=2, N=256, operator=operator, dt=0.004, T=1.0, cfl=0.3, record_every=25,
        drift=DriftSpec("weierstrass", amplitude=0.5, delta=0.8, seed=seed + 101),
        data=DataSpec("rough", seed=seed), epsilon_m=1 / 40,
    )


def diffusion_config(seed: int = 0) -> SolverConfig:
    return SolverConfig(d=1, N=128, operator=LevyKernelSpec(1, 0.5), dt=0.5, T=40.0,
                        data=DataSpec("rough", seed=seed))


def weak_drift_config(seed: int = 0, amplitude: float = 0.1) -> SolverConfig:
    return SolverConfig(
        d=1, N=256, operator=LevyKernelSpec(1, 0.5), dt=0.005, T=1.0, cfl=0.2,
        drift=DriftSpec("weierstrass", amplitude=amplitude, delta=0.8, seed=seed + 2),
        data=DataSpec("rough", seed=seed),
    )


def smoothing_config(seed: int = 0) -> SolverConfig:
    return SolverConfig(
        d=1, N=256, operator=LevyKernelSpec(1, 0.6), dt=0.002, T=1.0, cfl=0.2,
        drift=DriftSpec("weierstrass", amplitude=0.5, delta=0.8, seed=seed + 2),
        data=DataSpec("rough", seed=seed), record_every=50,
        snapshot_times=tuple(float(t) for t in np.logspace(-4, 0, 25)),
    )


def _window_times(schedule: IterationSchedule, T: float, n: int = 11):
    ts = set(float(t) for t in schedule.waypoints)
    ts.update(float(t) for t in np.linspace(schedule.t_tilde, T, n))
    return tuple(sorted(ts))


def ladder_schedule(alpha: float = 0.4, sigma: float = 0.0, delta: float = 0.9,
                    t_tilde: float = 0.5, framework: str = "linf") -> IterationSchedule:
    return IterationSchedule.build(alpha, sigma, delta, t_tilde, framework=framework)


def c1gamma_config(seed: int = 0, schedule: IterationSchedule | None = None) -> SolverConfig:
    sch = schedule or ladder_schedule()
    return SolverConfig(
        d=1, N=256, operator=LevyKernelSpec(1, sch.alpha, sch.sigma), dt=5e-4, T=1.0, cfl=0.2,
        drift=DriftSpec("weierstrass", amplitude=0.5, delta=sch.delta, seed=seed + 2),
        data=DataSpec("rough", seed=seed), record_every=50,
        snapshot_times=_window_times(sch, 1.0),
    )


def step2_config(seed: int = 0) -> SolverConfig:
    """Four-rung ladder run; weak diffusion needs ``N = 512`` to resolve the top rung."""
    return replace(c1gamma_config(seed, step2_schedule()), N=512)


def step2_schedule() -> IterationSchedule:
    """Four-rung ladder: ``alpha - sigma = 0.3`` needs ``k = 2``."""
    return ladder_schedule(alpha=0.3, delta=0.9)


def lp_schedule() -> IterationSchedule:
    return ladder_schedule(alpha=0.8, delta=0.9, framework="lp")


def lp_config(seed: int = 0, schedule: IterationSchedule | None = None) -> SolverConfig:
    """Signed kernel, constant drift, Hölder forcing, rough L^2 data."""
    sch = schedule or lp_schedule()
    return SolverConfig(
        d=1, N=256, operator=signed_kernel(1, sch.alpha), dt=0.002, T=1.0, cfl=0.2,
        drift=DriftSpec("constant", velocity=(0.5,)),
        forcing=ForcingSpec("holder", amplitude=0.2, delta=sch.delta, seed=seed + 3),
        data=DataSpec("rough", seed=seed), record_every=50, p_norms=(2.0,),
        snapshot_times=_window_times(sch, 1.0),
    )


def linear_config(seed: int = 0) -> SolverConfig:
    """Prescribed drift, single low mode: the vanishing-viscosity preset."""
    return SolverConfig(
        d=1, N=128, operator=LevyKernelSpec(1, 0.5), dt=0.002, T=1.0, cfl=0.2,
        drift=DriftSpec("weierstrass", amplitude=0.2, delta=0.8, seed=seed + 2),
        data=DataSpec("modes", modes=((1,),), seed=seed), record_every=100,
    )


def symbol_spec(sigma: float = 0.25) -> LevyKernelSpec:
    return LevyKernelSpec(1, 1.0, sigma, "logdamped", mu=1.0, lam=math.e)


# --------------------------------------------------------------------------
# preset runners


def _doubled(cfg: SolverConfig) -> SolverConfig:
    return replace(cfg, N=2 * cfg.N)


def _pair(cfgs, workers):
    """Solve several configurations, in a pool when more than one worker is allowed."""
    if workers and workers > 1 and len(cfgs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(min(workers, len(cfgs))) as ex:
            return list(ex.map(solve, cfgs))
    return [solve(c) for c in cfgs]


def _schedule_for(cfg: SolverConfig, framework: str, default: IterationSchedule):
    op = cfg.operator
    if op.alpha == default.alpha and op.sigma == default.sigma:
        return default
    return IterationSchedule.build(op.alpha, op.sigma, cfg.drift.delta if cfg.drift.mode == "weierstrass"
                                   else default.delta, default.t_tilde, framework=framework)


def _with_window(cfg: SolverConfig, schedule: IterationSchedule) -> SolverConfig:
    """Make sure the run records every waypoint and window time of ``schedule``."""
    times = tuple(sorted(set(cfg.snapshot_times) | set(_window_times(schedule, cfg.T))))
    return cfg if times == cfg.snapshot_times else replace(cfg, snapshot_times=times)


def _mp(cfg, seed, workers):
    return [check_maximum_principle(solve(cfg or max_principle_config(seed)))]


def _decay(cfg, seed, workers):
    diff = cfg or diffusion_config(seed)
    drift = weak_drift_config(seed)
    a, b = _pair([diff, drift], workers)
    op = diff.operator
    return [check_block_decay(a, op.alpha, op.sigma, "diffusion"),
            check_block_decay(b, drift.operator.alpha, drift.operator.sigma, "drift")]


def _timeweight(cfg, seed, workers):
    return [check_time_weight_lemma(
        lambdas=2.0 ** np.arange(11), ls=(0.1, 0.5, 0.9), ts=2.0 ** np.arange(-5, 4))]


def _symbol(cfg, seed, workers):
    spec = cfg.operator if cfg is not None else symbol_spec()
    return [check_symbol_lower_bound(spec, N=cfg.N if cfg is not None else 128)]


def _lp(cfg, seed, workers):
    cfg = cfg or lp_config(seed)
    a, b = _pair([cfg, replace(cfg, dt=cfg.dt / 2)], workers)
    return [check_lp_bound(a, p, reference=b) for p in cfg.p_norms]


def _smooth(cfg, seed, workers, s=0.5):
    cfg = cfg or smoothing_config(seed)
    a, b = _pair([cfg, _doubled(cfg)], workers)
    return [check_smoothing_rate(a, s, cfg.operator.alpha, cfg.operator.sigma, reference=b)]


def _ladder2(cfg, seed, workers):
    sch = step2_schedule()
    cfg = cfg or step2_config(seed)
    sch = _schedule_for(cfg, "linf", sch)
    cfg = _with_window(cfg, sch)
    a, b = _pair([cfg, _doubled(cfg)], workers)
    return [check_waypoint_ladder(a, sch, reference=b)]


def _thm1(cfg, seed, workers):
    sch = ladder_schedule()
    cfg = cfg or c1gamma_config(seed, sch)
    sch = _schedule_for(cfg, "linf", sch)
    cfg = _with_window(cfg, sch)
    a, b = _pair([cfg, _doubled(cfg)], workers)
    return [check_c1gamma(a, sch, reference=b)]


def _thm2(cfg, seed, workers):
    sch = lp_schedule()
    cfg = cfg or lp_config(seed, sch)
    sch = _schedule_for(cfg, "lp", sch)
    cfg = _with_window(cfg, sch)
    a, b, c = _pair([cfg, replace(cfg, dt=cfg.dt / 2), _doubled(cfg)], workers)
    reps = [check_lp_bound(a, p, reference=b) for p in cfg.p_norms]
    reps += [check_lp_smoothing_ladder(a, sch, p, reference=c) for p in cfg.p_norms]
    return reps


@dataclass(frozen=True)
class Preset:
    name: str
    summary: str
    config: Callable[[int], SolverConfig] | None
    runner: Callable


PRESETS = {
    p.name: p
    for p in (
        Preset("mp-31", "sup-norm nonincrease with a divergence-free drift", max_principle_config, _mp),
        Preset("decay-32", "per-block decay rates, pure diffusion and weak drift", diffusion_config, _decay),
        Preset("timeweight-33", "time-weighted integral inequality", None, _timeweight),
        Preset("symbol-41", "symbol lower bound for the log-damped operator",
               lambda seed: SolverConfig(d=1, N=128, operator=symbol_spec()), _symbol),
        Preset("lp-43", "L^p growth constant, stable under time-step halving", lp_config, _lp),
        Preset("smooth-step1", "first smoothing step from rough data", smoothing_config, _smooth),
        Preset("ladder-step2", "four-rung regularity ladder at the waypoints",
               step2_config, _ladder2),
        Preset("c1gamma-thm1", "C^{1,gamma} window from bounded data", c1gamma_config, _thm1),
        Preset("c1gamma-thm2", "C^{1,gamma} window from L^2 data with a signed kernel", lp_config, _thm2),
    )
}


def run_preset(name: str, seed: int = 0, config: SolverConfig | None = None,
               workers: int | None = None) -> list[EstimateReport]:
    """Run the checks of preset ``name``; ``config`` overrides its default run."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    reports = PRESETS[name].runner(config, seed, workers)
    for r in reports:
        r.seed = seed
    return reports


def max_principle_battery(n_runs: int = 20, seed: int = 0, workers: int | None = None,
                          tol_rel: float = 1e-3) -> list[EstimateReport]:
    """Randomised maximum-principle runs cycling through three positive kernels."""
    cfgs = [max_principle_config(seed + i) for i in range(n_runs)]
    return [check_maximum_principle(t, tol_rel) for t in _pair(cfgs, workers)]


def viscosity_report(cfg: SolverConfig | None = None, eps=EPS_SWEEP,
                     workers: int | None = None) -> EstimateReport:
    conv = vanishing_viscosity_sweep(cfg or linear_config(), eps, workers)
    return check_vanishing_viscosity(conv)

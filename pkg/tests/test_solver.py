import math
from dataclasses import replace

import numpy as np
import pytest

from levy_smooth.grid import FrequencyLattice, lp_norm, resample
from levy_smooth.kernels import LevyKernelSpec, signed_kernel, truncated_power_kernel
from levy_smooth.solver import (
    BlowUpError, CFLError, DataSpec, DriftSpec, ForcingSpec, Model, SolverConfig,
    convergence_from_finals, diffusion_closed_form, initial_data, mollify_data, prescribed_drift,
    resolution_pair, riesz_drift, run_many, solve, vanishing_viscosity_sweep, worker_count,
)


def base(**kw):
    cfg = dict(d=1, N=64, operator=LevyKernelSpec(1, 0.5), dt=0.01, T=0.5)
    cfg.update(kw)
    return SolverConfig(**cfg)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(N=48), dict(d=2), dict(epsilon=-1.0), dict(dt=0.0), dict(cfl=0.7),
        dict(drift=DriftSpec("sqg")), dict(drift=DriftSpec("constant", velocity=(1.0, 2.0))),
    ])
    def test_rejected(self, kw):
        with pytest.raises(ValueError):
            base(**kw)

    @pytest.mark.parametrize("spec", [
        lambda: DriftSpec("vortex"), lambda: DriftSpec(delta=0.0), lambda: ForcingSpec("random"),
        lambda: DataSpec("noise"),
    ])
    def test_bad_specs(self, spec):
        with pytest.raises(ValueError):
            spec()

    def test_divergence_flags(self):
        assert not DriftSpec("weierstrass").divergence_free(1)
        assert DriftSpec("weierstrass").divergence_free(2)
        assert DriftSpec("constant", velocity=(1.0,)).divergence_free(1)


class TestFields:
    def test_rough_data_shares_modes_across_resolutions(self):
        a = initial_data(base(N=64))
        b = initial_data(base(N=128))
        lat = FrequencyLattice(1, 64)
        assert np.allclose(resample(b, FrequencyLattice(1, 128), lat),
                           lat.ifft(np.where(lat.nyquist_mask, 0, lat.fft(a))), atol=1e-12)

    def test_rough_spectrum_decay(self):
        cfg = base(N=256, data=DataSpec("rough", seed=4))
        lat = cfg.lattice
        amp = np.abs(lat.fft(initial_data(cfg))) / lat.N
        # the real part mixes the phases at +n and -n: |coefficient| = |cos(...)| / n
        scaled = amp[1:128] * np.arange(1, 128)
        assert np.all(scaled <= 1 + 1e-12)
        assert scaled.max() > 0.95

    def test_modes_and_zero(self):
        cfg = base(data=DataSpec("modes", modes=((2,), (3,)), amplitude=2.0))
        x = cfg.lattice.x[0]
        assert np.allclose(initial_data(cfg), 2 * (np.cos(2 * x) + np.cos(3 * x)))
        assert not np.any(initial_data(base(data=DataSpec("zero"))))

    def test_gaussian_is_periodic_bump(self):
        f = initial_data(base(data=DataSpec("gaussian", width=0.3)))
        assert f.max() == pytest.approx(1.0) and f.min() > 0
        assert np.argmax(f) == 32

    def test_mollifier(self):
        lat = FrequencyLattice(1, 128)
        raw = np.sign(np.sin(lat.x[0]))
        out, eta = mollify_data(raw, 1 / 16, lat)
        assert eta >= 0
        assert np.all(np.abs(lat.fft(out))[lat.kmag >= 16] < 1e-9)
        same, zero = mollify_data(raw, 0.0, lat)
        assert np.array_equal(same, raw) and zero == 0.0
        with pytest.raises(ValueError):
            mollify_data(raw, -1.0, lat)

    def test_shear_drift_is_divergence_free(self):
        cfg = base(d=2, N=32, operator=LevyKernelSpec(2, 0.5), drift=DriftSpec("weierstrass", delta=0.7))
        lat = cfg.lattice
        u = prescribed_drift(cfg)
        div = lat.ifft(lat.ik[0] * lat.fft(u[0]) + lat.ik[1] * lat.fft(u[1]))
        assert np.abs(div).max() < 1e-12
        assert Model(cfg).drift_seminorm > 0

    def test_riesz_drift_is_divergence_free(self, rng):
        lat = FrequencyLattice(2, 32)
        th = lat.fft(rng.standard_normal(lat.shape))
        u = riesz_drift(th, lat)
        assert np.abs(lat.ik[0] * u[0] + lat.ik[1] * u[1]).max() < 1e-10


class TestExactness:
    @pytest.mark.parametrize("op", [LevyKernelSpec(1, 0.5), truncated_power_kernel(1, 0.7)])
    def test_pure_diffusion_matches_semigroup(self, op):
        cfg = base(operator=op, epsilon=0.01, T=0.7, data=DataSpec("rough"))
        traj = solve(cfg)
        assert np.allclose(traj.final, diffusion_closed_form(cfg, 0.7), atol=1e-13)

    def test_constant_drift_translates(self):
        cfg = base(operator=LevyKernelSpec(1, 0.6), data=DataSpec("modes", modes=((3,),)),
                   drift=DriftSpec("constant", velocity=(0.8,)), T=1.3, dt=0.1)
        x = cfg.lattice.x[0]
        want = math.exp(-1.3 * 3**0.6) * np.cos(3 * (x - 0.8 * 1.3))
        assert np.allclose(solve(cfg).final, want, atol=1e-13)

    def test_forcing_against_duhamel(self):
        cfg = base(forcing=ForcingSpec("holder", amplitude=0.5, delta=0.9, seed=7),
                   data=DataSpec("modes", modes=((1,),)), T=1.0, dt=0.005)
        model = Model(cfg)
        lat = cfg.lattice
        th0 = lat.fft(initial_data(cfg))
        lam = model.lin
        safe = np.where(lam > 0, lam, 1.0)
        growth = np.where(lam > 0, (1 - np.exp(-lam)) / safe, 1.0)
        want = lat.ifft(np.exp(-lam) * th0 + growth * model.f_hat)
        assert np.abs(solve(cfg, model=model).final - want).max() < 1e-5

    def test_heun_is_second_order(self):
        cfg = base(N=64, operator=LevyKernelSpec(1, 0.5), T=0.5,
                   drift=DriftSpec("weierstrass", amplitude=0.5, delta=0.8, seed=1),
                   data=DataSpec("smooth", seed=2), cfl=0.5)
        ref = solve(replace(cfg, dt=0.0025 / 4)).final
        errs = [np.abs(solve(replace(cfg, dt=h)).final - ref).max() for h in (0.01, 0.005, 0.0025)]
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(rates > 1.8)


class TestTrajectory:
    def test_snapshots_land_exactly(self):
        cfg = base(snapshot_times=(0.123, 0.3), dt=0.05, record_every=3)
        traj = solve(cfg)
        assert set(traj.snapshots) == {0.0, 0.123, 0.3, 0.5}
        assert np.allclose(traj.snapshot(0.123), diffusion_closed_form(cfg, 0.123), atol=1e-13)
        assert 0.123 in traj.block_times.tolist()
        with pytest.raises(KeyError):
            traj.snapshot(0.2)

    def test_histories_consistent(self):
        traj = solve(base(data=DataSpec("rough"), p_norms=(2.0, 4.0)))
        assert traj.times.size == traj.linf.size == traj.lp[4.0].size
        assert traj.block_linf.shape == (traj.block_times.size, traj.block_j.size)
        assert traj.linf[0] == pytest.approx(lp_norm(traj.theta0, np.inf))
        assert len(traj.config_hash) == 16

    def test_mean_conserved_under_divergence_free_drift(self):
        cfg = SolverConfig(d=2, N=32, operator=LevyKernelSpec(2, 0.5), dt=0.01, T=0.3,
                           drift=DriftSpec("weierstrass", amplitude=0.5, delta=0.8),
                           data=DataSpec("smooth"))
        traj = solve(cfg)
        assert traj.final.mean() == pytest.approx(traj.theta0.mean(), abs=1e-13)
        assert traj.lp[2.0][-1] <= traj.lp[2.0][0]

    def test_sqg_smoke(self):
        cfg = SolverConfig(d=2, N=32, operator=LevyKernelSpec(2, 0.5), dt=0.01, T=0.2,
                           drift=DriftSpec("sqg"), data=DataSpec("smooth", amplitude=0.5))
        traj = solve(cfg)
        assert np.all(np.isfinite(traj.final))
        assert traj.linf.max() <= traj.linf[0] * (1 + 1e-3)

    def test_oscillating_drift(self):
        cfg = base(drift=DriftSpec("weierstrass", amplitude=0.3, omega=4.0), data=DataSpec("smooth"))
        assert np.all(np.isfinite(solve(cfg).final))

    def test_signed_kernel_grows_low_mode(self):
        cfg = base(operator=signed_kernel(1, 0.8), data=DataSpec("modes", modes=((1,),)), T=1.0)
        assert solve(cfg).linf[-1] > 1.0


class TestFailures:
    def test_cfl(self):
        cfg = base(drift=DriftSpec("weierstrass", amplitude=5.0), dt=0.1)
        with pytest.raises(CFLError):
            solve(cfg)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blow_up(self):
        cfg = base(drift=DriftSpec("weierstrass", amplitude=0.1), dt=0.001,
                   data=DataSpec("smooth", amplitude=1e307))
        with pytest.raises(BlowUpError):
            solve(cfg)


class TestSweeps:
    def test_duhamel_oracle_for_viscosity_differences(self):
        cfg = base(T=1.0, data=DataSpec("modes", modes=((1,), (2,))))
        eps = [0.1, 0.05, 0.025]
        conv = vanishing_viscosity_sweep(cfg, eps, workers=1)
        finals = [diffusion_closed_form(replace(cfg, epsilon=e), 1.0) for e in eps]
        want = [np.abs(a - b).max() for a, b in zip(finals[:-1], finals[1:])]
        assert np.allclose(conv.differences, want, rtol=1e-10)
        assert conv.monotone

    def test_slope_of_linear_differences(self):
        conv = convergence_from_finals([0.4, 0.2, 0.1], [np.zeros(4), np.full(4, 0.4), np.full(4, 0.6)])
        assert conv.slope == pytest.approx(1.0)

    def test_sweep_order_checked(self):
        with pytest.raises(ValueError):
            vanishing_viscosity_sweep(base(), [0.05, 0.1])

    def test_pool_matches_serial(self):
        cfgs = [base(data=DataSpec("rough", seed=s), drift=DriftSpec("weierstrass", amplitude=0.2))
                for s in (1, 2)]
        a = run_many(cfgs, workers=1)
        b = run_many(cfgs, workers=2)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("LEVY_SMOOTH_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("LEVY_SMOOTH_THREADS", "x")
        assert worker_count() == 1

    def test_resolution_pair(self):
        a, b = resolution_pair(base(data=DataSpec("smooth")))
        assert a.shape == b.shape
        assert np.abs(a - b).max() < 1e-10

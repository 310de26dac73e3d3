import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_smooth.grid import FrequencyLattice, LatticeMismatchError
from levy_smooth.kernels import (
    DivergentIntegralError, LevyKernelSpec, MalformedSpecError, NonConvergenceError,
    QuadratureConfig, UnsupportedFormError, apply_operator_quadrature,
    apply_operator_spectral, closed_form_values, fractional_constant, load_profile,
    reconstruct_kernel, save_profile, signed_kernel, spec_from_config, spec_to_config,
    symbol_closed_form, symbol_from_kernel, symbol_grid, symbol_lower_bound_fit,
    symbol_values, truncated_power_kernel, validate_kernel,
)


def mp_symbol_1d(profile, xi, support):
    """2 ∫_0^R (1 - cos(r xi)) k(r) dr by mpmath, R finite."""
    pts = [0] + [support * i / 8 for i in range(1, 9)]
    return float(2 * mp.quad(lambda r: (1 - mp.cos(xi * r)) * profile(r), pts))


def mp_symbol_2d(profile, xi, support):
    pts = [0] + [support * i / 8 for i in range(1, 9)]
    return float(2 * mp.pi * mp.quad(lambda r: (1 - mp.besselj(0, xi * r)) * profile(r) * r, pts))


class TestSpecValidation:
    @pytest.mark.parametrize("kw", [
        dict(alpha=0.0), dict(alpha=1.2), dict(alpha=0.5, sigma=0.5), dict(alpha=0.5, sigma=-0.1),
        dict(d=3), dict(form="gaussian"), dict(form="logdamped", mu=1.0, lam=0.5),
        dict(form="logdamped", mu=-1.0), dict(form="radial"),
    ])
    def test_malformed(self, kw):
        with pytest.raises(MalformedSpecError):
            LevyKernelSpec(**kw)

    def test_unbounded_radial_needs_tail(self):
        with pytest.raises(MalformedSpecError):
            LevyKernelSpec(form="radial", profile=lambda r: r ** -1.5, tail_exponent=0.9)

    def test_order(self):
        assert LevyKernelSpec(1, 0.8, 0.3).order == pytest.approx(0.5)

    def test_multiplier_has_no_kernel(self):
        with pytest.raises(UnsupportedFormError):
            LevyKernelSpec(form="logdamped", mu=1.0).kernel(1.0)


class TestNormalisation:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
    def test_one_dimensional_constant(self, alpha):
        # ∫(1-cos y)|y|^{-1-a} dy over R, split so the non-oscillating part is exact
        c = fractional_constant(1, alpha)
        f = lambda y: (1 - mp.cos(y)) * y ** (-1 - alpha)
        tail = 1 / mp.mpf(alpha) - mp.quadosc(lambda y: mp.cos(y) * y ** (-1 - alpha), [1, mp.inf],
                                              period=2 * mp.pi)
        total = 2 * c * (mp.quad(f, [0, 1]) + tail)
        assert float(total) == pytest.approx(1.0, rel=1e-10)

    def test_two_dimensional_constant(self):
        alpha = 0.6
        c = fractional_constant(2, alpha)
        head = mp.quad(lambda r: (1 - mp.besselj(0, r)) * r ** (-1 - alpha), [0, 1, 5, 20])
        # beyond 20: ∫ r^{-1-a} minus the Bessel part by its leading asymptotics is too crude,
        # so integrate the Bessel part between its zeros instead
        tail = 20 ** (-alpha) / alpha - mp.quadosc(lambda r: mp.besselj(0, r) * r ** (-1 - alpha),
                                                   [20, mp.inf], omega=1)
        assert float(c * 2 * mp.pi * (head + tail)) == pytest.approx(1.0, rel=1e-8)

    def test_alpha_one_limit(self):
        assert fractional_constant(1, 1.0) == pytest.approx(1 / math.pi)


class TestSymbol:
    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
    def test_fractional_matches_power(self, d, alpha):
        spec = LevyKernelSpec(d, alpha)
        xi = np.array([0.5, 1.0, 3.0, 17.0, 64.0])
        assert np.allclose(symbol_values(spec, xi), xi**alpha, rtol=1e-8)

    def test_truncated_kernel_one_dimensional(self):
        spec = truncated_power_kernel(1, 0.5)
        want = mp_symbol_1d(lambda r: r**-1.5, 8.0, 1.0)
        assert symbol_values(spec, [8.0])[0] == pytest.approx(want, rel=1e-9)
        assert want == pytest.approx(9.938214584018, rel=1e-11)

    def test_truncated_kernel_two_dimensional(self):
        spec = truncated_power_kernel(2, 0.6)
        want = mp_symbol_2d(lambda r: r**-2.6, 5.0, 1.0)
        assert symbol_values(spec, [5.0])[0] == pytest.approx(want, rel=1e-9)

    def test_signed_kernel_goes_negative(self):
        A = symbol_values(signed_kernel(1, 0.8), [1.0, 16.0])
        assert A[0] < 0 < A[1]

    def test_grid_invariants(self):
        lat = FrequencyLattice(2, 16)
        sym = symbol_from_kernel(truncated_power_kernel(2, 0.5), lat)
        sym.check_invariants(rtol=1e-10)
        assert sym.values[0, 0] == 0.0

    def test_grid_dispatch(self):
        lat = FrequencyLattice(1, 16)
        assert symbol_grid(LevyKernelSpec(1, 0.5), lat).source == "closed"
        assert symbol_grid(truncated_power_kernel(1), lat).source == "kernel"

    def test_nonconvergence_reported(self):
        spec = truncated_power_kernel(1, 0.5)
        with pytest.raises(NonConvergenceError) as err:
            symbol_values(spec, [60.0], QuadratureConfig(order=2))
        assert err.value.coarse != err.value.fine

    def test_closed_form_logdamped(self):
        spec = LevyKernelSpec(1, 0.5, form="logdamped", mu=2.0, lam=2.0)
        assert closed_form_values(spec, 6.0) == pytest.approx(math.sqrt(6) / math.log(8) ** 2)

    def test_radial_needs_quadrature(self):
        with pytest.raises(UnsupportedFormError):
            closed_form_values(truncated_power_kernel(1), 1.0)
        with pytest.raises(UnsupportedFormError):
            symbol_values(LevyKernelSpec(form="logdamped", mu=1.0), [1.0])

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.1, 1.0), st.floats(0.5, 50.0), st.floats(1.1, 4.0))
    def test_fractional_scaling(self, alpha, xi, lam):
        spec = LevyKernelSpec(1, alpha)
        a, b = symbol_values(spec, [xi, lam * xi])
        assert b == pytest.approx(lam**alpha * a, rel=1e-7)


class TestLowerBound:
    def test_fractional_needs_no_slack(self):
        fit = symbol_lower_bound_fit(symbol_closed_form(LevyKernelSpec(1, 0.5), FrequencyLattice(1, 64)),
                                     0.5, 0.0)
        assert fit.constant == 1.0
        assert fit.slack >= 0

    def test_constant_is_tight(self):
        spec = LevyKernelSpec(1, 1.0, 0.25, "logdamped", mu=1.0)
        sym = symbol_closed_form(spec, FrequencyLattice(1, 64))
        fit = symbol_lower_bound_fit(sym, 1.0, 0.25)
        assert fit.slack == pytest.approx(0.0, abs=1e-12)
        xi = fit.worst_xi
        assert closed_form_values(spec, xi) == pytest.approx(xi**0.75 / fit.constant - fit.constant)

    def test_small_lattice_rejected(self):
        with pytest.raises(ValueError):
            symbol_lower_bound_fit(symbol_closed_form(LevyKernelSpec(1, 0.5), FrequencyLattice(1, 4)),
                                   0.5, 0.0)


class TestOperator:
    @pytest.mark.parametrize("d,N", [(1, 64), (2, 16)])
    def test_quadrature_agrees_with_spectral(self, d, N, rng):
        lat = FrequencyLattice(d, N)
        spec = truncated_power_kernel(d, 0.6)
        x = lat.x
        th = np.cos(3 * x[0]) + 0.5 * np.sin(2 * x[-1] + 1.0)
        sp = lat.ifft(apply_operator_spectral(lat.fft(th), symbol_from_kernel(spec, lat)))
        qu = apply_operator_quadrature(th, lat, spec)
        assert np.abs(qu - sp).max() < 1e-6 * np.abs(sp).max()

    def test_fractional_on_cosine(self):
        lat = FrequencyLattice(1, 32)
        th = np.cos(5 * lat.x[0])
        qu = apply_operator_quadrature(th, lat, LevyKernelSpec(1, 0.5))
        assert np.allclose(qu, math.sqrt(5) * th, atol=1e-8)

    def test_shape_mismatch(self):
        sym = symbol_closed_form(LevyKernelSpec(1, 0.5), FrequencyLattice(1, 16))
        with pytest.raises(LatticeMismatchError):
            apply_operator_spectral(np.zeros(8), sym)


class TestAudit:
    def test_fractional_passes_and_saturates(self):
        audit = validate_kernel(LevyKernelSpec(1, 0.5))
        c = fractional_constant(1, 0.5)
        assert audit.passes_all
        assert audit.c2 == pytest.approx(max(c, 1 / c), rel=1e-12)
        assert audit.inner_exponent == pytest.approx(1.5)

    def test_signed_kernel_fails_positivity(self):
        audit = validate_kernel(signed_kernel(1, 0.8))
        assert audit.integrability and audit.two_sided
        assert audit.nonnegative is False
        assert not audit.passes_all

    def test_false_positivity_claim_noted(self):
        spec = truncated_power_kernel(1, 0.5)
        bad = LevyKernelSpec(1, 0.5, form="radial", profile=lambda r: -spec.profile(r),
                             support=1.0, nonnegative=True)
        audit = validate_kernel(bad)
        assert audit.nonnegative is False
        assert any("nonnegativ" in n for n in audit.notes)

    def test_too_singular_kernel_diverges(self):
        spec = LevyKernelSpec(1, 0.5, form="radial", support=1.0,
                              profile=lambda r: np.asarray(r, dtype=float) ** -3.2)
        with pytest.raises(DivergentIntegralError):
            validate_kernel(spec)

    def test_declared_constants_are_checked(self):
        audit = validate_kernel(LevyKernelSpec(1, 0.5, c1=0.01))
        assert not audit.integrability

    @pytest.mark.parametrize("sigma", [0.1, 0.25])
    def test_logdamped_audit(self, sigma):
        audit = validate_kernel(LevyKernelSpec(1, 0.5, sigma, "logdamped", mu=1.0))
        assert audit.integrability and audit.two_sided and audit.nonnegative

    def test_logdamped_two_dimensional_not_audited(self):
        with pytest.raises(NotImplementedError):
            validate_kernel(LevyKernelSpec(2, 0.5, form="logdamped", mu=1.0))

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
    def test_reconstruction_recovers_fractional_kernel(self, alpha):
        spec = LevyKernelSpec(1, alpha, form="logdamped", mu=0.0)
        r = np.array([2.0**-16, 0.01, 0.3, 1.0, 3.0, 7.9])
        want = fractional_constant(1, alpha) * r ** (-1 - alpha)
        assert np.allclose(reconstruct_kernel(spec, r), want, rtol=1e-6)


class TestSerialisation:
    def test_config_round_trip(self):
        spec = LevyKernelSpec(1, 0.7, 0.2, "logdamped", mu=1.5, lam=3.0)
        assert spec_from_config(spec_to_config(spec), 1) == spec
        signed = spec_from_config({"form": "signed", "alpha": "0.8"}, 1)
        assert signed.nonnegative is False
        assert spec_to_config(signed)["form"] == "signed"

    def test_config_errors(self):
        with pytest.raises(MalformedSpecError):
            spec_from_config({"form": "fractional"}, 1)
        with pytest.raises(MalformedSpecError):
            spec_from_config({"alpha": "0.5", "beta": "1"}, 1)
        with pytest.raises(MalformedSpecError):
            spec_from_config({"alpha": "0.5", "form": "radial"}, 1)

    def test_profile_round_trip(self, tmp_path):
        r = np.logspace(-6, 0, 200)
        path = tmp_path / "trunc.txt"
        save_profile(path, r, r**-1.5, support=1.0)
        spec = load_profile(path, 1, 0.5)
        assert spec.support == 1.0
        xi = [2.0, 8.0]
        want = symbol_values(truncated_power_kernel(1, 0.5), xi)
        assert np.allclose(symbol_values(spec, xi), want, rtol=1e-6)

    def test_profile_with_tail(self, tmp_path):
        r = np.logspace(-4, 0.5, 100)
        path = tmp_path / "tail.txt"
        save_profile(path, r, r**-1.5, tail_exponent=1.5)
        spec = load_profile(path, 1, 0.5)
        assert np.allclose(spec.kernel([10.0, 20.0]), [10.0**-1.5, 20.0**-1.5], rtol=1e-10)
        # c * profile is the fractional kernel, so the symbol is |xi|^0.5 / c
        c = fractional_constant(1, 0.5)
        assert symbol_values(spec, [3.0])[0] * c == pytest.approx(math.sqrt(3), rel=1e-6)

    def test_profile_needs_two_columns(self, tmp_path):
        path = tmp_path / "bad.txt"
        np.savetxt(path, np.ones((4, 3)))
        with pytest.raises(MalformedSpecError):
            load_profile(path, 1, 0.5)

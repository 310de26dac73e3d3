"""Frozen outputs guarding against silent numerical drift.

Run this file as a script to regenerate ``golden/regression.txt`` after a
deliberate change.
"""

import pytest

from levy_smooth.harness import check_symbol_lower_bound, time_weight_integral
from levy_smooth.io import read_golden, write_golden
from levy_smooth.kernels import fractional_constant, signed_kernel, symbol_values, truncated_power_kernel
from levy_smooth.presets import run_preset, symbol_spec, viscosity_report

from conftest import GOLDEN

GOLDEN_FILE = GOLDEN / "regression.txt"

PRODUCERS = {
    "fractional_constant_d1_a0.5": lambda: fractional_constant(1, 0.5),
    "fractional_constant_d2_a0.8": lambda: fractional_constant(2, 0.8),
    "truncated_power_A8": lambda: float(symbol_values(truncated_power_kernel(1, 0.5), [8.0])[0]),
    "signed_A1": lambda: float(symbol_values(signed_kernel(1, 0.8), [1.0])[0]),
    "time_weight_1_0.5_1": lambda: time_weight_integral(1.0, 0.5, 1.0),
    "logdamped_C_s0.25_N128": lambda: check_symbol_lower_bound(symbol_spec(0.25)).constants["C"],
    "smooth_step1_sup_W": lambda: run_preset("smooth-step1")[0].constants["sup_W"],
    "c1gamma_thm1_window": lambda: run_preset("c1gamma-thm1")[0].constants["window_norm"],
    "lp43_C_prime": lambda: run_preset("lp-43")[0].constants["C_prime"],
    "viscosity_slope": lambda: viscosity_report().constants["slope"],
}


@pytest.fixture(scope="module")
def golden():
    return read_golden(GOLDEN_FILE)


def test_golden_covers_producers(golden):
    assert set(golden) == set(PRODUCERS)


@pytest.mark.parametrize("key", sorted(PRODUCERS))
def test_frozen_value(golden, key):
    assert PRODUCERS[key]() == pytest.approx(golden[key], rel=1e-9)


if __name__ == "__main__":
    write_golden(GOLDEN_FILE, {k: f() for k, f in PRODUCERS.items()})

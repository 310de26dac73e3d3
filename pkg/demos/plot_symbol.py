"""
Symbols of jump kernels
=======================

A symmetric jump kernel ``K`` defines a Fourier multiplier

    A(xi) = int (1 - cos(xi . y)) K(y) dy.

For the normalised power kernel this is exactly ``|xi|^alpha``; for other
kernels the quadrature in :mod:`levy_smooth.kernels` computes it.
"""

import math
import sys
from pathlib import Path

import numpy as np

from levy_smooth.kernels import LevyKernelSpec, closed_form_values, symbol_values
from levy_smooth.harness import check_symbol_lower_bound
from levy_smooth.kernels import signed_kernel, truncated_power_kernel, validate_kernel
from levy_smooth.svg import line_plot

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
xi = np.geomspace(1, 64, 40)

# the power kernel reproduces |xi|^alpha to quadrature accuracy
for alpha in (0.3, 0.5, 1.0):
    A = symbol_values(LevyKernelSpec(1, alpha), xi)
    print(f"alpha={alpha}: max |A/|xi|^alpha - 1| = {np.max(np.abs(A / xi**alpha - 1)):.2e}")

# the log-damped operator is given by its symbol |xi|^alpha / log(lambda + |xi|)^mu;
# A(xi) >= |xi|^(alpha - sigma) / C - C still holds with a fitted C
logdamped = LevyKernelSpec(1, 1.0, 0.25, "logdamped", mu=1.0, lam=math.e)
rep = check_symbol_lower_bound(logdamped, N=128)
print(rep.line())

# a truncated kernel keeps only small jumps, a signed kernel has a negative
# well; the audit reports which kernels are nonnegative
for spec in (truncated_power_kernel(1, 0.6), signed_kernel(1, 0.8)):
    audit = validate_kernel(spec)
    print(f"{spec.name}: nonnegative={audit.nonnegative}, A(1)={symbol_values(spec, [1.0])[0]:.4f}")

series = [(xi, symbol_values(LevyKernelSpec(1, 0.5), xi), "power 0.5"),
          (xi, closed_form_values(logdamped, xi), "log-damped"),
          (xi, symbol_values(truncated_power_kernel(1, 0.6), xi), "truncated 0.6"),
          (xi, symbol_values(signed_kernel(1, 0.8), xi), "signed 0.8")]
line_plot(out / "symbols.svg", series, title="symbols", xlabel="|xi|", ylabel="A(xi)", logx=True, logy=True)
print(f"wrote {out / 'symbols.svg'}")

"""
Vanishing viscosity
===================

Adding ``-epsilon Laplacian`` to the equation and letting ``epsilon`` shrink
gives a Cauchy sequence of solutions: successive differences fall roughly
linearly in ``epsilon``.
"""

import sys
from pathlib import Path

import numpy as np

from levy_smooth.harness import check_vanishing_viscosity
from levy_smooth.presets import linear_config
from levy_smooth.solver import vanishing_viscosity_sweep
from levy_smooth.svg import line_plot

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

eps = (0.2, 0.1, 0.05, 0.025, 0.0125)
conv = vanishing_viscosity_sweep(linear_config(), eps)
for e, d in zip(eps, conv.differences):
    print(f"epsilon {e:<7}: ||theta_eps - theta_eps/2||_inf = {d:.4e}")
print(check_vanishing_viscosity(conv).line())
line_plot(out / "viscosity.svg", [(np.array(eps[:-1]), conv.differences, "difference")],
          title="successive differences", xlabel="epsilon", ylabel="sup difference", logx=True, logy=True)
print(f"wrote {out / 'viscosity.svg'}")

"""Two a-priori bounds that hold for all time.

With a positive, non-decreasing kernel (the exponential one) a bounded initial
density never grows: every gap stays at least m/R.  Independently of the
kernel, the support widens at most at rate [v]_Lip * lam, because the speed
difference between the first and last particle is bounded by that amount.
The ramp kernel V(x) = max(0, 1 + x) vanishes far behind, so the maximum
principle does not apply to it; the checker says so instead of guessing.
"""

import numpy as np

from nlcl import Measure1D, builtin_model, check_max_principle, check_support, integrate, quantile_of

start = Measure1D(pieces=((0.0, 0.5, 0.4), (0.5, 1.0, 1.6)))
R = start.sup_density
times = list(np.linspace(0.25, 3.0, 12))

for name in ("exponential", "ramp"):
    model = builtin_model(name)
    traj = integrate(quantile_of(start, 100), model, T=3.0, times=times)
    sup_rho = max(s.mesh / s.gaps.min() for s in traj.snapshots)
    print(f"\n{name}: initial sup density R = {R}, largest density seen = {sup_rho:.4f}")
    print(" ", check_max_principle(traj, R).summary())
    print(" ", check_support(traj).summary())
    widths = [f"{s.width:.3f}" for s in traj.snapshots[::3]]
    print("  width at t = 0, 0.75, 1.5, 2.25, 3.0:", ", ".join(widths))

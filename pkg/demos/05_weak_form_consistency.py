"""How far is the particle density from being a weak solution?

Test the reconstructed density against a smooth bump phi(x, t):

    R = int int rho^N (phi_t + G phi_x) dx dt.

With G the particle's own velocity on its cell, R measures the mismatch
between the particle law and the continuum flux; it shrinks like 1/N.  With
G the Eulerian field v(V * rho^N) of the reconstruction the indicator fan is
already an exact weak solution, so only time-quadrature error is left and R
does not depend on N at all.
"""

import numpy as np

from nlcl import Measure1D, TestBump, builtin_model, integrate, quantile_of, weak_residual

model = builtin_model("burgers_indicator")
bump = TestBump(x0=0.5, t0=0.5, a=0.3, s=0.3)

for n_snap in (64, 128):
    snaps = list(np.arange(1, n_snap + 1) / n_snap)
    print(f"{n_snap} snapshots")
    for N in (32, 64, 128, 256):
        traj = integrate(quantile_of(Measure1D.dirac(0.0), N), model, T=1.0, times=snaps)
        own = weak_residual(traj, [bump], field="particle")
        eul = weak_residual(traj, [bump], field="field")
        print(f"  N = {N:4d}: particle velocity {own:.3e}   Eulerian field {eul:.3e}")

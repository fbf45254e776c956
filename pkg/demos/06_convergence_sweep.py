"""Refining the particle count.

Half the mass starts as a point at the origin, half spread on [1, 2].  Each
run is compared in W_1 with a run at twice the largest N.  Convergence is
guaranteed; no rate is, so the rates below are observations only.
The sweep runs its members in a thread pool capped by NLCL_THREADS.
"""

import math

from nlcl import Measure1D, builtin_model, convergence_study

mixed = Measure1D(atoms=((0.0, 0.5),), pieces=((1.0, 2.0, 0.5),))
for name in ("exponential", "ramp"):
    table = convergence_study(builtin_model(name), mixed, [16, 32, 64, 128], p=1, T=1.0)
    print(f"{name} (reference N = {table.reference_N})")
    for row in table.rows():
        rate = "" if math.isnan(row["rate"]) else f"  rate {row['rate']:.2f}"
        print(f"  N = {row['N']:4d}  W1 = {row['distance']:.3e}{rate}")

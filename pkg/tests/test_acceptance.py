"""Acceptance criteria AC1 to AC10, each at its stated tolerance.

Every criterion prints one ``AC<n> PASS|FAIL ...`` line; the lines are also
collected and repeated in pytest's terminal summary.  Run standalone with
``python tests/test_acceptance.py`` for just the ten lines.
"""

import json
import math
import time

import numpy as np
import pytest

from nlcl.cli import main as cli_main
from nlcl.dynamics import RhsMode, equivalence_check, integrate, rhs
from nlcl.measure import Measure1D, QuantileGrid, quantile_of, reconstruct_density, wasserstein
from nlcl.model import builtin_model, discrete_smoothing_bound, gap_bound, stability_constant
from nlcl.oracle import RAREFACTION
from nlcl.verify import (TestBump, check_gap, check_max_principle, check_smoothing,
                         check_stability, check_support, convergence_study, weak_residual)

IND = builtin_model("burgers_indicator")
EXP = builtin_model("exponential")
UNIFORM = Measure1D.uniform(0, 1)
DIRAC = Measure1D.dirac(0)
MIXED = Measure1D(atoms=((0.0, 0.5),), pieces=((1.0, 2.0, 0.5),))

RESULTS: dict = {}


def record(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[tag] = line
    print(line)
    return ok


def run(model, mu, N, T, times=None):
    return integrate(quantile_of(mu, N), model, RhsMode.PARTICLE_U, T, times=times)


# shared runs, also used by the support criterion
_RUNS: dict = {}


def shared(name):
    if name not in _RUNS:
        _RUNS[name] = {
            "fan": lambda: run(IND, DIRAC, 64, 1.0, [0.1, 0.25, 0.5, 1.0]),
            "gap": lambda: run(EXP, UNIFORM, 128, 2.0, [0.1, 0.5, 1.0, 2.0]),
            "smooth": lambda: run(EXP, DIRAC, 128, 1.0, [0.1, 0.5, 1.0]),
            "maxp": lambda: run(EXP, UNIFORM, 64, 2.0, list(np.linspace(0.05, 2.0, 40))),
        }[name]()
    return _RUNS[name]


def ac1():
    worst_x = worst_rho = worst_w = 0.0
    t0 = time.perf_counter()
    for N in (4, 64, 1024):
        traj = run(IND, DIRAC, N, 1.0)
        X = traj.final
        worst_x = max(worst_x, float(np.max(np.abs(X.values - np.arange(N + 1) / N))))
        worst_rho = max(worst_rho, max(abs(d - 1.0) for _, _, d in reconstruct_density(X).pieces))
        worst_w = max(worst_w, wasserstein(1, X, RAREFACTION.measure(1.0)))
    elapsed = time.perf_counter() - t0
    ok = worst_x <= 1e-12 and worst_rho <= 1e-12 and worst_w <= 1e-10 and elapsed < 1.0
    return record("AC1", ok, f"exact fan: max|x-i/N|={worst_x:.1e} max|rho-1|={worst_rho:.1e} "
                             f"W1={worst_w:.1e} runtime={elapsed:.2f}s")


def ac2():
    t0 = time.perf_counter()
    _RUNS.pop("gap", None)
    traj = shared("gap")
    elapsed = time.perf_counter() - t0
    ratios = [s.gaps.min() / gap_bound(EXP, 128, s.time) for s in traj.snapshots[1:]]
    ok = min(ratios) >= 0.9 and check_gap(traj).passed and elapsed < 10.0
    return record("AC2", ok, f"gap bound: min(min gap / bound)={min(ratios):.3f} (need >= 0.9) "
                             f"runtime={elapsed:.2f}s")


def ac3():
    traj = shared("smooth")
    ratios = [(s.mesh / s.gaps.min()) / discrete_smoothing_bound(EXP, s.time) for s in traj.snapshots[1:]]
    fan = shared("fan")
    dev = max(abs(s.mesh / s.gaps.min() - 1.0 / s.time) * s.time for s in fan.snapshots[1:])
    ok = max(ratios) <= 1.01 and check_smoothing(traj).passed and dev <= 1e-10
    return record("AC3", ok, f"smoothing: max(rho/bound)={max(ratios):.3f} (need <= 1.01); "
                             f"indicator equality rel dev={dev:.1e}")


def ac4():
    traj = shared("maxp")
    r = check_max_principle(traj, 1.0)
    sup_rho = max(s.mesh / s.gaps.min() for s in traj.snapshots)
    ok = bool(r.passed) and sup_rho <= 1.002
    return record("AC4", ok, f"maximum principle: sup rho={sup_rho:.6f} (need <= 1.002), "
                             f"min gap*N={min(r.observed_values) * 64:.6f}")


def ac5():
    worst = -math.inf
    for name in ("fan", "gap", "smooth", "maxp"):
        r = check_support(shared(name))
        worst = max(worst, max(o - b for o, b in zip(r.observed_values, r.bound_values)))
    fan = check_support(shared("fan"))
    eq = max(abs(o - b) for o, b in zip(fan.observed_values, fan.bound_values))
    ok = worst <= 1e-9 and eq <= 1e-10
    return record("AC5", ok, f"support: max(width - bound)={worst:.2e} (need <= 1e-9); "
                             f"fan equality dev={eq:.1e}")


def ac6():
    a = run(EXP, Measure1D.uniform(0, 1), 128, 1.0, [0.25, 0.5, 0.75, 1.0])
    b = run(EXP, Measure1D.uniform(0.05, 1.05), 128, 1.0, [0.25, 0.5, 0.75, 1.0])
    worst = 0.0
    for p in (1, 2, math.inf):
        r = check_stability(a, b, p)
        C = stability_constant(p, EXP)
        w0 = r.observed_values[0]
        worst = max(worst, max(o / (math.exp(C * t) * w0) for t, o in zip(r.times, r.observed_values)))
    fa = run(IND, Measure1D.dirac(0.0), 64, 1.0, [0.5, 1.0])
    fb = run(IND, Measure1D.dirac(0.1), 64, 1.0, [0.5, 1.0])
    drift = max(abs(o - 0.1) for p in (1, 2, math.inf) for o in check_stability(fa, fb, p).observed_values)
    ok = worst <= 1.01 and drift <= 1e-10
    return record("AC6", ok, f"stability: max W_p(t)/(e^Ct W_p(0))={worst:.3f} (need <= 1.01); "
                             f"indicator drift={drift:.1e}")


def ac7():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for k in range(100):
        M = int(rng.integers(2, 200))
        x = np.sort(rng.normal(0, 1.5, M + 1))
        # coincident blocks of random length
        for _ in range(int(rng.integers(1, 5))):
            i = int(rng.integers(0, M))
            j = min(M + 1, i + int(rng.integers(2, 12)))
            x[i:j] = x[i]
        X = QuantileGrid(np.sort(x))
        for model in (EXP, builtin_model("ramp")):
            scale = max(1.0, float(np.max(np.abs(rhs(X, model, RhsMode.PARTICLE_U)))))
            worst = max(worst, equivalence_check(X, model) / scale)
    ok = worst <= 1e-13
    return record("AC7", ok, f"equivalence: max relative |U - V| rhs deviation={worst:.1e} "
                             f"(need <= 1e-13) over 100 states x 2 kernels")


def ac8():
    bump = TestBump(0.5, 0.5, 0.3, 0.3)
    snaps = list(np.arange(1, 65) / 64)
    res = [weak_residual(run(IND, DIRAC, N, 1.0, snaps), [bump]) for N in (32, 64, 128)]
    ok = res[0] > res[1] > res[2] and res[2] <= res[0] / 2
    return record("AC8", ok, "weak residual: " + ", ".join(f"N={n}: {r:.3e}" for n, r in
                                                           zip((32, 64, 128), res)))


def ac9():
    table = convergence_study(EXP, MIXED, [32, 64, 128], p=1, T=1.0)
    d = table.distances
    ok = table.reference_N == 256 and d[0] > d[1] > d[2]
    return record("AC9", ok, "convergence W1 to N=256: " + ", ".join(f"{x:.3e}" for x in d)
                  + " rates " + ", ".join(f"{r:.2f}" for r in table.rates[1:]))


def ac10(tmp_dir):
    failures = []
    # metric axioms on a fixed test set
    mus = [DIRAC, UNIFORM, MIXED, Measure1D.dirac(0.7), Measure1D(pieces=((-1, 0, 0.4), (2, 3, 0.6)))]
    for p in (1, 2, 3, math.inf):
        for a in mus:
            if wasserstein(p, a, a) != 0.0:
                failures.append("identity")
            for b in mus:
                if wasserstein(p, a, b) != wasserstein(p, b, a):
                    failures.append("symmetry")
                for c in mus:
                    if wasserstein(p, a, b) > wasserstein(p, a, c) + wasserstein(p, c, b) + 1e-12:
                        failures.append("triangle")
    # push-forward identity, Lipschitz test function
    phi = lambda x: np.abs(x - 0.3) * 0.5 + x  # noqa: E731
    exact = MIXED.integrate(phi, breaks=(0.3,))
    errs = [abs(np.mean(phi(quantile_of(MIXED, M).values[1:])) - exact) for M in (256, 512, 1024)]
    if not (errs[0] / errs[1] >= 1.8 and errs[1] / errs[2] >= 1.8):
        failures.append("pushforward")
    # translation equivariance
    X0 = quantile_of(UNIFORM, 32)
    a = integrate(X0, EXP, T=1.0).final.values
    b = integrate(X0.shifted(2.5), EXP, T=1.0).final.values
    if np.max(np.abs(b - a - 2.5)) > 1e-12:
        failures.append("translation")
    # step halving
    ends = [integrate(X0, EXP, T=1.0, dt=h).final.values for h in (0.1, 0.05, 0.025)]
    order_ratio = np.max(np.abs(ends[0] - ends[1])) / np.max(np.abs(ends[1] - ends[2]))
    if order_ratio < 8:
        failures.append("step halving")
    # determinism of the CLI outputs
    cfg = tmp_dir / "det.json"
    cfg.write_text(json.dumps({"model": "exponential", "initial": MIXED.to_dict(), "N": 48, "T": 1.0,
                               "snapshot_times": [0.5, 1.0], "output_dir": "out"}))
    blobs = []
    for _ in range(2):
        cli_main(["simulate", str(cfg)])
        blobs.append(b"".join((tmp_dir / "out" / f).read_bytes()
                              for f in ("trajectory.csv", "density.csv", "meta.json")))
    if blobs[0] != blobs[1]:
        failures.append("determinism")
    ok = not failures
    return record("AC10", ok, f"properties: metric, push-forward ({errs[0] / errs[1]:.2f}, "
                              f"{errs[1] / errs[2]:.2f}), translation, step-halving ({order_ratio:.1f}), "
                              f"determinism" + (f"; failed: {sorted(set(failures))}" if failures else ""))


CRITERIA = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"AC{k}" for k in range(1, 10)])
def test_acceptance(criterion):
    assert criterion()


def test_acceptance_AC10(tmp_path):
    assert ac10(tmp_path)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    oks = [c() for c in CRITERIA]
    with tempfile.TemporaryDirectory() as d:
        oks.append(ac10(Path(d)))
    raise SystemExit(0 if all(oks) else 1)

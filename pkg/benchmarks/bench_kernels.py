#!/usr/bin/env python3
"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py            # both backends, side by side
    python benchmarks/bench_kernels.py --single   # current backend only, JSON out

The fallback is selected per process through OSCPINN_DISABLE_NUMBA, so the
default mode runs this file twice in child interpreters.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def best_of(fn, repeat):
    fn()  # warm up, also triggers compilation
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def run_single(repeat):
    from oscpinn import _jit
    from oscpinn.activations import ActivationKind, jet_backward, jet_forward
    from oscpinn.autodiff import loss_and_grad
    from oscpinn.integrators import integrate_ab4, integrate_dopri45, integrate_rk4
    from oscpinn.network import DEFAULT_WIDTHS, init_params
    from oscpinn.problem import OscillatorProblem, collocation_points

    rng = np.random.default_rng(0)
    z = rng.normal(size=(3, 200, 128))
    dh = rng.normal(size=z.shape)
    prob = OscillatorProblem()
    pts = collocation_points(200, prob.t0, prob.t_end)
    params = init_params(DEFAULT_WIDTHS, "asu", 1)

    def jet_round_trip(kind=int(ActivationKind.ASU)):
        _, cache = jet_forward(kind, z)
        jet_backward(dh, z, cache)

    results = {
        "jet fwd+bwd asu (3x200x128)": best_of(jet_round_trip, repeat),
        "loss_and_grad [1,128,128,128,1] n=200": best_of(
            lambda: loss_and_grad(params, prob, "second_order", pts), repeat),
        "rk4 h=1e-3 over [0,10]": best_of(lambda: integrate_rk4(prob, 1e-3, 10_000), repeat),
        "ab4 h=1e-3 over [0,10]": best_of(lambda: integrate_ab4(prob, 1e-3, 10_000), repeat),
        "dopri45 rtol=1e-10 over [0,10]": best_of(lambda: integrate_dopri45(prob, 1e-10, 1e-12), repeat),
    }
    return _jit.backend(), results


def child(disable, repeat):
    env = dict(os.environ, OSCPINN_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, __file__, "--single", "--repeat", str(repeat)],
                         env=env, check=True, capture_output=True, text=True).stdout
    return json.loads(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--single", action="store_true")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if args.single:
        name, results = run_single(args.repeat)
        json.dump({"backend": name, "results": results}, sys.stdout)
        return

    fast = child(False, args.repeat)
    slow = child(True, args.repeat)
    width = max(len(k) for k in fast["results"])
    print(f"{'kernel':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  speedup")
    for key, t_fast in fast["results"].items():
        t_slow = slow["results"][key]
        print(f"{key:<{width}}  {t_fast * 1e3:8.2f}ms  {t_slow * 1e3:8.2f}ms  {t_slow / t_fast:6.1f}x")


if __name__ == "__main__":
    main()

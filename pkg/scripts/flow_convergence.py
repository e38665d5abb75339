"""Step-size sweep for the unit-rate gradient flow of f_torqued on the hyperboloid.

Prints the linearity error max_t |f(phi_t p) - f(p) - t| for each step and the
ratio between successive halvings (about 16 for a fourth-order method until
roundoff takes over).

    python3 scripts/flow_convergence.py --n 3 --start 1,1,1 --t-max 0.5
"""

import argparse

import numpy as np

from tfv import catalog, spaces, theorems


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--start", default=None)
    ap.add_argument("--t-max", type=float, default=0.5)
    ap.add_argument("--steps", default="0.1,0.05,0.025,0.0125,0.001")
    args = ap.parse_args()

    sp = spaces.hyperboloid(args.n)
    f = catalog.scalar("f_torqued", sp)
    start = np.ones(args.n) if args.start is None else np.array([float(v) for v in args.start.split(",")])
    prev = None
    print(f"{'step':>8} {'error':>12} {'ratio':>8}")
    for h in (float(s) for s in args.steps.split(",")):
        err = theorems.gradient_flow_check(sp, f, start, args.t_max, h).linearity_error
        ratio = "" if prev is None else f"{prev / err:8.2f}"
        print(f"{h:8.4g} {err:12.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()

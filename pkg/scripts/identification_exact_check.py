"""Closed-loop sensitivity of the reset loops at a few frequencies, three ways:
event-located exact integration (crossing instants found by bisection on the
exact flow), the sampled simulator used for identification, and the
describing-function prediction.

    python3 scripts/identification_exact_check.py 20 40 150
"""

import math
import sys

import numpy as np
from scipy.linalg import expm

from resetpid.lti import second_order_plant
from resetpid.loopshape import DesignSpec, OpenLoop, pid_comparator, reset_pid_a, reset_pid_b
from resetpid.sysid import IdentPlan, identify_S, predicted_S


def exact_S(controller, plant, w, spc=4000, cycles=30, settle=20):
    C = controller.composite()
    nc, nr, g = C.n_states, controller.n_r, controller.gamma
    n = nc + plant.n_states + 2
    ip = slice(nc, nc + plant.n_states)
    # z = [x_c; x_p; sin; cos], n(t) = sin, e = -(y + n)
    ce = np.zeros(n)
    ce[ip] = -plant.C[0]
    ce[nc + plant.n_states] = -1.0
    cu = np.zeros(n)
    cu[:nc] = C.C[0]
    cu += C.D[0, 0] * ce
    F = np.zeros((n, n))
    F[:nc] = np.outer(C.B[:, 0], ce)
    F[:nc, :nc] += C.A
    F[ip] = np.outer(plant.B[:, 0], cu)
    F[ip, ip] += plant.A
    k = nc + plant.n_states
    F[k, k + 1], F[k + 1, k] = w, -w
    h = 2 * math.pi / (w * spc)
    E = expm(F * h)
    z = np.zeros(n)
    z[k + 1] = 1.0
    e0 = ce @ z
    ys, ns, resets = [], [], 0
    for i in range(cycles * spc):
        if i >= settle * spc:
            ys.append(plant.C[0] @ z[ip])
            ns.append(z[k])
        z1 = E @ z
        e1 = ce @ z1
        if e0 * e1 < 0:
            lo, hi = 0.0, h
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if (ce @ (expm(F * mid) @ z)) * e0 < 0:
                    hi = mid
                else:
                    lo = mid
            zm = expm(F * hi) @ z
            zm[:nr] *= g
            resets += 1
            z1 = expm(F * (h - hi)) @ zm
            e1 = ce @ z1
        z, e0 = z1, e1
    ys, ns = np.array(ys), np.array(ns)
    basis = np.exp(-1j * w * h * np.arange(ys.size))
    return (ys + ns) @ basis / (ns @ basis), resets / cycles


if __name__ == "__main__":
    freqs = [float(a) for a in sys.argv[1:]] or [20.0, 40.0, 150.0]
    plant, _ = second_order_plant()
    spec = DesignSpec(2 * math.pi * 150)
    pid = pid_comparator(spec, plant)
    ctrls = {"A": reset_pid_a(spec, plant), "B": reset_pid_b(spec, plant, pid)}
    db = lambda x: 20 * math.log10(abs(x))
    print(f"{'':3}{'f [Hz]':>8} {'exact':>9} {'sampled':>9} {'DF':>9} {'resets/cycle':>13}")
    for name, c in ctrls.items():
        for f in freqs:
            w = 2 * math.pi * f
            ex, rpc = exact_S(c, plant, w)
            sm = identify_S(plant, c, IdentPlan(omega=[w])).values[0]
            pr = predicted_S(OpenLoop(c, plant), [w]).values[0]
            print(f"{name:3}{f:8.1f} {db(ex):9.3f} {db(sm):9.3f} {db(pr):9.3f} {rpc:13.1f}")

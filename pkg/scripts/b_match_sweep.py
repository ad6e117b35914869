"""Controller B for a range of gain-match frequencies: crossover and the gain
ratio to the PID one decade above the reference crossover."""

import math

from resetpid.lti import second_order_plant
from resetpid.loopshape import DesignSpec, OpenLoop, phase_margin, pid_comparator, reset_pid_b

if __name__ == "__main__":
    plant, _ = second_order_plant()
    wc = 2 * math.pi * 150
    spec = DesignSpec(wc)
    pid = pid_comparator(spec, plant)
    lp = OpenLoop(pid, plant)
    print(f"{'match x wc':>10} {'crossover [Hz]':>15} {'PM':>7} {'|L_B/L_PID| at 10wc':>20}")
    for m in (10, 11, 12, 15, 20, 50, 100, 1000):
        b = reset_pid_b(spec, plant, pid, match_factor=m)
        ol = OpenLoop(b, plant)
        pm, wb = phase_margin(ol)
        print(f"{m:10g} {wb / (2 * math.pi):15.2f} {pm:7.2f} {abs(ol(10 * wc)) / abs(lp(10 * wc)):20.4f}")

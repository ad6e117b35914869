"""Max steady-state error under measurement noise, with the noise held for
several samples (lower noise bandwidth), for PID, A and B."""

import numpy as np

from resetpid.metrics import max_abs, steady_state_window
from resetpid.scenarios import ScenarioConfig, design
from resetpid.sim import SimConfig, simulate_closed_loop, uniform_noise

if __name__ == "__main__":
    cfg = ScenarioConfig()
    plant, _, ctrls = design(cfg)
    sc = SimConfig(dt=cfg.dt, duration=cfg.noise_duration)
    print(f"{'hold':>5} {'PID [nm]':>9} {'A/PID':>7} {'B/PID':>7} {'A resets':>9}")
    for hold in (1, 2, 5, 10, 20):
        base = uniform_noise(-(-sc.n_samples // hold), cfg.noise_amplitude, cfg.seed)
        noise = np.repeat(base, hold)[: sc.n_samples]
        err, res = {}, {}
        for name, c in ctrls.items():
            tr = simulate_closed_loop(plant, c, None, None, sc, noise=noise)
            err[name] = max_abs(tr.e, steady_state_window(tr.e.size))
            res[name] = int(tr.resets.sum())
        print(f"{hold:5d} {err['PID'] * 1e9:9.2f} {err['A'] / err['PID']:7.3f} {err['B'] / err['PID']:7.3f} {res['A']:9d}")

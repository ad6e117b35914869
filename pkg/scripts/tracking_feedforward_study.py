"""RMS tracking error on the triangle reference for both feedforward
variants and two step sizes."""

from dataclasses import replace

from resetpid.metrics import rms, steady_state_window
from resetpid.scenarios import ScenarioConfig, design, tracking_run

if __name__ == "__main__":
    for ff in ("mass", "full"):
        cfg = replace(ScenarioConfig(), feedforward=ff)
        _, _, ctrls = design(cfg)
        out = {}
        for name, c in ctrls.items():
            vals = []
            for dt in (cfg.dt, cfg.dt / 2):
                tr, _ = tracking_run(cfg, c, dt)
                vals.append(rms(tr.e, steady_state_window(tr.e.size)))
            out[name] = vals
            print(f"{ff:5} {name:4} rms {vals[0] * 1e9:9.4f} nm   dt/2 change {vals[1] / vals[0] - 1:+.2%}   resets {int(tr.resets.sum())}")
        print(f"{ff:5} A/PID {out['A'][0] / out['PID'][0]:.3f}  B/PID {out['B'][0] / out['PID'][0]:.3f}")

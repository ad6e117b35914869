"""End-to-end reproduction pipelines: each scenario designs what it needs,
runs analysis or simulation, and returns data files plus named checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from .describing import cutoff_ratio_beta, df_curve
from .lti import FrequencyCurve, freq_response, second_order_plant
from .loopshape import (
    ASYMPTOTIC_MATCH,
    DesignSpec,
    OpenLoop,
    design_report,
    open_loop_df,
    phase_margin,
    pid_comparator,
    reset_pid_a,
    reset_pid_b,
)
from .metrics import PerformanceReport, bandwidth_from_T, format_table, max_abs, peak_db, rms, steady_state_window
from .reset import gfore
from .sim import DEFAULT_DT, SimConfig, simulate_closed_loop, uniform_noise
from .sysid import IdentPlan, default_grid, identify, predicted_S, predicted_T
from .trajectory import MotionLimits, fourth_order_triangle, second_order_ff

# acceptable crossover of B relative to the reference crossover (190 to 215 Hz at 150 Hz)
B_CROSSOVER_RATIO = (190 / 150, 215 / 150)

SCENARIOS = ("table1", "fig3", "fig4", "fig6", "fig9", "fig10", "fig11")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a scenario run depends on. Frequencies in rad/s."""

    omega_c: float = 2 * math.pi * 150
    pm_target: float = 45.0
    alpha: float = 0.7
    match_factor: float = ASYMPTOTIC_MATCH
    dt: float = DEFAULT_DT
    seed: int = 0
    amplitude: float = 400e-9
    period: float = 1.0
    n_periods: int = 2
    feedforward: str = "mass"  # "mass": m*a only, "full": m*a + c*v + k*x
    noise_amplitude: float = 50e-9
    noise_duration: float = 1.0
    ident_points: int = 60
    ident_cycles: int = 30
    ident_settle: int = 20
    samples_per_cycle: int = 2000
    corner: float = 2 * math.pi * 100  # GFORE corner for the DF figures
    v_max: float = 5e-6
    a_max: float = 5e-4
    j_max: float = 0.5
    s_max: float = 500.0

    def __post_init__(self):
        if self.feedforward not in ("mass", "full"):
            raise ValueError("feedforward must be 'mass' or 'full'")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def limits(self) -> MotionLimits:
        return MotionLimits(self.v_max, self.a_max, self.j_max, self.s_max)

    @property
    def spec(self) -> DesignSpec:
        return DesignSpec(self.omega_c, self.pm_target, alpha=self.alpha)


@dataclass
class ScenarioResult:
    name: str
    files: dict = field(default_factory=dict)  # filename -> text
    checks: list = field(default_factory=list)

    def check(self, name, expected, actual, tolerance, passed):
        self.checks.append(
            {"name": name, "expected": expected, "actual": actual, "tolerance": tolerance, "pass": bool(passed)}
        )

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)


def _r(x, digits=9):
    """Round for byte-stable JSON."""
    if isinstance(x, float):
        return float(f"{x:.{digits}g}")
    return x


@lru_cache(maxsize=8)
def _plant_and_controllers(cfg: ScenarioConfig):
    plant, mck = second_order_plant()
    spec = cfg.spec
    pid = pid_comparator(spec, plant)
    a = reset_pid_a(spec, plant)
    b = reset_pid_b(spec, plant, pid, match_factor=cfg.match_factor)
    return plant, mck, {"PID": pid, "A": a, "B": b}


def design(cfg: ScenarioConfig):
    """(plant, (m, c, k), {"PID", "A", "B"}) for the configuration."""
    return _plant_and_controllers(cfg)


def _curve_json(curve: FrequencyCurve) -> dict:
    return {
        "omega_rad_s": [_r(w) for w in curve.omega],
        "magnitude_db": [_r(v) for v in curve.magnitude_db],
        "phase_deg": [_r(v) for v in curve.phase_deg],
    }


def tracking_run(cfg: ScenarioConfig, controller, dt: float | None = None):
    """Closed-loop run on the triangle reference; returns (trace, profile)."""
    dt = cfg.dt if dt is None else dt
    plant, (m, c, k), _ = design(cfg)
    prof = fourth_order_triangle(cfg.amplitude, cfg.period, cfg.limits, dt, cfg.n_periods)
    if cfg.feedforward == "full":
        ff = second_order_ff(prof.acceleration, m, c, k, prof.position, prof.velocity)
    else:
        ff = second_order_ff(prof.acceleration, m, 0.0, 0.0, prof.position, prof.velocity)
    sc = SimConfig(dt=dt, duration=prof.time.size * dt, seed=cfg.seed)
    # the stage starts on the trajectory
    x0 = [prof.position[0], prof.velocity[0]]
    return simulate_closed_loop(plant, controller, prof.position, ff, sc, x0_plant=x0), prof


def noise_run(cfg: ScenarioConfig, controller):
    """Regulation at zero with uniform white measurement noise."""
    plant, _, _ = design(cfg)
    sc = SimConfig(dt=cfg.dt, duration=cfg.noise_duration, seed=cfg.seed)
    noise = uniform_noise(sc.n_samples, cfg.noise_amplitude, cfg.seed)
    return simulate_closed_loop(plant, controller, None, None, sc, noise=noise)


def table1(cfg: ScenarioConfig) -> ScenarioResult:
    res = ScenarioResult("table1")
    plant, _, ctrls = design(cfg)
    out = {}
    reports = []
    for name, c in ctrls.items():
        tr, prof = tracking_run(cfg, c)
        nz = noise_run(cfg, c)
        win = steady_state_window(tr.e.size)
        nwin = steady_state_window(nz.e.size)
        ol = OpenLoop(c, plant)
        pm, wc = phase_margin(ol)
        grid = default_grid(cfg.ident_points * 4)
        T = predicted_T(ol, grid)
        S = predicted_S(ol, grid)
        rep = PerformanceReport(
            label=name,
            rms_error=rms(tr.e, win),
            max_ss_error=max_abs(nz.e, nwin),
            bandwidth=bandwidth_from_T(T),
            sensitivity_peak=peak_db(S)[0],
            phase_margin=pm,
            crossover=wc,
        )
        reports.append(rep)
        out[name] = {k: _r(v) for k, v in asdict(rep).items()}
        out[name]["tracking_resets"] = int(tr.resets.sum())
        out[name]["noise_resets"] = int(nz.resets.sum())
        res.files[f"tracking_{name}.csv"] = tr.to_csv(digits=9)
        res.files[f"precision_{name}.csv"] = nz.to_csv(digits=9)
    by = {r.label: r for r in reports}
    a_rms = by["A"].rms_error / by["PID"].rms_error
    b_rms = by["B"].rms_error / by["PID"].rms_error
    a_max = by["A"].max_ss_error / by["PID"].max_ss_error
    b_max = by["B"].max_ss_error / by["PID"].max_ss_error
    res.check("rms ordering B < A < PID", "B < A < PID", [_r(by[k].rms_error) for k in ("B", "A", "PID")], None,
              by["B"].rms_error < by["A"].rms_error < by["PID"].rms_error)
    res.check("rms A/PID", "<= 0.8", _r(a_rms), 0.8, a_rms <= 0.8)
    res.check("rms B/PID", "<= 0.7", _r(b_rms), 0.7, b_rms <= 0.7)
    res.check("precision A < PID", "< 1", _r(a_max), 1.0, a_max < 1.0)
    res.check("precision |B-PID|/PID", "<= 0.15", _r(abs(b_max - 1)), 0.15, abs(b_max - 1) <= 0.15)
    out["settings"] = {
        "feedforward": cfg.feedforward,
        "steady_state_window": "final 50% of each trace",
        "rms_source": "tracking run, e = r - y",
        "max_source": "precision run, e = r - (y + n)",
        "bandwidth_source": "describing-function T",
    }
    res.files["table1.json"] = json.dumps(out, indent=2, sort_keys=True)
    res.files["table1.txt"] = format_table(reports) + "\n"
    return res


def fig3(cfg: ScenarioConfig) -> ScenarioResult:
    """GFORE describing functions for several gamma against the linear lag."""
    res = ScenarioResult("fig3")
    w = cfg.corner * np.logspace(-1, 2, 301)
    curves = {}
    for g in (-0.5, 0.0, 0.5, 1.0):
        c = df_curve(gfore(cfg.corner, g), w)
        curves[f"gamma={g:g}"] = _curve_json(c)
        res.files[f"gfore_gamma_{g:g}.csv"] = c.to_csv()
    lag = gfore(cfg.corner, 1.0).base
    lin = np.array([freq_response(lag, x) for x in w])
    c1 = df_curve(gfore(cfg.corner, 1.0), w)
    err = float(np.max(np.abs(c1.values - lin) / np.abs(lin)))
    res.check("gamma=1 equals linear lag", "<= 1e-9", _r(err), 1e-9, err <= 1e-9)
    hi = df_curve(gfore(cfg.corner, 0.0), [100 * cfg.corner]).phase_deg[0]
    res.check("gamma=0 high-frequency phase", -38.15, _r(hi), 1.0, abs(hi + 38.15) <= 1.0)
    res.files["fig3.json"] = json.dumps(curves, sort_keys=True)
    return res


def fig4(cfg: ScenarioConfig) -> ScenarioResult:
    """Cutoff ratio beta over gamma."""
    res = ScenarioResult("fig4")
    gammas = np.linspace(-0.9, 1.0, 21)
    betas = [cutoff_ratio_beta(float(g)) for g in gammas]
    lines = ["gamma,beta"] + [f"{g:.6f},{b!r}" for g, b in zip(gammas, betas)]
    res.files["beta.csv"] = "\n".join(lines) + "\n"
    res.check("beta(1) == 1", 1.0, betas[-1], 0.0, betas[-1] == 1.0)
    d = np.diff(betas)
    mono = bool(np.all(d > 0) or np.all(d < 0))
    res.check("beta monotone", "monotone", mono, None, mono)
    return res


def fig6(cfg: ScenarioConfig) -> ScenarioResult:
    """Open-loop describing functions of A and B against the matched PID."""
    res = ScenarioResult("fig6")
    plant, _, ctrls = design(cfg)
    w = cfg.omega_c * np.logspace(-2, 3, 501)
    reports = {}
    gains = {}
    for name, c in ctrls.items():
        ol = OpenLoop(c, plant)
        curve = FrequencyCurve(w, [open_loop_df(ol, x) for x in w], {"controller": name})
        res.files[f"open_loop_{name}.csv"] = curve.to_csv()
        reports[name] = {k: _r(v) for k, v in design_report(ol).items()}
        gains[name] = (abs(open_loop_df(ol, cfg.omega_c / 10)), abs(open_loop_df(ol, 10 * cfg.omega_c)))
    res.files["design.json"] = json.dumps(reports, indent=2, sort_keys=True)
    pa = reports["A"]
    res.check("A |L(wc)| = 1", 1.0, pa["gain_at_crossover"], 1e-3, abs(pa["gain_at_crossover"] - 1) <= 1e-3)
    res.check("A phase margin", cfg.pm_target, pa["phase_margin_deg"], 1.0, abs(pa["phase_margin_deg"] - cfg.pm_target) <= 1)
    pb = reports["B"]
    ratio = pb["crossover_rad_s"] / cfg.omega_c
    res.check("B phase margin", cfg.pm_target, pb["phase_margin_deg"], 1.0, abs(pb["phase_margin_deg"] - cfg.pm_target) <= 1)
    res.check("B crossover / A crossover", list(B_CROSSOVER_RATIO), _r(ratio), None, B_CROSSOVER_RATIO[0] <= ratio <= B_CROSSOVER_RATIO[1])
    res.check("A below PID at 10 wc", "< 1", _r(gains["A"][1] / gains["PID"][1]), None, gains["A"][1] < gains["PID"][1])
    res.check("A above PID at wc/10", "> 1", _r(gains["A"][0] / gains["PID"][0]), None, gains["A"][0] > gains["PID"][0])
    rb = gains["B"][1] / gains["PID"][1]
    res.check("B matches PID at 10 wc", "1 +- 0.05", _r(rb), 0.05, abs(rb - 1) <= 0.05)
    res.check("B above PID at wc/10", "> 1", _r(gains["B"][0] / gains["PID"][0]), None, gains["B"][0] > gains["PID"][0])
    return res


@lru_cache(maxsize=8)
def _identified(cfg: ScenarioConfig, name: str):
    plant, _, ctrls = design(cfg)
    plan = IdentPlan(
        omega=default_grid(cfg.ident_points),
        cycles=cfg.ident_cycles,
        settle_cycles=cfg.ident_settle,
        samples_per_cycle=cfg.samples_per_cycle,
    )
    return identify(plant, ctrls[name], plan)


def frequency_match(measured: FrequencyCurve, predicted: FrequencyCurve, peak_omega: float, db_tol=2.0, deg_tol=10.0):
    """Worst magnitude/phase mismatch outside one octave either side of
    ``peak_omega``."""
    outside = (measured.omega < peak_omega / 2) | (measured.omega > peak_omega * 2)
    ratio = measured.values / predicted.values
    dmag = np.abs(20 * np.log10(np.abs(ratio)))[outside]
    dph = np.abs(np.degrees(np.angle(ratio)))[outside]
    worst_db = float(dmag.max()) if dmag.size else 0.0
    worst_deg = float(dph.max()) if dph.size else 0.0
    return worst_db, worst_deg, worst_db <= db_tol and worst_deg <= deg_tol


def _sens_figure(cfg: ScenarioConfig, which: str) -> ScenarioResult:
    res = ScenarioResult("fig9" if which == "S" else "fig10")
    plant, _, ctrls = design(cfg)
    for name in ("A", "B"):
        idn = _identified(cfg, name)
        meas = idn.S if which == "S" else idn.T
        ol = OpenLoop(ctrls[name], plant)
        pred = (predicted_S if which == "S" else predicted_T)(ol, meas.omega)
        res.files[f"{which}_{name}_identified.csv"] = meas.to_csv()
        res.files[f"{which}_{name}_predicted.csv"] = pred.to_csv()
        fine = default_grid(cfg.ident_points * 8)
        pk_pred, w_pk = peak_db(predicted_S(ol, fine))
        worst_db, worst_deg, ok = frequency_match(meas, pred, w_pk)
        res.check(f"{which} {name} match outside peak band", "2 dB / 10 deg", [_r(worst_db), _r(worst_deg)], [2.0, 10.0], ok)
        if which == "S":
            pk_meas = peak_db(idn.S)[0]
            res.check(f"S {name} identified peak >= predicted", _r(pk_pred), _r(pk_meas), None, pk_meas >= pk_pred)
        if idn.failed:
            res.check(f"{which} {name} no divergence", [], list(idn.failed), None, False)
    return res


def fig9(cfg: ScenarioConfig) -> ScenarioResult:
    """Identified against predicted sensitivity for A and B."""
    return _sens_figure(cfg, "S")


def fig10(cfg: ScenarioConfig) -> ScenarioResult:
    """Identified against predicted complementary sensitivity for A and B."""
    return _sens_figure(cfg, "T")


def fig11(cfg: ScenarioConfig) -> ScenarioResult:
    """Bandwidth gain of B over A from the identified T."""
    res = ScenarioResult("fig11")
    bw = {}
    for name in ("A", "B"):
        bw[name] = bandwidth_from_T(_identified(cfg, name).T)
    ratio = bw["B"] / bw["A"]
    res.files["bandwidth.json"] = json.dumps({k: _r(v) for k, v in bw.items()} | {"ratio": _r(ratio)}, sort_keys=True)
    res.check("identified bandwidth B/A", "1.33 +- 0.05", _r(ratio), 0.05, abs(ratio - 4 / 3) <= 0.05)
    return res


RUNNERS = {"table1": table1, "fig3": fig3, "fig4": fig4, "fig6": fig6, "fig9": fig9, "fig10": fig10, "fig11": fig11}


def run(name: str, cfg: ScenarioConfig = ScenarioConfig()) -> ScenarioResult:
    if name not in RUNNERS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return RUNNERS[name](cfg)

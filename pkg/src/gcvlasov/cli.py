"""Command-line scenario runner.

    gcvlasov run --scenario mu-invariance
    gcvlasov run --config my.cfg --epsilon 0.05 --out runs/x
    gcvlasov validate --config my.cfg
    gcvlasov list-scenarios

Exit codes: 0 success, 1 solver failure or failed acceptance check,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import functools
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SCENARIOS, ConfigError, ScenarioConfig, default_config, load_config, serialize_config

DESCRIPTIONS = {
    "exb-drift": "full orbit in uniform E and b, measured vs predicted E x B drift",
    "gradb-drift": "full orbit in a linear-ramp field, measured vs predicted grad-B drift",
    "mu-invariance": "drift orbits in a static bump field, magnetic-moment conservation",
    "gc2d": "2D guiding-center run (Kelvin-Helmholtz by default) with invariants",
    "pic-run": "full-kinetic particle-in-cell run with energy diagnostics",
    "defect-scan": "defect of the truncated expansion on the steady vortex family",
    "convergence": "particle vs drift-orbit displacement as eps decreases",
}


@dataclass
class Outcome:
    passed: bool | None
    summary: str
    files: list = field(default_factory=list)


def _write_rows(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for r in rows:
            out.writerow([repr(float(v)) for v in r])
    return path


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _drift(cfg: ScenarioConfig, out: Path, kind: str) -> Outcome:
    from .studies import exb_drift, gradb_drift

    eps_list = cfg.get("epsilon", "list")
    o, f = cfg.sections["orbit"], cfg.sections["field"]
    if kind == "exb":
        results = [exb_drift(e, e0=o["e0"], n_periods=o["n_periods"]) for e in eps_list]
    else:
        results = [gradb_drift(e, grad=f["grad"][0], n_periods=o["n_periods"]) for e in eps_list]
    rows = [(r.eps, *r.measured, *r.predicted, r.rel_error) for r in results]
    path = _write_rows(
        out / "drift.csv",
        ["epsilon", "measured_x", "measured_y", "predicted_x", "predicted_y", "rel_error"],
        rows,
    )
    for r in results:
        print(f"  eps={r.eps:<8g} measured=({r.measured[0]: .6f}, {r.measured[1]: .6f}) "
              f"predicted=({r.predicted[0]: .6f}, {r.predicted[1]: .6f}) rel.err={r.rel_error:.3e}")
    errs = [r.rel_error for r in results]
    ok = errs[0] <= cfg.get("acceptance", "drift_tol") and all(b < a for a, b in zip(errs, errs[1:]))
    return Outcome(ok, f"{kind} drift rel.err {errs[0]:.3e} (monotone={all(b < a for a, b in zip(errs, errs[1:]))}) {_verdict(ok)}", [path])


def _mu(cfg: ScenarioConfig, out: Path) -> Outcome:
    from .fields import MagneticFieldModel
    from .guiding_center import AnalyticPotential, GuidingCenterState
    from .studies import mu_drift

    o, f = cfg.sections["orbit"], cfg.sections["field"]
    model = MagneticFieldModel(
        f["variant"], f["b0"], f["alpha"], tuple(f["grad"]), f["amplitude"], tuple(f["center"])
    )
    pot = AnalyticPotential(o["potential"], tuple(o["potential_params"]) if o["potential"] != "zero" else ())
    states = GuidingCenterState(np.stack([o["x"], o["y"]], axis=-1), np.asarray(o["w"]))
    err, orbit = mu_drift(o["dt"], o["T"], states, model, pot)
    files = []
    for i in range(orbit.x.shape[1]):
        single = type(orbit)(orbit.t, orbit.x[:, i], orbit.w[:, i], orbit.mu[:, i], orbit.b[:, i], orbit.U[:, i])
        path = out / f"orbit_{i}.csv"
        single.write_csv(path)
        files.append(path)
    ok = err <= cfg.get("acceptance", "mu_tol")
    return Outcome(ok, f"mu drift {err:.1e} {_verdict(ok)}", files)


def _gc2d(cfg: ScenarioConfig, out: Path) -> Outcome:
    from .guiding_center import GC2DConfig, run_guiding_center_2d

    g, d = cfg.sections["gc2d"], cfg.sections["domain"]
    if len(d["counts"]) != 2:
        raise ConfigError(["domain.counts: gc2d needs a 2D grid"])
    gc = GC2DConfig(
        lengths=tuple(d["lengths"]),
        counts=tuple(d["counts"]),
        dt=g["dt"],
        t_end=g["t_end"],
        output_every=g["output_every"],
        rho0=g["rho0"],
        initial=g["initial"],
        delta=g["delta"],
        shear=g["shear"],
        mode=g["mode"],
    )
    res = run_guiding_center_2d(gc, out)
    r0, r1 = res.records[0], res.records[-1]
    de = abs(r1.total_energy - r0.total_energy) / abs(r0.total_energy) if r0.total_energy else 0.0
    dm = abs(r1.mass - r0.mass) / abs(r0.mass)
    l2 = [r.L2 for r in res.records]
    mono = all(b <= a * (1.0 + 1e-13) for a, b in zip(l2, l2[1:]))
    a = cfg.sections["acceptance"]
    ok = de <= a["energy_tol"] and dm <= a["mass_tol"] and mono
    return Outcome(
        ok,
        f"energy drift {de:.2e}, mass drift {dm:.1e}, L2 non-increasing={mono} {_verdict(ok)}",
        [out / "gc2d_diag.csv"],
    )


def _pic(cfg: ScenarioConfig, out: Path) -> Outcome:
    from .fields import MagneticFieldModel
    from .kinetic import InitialSpec, PICConfig, default_step, run_full_kinetic

    p, d, f = cfg.sections["pic"], cfg.sections["domain"], cfg.sections["field"]
    eps = cfg.get("epsilon", "value")
    lengths = tuple(d["lengths"])
    box = lengths + (2.0 * math.pi,) * (3 - len(lengths))
    model = MagneticFieldModel(
        f["variant"], f["b0"], f["alpha"], tuple(f["grad"]), f["amplitude"], tuple(f["center"]), lengths[:2]
    )
    spec = InitialSpec(
        density="cosine" if p["delta"] else "uniform",
        rho0=p["rho0"],
        delta=p["delta"],
        velocity=p["velocity"],
        sampling=p["sampling"],
        n_phases=p["n_phases"],
        lattice=tuple(p["lattice"]) if p["sampling"] == "quiet" else None,
        lengths=box,
    )
    b_max = f["b0"] + max(f["amplitude"], 0.0)
    pc = PICConfig(
        eps=eps,
        grid_lengths=lengths,
        grid_counts=tuple(d["counts"]),
        initial=spec,
        n_particles=p["n_particles"],
        seed=cfg.get("scenario", "seed"),
        ds=default_step(eps, b_max, p["steps_per_period"]),
        t_end=p["t_end"],
        output_every=p["output_every"],
        snapshot_every=p["snapshot_every"],
        model=model,
    )
    res = run_full_kinetic(pc, out)
    e0, e1 = res.records[0].total_energy, res.records[-1].total_energy
    de = abs(e1 - e0) / abs(e0)
    ok = de <= cfg.get("acceptance", "energy_tol")
    return Outcome(ok, f"energy drift {de:.2e} over t={res.state.t:.4g} {_verdict(ok)}", [out / "diagnostics.csv"])


def _defect(cfg: ScenarioConfig, out: Path) -> Outcome:
    from .studies import defect_scan

    eps_list = cfg.get("epsilon", "list")
    dd = cfg.sections["defect"]
    n = cfg.get("domain", "counts")[0]
    norms = defect_scan(eps_list, n=n, n_w=dd["n_w"], n_v=dd["n_v"], n_theta=dd["n_theta"], delta=dd["delta"])
    ratios = [a / b for a, b in zip(norms, norms[1:])]
    rows = [(e, d, r) for e, d, r in zip(eps_list, norms, [math.nan] + ratios)]
    path = _write_rows(out / "defect.csv", ["epsilon", "defect", "ratio"], rows)
    a = cfg.sections["acceptance"]
    ok = all(a["ratio_min"] <= r <= a["ratio_max"] for r in ratios)
    txt = ", ".join(f"{r:.3f}" for r in ratios)
    return Outcome(ok, f"defect ratios [{txt}] {_verdict(ok)}", [path])


def _pic_error(eps, counts, lattice, n_phases, delta, t_end, per_period):
    from .studies import pic_gc_error

    return pic_gc_error(eps, counts, lattice, n_phases, delta, t_end, per_period).error


def _convergence(cfg: ScenarioConfig, out: Path) -> Outcome:
    from .diagnostics import convergence_study

    p = cfg.sections["pic"]
    runner = functools.partial(
        _pic_error,
        counts=tuple(cfg.get("domain", "counts")),
        lattice=tuple(p["lattice"]),
        n_phases=p["n_phases"],
        delta=p["delta"],
        t_end=p["t_end"],
        per_period=p["steps_per_period"],
    )
    table = convergence_study(runner, cfg.get("epsilon", "list"), workers=cfg.get("scenario", "threads"))
    path = out / "convergence.json"
    table.to_json(path)
    for r in table.rows:
        print(f"  eps={r.epsilon:<8g} error={r.error:.4e} ratio={r.ratio:.3f}{' FAILED ' + r.message if r.failed else ''}")
    a = cfg.sections["acceptance"]
    ratios = table.ratios()
    ok = all(a["ratio_min"] <= r <= a["ratio_max"] for r in ratios)
    return Outcome(ok, f"convergence order {table.order:.3f}, ratios {[round(r, 3) for r in ratios]} {_verdict(ok)}", [path])


RUNNERS = {
    "exb-drift": lambda c, o: _drift(c, o, "exb"),
    "gradb-drift": lambda c, o: _drift(c, o, "gradb"),
    "mu-invariance": _mu,
    "gc2d": _gc2d,
    "pic-run": _pic,
    "defect-scan": _defect,
    "convergence": _convergence,
}


def run_scenario(cfg: ScenarioConfig) -> Outcome:
    """Run ``cfg`` and write its artifacts into ``scenario.out``."""
    out = Path(cfg.get("scenario", "out"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(serialize_config(cfg))
    return RUNNERS[cfg.name](cfg, out)


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    sec = {s: dict(v) for s, v in cfg.sections.items()}
    if args.epsilon is not None:
        if not 0.0 < args.epsilon <= 1.0:
            raise ConfigError([f"--epsilon {args.epsilon}: must be in (0, 1]"])
        sec["epsilon"]["value"] = args.epsilon
        sec["epsilon"]["list"] = [args.epsilon, args.epsilon / 2.0, args.epsilon / 4.0]
    if args.out is not None:
        sec["scenario"]["out"] = args.out
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError([f"--seed {args.seed}: must be an unsigned 64-bit integer"])
        sec["scenario"]["seed"] = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(["--threads: must be >= 1"])
        sec["scenario"]["threads"] = args.threads
    return ScenarioConfig(cfg.name, sec)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gcvlasov", description="Strong-field Vlasov-Poisson scenario runner")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("--config", help="scenario config file")
    run.add_argument("--scenario", choices=SCENARIOS, help="built-in scenario (defaults)")
    run.add_argument("--epsilon", type=float)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int)
    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", required=True)
    sub.add_parser("list-scenarios", help="list the built-in scenarios")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list-scenarios":
        for name in SCENARIOS:
            print(f"{name:<14} {DESCRIPTIONS[name]}")
        return 0
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            print(f"{args.config}: OK (scenario {cfg.name})")
            return 0
        if args.config:
            cfg = load_config(args.config)
            if args.scenario and args.scenario != cfg.name:
                raise ConfigError([f"--scenario {args.scenario} conflicts with config scenario {cfg.name}"])
        elif args.scenario:
            cfg = default_config(args.scenario)
        else:
            raise ConfigError(["run needs --config or --scenario"])
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        outcome = run_scenario(cfg)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as solver failure
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.name}: {outcome.summary}")
    return 0 if outcome.passed in (True, None) else 1


if __name__ == "__main__":
    sys.exit(main())

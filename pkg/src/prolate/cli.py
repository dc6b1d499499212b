"""Experiment driver: one subcommand per pipeline, CSV + JSON outputs.

Every run echoes its fully resolved configuration into the JSON summary;
identical configurations produce byte-identical CSV bodies.  Floats are
written with 17 significant digits so files round-trip exactly.

Exit codes: 0 success, 2 invalid configuration or usage, 3 numeric error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import frame as frame_mod
from . import negative as negative_mod
from . import points as points_mod
from . import theory as theory_mod
from .errors import CapacityError, NumericError, SamplingError
from .functions import (
    ConcentrationClass,
    adversarial_bump_function,
    sample_random_member,
    save_function,
)
from .rng import stream_rng
from .spectrum import (
    cached_spectrum_1d,
    calibrate_kappa,
    fuchs_top_eigenvalue,
    landau_widom_reference,
    tensor_spectrum,
    widom_asymptotic,
)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return ""
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if hasattr(obj, "_asdict"):
        return {k: _jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_floats(text: str):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


# ---------------------------------------------------------------------------
# configuration


_DEFAULTS = {
    "R": 4.0,
    "d": 1,
    "delta": 0.2,
    "mu": 0.5,
    "r": 2000,
    "trials": 500,
    "order": None,
    "seed": 0,
    "out": "out",
    "cache": None,
    "eps": 0.01,
    "kappa": None,
    "net": 200,
    "D": None,
    "k": 10.0,
    "lambdas": "1,1,1",
    "c0": 2.0,
    "alpha": 1.0,
    "n_range": 1000,
    "model": "poisson-homogeneous",
    "rho": 2.0,
    "windows": "4",
    "hole_step": 0.05,
    "count": 50,
}


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["cache"] is None:
        cfg["cache"] = os.environ.get("PROLATE_CACHE_DIR") or None
    cfg["command"] = args.command
    return cfg


def _outdir(cfg: dict) -> str:
    os.makedirs(cfg["out"], exist_ok=True)
    return cfg["out"]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_spectrum(cfg: dict) -> None:
    out = _outdir(cfg)
    spec = cached_spectrum_1d(cfg["R"], cfg["order"], cfg["cache"])
    defect = 1.0 - fuchs_top_eigenvalue(cfg["R"], 1)
    mu0_gap = 1.0 - spec.eigenvalues[0]
    fuchs_ok = abs(mu0_gap - defect) <= 0.25 * defect
    rows = []
    for k, mu in enumerate(spec.eigenvalues[: spec.n_resolved]):
        rows.append((k, mu, widom_asymptotic(cfg["R"], k), fuchs_ok if k == 0 else None))
    _write_csv(os.path.join(out, "spectrum.csv"), ("k", "mu_k", "widom_asymptotic", "fuchs_flag"), rows)
    _write_json(
        os.path.join(out, "spectrum.json"),
        {
            "config": cfg,
            "trace_defect": spec.trace_defect(),
            "n_resolved": spec.n_resolved,
            "kappa_calibrated": calibrate_kappa(spec),
            "landau_widom_at_half": landau_widom_reference(cfg["R"], 0.5) if cfg["R"] > 1 else None,
        },
    )


def _cmd_synth(cfg: dict) -> None:
    out = _outdir(cfg)
    cls = ConcentrationClass(cfg["R"], cfg["delta"], cfg["d"])
    base = cached_spectrum_1d(cfg["R"], cfg["order"], cfg["cache"])
    spec = tensor_spectrum(base, cfg["d"], min(400, base.order ** cfg["d"]))
    kappa = cfg["kappa"] or calibrate_kappa(base)
    D = cfg["D"] or theory_mod.truncation_dimension(cfg["R"], cfg["d"], cfg["delta"], 0.1, spec, kappa).D
    rows = []
    for i in range(cfg["count"]):
        fseed = int(stream_rng(cfg["seed"], i).integers(2**63))
        f = sample_random_member(cls, spec, D, fseed)
        rows.append((i, fseed, f.norm_l2(), f.local_energy_coefficient(), True))
        if i == 0:
            save_function(f, os.path.join(out, "function_0.json"))
    _write_csv(
        os.path.join(out, "synth.csv"),
        ("index", "seed", "norm_l2", "local_energy", "member"),
        rows,
    )
    _write_json(
        os.path.join(out, "synth.json"),
        {"config": cfg, "D": D, "kappa": kappa,
         "mean_local_energy": float(np.mean([r[3] for r in rows]))},
    )


def _frame_config(cfg: dict) -> frame_mod.FrameConfig:
    return frame_mod.FrameConfig(
        R=cfg["R"],
        d=cfg["d"],
        delta=cfg["delta"],
        mu=cfg["mu"],
        r=cfg["r"],
        trials=cfg["trials"],
        net_size=cfg["net"],
        seed=cfg["seed"],
        D=cfg["D"],
        order=cfg["order"],
        cache_dir=cfg["cache"],
    )


def _cmd_frame(cfg: dict) -> None:
    out = _outdir(cfg)
    report = frame_mod.mc_frame_experiment(_frame_config(cfg))
    rows = [
        (t, report.trial_seeds[t], report.min_norm_sums[t], report.max_norm_sums[t], bool(report.event_holds[t]))
        for t in range(len(report.trial_seeds))
    ]
    _write_csv(
        os.path.join(out, "frame.csv"),
        ("trial", "seed", "min_norm_sum", "max_norm_sum", "event_holds"),
        rows,
    )
    _write_json(
        os.path.join(out, "frame.json"),
        {
            "config": cfg,
            "D": report.D,
            "kappa": report.kappa,
            "failure_rate": report.failure_rate,
            "failure_stderr": report.failure_stderr,
            "theory_bound": report.theory,
        },
    )


def _cmd_deviation(cfg: dict) -> None:
    out = _outdir(cfg)
    dcfg = frame_mod.DeviationConfig(
        R=cfg["R"],
        d=cfg["d"],
        delta=cfg["delta"],
        r=cfg["r"],
        trials=cfg["trials"],
        net_size=cfg["net"],
        seed=cfg["seed"],
        D=cfg["D"],
        order=cfg["order"],
        cache_dir=cfg["cache"],
    )
    report = frame_mod.deviation_sup_experiment(dcfg)
    rows = [
        (t, s.trial_seed, s.sup_value, s.net_size) for t, s in enumerate(report.samples)
    ]
    _write_csv(os.path.join(out, "deviation.csv"), ("trial", "seed", "sup_value", "net_size"), rows)
    _write_json(
        os.path.join(out, "deviation.json"),
        {
            "config": cfg,
            "D": report.D,
            "kappa": report.kappa,
            "tail_table": [
                {"threshold": lam, "empirical": emp, "theory": th}
                for lam, emp, th in zip(report.thresholds, report.empirical_tails, report.theory_bounds)
            ],
        },
    )


def _cmd_holes(cfg: dict) -> None:
    out = _outdir(cfg)
    lambdas = _parse_floats(cfg["lambdas"])
    report = negative_mod.void_monte_carlo(lambdas, cfg["trials"], cfg["seed"])
    rows = [(t, bool(flag)) for t, flag in enumerate(report.any_empty_flags)]
    _write_csv(os.path.join(out, "holes.csv"), ("trial", "any_empty"), rows)
    audit = negative_mod.prop24_empty_cube_audit(
        cfg["c0"], cfg["alpha"], cfg["d"], cfg["n_range"]
    )
    _write_json(
        os.path.join(out, "holes.json"),
        {
            "config": cfg,
            "void": {
                "lambdas": report.lambdas,
                "bound": report.bound,
                "exact": report.exact,
                "empirical": report.empirical_any_empty,
                "stderr": report.empirical_stderr,
                "per_cube_empty": report.per_cube_empty,
                "per_cube_predicted": [math.exp(-v) for v in report.lambdas],
            },
            "empty_cube_audit": {
                "summable_condition": audit.summable_condition,
                "verdict": audit.verdict,
                "last_increment": audit.last_increment,
                "partial_sum": float(audit.partial_sums[-1]),
            },
        },
    )


def _cmd_adversarial(cfg: dict) -> None:
    out = _outdir(cfg)
    F = adversarial_bump_function()
    setup = negative_mod.construct_prop22(cfg["k"], max(cfg["r"], 1) if cfg["r"] else 1, F)
    report = negative_mod.simulate_conditioned_B(setup, cfg["trials"], cfg["seed"])
    rows = [
        (t, report.sums[t], report.threshold, bool(report.sums[t] < report.threshold))
        for t in range(cfg["trials"])
    ]
    _write_csv(os.path.join(out, "adversarial.csv"), ("trial", "sum", "threshold", "below"), rows)
    _write_json(
        os.path.join(out, "adversarial.json"),
        {
            "config": cfg,
            "setup": {
                "k": setup.k,
                "r": setup.r,
                "N": setup.N,
                "delta": setup.delta,
                "event_b_probability": setup.event_b_probability,
                "log_event_b_probability": setup.log_event_b_probability,
                "tail_budget": setup.rb_tail_budget,
                "tail_value": setup.rb_tail_value,
                "pin_budget": setup.rb_pin_budget,
                "pin_value": setup.rb_pin_value,
                "l2_norm_sq": F.l2_norm_sq,
                "decay_c1": F.decay_c1,
                "deriv_c2": F.deriv_c2,
                "band_residual": F.band_residual,
            },
            "cube_range": report.cube_range,
            "violations": list(report.violations),
        },
    )


def _cmd_bounds(cfg: dict) -> None:
    out = _outdir(cfg)
    if cfg["kappa"] is None:
        base = cached_spectrum_1d(cfg["R"], cfg["order"], cfg["cache"])
        kappa = calibrate_kappa(base)
    else:
        kappa = cfg["kappa"]
    params = theory_mod.theory_params(cfg["R"], cfg["d"], kappa)
    sampling = theory_mod.sampling_probability_bound(
        cfg["r"], cfg["R"], cfg["d"], cfg["mu"], params.log_A, params.B
    )
    nmin = theory_mod.min_samples(cfg["R"], cfg["d"], cfg["mu"], cfg["eps"], params.B, params.C)
    lam_star = cfg["mu"] * cfg["r"] / cfg["R"] ** cfg["d"]
    deviation = theory_mod.deviation_bound(
        lam_star, cfg["r"], cfg["R"], cfg["d"], params.log_A, params.B
    )
    payload = {
        "config": cfg,
        "params": params,
        "delta_feasibility": theory_mod.delta_feasibility(cfg["R"], cfg["d"]),
        "sampling_bound": sampling,
        "deviation_bound_at_r_mu": deviation,
        "deviation_validity_threshold": theory_mod.deviation_validity_threshold(
            cfg["r"], cfg["R"], cfg["d"], params.c4
        ),
        "min_samples": nmin,
        "covering_log_l2_at_eps": theory_mod.covering_number_l2(
            cfg["R"], cfg["delta"], cfg["eps"], cfg["d"], kappa
        ),
        "covering_log_sup_at_eps": theory_mod.covering_number_sup(
            cfg["R"], cfg["eps"], cfg["d"], kappa
        ),
    }
    flat = _jsonable(payload)
    rows = []
    for key, val in sorted(flat.items()):
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            rows.append((key, float(val)))
    _write_csv(os.path.join(out, "bounds.csv"), ("name", "value"), rows)
    _write_json(os.path.join(out, "bounds.json"), payload)


def _cmd_density(cfg: dict) -> None:
    out = _outdir(cfg)
    model = cfg["model"]
    if model == "iid-uniform-cube":
        X = points_mod.iid_uniform_cube(cfg["R"], cfg["d"], cfg["r"], cfg["seed"])
    elif model == "uniform-per-cube":
        side = int(cfg["R"])
        anchors = points_mod.integer_anchors([0] * cfg["d"], [side] * cfg["d"])
        X = points_mod.uniform_per_cube(anchors, max(int(cfg["rho"]), 1), cfg["seed"])
    elif model == "poisson-homogeneous":
        region = np.array([[0.0, cfg["R"]]] * cfg["d"])
        X = points_mod.poisson_homogeneous(region, cfg["rho"], cfg["seed"])
    elif model == "poisson-inhomogeneous":
        region = np.array([[-cfg["R"] / 2.0, cfg["R"] / 2.0]] * cfg["d"])
        lam_max = cfg["c0"] * (1.0 + math.log(max(1.0, cfg["R"])))
        X = points_mod.poisson_inhomogeneous(
            region, points_mod.log_intensity(cfg["c0"]), lam_max, cfg["seed"]
        )
    else:
        raise ValueError(f"unknown model {model!r}")
    report = points_mod.density_diagnostics(X, _parse_floats(cfg["windows"]), cfg["hole_step"])
    verdict = points_mod.classify_prop_hole(report)
    rows = list(zip(report.window_sides, report.density_estimates))
    _write_csv(os.path.join(out, "density.csv"), ("window_side", "density_estimate"), rows)
    _write_json(
        os.path.join(out, "density.json"),
        {"config": cfg, "n_points": X.n_points, "report": report, "verdict": verdict},
    )
    points_mod.save_points(X, os.path.join(out, "points.txt"))


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "synth": _cmd_synth,
    "frame": _cmd_frame,
    "deviation": _cmd_deviation,
    "holes": _cmd_holes,
    "adversarial": _cmd_adversarial,
    "bounds": _cmd_bounds,
    "density": _cmd_density,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prolate",
        description="Random sampling of bandlimited functions: spectra, synthesis, "
        "frame experiments, probability bounds, and counterexample simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--R", type=float, default=None)
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--order", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--cache", type=str, default=None)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--kappa", type=float, default=None)
        p.add_argument("--net", type=int, default=None)
        p.add_argument("--D", type=int, default=None)
        p.add_argument("--k", type=float, default=None)
        p.add_argument("--lambdas", type=str, default=None)
        p.add_argument("--c0", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--n-range", dest="n_range", type=int, default=None)
        p.add_argument("--model", type=str, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--windows", type=str, default=None)
        p.add_argument("--hole-step", dest="hole_step", type=float, default=None)
        p.add_argument("--count", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        _HANDLERS[args.command](cfg)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, CapacityError, SamplingError, OSError, KeyError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

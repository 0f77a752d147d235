"""Command-line driver.

Every subcommand writes flat records to stdout (CSV or JSON) with the
columns in ``COLUMNS``; logs go to stderr. Angles are given in degrees and
settings are planar: a along +z, b in the xz-plane at angle theta from a.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys

from . import analytic, diagnostics
from .analytic import ChshSettings
from .errors import DomainError, UnsupportedModelError
from .estimator import (
    EstimateWithError,
    RunConfig,
    correlation_estimate,
    joint_probability_estimates,
    run_trials,
)
from .geometry import EZ, dot, planar_direction
from .models import PAIR, SettingPair, get_model

log = logging.getLogger("hvspin")

COLUMNS = ("command", "model", "theta_deg", "quantity", "value", "std_error", "analytic", "z_score", "n", "seed", "shards")
TWO_PARTY_MODELS = ("complete", "sufficient_condition", "local_baseline")
DEFAULT_TRIALS = 1_000_000
DEFAULT_SEED = 0
DEFAULT_GRID = "0:180:15"
SIGNALING_GRID_SIZE = 16


class AuditFailed(Exception):
    pass


def record(command, model, theta_deg, quantity, value, std_error=None, analytic_ref=None, n=None, seed=None, shards=None):
    z = None
    if analytic_ref is not None and std_error is not None:
        z = EstimateWithError(value, std_error, n or 0).z_score(analytic_ref)
    return dict(
        zip(COLUMNS, (command, model, theta_deg, quantity, value, std_error, analytic_ref, z, n, seed, shards))
    )


def parse_grid(text: str) -> list[float]:
    """``"0:180:15"`` (inclusive range) or ``"0,30,60"``."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(t) for t in text.split(",") if t.strip()]


def _check_theta(theta_deg: float):
    if not 0.0 <= theta_deg <= 180.0:
        raise DomainError(f"theta must be in [0, 180] degrees, got {theta_deg}")


def _planar_pair(theta_deg: float) -> SettingPair:
    _check_theta(theta_deg)
    return SettingPair(EZ, planar_direction(math.radians(theta_deg)))


def _joint_reference(model_name: str, theta_deg: float) -> analytic.JointProbabilities:
    if model_name == "local_baseline":
        return analytic.local_baseline_joint_probabilities(math.radians(theta_deg))
    return analytic.singlet_joint_probabilities(math.cos(math.radians(theta_deg)))


def _angle_records(args, command, theta_deg, with_corr=True, with_joint=True):
    model = get_model(args.model)
    s = _planar_pair(theta_deg)
    counts = run_trials(RunConfig(model, s, args.trials, args.seed, args.shards), args.workers)
    log.info("%s model=%s theta=%g counts=%s", command, args.model, theta_deg, counts.as_dict())
    common = dict(n=args.trials, seed=args.seed, shards=args.shards)
    out = []
    if with_corr:
        est = correlation_estimate(counts, args.seed)
        ref = analytic.reference_correlation(args.model, s)
        out.append(record(command, args.model, theta_deg, "correlation", est.value, est.std_error, ref, **common))
    if with_joint and model.outcome_kind == PAIR:
        ref = _joint_reference(args.model, theta_deg).as_dict()
        for key, est in joint_probability_estimates(counts, args.seed).items():
            out.append(record(command, args.model, theta_deg, f"p_{key}", est.value, est.std_error, ref[key], **common))
    return out


def cmd_correlate(args):
    return _angle_records(args, "correlate", args.theta, with_joint=False)


def cmd_sweep(args):
    out = []
    for theta in parse_grid(args.theta_grid):
        out.extend(_angle_records(args, "sweep", theta))
    return out


def cmd_joint_probs(args):
    if get_model(args.model).outcome_kind != PAIR:
        raise UnsupportedModelError(
            f"model {args.model!r} fixes only the product XY and provides no joint probabilities"
        )
    out = []
    for theta in parse_grid(args.theta_grid):
        out.extend(_angle_records(args, "joint-probs", theta, with_corr=False))
    return out


def cmd_chsh(args):
    model = get_model(args.model)
    settings = ChshSettings.planar(args.angles)
    res = diagnostics.chsh_scan(model, settings, args.trials, args.seed, args.shards, args.workers)
    ref_fn = (lambda s: analytic.reference_correlation(args.model, s))
    ref = analytic.chsh_value(ref_fn, settings)
    return [record("chsh", args.model, None, "chsh", res.value, res.std_error, ref, args.trials, args.seed, args.shards)]


def _verdict(command, model, passed, threshold, common):
    return [
        record(command, model, None, "z_threshold", threshold, **common),
        record(command, model, None, "audit_passed", 1.0 if passed else 0.0, **common),
    ]


def cmd_audit(args):
    model = get_model(args.model)
    command = f"audit-{args.kind}"
    common = dict(n=args.trials, seed=args.seed, shards=args.shards)
    out = []
    if args.kind == "signaling":
        grid = diagnostics.fibonacci_directions(SIGNALING_GRID_SIZE)
        audit = diagnostics.no_signaling_audit(
            model, EZ, grid, args.trials, args.seed, args.z_threshold, args.shards, args.workers
        )
        for i, (b, est) in enumerate(zip(audit.setting_grid, audit.marginals)):
            theta = math.degrees(math.acos(max(-1.0, min(1.0, dot(EZ, b)))))
            out.append(record(command, args.model, theta, f"mean_x[{i}]", est.value, est.std_error, 0.0, **common))
        out.append(record(command, args.model, None, "max_pairwise_z", audit.max_pairwise_z, **common))
        passed = audit.passed
    elif args.kind == "outcome-dependence":
        s = _planar_pair(args.theta)
        rep = diagnostics.outcome_dependence_audit(model, s, args.trials, args.seed, args.shards, args.workers)
        theta = math.radians(args.theta)
        if args.model == "local_baseline":
            ref_gap = analytic.local_baseline_conditional_gap(theta)
            ref_plus, ref_minus = theta / math.pi, 1.0 - theta / math.pi
        else:
            c = rep.cos_theta
            ref_gap = abs(c)
            ref_plus, ref_minus = analytic.singlet_conditional(1, 1, c), analytic.singlet_conditional(1, -1, c)
        plus, minus = rep.p_y_plus_given_x_plus, rep.p_y_plus_given_x_minus
        out.append(record(command, args.model, args.theta, "p_y_plus_given_x_plus", plus.value, plus.std_error, ref_plus, **common))
        out.append(record(command, args.model, args.theta, "p_y_plus_given_x_minus", minus.value, minus.std_error, ref_minus, **common))
        gap = record(command, args.model, args.theta, "gap", rep.gap, rep.gap_std_error, ref_gap, **common)
        out.append(gap)
        passed = gap["z_score"] < args.z_threshold
    else:
        probe = diagnostics.asymmetry_probe(args.trials, args.seed, model)
        ref_y = analytic.asymmetry_y_flip_rate() if args.model == "complete" else 0.0
        out.append(record(command, args.model, None, "x_flip_rate", probe.x_flip_rate_under_b_change, 0.0, 0.0, **common))
        out.append(record(command, args.model, None, "y_flip_rate", probe.y_flip_rate_under_a_change, probe.y_flip_std_error, ref_y, **common))
        passed = probe.x_flips == 0
    out.extend(_verdict(command, args.model, passed, args.z_threshold, common))
    if not passed:
        args._failed = True
    return out


def write_records(records, fmt: str, stream):
    if fmt == "json":
        json.dump(records, stream, indent=2)
        stream.write("\n")
        return
    writer = csv.DictWriter(stream, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: ("" if v is None else v) for k, v in r.items()})


def _add_common(p, models=TWO_PARTY_MODELS, default_model="complete"):
    p.add_argument("--model", choices=models, default=default_model)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--workers", type=int, default=1, help="threads used to run shards; does not change results")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--z-threshold", type=float, default=diagnostics.AUDIT_Z_THRESHOLD)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hvspin", description="Hidden-variable singlet spin simulations")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", help="estimate <XY> at one setting angle")
    _add_common(p)
    p.add_argument("--theta", type=float, required=True, help="angle between a and b in degrees")
    p.set_defaults(func=cmd_correlate)

    for name, func, help_ in (
        ("sweep", cmd_sweep, "correlation and joint probabilities over a grid of angles"),
        ("joint-probs", cmd_joint_probs, "the four joint probabilities over a grid of angles"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.add_argument("--theta-grid", default=DEFAULT_GRID, help="start:stop:step or comma list, degrees")
        p.set_defaults(func=func)

    p = sub.add_parser("chsh", help="CHSH combination at four planar angles")
    _add_common(p)
    p.add_argument("--angles", type=float, nargs=4, default=list(analytic.STANDARD_CHSH_ANGLES_DEG),
                   metavar=("A", "A_PRIME", "B", "B_PRIME"))
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("audit", help="signaling, outcome-dependence or asymmetry audit")
    p.add_argument("kind", choices=("signaling", "outcome-dependence", "asymmetry"))
    _add_common(p)
    p.add_argument("--theta", type=float, default=60.0, help="setting angle for the outcome-dependence audit")
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    if args.trials < 1:
        ap.error("--trials must be at least 1")
    if not 1 <= args.shards <= args.trials:
        ap.error("--shards must be between 1 and --trials")
    args._failed = False
    try:
        records = args.func(args)
    except (UnsupportedModelError, DomainError, argparse.ArgumentTypeError) as exc:
        print(f"hvspin {args.command}: error: {exc}", file=sys.stderr)
        return 2
    write_records(records, args.format, stdout)
    return 1 if args._failed else 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: verify (JSON report + one-line verdict), profile (Phi CSV),
scan (broken-hypothesis CSV), transport (two-column map CSV).

Exit codes: 0 confirmed/inconclusive, 1 violated, 2 inapplicable-hypothesis,
3 malformed config or unknown tag.  All outputs are byte-identical for a
fixed (config, seed, budget), independent of CORRINEQ_THREADS.
"""

import argparse
import sys

import numpy as np

from . import config, engine, search, transport
from .config import ConfigError
from .measures import RadialDensity
from .utils import canonical_json, stable_hash

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INAPPLICABLE = 2
EXIT_MALFORMED = 3


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _run_verify(args):
    raw = config.load_file(args.config)
    inst = config.load_instance(raw, args.theorem)
    n = int(args.samples)
    seed = int(args.seed)
    if args.theorem == "1.1":
        report = engine.verify_theorem_1_1(inst["A"], inst["measure"],
                                           inst["ball_radius"], n=n, seed=seed)
    elif args.theorem == "1.2":
        report = engine.verify_theorem_1_2(inst["A"], inst["measure"],
                                           inst["B"], n=n, seed=seed)
    elif args.theorem == "2.1":
        report = engine.verify_theorem_2_1(inst["field"], inst["measure"],
                                           inst["ball_radius"], n=n, seed=seed)
    elif args.theorem == "4.1":
        report = transport.verify_theorem_4_1(inst["field"], inst["sigma"],
                                              inst["phi"], n=n, seed=seed)
    else:
        report = transport.verify_corollary(inst["A"], inst["sigma"],
                                            n=n, seed=seed)
    doc = report.to_dict()
    doc["provenance"]["config_hash"] = stable_hash(raw)
    _write_text(args.out, canonical_json(doc) + "\n")
    gap = "None" if report.gap is None else repr(report.gap)
    print(f"theorem {args.theorem}: {report.verdict} (gap={gap})")
    if report.verdict == "violated":
        return EXIT_VIOLATED
    if report.verdict == "inapplicable-hypothesis":
        return EXIT_INAPPLICABLE
    return EXIT_OK


def _run_profile(args):
    raw = config.load_file(args.config)
    if "field" in raw:
        field = config.parse_field(raw["field"])
    elif "A" in raw:
        field = config.parse_field({"type": "indicator", "body": raw["A"]})
    else:
        raise ConfigError("profile config needs a 'field' or an 'A' body")
    measure = config.parse_measure(raw.get("measure",
                                           {"type": "gaussian", "d": field.d}))
    if not isinstance(measure, RadialDensity):
        raise ConfigError("profile requires a radial measure")
    if args.t_steps < 2:
        raise ConfigError("profile needs t-steps >= 2")
    if not (0.0 < args.t_min < args.t_max):
        raise ConfigError("profile needs 0 < t-min < t-max")
    t_grid = np.linspace(args.t_min, args.t_max, int(args.t_steps))
    prof = engine.phi_profile(field, measure, t_grid=t_grid,
                              n=int(args.samples), seed=int(args.seed))
    lines = ["t,phi,phi_se,dphi"]
    lines += [f"{t!r},{p!r},{ps!r},{dp!r}" for t, p, ps, dp in prof.rows()]
    t1 = "" if prof.t1_estimate is None else repr(prof.t1_estimate)
    lines.append(f"t1_estimate,{t1}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"profile: {len(prof.t_grid)} points, t1={t1 or 'none'}")
    return EXIT_OK


def _run_scan(args):
    if args.broken not in search.BROKEN_HYPOTHESES:
        print(f"unknown hypothesis tag {args.broken!r}; expected one of "
              f"{', '.join(search.BROKEN_HYPOTHESES)}", file=sys.stderr)
        return EXIT_MALFORMED
    report = search.necessity_scan(args.broken, int(args.instances),
                                   n=int(args.samples), seed=int(args.seed))
    _write_text(args.out, report.to_csv())
    print(f"scan {args.broken}: {len(report.hits)}/{len(report.rows)} "
          f"instances with gap < -5 SE")
    return EXIT_OK


def _run_transport(args):
    source = config.parse_marginal(config.load_file(args.source))
    target = config.parse_marginal(config.load_file(args.target))
    tmap = transport.monotone_map(source, target)
    lines = ["x,T"] + [f"{x!r},{t!r}" for x, t in tmap.rows()]
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"transport: {tmap.grid.size} rows, "
          f"pushforward deviation {tmap.pushforward_dev():.2e}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="corrineq",
        description="Numerical verification of correlation inequalities for "
                    "convex bodies under radial and product measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="verify one theorem instance")
    p_verify.add_argument("--theorem", required=True,
                          choices=["1.1", "1.2", "2.1", "4.1", "corollary"])
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--samples", type=int, default=engine.DEFAULT_N)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default="-")
    p_verify.set_defaults(run=_run_verify)

    p_profile = sub.add_parser("profile", help="emit the Phi(t) profile CSV")
    p_profile.add_argument("--config", required=True)
    p_profile.add_argument("--t-min", dest="t_min", type=float, default=0.05)
    p_profile.add_argument("--t-max", dest="t_max", type=float, default=4.0)
    p_profile.add_argument("--t-steps", dest="t_steps", type=int, default=33)
    p_profile.add_argument("--samples", type=int, default=engine.DEFAULT_N)
    p_profile.add_argument("--seed", type=int, default=0)
    p_profile.add_argument("--out", default="-")
    p_profile.set_defaults(run=_run_profile)

    p_scan = sub.add_parser("scan", help="broken-hypothesis necessity scan")
    p_scan.add_argument("--break", dest="broken", required=True)
    p_scan.add_argument("--instances", type=int, default=20)
    p_scan.add_argument("--samples", type=int, default=100_000)
    p_scan.add_argument("--seed", type=int, default=0)
    p_scan.add_argument("--out", default="-")
    p_scan.set_defaults(run=_run_scan)

    p_tr = sub.add_parser("transport", help="monotone rearrangement map CSV")
    p_tr.add_argument("--source", required=True)
    p_tr.add_argument("--target", required=True)
    p_tr.add_argument("--out", default="-")
    p_tr.set_defaults(run=_run_transport)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage errors; our 2 means
        # inapplicable-hypothesis, so report malformed input instead
        if exc.code not in (0, None):
            return EXIT_MALFORMED
        return 0
    try:
        return args.run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())

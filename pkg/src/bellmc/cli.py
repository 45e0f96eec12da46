"""Command-line interface.

Subcommands:
  simulate   run the configured setting pair or quad and write a JSON report
  scan       search setting quads for the largest inequality statistic
  residual   estimate the four-factor residual expression for a quad
  hist       histogram of reduced impact parameters as CSV
  verify     rerun packaged reference cases and compare exact counts

Exit codes: 0 success, 1 verification mismatch, 2 unreadable or
syntactically invalid input, 3 invalid configuration, 4 runtime failure.
Relative output paths resolve under $BELLMC_OUT when it is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, kernels
from .config import ExperimentConfig, from_mapping, load_config, parse_angle
from .engine import RunConfig, run_coincidence, run_quad
from .errors import (
    BellmcError,
    ConfigParseError,
    ConfigurationError,
    ResourceError,
)
from .geometry import impact_histogram
from .inequalities import (
    CH_CONVENTIONS,
    STATISTIC_CHOICES,
    SettingsQuad,
    bell_residual,
    inequality_report,
    maximize_settings,
)
from .reports import (
    HIST_CSV_HEADER,
    SCAN_CSV_HEADER,
    hist_rows,
    pair_payload,
    quad_payload,
    report_document,
    residual_payload,
    scan_payload,
    scan_rows,
    write_csv,
    write_json,
)

OUT_DIR_ENV = "BELLMC_OUT"

EXIT_OK = 0
EXIT_VERIFY_MISMATCH = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4

DEFAULT_FIXTURE = os.path.join(os.path.dirname(__file__), "data", "verify_fixture.json")


def _resolve_out(path: str | None, default_name: str) -> str:
    chosen = path if path else default_name
    base = os.environ.get(OUT_DIR_ENV, "")
    if base and not os.path.isabs(chosen):
        return os.path.join(base, chosen)
    return chosen


def _angle_arg(text: str) -> float:
    # argparse type hook; errors surface as exit 2 via ArgumentTypeError
    try:
        return parse_angle(text, "argument")
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _base_run_config(
    cfg: ExperimentConfig,
    label: str,
    seed: int | None,
    events: int | None,
    threads: int | None,
    alpha: float = 0.0,
    beta: float = 0.0,
) -> RunConfig:
    model_1, model_2 = cfg.build_models()
    return RunConfig(
        distribution=cfg.source,
        arms=cfg.arms,
        lattice=cfg.lattice,
        model_1=model_1,
        model_2=model_2,
        alpha=alpha,
        beta=beta,
        n_events=cfg.events if events is None else events,
        seed=cfg.seed if seed is None else seed,
        label=label,
        workers=cfg.workers if threads is None else threads,
        qm_reference=cfg.qm_reference,
    )


def _load(args) -> ExperimentConfig:
    return load_config(args.config)


def _effective_mapping(cfg: ExperimentConfig, run: RunConfig) -> dict:
    """Config echo with any command-line overrides folded in."""
    mapping = cfg.to_mapping()
    mapping["run"]["events"] = run.n_events
    mapping["run"]["seed"] = run.seed
    mapping["run"]["workers"] = run.workers
    return mapping


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.settings_kind == "pair":
        alpha, beta = cfg.settings
        run = _base_run_config(cfg, "cli/pair", args.seed, args.events, args.threads,
                               alpha=alpha, beta=beta)
        result = run_coincidence(run)
        body = {"run": pair_payload(result)}
        document = report_document("run-pair", _effective_mapping(cfg, run),
                                   kernels.backend_name(), body)
        out = _resolve_out(args.out, "bellmc-run.json")
        write_json(out, document)
        print(f"models: {result.model_1} / {result.model_2}")
        print(f"events: {result.n_events}  seed: {result.seed}  "
              f"backend: {kernels.backend_name()}")
        print(f"P(joint) = {result.p_joint}")
        print(f"P(equal) = {result.p_equal}")
        print(f"P1 = {result.p1}   P2 = {result.p2}")
        print(f"report: {out}")
        return EXIT_OK
    if cfg.settings_kind == "quad":
        quad = SettingsQuad(*cfg.settings)
        run = _base_run_config(cfg, "cli/quad", args.seed, args.events, args.threads)
        result = run_quad(run, quad)
        report = inequality_report(result)
        document = report_document("run-quad", _effective_mapping(cfg, run),
                                   kernels.backend_name(), quad_payload(result))
        out = _resolve_out(args.out, "bellmc-quad.json")
        write_json(out, document)
        print(f"models: {report.model_1} / {report.model_2}")
        print(f"events per pair: {report.n_per_pair}  seed: {run.seed}  "
              f"backend: {kernels.backend_name()}")
        for stat in (report.s_joint, report.s_equal, report.s_corr):
            print(f"{stat.name:12s} = {stat.statistic}   bound {stat.bound:+0.3f}   "
                  f"z = {stat.z:+.2f}")
        ch = report.ch_standard if args.convention == "standard" else report.ch_unprimed
        print(f"{ch.name:12s} = {ch.statistic}   bound {ch.bound:+0.3f}   z = {ch.z:+.2f}")
        print(f"report: {out}")
        return EXIT_OK
    raise ConfigurationError(
        "simulate needs a 'pair' or 'quad' settings section; "
        "a settings list only feeds hist"
    )


def _cmd_scan(args) -> int:
    cfg = _load(args)
    run = _base_run_config(cfg, "cli/scan", args.seed, args.events, args.threads)
    result = maximize_settings(
        run,
        statistic=args.statistic,
        search=args.search,
        grid_step=args.grid_step,
        budget=args.budget,
        exact=args.exact,
    )
    document = report_document("scan", _effective_mapping(cfg, run),
                               kernels.backend_name(), scan_payload(result))
    out = _resolve_out(args.out, "bellmc-scan.json")
    write_json(out, document)
    if args.rows:
        rows_path = _resolve_out(args.rows, "bellmc-scan.csv")
        write_csv(rows_path, SCAN_CSV_HEADER, scan_rows(result))
        print(f"rows: {rows_path}")
    best = result.best
    q = result.best_quad
    print(f"statistic: {result.statistic} ({result.mode}), "
          f"{result.evaluations} evaluations of budget {result.budget}")
    print(f"best quad: alpha={q.alpha:.6f} alpha'={q.alpha_prime:.6f} "
          f"beta={q.beta:.6f} beta'={q.beta_prime:.6f}")
    print(f"best value: {best.statistic}   bound {best.bound:+0.3f}   z = {best.z:+.2f}")
    print(f"report: {out}")
    return EXIT_OK


def _cmd_residual(args) -> int:
    cfg = _load(args)
    if cfg.settings_kind != "quad":
        raise ConfigurationError("residual needs a 'quad' settings section")
    quad = SettingsQuad(*cfg.settings)
    run = _base_run_config(cfg, "cli", args.seed, args.events, args.threads)
    result = bell_residual(run, quad)
    document = report_document("residual", _effective_mapping(cfg, run),
                               kernels.backend_name(), residual_payload(result))
    out = _resolve_out(args.out, "bellmc-residual.json")
    write_json(out, document)
    kind = "impact-dependent" if result.impact_dependent else "impact-independent"
    print(f"residual ({kind} models, {result.n_events} events): {result.estimate}")
    print(f"report: {out}")
    return EXIT_OK


def _cmd_hist(args) -> int:
    cfg = _load(args)
    if args.setting is not None:
        gamma = args.setting
    else:
        gamma = cfg.settings[0]
    events = cfg.events if args.events is None else args.events
    seed = cfg.seed if args.seed is None else args.seed
    frequencies, xe, ye = impact_histogram(
        cfg.source, cfg.arms, cfg.lattice, gamma, events, seed,
        bins=args.bins, device=args.device,
    )
    out = _resolve_out(args.out, "bellmc-hist.csv")
    write_csv(out, HIST_CSV_HEADER, hist_rows(frequencies, xe, ye))
    print(f"histogram: device {args.device}, setting {gamma:.6f} rad, "
          f"{events} events, {args.bins}x{args.bins} bins")
    print(f"rows: {out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    fixture_path = args.fixture or DEFAULT_FIXTURE
    if not os.path.exists(fixture_path):
        raise ResourceError(f"verification fixture not found: {fixture_path}")
    with open(fixture_path, "r", encoding="utf-8") as handle:
        try:
            fixture = json.load(handle)
        except json.JSONDecodeError as exc:
            print(f"verify: fixture is not valid JSON: {exc}", file=sys.stderr)
            return EXIT_VERIFY_MISMATCH
    cases = fixture.get("cases")
    if not isinstance(cases, list) or not cases:
        print("verify: fixture holds no cases", file=sys.stderr)
        return EXIT_VERIFY_MISMATCH

    failures = 0
    for case in cases:
        name = case.get("name", "<unnamed>")
        try:
            cfg = from_mapping(case["config"])
            alpha, beta = cfg.settings
            run = _base_run_config(cfg, case.get("label", "verify"), None, None, None,
                                   alpha=alpha, beta=beta)
            counts = run_coincidence(run).counts()
        except (KeyError, BellmcError) as exc:
            print(f"  {name}: ERROR {exc}")
            failures += 1
            continue
        expected = case.get("expected_counts")
        if counts == expected:
            print(f"  {name}: ok")
        else:
            print(f"  {name}: MISMATCH")
            print(f"    expected: {expected}")
            print(f"    got:      {counts}")
            failures += 1
    total = len(cases)
    print(f"verify: {total - failures}/{total} cases match "
          f"(backend: {kernels.backend_name()})")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellmc",
        description="Event-based coincidence simulations for local polarization models.",
    )
    parser.add_argument("--version", action="version", version=f"bellmc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config file (YAML)")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--events", type=int, default=None, help="override run.events")
        p.add_argument("--threads", type=int, default=None, help="override run.workers")
        p.add_argument("--out", default=None,
                       help=f"output path (relative paths resolve under ${OUT_DIR_ENV})")

    p_sim = sub.add_parser("simulate", help="run the configured setting pair or quad")
    add_common(p_sim)
    p_sim.add_argument("--convention", choices=CH_CONVENTIONS, default="standard",
                       help="which Clauser-Horn singles convention to print")
    p_sim.set_defaults(func=_cmd_simulate)

    p_scan = sub.add_parser("scan", help="search setting quads for the largest statistic")
    add_common(p_scan)
    p_scan.add_argument("--statistic", choices=STATISTIC_CHOICES, default="s-equal")
    p_scan.add_argument("--grid-step", type=_angle_arg, default="11.25 deg",
                        help="grid spacing with unit suffix, e.g. '11.25 deg'")
    p_scan.add_argument("--budget", type=int, default=None,
                        help="cap on statistic evaluations")
    p_scan.add_argument("--search", choices=("grid", "coordinate-descent"), default="grid")
    p_scan.add_argument("--exact", action="store_true",
                        help="closed-form/quadrature probabilities instead of sampling")
    p_scan.add_argument("--rows", default=None, help="also write all scanned quads as CSV")
    p_scan.set_defaults(func=_cmd_scan)

    p_res = sub.add_parser("residual", help="estimate the four-factor residual expression")
    add_common(p_res)
    p_res.set_defaults(func=_cmd_residual)

    p_hist = sub.add_parser("hist", help="reduced-impact histogram as CSV")
    add_common(p_hist)
    p_hist.add_argument("--setting", type=_angle_arg, default=None,
                        help="polarizer setting with unit suffix (default: first configured)")
    p_hist.add_argument("--bins", type=int, default=32)
    p_hist.add_argument("--device", type=int, choices=(1, 2), default=1)
    p_hist.set_defaults(func=_cmd_hist)

    p_ver = sub.add_parser("verify", help="rerun packaged cases and compare exact counts")
    p_ver.add_argument("--fixture", default=None, help="fixture JSON (default: packaged)")
    p_ver.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"bellmc: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"bellmc: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigurationError as exc:
        print(f"bellmc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BellmcError as exc:
        print(f"bellmc: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

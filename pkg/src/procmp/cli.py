"""Command line surface: profile, detect, eval, synth, plot.

Exit codes: 0 success, 1 usage or validation problem, 2 unreadable or
inconsistent input data, 3 fast-path verification failure.

Every option a subcommand accepts can also come from a key=value config
file via --config; command-line flags win over the file, the file wins
over built-in defaults. Keys use the long flag name with '-' or '_'
(window, metric, exclusion, threshold, merge_gap, min_width, smear,
threads, seed).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

from .dataio import read_attacks, read_csv, write_attacks, write_csv
from .detection import (
    match_attacks,
    sweep_thresholds,
    threshold_detect,
    write_events_csv,
    write_report,
    write_sweep_csv,
)
from .errors import (
    InvalidDataError,
    ParseError,
    ProcmpError,
    SchemaError,
    VerificationError,
)
from .ioutil import parse_kv
from .profile import METRICS, compute_profile, load_profile, save_profile
from .synth import BUNDLED_SPECS, attack_intervals, generate, load_bundled_spec, load_spec


class UsageError(Exception):
    """Bad flags or flag combinations; exits 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Merged view of defaults, config file, and flags for one command."""

    window: int = 2000
    metric: str = "auto"
    exclusion: int | None = None
    threshold: float = 0.1
    merge_gap: int = 0
    min_width: int = 1
    smear: int | None = None
    threads: int = 1
    seed: int | None = None

    def validate(self) -> None:
        if self.window < 2:
            raise UsageError(f"window {self.window} must be at least 2")
        if self.metric != "auto" and self.metric not in METRICS:
            raise UsageError(
                f"metric {self.metric!r} not one of auto, {', '.join(METRICS)}"
            )
        if self.exclusion is not None and self.exclusion < 0:
            raise UsageError(f"exclusion {self.exclusion} is negative")
        if self.threshold < 0:
            raise UsageError(f"threshold {self.threshold} is negative")
        if self.merge_gap < 0:
            raise UsageError(f"merge_gap {self.merge_gap} is negative")
        if self.min_width < 1:
            raise UsageError(f"min_width {self.min_width} must be at least 1")
        if self.smear is not None and self.smear < 0:
            raise UsageError(f"smear {self.smear} is negative")
        if self.threads < 1:
            raise UsageError(f"threads {self.threads} must be at least 1")


_CONFIG_FIELDS = {
    "window": int,
    "metric": str,
    "exclusion": int,
    "threshold": float,
    "merge_gap": int,
    "min_width": int,
    "smear": int,
    "threads": int,
    "seed": int,
}


def _load_config_file(path) -> dict:
    raw = parse_kv(Path(path).read_text(), where=str(path))
    out = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in _CONFIG_FIELDS:
            raise UsageError(f"{path}: unknown config key {key!r}")
        try:
            out[name] = _CONFIG_FIELDS[name](value)
        except ValueError:
            raise UsageError(f"{path}: bad value {value!r} for {key}") from None
    return out


def build_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _split_channels(values) -> list[str]:
    out = []
    for v in values or []:
        out += [part.strip() for part in v.split(",") if part.strip()]
    return out


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------- subcommands

def cmd_profile(args) -> int:
    cfg = build_config(args)
    log = read_csv(args.input)
    names = _split_channels(args.channel) or list(log.channels)
    outdir = _outdir(args)
    for name in names:
        ch = log.channel(name)
        prof = compute_profile(
            ch,
            cfg.window,
            metric=cfg.metric,
            exclusion=cfg.exclusion,
            threads=cfg.threads,
            verify=args.verify,
        )
        path = outdir / f"{name}.profile.csv"
        save_profile(prof, path, channel_name=name, series_length=len(ch))
        print(
            f"{name}: metric={prof.metric} window={prof.window} "
            f"exclusion={prof.exclusion} positions={len(prof)} "
            f"max={prof.distances.max():.9g} -> {path}"
        )
    return 0


def _resolve_profile(args, cfg: RunConfig):
    """Either load a stored profile or compute one from a log channel."""
    if args.profile:
        if args.input or args.channel:
            raise UsageError("give either --profile or --input/--channel, not both")
        prof, meta = load_profile(args.profile)
        return prof, meta.get("channel", Path(args.profile).stem)
    if not args.input:
        raise UsageError("need --profile, or --input with --channel")
    names = _split_channels(args.channel)
    if len(names) != 1:
        raise UsageError("exactly one --channel is required when profiling a log")
    log = read_csv(args.input)
    ch = log.channel(names[0])
    prof = compute_profile(
        ch,
        cfg.window,
        metric=cfg.metric,
        exclusion=cfg.exclusion,
        threads=cfg.threads,
    )
    return prof, names[0]


def cmd_detect(args) -> int:
    cfg = build_config(args)
    prof, name = _resolve_profile(args, cfg)
    events = threshold_detect(
        prof, cfg.threshold, merge_gap=cfg.merge_gap, min_width=cfg.min_width
    )
    report = match_attacks(events, [], prof.window, smear=cfg.smear)
    path = _outdir(args) / f"{name}.events.csv"
    write_events_csv(report, path)
    print(f"{name}: {len(events)} events at threshold {cfg.threshold:.9g} -> {path}")
    return 0


def cmd_eval(args) -> int:
    cfg = build_config(args)
    prof, name = _resolve_profile(args, cfg)
    attacks = read_attacks(args.attacks)
    if args.targets_only:
        attacks = [a for a in attacks if name in a.targets]
    events = threshold_detect(
        prof, cfg.threshold, merge_gap=cfg.merge_gap, min_width=cfg.min_width
    )
    report = match_attacks(events, attacks, prof.window, smear=cfg.smear)
    outdir = _outdir(args)
    context = {
        "channel": name,
        "metric": prof.metric,
        "threshold": f"{cfg.threshold:.9g}",
    }
    write_report(report, outdir / f"{name}.report.txt", context=context)
    write_events_csv(report, outdir / f"{name}.events.csv")
    if args.sweep:
        try:
            thresholds = [float(t) for t in args.sweep.split(",") if t.strip()]
        except ValueError:
            raise UsageError(f"bad --sweep list {args.sweep!r}") from None
        if not thresholds or any(t < 0 for t in thresholds) or any(
            b <= a for a, b in zip(thresholds, thresholds[1:])
        ):
            raise UsageError(
                f"--sweep {args.sweep!r} must be nonnegative and strictly ascending"
            )
        rows = sweep_thresholds(
            prof,
            attacks,
            thresholds,
            merge_gap=cfg.merge_gap,
            min_width=cfg.min_width,
            smear=cfg.smear,
        )
        write_sweep_csv(rows, outdir / f"{name}.sweep.csv")
    print(
        f"{name}: detected {report.detected_count}/{len(attacks)} attacks, "
        f"{report.false_positive_count} false-positive events -> {outdir}"
    )
    return 0


def cmd_synth(args) -> int:
    if Path(args.spec).exists():
        spec = load_spec(args.spec)
        stem = Path(args.spec).stem
    else:
        spec = load_bundled_spec(args.spec)
        stem = args.spec.removesuffix(".spec")
    cfg = build_config(args)
    if cfg.seed is not None:
        spec = dataclasses.replace(spec, seed=cfg.seed)
    stem = args.stem or stem
    log = generate(spec)
    outdir = _outdir(args)
    log_path = outdir / f"{stem}.csv"
    attacks_path = outdir / f"{stem}.attacks.csv"
    write_csv(log, log_path)
    write_attacks(attack_intervals(spec), attacks_path)
    print(
        f"{stem}: n={log.n} channels={','.join(log.channels)} "
        f"attacks={len(spec.attacks)} -> {log_path}"
    )
    return 0


def cmd_plot(args) -> int:
    if str(args.out).rsplit(".", 1)[-1].lower() not in ("svg", "pdf", "png"):
        raise UsageError(f"--out {args.out}: use a .svg, .pdf, or .png suffix")
    # matplotlib is imported lazily so the other commands stay light
    from .plotting import detection_figure, save_figure

    cfg = build_config(args)
    log = read_csv(args.input)
    names = _split_channels(args.channel) or list(log.channels)
    channels = [log.channel(name) for name in names]
    if args.profile:
        if len(args.profile) != len(names):
            raise UsageError(
                f"{len(names)} channels but {len(args.profile)} --profile files"
            )
        profiles = [load_profile(p)[0] for p in args.profile]
    else:
        profiles = [
            compute_profile(
                ch,
                cfg.window,
                metric=cfg.metric,
                exclusion=cfg.exclusion,
                threads=cfg.threads,
            )
            for ch in channels
        ]
    attacks = read_attacks(args.attacks) if args.attacks else None
    labels = log.labels if attacks is None else None
    fig = detection_figure(
        channels,
        profiles,
        labels=labels,
        attacks=attacks,
        threshold=cfg.threshold,
        title=args.title,
    )
    save_figure(fig, args.out)
    print(f"wrote {args.out}")
    return 0


# ----------------------------------------------------------------- parser

def _add_profile_opts(p: _Parser) -> None:
    p.add_argument("-m", "--window", type=int, help="subsequence length (default 2000)")
    p.add_argument("--metric", choices=("auto", *METRICS), default=None)
    p.add_argument("--exclusion", type=int, help="self-match exclusion radius")
    p.add_argument("--threads", type=int, help="worker threads (default 1)")


def _add_detect_opts(p: _Parser) -> None:
    p.add_argument("--threshold", type=float, help="alarm threshold (default 0.1)")
    p.add_argument("--merge-gap", dest="merge_gap", type=int)
    p.add_argument("--min-width", dest="min_width", type=int)


def _add_common(p: _Parser, out_default=".") -> None:
    p.add_argument("--config", help="key=value file supplying any option")
    p.add_argument("--out", default=out_default, help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="procmp",
        description="Matrix-profile anomaly detection for industrial process logs.",
    )
    parser.set_defaults(func=None)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("profile", help="compute matrix profiles for log channels")
    p.add_argument("--input", required=True, help="process log CSV")
    p.add_argument(
        "--channel",
        action="append",
        help="channel name(s), repeatable or comma-separated; default: all",
    )
    _add_profile_opts(p)
    p.add_argument(
        "--verify",
        action="store_true",
        help="check the fast path against the brute-force reference",
    )
    _add_common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("detect", help="threshold a profile into anomaly events")
    p.add_argument("--profile", help="stored profile CSV (with .meta sidecar)")
    p.add_argument("--input", help="process log CSV (compute the profile here)")
    p.add_argument("--channel", action="append", help="channel to profile")
    _add_profile_opts(p)
    _add_detect_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("--profile", help="stored profile CSV (with .meta sidecar)")
    p.add_argument("--input", help="process log CSV (compute the profile here)")
    p.add_argument("--channel", action="append", help="channel to profile")
    p.add_argument("--attacks", required=True, help="ground truth CSV")
    _add_profile_opts(p)
    _add_detect_opts(p)
    p.add_argument("--smear", type=int, help="tolerance after each attack (default: window)")
    p.add_argument("--sweep", help="comma-separated ascending thresholds")
    p.add_argument(
        "--targets-only",
        dest="targets_only",
        action="store_true",
        help="score only attacks that target the evaluated channel",
    )
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthesis spec to CSV + ground truth")
    p.add_argument(
        "spec",
        help=f"spec file path or bundled name ({', '.join(BUNDLED_SPECS)})",
    )
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--stem", help="output file stem (default: spec name)")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("plot", help="render channel/distance/attack panels")
    p.add_argument("--input", required=True, help="process log CSV")
    p.add_argument("--channel", action="append", help="channel name(s); default: all")
    p.add_argument(
        "--profile",
        action="append",
        help="stored profile CSV per channel (else computed)",
    )
    p.add_argument("--attacks", help="ground truth CSV for the attack panel")
    _add_profile_opts(p)
    p.add_argument("--threshold", type=float, help="threshold line (default 0.1)")
    p.add_argument("--title")
    p.add_argument("--config", help="key=value file supplying any option")
    p.add_argument("--out", required=True, help="figure file (.svg, .pdf, or .png)")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.func is None:
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, SchemaError, InvalidDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ProcmpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

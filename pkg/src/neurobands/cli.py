"""Command-line surface: synth, features, compare.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage error. Tables go
to stdout, diagnostics to stderr. NEUROBANDS_SEED is the seed fallback
when --seed is not given.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .data import LABEL_COLUMNS, LabelConfig, SynthSpec, synth_dataset
from .electrode_sets import parse_selector, resolve_indices
from .errors import NeurobandsError
from .harness import SplitSpec, TrainConfig, compare_sets, electrode_count_sweep
from .io import load_portable, write_features, write_portable
from .montage import channel_index
from .preprocess import prepare
from .spectral import WindowPlan, concat_features, extract_features

DEFAULT_SEED = 42


def _seed_default() -> int:
    env = os.environ.get("NEUROBANDS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_SEED


def _window_plan(parser: argparse.ArgumentParser, window: int, step: int) -> WindowPlan:
    if window < 1 or window & (window - 1):
        parser.error(f"--window {window} is not a power of two")
    if step < 1:
        parser.error(f"--step must be >= 1, got {step}")
    return WindowPlan(window_size=window, step_size=step)


def _label_config(parser: argparse.ArgumentParser, label: str, threshold: float) -> LabelConfig:
    if label not in LABEL_COLUMNS:
        parser.error(f"--label must be one of {sorted(LABEL_COLUMNS)}, got {label!r}")
    if not 1.0 < threshold < 9.0:
        parser.error(f"--threshold must lie in (1, 9), got {threshold}")
    return LabelConfig(label=label, threshold=threshold)


def _resolve_sets(parser: argparse.ArgumentParser, selector: str):
    try:
        sets = parse_selector(selector)
        for es in sets:
            resolve_indices(es)  # fail fast on unknown electrode names
        return sets
    except NeurobandsError as exc:
        parser.error(str(exc))


def _load_prepared(paths: list[str], input_kind: str, baseline_s: float):
    recordings = []
    for p in paths:
        rec = load_portable(p)
        recordings.append(prepare(rec, input_kind=input_kind, baseline_s=baseline_s))
    return recordings


def cmd_synth(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.signal_channels:
        try:
            carriers = tuple(channel_index(n) for n in args.signal_channels.split(","))
        except NeurobandsError as exc:
            parser.error(str(exc))
    else:
        carriers = None
    spec = SynthSpec(
        n_trials=args.trials,
        n_channels=args.channels,
        n_samples=args.samples,
        sample_rate_hz=args.rate,
        noise_amplitude=args.noise,
        seed=args.seed if args.seed is not None else _seed_default(),
        signal_channels=carriers,
    )
    rec = synth_dataset(spec)
    write_portable(rec, args.out)
    print(f"wrote {args.out}: {rec.n_trials}x{rec.n_channels}x{rec.n_samples} "
          f"@ {rec.sample_rate_hz:g} Hz", file=sys.stderr)
    return 0


def cmd_features(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    sets = _resolve_sets(parser, args.set)
    if len(sets) != 1:
        parser.error("features expects a single electrode set (setNN or lobe:NAME)")
    plan = _window_plan(parser, args.window, args.step)
    label_cfg = _label_config(parser, args.label, args.threshold)

    recordings = _load_prepared(args.input, args.input_kind, args.baseline)
    features = concat_features(
        [extract_features(rec, sets[0], plan, label_cfg) for rec in recordings]
    )
    write_features(features, args.out)
    print(f"wrote {args.out}: {features.n_rows} rows x {features.n_columns} columns",
          file=sys.stderr)
    return 0


def _print_comparison(table) -> None:
    print(f"{'set_id':<12}{'n':>4}  {'prior%':>8}  {'ours%':>8}")
    for r in table.reports:
        prior = f"{r.prior_accuracy:.2f}" if r.prior_accuracy is not None else "-"
        print(f"{r.set_id:<12}{r.n_electrodes:>4}  {prior:>8}  "
              f"{100.0 * r.test_accuracy:>8.4f}")


def cmd_compare(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.lobes:
        sets = _resolve_sets(parser, "lobes")
    elif args.sweep:
        sets = None
    else:
        sets = _resolve_sets(parser, args.sets)

    plan = _window_plan(parser, args.window, args.step)
    label_cfg = _label_config(parser, args.label, args.threshold)
    seed = args.seed if args.seed is not None else _seed_default()
    train_cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                            learning_rate=args.learning_rate, seed=seed)
    split_spec = SplitSpec(train_fraction=args.train_fraction,
                           granularity=args.granularity, seed=seed)

    recordings = _load_prepared(args.input, args.input_kind, args.baseline)

    if args.sweep:
        curve = electrode_count_sweep(recordings, train_cfg, split_spec, plan,
                                      label_cfg, jobs=args.jobs)
        print("n_electrodes  set_id    accuracy%")
        for n, set_id, acc in curve.points:
            print(f"{n:>12}  {set_id:<8}  {100.0 * acc:8.4f}")
        if args.report:
            curve.write_csv(args.report)
            if args.figures:
                from .figures import render_curve

                render_curve(curve, Path(args.report).with_suffix(".png"))
        return 0

    table = compare_sets(recordings, sets, train_cfg, split_spec, plan,
                         label_cfg, jobs=args.jobs)
    _print_comparison(table)
    if args.report:
        table.write_csv(args.report)
        if args.figures:
            from .figures import render_comparison, render_history

            base = Path(args.report)
            render_comparison(table, base.with_suffix(".png"))
            render_history(table, base.with_name(base.stem + "_history.png"))
    if args.json:
        table.write_json(args.json)
    return 0


def _add_io_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", action="append", required=True, metavar="FILE.eegb",
                     help="portable recording; repeat for several subjects")
    sub.add_argument("--input-kind", choices=("preprocessed", "raw"),
                     default="preprocessed",
                     help="'raw' runs downsample/bandpass/re-reference first")
    sub.add_argument("--baseline", type=float, default=3.0,
                     help="pre-trial seconds to trim (default 3)")
    sub.add_argument("--window", type=int, default=256, help="window size in samples")
    sub.add_argument("--step", type=int, default=16, help="window step in samples")
    sub.add_argument("--label", default="valence", help="rating column to binarize")
    sub.add_argument("--threshold", type=float, default=5.0,
                     help="class-1 threshold on the 1-9 scale")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neurobands",
        description="Band-power features and electrode-set comparison for "
                    "32-channel EEG recordings.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_synth = subs.add_parser("synth", help="write a synthetic portable recording")
    p_synth.add_argument("--trials", type=int, default=8)
    p_synth.add_argument("--channels", type=int, default=32)
    p_synth.add_argument("--samples", type=int, default=1024)
    p_synth.add_argument("--rate", type=float, default=128.0)
    p_synth.add_argument("--noise", type=float, default=0.1)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--signal-channels", default="",
                         help="comma-separated electrode names carrying the tone "
                              "(default: all channels)")
    p_synth.add_argument("--out", required=True, metavar="FILE.eegb")

    p_feat = subs.add_parser("features", help="extract band-power features")
    _add_io_flags(p_feat)
    p_feat.add_argument("--set", required=True,
                        help="setNN, lobe:NAME, or a lobe name")
    p_feat.add_argument("--out", required=True, metavar="FILE.eegb")

    p_cmp = subs.add_parser("compare", help="train/evaluate electrode sets")
    _add_io_flags(p_cmp)
    group = p_cmp.add_mutually_exclusive_group()
    group.add_argument("--sets", default="all",
                       help="selector: 'all', 'lobes', 'setNN', 'lobe:NAME', "
                            "or a comma-separated list of those")
    group.add_argument("--lobes", action="store_true",
                       help="compare the five lobe groupings")
    group.add_argument("--sweep", action="store_true",
                       help="accuracy vs electrode count over published sets")
    p_cmp.add_argument("--epochs", type=int, default=50)
    p_cmp.add_argument("--batch-size", type=int, default=64)
    p_cmp.add_argument("--learning-rate", type=float, default=1e-3)
    p_cmp.add_argument("--seed", type=int, default=None)
    p_cmp.add_argument("--train-fraction", type=float, default=0.8)
    p_cmp.add_argument("--granularity", choices=("window", "trial"), default="window")
    p_cmp.add_argument("--jobs", type=int, default=1,
                       help="parallel set evaluations (order-independent output)")
    p_cmp.add_argument("--report", metavar="FILE.csv", help="write the CSV report")
    p_cmp.add_argument("--json", metavar="FILE.json", help="write the JSON report")
    p_cmp.add_argument("--no-figures", dest="figures", action="store_false",
                       help="skip PNG rendering next to the CSV report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"synth": cmd_synth, "features": cmd_features, "compare": cmd_compare}
    try:
        return handlers[args.command](parser, args)
    except NeurobandsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

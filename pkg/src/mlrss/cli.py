"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baseline import BaselineModel, fit_baseline
from .comparators import ewma_scores
from .config import RunConfig, load_config
from .detector import DetectorConfig, MLRSSDetector
from .errors import DataError, MlrssError, NumericalError, RangeMismatch
from .evaluation import amoc, evaluate, threshold_for_rate, write_amoc
from .profiles import FitOptions, OutbreakSignature, ProfileBank, ProfileShape, build_bank
from .series import CountSeries, read_counts, write_counts
from .simulator import (CENTRAL_THETA, DEFAULT_BETA, SimConfig, Truth, read_outbreaks, read_truth,
                        sidecar_paths, simulate, training_scenario, write_truth)
from .study import spaced_outbreak_stream
from .tables import ScoreTable, from_scan, read_scores, write_scores

log = logging.getLogger("mlrss")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4


class UsageError(MlrssError):
    pass


def _central(cfg: RunConfig) -> ProfileShape:
    return ProfileShape(cfg.family, cfg.simulate.central or CENTRAL_THETA[cfg.family], cfg.form)


def _outbreak_mask(n: int, outbreaks, buffer: int) -> np.ndarray:
    return Truth(None, np.zeros(n), tuple(outbreaks)).outbreak_mask(buffer)


def _signatures(series: CountSeries, lam: np.ndarray, outbreaks, margin: int = 2) -> list[OutbreakSignature]:
    sigs = []
    for ob in outbreaks:
        last = min(ob.eff_end + margin, len(series))
        days = np.arange(ob.t_o, last + 1)
        sigs.append(OutbreakSignature(series.counts[days - 1], lam[days - 1], ob.t_o, days))
    return sigs


def _score(cfg: RunConfig, series: CountSeries, model: BaselineModel, bank: ProfileBank | None) -> ScoreTable:
    lam = model.lambdas(series)
    if cfg.method == "ewma":
        return ScoreTable(series.dates, "ewma", ewma_scores(series.counts, lam, cfg.phi))
    if bank is None:
        raise UsageError("the mlrss method needs a profile bank (--bank)")
    d = cfg.detector
    det = DetectorConfig(bank, model, S=d.S, min_window=d.min_window, gamma=d.gamma,
                         remediation=d.remediation, iterative_remediation=d.iterative_remediation,
                         score_scale=d.score_scale, log_cap=d.log_cap, max_lookback=cfg.lookback(bank))
    return from_scan(series.dates, MLRSSDetector(det).run(series.counts, lam))


def _parse_grid(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return tuple(float(x) for x in np.linspace(float(lo), float(hi), int(n)))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --threshold-grid {text!r}; use 'a,b,c' or 'lo:hi:n'") from exc


def _default_grid(scores) -> tuple[float, ...]:
    return tuple(float(x) for x in np.unique(np.quantile(scores, np.linspace(0.5, 1.0, 26))))


def _evaluate_to(scores, truth: Truth, grid, buffer: int, out: Path, method: str, extra: dict | None = None):
    points = amoc(scores, truth, grid, buffer=buffer)
    stem = out.name[:-5] if out.name.endswith(".json") else out.name
    write_amoc(points, out.with_name(stem + ".amoc.csv"))
    doc = {"method": method, "buffer": buffer,
           "reports": [evaluate(scores, truth, th, buffer=buffer).summary() for th in sorted(set(grid))]}
    if extra:
        doc.update(extra)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def cmd_simulate(cfg: RunConfig, args) -> None:
    out = _require(args.output, "--output")
    sim = cfg.simulate
    if args.scenario == "training":
        labeled = training_scenario(cfg.family, cfg.seed, central=_central(cfg).theta, jitter=sim.jitter,
                                    spec=cfg.design)
    elif args.scenario == "null":
        labeled = simulate(SimConfig(sim.horizon_days, DEFAULT_BETA.copy(), cfg.design, (), cfg.seed))
    else:
        labeled = spaced_outbreak_stream(cfg.seed, _central(cfg), horizon=sim.horizon_days,
                                         n_outbreaks=sim.n_outbreaks, jitter=sim.jitter)
    write_counts(labeled.series, out)
    write_truth(labeled, *sidecar_paths(out))


def cmd_fit_baseline(cfg: RunConfig, args) -> None:
    series = read_counts(_require(args.input, "--input"))
    mask = None
    if args.outbreaks:
        mask = ~_outbreak_mask(len(series), read_outbreaks(args.outbreaks), cfg.buffer)
    model = fit_baseline(series, cfg.design, mask=mask)
    model.save(_require(args.output, "--output"))


def cmd_fit_profiles(cfg: RunConfig, args) -> None:
    series = read_counts(_require(args.input, "--input"))
    model = BaselineModel.load(_require(args.baseline, "--baseline"))
    outbreaks = read_outbreaks(_require(args.outbreaks, "--outbreaks"))
    bank = build_bank(_signatures(series, model.lambdas(series), outbreaks), cfg.family,
                      FitOptions(form=cfg.form))
    bank.save(_require(args.output, "--output"))


def cmd_detect(cfg: RunConfig, args) -> None:
    series = read_counts(_require(args.input, "--input"))
    model = BaselineModel.load(_require(args.baseline, "--baseline"))
    bank = ProfileBank.load(args.bank) if args.bank else None
    write_scores(_score(cfg, series, model, bank), _require(args.output, "--output"))


def cmd_evaluate(cfg: RunConfig, args) -> None:
    table = read_scores(_require(args.input, "--input"))
    truth_path = _require(args.truth, "--truth")
    outbreaks_path = args.outbreaks or str(truth_path).replace(".truth.csv", ".outbreaks.csv")
    truth, _ = read_truth(truth_path, outbreaks_path)
    if table.dates[0] != truth.start or len(table.dates) != len(truth):
        raise RangeMismatch(f"scores cover {table.dates[0]}+{len(table.dates)}d, "
                            f"truth covers {truth.start}+{len(truth)}d")
    grid = cfg.threshold_grid or _default_grid(table.a)
    _evaluate_to(table.a, truth, grid, cfg.buffer, Path(_require(args.output, "--output")), table.method)


def cmd_demo(cfg: RunConfig, args) -> None:
    out = Path(args.output or "demo_output")
    out.mkdir(parents=True, exist_ok=True)
    sim = cfg.simulate
    central = _central(cfg)

    train = training_scenario(cfg.family, cfg.seed, central=central.theta, jitter=sim.jitter, spec=cfg.design)
    write_counts(train.series, out / "train.csv")
    write_truth(train, *sidecar_paths(out / "train.csv"))
    model = fit_baseline(train.series, cfg.design, mask=~train.truth.outbreak_mask(cfg.buffer))
    model.save(out / "baseline.json")
    bank = build_bank(_signatures(train.series, model.lambdas(train.series), train.truth.outbreaks),
                      cfg.family, FitOptions(form=cfg.form))
    bank.save(out / "bank.txt")

    null = simulate(SimConfig(sim.horizon_days, DEFAULT_BETA.copy(), cfg.design, (), cfg.seed + 1))
    test = spaced_outbreak_stream(cfg.seed + 2, central, horizon=sim.horizon_days,
                                  n_outbreaks=sim.n_outbreaks, jitter=sim.jitter)
    write_counts(null.series, out / "null.csv")
    write_counts(test.series, out / "test.csv")
    write_truth(test, *sidecar_paths(out / "test.csv"))

    methods = [cfg.method] + [m for m in ("mlrss", "ewma") if m != cfg.method]
    summary = {"preset": cfg.preset, "seed": cfg.seed, "family": cfg.family.value,
               "bank_size": len(bank), "bank_failed_fits": bank.n_failed, "methods": {}}
    for method in methods:
        mcfg = replace(cfg, method=method)
        null_scores = _score(mcfg, null.series, model, bank)
        test_scores = _score(mcfg, test.series, model, bank)
        write_scores(test_scores, out / f"scores_{method}.csv")
        threshold = threshold_for_rate(null_scores.a, 1.0)
        grid = cfg.threshold_grid or _default_grid(null_scores.a)
        _evaluate_to(test_scores.a, test.truth, grid, cfg.buffer, out / f"report_{method}.json", method,
                     {"calibrated_threshold": threshold})
        rep = evaluate(test_scores.a, test.truth, threshold, buffer=cfg.buffer)
        summary["methods"][method] = rep.summary()
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit-baseline": cmd_fit_baseline,
    "fit-profiles": cmd_fit_profiles,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "demo": cmd_demo,
}


def _require(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--preset", choices=["ED", "OTC", "TH", "custom"])
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--threshold-grid", help="'a,b,c' or 'lo:hi:n'")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mlrss", description="Mixture likelihood ratio scan statistic")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit-baseline", parents=[common], help="fit the Poisson baseline") \
        .add_argument("--outbreaks", help="outbreak table; those days are left out of the fit")
    p = sub.add_parser("fit-profiles", parents=[common], help="fit the outbreak profile bank")
    p.add_argument("--baseline")
    p.add_argument("--outbreaks")
    p = sub.add_parser("simulate", parents=[common], help="simulate a labelled count series")
    p.add_argument("--scenario", choices=["test", "training", "null"], default="test")
    p = sub.add_parser("detect", parents=[common], help="score a count series")
    p.add_argument("--baseline")
    p.add_argument("--bank")
    p = sub.add_parser("evaluate", parents=[common], help="alarm metrics and AMOC curve")
    p.add_argument("--truth")
    p.add_argument("--outbreaks")
    sub.add_parser("demo", parents=[common], help="simulate, fit, detect and evaluate end to end")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, preset=args.preset, threshold_grid=_parse_grid(args.threshold_grid))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if not args.verbose else "default")
            COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"mlrss: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"mlrss: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"mlrss: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"mlrss: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point.

Subcommands: ``diagrams``, ``evaluate``, ``labels``, ``all``. Configuration
comes from an optional JSON file plus flag overrides. Exit codes: 0 success,
1 hard error, 2 partial failure (some models skipped).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import TopogapError
from .pipeline import PipelineConfig, run_diagrams, run_evaluate, run_label_analysis

log = logging.getLogger("topogap")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topogap",
        description="Predict generalization gaps from persistence summaries "
                    "of activation-correlation graphs.",
    )
    parser.add_argument("command", choices=["diagrams", "evaluate", "labels", "all"])
    parser.add_argument("input_dir", type=Path,
                        help="directory of <stem>.actv + <stem>.meta.json files")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--nodes", type=int, help="node sample size")
    parser.add_argument("--inputs", type=int, help="input subsample size")
    parser.add_argument("--samples", type=int, help="diagram samples per model (k)")
    parser.add_argument("--resamples", type=int, help="bootstrap resample count")
    parser.add_argument("--combos", type=str,
                        help="comma-separated combination ids (1-11)")
    parser.add_argument("--dims", type=str,
                        help="comma-separated dimension modes (H0,H1,H0_and_H1)")
    parser.add_argument("--metric", choices=["raw_d", "corrected_d_prime"])
    parser.add_argument("--label", type=int, help="restrict inputs to one label")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def build_config(args) -> PipelineConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    base["input_dir"] = str(args.input_dir)
    base["out_dir"] = str(args.out)
    overrides = {
        "seed": args.seed,
        "n_nodes": args.nodes,
        "n_inputs": args.inputs,
        "n_diagram_samples": args.samples,
        "n_resamples": args.resamples,
        "metric_mode": args.metric,
        "label_restrict": args.label,
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    if args.combos:
        base["combinations"] = [int(c) for c in args.combos.split(",")]
    if args.dims:
        base["dimension_modes"] = args.dims.split(",")
    return PipelineConfig.from_json_dict(base)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = build_config(args)
    except (ValueError, json.JSONDecodeError, OSError) as exc:
        log.error("bad configuration: %s", exc)
        return 1

    partial = False
    try:
        if args.command in ("diagrams", "all"):
            status = run_diagrams(cfg)
            failed = [k for k, v in status.items() if v != "ok"]
            if failed:
                partial = True
                log.warning("diagram stage skipped models: %s", ", ".join(failed))
            if not any(v == "ok" for v in status.values()):
                log.error("no model produced diagrams")
                return 1
        if args.command in ("evaluate", "all"):
            report = run_evaluate(cfg)
            if report["skipped_models"]:
                partial = True
        if args.command == "labels":
            run_label_analysis(cfg)
        if args.command == "all":
            try:
                run_label_analysis(cfg)
            except TopogapError as exc:
                log.info("label analysis skipped: %s", exc)
    except TopogapError as exc:
        log.error("%s", exc)
        return 1
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return 1
    return 2 if partial else 0


if __name__ == "__main__":
    sys.exit(main())

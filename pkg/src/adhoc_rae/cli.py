"""Command line entry point: ``adhoc-rae <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 training error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import yaml

from . import corpus, evaluation, forest, pipeline, rae, synth
from .errors import AdhocError, ConfigError, DataError, ModelLoadError

log = logging.getLogger("adhoc_rae")


def _config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.load_config(args.config, args.set or [])
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    return cfg


def _print_report(report: evaluation.ComparisonReport, fmt: str) -> None:
    sys.stdout.write(report.to_json() if fmt == "json" else report.to_text())


def cmd_synth(args) -> int:
    doc = {}
    if args.spec:
        doc = yaml.safe_load(Path(args.spec).read_text(encoding="utf-8")) or {}
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        doc[key.strip()] = yaml.safe_load(raw)
    if args.seed is not None:
        doc["seed"] = args.seed
    spec = synth.spec_from_dict(doc)
    paths = synth.write_dataset(spec, args.out)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_stage(args) -> int:
    cfg = _config(args)
    with pipeline.output_lock(cfg.out):
        result = pipeline.run_stage(cfg, args.command)
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_predict(args) -> int:
    if args.model is None:
        return cmd_stage(args)
    if args.input is None:
        raise ConfigError("--input is required with --model")
    doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
    fmt = doc.get("format") if isinstance(doc, dict) else None
    out = open(args.output, "w", encoding="utf-8", newline="\n") if args.output else sys.stdout
    try:
        if fmt == forest.FORMAT:
            model = forest.ForestModel.from_dict(doc)
            if model.feature_names is None:
                raise ModelLoadError("forest model stores no feature names; cannot read triplets")
            ids, rows = corpus.read_triplets(args.input, model.feature_names)
            for i, row in zip(ids, rows):
                c, votes = forest.predict_forest(model, row)
                out.write(json.dumps({"id": i, "pred": pipeline.CLASS_NAMES[c], "probs": list(votes)}) + "\n")
        elif fmt == rae.FORMAT:
            model = rae.RaeModel.from_dict(doc)
            stop = corpus.load_stopwords(args.stopwords) if args.rae_stopwords else frozenset()
            for h in corpus.read_headlines(args.input):
                toks = corpus.tokenize(h.title, stop)
                if not toks:
                    log.warning("skipping %s: no tokens", h.id)
                    continue
                c, probs = rae.predict_rae(model, toks)
                out.write(json.dumps({"id": h.id, "pred": pipeline.CLASS_NAMES[c], "probs": probs.tolist()}) + "\n")
        else:
            raise ModelLoadError(f"{args.model}: unknown model format {fmt!r}")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_evaluate(args) -> int:
    if args.predictions is None:
        return cmd_stage(args)
    if args.labels is None:
        raise ConfigError("--labels is required with --predictions")
    m = pipeline.evaluate_predictions(Path(args.predictions), Path(args.labels), skip_unlabeled=True)
    text = json.dumps(m.to_dict(), indent=1, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    if args.baseline is None and args.challenger is None:
        cfg = _config(args)
        with pipeline.output_lock(cfg.out):
            report = pipeline.run_stage(cfg, "compare")
    else:
        if args.baseline is None or args.challenger is None:
            raise ConfigError("--baseline and --challenger go together")
        try:
            base = evaluation.MetricsReport.from_dict(json.loads(Path(args.baseline).read_text()))
            chal = evaluation.MetricsReport.from_dict(json.loads(Path(args.challenger).read_text()))
        except (OSError, KeyError, ValueError) as exc:
            raise DataError(f"cannot read metrics: {exc}") from exc
        report = evaluation.comparison_report(base, chal)
    _print_report(report, args.format)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    report = pipeline.run_pipeline(cfg)
    _print_report(report, args.format)
    return 0


def cmd_show_config(args) -> int:
    cfg = _config(args)
    yaml.safe_dump(json.loads(json.dumps(asdict(cfg))), sys.stdout, sort_keys=False)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adhoc-rae", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("-c", "--config", help="YAML/JSON pipeline config")
        sp.add_argument("-o", "--output-dir", help=f"output directory (env {pipeline.OUTPUT_ENV} also works)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry, e.g. rae.dim=20")
        return sp

    sp = sub.add_parser("synth", help="write a planted-signal synthetic dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--spec", help="YAML file with SyntheticSpec fields")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE")
    sp.set_defaults(func=cmd_synth)

    for name, text in (
        ("preprocess", "tokenize headlines"),
        ("label", "abnormal returns, penny filter and direction labels"),
        ("split", "chronological train/test split"),
        ("train-rf", "fit the tf-idf random forest"),
        ("train-rae", "fit the recursive autoencoder"),
    ):
        with_config(sub.add_parser(name, help=text)).set_defaults(func=cmd_stage)

    sp = with_config(sub.add_parser("predict", help="predict the test split, or any input with --model"))
    sp.add_argument("--model", help="forest.json or rae.json")
    sp.add_argument("--input", help="triplet CSV (forest) or headlines JSONL (RAE)")
    sp.add_argument("--output")
    sp.add_argument("--stopwords")
    sp.add_argument("--rae-stopwords", action="store_true", help="remove stopwords before the RAE")
    sp.set_defaults(func=cmd_predict)

    sp = with_config(sub.add_parser("evaluate", help="confusion-matrix metrics"))
    sp.add_argument("--predictions")
    sp.add_argument("--labels")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_evaluate)

    sp = with_config(sub.add_parser("compare", help="baseline vs. challenger table"))
    sp.add_argument("--baseline")
    sp.add_argument("--challenger")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_compare)

    sp = with_config(sub.add_parser("run", help="full pipeline"))
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_run)

    with_config(sub.add_parser("show-config", help="print the resolved config")).set_defaults(func=cmd_show_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except AdhocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

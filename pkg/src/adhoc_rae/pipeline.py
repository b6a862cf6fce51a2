"""End-to-end experiment: ingest, tokenize, label, split, train both
classifiers, evaluate them on the same test ids and write the comparison.

Every stage reads its inputs from and writes its outputs to one output
directory, so stages can also be run one at a time from the CLI.
"""

from __future__ import annotations

import contextlib
import copy
import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import corpus, eventstudy, evaluation, forest, rae
from .errors import AdhocError, ConfigError, DataError

log = logging.getLogger(__name__)

CLASS_NAMES = ("up", "down")
CLASS_INDEX = {name: i for i, name in enumerate(CLASS_NAMES)}
OUTPUT_ENV = "ADHOC_RAE_OUTPUT_DIR"

TOKENS = "tokens.jsonl"
LABELS = "labels.jsonl"
LABEL_STATS = "label_stats.json"
SPLIT = "split.json"
FOREST_MODEL = "forest.json"
RAE_MODEL = "rae.json"
RAE_LOSS = "rae_loss.csv"
DTM_TRAIN = "dtm_train.csv"
DTM_TEST = "dtm_test.csv"
PRED_FOREST = "predictions_forest.jsonl"
PRED_RAE = "predictions_rae.jsonl"
METRICS_FOREST = "metrics_forest.json"
METRICS_RAE = "metrics_rae.json"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
MANIFEST = "manifest.json"
RESOLVED_CONFIG = "config.json"


@dataclass
class PipelineConfig:
    headlines: str = "headlines.jsonl"
    prices: str = "prices.csv"
    market: str = "market.csv"
    output_dir: str = "out"
    min_df: int = 3
    stopwords: str | None = None
    rae_stopwords: bool = False
    window: int = 60
    tau: float = 0.01
    penny_floor: float = 5.0
    ar_mode: str = eventstudy.MARKET_MODEL
    train_fraction: float = 0.8
    seed: int = 0
    forest: forest.ForestConfig = field(default_factory=forest.ForestConfig)
    rae: rae.RaeConfig = field(default_factory=rae.RaeConfig)

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.ar_mode not in (eventstudy.MARKET_MODEL, eventstudy.MARKET_ADJUSTED):
            raise ConfigError(f"unknown ar_mode {self.ar_mode!r}")
        if self.tau < 0 or self.window < 2 or self.min_df < 1:
            raise ConfigError("need tau >= 0, window >= 2 and min_df >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """Hash of everything that influences results (not the output dir)."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


def config_from_dict(doc: dict | None, base_dir: str | Path | None = None) -> PipelineConfig:
    """Build a config; ``seed`` feeds the forest and RAE seeds unless their
    own sections set one. Relative input paths resolve against ``base_dir``."""
    doc = copy.deepcopy(doc or {})
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    seed = int(doc.get("seed", 0))
    fdoc = dict(doc.pop("forest", None) or {})
    rdoc = dict(doc.pop("rae", None) or {})
    fdoc.setdefault("seed", seed)
    rdoc.setdefault("seed", seed)
    try:
        fcfg = forest.ForestConfig(**fdoc)
        rcfg = rae.RaeConfig(**rdoc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model config: {exc}") from exc
    if base_dir is not None:
        for key in ("headlines", "prices", "market", "stopwords"):
            if doc.get(key) and not Path(doc[key]).is_absolute():
                doc[key] = str(Path(base_dir) / doc[key])
    try:
        cfg = PipelineConfig(forest=fcfg, rae=rcfg, **doc)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    env_out = os.environ.get(OUTPUT_ENV)
    if env_out:
        cfg.output_dir = env_out
    return cfg


def load_config(path: str | Path | None, overrides: list[str] = ()) -> PipelineConfig:
    """Read a YAML (or JSON) config and apply ``key.sub=value`` overrides."""
    doc: dict[str, Any] = {}
    base = None
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        base = Path(path).parent
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        node = doc
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = yaml.safe_load(raw)
    return config_from_dict(doc, base)


class PipelineError(AdhocError):
    def __init__(self, stage: str, cause: Exception, counts: dict):
        self.stage, self.cause, self.counts = stage, cause, dict(counts)
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"stage {stage!r} failed: {cause} (counts so far: {self.counts})")


@contextlib.contextmanager
def output_lock(out_dir: Path):
    """Refuse a second concurrent run on the same output directory."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        pid = lock.read_text().strip()
        if pid.isdigit() and not _alive(int(pid)):
            lock.unlink()
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        else:
            raise ConfigError(f"output directory {out_dir} is locked by process {pid or '?'}") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock.unlink()


def _alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _read_jsonl(path: Path) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except FileNotFoundError as exc:
        raise DataError(f"missing intermediate file {path}; run the earlier stage first") from exc


# -- stages ----------------------------------------------------------------------


def stage_preprocess(cfg: PipelineConfig) -> dict:
    """Tokenize every headline twice: stopword-filtered for the forest and,
    unless ``rae_stopwords`` is set, unfiltered for the RAE."""
    headlines = corpus.read_headlines(cfg.headlines)
    stop = corpus.load_stopwords(cfg.stopwords)
    rae_stop = stop if cfg.rae_stopwords else frozenset()
    n_empty = 0
    with open(cfg.out / TOKENS, "w", encoding="utf-8", newline="\n") as fh:
        for h in headlines:
            toks = corpus.tokenize(h.title, stop)
            if not toks:
                n_empty += 1
                continue
            rec = {"id": h.id, "tokens": toks, "rae_tokens": corpus.tokenize(h.title, rae_stop)}
            fh.write(json.dumps(rec) + "\n")
    if n_empty:
        log.info("excluded %d headlines that are empty after preprocessing", n_empty)
    return {"headlines": len(headlines), "empty_after_preprocessing": n_empty}


def stage_label(cfg: PipelineConfig) -> dict:
    headlines = corpus.read_headlines(cfg.headlines)
    prices = eventstudy.read_prices(cfg.prices)
    market = eventstudy.read_market(cfg.market)
    samples, tally = eventstudy.label_headlines(
        headlines, prices, market, window=cfg.window, tau=cfg.tau, floor=cfg.penny_floor, mode=cfg.ar_mode
    )
    eventstudy.write_labels(samples, cfg.out / LABELS)
    dist = {k: sum(s.direction == k for s in samples) for k in (eventstudy.UP, eventstudy.DOWN, eventstudy.STEADY)}
    stats = {"labeled": len(samples), "excluded": dict(sorted(tally.items())), "directions": dist}
    _write_json(cfg.out / LABEL_STATS, stats)
    return {"labeled": len(samples), **{f"excluded_{k}": v for k, v in sorted(tally.items())}}


def stage_split(cfg: PipelineConfig) -> dict:
    """Drop steady samples and headlines with no tokens, then split by time."""
    tokenized = {r["id"] for r in _read_jsonl(cfg.out / TOKENS)}
    labels = eventstudy.read_labels(cfg.out / LABELS)
    usable = [s for s in labels if s.direction != eventstudy.STEADY and s.headline_id in tokenized]
    split = eventstudy.chronological_split(usable, cfg.train_fraction)
    eventstudy.write_split(split, cfg.out / SPLIT)
    return {"steady_discarded": sum(s.direction == eventstudy.STEADY for s in labels),
            "train": len(split.train_ids), "test": len(split.test_ids)}


def _training_view(cfg: PipelineConfig):
    tokens = {r["id"]: r for r in _read_jsonl(cfg.out / TOKENS)}
    labels = {s.headline_id: CLASS_INDEX[s.direction] for s in eventstudy.read_labels(cfg.out / LABELS)
              if s.direction != eventstudy.STEADY}
    split = eventstudy.read_split(cfg.out / SPLIT)
    for i in split.train_ids + split.test_ids:
        if i not in tokens or i not in labels:
            raise DataError(f"split id {i!r} has no tokens or no up/down label")
    return tokens, labels, split


def stage_train_forest(cfg: PipelineConfig) -> dict:
    tokens, labels, split = _training_view(cfg)
    train_docs = [tokens[i]["tokens"] for i in split.train_ids]
    vocab = corpus.build_vocabulary(train_docs, cfg.min_df)
    x_train = corpus.tfidf_transform(corpus.count_matrix(train_docs, vocab))
    x_test = corpus.tfidf_transform(corpus.count_matrix([tokens[i]["tokens"] for i in split.test_ids], vocab))
    corpus.write_triplets(x_train, split.train_ids, cfg.out / DTM_TRAIN)
    corpus.write_triplets(x_test, split.test_ids, cfg.out / DTM_TEST)
    model = forest.train_forest(x_train, [labels[i] for i in split.train_ids], cfg.forest, n_classes=len(CLASS_NAMES))
    forest.save_forest(model, cfg.out / FOREST_MODEL)
    train_acc = _accuracy(forest.predict_many(model, x_train), [labels[i] for i in split.train_ids])
    return {"vocabulary": len(vocab), "forest_train_accuracy": train_acc}


def stage_train_rae(cfg: PipelineConfig) -> dict:
    tokens, labels, split = _training_view(cfg)
    docs = [tokens[i]["rae_tokens"] for i in split.train_ids]
    y = [labels[i] for i in split.train_ids]
    model = rae.train_rae(docs, y, cfg.rae)
    rae.save_rae(model, cfg.out / RAE_MODEL)
    rae.write_loss_history(model, cfg.out / RAE_LOSS)
    return {"rae_vocabulary": len(model.embeddings.terms), "rae_final_loss": model.loss_history[-1],
            "rae_train_accuracy": _accuracy(rae.predict_many(model, docs), y)}


def _accuracy(pred, truth) -> float:
    return sum(p == t for p, t in zip(pred, truth)) / len(truth)


def _write_predictions(path: Path, ids, preds, probs, labels) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, p, pr in zip(ids, preds, probs):
            rec = {"id": i, "pred": CLASS_NAMES[p], "probs": [float(x) for x in pr]}
            if i in labels:
                rec["label"] = CLASS_NAMES[labels[i]]
            fh.write(json.dumps(rec) + "\n")


def stage_predict(cfg: PipelineConfig) -> dict:
    tokens, labels, split = _training_view(cfg)
    ids = list(split.test_ids)
    fmodel = forest.load_forest(cfg.out / FOREST_MODEL)
    terms = fmodel.feature_names or ()
    trip_ids, rows = corpus.read_triplets(cfg.out / DTM_TEST, terms)
    by_id = dict(zip(trip_ids, rows))
    f_out = [forest.predict_forest(fmodel, by_id.get(i, {})) for i in ids]
    rmodel = rae.load_rae(cfg.out / RAE_MODEL)
    r_out = [rae.predict_rae(rmodel, tokens[i]["rae_tokens"]) for i in ids]
    _write_predictions(cfg.out / PRED_FOREST, ids, [c for c, _ in f_out], [v for _, v in f_out], labels)
    _write_predictions(cfg.out / PRED_RAE, ids, [c for c, _ in r_out], [v for _, v in r_out], labels)
    return {"predicted": len(ids)}


def read_predictions(path: Path) -> dict[str, dict]:
    return {r["id"]: r for r in _read_jsonl(Path(path))}


def evaluate_predictions(pred_path: Path, labels_path: Path,
                         skip_unlabeled: bool = False) -> evaluation.MetricsReport:
    """Metrics over the predicted ids. Predictions without an up/down label
    are an error unless ``skip_unlabeled``, in which case they are left out."""
    preds = read_predictions(pred_path)
    truth = {s.headline_id: s.direction for s in eventstudy.read_labels(labels_path)}
    ids = sorted(preds)
    missing = [i for i in ids if truth.get(i) not in CLASS_INDEX]
    if missing and not skip_unlabeled:
        raise DataError(f"{len(missing)} predictions have no up/down label, e.g. {missing[0]!r}")
    if missing:
        log.warning("skipping %d predictions without an up/down label", len(missing))
        ids = [i for i in ids if truth.get(i) in CLASS_INDEX]
    return evaluation.evaluate([CLASS_INDEX[truth[i]] for i in ids],
                               [CLASS_INDEX[preds[i]["pred"]] for i in ids], len(CLASS_NAMES))


def stage_evaluate(cfg: PipelineConfig) -> dict:
    f_ids = set(read_predictions(cfg.out / PRED_FOREST))
    r_ids = set(read_predictions(cfg.out / PRED_RAE))
    if f_ids != r_ids:
        raise DataError("forest and RAE were not evaluated on the same test ids")
    out = {}
    for name, pred, target in (("forest", PRED_FOREST, METRICS_FOREST), ("rae", PRED_RAE, METRICS_RAE)):
        m = evaluate_predictions(cfg.out / pred, cfg.out / LABELS)
        _write_json(cfg.out / target, m.to_dict())
        out[f"{name}_test_accuracy"] = m.accuracy
    return out


def stage_compare(cfg: PipelineConfig) -> evaluation.ComparisonReport:
    base = evaluation.MetricsReport.from_dict(json.loads((cfg.out / METRICS_FOREST).read_text()))
    chal = evaluation.MetricsReport.from_dict(json.loads((cfg.out / METRICS_RAE).read_text()))
    report = evaluation.comparison_report(base, chal)
    doc = report.to_dict()
    doc["rae_input"] = "stopwords removed" if cfg.rae_stopwords else "stopwords kept"
    (cfg.out / REPORT_JSON).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    (cfg.out / REPORT_TEXT).write_text(report.to_text(), encoding="utf-8")
    return report


STAGES = {
    "preprocess": stage_preprocess,
    "label": stage_label,
    "split": stage_split,
    "train-rf": stage_train_forest,
    "train-rae": stage_train_rae,
    "predict": stage_predict,
    "evaluate": stage_evaluate,
}


def write_manifest(cfg: PipelineConfig, counts: dict) -> dict:
    h = cfg.config_hash()
    artifacts = {}
    for p in sorted(cfg.out.iterdir()):
        if p.is_file() and p.name not in (MANIFEST, ".lock"):
            artifacts[p.name] = {"sha256": hashlib.sha256(p.read_bytes()).hexdigest(), "config_hash": h}
    doc = {"config_hash": h, "seed": cfg.seed, "counts": counts, "artifacts": artifacts}
    _write_json(cfg.out / MANIFEST, doc)
    return doc


def run_stage(cfg: PipelineConfig, name: str, counts: dict | None = None):
    counts = {} if counts is None else counts
    cfg.out.mkdir(parents=True, exist_ok=True)
    try:
        result = STAGES[name](cfg) if name != "compare" else stage_compare(cfg)
    except AdhocError as exc:
        raise PipelineError(name, exc, counts) from exc
    except (OSError, KeyError, ValueError) as exc:
        raise PipelineError(name, DataError(str(exc)), counts) from exc
    if isinstance(result, dict):
        counts.update(result)
    log.info("%s done: %s", name, result if isinstance(result, dict) else "report written")
    return result


def run_pipeline(cfg: PipelineConfig) -> evaluation.ComparisonReport:
    """Run every stage in order and return the comparison report."""
    counts: dict = {}
    with output_lock(cfg.out):
        _write_json(cfg.out / RESOLVED_CONFIG, cfg.to_dict() | {"output_dir": None})
        for name in STAGES:
            run_stage(cfg, name, counts)
        report = run_stage(cfg, "compare", counts)
        write_manifest(cfg, counts)
    return report

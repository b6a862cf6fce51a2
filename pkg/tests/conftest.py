import json
import sys
import time
from pathlib import Path

import pytest

from adhoc_rae import pipeline, synth


def make_dataset(root: Path, **spec_kw) -> dict:
    return synth.write_dataset(synth.SyntheticSpec(**spec_kw), root)


def pipeline_config(data: dict, out: Path, **overrides) -> pipeline.PipelineConfig:
    doc = {
        "headlines": str(data["headlines"]),
        "prices": str(data["prices"]),
        "market": str(data["market"]),
        "output_dir": str(out),
        "tau": 0.01,
        "seed": 11,
    }
    doc.update(overrides)
    return pipeline.config_from_dict(doc)


planted_run_seconds = []


@pytest.fixture(scope="session")
def planted_data(tmp_path_factory):
    """2000 headlines, signal strength 0.9, 5 % jumps."""
    root = tmp_path_factory.mktemp("planted")
    return make_dataset(root, n_headlines=2000, signal_strength=0.9, jump=0.05, tau=0.01, seed=2024)


@pytest.fixture(scope="session")
def planted_run(planted_data, tmp_path_factory):
    out = tmp_path_factory.mktemp("planted_run")
    cfg = pipeline_config(planted_data, out)
    start = time.perf_counter()
    report = pipeline.run_pipeline(cfg)
    planted_run_seconds.append(time.perf_counter() - start)
    return cfg, report


@pytest.fixture(scope="session")
def small_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    return make_dataset(root, n_headlines=300, n_securities=20, signal_strength=0.95, seed=5)


@pytest.fixture(scope="session")
def small_run(small_data, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_run")
    cfg = pipeline_config(small_data, out, forest={"n_trees": 15}, rae={"iterations": 15, "dim": 10})
    report = pipeline.run_pipeline(cfg)
    return cfg, report


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)

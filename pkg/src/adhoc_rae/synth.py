"""Synthetic stand-in for the announcement corpus and price database.

Headlines are templated from a company name plus a short event phrase mixing
neutral words with class-correlated signal words. Every security follows a
seeded random walk tied to a common market index, and the announcement day
adds a jump whose sign matches the planted label.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

UP_WORDS = (
    "profit increase growth record dividend acquisition upgrade exceeds raises strong "
    "orders contract expansion approval breakthrough surplus outperforms boost"
).split()
DOWN_WORDS = (
    "loss warning decline insolvency impairment lowers writedown restructuring downgrade "
    "delay shortfall weak litigation recall deficit suspension layoffs withdrawal"
).split()
NEUTRAL_WORDS = (
    "annual general meeting board shares capital report quarter results forecast company "
    "announces management change supervisory fiscal year statement publication update "
    "executive chairman group subsidiary market business segment financial information "
    "notification guidance preliminary figures interim outlook strategy agreement "
    "offering bond issue listing transaction members"
).split()
FILLERS = ("of", "for", "the", "in", "and", "to", "on")
SUFFIXES = ("ag", "se", "kgaa", "gmbh", "ltd", "nv")
_SYLLABLES = (
    "ka ro ten vi mar lu sen tor bel da fin gro hel ix no pra qu ser tal ur ven wel zor "
    "al bri cor dex el fa gen hy in jo kel lan mo nor pix ra sol tri ul vor"
).split()

LABEL_UP, LABEL_DOWN, LABEL_STEADY = "up", "down", "steady"


@dataclass(frozen=True)
class SyntheticSpec:
    n_headlines: int = 2000
    n_securities: int = 100
    signal_terms_per_class: int = 12
    neutral_terms: int = 40
    signal_terms_per_headline: int = 2
    neutral_terms_per_headline: tuple[int, int] = (1, 3)
    signal_strength: float = 0.9
    steady_fraction: float = 0.1
    penny_fraction: float = 0.05
    start_date: str = "2004-01-01"
    end_date: str = "2011-06-30"
    market_volatility: float = 0.01
    price_volatility: float = 0.003
    jump: float = 0.05
    tau: float = 0.01
    estimation_window: int = 60
    seed: int = 0

    def __post_init__(self):
        if not 0.5 < self.signal_strength <= 1.0:
            raise ConfigError(f"signal_strength must lie in (0.5, 1], got {self.signal_strength}")
        if not self.jump > self.tau:
            raise ConfigError(
                f"jump {self.jump} must exceed the labeling threshold tau {self.tau}, "
                "otherwise planted labels would not survive labeling"
            )
        if self.n_headlines < 2 or self.n_securities < 1:
            raise ConfigError("need >= 2 headlines and >= 1 security")
        if not 0.0 <= self.steady_fraction < 1.0 or not 0.0 <= self.penny_fraction < 1.0:
            raise ConfigError("steady_fraction and penny_fraction must lie in [0, 1)")
        if self.signal_terms_per_headline < 1:
            raise ConfigError("signal_terms_per_headline must be >= 1")


def _pseudo_words(rng: np.random.Generator, n: int, taken: set[str], syllables=(2, 3)) -> list[str]:
    out = []
    while len(out) < n:
        k = int(rng.integers(syllables[0], syllables[1] + 1))
        w = "".join(rng.choice(_SYLLABLES, size=k))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def _word_lists(spec: SyntheticSpec, rng: np.random.Generator):
    taken = set(UP_WORDS) | set(DOWN_WORDS) | set(NEUTRAL_WORDS) | set(FILLERS) | set(SUFFIXES)

    def take(base, n):
        words = list(base[:n])
        return words + _pseudo_words(rng, n - len(words), taken)

    return (
        take(UP_WORDS, spec.signal_terms_per_class),
        take(DOWN_WORDS, spec.signal_terms_per_class),
        take(NEUTRAL_WORDS, spec.neutral_terms),
    )


def _business_days(start: str, end: str) -> np.ndarray:
    days = np.arange(np.datetime64(start, "D"), np.datetime64(end, "D") + 1)
    return days[np.is_busday(days)]


def generate(spec: SyntheticSpec):
    """Build the synthetic dataset in memory.

    Returns ``(headlines, prices, market, truth)``: headline dicts in corpus
    format, ``{isin: [(date, close), ...]}``, ``[(date, close), ...]`` and
    ``{headline id: planted label}``.
    """
    rng = np.random.default_rng(spec.seed)
    up_words, down_words, neutral = _word_lists(spec, rng)
    days = _business_days(spec.start_date, spec.end_date)
    n_days = len(days)
    guard = spec.estimation_window + 2
    if n_days <= guard + 1:
        raise ConfigError("date range too short for the estimation window")

    # market index
    r_mkt = rng.normal(0.0003, spec.market_volatility, size=n_days)
    r_mkt[0] = 0.0
    market = 1000.0 * np.cumprod(1.0 + r_mkt)

    # events per security, spread over blocks so estimation windows stay clean
    n_sec = spec.n_securities
    per_sec = np.full(n_sec, spec.n_headlines // n_sec)
    per_sec[: spec.n_headlines % n_sec] += 1
    names = _pseudo_words(rng, n_sec, set(UP_WORDS) | set(DOWN_WORDS) | set(NEUTRAL_WORDS))
    n_penny = int(round(spec.penny_fraction * n_sec))
    penny = np.zeros(n_sec, dtype=bool)
    penny[rng.choice(n_sec, size=n_penny, replace=False)] = True

    events = []  # (day index, security, label)
    prices = {}
    for k in range(n_sec):
        isin = f"DE{k:09d}{k % 10}"
        beta = rng.uniform(0.5, 1.5)
        r = beta * r_mkt + rng.normal(0.0, spec.price_volatility, size=n_days)
        n_ev = int(per_sec[k])
        block = (n_days - guard) / max(n_ev, 1)
        # keep each event out of the previous one's estimation window when room allows
        gap = guard if block > guard + 10 else 0
        for e in range(n_ev):
            lo = guard + int(e * block)
            hi = min(guard + int((e + 1) * block), n_days)
            day = int(rng.integers(min(lo + gap, hi - 1), hi))
            u = rng.random()
            if u < spec.steady_fraction:
                label = LABEL_STEADY
            else:
                label = LABEL_UP if rng.random() < 0.5 else LABEL_DOWN
            if label == LABEL_UP:
                r[day] += spec.jump
            elif label == LABEL_DOWN:
                r[day] -= spec.jump
            events.append((day, k, label))
        r[0] = 0.0
        start = rng.uniform(1.0, 2.5) if penny[k] else rng.uniform(20.0, 100.0)
        prices[isin] = start * np.cumprod(1.0 + r)

    events.sort(key=lambda e: (e[0], e[1]))
    headlines, truth = [], {}
    lo_n, hi_n = spec.neutral_terms_per_headline
    for n, (day, k, label) in enumerate(events):
        hid = f"h{n:06d}"
        words = []
        for _ in range(spec.signal_terms_per_headline):
            if label == LABEL_STEADY:
                pool = up_words if rng.random() < 0.5 else down_words
            else:
                match = rng.random() < spec.signal_strength
                pool = up_words if (label == LABEL_UP) == match else down_words
            words.append(str(rng.choice(pool)))
        for _ in range(int(rng.integers(lo_n, hi_n + 1))):
            words.append(str(rng.choice(neutral)))
        words = [words[i] for i in rng.permutation(len(words))]
        if rng.random() < 0.5:
            words.insert(int(rng.integers(0, len(words) + 1)), str(rng.choice(FILLERS)))
        if rng.random() < 0.3:
            words.append(str(int(days[day].astype(object).year)))
        suffix = SUFFIXES[k % len(SUFFIXES)]
        title = f"{names[k].capitalize()} {suffix.upper()}: " + " ".join(words).capitalize()
        isin = f"DE{k:09d}{k % 10}"
        headlines.append({"id": hid, "date": str(days[day]), "isin": isin, "title": title})
        truth[hid] = label

    day_strs = [str(d) for d in days]
    price_rows = {isin: list(zip(day_strs, p.tolist())) for isin, p in prices.items()}
    market_rows = list(zip(day_strs, market.tolist()))
    return headlines, price_rows, market_rows, truth


def write_dataset(spec: SyntheticSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write ``headlines.jsonl``, ``prices.csv``, ``market.csv`` and
    ``truth.jsonl`` under ``out_dir``; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    headlines, prices, market, truth = generate(spec)
    paths = {
        "headlines": out / "headlines.jsonl",
        "prices": out / "prices.csv",
        "market": out / "market.csv",
        "truth": out / "truth.jsonl",
        "spec": out / "synth_spec.json",
    }
    with open(paths["headlines"], "w", encoding="utf-8", newline="\n") as fh:
        for h in headlines:
            fh.write(json.dumps(h) + "\n")
    with open(paths["prices"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,isin,close\n")
        for isin in sorted(prices):
            for d, p in prices[isin]:
                fh.write(f"{d},{isin},{p!r}\n")
    with open(paths["market"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,close\n")
        for d, p in market:
            fh.write(f"{d},{p!r}\n")
    with open(paths["truth"], "w", encoding="utf-8", newline="\n") as fh:
        for hid, label in truth.items():
            fh.write(json.dumps({"id": hid, "label": label}) + "\n")
    paths["spec"].write_text(json.dumps(asdict(spec), indent=1) + "\n", encoding="utf-8")
    return paths


def read_truth(path: str | Path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                r = json.loads(line)
                out[r["id"]] = r["label"]
    return out


def spec_from_dict(doc: dict) -> SyntheticSpec:
    doc = dict(doc)
    if "neutral_terms_per_headline" in doc:
        doc["neutral_terms_per_headline"] = tuple(doc["neutral_terms_per_headline"])
    try:
        return SyntheticSpec(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad synthetic spec: {exc}") from exc


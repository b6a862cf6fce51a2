"""Event-study labeling: abnormal returns on announcement days, the penny
stock filter, up/down/steady labels and the chronological split."""

from __future__ import annotations

import bisect
import csv
import datetime as dt
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateRegressorError,
    InsufficientDataError,
    MissingDateError,
)

log = logging.getLogger(__name__)

UP, DOWN, STEADY = "up", "down", "steady"
MARKET_MODEL = "market_model"
MARKET_ADJUSTED = "market_adjusted"


@dataclass(frozen=True)
class PriceSeries:
    isin: str
    dates: tuple[dt.date, ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.prices):
            raise DataError(f"{self.isin}: dates and prices differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise DataError(f"{self.isin}: dates not strictly increasing at {b}")
        for d, p in zip(self.dates, self.prices):
            if not (p > 0 and math.isfinite(p)):
                raise DataError(f"{self.isin}: non-positive price {p} on {d}")

    @classmethod
    def from_pairs(cls, isin: str, pairs: Iterable[tuple[dt.date, float]]) -> "PriceSeries":
        pairs = sorted(pairs)
        return cls(isin, tuple(d for d, _ in pairs), tuple(float(p) for _, p in pairs))

    def __len__(self):
        return len(self.dates)

    def close_before(self, day: dt.date) -> float | None:
        """Close on the last trading day strictly before ``day``."""
        i = bisect.bisect_left(self.dates, day)
        return self.prices[i - 1] if i > 0 else None


@dataclass(frozen=True)
class MarketModel:
    alpha: float
    beta: float
    window_len: int

    def expected(self, market_return: float) -> float:
        return self.alpha + self.beta * market_return


@dataclass(frozen=True)
class LabeledSample:
    headline_id: str
    isin: str
    event_date: dt.date
    abnormal_return: float
    direction: str


@dataclass(frozen=True)
class SplitIndex:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    boundary_date: dt.date


def simple_returns(series: PriceSeries) -> list[tuple[dt.date, float]]:
    if len(series) < 2:
        raise InsufficientDataError(f"{series.isin}: need >= 2 prices for a return, got {len(series)}")
    p = series.prices
    return [(series.dates[i], p[i] / p[i - 1] - 1.0) for i in range(1, len(p))]


def fit_market_model(stock_returns: Sequence[float], market_returns: Sequence[float]) -> MarketModel:
    """OLS of stock on market returns."""
    y = np.asarray(stock_returns, dtype=float)
    x = np.asarray(market_returns, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise ValueError("stock and market returns must be equal-length 1-d sequences")
    if len(x) < 2:
        raise InsufficientDataError(f"market model needs >= 2 paired returns, got {len(x)}")
    if np.all(x == x[0]):
        raise DegenerateRegressorError("market returns have zero variance over the estimation window")
    design = np.column_stack([np.ones_like(x), x])
    (alpha, beta), *_ = np.linalg.lstsq(design, y, rcond=None)
    return MarketModel(float(alpha), float(beta), len(x))


def _aligned(stock: PriceSeries, market: PriceSeries):
    mkt = dict(zip(market.dates, market.prices))
    days, sp, mp = [], [], []
    for d, p in zip(stock.dates, stock.prices):
        if d in mkt:
            days.append(d)
            sp.append(p)
            mp.append(mkt[d])
    return days, np.asarray(sp), np.asarray(mp)


def abnormal_return(
    stock: PriceSeries,
    market: PriceSeries,
    event_date: dt.date,
    window: int = 60,
    mode: str = MARKET_MODEL,
) -> float:
    """Event-day abnormal return.

    Returns are taken over consecutive trading days shared by both series.
    In market-model mode alpha and beta are estimated on the ``window``
    returns ending the day before the event; a flat market over that window
    falls back to the market-adjusted return.
    """
    if mode not in (MARKET_MODEL, MARKET_ADJUSTED):
        raise ValueError(f"unknown abnormal-return mode {mode!r}")
    days, sp, mp = _aligned(stock, market)
    if not days or event_date < days[0]:
        raise InsufficientDataError(f"{stock.isin}: no price history before {event_date}")
    k = bisect.bisect_left(days, event_date)
    if k == len(days) or days[k] != event_date:
        raise MissingDateError(f"{stock.isin}: event date {event_date} missing from stock or market series")
    need = window + 1 if mode == MARKET_MODEL else 1
    if k < need:
        raise InsufficientDataError(
            f"{stock.isin}: {k} prior trading days before {event_date}, window requires {need}"
        )
    r_stock = sp[1 : k + 1] / sp[:k] - 1.0
    r_mkt = mp[1 : k + 1] / mp[:k] - 1.0
    if mode == MARKET_ADJUSTED:
        return float(r_stock[-1] - r_mkt[-1])
    try:
        model = fit_market_model(r_stock[-window - 1 : -1], r_mkt[-window - 1 : -1])
    except DegenerateRegressorError:
        log.debug("%s %s: flat market window, using market-adjusted return", stock.isin, event_date)
        return float(r_stock[-1] - r_mkt[-1])
    return float(r_stock[-1] - model.expected(r_mkt[-1]))


def _event_day(item) -> dt.date:
    for attr in ("event_date", "timestamp", "date"):
        if hasattr(item, attr):
            return getattr(item, attr)
    raise TypeError(f"{type(item).__name__} carries no event date")


def filter_penny_stocks(samples: Sequence, prices: dict[str, PriceSeries], floor: float = 5.0):
    """Drop items whose close on the last trading day before the event is below
    ``floor``. Items without such a close are dropped too.

    Returns ``(kept, tally)`` where ``tally`` counts exclusions by reason.
    """
    kept = []
    tally = Counter()
    for s in samples:
        series = prices.get(s.isin)
        close = series.close_before(_event_day(s)) if series is not None else None
        if close is None:
            tally["missing_prior_price"] += 1
        elif close < floor:
            tally["penny_stock"] += 1
        else:
            kept.append(s)
    return kept, tally


def label_direction(ar: float, tau: float = 0.01) -> str:
    if not math.isfinite(ar):
        raise DataError(f"abnormal return must be finite, got {ar}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if ar > tau:
        return UP
    if ar < -tau:
        return DOWN
    return STEADY


def label_headlines(
    headlines: Sequence,
    prices: dict[str, PriceSeries],
    market: PriceSeries,
    *,
    window: int = 60,
    tau: float = 0.01,
    floor: float = 5.0,
    mode: str = MARKET_MODEL,
) -> tuple[list[LabeledSample], Counter]:
    """Penny filter, abnormal return and direction label for every headline.

    Headlines whose abnormal return cannot be computed are excluded and
    counted in the returned tally rather than raised.
    """
    kept, tally = filter_penny_stocks(headlines, prices, floor)
    out = []
    for h in kept:
        try:
            ar = abnormal_return(prices[h.isin], market, h.timestamp, window, mode)
        except MissingDateError:
            tally["missing_event_price"] += 1
            continue
        except InsufficientDataError:
            tally["insufficient_history"] += 1
            continue
        out.append(LabeledSample(h.id, h.isin, h.timestamp, ar, label_direction(ar, tau)))
    return out, tally


def chronological_split(samples: Sequence, train_fraction: float = 0.8) -> SplitIndex:
    """Sort by (event date, id) and cut after round-half-up(n * fraction)."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(samples)
    if n < 2:
        raise InsufficientDataError(f"need >= 2 samples to split, got {n}")
    keyed = sorted((_event_day(s), _sample_id(s)) for s in samples)
    n_train = min(max(math.floor(n * train_fraction + 0.5), 1), n - 1)
    train, test = keyed[:n_train], keyed[n_train:]
    return SplitIndex(tuple(i for _, i in train), tuple(i for _, i in test), train[-1][0])


def _sample_id(s) -> str:
    return s.headline_id if hasattr(s, "headline_id") else s.id


# -- file formats -----------------------------------------------------------


def read_prices(path: str | Path) -> dict[str, PriceSeries]:
    """Read ``date,isin,close`` rows into one series per ISIN."""
    by_isin: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"date", "isin", "close"}:
            raise DataError(f"{path}: expected header date,isin,close")
        for lineno, row in enumerate(reader, 2):
            try:
                by_isin.setdefault(row["isin"], []).append(
                    (dt.date.fromisoformat(row["date"]), float(row["close"]))
                )
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return {isin: PriceSeries.from_pairs(isin, pairs) for isin, pairs in by_isin.items()}


def read_market(path: str | Path) -> PriceSeries:
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"date", "close"}:
            raise DataError(f"{path}: expected header date,close")
        for lineno, row in enumerate(reader, 2):
            try:
                pairs.append((dt.date.fromisoformat(row["date"]), float(row["close"])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return PriceSeries.from_pairs("MARKET", pairs)


def write_labels(samples: Iterable[LabeledSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            rec = {
                "id": s.headline_id,
                "date": s.event_date.isoformat(),
                "isin": s.isin,
                "abnormal_return": s.abnormal_return,
                "label": s.direction,
            }
            fh.write(json.dumps(rec) + "\n")


def read_labels(path: str | Path) -> list[LabeledSample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                r = json.loads(line)
                out.append(
                    LabeledSample(
                        str(r["id"]), r["isin"], dt.date.fromisoformat(r["date"]),
                        float(r["abnormal_return"]), r["label"],
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad label record ({exc})") from exc
    return out


def write_split(split: SplitIndex, path: str | Path) -> None:
    doc = {
        "boundary_date": split.boundary_date.isoformat(),
        "train_ids": list(split.train_ids),
        "test_ids": list(split.test_ids),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_split(path: str | Path) -> SplitIndex:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return SplitIndex(
            tuple(doc["train_ids"]), tuple(doc["test_ids"]), dt.date.fromisoformat(doc["boundary_date"])
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad split file ({exc})") from exc

"""Price-history and company-metadata ingestion.

Reads the two raw CSV sources, normalizes ticker symbols, drops rows that
cannot be used and joins everything into a :class:`ChangePanel`: one relative
open-to-close change per (trading day, ticker), ``NaN`` where a ticker did not
trade.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateTicker,
    EmptyInput,
    EmptyIntersection,
    FormatError,
    InputFileNotFound,
    MalformedHeader,
)

logger = logging.getLogger(__name__)

CHANGE_BOUND = 10.0

_ISO_DATE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_SLASH_DATE = re.compile(r"^(\d{4})/(\d{2})/(\d{2})$")

_TICKER_COLUMNS = ("name", "ticker", "symbol")


@dataclass(frozen=True)
class PriceBar:
    ticker: str
    date: date
    open: float
    close: float


@dataclass
class PriceTable:
    """Cleaned price rows, unique per (ticker, date), sorted by (ticker, date)."""

    bars: list[PriceBar]
    dropped: int = 0
    duplicates: int = 0
    drop_reasons: Counter = field(default_factory=Counter)

    def __len__(self):
        return len(self.bars)


@dataclass(frozen=True)
class CompanyRecord:
    ticker: str
    name: str
    sector: str


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass
class CompanyTable:
    records: list[CompanyRecord]
    rejected: list[RowError] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def sector_map(self) -> dict[str, str]:
        return {r.ticker: r.sector for r in self.records}


@dataclass
class ChangePanel:
    """Daily relative change matrix.

    ``change[t, s]`` is ``(close - open) / open`` of ticker ``tickers[s]`` on
    ``dates[t]``, or ``NaN`` when missing.
    """

    tickers: tuple[str, ...]
    dates: tuple[date, ...]
    change: np.ndarray
    sectors: tuple[str, ...]
    out_of_bounds: int = 0

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    def sector_map(self) -> dict[str, str]:
        return dict(zip(self.tickers, self.sectors))


def parse_date(text: str) -> date:
    """Parse ``YYYY-MM-DD`` or ``YYYY/MM/DD``; anything else is rejected."""
    text = text.strip()
    m = _ISO_DATE.match(text) or _SLASH_DATE.match(text)
    if m is None:
        raise ValueError(f"unrecognized date {text!r}")
    return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))


def normalize_ticker(raw: str, aliases: dict[str, str] | None = None) -> str:
    ticker = raw.strip().upper()
    if aliases:
        ticker = aliases.get(ticker, ticker)
    return ticker


def _open_csv(path):
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"file not found: {path}")
    return path.open(newline="", encoding="utf-8-sig")


def _column_index(header: list[str], names, path) -> dict[str, int]:
    lowered = [h.strip().lower() for h in header]
    found = {}
    for key, options in names.items():
        for opt in options:
            if opt in lowered:
                found[key] = lowered.index(opt)
                break
        else:
            raise MalformedHeader(
                f"{path}: required column {key!r} missing from header {header}"
            )
    return found


def load_aliases(path) -> dict[str, str]:
    """Read a two-column ``source_symbol,canonical_symbol`` CSV.

    A header row is optional; it is recognized by the literal column names.
    """
    aliases = {}
    with _open_csv(path) as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            src, dst = row[0].strip().upper(), row[1].strip().upper()
            if lineno == 1 and src == "SOURCE_SYMBOL":
                continue
            aliases[src] = dst
    return aliases


def parse_price_csv(path, aliases: dict[str, str] | None = None) -> PriceTable:
    """Parse a daily OHLCV file with columns date, open, close and a ticker column.

    Rows with unparseable numbers or dates, nonpositive prices or empty fields
    are dropped and counted. When a (ticker, date) pair repeats, the last row
    wins and the duplicate counter is incremented.
    """
    reasons: Counter = Counter()
    latest: dict[tuple[str, date], PriceBar] = {}
    duplicates = 0
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MalformedHeader(f"{path}: empty file, no header row")
        cols = _column_index(
            header,
            {"date": ("date",), "open": ("open",), "close": ("close",), "name": _TICKER_COLUMNS},
            path,
        )
        width = max(cols.values()) + 1
        for row in reader:
            if not row:
                continue
            if len(row) < width or any(not row[i].strip() for i in cols.values()):
                reasons["missing_field"] += 1
                continue
            ticker = normalize_ticker(row[cols["name"]], aliases)
            if not ticker:
                reasons["missing_field"] += 1
                continue
            try:
                day = parse_date(row[cols["date"]])
            except ValueError:
                reasons["bad_date"] += 1
                continue
            try:
                op = float(row[cols["open"]])
                cl = float(row[cols["close"]])
            except ValueError:
                reasons["bad_number"] += 1
                continue
            if not (math.isfinite(op) and math.isfinite(cl)):
                reasons["bad_number"] += 1
                continue
            if op <= 0 or cl <= 0:
                reasons["nonpositive_price"] += 1
                continue
            key = (ticker, day)
            if key in latest:
                duplicates += 1
            latest[key] = PriceBar(ticker, day, op, cl)

    dropped = sum(reasons.values())
    if not latest:
        raise EmptyInput(f"{path}: no valid price rows ({dropped} dropped)")
    bars = [latest[k] for k in sorted(latest)]
    if dropped or duplicates:
        logger.info("%s: dropped %d rows %s, %d duplicates", path, dropped, dict(reasons), duplicates)
    return PriceTable(bars, dropped=dropped, duplicates=duplicates, drop_reasons=reasons)


def parse_company_csv(path, aliases: dict[str, str] | None = None) -> CompanyTable:
    """Parse the company metadata file (symbol, name, sector columns).

    Rows with an empty symbol or sector are rejected and recorded; a symbol
    repeated with the same sector is deduplicated, with a different sector it
    raises :class:`DuplicateTicker`.
    """
    records: dict[str, CompanyRecord] = {}
    rejected = []
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MalformedHeader(f"{path}: empty file, no header row")
        cols = _column_index(
            header, {"symbol": ("symbol", "ticker"), "name": ("name",), "sector": ("sector",)}, path
        )
        width = max(cols.values()) + 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < width:
                rejected.append(RowError(lineno, "missing field"))
                continue
            ticker = normalize_ticker(row[cols["symbol"]], aliases)
            sector = row[cols["sector"]].strip()
            if not ticker:
                rejected.append(RowError(lineno, "empty symbol"))
                continue
            if not sector:
                rejected.append(RowError(lineno, f"empty sector for {ticker}"))
                continue
            rec = CompanyRecord(ticker, row[cols["name"]].strip(), sector)
            prev = records.get(ticker)
            if prev is not None and prev.sector != sector:
                raise DuplicateTicker(
                    f"{path}:{lineno}: {ticker} listed under {prev.sector!r} and {sector!r}"
                )
            if prev is None:
                records[ticker] = rec
    if rejected:
        logger.info("%s: rejected %d company rows", path, len(rejected))
    return CompanyTable([records[t] for t in sorted(records)], rejected)


def build_change_panel(prices: PriceTable, companies: CompanyTable) -> ChangePanel:
    """Join prices with company metadata into a (day x ticker) change matrix."""
    sectors = companies.sector_map()
    tickers = sorted({b.ticker for b in prices.bars} & sectors.keys())
    if not tickers:
        raise EmptyIntersection("no ticker appears in both the price and company tables")
    dates = sorted({b.date for b in prices.bars})
    t_index = {t: i for i, t in enumerate(tickers)}
    d_index = {d: i for i, d in enumerate(dates)}

    change = np.full((len(dates), len(tickers)), np.nan)
    out_of_bounds = 0
    for bar in prices.bars:
        col = t_index.get(bar.ticker)
        if col is None:
            continue
        value = (bar.close - bar.open) / bar.open
        if not abs(value) < CHANGE_BOUND:
            out_of_bounds += 1
            logger.warning("%s %s: change %.4g exceeds sanity bound, treated as missing",
                           bar.ticker, bar.date, value)
            continue
        change[d_index[bar.date], col] = value

    return ChangePanel(
        tickers=tuple(tickers),
        dates=tuple(dates),
        change=change,
        sectors=tuple(sectors[t] for t in tickers),
        out_of_bounds=out_of_bounds,
    )


def save_panel(panel: ChangePanel, path) -> None:
    """Write the panel as a wide CSV: a ticker header, a sector row, one row per day."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.tickers])
        w.writerow(["#sector", *panel.sectors])
        for d, row in zip(panel.dates, panel.change):
            w.writerow([d.isoformat(), *("" if np.isnan(v) else repr(float(v)) for v in row)])


def load_panel(path) -> ChangePanel:
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        sector_row = next(reader, None)
        if not header or header[0] != "date" or not sector_row or sector_row[0] != "#sector":
            raise FormatError(f"{path}: not a panel cache file")
        tickers = tuple(header[1:])
        if len(sector_row) != len(header):
            raise FormatError(f"{path}:2: sector row has {len(sector_row)} fields, expected {len(header)}")
        dates, rows = [], []
        for lineno, row in enumerate(reader, start=3):
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                dates.append(parse_date(row[0]))
                rows.append([float(v) if v else np.nan for v in row[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    change = np.array(rows, dtype=float).reshape(len(dates), len(tickers))
    return ChangePanel(tickers, tuple(dates), change, tuple(sector_row[1:]))

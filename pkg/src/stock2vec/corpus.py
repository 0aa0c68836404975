"""Rank-ordered daily "sentences" of tickers."""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import EmptyPanel, FormatError, InputFileNotFound
from .ingest import ChangePanel, parse_date

logger = logging.getLogger(__name__)

ORDERS = ("descending", "ascending")
_ORDER_ALIASES = {"desc": "descending", "asc": "ascending"}


@dataclass(frozen=True)
class Sentence:
    date: date
    tokens: tuple[str, ...]

    def __len__(self):
        return len(self.tokens)


@dataclass
class SentenceCorpus:
    sentences: list[Sentence]
    order: str = "descending"
    dropped_days: int = 0
    counts: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if not self.counts:
            for s in self.sentences:
                self.counts.update(s.tokens)

    def __len__(self):
        return len(self.sentences)

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.counts)

    def to_text(self) -> str:
        return "".join(f"{s.date.isoformat()}\t{' '.join(s.tokens)}\n" for s in self.sentences)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def normalize_order(order: str) -> str:
    order = _ORDER_ALIASES.get(order, order)
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    return order


def rank_day(tickers, values, order="descending") -> tuple[str, ...]:
    """Order present tickers by value; equal values keep lexicographic order."""
    present = [(v, t) for t, v in zip(tickers, values) if not np.isnan(v)]
    if order == "descending":
        present.sort(key=lambda p: (-p[0], p[1]))
    else:
        present.sort(key=lambda p: (p[0], p[1]))
    return tuple(t for _, t in present)


def build_sentences(panel: ChangePanel, order: str = "descending") -> SentenceCorpus:
    """Turn every trading day of ``panel`` into one sentence.

    Days with fewer than two present tickers produce no training pairs and are
    dropped; the count is kept on the corpus.
    """
    order = normalize_order(order)
    if panel.n_days == 0 or panel.n_tickers == 0:
        raise EmptyPanel("panel has no days or no tickers")
    sentences, dropped = [], 0
    for d, row in zip(panel.dates, panel.change):
        tokens = rank_day(panel.tickers, row, order)
        if len(tokens) < 2:
            dropped += 1
            continue
        sentences.append(Sentence(d, tokens))
    sentences.sort(key=lambda s: s.date)
    if dropped:
        logger.info("dropped %d days with fewer than 2 trading tickers", dropped)
    return SentenceCorpus(sentences, order=order, dropped_days=dropped)


def corpus_stats(corpus: SentenceCorpus) -> dict:
    lengths = [len(s) for s in corpus.sentences]
    if not lengths:
        return {"sentences": 0, "vocabulary": 0, "min_length": 0, "max_length": 0, "mean_length": 0.0}
    return {
        "sentences": len(lengths),
        "vocabulary": len(corpus.counts),
        "min_length": min(lengths),
        "max_length": max(lengths),
        "mean_length": sum(lengths) / len(lengths),
    }


def save_corpus(corpus: SentenceCorpus, path) -> None:
    Path(path).write_text(corpus.to_text(), encoding="utf-8")


def load_corpus(path, order: str = "descending") -> SentenceCorpus:
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"file not found: {path}")
    sentences = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line:
            continue
        day, sep, rest = line.partition("\t")
        if not sep:
            raise FormatError(f"{path}:{lineno}: missing tab after date")
        try:
            d = parse_date(day)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        sentences.append(Sentence(d, tuple(rest.split())))
    return SentenceCorpus(sentences, order=normalize_order(order))

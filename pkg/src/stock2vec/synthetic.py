"""Synthetic market and regression-target fixtures.

The market is a factor model: each ticker's open-to-close move is a market
factor times its beta, plus its sector's factor, plus idiosyncratic noise.
Sector co-movement is therefore the only structure a rank-order embedding can
pick up.

The two target files mimic the employee-count and ESG-rating datasets. Their
targets are built from the embedding that the fixture configuration trains
(same files, same hyperparameters, same seed), so they carry a known planted
embedding signal:

    target = baseline effect + sum_k c_k * standardized(Dim_k) + noise

with alternating signs on the c_k and the variance budget split 2% baseline,
80% embedding and 18% noise.

Run ``python -m stock2vec.synthetic OUT_DIR`` to regenerate the bundled
fixtures.
"""

from __future__ import annotations

import argparse
import csv
import json
import string
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .corpus import build_sentences
from .ingest import build_change_panel, load_aliases, parse_company_csv, parse_price_csv
from .sgns import Embedding, Hyperparams, train

GICS_SECTORS = (
    "Communication Services",
    "Consumer Discretionary",
    "Consumer Staples",
    "Energy",
    "Financials",
    "Health Care",
    "Industrials",
    "Information Technology",
    "Materials",
    "Real Estate",
    "Utilities",
)

FIXTURE_HYPERPARAMS = {"dimension": 4, "window": 5, "negatives": 5, "epochs": 5,
                       "alpha": 0.025, "min_alpha": 0.0001, "noise_exponent": 0.75}
FIXTURE_SEED = 7


def business_days(start: date, n: int) -> list[date]:
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def _symbols(n, rng):
    seen, out = set(), []
    letters = np.array(list(string.ascii_uppercase))
    while len(out) < n:
        sym = "".join(rng.choice(letters, size=int(rng.integers(2, 5))))
        if sym not in seen and sym != "BRK":
            seen.add(sym)
            out.append(sym)
    return out


def generate_market(n_tickers=120, n_sectors=8, n_days=500, seed=0, sector_strength=0.9,
                    start=date(2013, 2, 8)):
    """Return ``(price_rows, company_rows, alias_rows)`` for a synthetic market.

    ``price_rows`` follow the ``date,open,high,low,close,volume,Name`` layout.
    A few rows are deliberately bad (zero open, unparseable close, a repeated
    date) and one ticker is spelled differently in the two files so that the
    alias file is exercised.
    """
    rng = np.random.default_rng(seed)
    sectors = GICS_SECTORS[:n_sectors]
    symbols = _symbols(n_tickers - 1, rng) + ["BRK.B"]
    sector_of = [sectors[i % n_sectors] for i in range(n_tickers)]
    days = business_days(start, n_days)

    market = rng.normal(0, 0.008, n_days)
    sector_moves = rng.normal(0, 0.008 * sector_strength, (n_days, n_sectors))
    beta = rng.uniform(0.6, 1.4, n_tickers)
    idio = rng.normal(0, 0.006, (n_days, n_tickers))
    s_idx = np.array([sectors.index(s) for s in sector_of])
    change = beta * market[:, None] + sector_moves[:, s_idx] + idio
    gaps = rng.normal(0, 0.003, (n_days, n_tickers))

    first_day = np.zeros(n_tickers, dtype=int)
    late = rng.choice(n_tickers - 1, size=max(1, n_tickers // 20), replace=False)
    first_day[late] = rng.integers(n_days // 10, n_days // 3, size=len(late))

    price_rows = []
    for s, sym in enumerate(symbols):
        name = "BRK-B" if sym == "BRK.B" else sym
        close = float(rng.uniform(20, 300))
        for t in range(first_day[s], n_days):
            op = close * (1 + gaps[t, s])
            cl = op * (1 + change[t, s])
            hi, lo = max(op, cl) * 1.004, min(op, cl) * 0.996
            vol = int(rng.integers(100_000, 10_000_000))
            if rng.random() < 0.004:
                close = cl
                continue  # a missing trading day
            price_rows.append([days[t].isoformat(), f"{op:.4f}", f"{hi:.4f}", f"{lo:.4f}",
                               f"{cl:.4f}", str(vol), name])
            close = cl
    price_rows.append([days[3].isoformat(), "0.00", "1.0", "0.5", "0.8", "100", symbols[0]])
    price_rows.append([days[4].isoformat(), "12.5", "13.0", "12.0", "n/a", "100", symbols[1]])
    price_rows.append(list(price_rows[10]))
    price_rows.append([days[5].isoformat(), "10.0", "11.0", "9.0", "10.5", "100", "ZZZZZ"])

    companies = [[sym, f"{sym.title()} Holdings", sec] for sym, sec in zip(symbols, sector_of)]
    companies.append(["QQQQQ", "Unlisted Co", sectors[0]])
    companies.append(["NOSEC", "No Sector Inc", ""])
    aliases = [["BRK-B", "BRK.B"]]
    return price_rows, companies, aliases


def _standardized(X):
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - X.mean(axis=0)) / sd


def generate_targets(e: Embedding, seed=0, baseline_share=0.02, signal_share=0.80):
    """Employee-count and ESG rows with planted embedding signal.

    Returns ``(employee_rows, esg_rows)`` including headers.
    """
    rng = np.random.default_rng(seed)
    n = len(e.vocabulary)
    Z = _standardized(np.array(e.vectors))
    signs = np.resize([1.0, -1.0], e.dimension)
    coef = signs * rng.uniform(0.9, 1.1, e.dimension)
    signal = _standardized((Z @ coef)[:, None])[:, 0]
    noise_share = 1.0 - baseline_share - signal_share

    market_cap = np.exp(rng.normal(3.0, 1.0, n))  # billions
    base = _standardized(np.log(market_cap)[:, None])[:, 0]
    noise = rng.normal(0, 1, n)
    employees = 40_000 + 15_000 * (np.sqrt(baseline_share) * base + np.sqrt(signal_share) * signal
                                   + np.sqrt(noise_share) * noise)
    employees = np.round(np.maximum(employees, 50.0))

    covariates = rng.normal(0, 1, (n, 5))
    base_esg = _standardized((covariates @ rng.uniform(-1, 1, 5))[:, None])[:, 0]
    esg = 25 + 6 * (np.sqrt(baseline_share) * base_esg + np.sqrt(signal_share) * signal
                    + np.sqrt(noise_share) * rng.normal(0, 1, n))

    emp_rows = [["ticker", "NumberOfEmployees", "MarketCap"]]
    esg_rows = [["ticker", "ESGRating", "x1", "x2", "x3", "x4", "x5"]]
    for i, t in enumerate(e.vocabulary):
        emp_rows.append([t, f"{employees[i]:.0f}", f"{market_cap[i]:.4f}"])
        esg_rows.append([t, f"{esg[i]:.4f}", *(f"{v:.4f}" for v in covariates[i])])
    emp_rows.append(["NOTLISTED", "1200", "3.5"])
    esg_rows.append(["NOTLISTED", "20.0", "0", "0", "0", "0", "0"])
    esg_rows.append([e.vocabulary[0], "n/a", "0", "0", "0", "0", "0"])
    return emp_rows, esg_rows


def _write_csv(path, rows, header=None):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)


def fixture_config(out_dir: Path) -> dict:
    return {
        "price_csv": "prices.csv",
        "company_csv": "companies.csv",
        "alias_csv": "aliases.csv",
        "out_dir": "run",
        "order": "descending",
        "seed": FIXTURE_SEED,
        "workers": 1,
        "hyperparams": dict(FIXTURE_HYPERPARAMS),
        "sweep_dims": [1, 2, 3, 4, 5, 6, 7, 8, 16, 32],
        "epsilon": 0.02,
        "high_dim": 32,
        "train_fraction": 0.7,
        "targets": [
            {"name": "employees", "path": "employees.csv", "target_column": "NumberOfEmployees",
             "ticker_column": "ticker", "baseline_columns": ["MarketCap"]},
            {"name": "esg", "path": "esg.csv", "target_column": "ESGRating",
             "ticker_column": "ticker", "baseline_columns": ["x1", "x2", "x3", "x4", "x5"]},
        ],
    }


def write_fixtures(out_dir, seed: int = 0, **market_kwargs) -> dict:
    """Write the market, the embedding-derived targets and a config into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prices, companies, aliases = generate_market(seed=seed, **market_kwargs)
    _write_csv(out / "prices.csv", prices, ["date", "open", "high", "low", "close", "volume", "Name"])
    _write_csv(out / "companies.csv", companies, ["Symbol", "Name", "Sector"])
    _write_csv(out / "aliases.csv", aliases, ["source_symbol", "canonical_symbol"])

    alias_map = load_aliases(out / "aliases.csv")
    panel = build_change_panel(parse_price_csv(out / "prices.csv", alias_map),
                               parse_company_csv(out / "companies.csv", alias_map))
    hp = Hyperparams(seed=FIXTURE_SEED, workers=1, **FIXTURE_HYPERPARAMS)
    e = train(build_sentences(panel, "descending"), hp)
    emp, esg = generate_targets(e, seed=seed + 1)
    _write_csv(out / "employees.csv", emp)
    _write_csv(out / "esg.csv", esg)
    config = fixture_config(out)
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    return config


def main(argv=None):
    parser = argparse.ArgumentParser(description="Write the synthetic fixture set.")
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    write_fixtures(args.out_dir, seed=args.seed)


if __name__ == "__main__":
    main()

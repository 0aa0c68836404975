"""``stock2vec`` command line: config-driven pipeline stages with fixed exit codes.

Exit codes: 0 success, 2 input or configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import RunConfig, load_config
from .corpus import build_sentences, corpus_stats, save_corpus
from .errors import ComputationError, InputError
from .ingest import (
    build_change_panel,
    load_aliases,
    load_panel,
    parse_company_csv,
    parse_price_csv,
    save_panel,
)
from .pipeline import (
    dimension_sweep,
    regression_experiment,
    sector_projection,
    select_dimension,
    variance_analysis,
)
from .report import ReportInputs, write_artifacts, write_manifest
from .sgns import load_embedding, save_embedding, train

logger = logging.getLogger("stock2vec")

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3

PANEL = "panel.csv"
CORPUS = "corpus.txt"
EMBEDDING = "embedding.txt"
REPORT_DIR = "report"


def _panel(cfg: RunConfig):
    return load_panel(cfg.out_dir / PANEL)


def _corpus(cfg: RunConfig):
    return build_sentences(_panel(cfg), cfg.order)


def _report_dir(cfg: RunConfig) -> Path:
    out = cfg.out_dir / REPORT_DIR
    out.mkdir(parents=True, exist_ok=True)
    return out


def _aliases(cfg: RunConfig):
    return load_aliases(cfg.alias_csv) if cfg.alias_csv is not None else None


def cmd_ingest(cfg: RunConfig) -> int:
    cfg.check_inputs("price_csv", "company_csv")
    aliases = _aliases(cfg)
    prices = parse_price_csv(cfg.price_csv, aliases)
    companies = parse_company_csv(cfg.company_csv, aliases)
    panel = build_change_panel(prices, companies)
    path = cfg.out_dir / PANEL
    save_panel(panel, path)
    print(f"tickers={panel.n_tickers} days={panel.n_days} dropped_rows={prices.dropped} "
          f"duplicate_rows={prices.duplicates} rejected_companies={len(companies.rejected)} "
          f"out_of_bounds={panel.out_of_bounds}")
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_build_corpus(cfg: RunConfig) -> int:
    corpus = _corpus(cfg)
    save_corpus(corpus, cfg.out_dir / CORPUS)
    stats = corpus_stats(corpus)
    print(" ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in stats.items())
          + f" dropped_days={corpus.dropped_days}")
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    corpus = _corpus(cfg)
    save_corpus(corpus, cfg.out_dir / CORPUS)
    e = train(corpus, cfg.hp)
    path = cfg.out_dir / EMBEDDING
    save_embedding(e, path)
    print(f"embedding={path} tokens={len(e.vocabulary)} dimension={e.dimension}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    panel = _panel(cfg)
    corpus = build_sentences(panel, cfg.order)
    sweep = dimension_sweep(corpus, cfg.sweep_dims, cfg.hp, cfg.seed, panel.sector_map(), cfg.train_fraction)
    sweep.chosen = select_dimension(sweep, cfg.epsilon)
    sweep.epsilon = cfg.epsilon
    write_artifacts(ReportInputs(sweep=sweep), _report_dir(cfg))
    print(f"selected_dimension={sweep.chosen}")
    return EXIT_OK


def cmd_pca(cfg: RunConfig) -> int:
    panel = _panel(cfg)
    e = load_embedding(cfg.out_dir / EMBEDDING)
    corpus = build_sentences(panel, cfg.order)
    m_values = range(1, cfg.high_dim + 1)
    curve = variance_analysis(corpus, cfg.high_dim, cfg.hp, m_values)
    projection = sector_projection(e, panel.sector_map())
    write_artifacts(ReportInputs(variance=curve, projection=projection), _report_dir(cfg))
    m = min(e.dimension, cfg.high_dim)
    print(f"cumulative_variance_at_{m}={dict(curve.points)[m]:.6f}")
    return EXIT_OK


def cmd_regress(cfg: RunConfig) -> int:
    cfg.check_targets()
    if not cfg.targets:
        logger.warning("no targets configured; nothing to regress")
        return EXIT_OK
    e = load_embedding(cfg.out_dir / EMBEDDING)
    aliases = _aliases(cfg)
    results = []
    for t in cfg.targets:
        r = regression_experiment(
            t.path, t.target_column, None if t.baseline_columns is None else list(t.baseline_columns), e,
            ticker_column=t.ticker_column, seed=cfg.seed, count_variance=cfg.aic_counts_variance,
            n_trees=cfg.n_trees, repeats=cfg.importance_repeats, aliases=aliases, name=t.name,
        )
        results.append(r)
        print(f"{t.name}: baseline_r2={r.baseline.r2:.4f} augmented_r2={r.augmented.r2:.4f} "
              f"rows={r.joined_rows} dropped={r.dropped_rows} top={','.join(r.importance.ranking()[:4])}")
    write_artifacts(ReportInputs(regressions=results), _report_dir(cfg))
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    out = _report_dir(cfg)
    manifest = write_manifest(out)
    print(f"manifest={out / 'manifest.json'} files={len(manifest['files'])}")
    return EXIT_OK


def cmd_all(cfg: RunConfig) -> int:
    for step in (cmd_ingest, cmd_build_corpus, cmd_train, cmd_sweep, cmd_pca, cmd_regress, cmd_report):
        started = time.perf_counter()
        step(cfg)
        logger.info("%s finished in %.1fs", step.__name__, time.perf_counter() - started)
    return EXIT_OK


COMMANDS = {
    "ingest": (cmd_ingest, "parse price and company CSVs into the panel cache"),
    "build-corpus": (cmd_build_corpus, "rank each day's moves into a sentence corpus"),
    "train": (cmd_train, "train the embedding at the configured dimension"),
    "sweep": (cmd_sweep, "sector-classification accuracy across dimensions; prints the chosen one"),
    "pca": (cmd_pca, "explained-variance curve and 2-D sector projection"),
    "regress": (cmd_regress, "baseline vs embedding-augmented OLS for every configured target"),
    "report": (cmd_report, "hash the report directory into manifest.json"),
    "all": (cmd_all, "run every stage in order"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run options (override the config file)")
    g.add_argument("--config", metavar="PATH", help="JSON run config; relative paths inside resolve against it")
    g.add_argument("--seed", type=int, metavar="N", help="master random seed")
    g.add_argument("--out", metavar="DIR", help="output directory")
    g.add_argument("--workers", type=int, metavar="N", help="training threads (1 = bit-reproducible)")
    g.add_argument("--order", choices=("desc", "asc"), help="rank days by descending or ascending change")
    g.add_argument("-v", "--verbose", action="store_true", help="debug-level log lines")

    parser = argparse.ArgumentParser(prog="stock2vec", description="Stock embeddings from daily move rankings.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    handler, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out, workers=args.workers, order=args.order)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        cfg.write_resolved()
        return handler(cfg)
    except InputError as exc:
        logger.error("%s", exc)
        return EXIT_INPUT
    except ComputationError as exc:
        logger.error("%s", exc)
        return EXIT_COMPUTE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - the exit-code contract has no slot for anything else
        logger.exception("unexpected failure: %s", exc)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())

"""Stock embeddings learned from the daily ranking of price moves."""

from .corpus import SentenceCorpus, build_sentences
from .errors import ComputationError, InputError, Stock2VecError
from .ingest import ChangePanel, build_change_panel, parse_company_csv, parse_price_csv
from .sgns import Embedding, Hyperparams, load_embedding, save_embedding, train

__version__ = "0.1.0"

__all__ = [
    "ChangePanel",
    "ComputationError",
    "Embedding",
    "Hyperparams",
    "InputError",
    "SentenceCorpus",
    "Stock2VecError",
    "build_change_panel",
    "build_sentences",
    "load_embedding",
    "parse_company_csv",
    "parse_price_csv",
    "save_embedding",
    "train",
]

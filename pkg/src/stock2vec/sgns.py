"""Skip-gram with negative sampling over ticker sentences.

The hot loop is compiled with numba. Every pair update goes through
:func:`_pair_step`, which is also what :func:`sgns_pair_update` calls, so the
gradient checks in the test suite exercise the exact training arithmetic.

Randomness during training comes from a splitmix64 stream per worker, seeded
from :class:`numpy.random.SeedSequence`; with ``workers=1`` a run is
bit-reproducible.
"""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numba
import numpy as np

from .corpus import SentenceCorpus
from .errors import (
    ComputationError,
    ConfigError,
    DegenerateSentence,
    EmptyCorpus,
    EmptyVocabulary,
    FormatError,
    InputFileNotFound,
    UnknownToken,
)

logger = logging.getLogger(__name__)

MAX_RESAMPLE = 100


@dataclass(frozen=True)
class Hyperparams:
    dimension: int = 4
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    alpha: float = 0.025
    min_alpha: float = 0.0001
    seed: int = 1
    workers: int = 1
    noise_exponent: float = 0.75

    def __post_init__(self):
        for name in ("dimension", "window", "negatives", "epochs", "workers"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not (self.alpha > self.min_alpha >= 0):
            raise ConfigError(
                f"learning rates must satisfy alpha > min_alpha >= 0, got {self.alpha}, {self.min_alpha}"
            )
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")

    def with_(self, **changes) -> "Hyperparams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelState:
    vocabulary: tuple[str, ...]
    U: np.ndarray
    V: np.ndarray
    noise: np.ndarray
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {t: i for i, t in enumerate(self.vocabulary)}
        self.alias_prob, self.alias_index = alias_table(self.noise)

    def lookup(self, token) -> int:
        try:
            return self.index[token]
        except KeyError:
            raise UnknownToken(f"unknown token {token!r}") from None

    def copy(self) -> "ModelState":
        return ModelState(self.vocabulary, self.U.copy(), self.V.copy(), self.noise.copy(), dict(self.index))


@dataclass(frozen=True)
class Embedding:
    vocabulary: tuple[str, ...]
    vectors: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.vocabulary):
            raise ValueError("need exactly one vector per vocabulary token")
        self.vectors.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def vector(self, token) -> np.ndarray:
        try:
            return self.vectors[self.vocabulary.index(token)]
        except ValueError:
            raise UnknownToken(f"unknown token {token!r}") from None


def alias_table(weights):
    """Vose's alias tables for O(1) sampling from a discrete distribution."""
    n = len(weights)
    scaled = np.asarray(weights, dtype=float) * (n / np.sum(weights))
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    return prob, alias


def noise_distribution(counts, exponent=0.75) -> np.ndarray:
    w = np.asarray(counts, dtype=float) ** exponent
    return w / w.sum()


def init_model(counts: dict[str, int], hp: Hyperparams) -> ModelState:
    """Uniform input vectors in [-0.5/d, 0.5/d), zero output vectors."""
    if not counts:
        raise EmptyVocabulary("cannot initialize a model without tokens")
    vocab = tuple(sorted(counts))
    d = hp.dimension
    rng = np.random.default_rng(np.random.SeedSequence(hp.seed).spawn(1)[0])
    U = (rng.random((len(vocab), d)) - 0.5) / d
    V = np.zeros((len(vocab), d))
    noise = noise_distribution([counts[t] for t in vocab], hp.noise_exponent)
    return ModelState(vocab, U, V, noise)


# --- compiled kernels -------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)


@numba.njit(cache=True)
def _next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@numba.njit(cache=True)
def _uniform(state):
    return float(_next_u64(state) >> _S11) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _draw(prob, alias, state):
    x = _uniform(state) * prob.shape[0]
    i = int(x)
    if i >= prob.shape[0]:
        i = prob.shape[0] - 1
    if x - i < prob[i]:
        return i
    return alias[i]


@numba.njit(cache=True)
def _draw_many(prob, alias, n, state):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _draw(prob, alias, state)
    return out


@numba.njit(cache=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@numba.njit(cache=True)
def _log_sigmoid(x):
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@numba.njit(cache=True)
def _dot(A, i, B, j):
    acc = 0.0
    for x in range(A.shape[1]):
        acc += A[i, x] * B[j, x]
    return acc


@numba.njit(cache=True)
def _pair_loss(U, V, c, o, negs, n_neg):
    loss = -_log_sigmoid(_dot(U, c, V, o))
    for i in range(n_neg):
        loss -= _log_sigmoid(-_dot(U, c, V, negs[i]))
    return loss


@numba.njit(cache=True)
def _pair_step(U, V, c, o, negs, n_neg, alpha, coef, grad_u):
    # All coefficients are taken at the pre-update state, so repeated negatives
    # accumulate their gradients exactly.
    d = U.shape[1]
    g_pos = 1.0 - _sigmoid(_dot(U, c, V, o))
    for i in range(n_neg):
        coef[i] = _sigmoid(_dot(U, c, V, negs[i]))
    for j in range(d):
        grad_u[j] = -g_pos * V[o, j]
    for i in range(n_neg):
        n = negs[i]
        for j in range(d):
            grad_u[j] += coef[i] * V[n, j]
    for j in range(d):
        V[o, j] += alpha * g_pos * U[c, j]
    for i in range(n_neg):
        n = negs[i]
        for j in range(d):
            V[n, j] -= alpha * coef[i] * U[c, j]
    for j in range(d):
        U[c, j] -= alpha * grad_u[j]


@numba.njit(cache=True)
def _train_span(U, V, prob, alias, tokens, offsets, windows, s_lo, s_hi, k, alpha0, alpha_min,
                done, total, state, max_resample):
    negs = np.empty(k, dtype=np.int64)
    coef = np.empty(k)
    grad_u = np.empty(U.shape[1])
    for s in range(s_lo, s_hi):
        a = offsets[s]
        L = offsets[s + 1] - a
        for i in range(L):
            w = windows[a + i]
            c = tokens[a + i]
            lo = max(0, i - w)
            hi = min(L, i + w + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                o = tokens[a + j]
                alpha = alpha0 - (alpha0 - alpha_min) * (done / total)
                n_neg = 0
                for _ in range(k):
                    for _attempt in range(max_resample):
                        cand = _draw(prob, alias, state)
                        if cand != o:
                            negs[n_neg] = cand
                            n_neg += 1
                            break
                _pair_step(U, V, c, o, negs, n_neg, alpha, coef, grad_u)
                done += 1
    return done


@numba.njit(parallel=True, cache=True)
def _train_parallel(U, V, prob, alias, tokens, offsets, windows, bounds, k, alpha0, alpha_min,
                    done, totals, states, max_resample):
    # Racy lock-free updates across workers (asynchronous SGD).
    for w in numba.prange(bounds.shape[0] - 1):
        done[w] = _train_span(U, V, prob, alias, tokens, offsets, windows, bounds[w], bounds[w + 1],
                              k, alpha0, alpha_min, done[w], totals[w], states[w], max_resample)


# --- public operations ------------------------------------------------------


def _indices(state: ModelState, center, context, negatives):
    c = state.lookup(center)
    o = state.lookup(context)
    negs = np.array([state.lookup(n) for n in negatives], dtype=np.int64)
    if np.any(negs == o):
        raise ValueError("negatives may not include the context token")
    return c, o, negs


def sgns_pair_loss(center, context, negatives, state: ModelState) -> float:
    """Negative log-likelihood of one (center, context) pair against its negatives."""
    c, o, negs = _indices(state, center, context, negatives)
    return float(_pair_loss(state.U, state.V, c, o, negs, len(negs)))


def sgns_pair_update(center, context, negatives, state: ModelState, alpha: float) -> ModelState:
    """One gradient step on :func:`sgns_pair_loss`; returns a new state."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    c, o, negs = _indices(state, center, context, negatives)
    new = state.copy()
    k = len(negs)
    _pair_step(new.U, new.V, c, o, negs, k, float(alpha), np.empty(k), np.empty(new.U.shape[1]))
    return new


def sample_noise(state: ModelState, n: int, seed: int = 0) -> np.ndarray:
    """Draw ``n`` token indices from the noise distribution."""
    rng_state = _seed_states(seed, 1)[0]
    return _draw_many(state.alias_prob, state.alias_index, n, rng_state)


def _seed_states(seed, n):
    words = [ss.generate_state(1, dtype=np.uint64) for ss in np.random.SeedSequence(seed).spawn(n + 1)[1:]]
    return np.array(words, dtype=np.uint64).reshape(n, 1)


def _pair_counts(lengths, windows_flat, offsets):
    """Exact number of (center, context) pairs for the drawn window sizes."""
    pos = np.arange(offsets[-1]) - np.repeat(offsets[:-1], lengths)
    L = np.repeat(lengths, lengths)
    per_pos = np.minimum(pos, windows_flat) + np.minimum(L - 1 - pos, windows_flat)
    per_sentence = np.add.reduceat(per_pos, offsets[:-1])
    return int(per_pos.sum()), per_sentence


def train(corpus: SentenceCorpus, hp: Hyperparams, probe=None) -> Embedding:
    """Train SGNS embeddings on ``corpus``.

    Sentences are visited in date order every epoch. Each center position gets
    a window size drawn uniformly from 1..window, the learning rate decays
    linearly from ``alpha`` to ``min_alpha`` over all scheduled pairs, and
    negatives equal to the context token are redrawn.

    ``probe``, if given, is called as ``probe(epoch, state)`` before the first
    epoch (``epoch=0``) and after each epoch.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("corpus has no sentences")
    for s in corpus.sentences:
        if len(s) < 2:
            raise DegenerateSentence(f"sentence for {s.date} has {len(s)} token(s); filter upstream")

    started = time.perf_counter()
    state = init_model(dict(corpus.counts), hp)
    tokens = np.array([state.index[t] for s in corpus.sentences for t in s.tokens], dtype=np.int64)
    lengths = np.array([len(s) for s in corpus.sentences], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)

    workers = min(hp.workers, len(corpus))
    bounds = np.linspace(0, len(corpus), workers + 1).round().astype(np.int64)

    rng = np.random.default_rng(np.random.SeedSequence(hp.seed).spawn(2)[1])
    windows = rng.integers(1, hp.window + 1, size=(hp.epochs, len(tokens)), dtype=np.int64)
    per_worker_total = np.zeros(workers, dtype=np.int64)
    for e in range(hp.epochs):
        _, per_sentence = _pair_counts(lengths, windows[e], offsets)
        for w in range(workers):
            per_worker_total[w] += per_sentence[bounds[w]:bounds[w + 1]].sum()
    total_pairs = int(per_worker_total.sum())
    totals = np.maximum(per_worker_total, 1).astype(np.float64)

    states = _seed_states(hp.seed, workers)
    done = np.zeros(workers, dtype=np.int64)
    tables = (state.U, state.V, state.alias_prob, state.alias_index)
    if probe is not None:
        probe(0, state)
    for epoch in range(hp.epochs):
        if workers == 1:
            done[0] = _train_span(*tables, tokens, offsets, windows[epoch], 0, len(corpus),
                                  hp.negatives, hp.alpha, hp.min_alpha, done[0], totals[0],
                                  states[0], MAX_RESAMPLE)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", numba.NumbaWarning)
                _train_parallel(*tables, tokens, offsets, windows[epoch], bounds, hp.negatives,
                                hp.alpha, hp.min_alpha, done, totals, states, MAX_RESAMPLE)
        if not (np.isfinite(state.U).all() and np.isfinite(state.V).all()):
            raise ComputationError(f"non-finite vectors after epoch {epoch + 1}")
        if probe is not None:
            probe(epoch + 1, state)
        logger.debug("epoch %d/%d: %d pairs", epoch + 1, hp.epochs, int(done.sum()))

    metadata = {
        "hyperparams": hp.to_dict(),
        "corpus_fingerprint": corpus.fingerprint(),
        "corpus_order": corpus.order,
        "pair_count": total_pairs,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    return Embedding(state.vocabulary, state.U.copy(), metadata)


def save_embedding(e: Embedding, path, sidecar: bool = True) -> None:
    """Write ``e`` as tab-separated text; floats use shortest round-trip repr."""
    path = Path(path)
    lines = [f"{len(e.vocabulary)} {e.dimension}"]
    for token, vec in zip(e.vocabulary, e.vectors):
        lines.append("\t".join([token, *(repr(float(v)) for v in vec)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if sidecar:
        path.with_suffix(".json").write_text(json.dumps(e.metadata, indent=2, sort_keys=True) + "\n")


def load_embedding(path) -> Embedding:
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty embedding file")
    try:
        n, d = (int(x) for x in lines[0].split())
    except ValueError:
        raise FormatError(f"{path}:1: header must be '<count> <dimension>'") from None
    if len(lines) - 1 != n:
        raise FormatError(f"{path}: header declares {n} rows, found {len(lines) - 1}")
    vocab, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != d + 1:
            raise FormatError(f"{path}:{lineno}: expected {d} values, got {len(fields) - 1}")
        try:
            rows.append([float(x) for x in fields[1:]])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: unparseable number") from None
        vocab.append(fields[0])
    meta_path = path.with_suffix(".json")
    metadata = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    return Embedding(tuple(vocab), np.array(rows, dtype=float).reshape(n, d), metadata)


def cosine_similarities(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1) * np.linalg.norm(query)
    dots = vectors @ query
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(norms > 0, dots / norms, 0.0)
    return np.clip(sims, -1.0, 1.0)


def nearest_neighbors(e: Embedding, token, n: int) -> list[tuple[str, float]]:
    """The ``n`` tokens most cosine-similar to ``token``, excluding itself."""
    if not 0 < n < len(e.vocabulary):
        raise ValueError(f"n must be in 1..{len(e.vocabulary) - 1}")
    sims = cosine_similarities(e.vectors, e.vector(token))
    ranked = sorted(
        ((t, float(s)) for t, s in zip(e.vocabulary, sims) if t != token),
        key=lambda p: (-p[1], p[0]),
    )
    return ranked[:n]

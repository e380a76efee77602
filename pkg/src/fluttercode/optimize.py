"""Merit functions and search for one-of-N exposure codes.

A code's fitness comes from the minimum dB bin of each of its N
sequences' power spectra. Three ways of combining those minima are
supported:

* max-min: best single sequence wins; tends to produce one standout
  window and two sacrificial ones.
* avg-min: mean over sequences; favors uniformly decent windows at the
  cost of the best one.
* avg-pairs: mean of max(m0, m1) and max(m0, m2) with sequence 0
  distinguished; optimizes two windows, a compromise between the other
  two. Defined for arity 3 only.

Search is either best-of-M uniform sampling or a generational genetic
algorithm (elitism, fitness-proportional selection, single-point tail
crossover, per-gene mutation). All randomness flows from one seed
through a numpy PCG64 generator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .sequences import InterleavedCode, MAX_ARITY, MIN_ARITY, ONE_HOT_DIGITS
from .spectrum import DEFAULT_N_FFT, min_db_many


class ArityUnsupportedError(ValueError):
    """The merit function is not defined for this arity."""


class MeritKind(enum.Enum):
    MAX_MIN = "max-min"
    AVG_MIN = "avg-min"
    AVG_PAIRS_MAX_MIN = "avg-pairs"


def _plane_min_dbs(genes: np.ndarray, arity: int, n_fft: int) -> np.ndarray:
    """(M, arity) matrix of per-sequence spectral minima for (M, W) digit rows."""
    mins = np.empty((genes.shape[0], arity))
    for s in range(arity):
        bits = ((genes.astype(np.uint8) >> s) & 1).astype(np.float64)
        mins[:, s] = min_db_many(bits, n_fft)
    return mins


def _combine(mins: np.ndarray, kind: MeritKind) -> np.ndarray:
    if kind is MeritKind.MAX_MIN:
        return mins.max(axis=1)
    if kind is MeritKind.AVG_MIN:
        return mins.mean(axis=1)
    if mins.shape[1] != 3:
        raise ArityUnsupportedError("avg-pairs merit is defined for arity 3 only")
    return (np.maximum(mins[:, 0], mins[:, 1])
            + np.maximum(mins[:, 0], mins[:, 2])) / 2.0


def score_codes(genes: np.ndarray, arity: int, kind: MeritKind,
                n_fft: int = DEFAULT_N_FFT) -> np.ndarray:
    """Merit of every row of a (M, W) digit matrix."""
    return _combine(_plane_min_dbs(genes, arity, n_fft), kind)


def sequence_min_dbs(code: InterleavedCode, n_fft: int = DEFAULT_N_FFT) -> list[float]:
    """Per-sequence minimum dB, ascending bit order."""
    genes = np.array([code.digits], dtype=np.uint8)
    return [float(v) for v in _plane_min_dbs(genes, code.arity, n_fft)[0]]


def merit(code: InterleavedCode, kind: MeritKind,
          n_fft: int = DEFAULT_N_FFT) -> float:
    """Scalar fitness of a code in dB (higher is better)."""
    genes = np.array([code.digits], dtype=np.uint8)
    return float(score_codes(genes, code.arity, kind, n_fft)[0])


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 1000
    elite_count: int = 3
    crossover_prob: float = 0.95
    mutation_prob_per_gene: float = 0.015
    selection_offset: float = 1000.0
    arity: int = 3
    length: int = 52
    n_fft: int = DEFAULT_N_FFT
    merit: MeritKind = MeritKind.AVG_PAIRS_MAX_MIN
    generations: int = 2000
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        for name in ("crossover_prob", "mutation_prob_per_gene"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.selection_offset <= 0:
            raise ValueError("selection_offset must be positive")
        if not MIN_ARITY <= self.arity <= MAX_ARITY:
            raise ValueError(f"arity must be in [{MIN_ARITY}, {MAX_ARITY}]")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.n_fft < self.length:
            raise ValueError("n_fft must cover the word length")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.merit is MeritKind.AVG_PAIRS_MAX_MIN and self.arity != 3:
            raise ArityUnsupportedError("avg-pairs merit is defined for arity 3 only")


class GenerationRecord(NamedTuple):
    generation: int
    best_score: float
    best_word: str


ProgressSink = Callable[[GenerationRecord], None]


@dataclass
class GaState:
    """Population of code words with scores, kept sorted best-first.

    `genes` is a (population_size, length) matrix of one-hot digits;
    rows pair with `scores`. The generator is consumed strictly
    sequentially by ga_step, so a state is single-owner.
    """

    genes: np.ndarray
    scores: np.ndarray
    arity: int
    generation: int
    rng: np.random.Generator
    best_genes: np.ndarray = field(default=None)  # type: ignore[assignment]
    best_score: float = -np.inf

    def __post_init__(self):
        if self.best_genes is None:
            self.best_genes = self.genes[0].copy()
            self.best_score = float(self.scores[0])

    @property
    def population(self) -> list[tuple[InterleavedCode, float]]:
        return [
            (InterleavedCode(tuple(int(d) for d in row), self.arity), float(s))
            for row, s in zip(self.genes, self.scores)
        ]

    @property
    def best_ever(self) -> tuple[InterleavedCode, float]:
        code = InterleavedCode(tuple(int(d) for d in self.best_genes), self.arity)
        return code, float(self.best_score)

    def best_word(self) -> str:
        return self.best_ever[0].to_word()


def _random_genes(rng: np.random.Generator, count: int, arity: int,
                  length: int) -> np.ndarray:
    digits = np.array(ONE_HOT_DIGITS[:arity], dtype=np.uint8)
    return digits[rng.integers(0, arity, size=(count, length))]


def _sort_desc(genes: np.ndarray, scores: np.ndarray):
    # stable: equal scores keep ascending original index
    order = np.argsort(-scores, kind="stable")
    return genes[order], scores[order]


def random_search(count: int, arity: int = 3, length: int = 52,
                  kind: MeritKind = MeritKind.AVG_MIN,
                  seed: int = 0,
                  n_fft: int = DEFAULT_N_FFT) -> tuple[InterleavedCode, float]:
    """Best of `count` uniformly drawn one-of-N words.

    Each chip is drawn independently and uniformly over the N one-hot
    digits. Ties go to the earliest draw, so a seed fully determines
    the result.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    genes = _random_genes(rng, count, arity, length)
    scores = score_codes(genes, arity, kind, n_fft)
    best = int(np.argmax(scores))
    code = InterleavedCode(tuple(int(d) for d in genes[best]), arity)
    return code, float(scores[best])


def ga_init(cfg: GaConfig) -> GaState:
    """Fresh scored population, sorted best-first, from cfg.rng_seed."""
    rng = np.random.default_rng(cfg.rng_seed)
    genes = _random_genes(rng, cfg.population_size, cfg.arity, cfg.length)
    scores = score_codes(genes, cfg.arity, cfg.merit, cfg.n_fft)
    genes, scores = _sort_desc(genes, scores)
    return GaState(genes=genes, scores=scores, arity=cfg.arity,
                   generation=0, rng=rng)


def ga_step(state: GaState, cfg: GaConfig) -> GaState:
    """Advance one generation in place and return the state.

    The generation is: copy the elite rows unchanged; fill the rest by
    roulette selection with weight max(0, selection_offset + score);
    single-point tail crossover between non-elite rows; per-gene
    mutation of non-elite rows; rescore and resort.

    Random draws happen in a fixed order regardless of how scoring is
    executed: one uniform array for the roulette positions, then the
    crossover coin/partner/cut arrays, then the mutation coin and
    replacement-digit matrices. Crossover tail swaps are applied
    sequentially in row order, and a row may be swapped again when it
    is picked as a later row's partner.
    """
    rng = state.rng
    pop, elite = cfg.population_size, cfg.elite_count
    n_free = pop - elite

    weights = np.maximum(cfg.selection_offset + state.scores, 0.0)
    total = weights.sum()
    draws = rng.random(n_free)
    if total > 0:
        cum = np.cumsum(weights)
        picks = np.searchsorted(cum, draws * total, side="right")
        picks = np.minimum(picks, pop - 1)
    else:
        picks = (draws * pop).astype(np.intp)
    genes = np.concatenate([state.genes[:elite], state.genes[picks]], axis=0)

    coins = rng.random(n_free)
    partners = rng.integers(elite, pop, size=n_free)
    cuts = rng.integers(0, cfg.length, size=n_free)
    for t in range(n_free):
        if coins[t] < cfg.crossover_prob:
            i, j, k = elite + t, int(partners[t]), int(cuts[t])
            tail = genes[i, k:].copy()
            genes[i, k:] = genes[j, k:]
            genes[j, k:] = tail

    mut_mask = rng.random((n_free, cfg.length)) < cfg.mutation_prob_per_gene
    mut_digits = _random_genes(rng, n_free, cfg.arity, cfg.length)
    genes[elite:][mut_mask] = mut_digits[mut_mask]

    scores = score_codes(genes, cfg.arity, cfg.merit, cfg.n_fft)
    genes, scores = _sort_desc(genes, scores)
    state.genes, state.scores = genes, scores
    state.generation += 1
    if scores[0] > state.best_score:
        state.best_score = float(scores[0])
        state.best_genes = genes[0].copy()
    return state


@dataclass(frozen=True)
class GaResult:
    best_code: InterleavedCode
    best_score: float
    history: tuple[GenerationRecord, ...]


def ga_run(cfg: GaConfig, progress: ProgressSink | None = None) -> GaResult:
    """Initialize and run cfg.generations steps, reporting each generation.

    The history starts with the scored initial population (generation 0)
    and records the best-ever score after every step, so it is always
    nondecreasing.
    """
    state = ga_init(cfg)
    history = [GenerationRecord(0, state.best_score, state.best_word())]
    if progress is not None:
        progress(history[0])
    for _ in range(cfg.generations):
        ga_step(state, cfg)
        rec = GenerationRecord(state.generation, state.best_score, state.best_word())
        history.append(rec)
        if progress is not None:
            progress(rec)
    code, score = state.best_ever
    return GaResult(code, score, tuple(history))

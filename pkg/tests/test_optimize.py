import numpy as np
import pytest

from fluttercode.optimize import (
    ArityUnsupportedError,
    GaConfig,
    MeritKind,
    ga_init,
    ga_run,
    ga_step,
    merit,
    random_search,
    score_codes,
    sequence_min_dbs,
)
from fluttercode.sequences import InterleavedCode, ONE_HOT_DIGITS
from fluttercode import reference_codes

PUBLISHED = [
    (reference_codes.TRIPLET_MAX_MIN, MeritKind.MAX_MIN, -21.4382),
    (reference_codes.TRIPLET_MAX_MIN_ALT1, MeritKind.MAX_MIN, -21.5469),
    (reference_codes.TRIPLET_MAX_MIN_ALT2, MeritKind.MAX_MIN, -21.7312),
    (reference_codes.TRIPLET_AVG_MIN, MeritKind.AVG_MIN, -25.6353),
    (reference_codes.TRIPLET_AVG_PAIRS, MeritKind.AVG_PAIRS_MAX_MIN, -21.6372),
]


def random_code(rng, arity=3, length=52):
    digits = tuple(int(ONE_HOT_DIGITS[i]) for i in rng.integers(0, arity, length))
    return InterleavedCode(digits, arity)


def permute_planes(code, order):
    planes = code.decode()
    return InterleavedCode.from_sequences([planes[i] for i in order])


class TestMerit:
    @pytest.mark.parametrize("word,kind,score", PUBLISHED)
    def test_published_scores(self, word, kind, score):
        code = InterleavedCode.from_word(word)
        assert merit(code, kind) == pytest.approx(score, abs=1e-3)

    def test_max_min_at_least_avg_min(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            code = random_code(rng)
            assert merit(code, MeritKind.MAX_MIN) >= merit(code, MeritKind.AVG_MIN)

    def test_avg_pairs_between_arithmetic_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            code = random_code(rng)
            m = sequence_min_dbs(code)
            pairs = merit(code, MeritKind.AVG_PAIRS_MAX_MIN)
            assert pairs <= max(m) + 1e-12
            assert pairs >= min(max(m[0], m[1]), max(m[0], m[2])) - 1e-12

    def test_symmetric_merits_are_permutation_invariant(self):
        rng = np.random.default_rng(2)
        code = random_code(rng)
        for order in ((1, 2, 0), (2, 1, 0), (0, 2, 1)):
            permuted = permute_planes(code, order)
            for kind in (MeritKind.MAX_MIN, MeritKind.AVG_MIN):
                assert merit(permuted, kind) == pytest.approx(
                    merit(code, kind), abs=1e-12)

    def test_avg_pairs_distinguishes_first_plane(self):
        code = InterleavedCode.from_word(reference_codes.TRIPLET_AVG_MIN)
        swapped = permute_planes(code, (2, 1, 0))
        a = merit(code, MeritKind.AVG_PAIRS_MAX_MIN)
        b = merit(swapped, MeritKind.AVG_PAIRS_MAX_MIN)
        assert abs(a - b) > 0.1

    def test_two_plane_merit_invariant_under_swap(self):
        rng = np.random.default_rng(3)
        digits = tuple(int(ONE_HOT_DIGITS[i]) for i in rng.integers(0, 2, 52))
        code = InterleavedCode(digits, 2)
        swapped = permute_planes(code, (1, 0))
        for kind in (MeritKind.MAX_MIN, MeritKind.AVG_MIN):
            assert merit(swapped, kind) == pytest.approx(merit(code, kind), abs=1e-12)

    def test_avg_pairs_requires_arity_three(self):
        digits = (1, 2) * 26
        code = InterleavedCode(digits, 2)
        with pytest.raises(ArityUnsupportedError):
            merit(code, MeritKind.AVG_PAIRS_MAX_MIN)

    def test_score_codes_matches_merit(self):
        rng = np.random.default_rng(4)
        codes = [random_code(rng) for _ in range(10)]
        genes = np.array([c.digits for c in codes], dtype=np.uint8)
        batch = score_codes(genes, 3, MeritKind.AVG_MIN)
        for code, got in zip(codes, batch):
            assert got == pytest.approx(merit(code, MeritKind.AVG_MIN), abs=1e-12)


class TestRandomSearch:
    def test_single_draw_returns_it(self):
        code, score = random_search(1, seed=11)
        assert merit(code, MeritKind.AVG_MIN) == pytest.approx(score, abs=1e-12)

    def test_deterministic(self):
        a = random_search(100, seed=21)
        b = random_search(100, seed=21)
        assert a[0] == b[0] and a[1] == b[1]

    def test_more_draws_never_worse(self):
        # same seed: the first M draws are a prefix of the first 2M
        small = random_search(50, seed=8)[1]
        large = random_search(100, seed=8)[1]
        assert large >= small

    def test_rejects_zero_count(self):
        with pytest.raises(ValueError):
            random_search(0)

    def test_seeded_regression(self):
        # pinned output of a fixed-seed run; catches stream or scoring drift
        code, score = random_search(100, arity=3, length=52,
                                    kind=MeritKind.AVG_MIN, seed=2024)
        assert code.to_word() == ("14111144441141114211224241224112"
                                  "14242221114241444121")
        assert score == pytest.approx(-28.904093457743205, abs=1e-9)
        assert score > -35.0  # far above the random-word floor


class TestGaConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            GaConfig(population_size=0)
        with pytest.raises(ValueError):
            GaConfig(elite_count=10, population_size=10)
        with pytest.raises(ValueError):
            GaConfig(crossover_prob=1.5)
        with pytest.raises(ValueError):
            GaConfig(n_fft=32, length=52)
        with pytest.raises(ArityUnsupportedError):
            GaConfig(arity=4, merit=MeritKind.AVG_PAIRS_MAX_MIN)

    def test_avg_min_allows_other_arities(self):
        GaConfig(arity=4, merit=MeritKind.AVG_MIN)


def tiny_cfg(**kw):
    base = dict(population_size=24, elite_count=3, generations=5,
                merit=MeritKind.AVG_MIN, rng_seed=13)
    base.update(kw)
    return GaConfig(**base)


class TestGa:
    def test_init_population_of_one(self):
        cfg = tiny_cfg(population_size=1, elite_count=0)
        state = ga_init(cfg)
        code, score = state.best_ever
        assert len(state.population) == 1
        assert state.population[0][0] == code
        assert state.population[0][1] == score

    def test_init_deterministic(self):
        a, b = ga_init(tiny_cfg()), ga_init(tiny_cfg())
        assert np.array_equal(a.genes, b.genes)
        assert np.array_equal(a.scores, b.scores)

    def test_init_sorted_descending(self):
        state = ga_init(tiny_cfg())
        assert all(x >= y for x, y in zip(state.scores, state.scores[1:]))

    def test_init_scores_finite(self):
        state = ga_init(tiny_cfg())
        assert np.all(state.scores >= -300.0)

    def test_no_variation_keeps_identical_population(self):
        cfg = tiny_cfg(crossover_prob=0.0, mutation_prob_per_gene=0.0)
        state = ga_init(cfg)
        state.genes = np.repeat(state.genes[:1], cfg.population_size, axis=0)
        state.scores = np.repeat(state.scores[:1], cfg.population_size)
        before = state.genes.copy()
        ga_step(state, cfg)
        assert np.array_equal(state.genes, before)

    def test_elite_words_survive_any_step(self):
        cfg = tiny_cfg()
        state = ga_init(cfg)
        elites = [tuple(row) for row in state.genes[:cfg.elite_count]]
        ga_step(state, cfg)
        population = {tuple(row) for row in state.genes}
        for word in elites:
            assert word in population

    def test_best_ever_nondecreasing(self):
        cfg = tiny_cfg(generations=12)
        state = ga_init(cfg)
        previous = state.best_score
        for _ in range(12):
            ga_step(state, cfg)
            assert state.best_score >= previous
            previous = state.best_score

    def test_population_stays_valid(self):
        cfg = tiny_cfg(generations=10)
        state = ga_init(cfg)
        valid = set(ONE_HOT_DIGITS[:cfg.arity])
        for _ in range(10):
            ga_step(state, cfg)
            assert set(np.unique(state.genes)) <= valid
            for code, _ in state.population[:2]:
                planes = code.decode()
                assert all(sum(col) == 1 for col in zip(*(p.bits for p in planes)))

    def test_run_single_individual_no_variation(self):
        cfg = tiny_cfg(population_size=1, elite_count=0, generations=1,
                       crossover_prob=0.0, mutation_prob_per_gene=0.0)
        result = ga_run(cfg)
        init = ga_init(cfg)
        assert result.best_code == init.best_ever[0]

    def test_run_history_nondecreasing(self):
        result = ga_run(tiny_cfg(generations=8))
        scores = [r.best_score for r in result.history]
        assert scores == sorted(scores)
        assert len(result.history) == 9  # generation 0 plus one per step

    def test_run_deterministic_full_history(self):
        a = ga_run(tiny_cfg(generations=6))
        b = ga_run(tiny_cfg(generations=6))
        assert a.history == b.history
        assert a.best_code == b.best_code

    def test_progress_sink_sees_every_generation(self):
        seen = []
        ga_run(tiny_cfg(generations=4), progress=seen.append)
        assert [r.generation for r in seen] == [0, 1, 2, 3, 4]

    def test_state_population_round_trip(self):
        state = ga_init(tiny_cfg())
        code, score = state.population[0]
        assert score == pytest.approx(float(state.scores[0]))
        assert code.digits == tuple(int(d) for d in state.genes[0])

"""Profiles, error classification, and the staged noise injector.

Injection tests drive inject_line with a scripted RNG whose draws are
hand-computed against the documented draw order, then statistical tests
check the realized rates and weightings with the real generator.
"""

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocrforge import (
    CharFrequencyTable,
    ConfusionEntry,
    Corpus,
    CorpusError,
    ErrorProfile,
    ErrorType,
    InjectionCounters,
    NoiseConfig,
    UNIT_SCORING,
    build_char_frequency_table,
    classify_errors,
    error_histogram,
    extract_confusions,
    inject_corpus,
    inject_line,
    iter_injected,
    line_rng,
    load_profile,
    needleman_wunsch,
    noise_sweep,
    save_histogram,
    save_profile,
)


UNIFORM_AB = CharFrequencyTable({"a": 0.5, "b": 0.5})


class ScriptRng:
    """Replays queued draws and verifies the ranges asked for."""

    def __init__(self, randoms=(), randranges=(), randints=()):
        self.randoms = list(randoms)
        self.randranges = list(randranges)
        self.randints = list(randints)

    def random(self):
        return self.randoms.pop(0)

    def randrange(self, n):
        value = self.randranges.pop(0)
        assert 0 <= value < n, f"scripted randrange {value} outside [0, {n})"
        return value

    def randint(self, a, b):
        value = self.randints.pop(0)
        assert a <= value <= b
        return value

    def assert_exhausted(self):
        assert not self.randoms and not self.randranges and not self.randints


class TestProfileTypes:
    def test_entry_validation(self):
        ConfusionEntry("x", "y", 0.5)
        with pytest.raises(ValueError, match="single characters"):
            ConfusionEntry("xy", "a", 0.5)
        with pytest.raises(ValueError, match="itself"):
            ConfusionEntry("x", "x", 0.5)
        with pytest.raises(ValueError, match="outside"):
            ConfusionEntry("x", "y", 0.0)
        with pytest.raises(ValueError, match="outside"):
            ConfusionEntry("x", "y", 1.5)

    def test_profile_sorts_by_probability_then_chars(self):
        p = ErrorProfile(
            entries=(
                ConfusionEntry("b", "c", 0.2),
                ConfusionEntry("a", "z", 0.5),
                ConfusionEntry("a", "b", 0.2),
            )
        )
        assert [(e.error_char, e.correct_char) for e in p.entries] == [
            ("a", "z"),
            ("a", "b"),
            ("b", "c"),
        ]

    def test_lookup(self):
        p = ErrorProfile(entries=(ConfusionEntry("x", "y", 1.0),))
        assert p.lookup() == {("x", "y"): 1.0}

    def test_noise_config_validates_ratio(self):
        for bad in (0.0, 1.0, -0.2, 2.0):
            with pytest.raises(ValueError, match="0 < NR < 1"):
                NoiseConfig(noise_ratio=bad, char_freq=UNIFORM_AB)

    def test_noise_config_validates_max_swaps(self):
        with pytest.raises(ValueError, match="max_swaps"):
            NoiseConfig(noise_ratio=0.2, char_freq=UNIFORM_AB, max_swaps=0)


class TestLineRng:
    def test_deterministic(self):
        assert line_rng(42, 7).random() == line_rng(42, 7).random()

    def test_index_and_seed_sensitivity(self):
        base = line_rng(42, 7).random()
        assert line_rng(42, 8).random() != base
        assert line_rng(43, 7).random() != base

    def test_batching_invariance(self):
        """Manually chunked injection equals the streaming order."""
        lines = [f"line number {i} abc" for i in range(40)]
        config = NoiseConfig(
            noise_ratio=0.4, char_freq=build_char_frequency_table(lines), seed=5
        )
        streamed = [n for n, _ in iter_injected(lines, config)]
        chunked = []
        for start in (0, 13, 29):
            end = {0: 13, 13: 29, 29: 40}[start]
            for i in range(start, end):
                chunked.append(inject_line(lines[i], config, line_rng(config.seed, i)))
        assert chunked == streamed


class TestInjectLineScripted:
    def config(self, profile=None, max_swaps=2):
        return NoiseConfig(
            noise_ratio=0.5, char_freq=UNIFORM_AB, profile=profile, max_swaps=max_swaps
        )

    def test_all_gates_closed(self):
        rng = ScriptRng(randoms=[0.9, 0.9, 0.9])
        counters = InjectionCounters()
        assert inject_line("ab", self.config(), rng, counters) == "ab"
        rng.assert_exhausted()
        assert (counters.deletions, counters.insertions, counters.swap_events) == (0, 0, 0)
        assert counters.lines == 1

    def test_delete_fires_weighted_pick(self):
        # gate 0.0 opens; weighted walk with uniform weights: r=0.6 lands on
        # index 1; remaining gates closed.
        rng = ScriptRng(randoms=[0.0, 0.6, 0.9, 0.9])
        counters = InjectionCounters()
        assert inject_line("ab", self.config(), rng, counters) == "a"
        rng.assert_exhausted()
        assert counters.deletions == 1

    def test_insert_fires_char_then_position(self):
        # char draw 0.6 walks past a (0.5) to b; position 1 of range(3).
        rng = ScriptRng(randoms=[0.9, 0.0, 0.6, 0.9], randranges=[1])
        counters = InjectionCounters()
        assert inject_line("ab", self.config(), rng, counters) == "abb"
        rng.assert_exhausted()
        assert counters.insertions == 1

    def test_swap_burst(self):
        rng = ScriptRng(randoms=[0.9, 0.9, 0.0], randints=[2], randranges=[0, 1])
        counters = InjectionCounters()
        assert inject_line("abc", self.config(), rng, counters) == "bca"
        rng.assert_exhausted()
        assert counters.swap_events == 1

    def test_profile_stage_replaces_one_occurrence(self):
        profile = ErrorProfile(entries=(ConfusionEntry("x", "b", 1.0),))
        # three closed stage gates, then the entry gate 0.3 < NR*EP = 0.5;
        # occurrence pick 0 selects the first b of "abb".
        rng = ScriptRng(randoms=[0.9, 0.9, 0.9, 0.3], randranges=[0])
        counters = InjectionCounters()
        assert inject_line("abb", self.config(profile), rng, counters) == "axb"
        rng.assert_exhausted()
        assert counters.eligible[("x", "b")] == 1
        assert counters.fired[("x", "b")] == 1

    def test_profile_entry_skipped_when_char_absent(self):
        profile = ErrorProfile(entries=(ConfusionEntry("x", "z", 1.0),))
        rng = ScriptRng(randoms=[0.9, 0.9, 0.9])
        counters = InjectionCounters()
        assert inject_line("ab", self.config(profile), rng, counters) == "ab"
        rng.assert_exhausted()
        assert counters.eligible[("x", "z")] == 0

    def test_short_line_skips_delete_and_swap_but_draws_gates(self):
        rng = ScriptRng(randoms=[0.0, 0.9, 0.0])
        counters = InjectionCounters()
        assert inject_line("a", self.config(), rng, counters) == "a"
        rng.assert_exhausted()
        assert counters.deletions == 0 and counters.swap_events == 0

    def test_empty_line_can_only_gain_an_insert(self):
        rng = ScriptRng(randoms=[0.0, 0.0, 0.2, 0.0], randranges=[0])
        assert inject_line("", self.config(), rng) == "a"
        rng.assert_exhausted()


class TestInjectionStatistics:
    def test_event_rates_match_noise_ratio(self):
        lines = ["the quick brown fox jumps over the dog"] * 20000
        config = NoiseConfig(
            noise_ratio=0.3, char_freq=build_char_frequency_table(lines[:1]), seed=2
        )
        counters = InjectionCounters()
        for _ in iter_injected(lines, config, counters):
            pass
        for rate in (counters.deletion_rate, counters.insertion_rate, counters.swap_rate):
            assert abs(rate - 0.3) < 0.015

    def test_deletion_respects_frequency_weights(self):
        """Sweep the weighted draw over a grid: 9:1 weights split 900/100."""
        table = CharFrequencyTable({"a": 0.1, "z": 0.9})
        config = NoiseConfig(noise_ratio=0.5, char_freq=table, seed=3)
        survivors = Counter()
        for k in range(1000):
            rng = ScriptRng(randoms=[0.0, k / 1000, 0.9, 0.9])
            survivors[inject_line("az", config, rng)] += 1
            rng.assert_exhausted()
        # weighted walk: draw < 0.1 deletes a, everything else deletes z
        assert survivors == Counter({"a": 900, "z": 100})

    def test_inserted_chars_follow_frequency_table(self):
        table = CharFrequencyTable({"a": 0.2, "b": 0.8})
        config = NoiseConfig(noise_ratio=0.5, char_freq=table, seed=4)
        counts = Counter()
        for k in range(1000):
            rng = ScriptRng(randoms=[0.9, 0.0, k / 1000, 0.9], randranges=[0])
            counts[inject_line("xy", config, rng)[0]] += 1
            rng.assert_exhausted()
        assert counts == Counter({"a": 200, "b": 800})

    def test_profile_fire_rate_is_nr_times_ep(self):
        profile = ErrorProfile(
            entries=(ConfusionEntry("x", "e", 0.6), ConfusionEntry("q", "o", 0.4))
        )
        lines = ["the noise free zone"] * 30000
        config = NoiseConfig(
            noise_ratio=0.25,
            char_freq=build_char_frequency_table(lines[:1]),
            profile=profile,
            seed=6,
        )
        counters = InjectionCounters()
        for _ in iter_injected(lines, config, counters):
            pass
        for entry in profile.entries:
            key = (entry.error_char, entry.correct_char)
            expected = config.noise_ratio * entry.probability
            assert counters.eligible[key] > 25000
            assert abs(counters.fired_rate(key) - expected) < 0.01


class TestRoundTrip:
    def test_profile_recovered_from_injected_noise(self):
        """Inject a mass-1 profile, extract, compare shares within 20%."""
        profile = ErrorProfile(
            entries=(
                ConfusionEntry("1", "e", 0.4),
                ConfusionEntry("2", "t", 0.3),
                ConfusionEntry("3", "o", 0.2),
                ConfusionEntry("4", "h", 0.1),
            )
        )
        lines = ["the theory of the noted tooth"] * 20000
        config = NoiseConfig(
            noise_ratio=0.2,
            char_freq=build_char_frequency_table(lines[:1]),
            profile=profile,
            seed=7,
        )
        corpus = inject_corpus(lines, config, name="rt")
        extracted = extract_confusions(corpus)
        got = extracted.lookup()
        want = profile.lookup()
        for key, ep in want.items():
            assert key in got, key
            assert abs(got[key] - ep) / ep < 0.20, (key, got[key], ep)
        top_want = [e.error_char for e in profile.entries[:3]]
        top_got = [e.error_char for e in extracted.entries[:3]]
        assert top_got == top_want

    @settings(max_examples=80, deadline=None)
    @given(st.text(alphabet="abcd ", max_size=30), st.integers(0, 10_000))
    def test_inject_line_invariants(self, line, index):
        profile = ErrorProfile(entries=(ConfusionEntry("X", "a", 0.8),))
        config = NoiseConfig(
            noise_ratio=0.5, char_freq=UNIFORM_AB, profile=profile, seed=11
        )
        out = inject_line(line, config, line_rng(config.seed, index))
        assert abs(len(out) - len(line)) <= 1
        allowed = set(line) | set("ab") | {"X"}
        assert set(out) <= allowed

    def test_injection_is_reproducible(self):
        lines = ["some repeated line of text"] * 50
        config = NoiseConfig(
            noise_ratio=0.4, char_freq=build_char_frequency_table(lines[:1]), seed=9
        )
        a = [n for n, _ in iter_injected(lines, config)]
        b = [n for n, _ in iter_injected(lines, config)]
        assert a == b


class TestExtraction:
    def test_counts_and_shares(self):
        corpus = Corpus.from_lines(
            ["xbc", "axc", "abx", "abc"], ["abc", "abc", "abc", "abc"], name="t"
        )
        profile = extract_confusions(corpus)
        assert profile.total_substitutions == 3
        assert profile.lookup() == {
            ("x", "a"): pytest.approx(1 / 3),
            ("x", "b"): pytest.approx(1 / 3),
            ("x", "c"): pytest.approx(1 / 3),
        }

    def test_empty_corpus_gives_empty_profile(self):
        corpus = Corpus.from_lines(["same"], ["same"], name="t")
        assert len(extract_confusions(corpus)) == 0

    def test_transpositions_do_not_count_as_substitutions(self):
        corpus = Corpus.from_lines(["bacd"], ["abcd"], name="t")
        assert len(extract_confusions(corpus)) == 0


class TestClassification:
    def hist(self, gold, noisy):
        return classify_errors(needleman_wunsch(gold, noisy, UNIT_SCORING))

    def test_char_replacement(self):
        h = self.hist("abc", "axc")
        assert h.counts[ErrorType.CHAR_REPLACEMENT] == 1
        assert h.total == 1

    def test_char_swap_consumes_both_ops(self):
        h = self.hist("xaby", "xbay")
        assert h.counts[ErrorType.CHAR_SWAP] == 1
        assert h.total == 1

    def test_missing_and_redundant_space(self):
        assert self.hist("a b", "ab").counts[ErrorType.MISSING_SPACE] == 1
        assert self.hist("ab", "a b").counts[ErrorType.REDUNDANT_SPACE] == 1

    def test_missing_and_redundant_char(self):
        assert self.hist("abc", "ac").counts[ErrorType.MISSING_CHAR] == 1
        assert self.hist("ac", "abc").counts[ErrorType.REDUNDANT_CHAR] == 1

    def test_non_complementary_adjacent_subs_stay_replacements(self):
        h = self.hist("ab", "xy")
        assert h.counts[ErrorType.CHAR_REPLACEMENT] == 2
        assert h.counts[ErrorType.CHAR_SWAP] == 0

    def test_histogram_over_corpus(self):
        corpus = Corpus.from_lines(
            ["xbay", "a b", "abc"], ["xaby", "ab", "abc"], name="t"
        )
        h = error_histogram(corpus)
        assert h.counts[ErrorType.CHAR_SWAP] == 1
        assert h.counts[ErrorType.REDUNDANT_SPACE] == 1
        assert h.total == 2
        assert h.fraction(ErrorType.CHAR_SWAP) == pytest.approx(0.5)


class TestFiles:
    def test_profile_round_trip(self, tmp_path):
        profile = ErrorProfile(
            entries=(ConfusionEntry("x", "y", 0.75), ConfusionEntry("q", "z", 0.25)),
            source_label="demo",
        )
        path = tmp_path / "p.tsv"
        save_profile(profile, path)
        back = load_profile(path)
        assert [(e.error_char, e.correct_char) for e in back.entries] == [
            ("x", "y"),
            ("q", "z"),
        ]
        for got, want in zip(back.entries, profile.entries):
            assert got.probability == pytest.approx(want.probability, abs=1e-9)

    def test_load_skips_blank_and_comment_lines(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("# header\n\nx\ty\t0.5\n", encoding="utf-8")
        assert len(load_profile(path)) == 1

    def test_load_warns_and_drops_degenerate_rows(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("x\tx\t0.5\na\tb\t0.5\n", encoding="utf-8")
        with pytest.warns(UserWarning, match="degenerate"):
            profile = load_profile(path)
        assert len(profile) == 1

    def test_load_rejects_wrong_columns(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("x\ty\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="expected 3 columns"):
            load_profile(path)

    def test_load_rejects_bad_probability(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("x\ty\tnotafloat\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="bad probability"):
            load_profile(path)

    def test_load_wraps_entry_errors(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("x\ty\t1.5\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="line 1"):
            load_profile(path)

    def test_histogram_file_lists_all_types(self, tmp_path):
        corpus = Corpus.from_lines(["ax"], ["ab"], name="t")
        path = tmp_path / "h.tsv"
        save_histogram(error_histogram(corpus), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 6
        assert lines[0].split("\t")[0] == "CharReplacement"
        kinds = {ln.split("\t")[0] for ln in lines}
        assert kinds == {t.value for t in ErrorType}


class TestSweepAndCorpus:
    def test_inject_corpus_empty_raises(self):
        config = NoiseConfig(noise_ratio=0.2, char_freq=UNIFORM_AB)
        with pytest.raises(CorpusError, match="no input lines"):
            inject_corpus([], config)

    def test_noise_sweep_orders_and_replaces_ratio(self):
        lines = ["abab baba abba"] * 200
        config = NoiseConfig(
            noise_ratio=0.1, char_freq=build_char_frequency_table(lines[:1]), seed=8
        )
        seen = []

        def evaluator(corpus):
            diffs = sum(
                1 for p in corpus if p.noisy != p.gold
            )
            seen.append(len(corpus))
            return diffs / len(corpus)

        rows = noise_sweep(lines, config, [0.1, 0.3, 0.5], evaluator)
        assert [r[0] for r in rows] == [0.1, 0.3, 0.5]
        assert seen == [200, 200, 200]
        assert rows[0][1] < rows[2][1]

    def test_noise_sweep_rejects_empty_ratios(self):
        config = NoiseConfig(noise_ratio=0.1, char_freq=UNIFORM_AB)
        with pytest.raises(ValueError, match="ratios"):
            noise_sweep(["ab"], config, [], lambda c: 0.0)

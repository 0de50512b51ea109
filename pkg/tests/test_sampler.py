import math
from collections import Counter

import mpmath
import pytest
from hypothesis import given, strategies as st

from corpusforge.corpus import CorpusStats, Counts, LanguageTag, Source, count_tokens
from corpusforge.sampler import DomainError, build_plan, materialize, multiplier, round_half_up

from conftest import make_doc

HI, BN, MR, EN = (LanguageTag(c) for c in ("hi", "bn", "mr", "en"))

counts = st.integers(min_value=1, max_value=10**12)
alphas = st.floats(min_value=0.0, max_value=1.0)


def test_equal_counts_give_one():
    assert multiplier(500, 500, 0.3) == 1.0


@given(counts, alphas)
def test_alpha_one_is_identity(n, extra):
    assert multiplier(n, n + int(extra * 1000), 1.0) == 1.0


def test_table8_magnitudes_against_high_precision():
    mpmath.mp.dps = 50
    oracle = mpmath.power(mpmath.mpf(1120), mpmath.mpf(7) / 10)
    got = multiplier(2.5e6, 2.8e9, 0.3)
    assert abs(got - float(oracle)) / float(oracle) < 1e-13
    assert 130 < got < 140


@pytest.mark.parametrize("args", [(0, 10, 0.3), (11, 10, 0.3), (5, 10, -0.1), (5, 10, 1.5),
                                  (5, 10, float("nan"))])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        multiplier(*args)


@given(counts, counts, alphas, st.floats(min_value=1e-3, max_value=1e3))
def test_scale_invariance(a, b, alpha, c):
    lo, hi = sorted((a, b))
    m = multiplier(lo, hi, alpha)
    assert math.isclose(multiplier(c * lo, c * hi, alpha), m, rel_tol=1e-12)


def test_single_language_plan():
    plan = build_plan({HI: 100})
    assert plan[HI].multiplier == 1.0 and plan[HI].upsampled == 100


def test_two_language_plan_against_oracle():
    plan = build_plan({HI: 100, BN: 10}, alpha=0.3)
    oracle = mpmath.power(10, mpmath.mpf("0.7"))
    assert plan[HI].multiplier == 1.0
    assert math.isclose(plan[BN].multiplier, float(oracle), rel_tol=1e-14)
    assert plan[BN].upsampled == int(mpmath.floor(oracle * 10 + mpmath.mpf("0.5")))  # 50


def test_alpha_zero_is_flat():
    plan = build_plan({HI: 100, BN: 10}, alpha=0.0)
    assert (plan[HI].multiplier, plan[BN].multiplier) == (1.0, 10.0)
    assert (plan[HI].upsampled, plan[BN].upsampled) == (100, 100)


def test_default_alpha_is_point_three():
    assert build_plan({HI: 100, BN: 10}).alpha == 0.3


def test_empty_corpus_set():
    with pytest.raises(DomainError, match="empty corpus set"):
        build_plan({HI: 0})
    with pytest.raises(DomainError, match="empty corpus set"):
        build_plan(CorpusStats())


def test_zero_count_languages_reported():
    plan = build_plan({HI: 10, MR: 0})
    assert list(plan.entries) == [HI] and plan.excluded == [MR]


def test_stats_need_a_source_choice():
    stats = CorpusStats()
    stats.add(HI, Source.WIKIPEDIA, Counts(1, 10, 50))
    stats.add(HI, Source.CRAWL, Counts(1, 90, 400))
    stats.add(BN, Source.WIKIPEDIA, Counts(1, 40, 200))
    with pytest.raises(DomainError):
        build_plan(stats)
    plan = build_plan(stats, source=Source.WIKIPEDIA)
    assert plan[HI].n == 10 and plan[BN].multiplier == 1.0


@given(st.dictionaries(st.sampled_from([HI, BN, MR, EN]), counts, min_size=1), alphas)
def test_plan_invariants(ns, alpha):
    plan = build_plan(ns, alpha)
    entries = sorted(plan.entries.values(), key=lambda e: e.n)
    assert max(entries, key=lambda e: e.n).multiplier == 1.0
    assert all(e.multiplier >= 1.0 for e in entries)
    assert all(a.multiplier >= b.multiplier for a, b in zip(entries, entries[1:]))


def test_round_half_up():
    assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 2.4999)] == [1, 2, 3, 2]


def test_plan_csv():
    csv = build_plan({HI: 100, BN: 10}).to_csv().splitlines()
    assert csv == ["lang,n,multiplier,upsampled", "bn,10,5.011872,50", "hi,100,1.000000,100"]


# -- materialize ------------------------------------------------------------

def _docs(n, lang="hi"):
    return [make_doc(f"w{i}", lang, i) for i in range(n)]


def test_m_one_is_identity():
    docs = _docs(5)
    assert list(materialize(docs, 1.0, seed=1)) == docs


def test_integral_multiplier_repeats_in_order():
    docs = _docs(4)
    assert list(materialize(docs, 3.0, seed=1)) == docs * 3


def test_fractional_pass_within_binomial_bound():
    docs = _docs(1000)
    out = list(materialize(docs, 2.5, seed=2024))
    sigma = math.sqrt(1000 * 0.5 * 0.5)
    assert abs(len(out) - 2500) <= 3 * sigma
    assert out[:2000] == docs * 2


def test_materialize_reproducible_and_order_free():
    docs = _docs(300)
    a = list(materialize(docs, 1.7, seed=9))
    assert a == list(materialize(docs, 1.7, seed=9))
    b = list(materialize(reversed(docs), 1.7, seed=9))
    assert Counter(d.id for d in a) == Counter(d.id for d in b)
    assert a != list(materialize(docs, 1.7, seed=10))


def test_materialize_rejects_m_below_one():
    with pytest.raises(DomainError):
        list(materialize(_docs(1), 0.5, seed=0))


def test_plan_total_matches_expected_materialized_words(mini_config):
    from corpusforge.pipeline import load_corpora
    corpora = load_corpora(mini_config)
    wiki = corpora.by_source(Source.WIKIPEDIA)
    plan = build_plan(count_tokens(wiki))
    expected = 0.0
    for lang, entry in plan.entries.items():
        expected += entry.multiplier * count_tokens(d for d in wiki if d.lang == lang).words(lang, Source.WIKIPEDIA)
    assert abs(plan.total_upsampled() - expected) <= len(plan.entries)

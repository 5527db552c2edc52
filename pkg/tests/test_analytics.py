import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from prestige_rank.analytics import (
    compare_group, compare_metrics, fit_power_law, pearson, rank_values,
    reference_age_profile, scatter_export, spearman, top_k_table,
)
from prestige_rank.corpus import Corpus, Document, Journal, ReferenceEdge, build_corpus
from prestige_rank.errors import AnalyticsError, EmptyYearError
from prestige_rank.jif import JifScores
from prestige_rank.prestige import SjrScores


def scores(pairs, kind="sjr"):
    ids = tuple(pairs)
    vals = np.array([np.nan if v is None else v for v in pairs.values()], dtype=float)
    return SjrScores(ids, vals, 1.0) if kind == "sjr" else JifScores(ids, vals)


def test_rank_values_examples():
    r = rank_values({"A": 3, "B": 1, "C": 2})
    assert r.rank_of() == {"A": 1, "C": 2, "B": 3}
    assert rank_values({"A": 2, "B": 2}, "average").rank_of() == {"A": 1.5, "B": 1.5}
    assert rank_values({"B": 2, "A": 2}).journal_ids == ("A", "B")
    assert rank_values({"A": 2, "B": 2, "C": 1}).rank_of() == {"A": 1, "B": 1, "C": 3}
    assert rank_values({"A": None, "B": 1.0}).journal_ids == ("B",)
    with pytest.raises(AnalyticsError):
        rank_values({})


def test_rank_permutation():
    rng = np.random.default_rng(0)
    vals = rng.random(1000)
    r = rank_values({f"J{k}": v for k, v in enumerate(vals)})
    assert sorted(r.ranks) == list(range(1, 1001))


# Hand computations.  Spearman without ties: 1 - 6*sum(d^2) / (n (n^2 - 1)).
SPEARMAN_CASES = [
    ([1, 2, 3, 4], [2, 1, 4, 3], 1 - 6 * 4 / (4 * 15)),            # 0.6
    ([1, 2, 3, 4, 5], [2, 1, 4, 3, 5], 1 - 6 * 4 / (5 * 24)),        # 0.8
    ([10, 20, 30, 40, 50], [50, 40, 30, 20, 10], -1.0),
    ([3, 1, 2], [9, 1, 4], 1.0),
    # ranks [1, 2.5, 2.5, 4] vs [1, 2, 3, 4]: Sxy = 4.5, Sxx = 4.5, Syy = 5
    ([1, 2, 2, 3], [1, 2, 3, 4], 4.5 / math.sqrt(4.5 * 5)),
]

# x = [1,2,3], y = [1,2,4]: Sxy = 3, Sxx = 2, Syy = 14/3
PEARSON_CASES = [
    ([1, 2, 3], [1, 2, 4], 3 / math.sqrt(2 * 14 / 3)),
    ([1, 2, 3, 4], [1, 3, 2, 4], 4 / 5),
    ([1, 2, 3], [5, 7, 9], 1.0),
    ([1, 2, 3], [-1, -2, -3], -1.0),
    ([0, 1, 0, 1], [1, 0, 1, 0], -1.0),
]


@pytest.mark.parametrize("x,y,expected", SPEARMAN_CASES)
def test_spearman_hand(x, y, expected):
    assert spearman(x, y) == pytest.approx(expected, abs=1e-12)
    assert spearman(x, y) == pytest.approx(scipy.stats.spearmanr(x, y)[0], abs=1e-12)


@pytest.mark.parametrize("x,y,expected", PEARSON_CASES)
def test_pearson_hand(x, y, expected):
    assert pearson(x, y) == pytest.approx(expected, abs=1e-12)


def test_degenerate_correlations():
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    assert spearman([2, 2], [1, 3]) is None
    with pytest.raises(AnalyticsError):
        spearman([1], [1])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=40))
@settings(max_examples=200)
def test_correlation_bounds(pairs):
    x, y = zip(*pairs)
    for fn in (pearson, spearman):
        r = fn(x, y)
        assert r is None or -1.0 <= r <= 1.0


@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=30, unique=True))
def test_spearman_monotone(x):
    x = np.array(x, dtype=float)
    assert spearman(x, np.exp(x / 50)) == pytest.approx(1.0, abs=1e-12)
    assert spearman(x, -x**3) == pytest.approx(-1.0, abs=1e-12)


@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=30, unique=True),
       st.floats(0.1, 50), st.floats(-50, 50))
def test_pearson_affine_invariance(x, a, b):
    x = np.array(x, dtype=float) / 10
    y = np.sin(x) + x / 10
    base = pearson(x, y)
    if base is None:
        return
    assert pearson(a * x + b, y) == pytest.approx(base, abs=1e-12)
    assert pearson(x, a * y + b) == pytest.approx(base, abs=1e-12)


def _power_series(slope, n=200, scale=10.0):
    return {f"J{k:04d}": scale * k**slope for k in range(1, n + 1)}


@pytest.mark.parametrize("slope", [-0.5, -1.3, -2.0])
def test_power_law_exact(slope):
    fit = fit_power_law(rank_values(_power_series(slope)))
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(1.0, abs=1e-9)
    assert fit.mean_squared_error < 1e-20 and fit.points_used == 200


def test_power_law_constant():
    fit = fit_power_law({f"J{k}": 4.0 for k in range(10)})
    assert fit.slope == 0.0


def test_power_law_noise_matches_lstsq():
    rng = np.random.default_rng(2)
    vals = np.sort(10 * np.arange(1, 301) ** -1.1 * np.exp(rng.normal(0, 0.3, 300)))[::-1]
    fit = fit_power_law({f"J{k:03d}": v for k, v in enumerate(vals)})
    A = np.column_stack([np.log10(np.arange(1, 301)), np.ones(300)])
    (slope, intercept), res, *_ = np.linalg.lstsq(A, np.log10(vals), rcond=None)
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.intercept == pytest.approx(intercept, abs=1e-12)
    assert fit.mean_squared_error == pytest.approx(res[0] / 300, abs=1e-12)


def test_power_law_skips_zeros():
    series = {"A": 8.0, "B": 4.0, "C": 0.0, "D": 0.0}
    fit = fit_power_law(series)
    assert fit.points_used == 2
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)   # 8 -> 4 from rank 1 -> 2
    with pytest.raises(AnalyticsError):
        fit_power_law({"A": 1.0, "B": 0.0})


def _grouped_corpus(n=50, n_areas=3, seed=0):
    rng = np.random.default_rng(seed)
    journals = [Journal(f"J{k:02d}", f"T{k}", (f"S{k % n_areas}",)) for k in range(n)]
    areas = {f"S{a}": (f"A{a}", "CAT") for a in range(n_areas)}
    corpus = Corpus({j.id: j for j in journals}, {}, [], areas)
    sjr = {j.id: float(v) for j, v in zip(journals, rng.lognormal(size=n))}
    jif = {k: v * float(rng.lognormal(sigma=0.5)) for k, v in sjr.items()}
    return corpus, scores(sjr), scores(jif, "jif")


def test_compare_identical_metrics():
    corpus, sjr, _ = _grouped_corpus()
    same = JifScores(sjr.journal_ids, sjr.values.copy())
    for level in ("overall", "area", "specific_area"):
        report = compare_metrics(sjr, same, corpus, level)
        for g in report.groups:
            assert g.spearman == pytest.approx(1.0, abs=1e-12)
            assert g.pearson == pytest.approx(1.0, abs=1e-12)


def test_compare_matches_groupwise_recomputation():
    corpus, sjr, jif = _grouped_corpus()
    report = compare_metrics(sjr, jif, corpus, "area")
    assert [g.group for g in report.groups] == ["A0", "A1", "A2"]
    a, b = sjr.as_dict(), jif.as_dict()
    for g in report.groups:
        k = int(g.group[1:])
        ids = [j for j in sorted(a) if int(j[1:]) % 3 == k]
        x = [a[j] for j in ids]
        y = [b[j] for j in ids]
        assert g.n_journals == len(ids)
        assert g.spearman == pytest.approx(scipy.stats.spearmanr(x, y)[0], abs=1e-12)
        assert g.pearson == pytest.approx(scipy.stats.pearsonr(x, y)[0], abs=1e-12)
        assert g.sjr_mean == pytest.approx(np.mean(x), rel=1e-12)
        assert g.sjr_sd == pytest.approx(np.std(x, ddof=1), rel=1e-12)
    spear = [g.spearman for g in report.groups]
    assert report.summary["spearman"]["mean"] == pytest.approx(np.mean(spear), abs=1e-15)
    assert report.summary["spearman"]["sd"] == pytest.approx(np.std(spear, ddof=1), abs=1e-15)


def test_overall_equals_single_group():
    corpus, sjr, jif = _grouped_corpus()
    overall = compare_metrics(sjr, jif, corpus, "overall").groups[0]
    assert overall == compare_group("overall", sjr, jif)


def test_small_group_skipped_and_missing_dropped():
    corpus = Corpus({"A": Journal("A", "", ("S1",)), "B": Journal("B", "", ("S1",)),
                     "C": Journal("C", "", ("S2",)), "D": Journal("D", "", ("S1",))}, {}, [])
    sjr = scores({"A": 1.0, "B": 2.0, "C": 3.0, "D": None})
    jif = scores({"A": 1.5, "B": 2.5, "C": 3.5, "D": 1.0}, "jif")
    report = compare_metrics(sjr, jif, corpus, "specific_area")
    assert [g.group for g in report.groups] == ["S1"]
    assert report.groups[0].n_dropped == 1
    assert any("'S2'" in note for note in report.notes)


def test_no_area_codes_single_unclassified_group():
    corpus = Corpus({k: Journal(k, "") for k in "ABC"}, {}, [])
    sjr = scores({"A": 1.0, "B": 2.0, "C": 3.0})
    report = compare_metrics(sjr, scores({"A": 1, "B": 3, "C": 2}, "jif"), corpus,
                             "specific_area")
    assert [g.group for g in report.groups] == ["unclassified"]


def test_top_k_single():
    sjr = scores({"A": 2.0, "B": 1.0})
    jif = scores({"A": 9.0, "B": 3.0}, "jif")
    table = top_k_table(sjr, jif, 1)
    assert [r.journal_id for r in table.by_sjr] == ["A"] == [r.journal_id for r in table.by_jif]
    assert table.overlap == 1


def test_top_k_overlap_oracle():
    rng = np.random.default_rng(12)
    for _ in range(10):
        s = {f"J{k}": float(v) for k, v in enumerate(rng.random(10))}
        j = {f"J{k}": float(v) for k, v in enumerate(rng.random(10))}
        table = top_k_table(scores(s), scores(j, "jif"), 4)
        top = lambda d: set(sorted(d, key=d.get, reverse=True)[:4])
        assert table.overlap == len(top(s) & top(j))
        for row in table.by_sjr:
            assert row.rank_jif == 1 + sum(v > j[row.journal_id] for v in j.values())


def test_top_k_truncated(caplog):
    table = top_k_table(scores({"A": 1.0, "B": None}), scores({"A": 1.0, "B": 2.0}, "jif"), 5)
    assert table.truncated and len(table.by_sjr) == 1 and len(table.by_jif) == 2
    assert "top-5" in caplog.text
    assert table.by_jif[0].rank_sjr is None


def test_scatter():
    assert scatter_export(scores({"A": None}), scores({"A": 1.0}, "jif")) == []
    rows = scatter_export(scores({"A": 1.0, "B": 10.0, "C": 0.0, "D": None}),
                          scores({"A": 2.0, "B": 100.0, "C": 1.0, "D": 4.0}, "jif"))
    assert [r.journal_id for r in rows] == ["A", "B", "C"]
    assert rows[1].log10_sjr == 1.0 and rows[1].log10_jif3y == 2.0
    assert rows[2].log10_sjr is None


def _age_corpus(cited_years, unresolved=0):
    journals = [Journal("A", "", ("S1",)), Journal("B", "", ("S2",))]
    docs = [Document("p", "A", 2007, "article")]
    docs += [Document(f"c{k}", "B", y, "article") for k, y in enumerate(cited_years)]
    refs = [ReferenceEdge("p", f"c{k}") for k in range(len(cited_years))]
    refs += [ReferenceEdge("p", f"missing{k}") for k in range(unresolved)]
    return build_corpus(journals, docs, refs)


def test_age_profile_previous_year():
    profile = reference_age_profile(_age_corpus([2006] * 5), 2007, 12)
    g = profile.group("overall")
    assert g.percentages[0] == 100.0 and sum(g.percentages[1:]) == 0
    assert g.coverage == 100.0


def test_age_profile_half_unresolved():
    corpus = _age_corpus([2006, 2005, 2001, 1980], unresolved=4)
    g = reference_age_profile(corpus, 2007, 12).group("overall")
    # 3 of 8 references fall within 12 years; the 1980 one is beyond the horizon.
    assert g.coverage == pytest.approx(100 * 3 / 8) and g.coverage <= 50
    assert g.unresolved_refs == 4 and g.beyond_horizon_refs == 1


def test_age_profile_empty_and_grouped():
    g = reference_age_profile(_age_corpus([]), 2007).group("overall")
    assert g.percentages is None and g.coverage is None
    profile = reference_age_profile(_age_corpus([2006]), 2007, 3, "specific_area")
    assert profile.group("S2").percentages is None
    assert profile.group("S1").percentages == [100.0, 0.0, 0.0]
    with pytest.raises(EmptyYearError):
        reference_age_profile(_age_corpus([2006]), 1999)


def test_age_profile_accounts_for_every_reference(fixture_corpus):
    horizon = 2007 - 1800
    for g in reference_age_profile(fixture_corpus, 2007, horizon, "area").groups:
        unres = 100 * g.unresolved_refs / g.total_refs
        other = 100 * g.beyond_horizon_refs / g.total_refs
        assert g.coverage <= 100
        assert g.coverage + unres + other == pytest.approx(100, abs=1e-12)

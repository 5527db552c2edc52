"""Statistical comparison of SJR and JIF(3y): ranks, correlations, fits, tables."""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .corpus import group_members
from .errors import AnalyticsError, EmptyYearError
from .formats import json_float

log = logging.getLogger(__name__)

TIE_POLICIES = ("competition", "average")
GROUPING_LEVELS = ("overall", "area", "specific_area")


def _defined(values):
    """Drop ``None``/NaN entries from a ``{journal_id: value}`` mapping."""
    out = {}
    for jid, v in values.items():
        if v is None:
            continue
        v = float(v)
        if not math.isnan(v):
            out[jid] = v
    return out


def _as_mapping(scores):
    return scores.as_dict() if hasattr(scores, "as_dict") else dict(scores)


@dataclass(frozen=True)
class RankedSeries:
    """Journals sorted by value (descending), ties ordered by journal id.

    ``ranks`` follow the tie policy; positions ``1..M`` are the sort order
    itself and are what value-vs-rank fits use.
    """

    journal_ids: tuple
    values: np.ndarray
    ranks: np.ndarray
    tie_policy: str = "competition"

    def __len__(self):
        return len(self.journal_ids)

    @property
    def positions(self):
        return np.arange(1, len(self.journal_ids) + 1, dtype=np.float64)

    def rank_of(self):
        return {jid: float(r) for jid, r in zip(self.journal_ids, self.ranks)}


def _tie_ranks(sorted_values, policy):
    """Ranks for values already sorted descending."""
    m = len(sorted_values)
    ranks = np.empty(m, dtype=np.float64)
    start = 0
    while start < m:
        stop = start + 1
        while stop < m and sorted_values[stop] == sorted_values[start]:
            stop += 1
        if policy == "competition":
            ranks[start:stop] = start + 1
        else:
            ranks[start:stop] = (start + 1 + stop) / 2.0
        start = stop
    return ranks


def rank_values(values, tie_policy="competition") -> RankedSeries:
    """Rank a ``{journal_id: value}`` mapping, best (largest) first.

    Undefined values are skipped.  ``competition`` gives tied journals the
    same (lowest) rank; ``average`` gives them the mean of their positions.
    """
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"tie_policy must be one of {TIE_POLICIES}")
    values = _defined(_as_mapping(values))
    if not values:
        raise AnalyticsError("nothing to rank")
    items = sorted(values.items(), key=lambda kv: (-kv[1], kv[0]))
    ids = tuple(k for k, _ in items)
    vals = np.array([v for _, v in items], dtype=np.float64)
    return RankedSeries(ids, vals, _tie_ranks(vals, tie_policy), tie_policy)


def _average_ranks(x):
    order = np.argsort(-x, kind="stable")
    ranks = np.empty(len(x), dtype=np.float64)
    ranks[order] = _tie_ranks(x[order], "average")
    return ranks


def _paired_arrays(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalyticsError("correlation inputs must be 1-d and of equal length")
    if len(x) < 2:
        raise AnalyticsError("need at least two pairs")
    return x, y


def pearson(x, y) -> Optional[float]:
    """Product-moment correlation; ``None`` when either input is constant."""
    x, y = _paired_arrays(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        return None
    # Separate roots: sxx * syy underflows for tiny spreads.
    r = np.dot(dx, dy) / (math.sqrt(sxx) * math.sqrt(syy))
    return float(min(1.0, max(-1.0, r)))


def spearman(x, y) -> Optional[float]:
    """Pearson correlation of average-tie ranks."""
    x, y = _paired_arrays(x, y)
    return pearson(_average_ranks(x), _average_ranks(y))


def paired(a, b):
    """Align two score sets on journals where both are defined.

    Returns ``(journal_ids, a_values, b_values, n_dropped)``.
    """
    a = _as_mapping(a)
    b = _as_mapping(b)
    da, db = _defined(a), _defined(b)
    ids = sorted(set(da) & set(db))
    dropped = len(set(a) | set(b)) - len(ids)
    return (
        ids,
        np.array([da[k] for k in ids], dtype=np.float64),
        np.array([db[k] for k in ids], dtype=np.float64),
        dropped,
    )


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through ``(log10 position, log10 value)``."""

    slope: float
    intercept: float
    mean_squared_error: float
    points_used: int

    def predict(self, rank):
        return 10.0 ** (self.intercept + self.slope * np.log10(rank))


def fit_power_law(series) -> PowerLawFit:
    """Fit ``value ~ 10**intercept * position**slope`` on the positive values.

    Zero values are excluded from the fit but keep their positions, so the
    remaining points are not renumbered.
    """
    if not isinstance(series, RankedSeries):
        series = rank_values(series)
    keep = series.values > 0
    if keep.sum() < 2:
        raise AnalyticsError("power-law fit needs at least two positive values")
    lx = np.log10(series.positions[keep])
    ly = np.log10(series.values[keep])
    mx, my = lx.mean(), ly.mean()
    dx = lx - mx
    slope = np.dot(dx, ly - my) / np.dot(dx, dx)
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    return PowerLawFit(float(slope), float(intercept), float(np.mean(resid**2)), int(keep.sum()))


def _mean_sd(values):
    values = [v for v in values if v is not None]
    if not values:
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if len(arr) > 1 else None
    return float(arr.mean()), sd


@dataclass
class GroupComparison:
    group: str
    n_journals: int
    n_dropped: int
    spearman: Optional[float]
    pearson: Optional[float]
    sjr_mean: float
    sjr_sd: Optional[float]
    jif_mean: float
    jif_sd: Optional[float]
    sjr_fit: Optional[PowerLawFit]
    jif_fit: Optional[PowerLawFit]


@dataclass
class ComparisonReport:
    level: str
    groups: list
    summary: dict
    notes: list = field(default_factory=list)

    def group(self, code):
        for g in self.groups:
            if g.group == code:
                return g
        raise KeyError(code)

    def to_dict(self):
        def clean(obj):
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, list):
                return [clean(v) for v in obj]
            if isinstance(obj, float):
                return json_float(obj)
            return obj

        return clean({
            "level": self.level,
            "groups": [asdict(g) for g in self.groups],
            "summary": self.summary,
            "notes": list(self.notes),
        })

    CSV_HEADER = (
        "group", "n_journals", "n_dropped", "spearman", "pearson",
        "sjr_mean", "sjr_sd", "jif3y_mean", "jif3y_sd",
        "sjr_slope", "sjr_intercept", "sjr_mse",
        "jif3y_slope", "jif3y_intercept", "jif3y_mse",
    )

    def csv_rows(self):
        for g in self.groups:
            fits = []
            for fit in (g.sjr_fit, g.jif_fit):
                fits += [None] * 3 if fit is None else [
                    fit.slope, fit.intercept, fit.mean_squared_error]
            yield [g.group, g.n_journals, g.n_dropped, g.spearman, g.pearson,
                   g.sjr_mean, g.sjr_sd, g.jif_mean, g.jif_sd, *fits]


def _fit_or_none(values):
    try:
        return fit_power_law(rank_values(values))
    except AnalyticsError:
        return None


def compare_group(code, sjr, jif, journal_ids=None):
    """Statistics for one group; ``None`` when fewer than two journals pair up."""
    a, b = _as_mapping(sjr), _as_mapping(jif)
    if journal_ids is not None:
        a = {k: a.get(k) for k in journal_ids}
        b = {k: b.get(k) for k in journal_ids}
    ids, x, y, dropped = paired(a, b)
    if len(ids) < 2:
        return None
    sm, ssd = _mean_sd(list(x))
    jm, jsd = _mean_sd(list(y))
    return GroupComparison(
        code, len(ids), dropped, spearman(x, y), pearson(x, y),
        sm, ssd, jm, jsd,
        _fit_or_none(dict(zip(ids, x))), _fit_or_none(dict(zip(ids, y))),
    )


def compare_metrics(sjr, jif, corpus, grouping_level="overall") -> ComparisonReport:
    """Correlations and distribution statistics of SJR vs JIF(3y) per group.

    Groups with fewer than two journals carrying both metrics are skipped
    and listed in ``notes``.  The summary averages per-group values with
    equal weight per group.
    """
    if grouping_level not in GROUPING_LEVELS:
        raise ValueError(f"grouping_level must be one of {GROUPING_LEVELS}")
    if tuple(sjr.journal_ids) != tuple(jif.journal_ids):
        raise AnalyticsError("score sets come from different networks")
    members = group_members(corpus, grouping_level, list(sjr.journal_ids))
    groups, notes = [], []
    for code, ids in members.items():
        result = compare_group(code, sjr, jif, ids)
        if result is None:
            notes.append(f"group {code!r} skipped: fewer than 2 journals with both metrics")
        else:
            groups.append(result)

    def stat(fn):
        return _mean_sd([fn(g) for g in groups])

    summary = {"n_groups": len(groups)}
    for key, fn in (
        ("spearman", lambda g: g.spearman),
        ("pearson", lambda g: g.pearson),
        ("sjr_mean", lambda g: g.sjr_mean),
        ("jif3y_mean", lambda g: g.jif_mean),
        ("sjr_mse", lambda g: g.sjr_fit and g.sjr_fit.mean_squared_error),
        ("jif3y_mse", lambda g: g.jif_fit and g.jif_fit.mean_squared_error),
        ("sjr_slope", lambda g: g.sjr_fit and g.sjr_fit.slope),
        ("jif3y_slope", lambda g: g.jif_fit and g.jif_fit.slope),
    ):
        mean, sd = stat(fn)
        summary[key] = {"mean": mean, "sd": sd}
    return ComparisonReport(grouping_level, groups, summary, notes)


@dataclass(frozen=True)
class TopRow:
    journal_id: str
    title: str
    sjr: Optional[float]
    jif3y: Optional[float]
    rank_sjr: Optional[int]
    rank_jif: Optional[int]


@dataclass
class TopKTable:
    k: int
    by_sjr: list
    by_jif: list
    overlap: int
    truncated: bool

    CSV_HEADER = ("listing", "position", "journal_id", "title", "sjr", "jif3y",
                  "rank_sjr", "rank_jif3y")

    def csv_rows(self):
        for name, rows in (("sjr", self.by_sjr), ("jif3y", self.by_jif)):
            for pos, r in enumerate(rows, start=1):
                yield [name, pos, r.journal_id, r.title, r.sjr, r.jif3y,
                       r.rank_sjr, r.rank_jif]


def top_k_table(sjr, jif, k, titles=None) -> TopKTable:
    """The ``k`` best journals by each metric, each row carrying both ranks."""
    if k < 1:
        raise ValueError("k must be >= 1")
    titles = titles or {}
    a, b = _defined(_as_mapping(sjr)), _defined(_as_mapping(jif))
    rs = rank_values(a) if a else None
    rj = rank_values(b) if b else None
    rank_s = {k_: int(r) for k_, r in rs.rank_of().items()} if rs else {}
    rank_j = {k_: int(r) for k_, r in rj.rank_of().items()} if rj else {}
    truncated = len(a) < k or len(b) < k
    if truncated:
        log.warning("top-%d requested but only %d SJR / %d JIF(3y) values defined",
                    k, len(a), len(b))

    def row(jid):
        return TopRow(jid, titles.get(jid, ""), a.get(jid), b.get(jid),
                      rank_s.get(jid), rank_j.get(jid))

    top_s = [row(j) for j in (rs.journal_ids[:k] if rs else ())]
    top_j = [row(j) for j in (rj.journal_ids[:k] if rj else ())]
    overlap = len({r.journal_id for r in top_s} & {r.journal_id for r in top_j})
    return TopKTable(k, top_s, top_j, overlap, truncated)


def _log10_or_none(v):
    return math.log10(v) if v > 0 else None


@dataclass(frozen=True)
class ScatterRow:
    journal_id: str
    sjr: float
    jif3y: float
    log10_sjr: Optional[float]
    log10_jif3y: Optional[float]


SCATTER_HEADER = ("journal_id", "sjr", "jif3y", "log10_sjr", "log10_jif3y")


def scatter_export(sjr, jif):
    """One row per journal with both metrics defined, plus log10 coordinates."""
    ids, x, y, _ = paired(sjr, jif)
    return [
        ScatterRow(jid, float(s), float(j), _log10_or_none(s), _log10_or_none(j))
        for jid, s, j in zip(ids, x, y)
    ]


RANK_DIST_HEADER = ("metric", "position", "rank", "journal_id", "value",
                    "log10_position", "log10_value")


def rank_distribution(scores, metric):
    """Value-vs-rank rows usable for both semi-log and log-log plots."""
    defined = _defined(_as_mapping(scores))
    if not defined:
        return []
    series = rank_values(defined)
    return [
        [metric, pos, int(rank), jid, value, math.log10(pos), _log10_or_none(value)]
        for pos, (jid, value, rank) in enumerate(
            zip(series.journal_ids, series.values, series.ranks), start=1)
    ]


@dataclass
class GroupAgeProfile:
    group: str
    total_refs: int
    percentages: Optional[list]
    coverage: Optional[float]
    unresolved_refs: int
    beyond_horizon_refs: int


@dataclass
class AgeProfile:
    target_year: int
    horizon: int
    level: str
    groups: list

    def group(self, code):
        for g in self.groups:
            if g.group == code:
                return g
        raise KeyError(code)

    def csv_header(self):
        return ("group", "total_refs", *(f"age_{a}" for a in range(1, self.horizon + 1)),
                "coverage")

    def csv_rows(self):
        for g in self.groups:
            pct = g.percentages or [None] * self.horizon
            yield [g.group, g.total_refs, *pct, g.coverage]


def reference_age_profile(corpus, target_year, horizon=12, grouping_level="overall"):
    """Share of target-year references citing papers 1..horizon years older.

    Percentages are over *all* references of the group's target-year
    documents, unresolved ones included, so coverage can fall short of 100.
    Groups issuing no references get a null row.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if grouping_level not in GROUPING_LEVELS:
        raise ValueError(f"grouping_level must be one of {GROUPING_LEVELS}")
    if not corpus.documents_in_year(target_year):
        raise EmptyYearError(f"no documents published in {target_year}")
    docs = corpus.documents
    ages_by_journal = {}
    for ref in corpus.references:
        citing = docs[ref.citing_doc_id]
        if citing.year != target_year:
            continue
        cited = docs.get(ref.cited_doc_id)
        age = None if cited is None else target_year - cited.year
        ages_by_journal.setdefault(citing.journal_id, Counter())[age] += 1

    groups = []
    for code, ids in group_members(corpus, grouping_level).items():
        ages = Counter()
        for jid in ids:
            ages.update(ages_by_journal.get(jid, {}))
        total = sum(ages.values())
        unresolved = ages.get(None, 0)
        in_range = [ages.get(a, 0) for a in range(1, horizon + 1)]
        beyond = total - unresolved - sum(in_range)
        if total == 0:
            groups.append(GroupAgeProfile(code, 0, None, None, 0, 0))
            continue
        pct = [100.0 * c / total for c in in_range]
        groups.append(GroupAgeProfile(code, total, pct, 100.0 * sum(in_range) / total,
                                      unresolved, beyond))
    return AgeProfile(target_year, horizon, grouping_level, groups)

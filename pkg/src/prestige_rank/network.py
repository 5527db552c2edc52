"""Windowed journal citation network for a single target year."""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import EmptyYearError, NetworkError
from .formats import fmt_float, read_json, read_rows, write_json, write_rows

log = logging.getLogger(__name__)

ART_BASES = ("window", "target_year")


@dataclass(frozen=True)
class NetworkParams:
    window_years: int = 3
    self_cite_cap: float = 0.33
    art_basis: str = "window"

    def __post_init__(self):
        if self.window_years < 1:
            raise ValueError("window_years must be >= 1")
        if not 0.0 <= self.self_cite_cap <= 1.0:
            raise ValueError("self_cite_cap must lie in [0, 1]")
        if self.art_basis not in ART_BASES:
            raise ValueError(f"art_basis must be one of {ART_BASES}")


@dataclass(frozen=True, eq=False)
class CitationNetwork:
    """Journal-level citation counts.

    ``C[j, i]`` holds the windowed references from journal ``j`` to journal
    ``i``; ``C_total[j]`` counts every reference issued by ``j`` in the
    target year, whatever the cited year and whether or not it resolved.
    ``self_cite_cap`` is ``None`` until :func:`cap_self_citations` runs.
    """

    journal_ids: tuple
    C: sp.csr_matrix
    C_total: np.ndarray
    art: np.ndarray
    target_year: Optional[int] = None
    window: int = 3
    self_cite_cap: Optional[float] = None
    art_basis: str = "window"

    @property
    def n(self):
        return len(self.journal_ids)

    @property
    def dangling_mask(self):
        return _dangling_mask(self.C)

    @property
    def dangling(self):
        return dangling_set(self)

    def index(self):
        return {jid: k for k, jid in enumerate(self.journal_ids)}

    def received(self):
        """Column sums of ``C``: windowed citations received per journal."""
        return np.asarray(self.C.sum(axis=0)).ravel()

    def __eq__(self, other):
        if not isinstance(other, CitationNetwork):
            return NotImplemented
        return (
            self.journal_ids == other.journal_ids
            and self.C.shape == other.C.shape
            and (self.C != other.C).nnz == 0
            and np.array_equal(self.C_total, other.C_total)
            and np.array_equal(self.art, other.art)
            and self.target_year == other.target_year
            and self.window == other.window
            and self.self_cite_cap == other.self_cite_cap
            and self.art_basis == other.art_basis
        )


def _assemble(n, counts):
    """CSR matrix from a ``{(row, col): weight}`` mapping, in sorted key order."""
    if counts:
        keys = sorted(counts)
        rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        data = np.fromiter((counts[k] for k in keys), dtype=np.float64, count=len(keys))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0, dtype=np.float64)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n), dtype=np.float64)
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def make_network(journal_ids, C, C_total, art, **meta):
    """Wrap raw arrays into a :class:`CitationNetwork`, checking invariants."""
    journal_ids = tuple(journal_ids)
    n = len(journal_ids)
    if n < 1:
        raise NetworkError("a network needs at least one journal")
    C = sp.csr_matrix(C, dtype=np.float64, shape=(n, n))
    C.eliminate_zeros()
    C.sort_indices()
    C_total = np.asarray(C_total, dtype=np.float64)
    art = np.asarray(art, dtype=np.int64)
    if C_total.shape != (n,) or art.shape != (n,):
        raise NetworkError("C_total and art must have one entry per journal")
    if C.nnz and C.data.min() < 0:
        raise NetworkError("negative citation weight")
    if (art < 0).any():
        raise NetworkError("negative primary-item count")
    row_sums = np.asarray(C.sum(axis=1)).ravel()
    if (row_sums > C_total * (1 + 1e-12) + 1e-12).any():
        bad = journal_ids[int(np.argmax(row_sums - C_total))]
        raise NetworkError(f"windowed references exceed total references for {bad!r}")
    return CitationNetwork(journal_ids, C, C_total, art, **meta)


def build_network(corpus, target_year, params=NetworkParams()) -> CitationNetwork:
    """Count windowed journal-to-journal references issued in ``target_year``.

    The cap on self-citations is *not* applied here.
    """
    citing_docs = {d.id for d in corpus.documents_in_year(target_year)}
    if not citing_docs:
        raise EmptyYearError(f"no documents published in {target_year}")

    journal_ids = tuple(sorted(corpus.journals))
    index = {jid: k for k, jid in enumerate(journal_ids)}
    first, last = target_year - params.window_years, target_year - 1

    counts = Counter()
    totals = np.zeros(len(journal_ids), dtype=np.float64)
    for ref in corpus.references:
        if ref.citing_doc_id not in citing_docs:
            continue
        j = index[corpus.documents[ref.citing_doc_id].journal_id]
        totals[j] += 1.0
        cited = corpus.documents.get(ref.cited_doc_id)
        if cited is not None and first <= cited.year <= last:
            counts[j, index[cited.journal_id]] += 1

    if params.art_basis == "window":
        art_years = range(first, last + 1)
    else:
        art_years = (target_year,)
    art_map = corpus.art_counts(art_years)
    art = np.array([art_map[jid] for jid in journal_ids], dtype=np.int64)

    net = make_network(
        journal_ids, _assemble(len(journal_ids), counts), totals, art,
        target_year=target_year, window=params.window_years, art_basis=params.art_basis,
    )
    log.info(
        "network %d: %d journals, %d links, %d dangling",
        target_year, net.n, net.C.nnz, int(net.dangling_mask.sum()),
    )
    return net


def cap_self_citations(net, cap) -> CitationNetwork:
    """Limit each journal's self-weight to ``cap * C_total[j]`` (real-valued)."""
    if not 0.0 <= cap <= 1.0:
        raise ValueError("cap must lie in [0, 1]")
    coo = net.C.tocoo()
    data = coo.data.copy()
    diag = coo.row == coo.col
    data[diag] = np.minimum(data[diag], cap * net.C_total[coo.row[diag]])
    C = sp.csr_matrix((data, (coo.row, coo.col)), shape=net.C.shape)
    C.eliminate_zeros()
    C.sort_indices()
    return replace(net, C=C, self_cite_cap=cap)


def _dangling_mask(C):
    coo = C.tocoo()
    off = (coo.row != coo.col) & (coo.data > 0)
    linked = np.zeros(C.shape[0], dtype=bool)
    linked[coo.row[off]] = True
    return ~linked


def dangling_set(net):
    """Journals with no windowed reference to any *other* journal."""
    return frozenset(int(k) for k in np.flatnonzero(_dangling_mask(net.C)))


EDGES_HEADER = ("citing_journal_id", "cited_journal_id", "weight")
STATS_HEADER = ("journal_id", "total_refs", "art_count", "dangling_flag")
AGG_EDGES_HEADER = ("citing_journal_id", "cited_journal_id", "count", "window_flag")
AGG_STATS_HEADER = ("journal_id", "total_refs", "art_count")


def write_snapshot(net, directory):
    directory = Path(directory)
    coo = net.C.tocoo()
    order = np.lexsort((coo.col, coo.row))
    ids = net.journal_ids
    write_rows(
        directory / "edges.csv", "edges", EDGES_HEADER,
        ([ids[coo.row[k]], ids[coo.col[k]], fmt_float(coo.data[k])] for k in order),
    )
    mask = net.dangling_mask
    write_rows(
        directory / "journal_stats.csv", "journal_stats", STATS_HEADER,
        ([jid, fmt_float(net.C_total[k]), int(net.art[k]), int(mask[k])]
         for k, jid in enumerate(ids)),
    )
    write_json(directory / "network.json", "network", {
        "target_year": net.target_year,
        "window": net.window,
        "self_cite_cap": net.self_cite_cap,
        "art_basis": net.art_basis,
        "n_journals": net.n,
    })
    return directory


def read_snapshot(directory) -> CitationNetwork:
    directory = Path(directory)
    meta = read_json(directory / "network.json", "network")
    ids, totals, art, flags = [], [], [], []
    for _, row in read_rows(directory / "journal_stats.csv", STATS_HEADER, "journal_stats"):
        ids.append(row["journal_id"])
        totals.append(float(row["total_refs"]))
        art.append(int(row["art_count"]))
        flags.append(row["dangling_flag"] == "1")
    index = {jid: k for k, jid in enumerate(ids)}
    weights = {}
    for lineno, row in read_rows(directory / "edges.csv", EDGES_HEADER, "edges"):
        try:
            key = index[row["citing_journal_id"]], index[row["cited_journal_id"]]
        except KeyError as exc:
            raise NetworkError(f"{directory / 'edges.csv'}:{lineno}: unknown journal {exc}") from None
        weights[key] = float(row["weight"])
    net = make_network(
        ids, _assemble(len(ids), weights), totals, art,
        target_year=meta["target_year"], window=meta["window"],
        self_cite_cap=meta["self_cite_cap"], art_basis=meta["art_basis"],
    )
    if list(net.dangling_mask) != flags:
        raise NetworkError(f"{directory}: dangling_flag column disagrees with edges")
    return net


def _parse_flag(text, path, lineno):
    value = text.strip().lower()
    if value in ("1", "true", "yes"):
        return True
    if value in ("0", "false", "no"):
        return False
    raise NetworkError(f"{path}:{lineno}: bad window_flag {text!r}")


def load_aggregated(edges_path, stats_path, target_year=None, window=3) -> CitationNetwork:
    """Build a network from pre-aggregated journal-level counts.

    Rows with ``window_flag`` 0 describe out-of-window references; they are
    already part of ``total_refs`` and create no link.
    """
    ids, totals, art = [], [], []
    for lineno, row in read_rows(stats_path, AGG_STATS_HEADER):
        try:
            totals.append(float(row["total_refs"]))
            art.append(int(row["art_count"]))
        except ValueError as exc:
            raise NetworkError(f"{stats_path}:{lineno}: {exc}") from None
        ids.append(row["journal_id"].strip())
    order = sorted(range(len(ids)), key=ids.__getitem__)
    ids = [ids[k] for k in order]
    if len(set(ids)) != len(ids):
        raise NetworkError(f"{stats_path}: duplicate journal ids")
    totals = [totals[k] for k in order]
    art = [art[k] for k in order]
    index = {jid: k for k, jid in enumerate(ids)}
    counts = Counter()
    for lineno, row in read_rows(edges_path, AGG_EDGES_HEADER):
        if not _parse_flag(row["window_flag"], edges_path, lineno):
            continue
        try:
            key = index[row["citing_journal_id"].strip()], index[row["cited_journal_id"].strip()]
        except KeyError as exc:
            raise NetworkError(f"{edges_path}:{lineno}: unknown journal {exc}") from None
        counts[key] += float(row["count"])
    return make_network(
        ids, _assemble(len(ids), counts), totals, art,
        target_year=target_year, window=window,
    )

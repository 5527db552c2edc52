"""Loading, validation and indexing of document-level bibliographic data."""

import errno
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

from .errors import CorpusParseError, DuplicateKeyError, ReferentialError
from .formats import read_rows, write_rows

log = logging.getLogger(__name__)

DOC_TYPES = ("article", "review", "conference_paper", "other")
PRIMARY_TYPES = frozenset({"article", "review", "conference_paper"})
DEFAULT_YEAR_RANGE = (1800, 2100)

JOURNALS_HEADER = ("journal_id", "title", "area_codes")
DOCUMENTS_HEADER = ("doc_id", "journal_id", "year", "doc_type")
REFERENCES_HEADER = ("citing_doc_id", "cited_doc_id")
AREAS_HEADER = ("specific_area_code", "area_code", "category_code")


@dataclass(frozen=True)
class Journal:
    id: str
    title: str
    area_codes: tuple = ()


@dataclass(frozen=True)
class Document:
    id: str
    journal_id: str
    year: int
    doc_type: str

    @property
    def is_primary(self):
        return self.doc_type in PRIMARY_TYPES


@dataclass(frozen=True)
class ReferenceEdge:
    citing_doc_id: str
    cited_doc_id: str


@dataclass(frozen=True, eq=False)
class Corpus:
    """Immutable, fully indexed corpus.

    ``area_hierarchy`` maps a specific-area code to ``(area_code, category_code)``.
    """

    journals: Mapping[str, Journal]
    documents: Mapping[str, Document]
    references: tuple
    area_hierarchy: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        # Freeze the mappings so the corpus can be shared across threads.
        object.__setattr__(self, "journals", MappingProxyType(dict(self.journals)))
        object.__setattr__(self, "documents", MappingProxyType(dict(self.documents)))
        object.__setattr__(self, "references", tuple(self.references))
        object.__setattr__(
            self, "area_hierarchy", MappingProxyType(dict(self.area_hierarchy))
        )

    @property
    def n_unresolved(self):
        return sum(1 for r in self.references if r.cited_doc_id not in self.documents)

    def is_resolved(self, ref):
        return ref.cited_doc_id in self.documents

    def art_counts(self, years):
        """Primary items per journal published in any of ``years``."""
        years = set(years)
        counts = Counter()
        for doc in self.documents.values():
            if doc.year in years and doc.is_primary:
                counts[doc.journal_id] += 1
        return {jid: counts.get(jid, 0) for jid in self.journals}

    def documents_in_year(self, year):
        return [d for d in self.documents.values() if d.year == year]

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            dict(self.journals) == dict(other.journals)
            and dict(self.documents) == dict(other.documents)
            and Counter(self.references) == Counter(other.references)
            and dict(self.area_hierarchy) == dict(other.area_hierarchy)
        )


def build_corpus(journals, documents, references, area_hierarchy=None):
    """Index in-memory records, enforcing the same rules as :func:`load_corpus`."""
    jmap = {}
    for j in journals:
        if not j.id:
            raise CorpusParseError("<memory>", 0, "empty journal id")
        if j.id in jmap:
            raise DuplicateKeyError(f"duplicate journal id {j.id!r}")
        jmap[j.id] = j
    dmap = {}
    for d in documents:
        if d.id in dmap:
            raise DuplicateKeyError(f"duplicate document id {d.id!r}")
        if d.journal_id not in jmap:
            raise ReferentialError(
                f"document {d.id!r} references unknown journal {d.journal_id!r}"
            )
        dmap[d.id] = d
    refs = []
    for r in references:
        if r.citing_doc_id not in dmap:
            raise ReferentialError(f"reference from unknown document {r.citing_doc_id!r}")
        refs.append(r)
    return Corpus(jmap, dmap, refs, area_hierarchy or {})


def normalize_doc_type(raw):
    value = raw.strip().lower()
    if value in DOC_TYPES:
        return value
    log.warning("unknown doc_type %r mapped to 'other'", raw)
    return "other"


def _require(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(errno.ENOENT, "input file not found", str(path))
    return path


def load_corpus(journals_path, documents_path, references_path, areas_path=None):
    """Read the four CSV inputs into a :class:`Corpus`.

    Malformed rows raise :class:`CorpusParseError` carrying the line number.
    References to unknown citing documents are rejected; references whose
    cited document is absent are kept as unresolved.
    """
    journals_path = _require(journals_path)
    documents_path = _require(documents_path)
    references_path = _require(references_path)

    jmap = {}
    for lineno, row in read_rows(journals_path, JOURNALS_HEADER, "journals"):
        jid = row["journal_id"].strip()
        if not jid:
            raise CorpusParseError(journals_path, lineno, "empty journal_id")
        if jid in jmap:
            raise DuplicateKeyError(f"{journals_path}:{lineno}: duplicate journal id {jid!r}")
        codes = tuple(c.strip() for c in row["area_codes"].split(";") if c.strip())
        jmap[jid] = Journal(jid, row["title"], codes)

    dmap = {}
    for lineno, row in read_rows(documents_path, DOCUMENTS_HEADER, "documents"):
        did = row["doc_id"].strip()
        if not did:
            raise CorpusParseError(documents_path, lineno, "empty doc_id")
        if did in dmap:
            raise DuplicateKeyError(f"{documents_path}:{lineno}: duplicate document id {did!r}")
        jid = row["journal_id"].strip()
        if jid not in jmap:
            raise ReferentialError(
                f"{documents_path}:{lineno}: unknown journal {jid!r} for document {did!r}"
            )
        try:
            year = int(row["year"])
        except ValueError:
            raise CorpusParseError(
                documents_path, lineno, f"year {row['year']!r} is not an integer"
            ) from None
        dmap[did] = Document(did, jid, year, normalize_doc_type(row["doc_type"]))

    refs = []
    for lineno, row in read_rows(references_path, REFERENCES_HEADER, "references"):
        citing = row["citing_doc_id"].strip()
        if citing not in dmap:
            raise ReferentialError(
                f"{references_path}:{lineno}: unknown citing document {citing!r}"
            )
        refs.append(ReferenceEdge(citing, row["cited_doc_id"].strip()))

    hierarchy = {}
    if areas_path is not None:
        areas_path = _require(areas_path)
        for lineno, row in read_rows(areas_path, AREAS_HEADER, "areas"):
            code = row["specific_area_code"].strip()
            if code in hierarchy:
                raise DuplicateKeyError(f"{areas_path}:{lineno}: duplicate area code {code!r}")
            hierarchy[code] = (row["area_code"].strip(), row["category_code"].strip())

    corpus = Corpus(jmap, dmap, refs, hierarchy)
    log.info(
        "loaded %d journals, %d documents, %d references (%d unresolved)",
        len(jmap), len(dmap), len(refs), corpus.n_unresolved,
    )
    return corpus


def save_corpus(corpus, directory):
    """Write the corpus as stamped CSVs that :func:`load_corpus` reads back."""
    directory = Path(directory)
    write_rows(
        directory / "journals.csv", "journals", JOURNALS_HEADER,
        ([j.id, j.title, ";".join(j.area_codes)]
         for j in sorted(corpus.journals.values(), key=lambda j: j.id)),
    )
    write_rows(
        directory / "documents.csv", "documents", DOCUMENTS_HEADER,
        ([d.id, d.journal_id, d.year, d.doc_type]
         for d in sorted(corpus.documents.values(), key=lambda d: d.id)),
    )
    write_rows(
        directory / "references.csv", "references", REFERENCES_HEADER,
        ([r.citing_doc_id, r.cited_doc_id]
         for r in sorted(corpus.references, key=lambda r: (r.citing_doc_id, r.cited_doc_id))),
    )
    write_rows(
        directory / "areas.csv", "areas", AREAS_HEADER,
        ([code, *corpus.area_hierarchy[code]] for code in sorted(corpus.area_hierarchy)),
    )
    return directory


@dataclass
class ValidationReport:
    empty_journals: list
    impossible_years: list
    unresolved_ratio: dict
    unknown_area_codes: dict

    @property
    def n_anomalies(self):
        flagged = sum(1 for r in self.unresolved_ratio.values() if r == 1.0)
        return (
            len(self.empty_journals) + len(self.impossible_years)
            + flagged + len(self.unknown_area_codes)
        )

    def to_dict(self):
        return {
            "empty_journals": self.empty_journals,
            "impossible_years": self.impossible_years,
            "unresolved_ratio": self.unresolved_ratio,
            "unknown_area_codes": self.unknown_area_codes,
            "n_anomalies": self.n_anomalies,
        }


def validate_corpus(corpus, year_range=DEFAULT_YEAR_RANGE) -> ValidationReport:
    """Report anomalies without modifying the corpus.

    ``unresolved_ratio`` is given for every journal that issues at least one
    reference; a ratio of 1.0 counts as an anomaly.  Area codes are only
    checked when a hierarchy was loaded.
    """
    lo, hi = year_range
    per_journal = Counter(d.journal_id for d in corpus.documents.values())
    empty = sorted(jid for jid in corpus.journals if per_journal[jid] == 0)
    bad_years = sorted(
        d.id for d in corpus.documents.values() if not lo <= d.year <= hi
    )

    issued = Counter()
    unresolved = Counter()
    for ref in corpus.references:
        jid = corpus.documents[ref.citing_doc_id].journal_id
        issued[jid] += 1
        if ref.cited_doc_id not in corpus.documents:
            unresolved[jid] += 1
    ratios = {jid: unresolved[jid] / issued[jid] for jid in sorted(issued)}

    unknown_codes = defaultdict(list)
    if corpus.area_hierarchy:
        for j in sorted(corpus.journals.values(), key=lambda j: j.id):
            for code in j.area_codes:
                if code not in corpus.area_hierarchy:
                    unknown_codes[j.id].append(code)
    return ValidationReport(empty, bad_years, ratios, dict(unknown_codes))


def journal_groups(corpus, journal_id, level) -> tuple:
    """Group codes a journal belongs to at ``level``.

    Journals without codes (or with codes missing from the hierarchy at the
    ``area`` level) fall into the ``unclassified`` group.
    """
    if level == "overall":
        return ("overall",)
    codes = corpus.journals[journal_id].area_codes
    if level == "specific_area":
        groups = set(codes)
    elif level == "area":
        groups = {corpus.area_hierarchy[c][0] for c in codes if c in corpus.area_hierarchy}
    else:
        raise ValueError(f"unknown grouping level {level!r}")
    return tuple(sorted(groups)) or ("unclassified",)


def group_members(corpus, level, journal_ids: Optional[list] = None):
    """Map each group code to the sorted journal ids it contains."""
    members = defaultdict(list)
    for jid in sorted(journal_ids if journal_ids is not None else corpus.journals):
        for g in journal_groups(corpus, jid, level):
            members[g].append(jid)
    return {g: members[g] for g in sorted(members)}

"""Writers (and the scores reader) for every artifact the CLI produces."""

from dataclasses import asdict
from pathlib import Path

import numpy as np

from .analytics import RANK_DIST_HEADER, SCATTER_HEADER, rank_distribution
from .formats import (
    fmt_float, json_float, parse_float, read_rows, write_json, write_rows,
)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return value


def _rows(rows):
    return ([_cell(v) for v in row] for row in rows)


def score_columns(psjr=None, sjr=None, jif=None):
    cols = ["journal_id"]
    if psjr is not None:
        cols += ["psjr", "sjr"]
    if jif is not None:
        cols.append("jif3y")
    return cols + ["art", "dangling_flag"]


def write_scores(directory, net, psjr=None, sjr=None, jif=None, stem="scores"):
    """``<stem>.csv`` and ``<stem>.json``; undefined values are empty / null."""
    directory = Path(directory)
    cols = score_columns(psjr, sjr, jif)
    mask = net.dangling_mask
    records = []
    for k, jid in enumerate(net.journal_ids):
        rec = {"journal_id": jid}
        if psjr is not None:
            rec["psjr"] = float(psjr.prestige[k])
            rec["sjr"] = json_float(sjr.values[k])
        if jif is not None:
            rec["jif3y"] = json_float(jif.values[k])
        rec["art"] = int(net.art[k])
        rec["dangling_flag"] = int(mask[k])
        records.append(rec)
    write_rows(directory / f"{stem}.csv", "scores", cols,
               _rows([r[c] for c in cols] for r in records))
    run = {"target_year": net.target_year, "window": net.window,
           "self_cite_cap": net.self_cite_cap, "art_basis": net.art_basis}
    if psjr is not None:
        run.update(
            params=asdict(psjr.params), c=sjr.c, iterations_run=psjr.iterations_run,
            final_delta=psjr.final_delta, converged=psjr.converged,
        )
    write_json(directory / f"{stem}.json", "scores", {"run": run, "journals": records})
    return [directory / f"{stem}.csv", directory / f"{stem}.json"]


def read_scores(path):
    """Parse a scores CSV into ``{journal_id: {column: value}}``."""
    out = {}
    for _, row in read_rows(path, ("journal_id",), "scores"):
        rec = {}
        for key, text in row.items():
            if key == "journal_id":
                continue
            if key in ("art", "dangling_flag"):
                rec[key] = int(text)
            else:
                rec[key] = parse_float(text)
        out[row["journal_id"]] = rec
    return out


def write_comparison(directory, report, stem="comparison"):
    directory = Path(directory)
    write_json(directory / f"{stem}.json", "comparison", report.to_dict())
    write_rows(directory / f"{stem}.csv", "comparison", report.CSV_HEADER,
               _rows(report.csv_rows()))
    return [directory / f"{stem}.json", directory / f"{stem}.csv"]


def write_top_k(directory, table, stem="top_k"):
    path = Path(directory) / f"{stem}.csv"
    write_rows(path, "top_k", table.CSV_HEADER, _rows(table.csv_rows()))
    return [path]


def write_scatter(directory, rows, stem="scatter"):
    path = Path(directory) / f"{stem}.csv"
    write_rows(path, "scatter", SCATTER_HEADER, _rows(
        [r.journal_id, r.sjr, r.jif3y, r.log10_sjr, r.log10_jif3y] for r in rows))
    return [path]


def write_rank_distribution(directory, sjr=None, jif=None, stem="rank_distribution"):
    rows = []
    if sjr is not None:
        rows += rank_distribution(sjr, "sjr")
    if jif is not None:
        rows += rank_distribution(jif, "jif3y")
    path = Path(directory) / f"{stem}.csv"
    write_rows(path, "rank_distribution", RANK_DIST_HEADER, _rows(rows))
    return [path]


def write_age_profile(directory, profile, stem="age_profile"):
    path = Path(directory) / f"{stem}.csv"
    write_rows(path, "age_profile", profile.csv_header(), _rows(profile.csv_rows()))
    return [path]


def write_validation(directory, report, stem="validation"):
    path = Path(directory) / f"{stem}.json"
    write_json(path, "validation", report.to_dict())
    return [path]

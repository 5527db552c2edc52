"""``prestige-rank`` command-line interface."""

import argparse
import errno
import json
import logging
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytics import compare_metrics, reference_age_profile, scatter_export, top_k_table
from .config import RunConfig, load_config
from .corpus import Corpus, Journal, load_corpus, save_corpus, validate_corpus
from .errors import (
    ConfigError, CorpusError, PrestigeRankError, SchemaVersionError,
)
from .formats import sha256, write_json
from .jif import compute_jif3y
from .network import (
    build_network, cap_self_citations, load_aggregated, read_snapshot, write_snapshot,
)
from .prestige import compute_psjr, normalize_to_sjr
from .reports import (
    write_age_profile, write_comparison, write_rank_distribution, write_scatter,
    write_scores, write_top_k, write_validation,
)

log = logging.getLogger("prestige_rank")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class NonConvergence(PrestigeRankError):
    stage = "prestige"


# (flag, config key, type, help)
_OPTIONS = [
    ("--journals", "journals", str, "journals.csv"),
    ("--documents", "documents", str, "documents.csv"),
    ("--references", "references", str, "references.csv"),
    ("--areas", "areas", str, "areas.csv (subject-area hierarchy)"),
    ("--edges", "edges", str, "pre-aggregated edges.csv"),
    ("--journal-stats", "journal_stats", str, "pre-aggregated journal_stats.csv"),
    ("--network-dir", "network_dir", str, "network snapshot directory"),
    ("--target-year", "target_year", int, "year whose references are counted"),
    ("--window-years", "window_years", int, "citation window length"),
    ("--self-cite-cap", "self_cite_cap", float, "self-citation cap as a fraction"),
    ("--art-basis", "art_basis", str, "primary items counted over 'window' or 'target_year'"),
    ("--d", "d", float, "citation weight constant"),
    ("--e", "e", float, "publication weight constant"),
    ("--tol", "convergence_tol", float, "max-abs change that ends the iteration"),
    ("--max-iterations", "max_iterations", int, "iteration cap"),
    ("--c", "c", float, "SJR scale constant"),
    ("--output-dir", "output_dir", str, "where artifacts go"),
    ("--grouping", "grouping_level", str, "overall | area | specific_area"),
    ("--threads", "threads", int, "worker threads"),
    ("--horizon", "horizon", int, "age-profile horizon in years"),
    ("--k", "k", int, "rows per top-k listing"),
]


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML run configuration")
    for flag, dest, kind, text in _OPTIONS:
        common.add_argument(flag, dest=dest, type=kind, help=text)
    common.add_argument("--strict", action="store_const", const=True, default=None,
                        help="exit 1 when the iteration does not converge")

    parser = argparse.ArgumentParser(prog="prestige-rank", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ingest", "validate the corpus and write a snapshot"),
        ("network", "build and export the citation network"),
        ("sjr", "compute PSJR and SJR"),
        ("jif", "compute JIF(3y)"),
        ("compare", "correlations and power-law fits of SJR vs JIF(3y)"),
        ("top", "top-k listings by both metrics"),
        ("age-profile", "reference-age percentages"),
        ("run", "full pipeline"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(args):
    overrides = {dest: getattr(args, dest) for _, dest, _, _ in _OPTIONS}
    overrides["strict"] = args.strict
    network_dir = overrides.pop("network_dir")
    cfg = load_config(args.config) if args.config else RunConfig(base_dir=Path.cwd())
    cfg = cfg.with_overrides(**overrides)
    if network_dir is not None:
        network_dir = Path(network_dir)
    sources = [cfg.journals is not None, cfg.edges is not None, network_dir is not None]
    if sum(sources) > 1:
        raise UsageError("choose one input: document-level CSVs, --edges/--journal-stats, "
                         "or --network-dir")
    if not any(sources):
        raise UsageError("no input given")
    if cfg.journals is not None and (cfg.documents is None or cfg.references is None):
        raise UsageError("document-level input needs journals, documents and references")
    if cfg.edges is not None and cfg.journal_stats is None:
        raise UsageError("--edges needs --journal-stats")
    return cfg, network_dir


class Pipeline:
    """Lazily computed stages shared by the subcommands."""

    def __init__(self, cfg, network_dir=None):
        self.cfg = cfg
        self.network_dir = network_dir
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def require_corpus(self, what):
        if not self.cfg.document_level:
            raise UsageError(f"{what} needs document-level input")
        return self.corpus

    @property
    def corpus(self):
        def load():
            if self.cfg.document_level:
                return load_corpus(self.cfg.path("journals"), self.cfg.path("documents"),
                                   self.cfg.path("references"), self.cfg.path("areas"))
            # Journal-level input: a corpus of bare journals for grouping.
            return Corpus({j: Journal(j, "") for j in self.raw_network.journal_ids}, {}, [])
        return self._get("corpus", load)

    @property
    def raw_network(self):
        def build():
            cfg = self.cfg
            if self.network_dir is not None:
                net = read_snapshot(self.network_dir)
                if net.self_cite_cap is not None:
                    raise ConfigError(f"{self.network_dir}: snapshot is already capped")
                return net
            if cfg.edges is not None:
                for key in ("edges", "journal_stats"):
                    if not cfg.path(key).is_file():
                        raise FileNotFoundError(
                            errno.ENOENT, "input file not found", str(cfg.path(key)))
                return load_aggregated(cfg.path("edges"), cfg.path("journal_stats"),
                                       cfg.target_year, cfg.window_years)
            if cfg.target_year is None:
                raise UsageError("target_year is required")
            return build_network(self.corpus, cfg.target_year, cfg.network_params())
        return self._get("raw_network", build)

    @property
    def capped_network(self):
        return self._get("capped", lambda: cap_self_citations(
            self.raw_network, self.cfg.self_cite_cap))

    @property
    def psjr(self):
        def run():
            result = compute_psjr(self.capped_network, self.cfg.prestige_params(),
                                  threads=self.cfg.threads)
            if self.cfg.strict and not result.converged:
                raise NonConvergence(
                    f"no convergence after {result.iterations_run} iterations "
                    f"(delta {result.final_delta:.3g})")
            return result
        return self._get("psjr", run)

    @property
    def sjr(self):
        return self._get("sjr", lambda: normalize_to_sjr(
            self.psjr, self.capped_network, self.cfg.c))

    @property
    def jif(self):
        return self._get("jif", lambda: compute_jif3y(self.raw_network))

    @property
    def target_year(self):
        return self.cfg.target_year if self.cfg.target_year is not None \
            else self.raw_network.target_year

    def titles(self):
        return {jid: j.title for jid, j in self.corpus.journals.items()}


def _print_top(table, out):
    out.write(f"Top {table.k} journals by SJR            |  Top {table.k} by JIF(3y)\n")
    width = max([len(r.title or r.journal_id) for r in table.by_sjr + table.by_jif] + [5])
    width = min(width, 40)
    for left, right in zip(table.by_sjr, table.by_jif):
        def cell(r, metric):
            name = (r.title or r.journal_id)[:width]
            return f"{name:<{width}} {metric:>10.4g} {r.rank_sjr or '-':>5} {r.rank_jif or '-':>5}"
        out.write(f"{cell(left, left.sjr)}  |  {cell(right, right.jif3y)}\n")
    out.write(f"overlap: {table.overlap}\n")


def cmd_ingest(p, out_dir):
    corpus = p.require_corpus("ingest")
    report = validate_corpus(corpus)
    files = write_validation(out_dir, report)
    save_corpus(corpus, out_dir / "corpus")
    print(json.dumps({"journals": len(corpus.journals), "documents": len(corpus.documents),
                      "references": len(corpus.references),
                      "unresolved": corpus.n_unresolved,
                      "anomalies": report.n_anomalies}))
    return files


def cmd_network(p, out_dir):
    net = p.raw_network
    write_snapshot(net, out_dir / "network")
    print(json.dumps({"journals": net.n, "links": int(net.C.nnz),
                      "dangling": len(net.dangling)}))


def cmd_sjr(p, out_dir):
    files = write_scores(out_dir, p.capped_network, p.psjr, p.sjr, stem="sjr_scores")
    print(json.dumps({"iterations_run": p.psjr.iterations_run,
                      "final_delta": p.psjr.final_delta, "converged": p.psjr.converged}))
    return files


def cmd_jif(p, out_dir):
    return write_scores(out_dir, p.raw_network, jif=p.jif, stem="jif_scores")


def cmd_compare(p, out_dir):
    report = compare_metrics(p.sjr, p.jif, p.corpus, p.cfg.grouping_level)
    files = write_comparison(out_dir, report)
    files += write_scatter(out_dir, scatter_export(p.sjr, p.jif))
    files += write_rank_distribution(out_dir, p.sjr, p.jif)
    print(json.dumps({"level": report.level, "groups": [g.group for g in report.groups],
                      "summary_spearman": report.summary["spearman"]["mean"],
                      "summary_pearson": report.summary["pearson"]["mean"]}))
    return files


def cmd_top(p, out_dir):
    table = top_k_table(p.sjr, p.jif, p.cfg.k, p.titles())
    _print_top(table, sys.stdout)
    return write_top_k(out_dir, table)


def cmd_age_profile(p, out_dir):
    corpus = p.require_corpus("age-profile")
    if p.cfg.target_year is None:
        raise UsageError("target_year is required")
    profile = reference_age_profile(corpus, p.cfg.target_year, p.cfg.horizon,
                                    p.cfg.grouping_level)
    for g in profile.groups:
        print(json.dumps({"group": g.group, "total_refs": g.total_refs,
                          "coverage": g.coverage}))
    return write_age_profile(out_dir, profile)


def cmd_run(p, out_dir):
    files = []
    if p.cfg.document_level:
        files += write_validation(out_dir, validate_corpus(p.corpus))
    write_snapshot(p.raw_network, out_dir / "network")
    files += [out_dir / "network" / n for n in ("edges.csv", "journal_stats.csv", "network.json")]
    files += write_scores(out_dir, p.capped_network, p.psjr, p.sjr, p.jif)
    report = compare_metrics(p.sjr, p.jif, p.corpus, p.cfg.grouping_level)
    files += write_comparison(out_dir, report)
    files += write_top_k(out_dir, top_k_table(p.sjr, p.jif, p.cfg.k, p.titles()))
    files += write_scatter(out_dir, scatter_export(p.sjr, p.jif))
    files += write_rank_distribution(out_dir, p.sjr, p.jif)
    if p.cfg.document_level:
        profile = reference_age_profile(p.corpus, p.target_year, p.cfg.horizon,
                                        p.cfg.grouping_level)
        files += write_age_profile(out_dir, profile)
    write_json(out_dir / "run_manifest.json", "manifest", {
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": p.cfg.to_dict(),
        "prestige": {"iterations_run": p.psjr.iterations_run,
                     "final_delta": p.psjr.final_delta,
                     "converged": p.psjr.converged,
                     "params": asdict(p.psjr.params)},
        "artifacts": {f.relative_to(out_dir).as_posix(): sha256(f) for f in sorted(files)},
    })
    print(json.dumps({"output_dir": str(out_dir), "converged": p.psjr.converged,
                      "artifacts": len(files)}))
    return files


COMMANDS = {
    "ingest": cmd_ingest, "network": cmd_network, "sjr": cmd_sjr, "jif": cmd_jif,
    "compare": cmd_compare, "top": cmd_top, "age-profile": cmd_age_profile, "run": cmd_run,
}


def _fail(code, stage, exc):
    payload = {"error": type(exc).__name__, "stage": stage, "message": str(exc)}
    path = getattr(exc, "filename", None) or getattr(exc, "path", None)
    if path:
        payload["path"] = str(path)
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("PRESTIGE_RANK_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _parser().parse_args(argv)
    try:
        cfg, network_dir = resolve_config(args)
        pipeline = Pipeline(cfg, network_dir)
        out_dir = cfg.output_path
        out_dir.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](pipeline, out_dir)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except (ConfigError, CorpusError, SchemaVersionError) as exc:
        return _fail(EXIT_USAGE, exc.stage, exc)
    except OSError as exc:
        return _fail(EXIT_USAGE, "io", exc)
    except PrestigeRankError as exc:
        return _fail(EXIT_COMPUTE, exc.stage, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

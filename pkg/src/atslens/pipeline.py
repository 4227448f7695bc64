"""End-to-end pipeline: ingest, graph, party resolution, classification, reports.

Every run writes ``run_manifest.json`` with input digests, the configuration
and per-stage counts. Nothing time- or host-dependent goes into the outputs,
so two runs over the same inputs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Iterator, Literal

from . import __version__
from ._io import data_path, read_bytes, sha256_file
from .blocklists import BlocklistIndex, empty_index, parse_abp_filters, parse_hosts_file
from .classifier import (
    Category,
    DomainClassification,
    ExternalCategorySnapshot,
    classify_domain,
    load_category_snapshot,
    load_keyword_reference,
    load_label_set,
    load_phrase_list,
    prefilter,
    prefiltered,
)
from .evidence import FixtureFetcher, LiveFetcher, gather_all
from .flows import filter_browsers, load_browser_list, parse_flow_log, write_rejects
from .graph import AppDomainGraph, Party, build_graph, dump_graph, load_stoplist, resolve_party, \
    third_party_candidates, verdicts_to_rows
from .psl import load_public_suffix_list
from .reports import (
    ReportBundle,
    ats_per_app,
    cross_platform,
    emit_reports,
    load_web_presence,
    rank_ats_domains,
    traffic_overhead,
)

log = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"

# Bundled defaults for optional data files.
_BUNDLED = {
    "psl_path": "public_suffix_list.dat",
    "browser_list_path": "browsers.txt",
    "stoplist_path": "stoplist.txt",
    "keyword_reference_path": "keywords.tsv",
    "non_ats_labels_path": "non_ats_labels.txt",
    "ambiguous_labels_path": "ambiguous_labels.txt",
}


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    flow_log_path: str | None = None
    flow_format: Literal["jsonl", "csv"] | None = None
    psl_path: str | None = None
    psl_private: bool = True
    browser_list_path: str | None = None
    stoplist_path: str | None = None
    keyword_reference_path: str | None = None
    abp_list_path: str | None = None
    hphosts_path: str | None = None
    external_snapshot_path: str | None = None
    non_ats_labels_path: str | None = None
    ambiguous_labels_path: str | None = None
    negative_keywords_path: str | None = None
    evidence_mode: Literal["fixture", "live"] = "fixture"
    evidence_fixture_dir: str | None = None
    search_url: str | None = None
    snippets_k: int = 5
    min_hits: int = 1
    workers: int = 4
    web_presence_path: str | None = None
    universe_size: int = 1000
    top_n_domains: int = 25
    top_n_apps: int = 200
    min_flows: int = 1
    output_dir: str = "out"
    output_format: Literal["csv", "json", "markdown"] = "csv"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PipelineConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def path(self, name: str) -> Path | None:
        """Resolved path for a ``*_path`` field, falling back to bundled data."""
        value = getattr(self, name)
        if value is not None:
            return Path(value)
        if name in _BUNDLED:
            return data_path(_BUNDLED[name])
        return None

    def validate(self, needs_evidence: bool = True) -> None:
        if not self.flow_log_path:
            raise ConfigError("flow log path is required (--flow-log)")
        for f in fields(self):
            if f.name.endswith("_path") and getattr(self, f.name) is not None:
                if not Path(getattr(self, f.name)).is_file():
                    raise ConfigError(f"{f.name}: no such file {getattr(self, f.name)}")
        if self.evidence_mode not in ("fixture", "live"):
            raise ConfigError(f"evidence_mode must be fixture or live, not {self.evidence_mode!r}")
        if needs_evidence and self.evidence_mode == "fixture":
            if not self.evidence_fixture_dir:
                raise ConfigError("fixture evidence mode needs an evidence fixture directory (--evidence-dir)")
            if not Path(self.evidence_fixture_dir).is_dir():
                raise ConfigError(f"evidence_fixture_dir: no such directory {self.evidence_fixture_dir}")
        if self.flow_format not in (None, "jsonl", "csv"):
            raise ConfigError(f"flow_format must be jsonl or csv, not {self.flow_format!r}")
        if self.output_format not in ("csv", "json", "markdown"):
            raise ConfigError(f"output_format must be csv, json or markdown, not {self.output_format!r}")
        for name in ("snippets_k", "min_hits", "workers", "universe_size", "top_n_domains", "top_n_apps", "min_flows"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    def resolved_flow_format(self) -> str:
        if self.flow_format:
            return self.flow_format
        return "csv" if str(self.flow_log_path).lower().endswith(".csv") else "jsonl"

    def echo(self) -> dict[str, Any]:
        """Config as recorded in the manifest. The output directory is left out."""
        d = asdict(self)
        d.pop("output_dir")
        return d


def _dir_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode() + b"\0")
            h.update(hashlib.sha256(p.read_bytes()).digest())
    return h.hexdigest()


def _input_digests(config: PipelineConfig) -> dict[str, dict[str, str]]:
    out = {}
    for f in fields(config):
        if not f.name.endswith("_path"):
            continue
        path = config.path(f.name)
        if path is None:
            continue
        shown = getattr(config, f.name) or f"bundled:{path.name}"
        out[f.name.removesuffix("_path")] = {"path": shown, "sha256": sha256_file(path)}
    if config.evidence_mode == "fixture" and config.evidence_fixture_dir:
        out["evidence_fixture_dir"] = {
            "path": config.evidence_fixture_dir,
            "sha256": _dir_digest(Path(config.evidence_fixture_dir)),
        }
    return out


@dataclass
class _Run:
    """Intermediate state carried between stages."""

    config: PipelineConfig
    counts: dict[str, int]
    graph: AppDomainGraph | None = None
    verdicts: dict | None = None
    abp: BlocklistIndex | None = None
    hphosts: BlocklistIndex | None = None
    classifications: dict[str, DomainClassification] | None = None
    rejects: list | None = None


@contextmanager
def _stage(name: str) -> Iterator[None]:
    log.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _run_graph(config: PipelineConfig) -> _Run:
    run = _Run(config, counts={})
    c = run.counts
    with _stage("ingest"):
        records, rejects = parse_flow_log(read_bytes(config.flow_log_path), config.resolved_flow_format())
        browsers = load_browser_list(config.path("browser_list_path"))
        kept = filter_browsers(records, browsers)
        run.rejects = rejects
        c["flows_parsed"] = len(records)
        c["flows_rejected"] = len(rejects)
        c["flows_browser_excluded"] = len(records) - len(kept)
    with _stage("graph"):
        psl = load_public_suffix_list(config.path("psl_path"), include_private=config.psl_private)
        graph = build_graph(kept, psl)
        run.graph = graph
        c["flows_no_registrable_domain"] = graph.dropped
        c["apps"] = len(graph.apps)
        c["domains"] = len(graph.domains)
        c["edges"] = len(graph.edges)
    with _stage("party"):
        stoplist = load_stoplist(config.path("stoplist_path"))
        candidates = third_party_candidates(graph)
        run.verdicts = resolve_party(graph, candidates, stoplist)
        statuses = [v.status for v in run.verdicts.values()]
        c["candidates"] = len(candidates)
        c["first_party"] = statuses.count(Party.FIRST_PARTY)
        c["third_party"] = statuses.count(Party.THIRD_PARTY)
        c["single_app"] = statuses.count(Party.SINGLE_APP)
    return run


def _third_party(run: _Run) -> list[str]:
    return sorted(d for d, v in run.verdicts.items() if v.status is Party.THIRD_PARTY)


def _run_classify(run: _Run) -> None:
    config, c = run.config, run.counts
    with _stage("lists"):
        abp_path, hosts_path = config.path("abp_list_path"), config.path("hphosts_path")
        run.abp = parse_abp_filters(abp_path) if abp_path else empty_index("abp")
        run.hphosts = parse_hosts_file(hosts_path) if hosts_path else empty_index("hosts")
    third = _third_party(run)
    with _stage("prefilter"):
        snap_path = config.path("external_snapshot_path")
        snapshot = load_category_snapshot(snap_path) if snap_path else ExternalCategorySnapshot({})
        removed, remaining = prefilter(
            third, snapshot, run.abp, run.hphosts,
            load_label_set(config.path("non_ats_labels_path")),
            load_label_set(config.path("ambiguous_labels_path")),
        )
        c["prefiltered_non_ats"] = len(removed)
    with _stage("evidence"):
        if config.evidence_mode == "fixture":
            fetcher = FixtureFetcher(config.evidence_fixture_dir)
        else:
            fetcher = LiveFetcher(config.search_url) if config.search_url else LiveFetcher()
        evidence = gather_all(remaining, fetcher, k=config.snippets_k, max_workers=config.workers)
    with _stage("classify"):
        reference = load_keyword_reference(config.path("keyword_reference_path"))
        neg_path = config.path("negative_keywords_path")
        negative = load_phrase_list(neg_path) if neg_path else frozenset()
        graph = run.graph
        out: dict[str, DomainClassification] = {d: prefiltered(d) for d in removed}
        for d in sorted(remaining):
            aliases = sorted(set().union(*(graph.edges[(a, d)].fqdns for a in graph.apps_of(d))))
            out[d] = classify_domain(
                evidence[d], reference, run.abp, run.hphosts,
                aliases=aliases, min_hits=config.min_hits, negative_phrases=negative,
            )
        run.classifications = dict(sorted(out.items()))
        ats = [x for x in run.classifications.values() if x.is_ats]
        c["ats"] = len(ats)
        c["non_ats"] = len(run.classifications) - len(ats)
        for cat in Category:
            c[f"ats_{cat.value}"] = sum(1 for x in ats if cat in x.categories)
        c["ats_multi_category"] = sum(1 for x in ats if len(x.categories) >= 2)
        c["ats_abp"] = sum(1 for x in ats if x.on_abp)
        c["ats_hphosts"] = sum(1 for x in ats if x.on_hphosts)
        c["ats_not_on_lists"] = sum(1 for x in ats if not (x.on_abp or x.on_hphosts))
        for x in run.classifications.values():
            key = f"path_{x.decision_path.value}"
            c[key] = c.get(key, 0) + 1


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def _write_manifest(run: _Run, command: str, outputs: list[Path], out: Path) -> dict:
    manifest = {
        "tool": "atslens",
        "version": __version__,
        "command": command,
        "config": run.config.echo(),
        "inputs": _input_digests(run.config),
        "counts": dict(sorted(run.counts.items())),
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs)},
    }
    _write(out / MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _prepare(config: PipelineConfig, needs_evidence: bool = True) -> Path:
    config.validate(needs_evidence)
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StageError("output", exc) from exc
    return out


def cmd_graph(config: PipelineConfig) -> dict:
    """Build the graph and write ``graph.json`` and ``parties.jsonl``."""
    out = _prepare(config, needs_evidence=False)
    run = _run_graph(config)
    with _stage("output"):
        paths = [out / "graph.json", out / "parties.jsonl", out / "rejects.jsonl"]
        _write(paths[0], dump_graph(run.graph))
        _write(paths[1], _jsonl(verdicts_to_rows(run.graph, run.verdicts)))
        with open(paths[2], "w", encoding="utf-8") as fh:
            write_rejects(run.rejects, fh)
        return _write_manifest(run, "graph", paths, out)


def cmd_classify(config: PipelineConfig) -> dict:
    """Classify third-party domains and write ``classifications.jsonl`` only."""
    out = _prepare(config)
    run = _run_graph(config)
    _run_classify(run)
    with _stage("output"):
        path = out / "classifications.jsonl"
        _write(path, _jsonl(x.to_json() for x in run.classifications.values()))
    return {"counts": dict(sorted(run.counts.items())), "outputs": [str(path)]}


def cmd_analyze(config: PipelineConfig) -> dict:
    """Run every stage and write classifications, reports and the manifest."""
    out = _prepare(config)
    run = _run_graph(config)
    _run_classify(run)
    with _stage("reports"):
        graph, cls = run.graph, run.classifications
        third = _third_party(run)
        wp_path = config.path("web_presence_path")
        web = load_web_presence(wp_path) if wp_path else {}
        bundle = ReportBundle(
            ats_per_app=ats_per_app(graph, cls, third_party=third),
            ranking=rank_ats_domains(graph, cls, config.top_n_domains, min_flows=config.min_flows,
                                     third_party=third),
            traffic=traffic_overhead(graph, cls, config.top_n_apps, third_party=third),
            cross_platform=cross_platform(cls, web, run.abp, run.hphosts, graph,
                                          universe_size=config.universe_size),
        )
        paths = emit_reports(bundle, config.output_format, out)
    with _stage("output"):
        extra = [out / "classifications.jsonl", out / "graph.json", out / "parties.jsonl", out / "rejects.jsonl"]
        _write(extra[0], _jsonl(x.to_json() for x in cls.values()))
        _write(extra[1], dump_graph(graph))
        _write(extra[2], _jsonl(verdicts_to_rows(graph, run.verdicts)))
        with open(extra[3], "w", encoding="utf-8") as fh:
            write_rejects(run.rejects, fh)
        return _write_manifest(run, "analyze", paths + extra, out)


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data

"""Prevalence, ranking, traffic-overhead and cross-platform reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

from ._io import Source, read_text
from .blocklists import BlocklistIndex, contains
from .classifier import DomainClassification
from .graph import AppDomainGraph

log = logging.getLogger(__name__)

ReportFormat = Literal["csv", "json", "markdown"]
DEFAULT_UNIVERSE = 1000


class ConsistencyError(RuntimeError):
    """A graph domain that should have been classified was not."""


@dataclass(frozen=True)
class EcdfSeries:
    points: tuple[tuple[float, float], ...]


def ecdf(values: Iterable[float]) -> EcdfSeries:
    """Empirical CDF as ``(value, fraction <= value)`` at each distinct value."""
    counts = Counter(values)
    n = sum(counts.values())
    points, seen = [], 0
    for v in sorted(counts):
        seen += counts[v]
        points.append((v, 1.0 if seen == n else seen / n))
    return EcdfSeries(tuple(points))


def _is_ats(domain: str, classifications: Mapping[str, DomainClassification]) -> bool:
    c = classifications.get(domain)
    return c is not None and c.is_ats


def _check_coverage(third_party: Iterable[str] | None, classifications: Mapping[str, DomainClassification]) -> None:
    if third_party is None:
        return
    missing = sorted(set(third_party) - set(classifications))
    if missing:
        raise ConsistencyError(f"{len(missing)} third-party domains lack a classification, e.g. {missing[0]}")


@dataclass(frozen=True)
class AtsPerApp:
    per_app: Mapping[str, int]
    ecdf: EcdfSeries


def ats_per_app(
    graph: AppDomainGraph,
    classifications: Mapping[str, DomainClassification],
    *,
    third_party: Iterable[str] | None = None,
) -> AtsPerApp:
    """Distinct ATS domains per app, plus their ECDF over all graph apps."""
    _check_coverage(third_party, classifications)
    per_app = {
        app: sum(1 for d in graph.domains_of(app) if _is_ats(d, classifications))
        for app in sorted(graph.apps)
    }
    return AtsPerApp(per_app, ecdf(per_app.values()))


@dataclass(frozen=True)
class RankingRow:
    domain: str
    app_count: int
    app_fraction: float


def rank_ats_domains(
    graph: AppDomainGraph,
    classifications: Mapping[str, DomainClassification],
    top_n: int = 25,
    *,
    min_flows: int = 1,
    third_party: Iterable[str] | None = None,
) -> list[RankingRow]:
    """Top ATS domains by number of apps with at least ``min_flows`` flows to them."""
    _check_coverage(third_party, classifications)
    counts: Counter[str] = Counter()
    for (app, domain), stats in graph.edges.items():
        if stats.flow_count >= min_flows and _is_ats(domain, classifications):
            counts[domain] += 1
    n_apps = len(graph.apps)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    return [RankingRow(d, c, c / n_apps) for d, c in ranked]


@dataclass(frozen=True)
class AppTraffic:
    app_id: str
    ats_bytes: int
    other_bytes: int

    @property
    def total_bytes(self) -> int:
        return self.ats_bytes + self.other_bytes

    @property
    def fraction(self) -> float:
        return self.ats_bytes / self.total_bytes


@dataclass(frozen=True)
class TrafficOverhead:
    apps: tuple[AppTraffic, ...]
    ecdf: EcdfSeries
    mean: float | None

    @property
    def per_app_fraction(self) -> dict[str, float]:
        return {a.app_id: a.fraction for a in self.apps}


def traffic_overhead(
    graph: AppDomainGraph,
    classifications: Mapping[str, DomainClassification],
    top_n_apps: int = 200,
    *,
    third_party: Iterable[str] | None = None,
) -> TrafficOverhead:
    """Share of bytes going to ATS domains for the ``top_n_apps`` heaviest apps.

    Apps are ranked by total bytes (tx + rx) over all edges, ties by app id.
    """
    _check_coverage(third_party, classifications)
    ats: dict[str, int] = defaultdict(int)
    other: dict[str, int] = defaultdict(int)
    for (app, domain), stats in graph.edges.items():
        if _is_ats(domain, classifications):
            ats[app] += stats.bytes_total
        else:
            other[app] += stats.bytes_total
    ranked = sorted(graph.apps, key=lambda a: (-(ats[a] + other[a]), a))[:top_n_apps]
    rows = []
    for app in ranked:
        if ats[app] + other[app] == 0:
            log.warning("app %s has no traffic and is excluded from the overhead report", app)
            continue
        rows.append(AppTraffic(app, ats[app], other[app]))
    fractions = [r.fraction for r in rows]
    mean = sum(fractions) / len(fractions) if fractions else None
    return TrafficOverhead(tuple(rows), ecdf(fractions), mean)


def load_web_presence(source: Source) -> dict[str, frozenset[str]]:
    """Read a ``site,domain`` CSV into site -> embedded domains."""
    reader = csv.DictReader(io.StringIO(read_text(source)))
    if reader.fieldnames is None:
        return {}
    if [f.strip() for f in reader.fieldnames] != ["site", "domain"]:
        raise ValueError(f"web presence header must be site,domain, got {reader.fieldnames}")
    sites: dict[str, set[str]] = defaultdict(set)
    for row in reader:
        site = (row["site"] or "").strip().lower()
        domain = (row["domain"] or "").strip().lower().rstrip(".")
        if site:
            sites[site]
            if domain:
                sites[site].add(domain)
    return {s: frozenset(d) for s, d in sites.items()}


@dataclass(frozen=True)
class CrossPlatformRow:
    domain: str
    on_abp: bool
    on_hphosts: bool
    app_count: int
    site_count: int


@dataclass(frozen=True)
class CrossPlatform:
    rows: tuple[CrossPlatformRow, ...]
    cross_platform_fraction: float


def cross_platform(
    classifications: Mapping[str, DomainClassification],
    web_presence: Mapping[str, Iterable[str]],
    abp: BlocklistIndex,
    hphosts: BlocklistIndex,
    graph: AppDomainGraph,
    *,
    universe_size: int = DEFAULT_UNIVERSE,
) -> CrossPlatform:
    """Web presence of every ATS domain, ordered like the ranking report.

    A site counts for a domain when it embeds the domain or any subdomain of it.
    """
    if len(web_presence) > universe_size:
        raise ValueError(f"web presence lists {len(web_presence)} sites, universe is {universe_size}")
    ats = [d for d, c in classifications.items() if c.is_ats]
    site_counts: Counter[str] = Counter()
    ats_set = set(ats)
    for embedded_set in web_presence.values():
        hit = set()
        for e in embedded_set:
            labels = e.split(".")
            hit.update(s for s in (".".join(labels[i:]) for i in range(len(labels))) if s in ats_set)
        site_counts.update(hit)
    rows = [
        CrossPlatformRow(
            d,
            classifications[d].on_abp or contains(abp, d),
            classifications[d].on_hphosts or contains(hphosts, d),
            graph.degree(d),
            site_counts[d],
        )
        for d in ats
    ]
    rows.sort(key=lambda r: (-r.app_count, r.domain))
    fraction = sum(1 for r in rows if r.site_count >= 1) / len(rows) if rows else 0.0
    return CrossPlatform(tuple(rows), fraction)


@dataclass(frozen=True)
class ReportBundle:
    ats_per_app: AtsPerApp
    ranking: Sequence[RankingRow]
    traffic: TrafficOverhead
    cross_platform: CrossPlatform


def _tables(bundle: ReportBundle) -> dict[str, tuple[list[str], list[list]]]:
    t = bundle.traffic
    cp = bundle.cross_platform
    per_app = bundle.ats_per_app.per_app
    return {
        "summary": (
            ["metric", "value"],
            [
                ["apps", len(per_app)],
                ["apps_with_ats", sum(1 for n in per_app.values() if n >= 1)],
                ["ats_domains", len(cp.rows)],
                ["overhead_apps", len(t.apps)],
                ["mean_ats_traffic_fraction", t.mean],
                ["cross_platform_fraction", cp.cross_platform_fraction],
            ],
        ),
        "ats_per_app": (
            ["app_id", "ats_domains"],
            [[a, n] for a, n in sorted(per_app.items())],
        ),
        "ecdf_ats_per_app": (
            ["ats_domains", "cumulative_fraction"],
            [[int(v), f] for v, f in bundle.ats_per_app.ecdf.points],
        ),
        "ranking": (
            ["rank", "domain", "app_count", "app_fraction"],
            [[i, r.domain, r.app_count, r.app_fraction] for i, r in enumerate(bundle.ranking, 1)],
        ),
        "traffic_overhead": (
            ["app_id", "ats_bytes", "other_bytes", "total_bytes", "ats_fraction"],
            [[a.app_id, a.ats_bytes, a.other_bytes, a.total_bytes, a.fraction] for a in t.apps],
        ),
        "ecdf_traffic_overhead": (
            ["ats_fraction", "cumulative_fraction"],
            [[v, f] for v, f in t.ecdf.points],
        ),
        "cross_platform": (
            ["domain", "on_abp", "on_hphosts", "app_count", "site_count"],
            [[r.domain, r.on_abp, r.on_hphosts, r.app_count, r.site_count] for r in cp.rows],
        ),
    }


def _text_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, float):
        return f"{cell:.6f}"
    return str(cell)


def _json_cell(cell):
    if isinstance(cell, float):
        return float(f"{cell:.6f}")
    return cell


def emit_reports(bundle: ReportBundle, fmt: ReportFormat, out_dir: str | os.PathLike) -> list[Path]:
    """Write one file per report; output bytes depend only on the bundle.

    Floats are written with six decimals in every format.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in _tables(bundle).items():
        if fmt == "csv":
            path = out / f"{name}.csv"
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            w.writerows([_text_cell(c) for c in row] for row in rows)
            text = buf.getvalue()
        elif fmt == "json":
            path = out / f"{name}.json"
            doc = {"report": name, "columns": header,
                   "rows": [dict(zip(header, map(_json_cell, row))) for row in rows]}
            text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        elif fmt == "markdown":
            path = out / f"{name}.md"
            lines = [f"# {name}", "", "| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
            lines += ["| " + " | ".join(_text_cell(c) for c in row) + " |" for row in rows]
            text = "\n".join(lines) + "\n"
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written

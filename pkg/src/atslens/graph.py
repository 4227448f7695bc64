"""Bipartite app-domain graph and third-party service identification.

Apps and registrable domains are the two node types. An edge exists when at
least one flow was observed between the pair. Domains reached by two or more
apps are third-party candidates; a candidate is demoted to first party when
its name shares a token with the package name of an adjacent app.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from ._io import Source, data_path, iter_plain_list
from .flows import FlowRecord
from .psl import NoRegistrableDomain, PublicSuffixList, registrable_domain

MIN_TOKEN_LENGTH = 3


@dataclass(frozen=True)
class EdgeStats:
    flow_count: int
    bytes_tx: int
    bytes_rx: int
    fqdns: frozenset[str]

    @property
    def bytes_total(self) -> int:
        return self.bytes_tx + self.bytes_rx


@dataclass(frozen=True)
class AppDomainGraph:
    apps: frozenset[str]
    domains: frozenset[str]
    edges: Mapping[tuple[str, str], EdgeStats]
    dropped: int = 0
    # Adjacency, derived from edges.
    _domain_apps: Mapping[str, frozenset[str]] = field(default=None, repr=False, compare=False)
    _app_domains: Mapping[str, frozenset[str]] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self._domain_apps is None:
            by_domain, by_app = defaultdict(set), defaultdict(set)
            for app, domain in self.edges:
                by_domain[domain].add(app)
                by_app[app].add(domain)
            object.__setattr__(self, "_domain_apps", {d: frozenset(a) for d, a in by_domain.items()})
            object.__setattr__(self, "_app_domains", {a: frozenset(d) for a, d in by_app.items()})

    def apps_of(self, domain: str) -> frozenset[str]:
        return self._domain_apps.get(domain, frozenset())

    def domains_of(self, app: str) -> frozenset[str]:
        return self._app_domains.get(app, frozenset())

    def degree(self, domain: str) -> int:
        return len(self.apps_of(domain))

    def to_json(self) -> dict:
        nodes = [{"id": a, "type": "app"} for a in sorted(self.apps)]
        nodes += [{"id": d, "type": "domain"} for d in sorted(self.domains)]
        edges = [
            {
                "app": app,
                "domain": domain,
                "flow_count": s.flow_count,
                "bytes_tx": s.bytes_tx,
                "bytes_rx": s.bytes_rx,
                "bytes_total": s.bytes_total,
                "fqdns": sorted(s.fqdns),
            }
            for (app, domain), s in sorted(self.edges.items())
        ]
        return {"nodes": nodes, "edges": edges, "dropped_records": self.dropped}


def build_graph(records: Iterable[FlowRecord], psl: PublicSuffixList) -> AppDomainGraph:
    """Fold flow records into an app-domain graph keyed by registrable domain.

    Records whose FQDN has no registrable domain are dropped and counted.
    """
    acc: dict[tuple[str, str], list] = {}
    reduced: dict[str, str | None] = {}
    dropped = 0
    for r in records:
        if r.fqdn not in reduced:
            try:
                reduced[r.fqdn] = registrable_domain(r.fqdn, psl)
            except NoRegistrableDomain:
                reduced[r.fqdn] = None
        domain = reduced[r.fqdn]
        if domain is None:
            dropped += 1
            continue
        slot = acc.get((r.app_id, domain))
        if slot is None:
            acc[(r.app_id, domain)] = [1, r.bytes_tx, r.bytes_rx, {r.fqdn}]
        else:
            slot[0] += 1
            slot[1] += r.bytes_tx
            slot[2] += r.bytes_rx
            slot[3].add(r.fqdn)
    edges = {key: EdgeStats(c, tx, rx, frozenset(f)) for key, (c, tx, rx, f) in acc.items()}
    return AppDomainGraph(
        apps=frozenset(a for a, _ in edges),
        domains=frozenset(d for _, d in edges),
        edges=edges,
        dropped=dropped,
    )


def third_party_candidates(graph: AppDomainGraph, min_degree: int = 2) -> frozenset[str]:
    return frozenset(d for d in graph.domains if graph.degree(d) >= min_degree)


def load_stoplist(source: Source) -> frozenset[str]:
    return frozenset(entry.lower() for _, entry in iter_plain_list(source))


@lru_cache(maxsize=1)
def default_stoplist() -> frozenset[str]:
    return load_stoplist(data_path("stoplist.txt"))


def tokenize_app_id(app_id: str, stoplist: Iterable[str] | None = None) -> frozenset[str]:
    """Dot-separated package-name labels that are long enough and not stoplisted."""
    stop = default_stoplist() if stoplist is None else frozenset(stoplist)
    return frozenset(
        t for t in app_id.lower().split(".") if len(t) >= MIN_TOKEN_LENGTH and t not in stop
    )


def tokenize_domain(domain: str, stoplist: Iterable[str] | None = None) -> frozenset[str]:
    """Tokens of the non-suffix label of a registrable domain.

    ``domain`` must already be eTLD+1, so its first label is the only one
    outside the public suffix. Hyphenated labels also contribute their parts.
    """
    stop = default_stoplist() if stoplist is None else frozenset(stoplist)
    label = domain.lower().split(".")[0]
    tokens = {label, *label.split("-")}
    return frozenset(t for t in tokens if len(t) >= MIN_TOKEN_LENGTH and t not in stop)


class Party(str, enum.Enum):
    FIRST_PARTY = "first_party"
    THIRD_PARTY = "third_party"
    SINGLE_APP = "single_app"


@dataclass(frozen=True)
class PartyVerdict:
    domain: str
    status: Party
    matched_apps: frozenset[str] = frozenset()


def resolve_party(
    graph: AppDomainGraph,
    candidates: Iterable[str],
    stoplist: Iterable[str] | None = None,
) -> dict[str, PartyVerdict]:
    """Label every graph domain as first party, third party or single-app.

    A candidate becomes first party when any adjacent app shares a token with
    it. ``matched_apps`` keeps those apps so reports can show which edges are
    first-party use.
    """
    stop = default_stoplist() if stoplist is None else frozenset(stoplist)
    candidates = frozenset(candidates)
    app_tokens: dict[str, frozenset[str]] = {}
    verdicts = {}
    for domain in sorted(graph.domains):
        if domain not in candidates:
            verdicts[domain] = PartyVerdict(domain, Party.SINGLE_APP)
            continue
        dtok = tokenize_domain(domain, stop)
        matched = set()
        for app in graph.apps_of(domain):
            if app not in app_tokens:
                app_tokens[app] = tokenize_app_id(app, stop)
            if app_tokens[app] & dtok:
                matched.add(app)
        status = Party.FIRST_PARTY if matched else Party.THIRD_PARTY
        verdicts[domain] = PartyVerdict(domain, status, frozenset(matched))
    return verdicts


def verdicts_to_rows(graph: AppDomainGraph, verdicts: Mapping[str, PartyVerdict]) -> list[dict]:
    return [
        {
            "domain": d,
            "status": v.status.value,
            "degree": graph.degree(d),
            "matched_apps": sorted(v.matched_apps),
        }
        for d, v in sorted(verdicts.items())
    ]


def dump_graph(graph: AppDomainGraph) -> str:
    return json.dumps(graph.to_json(), indent=2, sort_keys=True) + "\n"

"""Curated ATS lists: hosts files and AdBlock Plus filter lists.

Only the domain-expressible part of each format is indexed. Anything that
needs a URL, a page context or a DOM to evaluate is counted as skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Literal

from ._io import Source, iter_lines

_HOST_RE = re.compile(r"^(?=.{1,253}$)(?:[a-z0-9_](?:[a-z0-9_-]{0,61}[a-z0-9])?\.)+[a-z0-9-]{2,63}$")
_SINK_IPS = {"127.0.0.1", "0.0.0.0"}
_LOCAL_NAMES = {"localhost", "localhost.localdomain", "local", "broadcasthost", "0.0.0.0", "ip6-localhost"}
# ||host^ optionally followed by the end anchor and/or $options
_ABP_ANCHOR_RE = re.compile(r"^\|\|([^/^$*|]+)\^\|?(?:\$(.*))?$")
_COSMETIC_MARKERS = ("##", "#@#", "#?#", "#$#", "#@$#", "#%#", "#@%#")


@dataclass(frozen=True)
class BlocklistIndex:
    source: Literal["abp", "hosts"]
    domains: frozenset[str]
    rule_count: int
    skipped_count: int

    def __contains__(self, domain: str) -> bool:
        return contains(self, domain)

    def __len__(self) -> int:
        return len(self.domains)


def _valid_host(name: str) -> bool:
    return bool(_HOST_RE.match(name))


def parse_hosts_file(source: Source) -> BlocklistIndex:
    """Index a hosts-format blocklist.

    ``<ip> <host> [<host>...]`` lines pointing at 127.0.0.1 or 0.0.0.0 add
    their hostnames; every hostname counts as one rule. Comments and blank
    lines are not rules. Anything else, including loopback aliases such as
    ``localhost``, is skipped.
    """
    domains: set[str] = set()
    accepted = skipped = 0
    for _, line in iter_lines(source):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2 or parts[0] not in _SINK_IPS:
            skipped += 1
            continue
        for host in parts[1:]:
            host = host.lower().rstrip(".")
            if host in _LOCAL_NAMES or not _valid_host(host):
                skipped += 1
            else:
                domains.add(host)
                accepted += 1
    return BlocklistIndex("hosts", frozenset(domains), accepted + skipped, skipped)


def abp_rule_domain(line: str) -> str | None:
    """Return the domain a single filter line blocks, or None if unsupported."""
    line = line.strip()
    if not line or line.startswith(("!", "[", "@@")):
        return None
    if any(m in line for m in _COSMETIC_MARKERS):
        return None
    m = _ABP_ANCHOR_RE.match(line)
    if m:
        options = (m.group(2) or "").lower().split(",")
        if "badfilter" in options:
            return None
        host = m.group(1).lower().rstrip(".")
        return host if _valid_host(host) else None
    host = line.lower()
    return host if _valid_host(host) else None


def parse_abp_filters(source: Source) -> BlocklistIndex:
    """Index the ``||domain^`` and bare-hostname rules of a filter list.

    Every non-blank line counts as a rule. Comments, the ``[Adblock ...]``
    header, exceptions, cosmetic filters and path or regex rules are skipped.
    """
    domains: set[str] = set()
    rules = skipped = 0
    for _, line in iter_lines(source):
        if not line.strip():
            continue
        rules += 1
        host = abp_rule_domain(line)
        if host is None:
            skipped += 1
        else:
            domains.add(host)
    return BlocklistIndex("abp", frozenset(domains), rules, skipped)


def contains(index: BlocklistIndex, domain: str) -> bool:
    """True when ``domain`` or any parent domain of it is indexed."""
    labels = domain.rstrip(".").split(".")
    return any(".".join(labels[i:]) in index.domains for i in range(len(labels)))


def contains_any(index: BlocklistIndex, names: Iterable[str]) -> bool:
    return any(contains(index, n) for n in names)


def empty_index(source: Literal["abp", "hosts"]) -> BlocklistIndex:
    return BlocklistIndex(source, frozenset(), 0, 0)


def export_index(index: BlocklistIndex) -> str:
    return "".join(d + "\n" for d in sorted(index.domains))

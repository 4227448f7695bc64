"""Public Suffix List loading and registrable-domain (eTLD+1) reduction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

from ._io import Source, data_path, iter_lines

log = logging.getLogger(__name__)

_PRIVATE_BEGIN = "===BEGIN PRIVATE DOMAINS==="


class NoRegistrableDomain(ValueError):
    """The name is itself a public suffix or has too few labels."""


@dataclass(frozen=True)
class PublicSuffixList:
    exact_rules: frozenset[str]
    wildcard_rules: frozenset[str]  # "*.ck" stored as "ck"
    exception_rules: frozenset[str]  # "!www.ck" stored as "www.ck"
    skipped_lines: int = 0

    def suffix_length(self, fqdn: str) -> int:
        """Number of labels in the public suffix of ``fqdn``."""
        labels = fqdn.split(".")
        n = len(labels)
        # Exception rules beat every other rule, so look for one first.
        for i in range(n):
            if ".".join(labels[i:]) in self.exception_rules:
                return n - i - 1
        for i in range(n):
            if ".".join(labels[i:]) in self.exact_rules:
                return n - i
            if i + 1 < n and ".".join(labels[i + 1 :]) in self.wildcard_rules:
                return n - i
        return 1

    def public_suffix(self, fqdn: str) -> str:
        return ".".join(fqdn.split(".")[-self.suffix_length(fqdn) :])


def _ascii_rule(rule: str) -> str:
    if rule.isascii():
        return rule
    return ".".join(label.encode("idna").decode("ascii") for label in rule.split("."))


def load_public_suffix_list(source: Source, include_private: bool = True) -> PublicSuffixList:
    """Parse PSL ``.dat`` text into exact, wildcard and exception rule sets.

    Only the first whitespace-delimited token of a line is the rule. Rules
    with non-ASCII labels are stored in punycode so they match the ASCII
    form of observed hostnames.
    """
    exact, wildcard, exception = set(), set(), set()
    skipped = 0
    for line_no, line in iter_lines(source):
        line = line.strip()
        if not line:
            continue
        if line.startswith("//"):
            if _PRIVATE_BEGIN in line and not include_private:
                break
            continue
        rule = line.split()[0].lower()
        try:
            if rule.startswith("!"):
                target, body = exception, rule[1:]
            elif rule.startswith("*."):
                target, body = wildcard, rule[2:]
            else:
                target, body = exact, rule
            body = _ascii_rule(body)
            labels = body.split(".")
            if not body or any(not label or "*" in label or "!" in label for label in labels):
                raise ValueError(rule)
            if target is exception and len(labels) < 2:
                raise ValueError(rule)
        except (ValueError, UnicodeError):
            log.warning("PSL line %d: unparseable rule %r", line_no, line)
            skipped += 1
            continue
        target.add(body)
    return PublicSuffixList(frozenset(exact), frozenset(wildcard), frozenset(exception), skipped)


@lru_cache(maxsize=2)
def default_psl(include_private: bool = True) -> PublicSuffixList:
    """The vendored PSL snapshot shipped in ``atslens/data``."""
    return load_public_suffix_list(data_path("public_suffix_list.dat"), include_private)


def registrable_domain(fqdn: str, psl: PublicSuffixList) -> str:
    """Reduce a lowercase FQDN to its public suffix plus one label.

    >>> registrable_domain("a.b.co.uk", load_public_suffix_list(b"uk\\nco.uk"))
    'b.co.uk'
    """
    labels = fqdn.strip(".").split(".")
    if not fqdn or any(not label for label in labels):
        raise NoRegistrableDomain(fqdn)
    k = psl.suffix_length(".".join(labels))
    if len(labels) <= k:
        raise NoRegistrableDomain(fqdn)
    return ".".join(labels[-(k + 1) :])

"""Two-stage ATS classifier.

Stage one drops domains a vendor snapshot confidently labels as non-ATS
(news, mail, CDN, ...) unless a curated list says otherwise. Stage two
matches landing-page and search-snippet text against a keyword reference
and assigns every category with enough whole-word phrase hits.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from ._io import Source, data_path, iter_lines, iter_plain_list, read_text
from .blocklists import BlocklistIndex, contains_any
from .evidence import PageEvidence

log = logging.getLogger(__name__)


class Category(str, enum.Enum):
    AD_NETWORK = "ad_network"
    ANALYTICS = "analytics"
    USER_ENGAGEMENT = "user_engagement"


class DecisionPath(str, enum.Enum):
    PREFILTERED_NON_ATS = "prefiltered_non_ats"
    CURATED_LIST = "curated_list"
    KEYWORD_MATCH = "keyword_match"
    NO_EVIDENCE = "no_evidence"


class KeywordReferenceError(ValueError):
    pass


_STRIP_RE = re.compile(r"[^\w/\-]|_")


def normalize(text: str) -> tuple[str, ...]:
    """Lowercase word tokens. Hyphens and slashes survive only inside a token."""
    tokens = _STRIP_RE.sub(" ", text.lower()).split()
    return tuple(t for t in (tok.strip("-/") for tok in tokens) if t)


@dataclass(frozen=True)
class CategoryKeywords:
    category: Category
    phrases: frozenset[str]


def load_keyword_reference(source: Source) -> list[CategoryKeywords]:
    """Read ``category<TAB>phrase`` records into one entry per category.

    Phrases are stored in normalized form. Duplicates within a category are
    dropped with a warning; unknown categories and an empty file are errors.
    """
    phrases: dict[Category, set[str]] = defaultdict(set)
    for line_no, line in iter_lines(source):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        label, sep, phrase = line.partition("\t")
        if not sep:
            raise KeywordReferenceError(f"line {line_no}: expected category<TAB>phrase")
        try:
            category = Category(label.strip())
        except ValueError:
            raise KeywordReferenceError(f"line {line_no}: unknown category {label.strip()!r}") from None
        norm = " ".join(normalize(phrase))
        if not norm:
            raise KeywordReferenceError(f"line {line_no}: empty phrase")
        if norm in phrases[category]:
            log.warning("line %d: duplicate phrase %r in %s ignored", line_no, norm, category.value)
            continue
        phrases[category].add(norm)
    if not phrases:
        raise KeywordReferenceError("keyword reference is empty")
    return [CategoryKeywords(c, frozenset(phrases[c])) for c in Category if phrases.get(c)]


@lru_cache(maxsize=1)
def default_keyword_reference() -> tuple[CategoryKeywords, ...]:
    return tuple(load_keyword_reference(data_path("keywords.tsv")))


def load_phrase_list(source: Source) -> frozenset[str]:
    """One phrase per line, ``#`` comments; used for the negative keyword list."""
    return frozenset(" ".join(normalize(e)) for _, e in iter_plain_list(source))


def find_phrases(phrases: Iterable[str], texts: Iterable[str]) -> set[str]:
    """Phrases occurring as contiguous whole-token runs in any single text."""
    wanted: dict[int, set[tuple[str, ...]]] = defaultdict(set)
    for p in phrases:
        toks = tuple(p.split())
        if toks:
            wanted[len(toks)].add(toks)
    hits = set()
    for text in texts:
        tokens = normalize(text)
        for n, grams in wanted.items():
            for i in range(len(tokens) - n + 1):
                gram = tokens[i : i + n]
                if gram in grams:
                    hits.add(" ".join(gram))
    return hits


@dataclass(frozen=True)
class ExternalCategorySnapshot:
    entries: Mapping[str, frozenset[str]]
    provider: str = ""
    retrieved_at: date | None = None

    def labels(self, domain: str) -> frozenset[str]:
        return self.entries.get(domain, frozenset())


def load_category_snapshot(source: Source, retrieved_at: date | None = None) -> ExternalCategorySnapshot:
    """Read a ``domain,provider,labels`` CSV; labels are ``;``-separated.

    Rows for the same domain from several providers are merged.
    """
    reader = csv.DictReader(io.StringIO(read_text(source)))
    if reader.fieldnames is None:
        return ExternalCategorySnapshot({}, "", retrieved_at)
    if [f.strip() for f in reader.fieldnames] != ["domain", "provider", "labels"]:
        raise ValueError(f"snapshot header must be domain,provider,labels, got {reader.fieldnames}")
    entries: dict[str, set[str]] = defaultdict(set)
    providers = set()
    for row in reader:
        domain = (row["domain"] or "").strip().lower().rstrip(".")
        if not domain:
            continue
        providers.add((row["provider"] or "").strip())
        entries[domain].update(lab.strip() for lab in (row["labels"] or "").split(";") if lab.strip())
    return ExternalCategorySnapshot(
        {d: frozenset(labels) for d, labels in entries.items()},
        ";".join(sorted(p for p in providers if p)),
        retrieved_at,
    )


def load_label_set(source: Source) -> frozenset[str]:
    return frozenset(e.casefold() for _, e in iter_plain_list(source))


def default_non_ats_labels() -> frozenset[str]:
    return load_label_set(data_path("non_ats_labels.txt"))


def default_ambiguous_labels() -> frozenset[str]:
    return load_label_set(data_path("ambiguous_labels.txt"))


def prefilter(
    domains: Iterable[str],
    snapshot: ExternalCategorySnapshot,
    abp: BlocklistIndex,
    hphosts: BlocklistIndex,
    non_ats_labels: Iterable[str],
    ambiguous_labels: Iterable[str],
) -> tuple[frozenset[str], frozenset[str]]:
    """Split domains into (removed, remaining).

    A domain is removed only when every vendor label it carries is a known
    non-ATS label, none is ambiguous, and neither curated list has it.
    """
    non_ats = frozenset(x.casefold() for x in non_ats_labels)
    ambiguous = frozenset(x.casefold() for x in ambiguous_labels)
    removed, remaining = set(), set()
    for d in domains:
        labels = {x.casefold() for x in snapshot.labels(d)}
        if (
            labels
            and labels <= non_ats
            and not labels & ambiguous
            and not contains_any(abp, [d])
            and not contains_any(hphosts, [d])
        ):
            removed.add(d)
        else:
            remaining.add(d)
    return frozenset(removed), frozenset(remaining)


@dataclass(frozen=True)
class DomainClassification:
    domain: str
    is_ats: bool
    categories: frozenset[Category]
    on_abp: bool
    on_hphosts: bool
    matched_phrases: Mapping[Category, frozenset[str]] = field(default_factory=dict)
    decision_path: DecisionPath = DecisionPath.NO_EVIDENCE

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "is_ats": self.is_ats,
            "categories": sorted(c.value for c in self.categories),
            "on_abp": self.on_abp,
            "on_hphosts": self.on_hphosts,
            "matched_phrases": {c.value: sorted(p) for c, p in sorted(self.matched_phrases.items())},
            "decision_path": self.decision_path.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> DomainClassification:
        return cls(
            domain=obj["domain"],
            is_ats=obj["is_ats"],
            categories=frozenset(Category(c) for c in obj["categories"]),
            on_abp=obj["on_abp"],
            on_hphosts=obj["on_hphosts"],
            matched_phrases={Category(c): frozenset(p) for c, p in obj["matched_phrases"].items()},
            decision_path=DecisionPath(obj["decision_path"]),
        )


def prefiltered(domain: str) -> DomainClassification:
    return DomainClassification(domain, False, frozenset(), False, False, {}, DecisionPath.PREFILTERED_NON_ATS)


def classify_domain(
    evidence: PageEvidence,
    reference: Sequence[CategoryKeywords],
    abp: BlocklistIndex,
    hphosts: BlocklistIndex,
    *,
    aliases: Iterable[str] = (),
    min_hits: int = 1,
    negative_phrases: Iterable[str] = (),
) -> DomainClassification:
    """Classify one domain from its evidence and curated-list membership.

    ``aliases`` are extra names (typically the FQDNs observed under the
    registrable domain) checked against the curated lists. A category is
    assigned once ``min_hits`` distinct phrases of it occur. When any
    negative phrase occurs, keyword categories are suppressed.
    """
    names = [evidence.domain, *aliases]
    on_abp = contains_any(abp, names)
    on_hphosts = contains_any(hphosts, names)

    texts = evidence.texts()
    all_phrases = set().union(*(ck.phrases for ck in reference)) if reference else set()
    hits = find_phrases(all_phrases, texts)
    matched: dict[Category, frozenset[str]] = {}
    for ck in reference:
        found = ck.phrases & hits
        if found:
            matched[ck.category] = matched.get(ck.category, frozenset()) | found
    categories = frozenset(c for c, p in matched.items() if len(p) >= min_hits)
    negative = frozenset(negative_phrases)
    if negative and find_phrases(negative, texts):
        categories = frozenset()

    if categories:
        path = DecisionPath.KEYWORD_MATCH
    elif on_abp or on_hphosts:
        path = DecisionPath.CURATED_LIST
    else:
        path = DecisionPath.NO_EVIDENCE
    return DomainClassification(
        domain=evidence.domain,
        is_ats=bool(categories) or on_abp or on_hphosts,
        categories=categories,
        on_abp=on_abp,
        on_hphosts=on_hphosts,
        matched_phrases=matched,
        decision_path=path,
    )

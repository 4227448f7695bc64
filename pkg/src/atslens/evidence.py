"""Landing-page and search-snippet evidence for domain classification.

Two fetchers are provided. :class:`FixtureFetcher` reads recorded pages from
disk and is what tests and reproducible runs use. :class:`LiveFetcher` hits
the network on a best-effort basis.
"""

from __future__ import annotations

import enum
import logging
import re
import threading
import time
import urllib.parse
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Protocol

log = logging.getLogger(__name__)

DEFAULT_SNIPPETS = 5
DEFAULT_SEARCH_URL = "https://html.duckduckgo.com/html/?q={query}"


class FetchStatus(str, enum.Enum):
    OK = "ok"
    UNREACHABLE = "unreachable"
    NO_CONTENT = "no_content"


@dataclass(frozen=True)
class PageEvidence:
    domain: str
    landing_text: str | None = None
    snippet_texts: tuple[str, ...] = ()
    fetched_at: date | None = None
    fetch_status: FetchStatus = FetchStatus.UNREACHABLE

    def texts(self) -> list[str]:
        out = [self.landing_text] if self.landing_text else []
        return out + [s for s in self.snippet_texts if s]


class _TextExtractor(HTMLParser):
    _SKIP = {"script", "style", "noscript", "template", "svg", "iframe"}
    _META = {"description", "og:description", "og:title", "keywords"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.title: list[str] = []
        self.meta: list[str] = []
        self.body: list[str] = []
        self._skip_depth = 0
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1
        elif tag == "title":
            self._in_title = True
        elif tag == "meta":
            a = {k.lower(): (v or "") for k, v in attrs}
            if (a.get("name") or a.get("property") or "").lower() in self._META and a.get("content"):
                self.meta.append(a["content"])

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1
        elif tag == "title":
            self._in_title = False

    def handle_data(self, data):
        if self._skip_depth:
            return
        (self.title if self._in_title else self.body).append(data)


def _squash(parts: Iterable[str]) -> str:
    return re.sub(r"\s+", " ", " ".join(parts)).strip()


def extract_visible_text(html: str) -> str:
    """Title, meta descriptions, then visible body text; scripts and styles dropped."""
    p = _TextExtractor()
    p.feed(html)
    p.close()
    return _squash([*p.title, *p.meta, *p.body])


class EvidenceFetcher(Protocol):
    def landing_page(self, domain: str) -> str | None:
        """Raw landing-page markup or text, or None when unreachable."""

    def search_snippets(self, domain: str, k: int) -> list[str] | None:
        """Descriptions of the top ``k`` results for ``<domain> about``."""


class FixtureFetcher:
    """Serves ``<domain>.landing.txt`` and ``<domain>.snippets.txt`` from a directory."""

    def __init__(self, root: str | Path, fetched_at: date | None = None) -> None:
        self.root = Path(root)
        self.fetched_at = fetched_at

    def landing_page(self, domain: str) -> str | None:
        path = self.root / f"{domain}.landing.txt"
        return path.read_text(encoding="utf-8") if path.is_file() else None

    def search_snippets(self, domain: str, k: int) -> list[str] | None:
        path = self.root / f"{domain}.snippets.txt"
        if not path.is_file():
            return None
        lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
        return [ln for ln in lines if ln][:k]


class _SnippetParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.snippets: list[str] = []
        self._depth = 0
        self._buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if self._depth:
            self._depth += 1
            return
        cls = dict(attrs).get("class") or ""
        if "result__snippet" in cls.split():
            self._depth = 1
            self._buf = []

    def handle_endtag(self, tag):
        if self._depth:
            self._depth -= 1
            if not self._depth:
                self.snippets.append(_squash(self._buf))

    def handle_data(self, data):
        if self._depth:
            self._buf.append(data)


class LiveFetcher:
    """Fetches landing pages over HTTP(S) and snippets from an HTML search endpoint.

    ``search_url`` must contain ``{query}``. Requests to the search endpoint
    are spaced by at least ``delay`` seconds across threads.
    """

    def __init__(self, search_url: str = DEFAULT_SEARCH_URL, timeout: float = 10.0, delay: float = 1.0,
                 user_agent: str = "Mozilla/5.0 (compatible; atslens)") -> None:
        self.search_url = search_url
        self.timeout = timeout
        self.delay = delay
        self.user_agent = user_agent
        self.fetched_at = date.today()
        self._lock = threading.Lock()
        self._last = 0.0

    def _get(self, url: str) -> str:
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            charset = resp.headers.get_content_charset() or "utf-8"
            return resp.read(2_000_000).decode(charset, errors="replace")

    def landing_page(self, domain: str) -> str | None:
        for scheme in ("https", "http"):
            try:
                return self._get(f"{scheme}://{domain}/")
            except Exception as exc:  # network errors come in many types
                log.debug("landing %s://%s failed: %s", scheme, domain, exc)
        return None

    def search_snippets(self, domain: str, k: int) -> list[str] | None:
        with self._lock:
            wait = self._last + self.delay - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last = time.monotonic()
        url = self.search_url.format(query=urllib.parse.quote_plus(f"{domain} about"))
        try:
            page = self._get(url)
        except Exception as exc:
            log.debug("search for %s failed: %s", domain, exc)
            return None
        p = _SnippetParser()
        p.feed(page)
        return [s for s in p.snippets if s][:k]


def gather_evidence(domain: str, fetcher: EvidenceFetcher, k: int = DEFAULT_SNIPPETS) -> PageEvidence:
    """Collect landing text and up to ``k`` search snippets. Never raises on fetch failure."""
    try:
        raw = fetcher.landing_page(domain)
    except Exception as exc:
        log.warning("landing page for %s: %s", domain, exc)
        raw = None
    try:
        snippets = fetcher.search_snippets(domain, k)
    except Exception as exc:
        log.warning("snippets for %s: %s", domain, exc)
        snippets = None
    fetched_at = getattr(fetcher, "fetched_at", None)
    if raw is None and snippets is None:
        return PageEvidence(domain, fetched_at=fetched_at, fetch_status=FetchStatus.UNREACHABLE)
    landing = extract_visible_text(raw) if raw is not None else ""
    snippets = tuple(s for s in (snippets or []) if s.strip())[:k]
    if not landing and not snippets:
        return PageEvidence(domain, fetched_at=fetched_at, fetch_status=FetchStatus.NO_CONTENT)
    return PageEvidence(domain, landing or None, snippets, fetched_at, FetchStatus.OK)


def gather_all(domains: Iterable[str], fetcher: EvidenceFetcher, k: int = DEFAULT_SNIPPETS,
               max_workers: int = 4) -> dict[str, PageEvidence]:
    """Gather evidence for many domains concurrently; output is keyed and sorted by domain."""
    ordered = sorted(set(domains))
    if max_workers <= 1:
        results = [gather_evidence(d, fetcher, k) for d in ordered]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda d: gather_evidence(d, fetcher, k), ordered))
    return dict(zip(ordered, results))

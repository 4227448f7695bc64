"""Brute-force reference implementations used to check the optimized code paths.

Nothing here imports from atslens except plain data types, so an error in the
package cannot leak into its own expected values.
"""

from __future__ import annotations

from collections import defaultdict


def psl_rules(text: str) -> list[str]:
    """Raw rule strings of a PSL file, in file order."""
    rules = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("//"):
            rules.append(line.split()[0].lower())
    return rules


def psl_registrable_linear(fqdn: str, rules: list[str]) -> str | None:
    """PSL algorithm by linear scan over every rule; None if no registrable domain.

    A rule matches when its labels, compared right to left, equal the
    domain's labels, with ``*`` matching any single label.
    """
    labels = fqdn.split(".")
    matches = []
    for rule in rules:
        exception = rule.startswith("!")
        rlabels = (rule[1:] if exception else rule).split(".")
        if len(rlabels) > len(labels):
            continue
        if all(r == "*" or r == d for r, d in zip(reversed(rlabels), reversed(labels))):
            matches.append((exception, len(rlabels)))
    exceptions = [n for exc, n in matches if exc]
    if exceptions:
        suffix_len = max(exceptions) - 1
    elif matches:
        suffix_len = max(n for _, n in matches)
    else:
        suffix_len = 1
    if len(labels) <= suffix_len:
        return None
    return ".".join(labels[-(suffix_len + 1):])


def tally_graph(records, reduce):
    """Hash-map tally: (app, domain) -> [flows, tx, rx, fqdns]; plus drop count."""
    edges = defaultdict(lambda: [0, 0, 0, set()])
    dropped = 0
    for r in records:
        d = reduce(r.fqdn)
        if d is None:
            dropped += 1
            continue
        e = edges[(r.app_id, d)]
        e[0] += 1
        e[1] += r.bytes_tx
        e[2] += r.bytes_rx
        e[3].add(r.fqdn)
    return dict(edges), dropped


def degree_candidates(edges) -> set[str]:
    apps_by_domain = defaultdict(set)
    for app, domain in edges:
        apps_by_domain[domain].add(app)
    return {d for d, apps in apps_by_domain.items() if len(apps) >= 2}


def party_by_pairs(edges, candidates, stoplist, min_len=3):
    """Compare every adjacent (app, domain) token pair; returns domain -> (status, matched apps)."""
    def app_tokens(app):
        return {t for t in app.lower().split(".") if len(t) >= min_len and t not in stoplist}

    def domain_tokens(domain):
        first = domain.split(".")[0]
        return {t for t in [first] + first.split("-") if len(t) >= min_len and t not in stoplist}

    result = {}
    domains = {d for _, d in edges}
    for d in domains:
        if d not in candidates:
            result[d] = ("single_app", set())
            continue
        matched = {a for a, dd in edges if dd == d and app_tokens(a) & domain_tokens(d)}
        result[d] = ("first_party" if matched else "third_party", matched)
    return result


def suffix_scan(entries, query: str) -> bool:
    """Linear scan: query equals an entry or ends with '.' + entry."""
    return any(query == e or query.endswith("." + e) for e in entries)


def phrase_in_text(phrase: str, text: str) -> bool:
    """Whole-word containment via padded string search over re-joined tokens."""
    cleaned = []
    for ch in text.lower():
        cleaned.append(ch if (ch.isalnum() or ch in "-/") else " ")
    tokens = [t.strip("-/") for t in "".join(cleaned).split()]
    joined = " " + " ".join(t for t in tokens if t) + " "
    return (" " + phrase + " ") in joined


def ecdf_points(values):
    values = sorted(values)
    n = len(values)
    out = []
    for v in sorted(set(values)):
        out.append((v, sum(1 for x in values if x <= v) / n))
    return out

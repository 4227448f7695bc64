"""Build the six-weather-app graph and print candidate and party verdicts.

    python scripts/weather_demo.py
"""

from __future__ import annotations

from atslens.graph import build_graph, default_stoplist, resolve_party, third_party_candidates
from atslens.psl import default_psl
from atslens.synthetic import weather_records


def main() -> None:
    g = build_graph(weather_records(), default_psl())
    cands = third_party_candidates(g)
    verdicts = resolve_party(g, cands, default_stoplist())
    print(f"apps={len(g.apps)} domains={len(g.domains)} edges={len(g.edges)}")
    for domain in sorted(g.domains):
        v = verdicts[domain]
        matched = ", ".join(sorted(v.matched_apps)) or "-"
        print(f"{domain:24s} degree={g.degree(domain)} {v.status.value:12s} matched: {matched}")


if __name__ == "__main__":
    main()

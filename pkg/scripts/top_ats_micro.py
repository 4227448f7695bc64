"""Micro-reproduction of the top-10 ATS ranking and cross-platform site counts.

Builds a 1732-app flow log and a 1000-site web-presence file whose counts
match the published top-10 list, then prints the ranking table.

    python scripts/top_ats_micro.py [--seed 4]
"""

from __future__ import annotations

import argparse

from atslens.blocklists import parse_abp_filters, parse_hosts_file
from atslens.classifier import classify_domain, default_keyword_reference
from atslens.evidence import FetchStatus, PageEvidence
from atslens.graph import build_graph
from atslens.psl import default_psl
from atslens.reports import cross_platform, load_web_presence, rank_ats_domains
from atslens.synthetic import TOP_ATS, top_ats_fixture


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=4)
    args = ap.parse_args(argv)

    fx = top_ats_fixture(args.seed)
    g = build_graph(fx.records, default_psl())
    abp, hosts = parse_abp_filters(fx.abp_text.encode()), parse_hosts_file(fx.hosts_text.encode())
    ref = list(default_keyword_reference())
    classes = {d: classify_domain(PageEvidence(d, "mobile analytics", (), None, FetchStatus.OK), ref, abp, hosts)
               for d, *_ in TOP_ATS}
    ranking = rank_ats_domains(g, classes, 10)
    cp = {r.domain: r for r in cross_platform(classes, load_web_presence(fx.web_presence_csv.encode()),
                                              abp, hosts, g).rows}
    print(f"{'domain':24s} {'ABP':>4s} {'hpH':>4s} {'#apps':>6s} {'frac':>7s} {'#sites':>7s}")
    for row in ranking:
        c = cp[row.domain]
        print(f"{row.domain:24s} {'y' if c.on_abp else 'n':>4s} {'y' if c.on_hphosts else 'n':>4s} "
              f"{row.app_count:6d} {row.app_fraction:7.4f} {c.site_count:7d}")


if __name__ == "__main__":
    main()

"""Fixture generators for tests, demos and the experiment scripts.

Each generator is deterministic for a given seed and, where a ground truth
exists, returns it alongside the data so callers never have to re-derive it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .flows import FlowRecord, serialize_flow_log

WEATHER_APPS = (
    "com.accuweather.android",
    "com.accuweather.paid.android",
    "com.weather.Weather",
    "com.handmark.expressweather",
    "com.levelup.brightweather",
    "com.wunderground.forecast",
)


def weather_records() -> list[FlowRecord]:
    """Six weather apps; the two Accuweather apps reach accuweather.com, all six reach urbanairship.com."""
    records = []
    for i, app in enumerate(WEATHER_APPS):
        if app.startswith("com.accuweather"):
            records.append(FlowRecord(app, "api.accuweather.com", 1200 + i, 48000 + i, True))
            records.append(FlowRecord(app, "vortex.accuweather.com", 300, 900, True))
        records.append(FlowRecord(app, "device-api.urbanairship.com", 800 + i, 2400, True))
    return records


# Top-10 ATS domains as (domain, on ABP, on hpHosts, #apps, #sites).
TOP_ATS = (
    ("crashlytics.com", False, False, 434, 0),
    ("facebook.com", False, True, 406, 623),
    ("doubleclick.net", True, True, 190, 621),
    ("gstatic.com", False, True, 172, 509),
    ("googlesyndication.com", False, True, 160, 441),
    ("flurry.com", True, True, 133, 0),
    ("appsflyer.com", False, True, 95, 9),
    ("google-analytics.com", True, True, 95, 664),
    ("googletagmanager.com", True, True, 78, 200),
    ("googleadservices.com", True, True, 72, 470),
)
TOP_ATS_APPS = 1732
TOP_ATS_SITES = 1000


@dataclass
class TopAtsFixture:
    records: list[FlowRecord]
    abp_text: str
    hosts_text: str
    web_presence_csv: str


def top_ats_fixture(seed: int = 4) -> TopAtsFixture:
    """A flow log over 1732 apps and a 1000-site web-presence file matching the TOP_ATS counts.

    Every app also talks to a neutral CDN so that all 1732 apps appear in the graph.
    """
    rng = random.Random(seed)
    apps = [f"com.studio{i:04d}.title{i:04d}" for i in range(TOP_ATS_APPS)]
    records = [FlowRecord(a, "static.neutralcdn.net", 100, 5000, True) for a in apps]
    for domain, _, _, n_apps, _ in TOP_ATS:
        for app in rng.sample(apps, n_apps):
            records.append(FlowRecord(app, f"api.{domain}", 200, 700, True))
    abp = "[Adblock Plus 2.0]\n" + "".join(f"||{d}^$third-party\n" for d, on_abp, *_ in TOP_ATS if on_abp)
    hosts = "# hosts\n" + "".join(f"0.0.0.0 {d}\n" for d, _, on_hp, *_ in TOP_ATS if on_hp)
    sites = [f"site{i:04d}.example" for i in range(TOP_ATS_SITES)]
    rows = ["site,domain"] + [f"{s},www.{s}" for s in sites]
    for domain, _, _, _, n_sites in TOP_ATS:
        # Embed a subdomain to exercise subdomain-aware matching.
        rows += [f"{s},cdn.{domain}" for s in rng.sample(sites, n_sites)]
    return TopAtsFixture(records, abp, hosts, "\n".join(rows) + "\n")


def random_flow_log(rng: random.Random, max_apps: int = 50, max_domains: int = 100,
                    max_flows: int = 5000) -> list[FlowRecord]:
    """Random flows whose app and domain names share a small token vocabulary.

    The shared vocabulary makes token matches (first-party verdicts) common.
    Some FQDNs sit under multi-label suffixes or are bare suffixes, which the
    graph builder must reduce or drop.
    """
    vocab = ["acme", "zenith", "orbit", "pixel", "nova", "delta", "quark", "lumen", "vertex", "ember",
             "go", "ad", "free", "android"]
    suffixes = ["com", "net", "io", "co.uk", "appspot.com", "com.au"]
    n_apps = rng.randint(1, max_apps)
    n_domains = rng.randint(1, max_domains)
    apps = sorted({
        ".".join(["com", *rng.sample(vocab, rng.randint(1, 2)), f"a{i}"]) for i in range(n_apps)
    })
    domains = []
    for i in range(n_domains):
        brand = rng.choice(vocab) + (f"-{rng.choice(vocab)}" if rng.random() < 0.3 else "") + str(i % 7 or "")
        domains.append(f"{brand}.{rng.choice(suffixes)}")
    records = []
    for _ in range(rng.randint(1, max_flows)):
        d = rng.choice(domains)
        r = rng.random()
        fqdn = d if r < 0.4 else f"{rng.choice(['api', 'cdn', 'x.y'])}.{d}" if r < 0.98 else d.split(".", 1)[1]
        records.append(FlowRecord(rng.choice(apps), fqdn, rng.randint(0, 10_000), rng.randint(0, 100_000),
                                  rng.random() < 0.7))
    return records


@dataclass
class Corpus:
    """A generated end-to-end input set plus its ground truth."""

    flow_log: Path
    evidence_dir: Path
    abp: Path
    hphosts: Path
    snapshot: Path
    web_presence: Path
    truth: dict = field(default_factory=dict)


_AD_TEXT = "Mobile advertising platform. Monetize your app with interstitial ads and rewarded video."
_ANALYTICS_TEXT = "Real-time app analytics and crash reporting with business intelligence dashboards."
_ENGAGE_TEXT = "Send push notifications, run a/b tests and manage CRM campaigns for your users."
_NEUTRAL_TEXT = "Welcome to our company. We build great products for customers around the world."


def synthetic_corpus(root: str | Path, n_apps: int = 50, seed: int = 7) -> Corpus:
    """Write a planted corpus under ``root`` and return paths plus ground truth.

    Planted third-party services: ad networks, analytics, user engagement,
    multi-label (analytics + ads), list-only trackers with no page evidence,
    vendor-labelled CDNs (prefiltered) and neutral services. Pairs of apps
    from one developer share a first-party domain; every app also has a
    private single-app backend.
    """
    rng = random.Random(seed)
    root = Path(root)
    ev = root / "evidence"
    ev.mkdir(parents=True, exist_ok=True)

    devs = [f"maker{i:02d}" for i in range(n_apps // 2)]
    apps = []
    for dev in devs:
        apps += [f"com.{dev}.title", f"com.{dev}.title.paid"]
    apps = apps[:n_apps]

    planted = {
        "ad": [f"adserve{i}.net" for i in range(6)],
        "analytics": [f"metricsly{i}.io" for i in range(5)],
        "engage": [f"pushly{i}.com" for i in range(4)],
        "multi": [f"flurrish{i}.com" for i in range(3)],
        "list_only": [f"silenttrack{i}.net" for i in range(3)],
        "cdn": [f"fastedge{i}.net" for i in range(4)],
        "neutral": [f"plainservice{i}.org" for i in range(3)],
    }
    texts = {"ad": [_AD_TEXT], "analytics": [_ANALYTICS_TEXT], "engage": [_ENGAGE_TEXT],
             "multi": [_ANALYTICS_TEXT, "Also offers mobile ads."], "neutral": [_NEUTRAL_TEXT],
             "cdn": [_NEUTRAL_TEXT]}

    records = []
    for kind, domains in planted.items():
        for d in domains:
            for app in rng.sample(apps, rng.randint(2, min(12, len(apps)))):
                records.append(FlowRecord(app, f"api.{d}", rng.randint(10, 5000), rng.randint(10, 50_000), True))
            if kind in texts:
                landing, *snips = texts[kind]
                (ev / f"{d}.landing.txt").write_text(f"<html><title>{d}</title><body><p>{landing}</p>"
                                                     "<script>var ads = 1;</script></body></html>")
                if snips:
                    (ev / f"{d}.snippets.txt").write_text("\n".join(snips) + "\n")
    for dev in devs:
        for app in (a for a in apps if a.startswith(f"com.{dev}.")):
            records.append(FlowRecord(app, f"www.{dev}.com", 500, 90_000, True))
    for i, app in enumerate(apps):
        records.append(FlowRecord(app, f"backend.solo{i:03d}.com", 100, 1000, False))
    rng.shuffle(records)

    flow_log = root / "flows.jsonl"
    flow_log.write_text(serialize_flow_log(records))
    abp = root / "easylist.txt"
    abp.write_text("[Adblock Plus 2.0]\n! planted\n" + "".join(f"||{d}^\n" for d in planted["list_only"][:1]))
    hosts = root / "hosts.txt"
    hosts.write_text("# planted\n" + "".join(f"127.0.0.1 {d}\n" for d in planted["list_only"]))
    snapshot = root / "snapshot.csv"
    snapshot.write_text("domain,provider,labels\n" + "".join(f"{d},synthetic,Content Delivery Networks\n"
                                                              for d in planted["cdn"]))
    web = root / "web_presence.csv"
    web.write_text("site,domain\n" + "".join(f"site{i}.example,{d}\n"
                                             for i, d in enumerate(planted["ad"] + planted["analytics"][:2])))

    ats = planted["ad"] + planted["analytics"] + planted["engage"] + planted["multi"] + planted["list_only"]
    truth = {
        "apps": len(apps),
        "candidates": sum(len(v) for v in planted.values()) + len(devs),
        "first_party": len(devs),
        "third_party": sum(len(v) for v in planted.values()),
        "prefiltered_non_ats": len(planted["cdn"]),
        "ats": len(ats),
        "non_ats": len(planted["cdn"]) + len(planted["neutral"]),
        "ats_ad_network": len(planted["ad"]) + len(planted["multi"]),
        "ats_analytics": len(planted["analytics"]) + len(planted["multi"]),
        "ats_user_engagement": len(planted["engage"]),
        "ats_multi_category": len(planted["multi"]),
        "ats_abp": 1,
        "ats_hphosts": len(planted["list_only"]),
        "planted": planted,
    }
    (root / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
    return Corpus(flow_log, ev, abp, hosts, snapshot, web, truth)

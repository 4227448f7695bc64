import pytest
from hypothesis import given, strategies as st

from atslens.blocklists import (
    BlocklistIndex,
    abp_rule_domain,
    contains,
    export_index,
    parse_abp_filters,
    parse_hosts_file,
)

from conftest import FIXTURES
from oracles import suffix_scan

EASYLIST_DOMAINS = {
    "doubleclick.net", "googlesyndication.com", "googleadservices.com", "flurry.com", "2mdn.net",
    "adnxs.com", "mathtag.com", "moatads.com", "adcolony.com", "google-analytics.com",
    "googletagmanager.com", "baidu.com",
}
HOSTS_DOMAINS = {"ubermedia.com", "appsflyer.com", "facebook.com", "flurry.com", "gstatic.com",
                 "doubleclick.net", "googlesyndication.com"}


def test_hosts_single_entry():
    assert "ubermedia.com" in parse_hosts_file(b"127.0.0.1 ubermedia.com\n").domains


def test_hosts_comment_only():
    idx = parse_hosts_file(b"# comment\n")
    assert idx.domains == frozenset() and idx.rule_count == 0 and idx.skipped_count == 0


def test_hosts_fixture_hand_count():
    idx = parse_hosts_file(FIXTURES / "hosts_ats.txt")
    assert idx.domains == HOSTS_DOMAINS
    assert len(idx.domains) == 7
    assert idx.skipped_count == 1
    assert idx.rule_count == 8


def test_hosts_non_sink_ip_and_localhost_skipped():
    idx = parse_hosts_file(b"127.0.0.1 localhost\n::1 localhost\n10.0.0.1 a.com\n0.0.0.0 b.com c.com\n")
    assert idx.domains == {"b.com", "c.com"}
    assert idx.skipped_count == 3
    assert idx.rule_count == 5


@pytest.mark.parametrize("line, domain", [
    ("||doubleclick.net^", "doubleclick.net"),
    ("||ads.example.com^$third-party", "ads.example.com"),
    ("||Example.COM^|", "example.com"),
    ("adserver.example.org", "adserver.example.org"),
    ("@@||example.com^", None),
    ("||example.com^$badfilter", None),
    ("example.com##.ad", None),
    ("##.ad-banner", None),
    ("example.org#@#.ad", None),
    ("||example.com/ads/*", None),
    ("||example.com^*/script.js", None),
    ("/^https?:\\/\\/ads\\./", None),
    ("|https://ads.example.net/", None),
    ("! comment", None),
    ("[Adblock Plus 2.0]", None),
    ("-ad-banner.", None),
    ("ads", None),
])
def test_abp_rule_domain(line, domain):
    assert abp_rule_domain(line) == domain


def test_easylist_excerpt_hand_count():
    idx = parse_abp_filters(FIXTURES / "easylist_excerpt.txt")
    assert idx.domains == EASYLIST_DOMAINS
    assert idx.rule_count == 50
    assert idx.skipped_count == 50 - 12


def test_contains_examples():
    idx = parse_abp_filters(b"||doubleclick.net^\n||facebook.com^\n")
    assert contains(idx, "ad.doubleclick.net")
    assert contains(idx, "doubleclick.net")
    assert not contains(idx, "notfacebook.com")
    assert not contains(idx, "net")


QUERIES = [
    "doubleclick.net", "ad.doubleclick.net", "stats.g.doubleclick.net", "notdoubleclick.net",
    "doubleclick.net.evil.com", "google-analytics.com", "ssl.google-analytics.com", "analytics.com",
    "baidu.com", "hm.baidu.com", "baidu.co", "flurry.com", "data.flurry.com", "xflurry.com",
    "mathtag.com", "pixel.mathtag.com", "facebook.com", "graph.facebook.com", "notfacebook.com",
    "2mdn.net",
]


def test_contains_matches_suffix_scan_on_easylist():
    idx = parse_abp_filters(FIXTURES / "easylist_excerpt.txt")
    for q in QUERIES:
        assert contains(idx, q) == suffix_scan(EASYLIST_DOMAINS, q), q


def test_export_sorted():
    idx = parse_hosts_file(FIXTURES / "hosts_ats.txt")
    assert export_index(idx).splitlines() == sorted(HOSTS_DOMAINS)


label = st.from_regex(r"[a-z0-9]{1,5}", fullmatch=True)
host = st.lists(label, min_size=2, max_size=4).map(".".join)


@given(st.sets(host, max_size=8), host, label)
def test_downward_closure(entries, query, extra):
    idx = BlocklistIndex("abp", frozenset(entries), len(entries), 0)
    assert contains(idx, query) == suffix_scan(entries, query)
    if contains(idx, query):
        assert contains(idx, f"{extra}.{query}")


@given(st.lists(st.one_of(
    host.map(lambda h: f"||{h}^"), host, st.just("! c"), st.just("##.x"), host.map(lambda h: f"@@||{h}^"),
    st.text(alphabet="abc/*^$|.-", max_size=10)), max_size=20))
def test_abp_counts_add_up_and_deterministic(lines):
    data = "\n".join(lines).encode()
    idx = parse_abp_filters(data)
    accepted = sum(1 for ln in lines if ln.strip() and abp_rule_domain(ln) is not None)
    assert idx.rule_count == accepted + idx.skipped_count
    assert idx.rule_count >= len(idx.domains)
    assert parse_abp_filters(data) == idx

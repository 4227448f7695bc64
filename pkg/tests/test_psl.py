import pytest
from hypothesis import given, strategies as st

from atslens._io import data_path
from atslens.psl import NoRegistrableDomain, load_public_suffix_list, registrable_domain

from conftest import FIXTURES
from oracles import psl_registrable_linear, psl_rules


def test_partition_of_rules():
    psl = load_public_suffix_list(b"com\nco.uk\n*.ck\n!www.ck\n")
    assert psl.exact_rules == {"com", "co.uk"}
    assert psl.wildcard_rules == {"ck"}
    assert psl.exception_rules == {"www.ck"}


def test_empty_input():
    psl = load_public_suffix_list(b"")
    assert not (psl.exact_rules or psl.wildcard_rules or psl.exception_rules)


def test_comments_and_trailing_tokens_ignored():
    psl = load_public_suffix_list(b"// comment\n\ncom  extra\n  net\n")
    assert psl.exact_rules == {"com", "net"}


def test_bad_rule_counted_not_fatal():
    psl = load_public_suffix_list(b"com\n*.\n!org\n")
    assert psl.exact_rules == {"com"}
    assert psl.skipped_lines == 2


def test_vendored_snapshot_loads_cleanly(psl):
    assert psl.skipped_lines == 0
    assert {"com", "co.uk", "appspot.com"} <= psl.exact_rules
    assert "ck" in psl.wildcard_rules and "www.ck" in psl.exception_rules


def test_unicode_rules_stored_as_punycode(psl):
    # 公司.cn in the snapshot
    assert "xn--55qx5d.cn" in psl.exact_rules
    assert registrable_domain("shop.example.xn--55qx5d.cn", psl) == "example.xn--55qx5d.cn"


def test_private_section_can_be_disabled():
    psl = load_public_suffix_list(FIXTURES / "psl_small.dat", include_private=False)
    assert "appspot.com" not in psl.exact_rules
    assert registrable_domain("avg-hrd.appspot.com", psl) == "appspot.com"


@pytest.mark.parametrize("fqdn, expected", [
    ("graph.facebook.com", "facebook.com"),
    ("avg-hrd.appspot.com", "avg-hrd.appspot.com"),
    ("a.b.co.uk", "b.co.uk"),
    ("www.ck", "www.ck"),
    ("a.www.ck", "www.ck"),
    ("foo.bar.ck", "foo.bar.ck"),
    ("x.city.kawasaki.jp", "city.kawasaki.jp"),
    ("a.b.c.kawasaki.jp", "b.c.kawasaki.jp"),
    ("host.unknowntld", "host.unknowntld"),
    ("a.b.host.unknowntld", "host.unknowntld"),
])
def test_registrable_domain_examples(fqdn, expected, psl):
    assert registrable_domain(fqdn, psl) == expected


@pytest.mark.parametrize("fqdn", ["com", "co.uk", "bar.ck", "appspot.com", "x.kawasaki.jp", "s3.amazonaws.com"])
def test_public_suffix_has_no_registrable_domain(fqdn, psl):
    with pytest.raises(NoRegistrableDomain):
        registrable_domain(fqdn, psl)


SMALL_TEXT = (FIXTURES / "psl_small.dat").read_text()
SMALL_RULES = psl_rules(SMALL_TEXT)

labels = st.sampled_from(["a", "www", "city", "foo", "co", "uk", "ck", "com", "kawasaki", "jp", "appspot",
                          "compute", "amazonaws", "au", "net", "zz"])


@given(st.lists(labels, min_size=1, max_size=6).map(".".join))
def test_agrees_with_linear_scan(small_psl, fqdn):
    expected = psl_registrable_linear(fqdn, SMALL_RULES)
    if expected is None:
        with pytest.raises(NoRegistrableDomain):
            registrable_domain(fqdn, small_psl)
    else:
        assert registrable_domain(fqdn, small_psl) == expected


@given(st.lists(labels, min_size=1, max_size=6).map(".".join))
def test_idempotent_and_label_aligned_suffix(small_psl, fqdn):
    try:
        reg = registrable_domain(fqdn, small_psl)
    except NoRegistrableDomain:
        return
    assert fqdn == reg or fqdn.endswith("." + reg)
    assert registrable_domain(reg, small_psl) == reg


def test_full_snapshot_agrees_with_linear_scan_on_sample(psl):
    rules = psl_rules(data_path("public_suffix_list.dat").read_text(encoding="utf-8"))
    rules = [r for r in rules if r.isascii()]
    cases = ["graph.facebook.com", "avg-hrd.appspot.com", "a.b.co.uk", "x.www.ck", "q.foo.ck",
             "s3.amazonaws.com", "bucket.s3.amazonaws.com", "user.github.io", "a.b.city.kobe.jp",
             "x.y.z.nodomain", "api.crashlytics.com", "ssl.google-analytics.com", "foo.blogspot.co.uk"]
    for fqdn in cases:
        expected = psl_registrable_linear(fqdn, rules)
        try:
            got = registrable_domain(fqdn, psl)
        except NoRegistrableDomain:
            got = None
        assert got == expected, fqdn

import json
import random
import subprocess
import sys

import pytest

from atslens.cli import main
from atslens.flows import FlowRecord, serialize_flow_log
from atslens.graph import default_stoplist
from atslens.psl import NoRegistrableDomain, default_psl, registrable_domain
from atslens.synthetic import weather_records, random_flow_log, synthetic_corpus

from oracles import degree_candidates, party_by_pairs, tally_graph


@pytest.fixture
def weather_inputs(tmp_path):
    flows = tmp_path / "flows.jsonl"
    flows.write_text(serialize_flow_log(weather_records()))
    ev = tmp_path / "evidence"
    ev.mkdir()
    (ev / "urbanairship.com.landing.txt").write_text(
        "<title>Airship</title><p>Mobile push notification and in-app messaging platform</p>")
    return tmp_path, flows, ev


def args_for(flows, ev, out, *extra):
    return ["--flow-log", str(flows), "--evidence-dir", str(ev), "--out", str(out), *extra]


def test_weather_analyze_manifest(weather_inputs, capsys):
    tmp, flows, ev = weather_inputs
    assert main(["analyze", *args_for(flows, ev, tmp / "out")]) == 0
    m = json.loads((tmp / "out" / "run_manifest.json").read_text())
    c = m["counts"]
    assert (c["candidates"], c["first_party"], c["third_party"]) == (2, 1, 1)
    assert (c["ats"], c["non_ats"], c["ats_user_engagement"]) == (1, 0, 1)
    assert m["inputs"]["flow_log"]["sha256"]
    assert m["inputs"]["psl"]["path"] == "bundled:public_suffix_list.dat"
    assert "third_party: 1" in capsys.readouterr().out
    cls = [json.loads(x) for x in (tmp / "out" / "classifications.jsonl").read_text().splitlines()]
    assert [x["domain"] for x in cls] == ["urbanairship.com"]


def test_missing_psl_is_validation_error(weather_inputs, capsys):
    tmp, flows, ev = weather_inputs
    out = tmp / "out"
    assert main(["analyze", *args_for(flows, ev, out, "--psl", str(tmp / "nope.dat"))]) == 1
    assert not out.exists()
    assert "psl_path" in capsys.readouterr().err


def test_fixture_mode_needs_dir(weather_inputs):
    tmp, flows, _ = weather_inputs
    assert main(["analyze", "--flow-log", str(flows), "--out", str(tmp / "o")]) == 1


def test_stage_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "flows.csv"
    bad.write_text("wrong,header\n")
    assert main(["graph", "--flow-log", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "stage ingest" in capsys.readouterr().err


def test_config_file_and_flag_override(weather_inputs):
    tmp, flows, ev = weather_inputs
    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"flow_log_path": str(flows), "evidence_fixture_dir": str(ev),
                               "output_dir": str(tmp / "ignored"), "output_format": "json"}))
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp / "o")]) == 0
    assert (tmp / "o" / "ranking.json").exists() and not (tmp / "ignored").exists()


def test_unknown_config_key(weather_inputs):
    tmp, _, _ = weather_inputs
    cfg = tmp / "cfg.json"
    cfg.write_text('{"flowlog": "x"}')
    assert main(["graph", "--config", str(cfg)]) == 1


def test_synthetic_corpus_counts_match_ground_truth(tmp_path):
    corpus = synthetic_corpus(tmp_path / "corpus")
    out = tmp_path / "out"
    rc = main(["analyze", "--flow-log", str(corpus.flow_log), "--evidence-dir", str(corpus.evidence_dir),
               "--abp", str(corpus.abp), "--hphosts", str(corpus.hphosts), "--snapshot", str(corpus.snapshot),
               "--web-presence", str(corpus.web_presence), "--out", str(out)])
    assert rc == 0
    counts = json.loads((out / "run_manifest.json").read_text())["counts"]
    truth = corpus.truth
    for key, value in truth.items():
        if key != "planted":
            assert counts[key] == value, key
    assert counts["candidates"] == counts["first_party"] + counts["third_party"]
    assert counts["ats"] + counts["non_ats"] == counts["third_party"]
    cls = {json.loads(x)["domain"]: json.loads(x) for x in (out / "classifications.jsonl").read_text().splitlines()}
    for d in truth["planted"]["multi"]:
        assert cls[d]["categories"] == ["ad_network", "analytics"]
    for d in truth["planted"]["cdn"]:
        assert cls[d]["decision_path"] == "prefiltered_non_ats"


def test_classify_outputs_and_determinism(weather_inputs):
    tmp, flows, ev = weather_inputs
    assert main(["classify", *args_for(flows, ev, tmp / "a")]) == 0
    assert main(["classify", *args_for(flows, ev, tmp / "b")]) == 0
    a = (tmp / "a" / "classifications.jsonl").read_bytes()
    assert a == (tmp / "b" / "classifications.jsonl").read_bytes()
    assert len(a.splitlines()) == 1
    assert sorted(p.name for p in (tmp / "a").iterdir()) == ["classifications.jsonl"]


def test_classify_with_no_third_party(tmp_path):
    flows = tmp_path / "f.jsonl"
    flows.write_text(serialize_flow_log([FlowRecord("com.a.b", "x.com", 1, 1, True)]))
    (tmp_path / "ev").mkdir()
    assert main(["classify", *args_for(flows, tmp_path / "ev", tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "classifications.jsonl").read_text() == ""


def _parties(out):
    return {r["domain"]: r for r in map(json.loads, (out / "parties.jsonl").read_text().splitlines())}


def test_graph_command_weather(weather_inputs):
    tmp, flows, _ = weather_inputs
    assert main(["graph", "--flow-log", str(flows), "--out", str(tmp / "g")]) == 0
    parties = _parties(tmp / "g")
    assert parties["accuweather.com"]["status"] == "first_party"
    assert parties["urbanairship.com"]["status"] == "third_party"
    assert len(json.loads((tmp / "g" / "graph.json").read_text())["edges"]) == 8


def test_graph_command_single_record(tmp_path):
    flows = tmp_path / "f.csv"
    flows.write_text("app_id,fqdn,bytes_tx,bytes_rx,is_tls,timestamp\ncom.a.b,x.com,1,1,true,\n")
    assert main(["graph", "--flow-log", str(flows), "--out", str(tmp_path / "g")]) == 0
    assert [r["status"] for r in _parties(tmp_path / "g").values()] == ["single_app"]


def test_graph_command_random_log_matches_oracle(tmp_path):
    records = random_flow_log(random.Random(99), max_apps=30, max_domains=60, max_flows=2000)
    flows = tmp_path / "f.jsonl"
    flows.write_text(serialize_flow_log(records))
    assert main(["graph", "--flow-log", str(flows), "--out", str(tmp_path / "g")]) == 0
    psl = default_psl()

    def reduce(f):
        try:
            return registrable_domain(f, psl)
        except NoRegistrableDomain:
            return None

    edges, _ = tally_graph(records, reduce)
    oracle = party_by_pairs(edges, degree_candidates(edges), default_stoplist())
    got = {d: (r["status"], set(r["matched_apps"])) for d, r in _parties(tmp_path / "g").items()}
    assert got == oracle


def test_module_entry_point(weather_inputs):
    tmp, flows, _ = weather_inputs
    proc = subprocess.run([sys.executable, "-m", "atslens", "graph", "--flow-log", str(flows),
                           "--out", str(tmp / "m")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "candidates: 2" in proc.stdout

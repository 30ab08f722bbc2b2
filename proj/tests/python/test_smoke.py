import json
import math

import pytest

import alfcheck


def test_commands_and_metrics():
    assert "case-analysis" in alfcheck.commands()
    assert set(alfcheck.metric_names()) >= {"schwarzschild", "kerr", "taub-nut", "taub-bolt"}


def test_list_metrics_report():
    ok, doc = alfcheck.run("list-metrics")
    assert ok
    assert doc["schema"] == "alfcheck.report/1"
    assert "envelope" not in doc


def test_two_nut_pairs_at_weight_three():
    ok, lines = alfcheck.run("classify", chi=2, sign=0, max_weight=3, max_nuts=2)
    assert ok
    *rows, tail = lines
    assert tail["summary"]["count"] == len(rows)
    configs = [r["config"]["nuts"] for r in rows]
    assert [[-1, 1, 2], [1, 1, 2]] in configs
    assert all(len(c) == 2 for c in configs)


def test_signature_identity():
    assert alfcheck.signature_identity_holds([[1, 1, 2], [-1, 1, 2]], claimed=0)
    assert not alfcheck.signature_identity_holds([[1, 1, 2]], claimed=1)


def test_taub_nut_charge():
    ok, doc = alfcheck.run("charges", metric="taub-nut", n=1.0)
    assert ok
    assert math.isclose(doc["charges"][0]["extrapolated"], 8 * math.pi, rel_tol=1e-4)


def test_identities_are_deterministic():
    a = alfcheck.run("verify-identities", metric="schwarzschild", points=5, seed=4)
    b = alfcheck.run("verify-identities", metric="schwarzschild", points=5, seed=4)
    assert a[0]
    assert json.dumps(a[1], sort_keys=True) == json.dumps(b[1], sort_keys=True)


def test_case_analysis_markdown():
    text = alfcheck.markdown("case-analysis", topology="kerr", max_weight=4, max_nuts=3)
    assert "0 counterexamples" in text


def test_bad_input_raises():
    with pytest.raises(ValueError):
        alfcheck.run("petrov", metric="nope")
    with pytest.raises(ValueError):
        alfcheck.run("classify", colour="red")

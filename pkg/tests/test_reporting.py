import json

import pytest

from loctime.exceptions import ConfigurationError
from loctime.harness import EpsilonLadder, ExperimentSpec, run_as_convergence, run_experiment
from loctime.paths import GridSpec
from loctime.reporting import (
    SUMMARY_HEADER,
    load_report,
    markdown_summary,
    validate_report,
    write_loglog_svg,
)

G = GridSpec(1.0, 2**10)
LAD = EpsilonLadder.from_values([2.0**-3, 2.0**-4, 2.0**-5], G)


@pytest.fixture(scope="module")
def reports():
    return {s: run_experiment(ExperimentSpec(s, G, LAD, 6, 1)) for s in ("I41", "J", "I3")}


def test_schema_accepts_reports(reports):
    for r in reports.values():
        validate_report(r.to_dict())
        validate_report(r.to_dict(include_timings=False))


def test_schema_rejects_extra_and_missing_fields(reports):
    d = reports["J"].to_dict()
    with pytest.raises(ConfigurationError):
        validate_report(dict(d, surprise=1))
    broken = json.loads(json.dumps(d))
    del broken["rungs"][0]["mean_sup_error"]
    with pytest.raises(ConfigurationError):
        validate_report(broken)


def test_markdown_empty_and_verbatim(reports):
    assert markdown_summary([]) == SUMMARY_HEADER
    r = reports["J"]
    row = markdown_summary([r]).splitlines()[2]
    verdict = "PASS" if r.passed else "FAIL"
    assert row == f"| J | L | {r.rungs[-1].mean_sup_error!r} | {r.fitted_rate!r} | {verdict} |"


def test_markdown_sorted_by_scheme(reports):
    rows = markdown_summary(list(reports.values())).splitlines()[2:]
    assert [row.split("|")[1].strip() for row in rows] == ["I3", "I41", "J"]


def test_load_report_round_trip(tmp_path, reports):
    r = reports["I3"]
    (tmp_path / "r.json").write_text(r.to_json())
    assert load_report(tmp_path / "r.json") == r
    lad = EpsilonLadder.from_values([4.0**-1, 4.0**-2, 4.0**-3], G)
    a = run_as_convergence(ExperimentSpec("J", G, lad, 4, 0))
    (tmp_path / "a.json").write_text(a.to_json())
    assert load_report(tmp_path / "a.json") == a
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigurationError):
        load_report(tmp_path / "bad.json")


def test_svg_is_reproducible(tmp_path, reports):
    write_loglog_svg(reports["J"], tmp_path / "a.svg")
    write_loglog_svg(reports["J"], tmp_path / "b.svg")
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    assert a.lstrip().startswith(b"<?xml")

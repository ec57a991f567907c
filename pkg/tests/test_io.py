import io
import json

import numpy as np
import pytest

from pcman import io as pio
from pcman.core import Method, derive, validate
from pcman.detect import detect_row_manipulation
from pcman.exceptions import (
    MinimumSize,
    MissingRequired,
    NotReciprocal,
    NotSquare,
    ParseError,
    RangeError,
    UnknownKey,
)
from pcman.manip import Algorithm, ManipulationRequest, find_m, row_compute_changes
from pcman.montecarlo import ExperimentConfig, GenerationConfig, run_experiment

from oracles import C0, random_pc

C0_CSV = "\n".join(",".join(str(x) for x in row) for row in C0) + "\n"


def test_read_example_csv(tmp_path):
    path = tmp_path / "c0.csv"
    path.write_text(C0_CSV)
    C = pio.read_matrix(path)
    assert np.array_equal(C.entries, np.array(C0, dtype=float))


def test_read_json_forms():
    doc = json.dumps({"matrix": [[1, 2], [0.5, 1]]})
    assert pio.read_matrix(io.StringIO(doc), "json").n == 2
    assert pio.read_matrix(io.StringIO("[[1, 4], [0.25, 1]]"), "json")[0, 1] == 4


def test_format_inferred_from_suffix(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"matrix": [[1, 3], [0.3333333333333333, 1]]}')
    assert pio.read_matrix(path)[0, 1] == 3


@pytest.mark.parametrize("text, exc", [
    ("1\n", MinimumSize),
    ("1,2,3\n0.5,1\n", ParseError),
    ("1,2,3\n0.5,1,1\n", NotSquare),
    ("1,2\n0.5,1\n1,1\n", NotSquare),
    ("1,2\n0.4,1\n", NotReciprocal),
])
def test_read_errors(text, exc):
    with pytest.raises(exc):
        pio.read_matrix(io.StringIO(text), "csv")


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        pio.read_matrix(io.StringIO("1,2\n0.5,abc\n"), "csv")
    assert (info.value.line, info.value.column) == (2, 2)
    with pytest.raises(ParseError) as info:
        pio.read_matrix(io.StringIO('{"matrix": [[1, 2]\n'), "json")
    assert info.value.line == 2


def test_blank_lines_ignored():
    assert pio.read_matrix(io.StringIO("\n1,2\n\n0.5,1\n\n"), "csv").n == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(fmt, rng):
    for n in (2, 5, 9):
        a = random_pc(rng, n, d=3)
        text = pio.write_matrix(validate(a), fmt)
        back = pio.read_matrix(io.StringIO(text), fmt, tol=1e-9)
        assert np.allclose(back.entries, a, rtol=1e-11, atol=0)


def test_no_locale_formatting():
    # plain format specs ignore LC_NUMERIC: "." as decimal point, no grouping
    assert pio.fmt(1234567.25) == "1234567.25"
    assert pio.write_matrix([[1, 0.5], [2, 1]]) == "1,0.5\n2,1\n"


def test_fmt_digits():
    assert pio.fmt(1 / 3) == "0.333333333333"
    assert pio.fmt(1234567.0) == "1234567"
    assert pio.fmt(float("nan")) == "nan"


def test_priority_round_trip(c0):
    w = derive(c0, "evm")
    doc = pio.priority_to_dict(w)
    assert doc["ranks"] == [3, 4, 1, 2]
    back = pio.priority_from_dict(json.loads(json.dumps(doc)))
    assert np.allclose(back.weights, w.weights, rtol=1e-11)
    assert back.method is Method.EVM


def test_result_json_contents(c0):
    res = find_m(c0, ManipulationRequest(2, 1, Algorithm.ROW, alpha_start=1.2, alpha_step=1))
    doc = json.loads(pio.write_result(res, "json"))
    for key in ("m_res", "cost", "success", "final_ci", "alpha_used", "trace"):
        assert key in doc
    assert doc["m_res"] == 6 and doc["cost"] == 3 and doc["success"] is True
    assert [s["pair"] for s in doc["trace"]] == [[3, 2], [3, 4], [3, 1]]
    assert "matrix" not in doc["trace"][0]
    full = json.loads(pio.write_result(res, "json", include_matrices=True))
    assert full["trace"][2]["matrix"] == doc["matrix"]


def test_result_round_trip(c0, tmp_path):
    res = find_m(c0, ManipulationRequest(2, 1, Algorithm.MATRIX))
    path = tmp_path / "r.json"
    pio.write_result(res, "json", target=path)
    back = pio.read_result(path)
    assert back.m_res == res.m_res and back.success == res.success
    assert back.alpha_used == res.alpha_used
    assert back.final_ci == pytest.approx(res.final_ci, rel=1e-11)
    assert [s.modified_pair for s in back.trace] == [s.modified_pair for s in res.trace]
    assert np.allclose(back.matrix.entries, res.matrix.entries, rtol=1e-11)
    assert back.p == res.p and back.algorithm is res.algorithm


def test_result_text_trace_matrices(c0):
    res = find_m(c0, ManipulationRequest(2, 1, Algorithm.ROW, alpha_start=1.2, alpha_step=1))
    text = pio.write_result(res, "text", include_matrices=True)
    assert "step 3: c[3,1] = 3.7469" in text
    assert "  3.7469 1.2000 1.0000 2.0605" in text
    assert "m_res: 6" in text


def test_report_round_trip(c0):
    _, res, _ = row_compute_changes(c0, 1.2, 2, 1)
    rep = detect_row_manipulation(res)
    doc = pio.report_to_dict(rep)
    assert any(s["promoted_row"] == 3 and s["reference_row"] == 2 for s in doc["suspects"])
    back = pio.report_from_dict(json.loads(json.dumps(doc)))
    assert back.pairs() == rep.pairs()
    assert "row 3 promoted over row 2" in pio.report_to_text(rep)


def test_experiment_csv_round_trip(tmp_path):
    cfg = ExperimentConfig(n=4, bucket_count=2, trials_per_bucket=3, seed=2)
    stats = run_experiment(cfg, GenerationConfig(n=4))
    text = pio.write_experiment_csv(stats, tmp_path / "out.csv")
    assert text.splitlines()[0] == "n,algorithm,method,delta_pq,ci_low,ci_high,trials,successes,sr,mean_m_res"
    back = pio.read_experiment_csv(tmp_path / "out.csv")
    assert [(s.successes, s.trials, s.algorithm) for s in back] == \
        [(s.successes, s.trials, s.algorithm) for s in stats]
    assert pio.experiment_to_csv(back) == text


def test_experiment_csv_bad_header():
    with pytest.raises(ParseError):
        pio.read_experiment_csv(io.StringIO("a,b\n1,2\n"))


def test_config_defaults_and_split():
    exp, gen = pio.read_experiment_config(io.StringIO('{"n": 6, "d": 2.0, "seed": 9}'))
    assert exp.n == gen.n == 6 and exp.seed == gen.seed == 9
    assert gen.d == 2.0 and exp.trials_per_bucket == 200 and exp.bucket_width == 0.005
    exp, _ = pio.read_experiment_config(io.StringIO(
        '{"n": 5, "algorithms": ["matrix"], "methods": ["evm", "gmm"]}'))
    assert exp.algorithms == (Algorithm.MATRIX,)
    assert exp.methods == (Method.EVM, Method.GMM)


@pytest.mark.parametrize("doc, exc, name", [
    ('{"n": 5, "colour": 1}', UnknownKey, "colour"),
    ('{"d": 2}', MissingRequired, "n"),
    ('{"n": 5, "bucket_width": -1}', RangeError, "bucket_width"),
    ('{"n": 5, "d": 0.5}', RangeError, "d"),
])
def test_config_errors(doc, exc, name):
    with pytest.raises(exc) as info:
        pio.read_experiment_config(io.StringIO(doc))
    assert info.value.name == name


def test_config_malformed_json():
    with pytest.raises(ParseError):
        pio.read_experiment_config(io.StringIO("{n: 5}"))

import json

import pytest

from sovlab.cli import main
from sovlab.scenario import default_raw


def run(tmp_path, argv, raw=None, name="r.json"):
    rep = tmp_path / name
    args = list(argv)
    if raw is not None:
        sc = tmp_path / "scenario.json"
        sc.write_text(raw if isinstance(raw, str) else json.dumps(raw))
        args += ["--scenario", str(sc)]
    code = main(args + ["--report", str(rep)])
    return code, rep.read_bytes()


def test_sov_ok_and_deterministic(tmp_path):
    c1, b1 = run(tmp_path, ["sov"], name="a.json")
    c2, b2 = run(tmp_path, ["sov"], name="b.json")
    assert c1 == c2 == 0 and b1 == b2
    rep = json.loads(b1)
    assert rep["passed"] and len(rep["records"]) == rep["scenario"]["m"]


def test_sov_higgs(tmp_path):
    code, b = run(tmp_path, ["sov"], default_raw(seed=4, lam=0.0))
    assert code == 0 and json.loads(b)["scenario"]["lambda"] == [0.0, 0.0]


@pytest.mark.parametrize("raw", [
    "{not json",
    json.dumps({"d": -1}),
    json.dumps(dict(default_raw(), seed=-3)),
    json.dumps(dict(default_raw(), tolerances={"bogus": 1})),
])
def test_parse_errors(tmp_path, raw):
    code, b = run(tmp_path, ["sov"], raw)
    assert code == 2 and json.loads(b)["error"]["type"] == "ParseError"


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_precondition_errors(tmp_path):
    raw = default_raw()
    raw["curve"] = [[0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0]]
    code, _ = run(tmp_path, ["sov"], raw)
    assert code == 3
    code, _ = run(tmp_path, ["sov", "--precision", "extended"])
    assert code == 3
    raw = default_raw()
    raw["darboux"]["k"] = raw["darboux"]["k"][1]
    code, b = run(tmp_path, ["sov"], raw)
    assert code == 3 and json.loads(b)["error"]["type"] == "MomentObstruction"


def test_timings_only_on_request(tmp_path):
    _, b = run(tmp_path, ["sov"])
    assert "timings" not in json.loads(b)
    _, b = run(tmp_path, ["sov", "--timings"])
    assert "timings" in json.loads(b)


def test_selftest(tmp_path):
    code, b = run(tmp_path, ["selftest", "--list"])
    assert code == 0 and "gauge" in json.loads(b)["suites"]
    code, _ = run(tmp_path, ["selftest", "--suite", "gauge", "interpolation"])
    assert code == 0
    code, b = run(tmp_path, ["selftest", "--suite", "gauge", "--mutate"])
    assert code == 4 and not json.loads(b)["results"]["gauge"]["passed"]


def test_oper_round_trip(tmp_path):
    code, b = run(tmp_path, ["oper"])
    rep = json.loads(b)
    assert code == 0 and rep["round_trip_diff"] < 1e-8 and rep["q_genericity"]["kind"] == "generic"


def test_oper_needs_lambda(tmp_path):
    code, _ = run(tmp_path, ["oper"], default_raw(lam=0.0))
    assert code == 3


def test_poisson_failure_exit(tmp_path):
    # an absurd tolerance turns a finite-difference run into a failed check
    code, b = run(tmp_path, ["poisson", "--samples", "1", "--tol", "1e-14"])
    rep = json.loads(b)
    assert code == 4 and not rep["summary"]["passed"]

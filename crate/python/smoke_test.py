"""Smoke test for the Python bindings: python3 python/smoke_test.py"""

import json
import pathlib

import diffprod

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def grid(name):
    return diffprod.Grid.from_json((DATA / f"{name}.json").read_text())


def main():
    f = diffprod.Formula("p -> [h]<h> p")
    assert f.vars() == ["p"]
    assert diffprod.Formula(str(f)) == f
    print("classify:", f.classify())

    c = diffprod.BiCluster(rr=1, ri=2)
    assert c.classify() == "H2VSw"
    assert len(c.preimage(8, 4)) == 32
    try:
        c.preimage(7, 4)
        raise AssertionError("x < 2y accepted")
    except RuntimeError:
        pass

    g = diffprod.Grid.family("G", 4)
    r = g.diagnose()
    assert r["verdict"] == "good", r
    a = g.assemble()
    assert a["profile"] == r["xi_min"]

    assert grid("f3").diagnose()["verdict"] == "bad_path"
    b = grid("f3").synth()
    assert b["kind"] == "bad_path_p" and b["countermodel"]["worlds"]
    diffprod.Formula(b["formula"])
    frame = grid("f3").realize()
    assert frame.check(diffprod.Formula("[h] p -> p")) == "valid"
    assert frame.check(diffprod.Formula("[v] p -> p")) == "refuted"
    assert grid("grid_sqbad").diagnose()["square"]["verdict"] == "bad_case_ii"
    assert frame.decompose().to_json()

    out = diffprod.BiCluster(ri=1, ir=1).game(6, adversary="exhaustive")
    assert out["outcome"] == "stuck", out["outcome"]
    out = diffprod.BiCluster(ii=3).game(8, strategy="from_pmorphism", seed=3)
    assert out["outcome"] == "survived_all_rounds"

    rep = diffprod.experiment("nonfinax", 8, m=1, seed=0)
    assert rep["verified"]
    assert diffprod.verify_experiment(json.dumps(rep))
    rep["steps"][0]["witness"] = {}
    assert not diffprod.verify_experiment(json.dumps(rep))
    print("ok")


if __name__ == "__main__":
    main()

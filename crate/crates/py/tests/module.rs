use pyo3::prelude::*;
use pyo3::types::PyDict;

use diffprod_py::diffprod_py;

fn run(code: &str) {
    pyo3::append_to_inittab!(diffprod_py);
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let globals = PyDict::new_bound(py);
        py.run_bound(code, Some(&globals), None)
            .unwrap_or_else(|e| {
                panic!(
                    "{e}\n{}",
                    e.traceback_bound(py)
                        .map(|t| t.format().unwrap())
                        .unwrap_or_default()
                )
            });
    });
}

#[test]
fn module_round_trip() {
    run(r#"
import json
import diffprod as d

f = d.Formula("[h]<v> p -> <h> q")
assert sorted(f.vars()) == ["p", "q"]
assert d.Formula(str(f)) == f
try:
    d.Formula("p ->")
    raise AssertionError("parsed")
except ValueError:
    pass

c = d.BiCluster(ii=3)
assert c.classify() == "HVStrict"
assert c.sizes() == ("3", "3", "3")
assert sorted(c.preimage(3, 3)) == [0, 0, 0, 1, 1, 1, 2, 2, 2]

g = d.Grid.family("F", 3)
assert g.diagnose()["verdict"] == "bad_path"
assert g.synth()["kind"] == "bad_path_p"
h = d.Grid.family("H", 3)
assert h.square_diagnose()["verdict"].startswith("bad_case")
assert len(h.realize()) == 6
back = d.Grid.from_json(h.to_json())
assert back.to_json() == h.to_json()

a = d.Grid.family("G", 4).assemble({"x1": 8, "x2": 8, "y": 4})
assert (a["nx"], a["ny"]) == (16, 4)

r = d.experiment("square", 3)
assert r["verified"] and d.verify_experiment(json.dumps(r))
"#);
}

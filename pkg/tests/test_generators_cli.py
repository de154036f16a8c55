import json
import math

import numpy as np
import pytest

from widthcert import (
    dump_space,
    generators,
    load_space,
    space_from_document,
    validate_width_certificate,
    verify_instance,
)
from widthcert.cli import main


def test_gen_circle_counts():
    sp = generators.gen_circle(1.0, 0.01)
    assert sp.n_points == 100
    assert len(sp.edges) == 100
    assert sp.kind == "metric-graph"


def test_gen_torus_counts():
    sp = generators.gen_grid_torus(16)
    assert sp.n_points == 256
    unit = [e for e in sp.edges if e[2] == 1.0]
    diag = [e for e in sp.edges if e[2] == math.sqrt(2.0)]
    assert len(unit) == 512
    assert len(diag) == 256
    assert len(sp.faces) == 512  # 256 squares, two triangles each


def test_gen_deterministic_documents():
    a = dump_space(generators.gen_random_points(20, seed=7))
    b = dump_space(generators.gen_random_points(20, seed=7))
    assert a == b
    c = dump_space(generators.gen_random_points(20, seed=8))
    assert c != a


def test_gen_tree_subdivision_respects_pitch():
    sp = generators.gen_random_tree(15, seed=3, h=0.2)
    assert all(w <= 0.2 + 1e-12 for _, _, w in sp.edges)
    assert len(generators.gen_random_tree(15, seed=3).edges) == 15


def test_gen_invalid_params():
    with pytest.raises(ValueError):
        generators.gen_circle(-1.0, 0.01)
    with pytest.raises(ValueError):
        generators.gen_grid_torus(2)
    with pytest.raises(ValueError):
        generators.generate("dodecahedron")


def test_verify_instance_embeds_valid_certificate():
    sp = generators.gen_circle(1.0, 0.01)
    rep = verify_instance(sp, 1)
    assert rep["outcome"] == "success"
    assert rep["inequality"]["holds"]
    assert rep["certificate"]["multiplicity"] <= 1
    assert rep["certificate"]["max_radius"] < rep["r"]


def test_verify_report_deterministic_modulo_walltime():
    sp = generators.gen_grid_torus(4)
    a = verify_instance(sp, 2)
    b = verify_instance(sp, 2)
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


# ---------------------------------------------------------------------------
# command line


def run_cli(*argv):
    return main(list(argv))


def test_cli_gen_and_width(tmp_path):
    f = tmp_path / "c.json"
    out = tmp_path / "w.json"
    assert run_cli("gen", "--shape", "circle", "--length", "1.0", "--h", "0.01",
                   "-o", str(f)) == 0
    assert run_cli("width", "--space", str(f), "--dim", "1", "-o", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["multiplicity"] == 1
    assert doc["max_radius"] < doc["r"]


def test_cli_gen_deterministic(tmp_path):
    f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
    for f in (f1, f2):
        run_cli("gen", "--shape", "random-points", "--n", "10", "--seed", "4",
                "-o", str(f))
    assert f1.read_bytes() == f2.read_bytes()


def test_cli_hc_exact_and_greedy(tmp_path):
    f = tmp_path / "i.json"
    run_cli("gen", "--shape", "interval", "--length", "1.0", "--h", "0.1", "-o", str(f))
    out = tmp_path / "hc.json"
    assert run_cli("hc", "--space", str(f), "--dim", "1", "-o", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["side"] == "exact"
    assert abs(doc["value"] - 0.5) <= 0.1
    assert run_cli("hc", "--space", str(f), "--dim", "1", "--mode", "greedy",
                   "-o", str(out)) == 0
    assert json.loads(out.read_text())["side"] == "upper"


def test_cli_budget_exhaustion_exit_code(tmp_path):
    f = tmp_path / "i.json"
    run_cli("gen", "--shape", "interval", "--length", "1.0", "--h", "0.01", "-o", str(f))
    assert run_cli("hc", "--space", str(f), "--dim", "1", "-o", "-") == 3


def test_cli_malformed_space_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run_cli("hc", "--space", str(bad), "--dim", "1") == 2


def test_cli_hypothesis_violation_exit_code(tmp_path):
    f = tmp_path / "long.json"
    run_cli("gen", "--shape", "interval", "--length", "4.0", "--h", "0.05", "-o", str(f))
    assert run_cli("separate", "--space", str(f), "--r", "0.5", "--dim", "2") == 1


def test_cli_verify_appends_jsonl(tmp_path):
    f = tmp_path / "c.json"
    rep = tmp_path / "runs.jsonl"
    run_cli("gen", "--shape", "circle", "--length", "1.0", "--h", "0.02", "-o", str(f))
    assert run_cli("verify", "--space", str(f), "--dim", "1", "-o", str(rep)) == 0
    assert run_cli("verify", "--space", str(f), "--dim", "1", "-o", str(rep)) == 0
    lines = rep.read_text().strip().splitlines()
    assert len(lines) == 2
    docs = [json.loads(x) for x in lines]
    assert all(d["outcome"] == "success" for d in docs)


def test_cli_systole_and_tree(tmp_path):
    t = tmp_path / "theta.json"
    run_cli("gen", "--shape", "theta", "--lengths", "1,2,3", "--h", "0.05", "-o", str(t))
    out = tmp_path / "sys.json"
    assert run_cli("systole", "--space", str(t), "-o", str(out)) == 0
    assert abs(json.loads(out.read_text())["length"] - 3.0) < 1e-6
    s = tmp_path / "star.json"
    run_cli("gen", "--shape", "star", "--legs", "3", "--leg-length", "1.0",
            "--h", "0.05", "-o", str(s))
    out2 = tmp_path / "tree.json"
    assert run_cli("tree", "--space", str(s), "--r", "1.6", "-o", str(out2)) == 0
    doc = json.loads(out2.read_text())
    assert doc["radius"] == pytest.approx(1.0)
    assert doc["threshold"]["hypothesis_holds"] is True


def test_cli_coarea(tmp_path):
    f = tmp_path / "i.json"
    run_cli("gen", "--shape", "interval", "--length", "1.0", "--h", "0.01", "-o", str(f))
    out = tmp_path / "co.json"
    assert run_cli("coarea", "--space", str(f), "--x", "0", "--r1", "0",
                   "--r2", "1.0", "--dim", "1", "-o", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["weight"] <= doc["certified_bound"]


def test_loaded_document_runs_pipeline(tmp_path):
    f = tmp_path / "t.json"
    run_cli("gen", "--shape", "grid-torus", "--k", "4", "-o", str(f))
    sp = load_space(f)
    rep = verify_instance(sp, 2)
    assert rep["outcome"] == "success"


def test_cli_separate_success(tmp_path):
    f = tmp_path / "c.json"
    run_cli("gen", "--shape", "circle", "--length", "1.0", "--h", "0.01", "-o", str(f))
    out = tmp_path / "sep.json"
    assert run_cli("separate", "--space", str(f), "--r", "0.5", "--dim", "2",
                   "-o", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["params"]["rho"] == pytest.approx(0.25)
    assert all(s["phi_after"] < s["phi_before"] for s in doc["steps"])

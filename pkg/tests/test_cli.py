from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from wpqc import circuit as C
from wpqc.circuit import QuantumCircuit
from wpqc.cli import dump, main, parse
from wpqc.hamiltonian import LocalHamiltonian, LocalTerm, projector_term
from wpqc.weightspace import SectorState

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def rand_u(rng, d=2):
    return np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]


def sample_circuit(seed=0):
    rng = np.random.default_rng(seed)
    gates = (C.hat(0, 1, rand_u(rng)), C.fredkin(2, 0, 1), C.swap(1, 2, controls=(0,), polarities=(0,)),
             C.unitary((0, 2), rand_u(rng, 4)))
    return QuantumCircuit(2, 1, "1", gates, ((0, 1),), name="demo")


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def read(path):
    return json.loads(Path(path).read_text())


def test_round_trip_is_bit_exact():
    c = sample_circuit()
    text = dump(c)
    back = parse(text).obj
    assert dump(back) == text
    for g, h in zip(c.gates, back.gates):
        if g.matrix is not None:
            assert np.array_equal(g.matrix, h.matrix)
    H = LocalHamiltonian(3, (LocalTerm((0, 2), np.diag([0.1, 1 / 3, 0.0, 1.0])), projector_term((1,), (1,))))
    assert dump(parse(dump(H)).obj) == dump(H)
    s = SectorState.random(4, 2, np.random.default_rng(1))
    s2 = parse(dump(s)).obj
    assert np.array_equal(s2.to_dense(), s.to_dense())


def test_same_seed_gives_identical_reports(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    spec = str(INSTANCES / "p3_weft1.json")
    assert main(["pipeline", "-i", spec, "-o", str(a), "--seed", "3"]) == 0
    assert main(["pipeline", "-i", spec, "-o", str(b), "--seed", "3"]) == 0
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


@pytest.mark.parametrize("text", ["{not json", '{"kind": "circuit"}', '{"kind": "zebra"}',
                                  '{"kind": "hamiltonian", "n": 2, "terms": [{"support": [0, 5], "matrix": []}]}'])
def test_malformed_input_exits_2(tmp_path, text):
    assert main(["validate", "-i", write(tmp_path, "bad.json", text)]) == 2


def test_missing_file_and_bad_flags_exit_2(tmp_path):
    assert main(["validate", "-i", str(tmp_path / "none.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_diag_k3_and_zero_hamiltonian(tmp_path):
    out = tmp_path / "o.json"
    assert main(["reduce", "indset", "-i", str(INSTANCES / "k3.json"), "--k", "2", "-o", str(out)]) == 0
    res = tmp_path / "r.json"
    assert main(["diag", "-i", str(out), "--k", "2", "-o", str(res)]) == 0
    assert read(res)["energy"] == pytest.approx(1.0, abs=1e-12)
    zero = dump(LocalHamiltonian(3, ()))
    assert main(["diag", "-i", write(tmp_path, "z.json", zero), "--k", "1", "-o", str(res)]) == 0
    assert read(res)["energy"] == 0.0


def test_over_cap_is_refused(tmp_path):
    H = LocalHamiltonian(40, (projector_term((0, 1), (1, 1)),))
    assert main(["diag", "-i", write(tmp_path, "big.json", dump(H)), "--k", "10"]) == 3
    wide = QuantumCircuit(100, 0, "", tuple(C.swap(i, i + 1) for i in range(50)), ((0, 1),))
    assert main(["reduce", "grid", "-i", write(tmp_path, "wide.json", dump(wide)), "--k", "1"]) == 3


@pytest.mark.parametrize("name,decision", [("p3_weft1", "yes"), ("k3_weft1", "no")])
def test_pipeline_decisions(tmp_path, name, decision):
    out = tmp_path / name
    assert main(["pipeline", "-i", str(INSTANCES / f"{name}.json"), "-o", str(out)]) == 0
    summary = read(out / "pipeline_report.json")
    assert summary["decision"] == decision and summary["verdict"] == "pass"
    assert main(["report", "-i", str(out / "pipeline_report.json"), "-o", str(tmp_path / "r.txt")]) == 0
    assert f"decision: {decision}" in (tmp_path / "r.txt").read_text()


def test_reduce_with_report_and_dot(tmp_path):
    H = tmp_path / "h.json"
    assert main(["reduce", "indset", "-i", str(INSTANCES / "p3.json"), "--k", "2", "-o", str(H)]) == 0
    dot = tmp_path / "c.dot"
    rep = tmp_path / "rep.json"
    code = main(["reduce", "wlh2wpcsat", "-i", str(H), "--k", "2", "-o", str(tmp_path / "c.json"),
                 "--report", str(rep), "--emit-dot", str(dot)])
    assert code == 0 and read(rep)["verdict"] == "pass"
    assert dot.read_text().startswith("digraph")
    assert main(["validate", "-i", str(tmp_path / "c.json"), "--require-wp"]) == 0


def test_simulate_bits_and_optimal(tmp_path):
    path = write(tmp_path, "c.json", dump(sample_circuit()))
    out = tmp_path / "s.json"
    assert main(["simulate", "-i", path, "--bits", "10", "-o", str(out)]) == 0
    p = read(out)["acceptance"]
    assert 0 <= p <= 1
    assert main(["simulate", "-i", path, "--k", "1", "-o", str(out)]) == 0
    assert read(out)["acceptance"] >= p - 1e-12
    assert main(["simulate", "-i", path, "--bits", "1"]) == 2

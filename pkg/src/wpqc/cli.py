"""Command-line front end and the JSON interchange formats.

Every file is one JSON object with a top-level ``kind``.  Complex numbers are
``[re, im]`` pairs written with Python's shortest round-trip float repr,
so parsing a dumped object reproduces it bit for bit.

Exit codes: 0 pass, 1 verification failure, 2 input error, 3 resource guard.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import Gate, QuantumCircuit, check_weight_preserving, depth_of, gate_dag, validate_classical_fanout, weft_of
from .hamiltonian import MAX_TERMS, LocalHamiltonian, LocalTerm, classify_sparsity, validate_instance
from .simulator import FullState, acceptance_probability, optimal_sector_witness
from .sparse import MAX_KEY_WIRES
from .verify import DEFAULT_MAX_DIM, FORMULA_TOL, VerificationReport, verify_reduction
from .weightspace import BasisIndexer, SectorState, min_energy_in_sector, subspace_dim

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3
FORMAT_VERSION = 1
MAX_WIRES = 4096
MAX_GATES = 200_000

STEP_KINDS = {
    "indset": ("graph", "hamiltonian"),
    "wlh2wpcsat": ("hamiltonian", "circuit"),
    "amplify": ("circuit", "circuit"),
    "grid": ("circuit", "circuit"),
    "kitaev": ("circuit", "hamiltonian"),
    "weft1": ("hamiltonian", "circuit"),
    "mini": ("circuit", "circuit"),
    "sqw2qsat": ("circuit", "hamiltonian"),
    "reversibilize": ("classical", "circuit"),
}


class InputError(ValueError):
    """Malformed file or violated precondition."""


class GuardError(RuntimeError):
    """A size guard refused the request."""


# formats --------------------------------------------------------------------


def cpair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def cmatrix(m: np.ndarray) -> list:
    return [[cpair(v) for v in row] for row in np.asarray(m)]


def parse_cmatrix(rows) -> np.ndarray:
    arr = np.array(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InputError("complex matrices are nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_cvector(vals) -> np.ndarray:
    arr = np.array(vals, dtype=float)
    if arr.ndim != 2 or arr.shape[-1] != 2:
        raise InputError("complex vectors are lists of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _plain(obj):
    """JSON-safe copy of metadata (tuples to lists, numpy scalars to Python)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    return obj


def gate_to_dict(g: Gate) -> dict:
    return {"kind": g.kind, "targets": list(g.targets), "controls": list(g.controls),
            "polarities": list(g.polarities), "matrix": None if g.matrix is None else cmatrix(g.matrix),
            "params": list(g.params), "pattern": list(g.pattern), "classical": g.classical, "label": g.label}


def gate_from_dict(d: dict) -> Gate:
    mat = d.get("matrix")
    return Gate(d["kind"], tuple(d["targets"]), tuple(d.get("controls", ())), tuple(d.get("polarities", ())),
                None if mat is None else parse_cmatrix(mat), tuple(float(p) for p in d.get("params", ())),
                tuple(d.get("pattern", ())), bool(d.get("classical", False)), d.get("label", ""))


def circuit_to_dict(c: QuantumCircuit) -> dict:
    return {"kind": "circuit", "version": FORMAT_VERSION, "name": c.name, "n_witness": c.n_witness,
            "n_ancilla": c.n_ancilla, "ancilla_init": c.ancilla_init, "accept": [list(a) for a in c.accept],
            "gates": [gate_to_dict(g) for g in c.gates], "meta": _plain(c.meta)}


def circuit_from_dict(d: dict) -> QuantumCircuit:
    return QuantumCircuit(int(d["n_witness"]), int(d.get("n_ancilla", 0)), d.get("ancilla_init", ""),
                          tuple(gate_from_dict(g) for g in d.get("gates", ())),
                          tuple(tuple(a) for a in d.get("accept", ())), d.get("name", ""), dict(d.get("meta", {})))


def hamiltonian_to_dict(H: LocalHamiltonian) -> dict:
    return {"kind": "hamiltonian", "version": FORMAT_VERSION, "n": H.n, "locality": H.locality,
            "clock_register": None if H.clock_register is None else list(H.clock_register),
            "thresholds": None if H.thresholds is None else list(H.thresholds),
            "terms": [{"support": list(t.support), "block": cmatrix(t.block), "label": t.label} for t in H.terms],
            "meta": _plain(H.meta)}


def hamiltonian_from_dict(d: dict) -> LocalHamiltonian:
    terms = tuple(LocalTerm(tuple(t["support"]), parse_cmatrix(t["block"]), t.get("label", ""))
                  for t in d.get("terms", ()))
    thr = d.get("thresholds")
    return LocalHamiltonian(int(d["n"]), terms, d.get("locality"), d.get("clock_register"),
                            None if thr is None else tuple(thr), dict(d.get("meta", {})))


def state_to_dict(s) -> dict:
    if isinstance(s, SectorState):
        return {"kind": "state", "version": FORMAT_VERSION, "n": s.n, "k": s.k,
                "amplitudes": [cpair(a) for a in s.amplitudes]}
    return {"kind": "state", "version": FORMAT_VERSION, "n": s.n, "k": None,
            "amplitudes": [cpair(a) for a in s.amplitudes]}


def state_from_dict(d: dict):
    amps = parse_cvector(d["amplitudes"])
    n = int(d["n"])
    if d.get("k") is None:
        return FullState(n, amps)
    idx = BasisIndexer(n, int(d["k"]))
    if len(amps) != idx.dim:
        raise InputError(f"sector state needs {idx.dim} amplitudes, got {len(amps)}")
    return SectorState(idx, amps)


def report_to_dict(rep) -> dict:
    body = rep.to_dict() if isinstance(rep, VerificationReport) else dict(rep)
    return {"kind": "report", "version": FORMAT_VERSION, **_plain(body)}


def artifact_block(art) -> dict:
    return {"step": art.step, "k_in": art.k_in, "k_out": art.k_out, "thresholds": list(art.thresholds),
            "threshold_kind": art.threshold_kind, "metadata": _plain(art.metadata)}


def dump(obj, extra: dict | None = None) -> str:
    if isinstance(obj, QuantumCircuit):
        d = circuit_to_dict(obj)
    elif isinstance(obj, LocalHamiltonian):
        d = hamiltonian_to_dict(obj)
    elif isinstance(obj, (SectorState, FullState)):
        d = state_to_dict(obj)
    elif isinstance(obj, VerificationReport):
        d = report_to_dict(obj)
    elif isinstance(obj, dict):
        d = _plain(obj)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    if extra:
        d.update(_plain(extra))
    return json.dumps(d, sort_keys=True, indent=1, allow_nan=True) + "\n"


@dataclass
class Loaded:
    kind: str
    obj: object
    raw: dict = field(default_factory=dict)


def parse(text: str) -> Loaded:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"not valid JSON: {e}") from None
    if not isinstance(d, dict) or "kind" not in d:
        raise InputError("top-level object with a 'kind' field expected")
    kind = d["kind"]
    try:
        if kind == "circuit":
            return Loaded(kind, circuit_from_dict(d), d)
        if kind == "hamiltonian":
            return Loaded(kind, hamiltonian_from_dict(d), d)
        if kind == "state":
            return Loaded(kind, state_from_dict(d), d)
        if kind == "graph":
            edges = [tuple(int(v) for v in e) for e in d["edges"]]
            return Loaded(kind, {"n": int(d.get("n", 1 + max((max(e) for e in edges), default=-1))), "edges": edges}, d)
        if kind == "classical":
            from .reductions.classical import ClassicalCircuit

            cc = ClassicalCircuit(int(d["n_inputs"]), tuple((g[0], tuple(g[1])) for g in d["gates"]), int(d["output"]))
            return Loaded(kind, cc, d)
        if kind in ("report", "pipeline"):
            return Loaded(kind, d, d)
    except (KeyError, TypeError, IndexError) as e:
        raise InputError(f"malformed {kind} file: missing or bad field {e}") from None
    except ValueError as e:
        raise InputError(f"invalid {kind}: {e}") from None
    raise InputError(f"unknown kind {kind!r}")


def load(path) -> Loaded:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    return parse(text)


def to_dot(c: QuantumCircuit) -> str:
    """Gate DAG in Graphviz DOT syntax."""
    lines = ["digraph circuit {", "  rankdir=LR;", '  node [shape=box, fontname="monospace"];']
    for i, g in enumerate(c.gates):
        tag = g.label or g.kind
        lines.append(f'  g{i} [label="{i}: {tag} {list(g.wires)}"];')
    for a, b, w in gate_dag(c):
        lines.append(f'  g{a} -> g{b} [label="{w}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# reduction steps ------------------------------------------------------------


@dataclass
class Stage:
    kind: str
    obj: object
    thresholds: tuple[float, float] | None = None
    k: int = 1
    witness: object = None


def _threshold_of(raw: dict, obj) -> tuple[float, float] | None:
    art = raw.get("artifact") if raw else None
    if art and art.get("thresholds"):
        return tuple(art["thresholds"])
    if isinstance(obj, LocalHamiltonian):
        return obj.thresholds
    if raw and raw.get("thresholds"):
        return tuple(raw["thresholds"])
    return None


def _guard_circuit(c: QuantumCircuit, what: str) -> None:
    if c.n_wires > MAX_WIRES or len(c.gates) > MAX_GATES:
        raise GuardError(f"{what}: {c.n_wires} wires / {len(c.gates)} gates exceed the guard "
                         f"({MAX_WIRES} wires, {MAX_GATES} gates)")


def run_step(name: str, stage: Stage, params: dict):
    """Apply one reduction; returns (artifact, source object)."""
    from . import reductions as R
    from .reductions.classical import reversibilize_classical
    from .reductions.clock import grid_step, wpcsat_to_sparse_ham
    from .reductions.lightcone import sqw1_to_qsat
    from .reductions.mini import mini_to_wpcsat
    from .reductions.qsvt import PhaseSolverError, m_cap
    from .reductions.weft1 import sparse_ham_to_weft1

    if name not in STEP_KINDS:
        raise InputError(f"unknown step {name!r}")
    want, _ = STEP_KINDS[name]
    if stage.kind != want:
        raise InputError(f"step {name} needs a {want} input, got {stage.kind}")
    k = int(params.get("k", stage.k))
    src = stage.obj
    thr = tuple(params["thresholds"]) if "thresholds" in params else stage.thresholds
    if name == "indset":
        return R.indset_to_wlh(src["edges"], k, src["n"]), src
    if name == "wlh2wpcsat":
        a, b = thr if thr else (None, None)
        return R.wlh_to_wpcsat(src, k, a, b), src
    if name == "amplify":
        if thr is None:
            raise InputError("amplify needs input thresholds (c, s)")
        eps = float(params.get("epsilon", 0.1))
        est = m_cap(*thr, eps) * 2 * len(src.gates)
        if est > MAX_GATES:
            raise GuardError(f"amplify: up to {est} gates exceed the guard of {MAX_GATES}")
        try:
            return R.qsvt_amplify(src, thr, eps, k=k), src
        except PhaseSolverError as e:
            raise GuardError(f"amplify: {e}") from e
    if name == "grid":
        r = len(src.gates)
        if src.n_wires * (r + 1) > MAX_WIRES:
            raise GuardError(f"grid: {src.n_wires * (r + 1)} wires exceed the guard of {MAX_WIRES}")
        return grid_step(src, k, thr or (2 / 3, 1 / 3)), src
    if name == "kitaev":
        eps = float(params.get("epsilon", 1e-12))
        if thr is not None and (thr[0] < 1 - eps or thr[1] > eps):
            raise InputError(f"kitaev needs thresholds (1 - eps, eps) for eps={eps}, got {thr}; amplify first")
        t = len(src.gates)
        if t * (t + 1) // 2 + 4 * t + src.n_wires > MAX_TERMS:
            raise GuardError(f"kitaev: about {t * (t + 1) // 2} clock terms exceed the cap of {MAX_TERMS}")
        return wpcsat_to_sparse_ham(src, k, eps, float(params.get("b_constant", 1.0))), src
    if name == "weft1":
        a, b = thr if thr else (None, None)
        return sparse_ham_to_weft1(src, a=a, b=b, k=k), src
    if name == "mini":
        n = int(params["n"]) if "n" in params else None
        if n is None:
            raise InputError("mini needs the one-hot group size n")
        return mini_to_wpcsat(src, k, n, thr or (2 / 3, 1 / 3)), src
    if name == "sqw2qsat":
        return sqw1_to_qsat(src, k, float(params.get("soundness", 0.5))), src
    return reversibilize_classical(src, k), src


def _carry_witness(name: str, stage: Stage, art, max_dim: int):
    """Witness of the next stage from the current one, when it can be computed."""
    from .reductions.clock import history_state
    from .reductions.mini import encode_state

    w = stage.witness
    inst = art.instance
    try:
        if w is None:
            if stage.kind == "hamiltonian" and subspace_dim(stage.obj.n, stage.k) <= max_dim:
                _, w = min_energy_in_sector(stage.obj, stage.k)
            elif stage.kind == "circuit" and subspace_dim(stage.obj.n_witness, stage.k) <= max_dim \
                    and stage.obj.n_wires <= MAX_KEY_WIRES:
                w, _ = optimal_sector_witness(stage.obj, stage.k)
            elif stage.kind == "graph" and subspace_dim(stage.obj["n"], stage.k) <= max_dim:
                _, w = min_energy_in_sector(inst, stage.k)
        if w is None:
            return None
        if name == "kitaev":
            return history_state(stage.obj, w) if inst.n <= MAX_KEY_WIRES else None
        if name == "mini":
            return encode_state(w.to_dense() if isinstance(w, SectorState) else w, art.k_out, art.metadata["n"])
        if name in ("sqw2qsat", "reversibilize"):
            return None
        return w
    except ValueError:
        return None


def _verdict_from(rep: VerificationReport | None, fallback):
    if rep is None:
        return fallback
    return rep.target_verdict or fallback


def run_pipeline(spec: dict, outdir: Path | None, max_dim: int = DEFAULT_MAX_DIM, tol: float = FORMULA_TOL,
                 base: Path | None = None) -> dict:
    """Run the steps of a pipeline spec; returns the summary report."""
    steps = spec.get("steps")
    if not isinstance(steps, list) or not steps:
        raise InputError("pipeline needs a non-empty 'steps' list")
    seed = int(spec.get("seed", 0))
    if seed < 0:
        raise InputError("seed must be an unsigned integer")
    if "input" in spec:
        loaded = parse(json.dumps(spec["input"]))
    elif "input_file" in spec:
        loaded = load((base or Path(".")) / spec["input_file"])
    else:
        raise InputError("pipeline needs 'input' or 'input_file'")
    kind = loaded.kind
    for s in steps:
        name = s.get("name") if isinstance(s, dict) else s
        if name not in STEP_KINDS:
            raise InputError(f"unknown step {name!r}")
        want, out = STEP_KINDS[name]
        if want != kind:
            raise InputError(f"step {name} needs a {want} input but the previous output is a {kind}")
        kind = out
    k0 = int(spec.get("k", steps[0].get("k", 1) if isinstance(steps[0], dict) else 1))
    stage = Stage(loaded.kind, loaded.obj, _threshold_of(loaded.raw, loaded.obj), k0)
    reports = []
    verdict = None
    for i, s in enumerate(steps):
        params = dict(s) if isinstance(s, dict) else {"name": s}
        name = params.pop("name")
        art, src = run_step(name, stage, params)
        if isinstance(art.instance, QuantumCircuit):
            _guard_circuit(art.instance, name)
        rep = verify_reduction(art, src, stage.k, instance_id=f"{i}:{name}",
                               tol=tol, max_dim=max_dim, seed=seed + i,
                               witness=stage.witness if name in ("kitaev", "weft1") else None)
        if verdict is None:
            verdict = rep.source_verdict
        verdict = _verdict_from(rep, verdict)
        nxt_kind = STEP_KINDS[name][1]
        witness = _carry_witness(name, stage, art, max_dim)
        if outdir is not None:
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / f"step{i:02d}_{name}.json").write_text(dump(art.instance, {"artifact": artifact_block(art)}))
            (outdir / f"step{i:02d}_{name}_report.json").write_text(dump(rep))
        reports.append(rep)
        stage = Stage(nxt_kind, art.instance, art.thresholds, art.k_out, witness)
    summary = {"kind": "report", "version": FORMAT_VERSION, "pipeline": [r.step for r in reports], "seed": seed,
               "verdict": "pass" if all(r.verdict == "pass" for r in reports) else "fail",
               "decision": verdict, "steps": [r.to_dict() for r in reports]}
    if outdir is not None:
        (outdir / "pipeline_report.json").write_text(dump(summary))
    return summary


# subcommands ----------------------------------------------------------------


def _write(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_dot(args, c) -> None:
    if getattr(args, "emit_dot", None) and isinstance(c, QuantumCircuit):
        Path(args.emit_dot).write_text(to_dot(c), encoding="utf-8")


def cmd_validate(args) -> int:
    ld = load(args.input)
    out: dict = {"kind": "report", "version": FORMAT_VERSION, "input_kind": ld.kind}
    ok = True
    if ld.kind == "circuit":
        c = ld.obj
        wp = check_weight_preserving(c.with_gates(c.unitary_gates()))
        fan = validate_classical_fanout(c)
        out.update(n_wires=c.n_wires, n_gates=len(c.gates), depth=depth_of(c), weft=weft_of(c),
                   weight_preserving=bool(wp), classical_fanout_ok=bool(fan), fanout_reason=fan.reason)
        if not wp:
            out["counterexample"] = {"gate": wp.gate_index, "input": wp.input_bits, "output": wp.output_bits}
        ok = bool(fan) and (bool(wp) or not args.require_wp)
        _emit_dot(args, c)
    elif ld.kind == "hamiltonian":
        H = ld.obj
        rep = validate_instance(H, herm_tol=args.tol)
        sp = classify_sparsity(H)
        out.update(n=H.n, m=H.m, locality=H.locality, valid=rep.ok, failures=rep.failures,
                   all_projectors=rep.all_projectors, sparsity=sp.kind)
        ok = rep.ok
    elif ld.kind == "state":
        s = ld.obj
        out.update(n=s.n, norm=s.norm, normalized=bool(abs(s.norm - 1) <= args.tol))
        ok = out["normalized"]
    else:
        out["note"] = f"{ld.kind} parsed"
    out["verdict"] = "pass" if ok else "fail"
    _write(args, dump(out))
    return EXIT_OK if ok else EXIT_FAIL


def _witness_arg(args, c: QuantumCircuit):
    if args.witness:
        ld = load(args.witness)
        if ld.kind != "state":
            raise InputError("--witness must be a state file")
        return ld.obj
    if args.bits:
        if len(args.bits) != c.n_witness or set(args.bits) - {"0", "1"}:
            raise InputError(f"--bits needs {c.n_witness} binary digits")
        return args.bits
    return None


def cmd_simulate(args) -> int:
    ld = load(args.input)
    if ld.kind != "circuit":
        raise InputError("simulate needs a circuit")
    c = ld.obj
    _emit_dot(args, c)
    if c.n_wires > MAX_KEY_WIRES:
        raise GuardError(f"{c.n_wires} wires exceed the simulator key width of {MAX_KEY_WIRES}")
    w = _witness_arg(args, c)
    out: dict = {"kind": "report", "version": FORMAT_VERSION}
    if w is None:
        if args.k is None:
            raise InputError("give --witness, --bits or --k")
        if subspace_dim(c.n_witness, args.k) > args.max_dim:
            raise GuardError(f"sector dimension C({c.n_witness},{args.k}) exceeds --max-dim {args.max_dim}")
        best, p = optimal_sector_witness(c, args.k)
        out.update(mode="optimal", k=args.k, acceptance=p, witness=state_to_dict(best))
    else:
        out.update(mode="witness", acceptance=acceptance_probability(c, w).probability)
    _write(args, dump(out))
    return EXIT_OK


def cmd_diag(args) -> int:
    ld = load(args.input)
    if ld.kind != "hamiltonian":
        raise InputError("diag needs a Hamiltonian")
    if args.k is None:
        raise InputError("diag needs --k")
    H = ld.obj
    dim = subspace_dim(H.n, args.k)
    if dim > args.max_dim:
        raise GuardError(f"sector dimension C({H.n},{args.k}) = {dim} exceeds --max-dim {args.max_dim}")
    if H.m == 0:
        e, psi = 0.0, SectorState.basis("1" * args.k + "0" * (H.n - args.k))
    else:
        e, psi = min_energy_in_sector(H, args.k)
    out = {"kind": "report", "version": FORMAT_VERSION, "k": args.k, "dimension": dim, "energy": e,
           "witness": state_to_dict(psi)}
    _write(args, dump(out))
    return EXIT_OK


def _params(args) -> dict:
    p: dict = {}
    if args.k is not None:
        p["k"] = args.k
    if args.epsilon is not None:
        p["epsilon"] = args.epsilon
    if getattr(args, "n", None) is not None:
        p["n"] = args.n
    if getattr(args, "thresholds", None):
        p["thresholds"] = tuple(args.thresholds)
    return p


def cmd_reduce(args) -> int:
    ld = load(args.input)
    stage = Stage(ld.kind, ld.obj, _threshold_of(ld.raw, ld.obj), args.k if args.k is not None else 1)
    art, src = run_step(args.step, stage, _params(args))
    if isinstance(art.instance, QuantumCircuit):
        _guard_circuit(art.instance, args.step)
        _emit_dot(args, art.instance)
    _write(args, dump(art.instance, {"artifact": artifact_block(art)}))
    if args.report:
        rep = verify_reduction(art, src, stage.k, tol=args.tol, max_dim=args.max_dim, seed=args.seed)
        Path(args.report).write_text(dump(rep), encoding="utf-8")
        return EXIT_OK if rep.verdict == "pass" else EXIT_FAIL
    return EXIT_OK


def cmd_pipeline(args) -> int:
    ld = load(args.input)
    if ld.kind != "pipeline":
        raise InputError("pipeline needs a pipeline spec")
    spec = dict(ld.obj)
    if args.seed is not None:
        spec["seed"] = args.seed
    if args.k is not None:
        spec["k"] = args.k
    outdir = Path(args.output) if args.output else None
    summary = run_pipeline(spec, outdir, args.max_dim, args.tol, base=Path(args.input).parent)
    if outdir is None:
        sys.stdout.write(dump(summary))
    return EXIT_OK if summary["verdict"] == "pass" else EXIT_FAIL


def cmd_report(args) -> int:
    ld = load(args.input)
    if ld.kind != "report":
        raise InputError("report needs a report file")
    d = ld.obj
    lines = []
    for r in d.get("steps", [d]):
        lines.append(f"{r.get('instance_id', '-')}\t{r.get('step', '-')}\t{r.get('verdict', '-')}"
                     f"\tsource={r.get('source_verdict')}\ttarget={r.get('target_verdict')}")
        for res in r.get("residuals", []):
            flag = "ok" if res["ok"] else "FAIL"
            lines.append(f"    {flag:4s} {res['name']}: residual {res['residual']:.3e} (tol {res['tol']:.1e})")
        for note in r.get("notes", []):
            lines.append(f"    note: {note}")
    if "decision" in d:
        lines.append(f"decision: {d['decision']}")
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK if d.get("verdict", "pass") == "pass" else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True)
    common.add_argument("--output", "-o")
    common.add_argument("--k", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    common.add_argument("--tol", type=float, default=FORMULA_TOL)
    common.add_argument("--emit-dot", metavar="FILE")
    p = argparse.ArgumentParser(prog="wpqc", description="Weight-preserving circuit reductions and checks.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", parents=[common])
    v.add_argument("--require-wp", action="store_true")
    v.set_defaults(fn=cmd_validate)
    s = sub.add_parser("simulate", parents=[common])
    s.add_argument("--witness")
    s.add_argument("--bits")
    s.set_defaults(fn=cmd_simulate)
    sub.add_parser("diag", parents=[common]).set_defaults(fn=cmd_diag)
    r = sub.add_parser("reduce", parents=[common])
    r.add_argument("step", choices=sorted(STEP_KINDS))
    r.add_argument("--n", type=int, help="one-hot group size for the mini step")
    r.add_argument("--thresholds", type=float, nargs=2)
    r.add_argument("--report", help="write a verification report here")
    r.set_defaults(fn=cmd_reduce)
    sub.add_parser("pipeline", parents=[common]).set_defaults(fn=cmd_pipeline)
    sub.add_parser("report", parents=[common]).set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if getattr(args, "seed", None) is None and args.command != "pipeline":
        args.seed = 0
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except GuardError as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

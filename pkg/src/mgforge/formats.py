"""JSON / JSONL / CSV readers and writers shared by the command line tools.

Complex matrices are stored as ``{"rows": r, "cols": c, "data": [[re, im], ...]}``
in row-major order. Floats are written with repr precision (17 significant
digits), so files round-trip exactly.
"""
import json

import numpy as np

from .compiler import Circuit, GateOp
from .errors import ValidationError
from .matchgate import Matchgate
from .process import ProcessMatrix
from .tomography import CountRecord, TomographyDataset
from .weyl import WeylPoint


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    rows, cols = m.shape
    return {"rows": rows, "cols": cols, "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def matrix_from_json(d):
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
        flat = np.array([complex(re, im) for re, im in data])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix JSON: {exc}") from None
    if flat.size != rows * cols:
        raise ValidationError(f"matrix JSON has {flat.size} entries, expected {rows * cols}")
    return flat.reshape(rows, cols)


def matchgate_to_json(m):
    return {"a": matrix_to_json(m.a), "b": matrix_to_json(m.b), "relaxed": bool(m.relaxed)}


def matchgate_from_json(d):
    if "a" in d and "b" in d:
        return Matchgate(matrix_from_json(d["a"]), matrix_from_json(d["b"]), relaxed=bool(d.get("relaxed", False)))
    raise ValidationError("matchgate JSON needs blocks 'a' and 'b'")


def op_to_json(op):
    d = {"kind": op.kind, "qubits": list(op.qubits)}
    if op.matrix is not None:
        d["matrix"] = matrix_to_json(op.matrix)
    if op.theta is not None:
        d["theta"] = float(op.theta)
    return d


def op_from_json(d):
    matrix = matrix_from_json(d["matrix"]) if "matrix" in d else None
    return GateOp(d["kind"], tuple(d["qubits"]), matrix=matrix, theta=d.get("theta"))


def circuit_to_json(c):
    return {"global_phase": float(c.global_phase), "ops": [op_to_json(op) for op in c.ops]}


def circuit_from_json(d):
    return Circuit(tuple(op_from_json(o) for o in d["ops"]), float(d.get("global_phase", 0.0)))


def weyl_to_json(p):
    return {"c1": float(p[0]), "c2": float(p[1]), "c3": float(p[2])}


def weyl_from_json(d):
    if isinstance(d, dict):
        return WeylPoint(float(d["c1"]), float(d["c2"]), float(d["c3"]))
    return WeylPoint(*(float(x) for x in d))


def process_to_json(x):
    return {"basis": "pauli16", "trace_norm": float(x.trace_norm), "chi": matrix_to_json(x.chi)}


def process_from_json(d):
    if d.get("basis", "pauli16") != "pauli16":
        raise ValidationError(f"unsupported chi basis {d.get('basis')!r}")
    return ProcessMatrix.from_external(matrix_from_json(d["chi"]), trace_norm=float(d.get("trace_norm", 1.0)))


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


# ---------------------------------------------------------------- datasets


def dataset_lines(data):
    header = {"n_nominal": data.n_nominal, "seed": data.seed}
    if data.meta:
        header["meta"] = data.meta
    lines = [json.dumps(header, sort_keys=True)]
    for r in data.records:
        lines.append(json.dumps({"prep": list(r.prep), "meas": list(r.meas), "counts": r.counts}))
    return "\n".join(lines) + "\n"


def write_dataset(path, data):
    with open(path, "w") as fh:
        fh.write(dataset_lines(data))


def read_dataset(path):
    with open(path) as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty dataset")
    try:
        header = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON line ({exc})") from None
    if "n_nominal" not in header:
        raise ValidationError(f"{path}: first line must be a header with n_nominal")
    recs = []
    for r in records:
        if not {"prep", "meas", "counts"} <= set(r):
            raise ValidationError(f"{path}: malformed record {r}")
        if int(r["counts"]) < 0:
            raise ValidationError(f"{path}: negative counts in {r}")
        recs.append(CountRecord(tuple(r["prep"]), tuple(r["meas"]), int(r["counts"])))
    data = TomographyDataset.from_records(recs, header["n_nominal"], header.get("seed", 0))
    if "meta" in header:
        data.meta.update(header["meta"])
    return data


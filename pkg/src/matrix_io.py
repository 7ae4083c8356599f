"""
Matrix files

JSON documents exchanged by the command line:

    {"schema_version": 1, "kind": "g_tensor", "two_s": 1, "c": 137.035999084, "data": [...]}

Complex numbers are [re, im] pairs, matrices are row-major nested lists.
Parse errors name the offending location, e.g. data[1][2][0].
"""

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from config import SCHEMA_VERSION
from src.errors import MatrixFileError, SpinHamError
from src.gtensor_core import GMatrixSmall, ZeemanTriple
from src.spin_algebra import SpinMatrices, SpinQuantum

KINDS = ("zeeman_triple", "g_tensor", "vector", "spin")


@dataclass
class MatrixFile:
    kind: str
    two_s: int
    data: np.ndarray
    c: Optional[float] = None
    schema_version: int = SCHEMA_VERSION

    @property
    def spin(self) -> SpinQuantum:
        return SpinQuantum(self.two_s)

    def to_zeeman(self) -> ZeemanTriple:
        self._expect("zeeman_triple")
        return ZeemanTriple.from_stack(self.spin, self.data)

    def to_g(self) -> GMatrixSmall:
        self._expect("g_tensor")
        return GMatrixSmall(self.data)

    def to_vector(self) -> np.ndarray:
        self._expect("vector")
        return self.data

    def _expect(self, kind: str):
        if self.kind != kind:
            raise MatrixFileError(f"expected a {kind} file, got {self.kind}", "kind")


def from_zeeman(zt: ZeemanTriple, c: Optional[float] = None) -> MatrixFile:
    return MatrixFile("zeeman_triple", zt.s.two_s, zt.stack(), c)


def from_g(g, two_s: int, c: Optional[float] = None) -> MatrixFile:
    g = g if isinstance(g, GMatrixSmall) else GMatrixSmall(g)
    return MatrixFile("g_tensor", two_s, np.array(g.g), c)


def from_spin(sm: SpinMatrices) -> MatrixFile:
    return MatrixFile("spin", sm.s.two_s, sm.stack())


def from_vector(v: np.ndarray, two_s: int) -> MatrixFile:
    return MatrixFile("vector", two_s, np.asarray(v, dtype=complex))


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise MatrixFileError(f"expected a number, got {type(x).__name__}", where)
    if not math.isfinite(x):
        raise MatrixFileError("non-finite number", where)
    return float(x)


def _complex(x: Any, where: str) -> complex:
    if not isinstance(x, list) or len(x) != 2:
        raise MatrixFileError("expected a complex number as [re, im]", where)
    return complex(_number(x[0], f"{where}[0]"), _number(x[1], f"{where}[1]"))


def _nested(x: Any, shape: tuple, where: str, leaf) -> Any:
    if not shape:
        return leaf(x, where)
    if not isinstance(x, list):
        raise MatrixFileError(f"expected a list of length {shape[0]}", where)
    if len(x) != shape[0]:
        raise MatrixFileError(f"expected length {shape[0]}, got {len(x)}", where)
    return [_nested(item, shape[1:], f"{where}[{i}]", leaf) for i, item in enumerate(x)]


def _shape(kind: str, m: int) -> tuple:
    return {"zeeman_triple": (3, m, m), "spin": (3, m, m), "vector": (m,), "g_tensor": (3, 3)}[kind]


def parse_matrix_file(text: str) -> MatrixFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MatrixFileError(f"invalid JSON: {e.msg}", f"line {e.lineno} column {e.colno}")
    if not isinstance(doc, dict):
        raise MatrixFileError("top level must be an object", "$")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise MatrixFileError(f"unsupported schema_version {version!r}", "schema_version")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise MatrixFileError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}", "kind")
    two_s = doc.get("two_s")
    if isinstance(two_s, bool) or not isinstance(two_s, int):
        raise MatrixFileError("two_s must be an integer", "two_s")
    try:
        s = SpinQuantum(two_s)
    except SpinHamError as e:
        raise MatrixFileError(e.message, "two_s")
    c = doc.get("c")
    if c is not None:
        c = _number(c, "c")
        if c <= 0:
            raise MatrixFileError("c must be positive", "c")
    if "data" not in doc:
        raise MatrixFileError("missing data", "data")
    leaf = _number if kind == "g_tensor" else _complex
    data = np.array(_nested(doc["data"], _shape(kind, s.m), "data", leaf))
    return MatrixFile(kind, two_s, data, c, version)


def encode_array(x: np.ndarray, real: bool = False) -> Any:
    """Nested lists of floats, or of [re, im] pairs when real is False."""
    if x.ndim == 0:
        v = complex(x)
        return float(v.real) if real else [float(v.real), float(v.imag)]
    return [encode_array(row, real) for row in x]


def dumps_matrix_file(mf: MatrixFile) -> str:
    doc = {"schema_version": mf.schema_version, "kind": mf.kind, "two_s": mf.two_s}
    if mf.c is not None:
        doc["c"] = float(mf.c)
    doc["data"] = encode_array(np.asarray(mf.data), mf.kind == "g_tensor")
    return json.dumps(doc, indent=2) + "\n"


def load_matrix_file(path: str) -> MatrixFile:
    """'-' reads stdin."""
    if path == "-":
        return parse_matrix_file(sys.stdin.read())
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MatrixFileError(f"cannot read file: {e.strerror}", path)
    return parse_matrix_file(text)


def write_matrix_file(mf: MatrixFile, path: Optional[str] = None):
    text = dumps_matrix_file(mf)
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)

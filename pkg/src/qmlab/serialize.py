"""Plain-JSON records for elements, states, maps, setups and reports.

Floats are written with Python's shortest round-trip representation, so a
record read back reproduces every array bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from .algebra import AlgebraShape, Element
from .errors import InvalidArgumentError
from .maps import CPMap
from .measurement import MeasurementSetup
from .report import BoundReport
from .states import State

FORMAT_VERSION = 1


def _complex_list(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex).ravel()]


def _from_complex_list(items, shape) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in items], dtype=complex)
    return arr.reshape(shape)


def element_to_record(e: Element) -> dict:
    return {
        "kind": "element",
        "shape": list(e.shape.block_dims),
        "blocks": [_complex_list(b) for b in e.blocks],
    }


def element_from_record(rec: dict) -> Element:
    _expect(rec, "element")
    shape = AlgebraShape(tuple(rec["shape"]))
    blocks = [_from_complex_list(b, (d, d)) for b, d in zip(rec["blocks"], shape.block_dims)]
    return Element(shape, blocks)


def state_to_record(s: State) -> dict:
    rec = {"kind": "state", "density": element_to_record(s.density)}
    if s.vector is not None:
        rec["vector"] = _complex_list(s.vector)
    return rec


def state_from_record(rec: dict) -> State:
    _expect(rec, "state")
    vec = None
    if "vector" in rec:
        vec = _from_complex_list(rec["vector"], (-1,))
    return State(element_from_record(rec["density"]), tol=1e-8, vector=vec)


def cpmap_to_record(m: CPMap) -> dict:
    return {
        "kind": "cpmap",
        "domain": list(m.domain_shape.block_dims),
        "codomain": list(m.codomain_shape.block_dims),
        "kraus": [_complex_list(k) for k in m.kraus],
    }


def cpmap_from_record(rec: dict) -> CPMap:
    _expect(rec, "cpmap")
    dom = AlgebraShape(tuple(rec["domain"]))
    cod = AlgebraShape(tuple(rec["codomain"]))
    ks = [_from_complex_list(k, (dom.total_dim, cod.total_dim)) for k in rec["kraus"]]
    return CPMap(dom, cod, ks, tol=1e-9)


def setup_to_record(s: MeasurementSetup) -> dict:
    return {
        "kind": "setup",
        "map": cpmap_to_record(s.map),
        "measured": element_to_record(s.measured),
        "pointer": element_to_record(s.pointer),
    }


def setup_from_record(rec: dict) -> MeasurementSetup:
    _expect(rec, "setup")
    return MeasurementSetup(
        cpmap_from_record(rec["map"]), element_from_record(rec["measured"]), element_from_record(rec["pointer"])
    )


def report_to_record(r: BoundReport) -> dict:
    return {"kind": "bound-report", **r.to_record()}


def report_from_record(rec: dict) -> BoundReport:
    _expect(rec, "bound-report")
    return BoundReport.from_record(rec)


_WRITERS = {
    Element: element_to_record,
    State: state_to_record,
    CPMap: cpmap_to_record,
    MeasurementSetup: setup_to_record,
    BoundReport: report_to_record,
}
_READERS = {
    "element": element_from_record,
    "state": state_from_record,
    "cpmap": cpmap_from_record,
    "setup": setup_from_record,
    "bound-report": report_from_record,
}


def to_record(obj) -> dict:
    for cls, fn in _WRITERS.items():
        if isinstance(obj, cls):
            return {"version": FORMAT_VERSION, **fn(obj)}
    raise InvalidArgumentError(f"cannot serialise {type(obj).__name__}")


def from_record(rec: dict):
    try:
        reader = _READERS[rec["kind"]]
    except KeyError:
        raise InvalidArgumentError(f"unknown record kind {rec.get('kind')!r}") from None
    return reader(rec)


def dumps(obj) -> str:
    return json.dumps(to_record(obj), sort_keys=True, allow_nan=True)


def loads(text: str):
    return from_record(json.loads(text))


def _expect(rec: dict, kind: str):
    if rec.get("kind") != kind:
        raise InvalidArgumentError(f"expected a {kind!r} record, got {rec.get('kind')!r}")

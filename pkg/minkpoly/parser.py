"""
Reading and writing the toolkit's JSON files.

Schemas (complex numbers always as [re, im]):

* weights:       {"alpha": [...]}
* hyperpolygon:  {"alpha": [...], "p": [[[re, im], [re, im]], ...], "q": [...]}
* polygon:       {"k1": int, "alpha": [...], "sides": [[x, y, t], ...]}, optional "k2", "order"

Floats are written with their shortest round-trip representation, so
load(save(x)) reproduces x exactly.
"""
import dataclasses
import enum
import functools
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Union

import numpy as np

from . import hyperpolygon
from .correspond import HiggsData
from .errors import ParseError, SchemaMismatch
from .gauge import GaugeElement
from .hyperpolygon import HyperConfig, SubsetMask, WeightVector
from .minkowski import MinkPolygon, validate

logger = logging.getLogger(__name__)

Loadable = Union[HyperConfig, MinkPolygon, WeightVector]


@dataclass
class Loaded:
    value: Loadable
    report: Dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        if isinstance(self.value, MinkPolygon):
            return "polygon"
        if isinstance(self.value, HyperConfig):
            return "hyperpolygon"
        return "weights"


# --- encoding -----------------------------------------------------------------------

@functools.singledispatch
def to_jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    return obj


@to_jsonable.register(np.ndarray)
def _(obj: np.ndarray) -> Any:
    if np.iscomplexobj(obj):
        return np.stack([obj.real, obj.imag], axis=-1).tolist()
    return obj.tolist()


@to_jsonable.register(complex)
@to_jsonable.register(np.complexfloating)
def _(obj) -> Any:
    return [float(obj.real), float(obj.imag)]


@to_jsonable.register(np.generic)
def _(obj) -> Any:
    return obj.item()


@to_jsonable.register(enum.Enum)
def _(obj: enum.Enum) -> Any:
    return obj.value


@to_jsonable.register(SubsetMask)
def _(obj: SubsetMask) -> Any:
    return list(obj.labels())


@to_jsonable.register(Counter)
def _(obj: Counter) -> Any:
    return {str(k): v for k, v in sorted(obj.items())}


@to_jsonable.register(dict)
def _(obj: dict) -> Any:
    return {str(k): to_jsonable(v) for k, v in obj.items()}


@to_jsonable.register(list)
@to_jsonable.register(tuple)
def _(obj) -> Any:
    return [to_jsonable(v) for v in obj]


@to_jsonable.register(HyperConfig)
def _(obj: HyperConfig) -> Any:
    return {"alpha": obj.alpha.tolist(), "p": to_jsonable(obj.p), "q": to_jsonable(obj.q)}


@to_jsonable.register(MinkPolygon)
def _(obj: MinkPolygon) -> Any:
    payload = {"k1": obj.k1, "alpha": obj.alpha.tolist(), "sides": obj.sides.tolist()}
    if obj.order is not None:
        payload["order"] = [i + 1 for i in obj.order]
    return payload


@to_jsonable.register(WeightVector)
def _(obj: WeightVector) -> Any:
    return {"alpha": obj.alpha.tolist()}


@to_jsonable.register(HiggsData)
def _(obj: HiggsData) -> Any:
    return {
        "points": to_jsonable(obj.points),
        "beta": None if obj.weights is None else obj.weights.beta.tolist(),
        "flags": to_jsonable(obj.flags),
        "residues": to_jsonable(obj.residues),
        "alpha": obj.alpha.tolist(),
    }


@to_jsonable.register(GaugeElement)
def _(obj: GaugeElement) -> Any:
    return {"A": to_jsonable(obj.A), "e": to_jsonable(obj.e), "compact": obj.compact}


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2)


def save(obj: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps(obj))
        f.write("\n")


# --- decoding -----------------------------------------------------------------------

def _real_list(data: Any, where: str) -> np.ndarray:
    if not isinstance(data, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data):
        raise ParseError(None, f"{where}: expected a list of numbers")
    return np.asarray(data, dtype=float)


def _complex_pair(data: Any, where: str) -> complex:
    if (not isinstance(data, list) or len(data) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data)):
        raise ParseError(None, f"{where}: expected a complex number as [re, im]")
    return complex(data[0], data[1])


def _complex_rows(data: Any, name: str) -> np.ndarray:
    if not isinstance(data, list):
        raise ParseError(None, f"{name}: expected a list of 2-vectors")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != 2:
            raise ParseError(None, f"{name}[{i}]: expected two complex entries")
        rows.append([_complex_pair(x, f"{name}[{i}][{k}]") for k, x in enumerate(row)])
    return np.array(rows, dtype=complex).reshape(-1, 2)


def parse(data: Any, margin: float = hyperpolygon.GENERICITY_MARGIN) -> Loaded:
    """Typed object from decoded JSON, with its validation report."""
    if not isinstance(data, dict) or "alpha" not in data:
        raise SchemaMismatch("expected an object with an 'alpha' field")
    alpha = _real_list(data["alpha"], "alpha")

    if "sides" in data:
        k1 = data.get("k1")
        if not isinstance(k1, int):
            raise SchemaMismatch("polygon files need an integer 'k1'")
        sides = data["sides"]
        if not isinstance(sides, list) or not all(isinstance(s, list) and len(s) == 3 for s in sides):
            raise ParseError(None, "sides: expected a list of [x, y, t] triples")
        sides = np.array([_real_list(s, f"sides[{i}]") for i, s in enumerate(sides)]).reshape(-1, 3)
        n = len(sides)
        k2 = data.get("k2", n - k1)
        if not 0 <= k1 <= n or k1 + k2 != n or alpha.size != n:
            raise SchemaMismatch(f"k1 + k2 = {k1 + k2} and {alpha.size} radii do not match {n} sides")
        order = data.get("order")
        if order is not None:
            if sorted(order) != list(range(1, n + 1)):
                raise SchemaMismatch("order must be a permutation of 1..n")
            order = tuple(int(i) - 1 for i in order)
        poly = MinkPolygon(sides, k1, alpha, order)
        checked = validate(poly)
        return Loaded(poly, dict(dataclasses.asdict(checked), valid=checked.valid))

    if "p" in data or "q" in data:
        if "p" not in data or "q" not in data:
            raise SchemaMismatch("hyperpolygon files need both 'p' and 'q'")
        p, q = _complex_rows(data["p"], "p"), _complex_rows(data["q"], "q")
        if not (len(p) == len(q) == alpha.size):
            raise SchemaMismatch(f"p has {len(p)} rows, q has {len(q)}, alpha has {alpha.size} entries")
        cfg = HyperConfig(p, q, alpha)
        report = {
            "real_residual": hyperpolygon.real_residual(cfg),
            "complex_residual": hyperpolygon.complex_residual(cfg),
        }
        return Loaded(cfg, report)

    try:
        weights = WeightVector(alpha)
    except ValueError as e:
        raise SchemaMismatch(str(e))
    min_eps, _ = hyperpolygon.min_abs_epsilon(weights.alpha)
    return Loaded(weights, {"n": weights.n, "min_abs_epsilon": min_eps,
                            "generic": min_eps > margin})


def loads(text: str, margin: float = hyperpolygon.GENERICITY_MARGIN) -> Loaded:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg)
    return parse(data, margin)


def load(path: str, margin: float = hyperpolygon.GENERICITY_MARGIN) -> Loaded:
    if not os.path.exists(path):
        raise ParseError(None, f"no such file: {path}")
    with open(path, "r") as f:
        loaded = loads(f.read(), margin)
    logger.info(f"Loaded {loaded.kind} from {path}")
    return loaded

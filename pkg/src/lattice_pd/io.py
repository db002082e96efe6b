"""JSON documents for every object, with file references resolved relative to the referring file."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any, Mapping

from .birthdeath import IntervalFunction, MonMorphism, require_lifted, validate_interval_function
from .classical import validate_classical_filtration
from .complex import SimplicialComplex, validate_complex
from .distances import MorphismPath, Step
from .errors import MalformedInput
from .filtration import Filtration, FiltrationMorphism, filtration_to_dict, validate_filtration
from .lattice import BoundedLatticeMap, FiniteMetricLattice, lattice_to_dict, validate_lattice
from .mobius import ChargeMorphism


class Doc:
    """A parsed JSON value together with the directory that relative references resolve against."""

    def __init__(self, data: Any, root: Path):
        self.data = data
        self.root = root

    @classmethod
    def load(cls, ref: Any, root: Path | str = ".") -> Doc:
        root = Path(root)
        if isinstance(ref, Doc):
            return ref
        if isinstance(ref, (str, Path)):
            path = (root / ref) if not Path(ref).is_absolute() else Path(ref)
            try:
                text = path.read_text()
            except OSError as exc:
                raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
            try:
                return cls(json.loads(text), path.parent)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path} is not valid JSON: {exc}") from None
        return cls(ref, root)

    def field(self, key: str) -> Doc:
        if not isinstance(self.data, Mapping) or key not in self.data:
            raise MalformedInput(f"document has no {key!r} entry")
        return Doc.load(self.data[key], self.root)

    def get(self, key: str, default=None):
        return self.data.get(key, default) if isinstance(self.data, Mapping) else default

    def __contains__(self, key) -> bool:
        return isinstance(self.data, Mapping) and key in self.data


def _mapping(doc: Doc, what: str) -> Mapping:
    if not isinstance(doc.data, Mapping):
        raise MalformedInput(f"{what} must be a JSON object")
    return doc.data


def read_lattice(ref, root=".") -> FiniteMetricLattice:
    doc = Doc.load(ref, root)
    data = _mapping(doc, "lattice")
    if "elements" not in data and "lattice" in data:
        return read_lattice(doc.field("lattice"))
    return validate_lattice(data)


def read_complex(ref, root=".") -> SimplicialComplex:
    doc = Doc.load(ref, root)
    data = doc.data
    if isinstance(data, Mapping):
        data = data.get("simplices")
    if not isinstance(data, list):
        raise MalformedInput("complex needs a 'simplices' list")
    return validate_complex(data)


def read_filtration(ref, root=".") -> Filtration:
    doc = Doc.load(ref, root)
    data = _mapping(doc, "filtration")
    if "values" in data and "lattice" not in data:
        K = read_complex(doc.field("complex")) if "complex" in data else None
        return validate_classical_filtration(data, K)
    P = read_lattice(doc.field("lattice"))
    K = read_complex(doc.field("complex"))
    assignment = data.get("assignment")
    if not isinstance(assignment, Mapping):
        raise MalformedInput("filtration needs an 'assignment' object")
    return validate_filtration(P, K, _keyed(assignment, P))


def _keyed(mapping: Mapping, P: FiniteMetricLattice) -> dict:
    """Match JSON string keys to lattice elements."""
    by_name = {str(e): e for e in P.elements}
    out = {}
    for k, v in mapping.items():
        if str(k) not in by_name:
            raise MalformedInput(f"unknown element {k!r}")
        out[by_name[str(k)]] = v
    return out


def read_function(ref, root=".") -> IntervalFunction:
    doc = Doc.load(ref, root)
    data = _mapping(doc, "function")
    P = read_lattice(doc.field("lattice"))
    return validate_interval_function(data, P)


def read_map(raw: Mapping, source: FiniteMetricLattice, target: FiniteMetricLattice) -> BoundedLatticeMap:
    if not isinstance(raw, Mapping):
        raise MalformedInput("map must be an object from source to target elements")
    by_name = {str(e): e for e in target.elements}
    images = {}
    for k, v in _keyed(raw, source).items():
        if str(v) not in by_name:
            raise MalformedInput(f"map sends {k!r} to unknown element {v!r}")
        images[k] = by_name[str(v)]
    missing = [e for e in source.elements if e not in images]
    if missing:
        raise MalformedInput(f"map has no image for {missing[0]!r}")
    return BoundedLatticeMap(source, target, images)


OBJECT_READERS = {"fil": read_filtration, "mon": read_function, "fnc": read_function}
MORPHISMS = {"fil": FiltrationMorphism, "mon": MonMorphism, "fnc": ChargeMorphism}


def _object_lattice(obj) -> FiniteMetricLattice:
    return obj.index if isinstance(obj, Filtration) else obj.base


def read_lattice_map(ref, root=".") -> BoundedLatticeMap:
    """A map file whose ``source`` and ``target`` are lattices or objects carrying one."""
    doc = Doc.load(ref, root)
    P = read_lattice(doc.field("source"))
    Q = read_lattice(doc.field("target"))
    return read_map(doc.get("map"), P, Q)


def read_morphism(ref, category: str, root=".", *, strict: bool = True):
    """A morphism triple ``{"source", "target", "map"}`` in the given category."""
    if category not in OBJECT_READERS:
        raise MalformedInput(f"unknown category {category!r}")
    doc = Doc.load(ref, root)
    reader = OBJECT_READERS[category]
    F = reader(doc.field("source"))
    G = reader(doc.field("target"))
    alpha = read_map(doc.get("map"), _object_lattice(F), _object_lattice(G))
    if category == "fil":
        return FiltrationMorphism(F, G, alpha, check_on_init=strict)
    return MORPHISMS[category].from_base(F, G, alpha, strict=strict)


def read_path(ref, root=".") -> MorphismPath:
    doc = Doc.load(ref, root)
    data = _mapping(doc, "path")
    category = data.get("category")
    if category not in OBJECT_READERS:
        raise MalformedInput("path needs a category of 'fil', 'mon' or 'fnc'")
    steps_doc = doc.field("steps")
    if not isinstance(steps_doc.data, list):
        raise MalformedInput("path 'steps' must be a list")
    steps = []
    for raw in steps_doc.data:
        step = Doc.load(raw, steps_doc.root)
        m = read_morphism(step.field("morphism"), category, strict=False)
        steps.append(Step(m, step.get("direction", "fwd")))
    start = OBJECT_READERS[category](doc.field("start")) if "start" in doc else None
    return MorphismPath(category, steps, start)


# ---------------------------------------------------------------------------
# writers


def map_to_dict(alpha: BoundedLatticeMap) -> dict:
    return {str(a): str(alpha(a)) for a in alpha.source.elements}


def object_to_dict(obj, full: bool = False) -> dict:
    if isinstance(obj, Filtration):
        return filtration_to_dict(obj)
    return obj.to_dict(full=full)


def morphism_to_dict(m, full: bool = False) -> dict:
    base = m.map if isinstance(m, FiltrationMorphism) else require_lifted(m.map)
    return {
        "source": object_to_dict(m.source, full),
        "target": object_to_dict(m.target, full),
        "map": map_to_dict(base),
    }


def path_to_dict(path: MorphismPath, full: bool = False) -> dict:
    out = {
        "category": path.category,
        "steps": [{"direction": s.direction, "morphism": morphism_to_dict(s.morphism, full)} for s in path.steps],
    }
    if path.start is not None:
        out["start"] = object_to_dict(path.start, full)
    return out


def jsonable(x: Any) -> Any:
    """Plain JSON data; infinities become ``"inf"`` and integral floats become ints."""
    if isinstance(x, Mapping):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, tuple) and hasattr(x, "_fields"):
        return [str(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return [jsonable(v) for v in sorted(x)]
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, float) or hasattr(x, "item"):
        x = x.item() if hasattr(x, "item") else x
        if isinstance(x, float):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            if x.is_integer():
                return int(x)
        return x
    if isinstance(x, int):
        return x
    return str(x)


_SCALAR_ARRAY = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]", re.S)


def dumps(obj: Any) -> str:
    """Indented JSON with arrays of scalars kept on one line."""
    text = json.dumps(jsonable(obj), indent=2)
    return _SCALAR_ARRAY.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)


__all__ = [
    "Doc",
    "dumps",
    "jsonable",
    "lattice_to_dict",
    "map_to_dict",
    "morphism_to_dict",
    "object_to_dict",
    "path_to_dict",
    "read_complex",
    "read_filtration",
    "read_function",
    "read_lattice",
    "read_lattice_map",
    "read_map",
    "read_morphism",
    "read_path",
]

"""Model instances: seeded generation, JSON persistence and validation.

Generation draws from numpy's PCG64 bit generator seeded explicitly with
``(seed, family code, dim)``, so an instance is a pure function of those
three values on every platform. Files are single JSON documents::

    {"name": "...", "dim": 3, "orientation": "zzm",
     "a": [...], "c": [...], "kappa2": [...], "seed": 1, "family": "uniform"}

Floats are written with ``repr`` precision, which round-trips exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Orientation, ZzmMatrix, build
from .errors import BadFamilyParam, SchemaError, ValidationError, ZqhError
from .metric import MetricParams
from .spectral import SpectrumGapReport, adjacent_gap

__all__ = [
    "Family",
    "ModelInstance",
    "FAMILIES",
    "UNIFORM_MIN_GAP",
    "generate",
    "save",
    "load",
    "dumps",
    "loads",
]

UNIFORM_MIN_GAP = 1e-3
ENTRY_RANGE = (-10.0, 10.0)
KAPPA2_RANGE = (0.1, 10.0)

FAMILIES = ("uniform", "equidistant", "near-degenerate", "zero-odd-coupling")
_FAMILY_CODES = {name: i for i, name in enumerate(FAMILIES)}


@dataclass(frozen=True)
class Family:
    """A generator family; ``near-degenerate`` carries the planted gap."""

    name: str
    gap: float | None = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise BadFamilyParam(f"unknown family {self.name!r}; choose from {', '.join(FAMILIES)}")
        if self.name == "near-degenerate":
            if self.gap is None or not math.isfinite(self.gap) or self.gap < 0:
                raise BadFamilyParam("near-degenerate needs a finite gap >= 0")
        elif self.gap is not None:
            raise BadFamilyParam(f"family {self.name!r} takes no gap parameter")

    @classmethod
    def parse(cls, text) -> "Family":
        """Accept ``"uniform"``, ``"near-degenerate:1e-12"`` and friends."""
        if isinstance(text, Family):
            return text
        name, _, arg = str(text).strip().partition(":")
        name = name.strip().lower().replace("_", "-")
        gap = None
        if arg:
            try:
                gap = float(arg)
            except ValueError:
                raise BadFamilyParam(f"bad family parameter {arg!r}") from None
        return cls(name, gap)

    def __str__(self):
        return self.name if self.gap is None else f"{self.name}:{self.gap!r}"


@dataclass(frozen=True, eq=False)
class ModelInstance:
    name: str
    a: np.ndarray
    c: np.ndarray
    orientation: Orientation = Orientation.ZZM
    kappa2: np.ndarray | None = None
    seed: int | None = None
    family: str | None = None
    path: str | None = None

    def __post_init__(self):
        # validates lengths and finiteness
        z = build(self.a, self.c, self.orientation)
        object.__setattr__(self, "a", z.diag)
        object.__setattr__(self, "c", z.off)
        object.__setattr__(self, "orientation", z.orientation)
        if self.kappa2 is not None:
            k = np.array(self.kappa2, dtype=np.float64).reshape(-1)
            if k.size != z.dim:
                raise ValidationError(f"kappa2 has length {k.size}, expected {z.dim}")
            if not np.all(np.isfinite(k) & (k > 0)):
                raise ValidationError("kappa2 must be strictly positive")
            k.setflags(write=False)
            object.__setattr__(self, "kappa2", k)

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def hamiltonian(self) -> ZzmMatrix:
        return build(self.a, self.c, self.orientation)

    @property
    def gap(self) -> SpectrumGapReport | None:
        return adjacent_gap(self.hamiltonian) if self.dim >= 2 else None

    def metric_params(self) -> MetricParams:
        return MetricParams(self.kappa2 if self.kappa2 is not None else np.ones(self.dim))

    @property
    def provenance(self) -> str:
        if self.path is not None:
            return f"file:{self.path}"
        if self.seed is not None:
            return f"seeded:{self.family}:{self.seed}"
        return "constructed"

    def param_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.orientation.value.encode())
        for arr in (self.a, self.c, self.kappa2 if self.kappa2 is not None else np.empty(0)):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
            h.update(b"|")
        return h.hexdigest()[:16]

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "dim": self.dim,
            "orientation": self.orientation.value,
            "a": self.a.tolist(),
            "c": self.c.tolist(),
        }
        if self.kappa2 is not None:
            d["kappa2"] = self.kappa2.tolist()
        if self.seed is not None:
            d["seed"] = int(self.seed)
        if self.family is not None:
            d["family"] = self.family
        return d

    def same_parameters(self, other: "ModelInstance") -> bool:
        def eq(x, y):
            if x is None or y is None:
                return x is y
            return np.array_equal(x, y)

        return (
            self.name == other.name
            and self.orientation is other.orientation
            and eq(self.a, other.a)
            and eq(self.c, other.c)
            and eq(self.kappa2, other.kappa2)
            and self.seed == other.seed
            and self.family == other.family
        )


def _rng(family: Family, dim: int, seed: int) -> np.random.Generator:
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, _FAMILY_CODES[family.name], int(dim)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _uniform_diag(rng, dim: int) -> np.ndarray:
    lo, hi = ENTRY_RANGE
    while True:
        a = rng.uniform(lo, hi, size=dim)
        if dim < 2 or np.min(np.abs(np.diff(a))) >= UNIFORM_MIN_GAP:
            return a


def generate(family, dim: int, seed: int, orientation=Orientation.ZZM, name: str | None = None) -> ModelInstance:
    family = Family.parse(family)
    dim = int(dim)
    if dim < 1:
        raise BadFamilyParam(f"dim must be >= 1, got {dim}")
    if family.name == "near-degenerate" and dim < 2:
        raise BadFamilyParam("near-degenerate needs dim >= 2")
    rng = _rng(family, dim, seed)
    lo, hi = ENTRY_RANGE

    if family.name == "equidistant":
        a = np.arange(1, dim + 1, dtype=np.float64)
    elif family.name == "near-degenerate":
        while True:
            a = _uniform_diag(rng, dim)
            k = int(rng.integers(0, dim - 1))
            a[k + 1] = a[k] + family.gap
            # the planted pair must remain the only close one
            if k + 2 >= dim or abs(a[k + 2] - a[k + 1]) >= UNIFORM_MIN_GAP:
                break
    else:
        a = _uniform_diag(rng, dim)
    c = rng.uniform(lo, hi, size=dim - 1)
    if family.name == "zero-odd-coupling":
        c[0::2] = 0.0
    kappa2 = rng.uniform(*KAPPA2_RANGE, size=dim)
    if name is None:
        name = f"{family.name}-M{dim}-s{seed}"
    return ModelInstance(name, a, c, orientation, kappa2, int(seed), str(family))


def dumps(m: ModelInstance) -> str:
    return json.dumps(m.to_dict(), indent=2, allow_nan=False) + "\n"


def save(m: ModelInstance, path) -> Path:
    path = Path(path)
    path.write_text(dumps(m))
    return path


def _line_of(text: str, field: str) -> int | None:
    match = re.search(rf'"{re.escape(field)}"\s*:', text)
    return text.count("\n", 0, match.start()) + 1 if match else None


def _float_list(doc, key, text, required=True):
    if key not in doc:
        if required:
            raise SchemaError("missing required field", key, None)
        return None
    val = doc[key]
    if not isinstance(val, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
    ):
        raise SchemaError("expected a list of numbers", key, _line_of(text, key))
    return np.array(val, dtype=np.float64)


def loads(text: str, path=None) -> ModelInstance:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", None, exc.lineno) from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    known = {"name", "dim", "orientation", "a", "c", "kappa2", "seed", "family"}
    for key in doc:
        if key not in known:
            raise SchemaError("unknown field", key, _line_of(text, key))
    name = doc.get("name")
    if not isinstance(name, str):
        raise SchemaError("expected a string", "name", _line_of(text, "name"))
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaError("expected a positive integer", "dim", _line_of(text, "dim"))
    orient = doc.get("orientation", "zzm")
    if orient not in ("zzm", "tzzm"):
        raise SchemaError("expected 'zzm' or 'tzzm'", "orientation", _line_of(text, "orientation"))
    a = _float_list(doc, "a", text)
    c = _float_list(doc, "c", text)
    kappa2 = _float_list(doc, "kappa2", text, required=False)
    if a.size != dim:
        raise SchemaError(f"length {a.size} does not match dim {dim}", "a", _line_of(text, "a"))
    if c.size != dim - 1:
        raise SchemaError(f"length {c.size}, expected dim - 1 = {dim - 1}", "c", _line_of(text, "c"))
    if kappa2 is not None and kappa2.size != dim:
        raise SchemaError(f"length {kappa2.size} does not match dim {dim}", "kappa2", _line_of(text, "kappa2"))
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("expected an integer", "seed", _line_of(text, "seed"))
    family = doc.get("family")
    if family is not None and not isinstance(family, str):
        raise SchemaError("expected a string", "family", _line_of(text, "family"))
    try:
        return ModelInstance(name, a, c, orient, kappa2, seed, family, None if path is None else str(path))
    except ValidationError:
        raise
    except ZqhError as exc:
        raise ValidationError(str(exc)) from exc


def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} is not allowed")


def load(path) -> ModelInstance:
    path = Path(path)
    return loads(path.read_text(), path)

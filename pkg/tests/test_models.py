import json

import numpy as np
import pytest

from zqh.errors import BadFamilyParam, SchemaError, ValidationError
from zqh.models import Family, ModelInstance, dumps, generate, load, loads, save


def test_equidistant():
    m = generate("equidistant", 4, 123)
    assert m.a.tolist() == [1, 2, 3, 4]
    assert m.c.size == 3 and m.kappa2.size == 4


def test_near_degenerate_gap():
    for seed in range(20):
        m = generate("near-degenerate:1e-12", 3, seed)
        assert m.gap.gap == pytest.approx(1e-12, rel=1e-2)
    assert generate(Family("near-degenerate", 0.0), 5, 1).gap.gap == 0.0


def test_zero_odd_coupling():
    m = generate("zero-odd-coupling", 9, 2)
    assert np.all(m.c[0::2] == 0) and np.all(m.c[1::2] != 0)


def test_uniform_respects_gap_and_range():
    for seed in range(30):
        m = generate("uniform", 40, seed)
        assert np.min(np.abs(np.diff(m.a))) >= 1e-3
        assert np.all(np.abs(m.a) <= 10) and np.all(np.abs(m.c) <= 10)
        assert np.all((m.kappa2 > 0.1) & (m.kappa2 < 10))


@pytest.mark.parametrize("family", ["uniform", "equidistant", "near-degenerate:1e-6", "zero-odd-coupling"])
def test_generation_is_deterministic(family):
    m1, m2 = generate(family, 12, 77), generate(family, 12, 77)
    assert m1.same_parameters(m2)
    assert m1.a.tobytes() == m2.a.tobytes() and m1.c.tobytes() == m2.c.tobytes()
    assert not m1.same_parameters(generate(family, 12, 78)) or family == "equidistant"


def test_generation_frozen_values():
    # pins the PCG64 stream and the seeding scheme
    m = generate("uniform", 3, 0)
    assert m.a.tolist() == [5.2900937559319345, -1.1501753053217953, -1.81370226506791]


@pytest.mark.parametrize(
    "family, dim",
    [("nope", 3), ("near-degenerate", 3), ("near-degenerate:-1", 3), ("uniform:1", 3), ("uniform", 0), ("near-degenerate:0", 1)],
)
def test_bad_family(family, dim):
    with pytest.raises(BadFamilyParam):
        generate(family, dim, 0)


def test_round_trip_is_bit_exact(tmp_path):
    for seed in range(100):
        m = generate(["uniform", "equidistant", "zero-odd-coupling"][seed % 3], 1 + seed % 17, seed)
        path = save(m, tmp_path / f"{m.name}.json")
        back = load(path)
        assert back.same_parameters(m)
        assert back.a.tobytes() == m.a.tobytes()
        assert back.kappa2.tobytes() == m.kappa2.tobytes()
        assert back.provenance == f"file:{path}"


def test_round_trip_awkward_floats():
    vals = [0.1, 1 / 3, 5e-324, 1.7976931348623157e308, -0.0, 2.0**-1074 * 3]
    m = ModelInstance("x", vals, np.arange(5.0), "tzzm")
    back = loads(dumps(m))
    assert back.a.tobytes() == m.a.tobytes()
    assert back.orientation is m.orientation


def _doc(**over):
    d = {"name": "t", "dim": 2, "orientation": "zzm", "a": [1.0, 3.0], "c": [2.0]}
    d.update(over)
    return json.dumps(d, indent=2)


def test_schema_error_names_field():
    with pytest.raises(SchemaError) as exc:
        loads(_doc(c=[1.0, 2.0]))
    assert exc.value.field == "c"
    assert exc.value.line is not None and "c" in str(exc.value)


@pytest.mark.parametrize(
    "text, field",
    [
        (_doc(dim="2"), "dim"),
        (_doc(orientation="up"), "orientation"),
        (_doc(a=[1.0, "x"]), "a"),
        (_doc(extra=1), "extra"),
        (_doc(kappa2=[1.0]), "kappa2"),
        (_doc(seed=1.5), "seed"),
    ],
)
def test_schema_errors(text, field):
    with pytest.raises(SchemaError) as exc:
        loads(text)
    assert exc.value.field == field


def test_schema_error_on_broken_json():
    with pytest.raises(SchemaError) as exc:
        loads('{"name": "t",\n "dim": }')
    assert exc.value.line == 2


def test_schema_rejects_nan():
    with pytest.raises(SchemaError):
        loads(_doc(a=[1.0, float("nan")]))


def test_zero_kappa_rejected():
    with pytest.raises(ValidationError, match="kappa2 must be strictly positive"):
        loads(_doc(kappa2=[1.0, 0.0]))


def test_missing_field(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"name": "t", "dim": 1, "a": [1.0]}))
    with pytest.raises(SchemaError) as exc:
        load(p)
    assert exc.value.field == "c"


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load(tmp_path / "absent.json")

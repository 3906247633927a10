import json
import math
import pytest
from fractions import Fraction
from pathlib import Path
from documents import (
    ChainDoc, CycleDoc, FanDoc, FormDoc, PolynomialDoc, SemialgDoc, TropChainDoc, build_chain, build_cycle,
    build_fan, build_form, build_polynomial, build_semialg, build_tropchain, digest, load_document,
)
from exceptions import DocumentError
from polyfan import Cone

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def write(tmp_path, payload, name="doc.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return path


def test_invalid_json_is_a_document_error(tmp_path):
    with pytest.raises(DocumentError) as info:
        load_document(write(tmp_path, "{\"kind\": "), FanDoc)
    assert info.value.exit_code == 1
    assert "invalid JSON" in str(info.value)


def test_schema_violation_names_the_field(tmp_path):
    with pytest.raises(DocumentError) as info:
        load_document(write(tmp_path, {"kind": "fan", "lattice_rank": -2}), FanDoc)
    assert "lattice_rank" in str(info.value)
    with pytest.raises(DocumentError):
        load_document(write(tmp_path, {"kind": "chain", "n": 1, "charts": []}), FanDoc)


def test_missing_file(tmp_path):
    with pytest.raises(DocumentError):
        load_document(tmp_path / "absent.json", FanDoc)
    with pytest.raises(DocumentError):
        digest(tmp_path / "absent.json")


def test_digest_is_sha256(tmp_path):
    path = write(tmp_path, {"kind": "fan", "lattice_rank": 1})
    assert len(digest(path)) == 64
    assert digest(path) == digest(path)


def test_compactified_fan_document():
    fan = build_fan(load_document(SAMPLES / "line_fan.json", FanDoc))
    assert len(fan.cones) == 7
    assert fan.name == "tropical line in P2"


def test_polynomial_with_rational_coefficient(tmp_path):
    doc = load_document(write(tmp_path, {"kind": "polynomial", "n": 1, "terms": [["1/2", [1]], [1, [0]]]}),
                        PolynomialDoc)
    f = build_polynomial(doc)
    assert dict((e, c) for c, e in f.terms)[(1,)] == Fraction(1, 2)


def test_cycle_document_is_checked():
    balanced = build_cycle(load_document(SAMPLES / "line_cycle.json", CycleDoc))
    assert balanced.verdict.balanced
    unbalanced = build_cycle(load_document(SAMPLES / "unbalanced_cycle.json", CycleDoc))
    assert not unbalanced.verdict.balanced


def test_cycle_weights_must_match_cones(tmp_path):
    payload = {"kind": "cycle", "lattice_rank": 1, "rays": [[1], [-1]], "cones": [[0], [1]], "weights": [1]}
    with pytest.raises(DocumentError):
        build_cycle(load_document(write(tmp_path, payload), CycleDoc))


def test_form_document():
    form = build_form(load_document(SAMPLES / "line_bump_form.json", FormDoc))
    assert (form.n, form.p, form.q) == (2, 1, 1)
    assert len(form.terms) == 1
    assert form.terms[0].coef.support[0] == (1.0, 3.0)


def test_form_chart_box_must_match_dimension(tmp_path):
    payload = {"kind": "form", "n": 2, "p": 0, "q": 0, "charts": [{"box": [[0, 1]]}]}
    with pytest.raises(DocumentError):
        build_form(load_document(write(tmp_path, payload), FormDoc))


def test_chain_document_bounds():
    chain = build_chain(load_document(SAMPLES / "line_chain.json", ChainDoc))
    assert chain.dim == 2
    assert chain.name == "x+y+1=0 near x=0"
    theta = chain.charts[0].params[1]
    assert theta.hi == pytest.approx(2 * math.pi)
    assert chain.charts[0].params[0].hi == float("inf")


def test_tropical_chain_documents():
    ray_chain = build_tropchain(load_document(SAMPLES / "ray_tropchain.json", TropChainDoc))
    assert ray_chain.coefficient(Cone.from_generators([[1, 0]], 2)) == (1, 0)
    segment = build_tropchain(load_document(SAMPLES / "segment_tropchain.json", TropChainDoc))
    assert segment.p == 1
    assert len(segment.terms) == 1


def test_semialgebraic_document():
    s = build_semialg(load_document(SAMPLES / "point_set.json", SemialgDoc))
    assert s.contains([0.5])
    assert not s.contains([0.25])

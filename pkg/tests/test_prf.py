"""
DCLED - PRF Tests
AES-128-CMAC against RFC 4493 vectors, the injective input encoding, and the
mask/target derivations built on top.
"""

import json
from pathlib import Path

import pytest

from app.core.exceptions import ParameterError
from app.core.prf import (
    Label,
    PrfKey,
    cmac_to_field,
    derive_masks_2s,
    derive_tag_targets,
    prf_eval,
    prf_input,
)

VECTORS = json.loads((Path(__file__).parent / "vectors" / "prf_vectors.json").read_text())


CMAC_CASES = VECTORS["cmac"]["cases"]


@pytest.mark.parametrize("case", CMAC_CASES, ids=lambda c: f"len{len(c['message']) // 2}")
def test_cmac_vectors(case, params):
    """Tags are below 2^128 - 159, so the field value is the tag itself."""
    seed = bytes.fromhex(VECTORS["cmac"]["key"])
    value = cmac_to_field(seed, bytes.fromhex(case["message"]), params)
    assert value.value == int(case["tag"], 16)
    assert value.to_hex() == case["tag"]


@pytest.mark.parametrize("case", VECTORS["inputs"], ids=lambda c: c["encoded"])
def test_input_encoding(case):
    label = Label(bytes.fromhex(case["label"]))
    assert prf_input(label, case["index"]).hex() == case["encoded"]


def test_input_encoding_is_injective_across_lengths():
    """'a' || 'b' index 0 must not collide with 'ab' index 0 or similar."""
    seen = {
        prf_input(Label.of(text), index)
        for text in ("a", "ab", "abc", "b", "\x00", "a\x00")
        for index in range(4)
    }
    assert len(seen) == 6 * 4


@pytest.mark.parametrize(
    "case", VECTORS["prf_eval"], ids=lambda c: f"{c['label']}-{c['index']}"
)
def test_prf_eval_golden(case, params, params97):
    key = PrfKey(bytes.fromhex(case["key"]))
    label = Label(bytes.fromhex(case["label"]))
    limit = case["index_limit"]
    assert prf_input(label, case["index"]).hex() == case["input"]
    value = prf_eval(key, label, case["index"], params, index_limit=limit)
    assert value.to_hex() == case["element"]
    small = prf_eval(key, label, case["index"], params97, index_limit=limit)
    assert small.value == case["mod97"]


def test_prf_eval_uses_encoding(params):
    key = PrfKey(bytes(range(16)))
    label = Label.of("alice")
    assert prf_eval(key, label, 2, params) == cmac_to_field(
        key.seed, prf_input(label, 2), params
    )


def test_prf_is_deterministic_and_index_separated(params):
    key = PrfKey(bytes(16))
    label = Label.of("x1")
    a, b = derive_masks_2s(key, label, params)
    assert (a, b) == derive_masks_2s(key, label, params)
    assert a != b
    targets = derive_tag_targets(key, label, params)
    assert len(set(targets)) == 4
    assert targets[:2] == (a, b)


def test_different_keys_differ(params):
    label = Label.of("x1")
    assert prf_eval(PrfKey(bytes(16)), label, 0, params) != prf_eval(
        PrfKey(b"\x01" * 16), label, 0, params
    )


def test_index_bounds(params):
    key = PrfKey.generate()
    with pytest.raises(ParameterError):
        prf_eval(key, Label.of("x"), 4, params)
    assert prf_eval(key, Label.of("x"), 15, params, index_limit=16).p == params.p
    with pytest.raises(ParameterError):
        prf_input(Label.of("x"), 256)


def test_key_and_label_validation():
    with pytest.raises(ParameterError):
        PrfKey(b"short")
    with pytest.raises(ParameterError):
        Label(b"")
    assert "redacted" in repr(PrfKey.generate())
    assert Label.of("héllo").data == "héllo".encode()

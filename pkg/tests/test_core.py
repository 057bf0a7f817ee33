import pytest
from hypothesis import given
from hypothesis import strategies as st

from privpref.core import (CLASSES, MISSING, LabeledDataset, PrivacyChoice, PrivacyRecord, decode_choice,
                           dumps_dataset, encode_choice, format_number, load_dataset, loads_dataset,
                           parse_choice, save_dataset)
from privpref.datagen import default_config, generate
from privpref.errors import ParseError, SchemaMismatch, UnknownChoice

from conftest import A, D, K, make_ds, small_schema


@pytest.mark.parametrize("token,code", [("Allow", 1), ("Deny", 0), ("Ask", -1)])
def test_encode_choice_codes(token, code):
    assert encode_choice(token) == code
    assert decode_choice(code) == token


def test_encode_is_strict_but_parse_canonicalizes():
    with pytest.raises(UnknownChoice):
        encode_choice("allow ")
    assert parse_choice("allow ") is PrivacyChoice.ALLOW
    assert parse_choice("  dENY").code == 0
    with pytest.raises(UnknownChoice):
        parse_choice("Maybe")


@given(st.sampled_from([1, 0, -1]))
def test_code_bijection(code):
    assert encode_choice(decode_choice(code)) == code


def test_class_order_is_allow_deny_ask():
    assert [c.token for c in CLASSES] == ["Allow", "Deny", "Ask"]
    assert [c.index for c in CLASSES] == [0, 1, 2]


def test_number_format():
    assert format_number(3.0) == "3"
    assert format_number(1 / 3) == "0.333333"
    assert format_number(123456.7) == "123457"
    assert "e" not in format_number(0.00123)


def test_small_file_round_trip(tmp_path):
    ds = make_ds(small_schema(), [
        (("social", "camera", 3), A),
        (("finance", MISSING, 0), D),
        (("health", "storage", MISSING), K),
    ])
    path = tmp_path / "d.csv"
    save_dataset(ds, path)
    back = load_dataset(path, ds.schema)
    assert [r.record_id for r in back.records] == [0, 1, 2]
    assert back.records == ds.records
    text = path.read_text()
    assert "NaN" not in text and "finance,,0" in text


def test_empty_dataset_writes_header_only(tmp_path):
    ds = LabeledDataset(small_schema(), ())
    save_dataset(ds, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "record_id,context,permission,prior_denials,persona_id,label\n"


def test_header_without_label_is_schema_mismatch():
    text = "record_id,context,permission,prior_denials\n0,social,camera,1\n"
    with pytest.raises(SchemaMismatch):
        loads_dataset(text, small_schema())


def test_errors_are_located():
    text = "record_id,context,permission,prior_denials,label\n0,social,camera,1,Allow\n1,moon,camera,1,Deny\n"
    with pytest.raises(SchemaMismatch) as info:
        loads_dataset(text, small_schema())
    assert info.value.row is not None and info.value.column == "context"
    bad_num = "record_id,context,permission,prior_denials,label\n0,social,camera,x1,Allow\n"
    with pytest.raises(ParseError):
        loads_dataset(bad_num, small_schema())


def test_out_of_range_numeric_rejected():
    text = "record_id,context,permission,prior_denials,label\n0,social,camera,101,Allow\n"
    with pytest.raises(SchemaMismatch):
        loads_dataset(text, small_schema())


def test_duplicate_record_ids_rejected():
    rec = PrivacyRecord(0, ("social", "camera", 1), A)
    with pytest.raises(SchemaMismatch):
        LabeledDataset(small_schema(), (rec, rec))


def test_generated_round_trip_is_byte_identical(tmp_path):
    ds = generate(default_config().with_(volume=100))
    first = tmp_path / "a.csv"
    save_dataset(ds, first)
    again = load_dataset(first, ds.schema)
    assert again.records == ds.records
    assert dumps_dataset(again) == first.read_text()
    save_dataset(ds, tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_bytes() == first.read_bytes()


def test_persona_id_is_not_a_feature():
    ds = generate(default_config().with_(volume=10))
    assert "persona_id" not in ds.schema.names
    assert all(r.persona_id is not None for r in ds.records)

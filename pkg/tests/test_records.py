"""Wire format: parsing, serialization, and per-file consistency checks."""

import json

import numpy as np
import pytest

from repsearch.errors import ParseError, SchemaError
from repsearch.records import (
    RepresentationRecord,
    TokenRecord,
    load_records,
    parse_record,
    serialize_record,
    write_records,
)


def make_line(**overrides):
    obj = {"id": "d1", "dense": [0.5, -1.25], "logits": {"fox": 1.5}}
    obj.update(overrides)
    return json.dumps(obj)


class TestParse:
    def test_minimal_record(self):
        rec = parse_record('{"id": "d1", "dense": [1.0, 2.0]}')
        assert rec.id == "d1"
        assert rec.dense.dtype == np.float32
        np.testing.assert_array_equal(rec.dense, np.array([1.0, 2.0], dtype=np.float32))
        assert rec.logits == {}
        assert rec.tokens is None

    def test_pair_form_logits(self):
        rec = parse_record(make_line())
        assert rec.logits == {"fox": 1.5}
        assert rec.logit_vector is None

    def test_vector_form_logits(self):
        rec = parse_record(make_line(logits=[0.0, 2.5, -1.0]))
        assert rec.logits == {}
        np.testing.assert_array_equal(
            rec.logit_vector, np.array([0.0, 2.5, -1.0], dtype=np.float32)
        )

    def test_negative_logit_values_are_legal(self):
        rec = parse_record(make_line(logits={"fox": -3.5}))
        assert rec.logits == {"fox": -3.5}

    def test_token_sub_records(self):
        line = make_line(
            tokens=[
                {"token": "j", "dense": [1.0, 0.0], "logits": {"j": 2.0}},
                {"token": "umps", "dense": [0.0, 1.0], "logits": {}},
            ]
        )
        rec = parse_record(line)
        assert [t.token for t in rec.tokens] == ["j", "umps"]
        assert rec.tokens[0].logits == {"j": 2.0}

    def test_unknown_fields_ignored(self):
        rec = parse_record(make_line(extra="whatever", model="m"))
        assert rec.id == "d1"

    def test_invalid_json_is_parse_error_with_line(self):
        with pytest.raises(ParseError) as exc:
            parse_record("{not json", path="f.jsonl", line=3)
        assert "f.jsonl:3" in str(exc.value)

    def test_non_object_rejected(self):
        with pytest.raises(SchemaError):
            parse_record("[1, 2]")

    @pytest.mark.parametrize(
        "line",
        [
            '{"dense": [1.0]}',
            '{"id": "", "dense": [1.0]}',
            '{"id": 7, "dense": [1.0]}',
            '{"id": "d1"}',
            '{"id": "d1", "dense": []}',
            '{"id": "d1", "dense": [1.0, "x"]}',
            '{"id": "d1", "dense": [1.0, NaN]}',
            '{"id": "d1", "dense": [[1.0]]}',
            '{"id": "d1", "dense": [1.0], "logits": {"": 1.0}}',
            '{"id": "d1", "dense": [1.0], "logits": {"t": "x"}}',
            '{"id": "d1", "dense": [1.0], "logits": {"t": Infinity}}',
            '{"id": "d1", "dense": [1.0], "logits": 3}',
            '{"id": "d1", "dense": [1.0], "tokens": []}',
            '{"id": "d1", "dense": [1.0], "tokens": [{"dense": [1.0]}]}',
            '{"id": "d1", "dense": [1.0], "tokens": [{"token": "", "dense": [1.0]}]}',
        ],
    )
    def test_schema_violations(self, line):
        with pytest.raises(SchemaError):
            parse_record(line)


class TestRoundTrip:
    def test_parse_serialize_parse_is_identity(self):
        line = make_line(
            tokens=[{"token": " fox", "dense": [0.25, 0.5], "logits": {"fox": 3.0}}]
        )
        rec = parse_record(line)
        again = parse_record(serialize_record(rec))
        assert again == rec

    def test_vector_form_round_trip(self):
        rec = parse_record(make_line(logits=[1.0, -2.0]))
        assert parse_record(serialize_record(rec)) == rec

    def test_float32_values_survive_the_trip(self):
        # 0.1 is not exact in binary; the float32 value must be reproduced bit for bit.
        rec = RepresentationRecord(id="d", dense=np.array([0.1, 0.3], dtype=np.float32))
        again = parse_record(serialize_record(rec))
        np.testing.assert_array_equal(again.dense, rec.dense)

    def test_unicode_ids_and_tokens(self):
        rec = parse_record('{"id": "δ-1", "dense": [1.0], "logits": {"naïve": 1.0}}')
        assert parse_record(serialize_record(rec)) == rec


class TestLoadRecords:
    def write(self, tmp_path, lines):
        path = tmp_path / "records.jsonl"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    def test_load_and_blank_lines(self, tmp_path):
        path = self.write(tmp_path, [make_line(), "", make_line(id="d2")])
        records = load_records(path)
        assert [r.id for r in records] == ["d1", "d2"]

    def test_duplicate_id_reports_line(self, tmp_path):
        path = self.write(tmp_path, [make_line(), make_line()])
        with pytest.raises(SchemaError) as exc:
            load_records(path)
        assert ":2" in str(exc.value)

    def test_dimension_mismatch_rejected(self, tmp_path):
        path = self.write(tmp_path, [make_line(), make_line(id="d2", dense=[1.0])])
        with pytest.raises(SchemaError):
            load_records(path)

    def test_token_dimension_must_match(self, tmp_path):
        bad = make_line(
            id="d2", tokens=[{"token": "x", "dense": [1.0], "logits": {}}]
        )
        path = self.write(tmp_path, [make_line(), bad])
        with pytest.raises(SchemaError):
            load_records(path)

    def test_logit_vector_lengths_must_agree(self, tmp_path):
        path = self.write(
            tmp_path,
            [make_line(logits=[1.0, 2.0]), make_line(id="d2", logits=[1.0, 2.0, 3.0])],
        )
        with pytest.raises(SchemaError):
            load_records(path)

    def test_write_then_load(self, tmp_path):
        records = [
            parse_record(make_line()),
            parse_record(make_line(id="d2", logits={})),
        ]
        path = str(tmp_path / "out.jsonl")
        write_records(records, path)
        assert load_records(path) == records


class TestTokenRecordEquality:
    def test_differs_on_vector(self):
        a = TokenRecord("t", np.array([1.0], dtype=np.float32))
        b = TokenRecord("t", np.array([2.0], dtype=np.float32))
        assert a != b
        assert a == TokenRecord("t", np.array([1.0], dtype=np.float32))

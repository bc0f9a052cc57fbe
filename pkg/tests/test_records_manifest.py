import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from humancorpus.attributes import ATTRIBUTE_NAMES
from humancorpus.manifest import (
    ManifestError, read_manifest, write_manifest,
)
from humancorpus.records import (
    AttributeLabel, FaceDetection, SampleRecord, SchemaError, Status,
    StatusError, record_from_dict, record_to_dict,
)

from .conftest import make_record


class TestTypes:
    def test_label_validates_probability(self):
        AttributeLabel(name="Male", p=0.0)
        AttributeLabel(name="Male", p=1.0)
        with pytest.raises(SchemaError, match="'p'"):
            AttributeLabel(name="Male", p=1.5)
        with pytest.raises(SchemaError, match="'p'"):
            AttributeLabel(name="Male", p=-0.1)

    def test_face_validates_geometry(self):
        with pytest.raises(SchemaError):
            FaceDetection(bbox=(0, 0, 0, 10), conf=0.9)
        with pytest.raises(SchemaError):
            FaceDetection(bbox=(-1, 0, 5, 10), conf=0.9)
        with pytest.raises(SchemaError):
            FaceDetection(bbox=(0, 0, 5, 10), conf=1.2)

    def test_record_needs_id(self):
        with pytest.raises(SchemaError, match="'id'"):
            SampleRecord(id="")

    def test_face_must_fit_image_when_dims_known(self):
        with pytest.raises(SchemaError, match="bounds"):
            make_record(faces=((900, 10, 200, 200, 0.99),),
                        width=1000, height=800)
        make_record(faces=((900, 10, 200, 200, 0.99),))  # dims unknown: ok


class TestStatus:
    def test_forward_transitions_allowed(self):
        rec = make_record()
        rec = rec.advanced(Status.FACE_PASS)
        rec = rec.advanced(Status.ATTR_PASS)
        rec = rec.advanced(Status.MERGED)  # skipping states is fine
        assert rec.status is Status.MERGED

    def test_backward_transition_raises(self):
        rec = make_record().advanced(Status.MERGED)
        with pytest.raises(StatusError):
            rec.advanced(Status.RAW)

    def test_rejected_is_terminal(self):
        rec = make_record().rejected("face_too_small")
        assert rec.status is Status.REJECTED
        with pytest.raises(StatusError):
            rec.advanced(Status.CLEANED)

    def test_unknown_reason_rejected(self):
        with pytest.raises(SchemaError):
            make_record().rejected("bogus_reason")


class TestManifestIO:
    def test_example_line_maps_to_record(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id":"a","image":"a.jpg",'
                        '"attrs":[{"name":"Male","p":0.99}]}\n')
        (rec,) = read_manifest(path)
        assert rec.id == "a" and rec.image == "a.jpg"
        assert rec.attrs == (AttributeLabel(name="Male", p=0.99),)

    def test_schema_error_names_field_and_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id":"a","image":"a.jpg"}\n'
                        '{"id":"b","attrs":[{"name":"Male","p":1.5}]}\n')
        with pytest.raises(ManifestError, match=r"line 2.*'p'"):
            read_manifest(path)

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id":"a"}\nnot json\n')
        with pytest.raises(ManifestError, match="line 2"):
            read_manifest(path)

    def test_empty_file_is_empty_stream(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("")
        assert read_manifest(path) == []

    def test_write_count_and_duplicate_id(self, tmp_path):
        path = tmp_path / "m.jsonl"
        records = [make_record(rid=f"r{i}") for i in range(3)]
        assert write_manifest(records, path) == 3
        assert len(path.read_text().splitlines()) == 3
        with pytest.raises(ManifestError, match="'a'"):
            write_manifest([make_record(rid="a"), make_record(rid="a")],
                           tmp_path / "dup.jsonl")

    def test_roundtrip_identity(self, tmp_path):
        records = [
            make_record(rid="r1", caption="Ünïcode café ✓",
                        source_text="weird\ttabs"),
            make_record(rid="r2", attr_ps=(0.86, 0.99)).advanced(Status.ATTR_PASS),
            make_record(rid="r3").rejected("refusal"),
        ]
        path = tmp_path / "m.jsonl"
        write_manifest(records, path)
        assert read_manifest(path) == records

    def test_unknown_fields_preserved_verbatim(self, tmp_path):
        path = tmp_path / "m.jsonl"
        line = ('{"id":"a","image":"x.jpg","annotator":{"model":"v2","run":3},'
                '"score":1.25}')
        path.write_text(line + "\n")
        (rec,) = read_manifest(path)
        assert rec.extra == {"annotator": {"model": "v2", "run": 3},
                             "score": 1.25}
        out = tmp_path / "out.jsonl"
        write_manifest([rec], out)
        assert json.loads(out.read_text())["annotator"] == {"model": "v2",
                                                            "run": 3}


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_roundtrip_property(data):
    names = data.draw(st.lists(st.sampled_from(ATTRIBUTE_NAMES), max_size=6,
                               unique=True))
    ps = [data.draw(st.floats(0, 1, allow_nan=False)) for _ in names]
    rec = SampleRecord(
        id=data.draw(st.text(min_size=1, max_size=10)),
        image=data.draw(st.text(max_size=10)),
        attrs=tuple(AttributeLabel(name=n, p=p) for n, p in zip(names, ps)),
        caption=data.draw(st.text(max_size=40)),
        extra={"k": data.draw(st.integers())},
    )
    assert record_from_dict(record_to_dict(rec)) == rec

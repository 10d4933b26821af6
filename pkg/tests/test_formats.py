import io

import pytest
from hypothesis import given, strategies as st

from kbforge.core.formats import (
    FORMAT_HEADER,
    FormatError,
    parse_benchmark,
    parse_provenance,
    parse_relation_specs,
    provenance_line,
    read_provenance,
    serialize_benchmark,
    serialize_relation_specs,
    write_benchmark,
)
from kbforge.core.types import EntityRef, RelationSpec

from .conftest import make_record


def roundtrip(records):
    return parse_benchmark(io.StringIO(serialize_benchmark(records)))


FIXTURE_RECORDS = [
    make_record("Q937", "Albert Einstein", "P103", [("Q188", "German")]),
    make_record(
        "Q7251", "Alan Turing", "P1412",
        [("Q1860", "English"), ("Q188", "German")],
    ),
    make_record("Q142", "France", "P36", [("Q90", "Paris")]),
]


class TestBenchmarkRoundTrip:
    def test_empty(self):
        serialized = serialize_benchmark([])
        assert parse_benchmark(io.StringIO(serialized)) == []
        # header only, no record lines
        assert serialized.strip() == FORMAT_HEADER

    def test_single_record(self):
        rec = make_record("Q937", "Albert Einstein", "P103", [("Q188", "German")])
        assert roundtrip([rec]) == [rec]

    def test_three_record_fixture(self):
        parsed = roundtrip(FIXTURE_RECORDS)
        assert parsed == FIXTURE_RECORDS
        assert len(parsed[1].valid_objects) == 2

    def test_unicode_labels_kept_verbatim(self):
        rec = make_record("Q64", "Berlin", "P36", [("Q64", "Überlingen läßt grüßen")])
        assert roundtrip([rec]) == [rec]

    @given(
        st.lists(
            st.tuples(
                st.integers(1, 10_000),
                st.text(min_size=1).filter(lambda s: s.strip()),
                st.integers(1, 500),
                st.lists(
                    st.tuples(
                        st.integers(1, 10_000),
                        st.text(min_size=1).filter(lambda s: s.strip()),
                    ),
                    min_size=1,
                    max_size=4,
                    unique_by=lambda t: t[0],
                ),
            ),
            max_size=20,
            unique_by=lambda t: (t[0], t[2]),
        )
    )
    def test_roundtrip_identity_property(self, raw):
        records = [
            make_record(
                f"Q{sub}", label, f"P{rel}", [(f"Q{oid}", olabel) for oid, olabel in objs]
            )
            for sub, label, rel, objs in raw
        ]
        assert roundtrip(records) == records


class TestBenchmarkParseErrors:
    def test_malformed_line_reports_number(self):
        content = FORMAT_HEADER + '\n{"subject_id": "Q1"\n'
        with pytest.raises(FormatError, match="line 2"):
            parse_benchmark(io.StringIO(content))

    def test_missing_header(self):
        with pytest.raises(FormatError, match="header"):
            parse_benchmark(io.StringIO('{"subject_id": "Q1"}\n'))

    def test_duplicate_pair(self):
        line = serialize_benchmark(
            [make_record("Q1", "A", "P1", [("Q2", "B")])]
        ).splitlines()[1]
        content = FORMAT_HEADER + "\n" + line + "\n" + line + "\n"
        with pytest.raises(FormatError, match="duplicate"):
            parse_benchmark(io.StringIO(content))

    def test_missing_field(self):
        content = FORMAT_HEADER + '\n{"subject_id": "Q1", "objects": []}\n'
        with pytest.raises(FormatError, match="line 2"):
            parse_benchmark(io.StringIO(content))


class TestRelationSpecFile:
    SPECS = [
        RelationSpec("P103", "nativeLanguage", "The native language of [X] is [Y] ."),
        RelationSpec(
            "P36",
            "hasCapital",
            "The capital of [X] is [Y] .",
            subject_type=EntityRef("Q6256", "country"),
            dictionary_id="countries",
        ),
    ]

    def test_roundtrip(self):
        parsed = parse_relation_specs(io.StringIO(serialize_relation_specs(self.SPECS)))
        assert parsed == self.SPECS

    def test_duplicate_pid(self):
        spec = RelationSpec("P1", "a", "[X] [Y]")
        text = serialize_relation_specs([spec, spec])
        with pytest.raises(FormatError, match="duplicate relation"):
            parse_relation_specs(io.StringIO(text))


class TestProvenance:
    def test_roundtrip_line(self):
        line = provenance_line("abcd1234", 7)
        assert parse_provenance(line) == {"config": "abcd1234", "seed": 7}

    def test_read_from_file(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_benchmark(FIXTURE_RECORDS, path, {"config": "ff00", "seed": 3})
        assert read_provenance(path) == {"config": "ff00", "seed": 3}
        assert parse_benchmark(open(path, encoding="utf-8")) == FIXTURE_RECORDS

    def test_absent(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        write_benchmark(FIXTURE_RECORDS, path)
        assert read_provenance(path) is None

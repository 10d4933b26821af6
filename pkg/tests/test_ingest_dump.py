import pytest

from kbforge.ingest.dump import (
    SkipReport,
    entity_from_document,
    extract_triples,
    open_dump,
    stream_entities,
)

from .dumpgen import (
    dump_lines,
    entity_doc,
    entity_statement,
    literal_statement,
    novalue_statement,
    write_dump,
)


def consume(lines):
    report = SkipReport()
    entities = list(stream_entities(lines, report))
    return entities, report


class TestStreamEntities:
    def test_empty_array(self):
        entities, report = consume(["[\n", "]\n"])
        assert entities == []
        assert report.entities_parsed == 0
        assert report.parse_errors == 0

    def test_three_lines_one_corrupted(self):
        lines = dump_lines(
            [entity_doc("Q1", "one"), entity_doc("Q2", "two")],
            raw_lines=['{"id": "Q3", "labels": {broken'],
        )
        entities, report = consume(lines)
        assert [e.id for e in entities] == ["Q1", "Q2"]
        assert report.entities_parsed == 3
        assert report.parse_errors == 1

    def test_parsed_equals_emitted_plus_errors(self):
        lines = dump_lines(
            [entity_doc("Q1", "one")],
            raw_lines=["not json", '{"no_id": true}'],
        )
        entities, report = consume(lines)
        assert report.entities_parsed == len(entities) + report.parse_errors

    def test_trailing_commas_and_last_line_without(self):
        entities, report = consume(dump_lines([entity_doc(f"Q{i}") for i in (1, 2, 3)]))
        assert [e.id for e in entities] == ["Q1", "Q2", "Q3"]
        assert report.parse_errors == 0

    def test_labels_parsed(self):
        doc = entity_doc("Q937", "Albert Einstein", labels={"de": "Albert Einstein"})
        (entity,), _ = consume(dump_lines([doc]))
        assert entity.label() == "Albert Einstein"
        assert entity.labels["de"] == "Albert Einstein"

    def test_missing_label_is_none(self):
        (entity,), _ = consume(dump_lines([entity_doc("Q99")]))
        assert entity.label() is None

    def test_bad_id_counts_as_parse_error(self):
        _, report = consume(dump_lines([{"id": "banana", "labels": {}}]))
        assert report.parse_errors == 1


class TestEntityFromDocument:
    def test_claims_reduced_to_statements(self):
        doc = entity_doc(
            "Q937",
            "Albert Einstein",
            claims={
                "P103": [
                    entity_statement("P103", "Q188"),
                    literal_statement("P103"),
                    novalue_statement("P103"),
                ]
            },
        )
        entity = entity_from_document(doc)
        statements = entity.claims["P103"]
        assert [s.object_id for s in statements] == ["Q188", None, None]
        assert all(s.rank == "normal" for s in statements)

    def test_holds_ignores_deprecated_only(self):
        entity = entity_from_document(
            entity_doc(
                "Q1", "s", claims={"P103": [entity_statement("P103", "Q188", "deprecated")]}
            )
        )
        assert not entity.holds("P103")

    def test_holds_counts_literal_statements(self):
        entity = entity_from_document(
            entity_doc("Q1", "s", claims={"P569": [literal_statement("P569")]})
        )
        assert entity.holds("P569")

    def test_instance_classes(self):
        entity = entity_from_document(
            entity_doc(
                "Q1",
                "s",
                claims={
                    "P31": [
                        entity_statement("P31", "Q5"),
                        entity_statement("P31", "Q215627", "deprecated"),
                    ]
                },
            )
        )
        assert entity.instance_classes() == ("Q5",)


class TestExtractTriples:
    def test_no_claims(self):
        entity = entity_from_document(entity_doc("Q1", "s"))
        assert extract_triples(entity, {"P103"}) == []

    def test_normal_statement_extracted(self):
        entity = entity_from_document(
            entity_doc("Q937", "Albert Einstein", claims={"P103": [entity_statement("P103", "Q188")]})
        )
        (triple,) = extract_triples(entity, {"P103"})
        assert triple.subject.id == "Q937"
        assert triple.subject.label == "Albert Einstein"
        assert triple.relation == "P103"
        assert triple.object.id == "Q188"

    def test_deprecated_statement_dropped_and_counted(self):
        entity = entity_from_document(
            entity_doc(
                "Q937",
                "Albert Einstein",
                claims={
                    "P103": [
                        entity_statement("P103", "Q188", "deprecated"),
                        entity_statement("P103", "Q1860"),
                    ]
                },
            )
        )
        report = SkipReport()
        triples = extract_triples(entity, {"P103"}, report)
        assert [t.object.id for t in triples] == ["Q1860"]
        assert report.statements_deprecated == 1

    def test_deprecated_only_yields_nothing(self):
        entity = entity_from_document(
            entity_doc("Q1", "s", claims={"P103": [entity_statement("P103", "Q188", "deprecated")]})
        )
        assert extract_triples(entity, {"P103"}) == []

    def test_literal_and_novalue_counted_as_nonentity(self):
        entity = entity_from_document(
            entity_doc(
                "Q1",
                "s",
                claims={"P103": [literal_statement("P103"), novalue_statement("P103")]},
            )
        )
        report = SkipReport()
        assert extract_triples(entity, {"P103"}, report) == []
        assert report.statements_nonentity == 2

    def test_only_requested_relations(self):
        entity = entity_from_document(
            entity_doc(
                "Q1",
                "s",
                claims={
                    "P103": [entity_statement("P103", "Q188")],
                    "P27": [entity_statement("P27", "Q183")],
                },
            )
        )
        triples = extract_triples(entity, {"P103"})
        assert [t.relation for t in triples] == ["P103"]

    def test_property_documents_skipped(self):
        entity = entity_from_document(
            entity_doc("P31", "instance of", claims={"P103": [entity_statement("P103", "Q188")]})
        )
        assert extract_triples(entity, {"P103"}) == []


class TestOpenDump:
    @pytest.mark.parametrize("compression", [None, "gzip", "bzip2"])
    def test_reads_all_encodings(self, tmp_path, compression):
        path = write_dump(
            tmp_path / "dump.json", [entity_doc("Q1", "naïve ünïcode")], compression
        )
        with open_dump(path) as fp:
            entities, report = consume(fp)
        assert entities[0].label() == "naïve ünïcode"
        assert report.parse_errors == 0


class TestSkipReport:
    def test_merge_adds_counters(self):
        a = SkipReport(entities_parsed=2, parse_errors=1)
        b = SkipReport(entities_parsed=3, missing_labels=4)
        a.merge(b)
        assert a.entities_parsed == 5
        assert a.parse_errors == 1
        assert a.missing_labels == 4

    def test_as_dict_lists_every_counter(self):
        assert set(SkipReport().as_dict()) == {
            "entities_parsed",
            "parse_errors",
            "missing_labels",
            "statements_deprecated",
            "statements_nonentity",
        }

from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgqa.answers import AnswerKind, AnswerSet, XSD, normalize_value
from kgqa.errors import MalformedTerm


def lit(value, datatype=None, lang=None):
    term = {"type": "literal", "value": value}
    if datatype:
        term["datatype"] = datatype
    if lang:
        term["xml:lang"] = lang
    return term


class TestNormalizeValue:
    def test_numeric_datatypes_compare_by_value(self):
        a = normalize_value(lit("42", XSD + "integer"))
        b = normalize_value(lit("42.0", XSD + "decimal"))
        assert a == b
        assert hash(a) == hash(b)

    def test_plain_vs_xsd_string_equal(self):
        assert normalize_value(lit("Berlin")) == normalize_value(
            lit("Berlin", XSD + "string")
        )

    def test_iri_identity(self):
        term = {"type": "uri", "value": "http://www.wikidata.org/entity/Q5"}
        assert normalize_value(term) == ("iri", "http://www.wikidata.org/entity/Q5")

    def test_https_wikidata_folds_to_http(self):
        term = {"type": "uri", "value": "https://www.wikidata.org/entity/Q5"}
        assert normalize_value(term)[1].startswith("http://")

    def test_language_tags_lowercased(self):
        assert normalize_value(lit("x", lang="EN")) == ("str", "x", "en")

    def test_lexical_form_trimmed(self):
        assert normalize_value(lit(" x ")) == ("str", "x", "")

    def test_boolean_literal(self):
        assert normalize_value(lit("true", XSD + "boolean")) == ("bool", True)

    def test_other_datatypes_pass_through(self):
        value = normalize_value(lit("2001-01-05", XSD + "date"))
        assert value == ("lit", "2001-01-05", XSD + "date")

    def test_malformed_term_rejected(self):
        with pytest.raises(MalformedTerm):
            normalize_value({"value": "x"})
        with pytest.raises(MalformedTerm):
            normalize_value({"type": "literal"})
        with pytest.raises(MalformedTerm):
            normalize_value({"type": "wat", "value": "x"})

    @given(
        st.decimals(allow_nan=False, allow_infinity=False, places=3),
        st.sampled_from(["integer", "decimal", "double", "float"]),
    )
    def test_canonical_decimal_oracle(self, number, datatype):
        # Independent canonicalization: parse with Decimal directly.
        lexical = str(number)
        value = normalize_value(lit(lexical, XSD + datatype))
        if value[0] == "num":
            assert value[1] == Decimal(lexical)


class TestAnswerSet:
    def test_boolean_shape(self):
        answers = AnswerSet.from_boolean(False)
        assert answers.kind is AnswerKind.BOOLEAN
        assert not answers.is_empty
        assert answers.value_tuples() == frozenset({(("bool", False),)})

    def test_zero_rows_normalizes_to_empty(self):
        answers = AnswerSet.from_rows(["x"], [])
        assert answers.kind is AnswerKind.EMPTY
        assert answers.is_empty

    def test_arity_enforced(self):
        with pytest.raises(ValueError):
            AnswerSet(
                kind=AnswerKind.BINDINGS,
                variables=("a", "b"),
                rows=frozenset({(("iri", "x"),)}),
            )

    def test_results_json_round_trip(self):
        doc = {
            "head": {"vars": ["a", "b"]},
            "results": {
                "bindings": [
                    {
                        "a": {"type": "uri", "value": "http://x/1"},
                        "b": lit("42", XSD + "integer"),
                    },
                    {
                        "a": {"type": "uri", "value": "http://x/2"},
                        "b": lit("hello", lang="en"),
                    },
                ]
            },
        }
        answers = AnswerSet.from_results_json(doc)
        again = AnswerSet.from_results_json(answers.to_results_json())
        assert answers == again

    def test_boolean_round_trip(self):
        answers = AnswerSet.from_results_json({"head": {}, "boolean": True})
        assert answers == AnswerSet.from_results_json(answers.to_results_json())

    def test_rows_are_order_insensitive(self):
        rows1 = [(("iri", "a"),), (("iri", "b"),)]
        rows2 = [(("iri", "b"),), (("iri", "a"),)]
        assert AnswerSet.from_rows(["x"], rows1) == AnswerSet.from_rows(["x"], rows2)

    def test_missing_sections_rejected(self):
        with pytest.raises(MalformedTerm):
            AnswerSet.from_results_json({"results": {}})

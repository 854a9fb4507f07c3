"""Normalized answer sets comparable across gold data and endpoint results.

Values are canonicalized into plain hashable tuples so that row comparison
is a set operation:

    ("iri", <iri>)                IRIs, https:// Wikidata hosts folded to http://
    ("num", Decimal)              all numeric datatypes, canonical decimal value
    ("str", lexical, lang)        plain literals, xsd:string, language-tagged
    ("bool", True|False)          xsd:boolean literals and ASK results
    ("lit", lexical, datatype)    every other datatype, lexical form trimmed
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from kgqa.errors import MalformedTerm

XSD = "http://www.w3.org/2001/XMLSchema#"

NUMERIC_DATATYPES = frozenset(
    XSD + name
    for name in (
        "integer", "decimal", "double", "float", "long", "int", "short",
        "byte", "nonNegativeInteger", "nonPositiveInteger", "negativeInteger",
        "positiveInteger", "unsignedLong", "unsignedInt", "unsignedShort",
        "unsignedByte",
    )
)

_WIKIDATA_HTTPS = "https://www.wikidata.org/"
_WIKIDATA_HTTP = "http://www.wikidata.org/"


class AnswerKind(enum.Enum):
    BINDINGS = "bindings"
    BOOLEAN = "boolean"
    EMPTY = "empty"


def normalize_iri(iri: str) -> str:
    if iri.startswith(_WIKIDATA_HTTPS):
        return _WIKIDATA_HTTP + iri[len(_WIKIDATA_HTTPS):]
    return iri


def _canonical_number(lexical: str):
    try:
        value = Decimal(lexical.strip())
    except InvalidOperation:
        return None
    if value.is_nan():
        # Decimal NaN is unhashable; keep a distinct marker.
        return ("lit", "NaN", XSD + "double")
    return ("num", value)


def normalize_value(term: dict):
    """Canonicalize one SPARQL-results-JSON term into a comparison tuple."""
    if not isinstance(term, dict) or "type" not in term or "value" not in term:
        raise MalformedTerm(f"not a results-JSON term: {term!r}")
    ttype = term["type"]
    value = term["value"]
    if not isinstance(value, str):
        raise MalformedTerm(f"term value must be a string: {term!r}")
    if ttype == "uri":
        return ("iri", normalize_iri(value))
    if ttype == "bnode":
        return ("lit", value, "bnode")
    if ttype in ("literal", "typed-literal"):
        lexical = value.strip()
        datatype = term.get("datatype")
        lang = term.get("xml:lang")
        if lang:
            return ("str", lexical, lang.lower())
        if datatype in (None, XSD + "string"):
            return ("str", lexical, "")
        if datatype == XSD + "boolean":
            return ("bool", lexical.strip().lower() in ("true", "1"))
        if datatype in NUMERIC_DATATYPES:
            number = _canonical_number(lexical)
            if number is not None:
                return number
        return ("lit", lexical, datatype)
    raise MalformedTerm(f"unknown term type {ttype!r}")


def _term_to_json(value) -> dict:
    tag = value[0]
    if tag == "iri":
        return {"type": "uri", "value": value[1]}
    if tag == "num":
        dec = value[1]
        lexical = str(dec)
        if dec == dec.to_integral_value():
            lexical = str(int(dec))
            return {"type": "literal", "datatype": XSD + "integer", "value": lexical}
        return {"type": "literal", "datatype": XSD + "decimal", "value": lexical}
    if tag == "str":
        _, lexical, lang = value
        if lang:
            return {"type": "literal", "xml:lang": lang, "value": lexical}
        return {"type": "literal", "value": lexical}
    if tag == "bool":
        return {
            "type": "literal",
            "datatype": XSD + "boolean",
            "value": "true" if value[1] else "false",
        }
    _, lexical, datatype = value
    return {"type": "literal", "datatype": datatype, "value": lexical}


@dataclass(frozen=True)
class AnswerSet:
    """Endpoint results in normalized, order-insensitive form."""

    kind: AnswerKind
    variables: tuple = ()
    rows: frozenset = field(default_factory=frozenset)
    boolean: bool | None = None

    def __post_init__(self):
        if self.kind is AnswerKind.BOOLEAN:
            if self.boolean is None or self.rows:
                raise ValueError("BOOLEAN answer needs a boolean and no rows")
        elif self.kind is AnswerKind.EMPTY:
            if self.rows:
                raise ValueError("EMPTY answer cannot carry rows")
        else:
            arity = len(self.variables)
            if any(len(row) != arity for row in self.rows):
                raise ValueError("row arity must match the variable list")

    @property
    def is_empty(self) -> bool:
        if self.kind is AnswerKind.BOOLEAN:
            return False
        return not self.rows

    def value_tuples(self) -> frozenset:
        """Rows as a comparable set; booleans become a single 1-tuple."""
        if self.kind is AnswerKind.BOOLEAN:
            return frozenset({(("bool", self.boolean),)})
        return self.rows

    @classmethod
    def empty(cls) -> "AnswerSet":
        return cls(kind=AnswerKind.EMPTY)

    @classmethod
    def from_boolean(cls, value: bool) -> "AnswerSet":
        return cls(kind=AnswerKind.BOOLEAN, boolean=bool(value))

    @classmethod
    def from_rows(cls, variables, rows) -> "AnswerSet":
        rows = frozenset(tuple(row) for row in rows)
        if not rows:
            return cls.empty()
        return cls(kind=AnswerKind.BINDINGS, variables=tuple(variables), rows=rows)

    @classmethod
    def from_results_json(cls, doc: dict, context: str = "answers") -> "AnswerSet":
        """Parse one W3C SPARQL-Results-JSON document."""
        if not isinstance(doc, dict):
            raise MalformedTerm(f"{context}: results document must be an object")
        if "boolean" in doc:
            return cls.from_boolean(bool(doc["boolean"]))
        try:
            variables = list(doc["head"]["vars"])
            bindings = doc["results"]["bindings"]
        except (KeyError, TypeError) as exc:
            raise MalformedTerm(f"{context}: missing head/results section") from exc
        rows = []
        for binding in bindings:
            row = tuple(
                normalize_value(binding[var]) for var in variables if var in binding
            )
            # Unbound variables are dropped from the tuple; pad to full arity
            # only when every variable is bound so that OPTIONAL gaps stay
            # visible instead of misaligning columns.
            if len(row) != len(variables):
                row = tuple(
                    normalize_value(binding[var]) if var in binding else ("str", "", "")
                    for var in variables
                )
            rows.append(row)
        return cls.from_rows(variables, rows)

    def to_results_json(self) -> dict:
        """Inverse of :meth:`from_results_json`, deterministic row order."""
        if self.kind is AnswerKind.BOOLEAN:
            return {"head": {}, "boolean": self.boolean}
        variables = list(self.variables)
        if self.kind is AnswerKind.EMPTY:
            return {"head": {"vars": variables}, "results": {"bindings": []}}
        bindings = [
            {var: _term_to_json(value) for var, value in zip(variables, row)}
            for row in sorted(self.rows, key=repr)
        ]
        return {"head": {"vars": variables}, "results": {"bindings": bindings}}

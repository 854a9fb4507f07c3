"""SPARQL surface canonicalization.

Raw queries are turned into a model-facing canonical form (prefix
declarations stripped, IRIs contracted to prefixed names, ``?``/``{``/``}``
replaced by plain-word placeholders, whitespace collapsed) and predicted
canonical strings are inverted back into executable SPARQL.

The lexer here is a surface lexer: it recognizes IRIs, prefixed names,
variables, string literals (with language tags and datatypes), numbers,
bare words and punctuation. It does not validate the SPARQL grammar;
that is left to the endpoint.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from kgqa.errors import CollisionError, LexError

VAR_PREFIX = "var_"
BRACK_OPEN = "brack_open"
BRACK_CLOSE = "brack_close"

_RESERVED_WORD = re.compile(r"var_\w*\Z")


class TokKind(enum.Enum):
    IRI = "iri"
    PNAME = "pname"
    VAR = "var"
    LITERAL = "literal"
    NUMBER = "number"
    WORD = "word"
    BLANK = "blank"
    PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    kind: TokKind
    text: str
    # IRI: full IRI without angle brackets. PNAME: (label, local).
    # VAR: bare variable name. LITERAL: (quoted body, langtag, datatype IRI
    # or prefixed text or None).
    value: object = None

    def render(self) -> str:
        return self.text


_IRIREF = re.compile(r'<([^<>"{}|^`\\\x00-\x20]*)>')
_VARNAME = re.compile(r"[\w\d]+", re.UNICODE)
_NUMBER = re.compile(
    r"(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+"
    r"|\d*\.\d+|\d+)"
)
_LANGTAG = re.compile(r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_BLANK = re.compile(r"_:[\w\d][\w\d.-]*", re.UNICODE)
_PNAME = re.compile(
    r"(?P<label>[^\W\d_][\w.-]*)?:(?P<local>[\w:%\\.-]*)", re.UNICODE
)
_WORD = re.compile(r"[^\W\d][\w]*", re.UNICODE)
_PUNCT_MULTI = ("^^", "!=", "<=", ">=", "&&", "||")
_PUNCT_SINGLE = set("{}()[].,;=<>!+-*/|^?@&")

# Local names safe to materialize in a prefixed name. Conservative subset
# of PN_LOCAL: no dots at either end, no percent escapes, no colon.
_SAFE_LOCAL = re.compile(r"[\w-](?:[\w.-]*[\w-])?\Z", re.UNICODE)


def _scan_string(text: str, pos: int) -> int:
    """Return the index just past the string literal starting at pos."""
    for quote in ('"""', "'''"):
        if text.startswith(quote, pos):
            end = text.find(quote, pos + 3)
            while end != -1 and text[end - 1] == "\\":
                end = text.find(quote, end + 1)
            if end == -1:
                raise LexError(f"unterminated long string at offset {pos}")
            return end + 3
    quote = text[pos]
    i = pos + 1
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch == "\n":
            break
        i += 1
    raise LexError(f"unterminated string at offset {pos}")


def tokenize(query: str) -> list[Token]:
    """Lex a query into surface tokens; raises LexError on bad input."""
    tokens: list[Token] = []
    pos = 0
    n = len(query)
    while pos < n:
        ch = query[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch == "#":
            eol = query.find("\n", pos)
            pos = n if eol == -1 else eol + 1
            continue
        if ch == "<":
            m = _IRIREF.match(query, pos)
            if m:
                tokens.append(Token(TokKind.IRI, m.group(0), m.group(1)))
                pos = m.end()
                continue
            # "<" directly followed by a letter reads as an IRI opener, not
            # a comparison; failing to close it is a lexing fault.
            if pos + 1 < n and query[pos + 1].isalpha():
                raise LexError(f"unterminated IRI at offset {pos}")
            if query.startswith("<=", pos):
                tokens.append(Token(TokKind.PUNCT, "<="))
                pos += 2
            else:
                tokens.append(Token(TokKind.PUNCT, "<"))
                pos += 1
            continue
        if ch in "\"'":
            end = _scan_string(query, pos)
            body = query[pos:end]
            lang = None
            dtype = None
            m = _LANGTAG.match(query, end)
            if m:
                lang = m.group(0)
                end = m.end()
            elif query.startswith("^^", end):
                dstart = end + 2
                m = _IRIREF.match(query, dstart)
                if m:
                    dtype = Token(TokKind.IRI, m.group(0), m.group(1))
                    end = m.end()
                else:
                    m = _PNAME.match(query, dstart)
                    if m:
                        dtype = _pname_token(m)
                        end = dstart + len(dtype.text)
            text = body + (lang or "") + (f"^^{dtype.text}" if dtype else "")
            tokens.append(Token(TokKind.LITERAL, text, (body, lang, dtype)))
            pos = end
            continue
        if ch in "?$":
            m = _VARNAME.match(query, pos + 1)
            if m:
                tokens.append(Token(TokKind.VAR, "?" + m.group(0), m.group(0)))
                pos = m.end()
            else:
                tokens.append(Token(TokKind.PUNCT, "?"))
                pos += 1
            continue
        if ch.isdigit() or (ch == "." and pos + 1 < n and query[pos + 1].isdigit()):
            m = _NUMBER.match(query, pos)
            tokens.append(Token(TokKind.NUMBER, m.group(0)))
            pos = m.end()
            continue
        if ch == "_" and query.startswith("_:", pos):
            m = _BLANK.match(query, pos)
            if m:
                tokens.append(Token(TokKind.BLANK, m.group(0)))
                pos = m.end()
                continue
        m = _PNAME.match(query, pos)
        if m and (m.group("label") or query[pos] == ":"):
            token = _pname_token(m)
            tokens.append(token)
            pos += len(token.text)
            continue
        m = _WORD.match(query, pos)
        if m:
            tokens.append(Token(TokKind.WORD, m.group(0)))
            pos = m.end()
            continue
        multi = next((p for p in _PUNCT_MULTI if query.startswith(p, pos)), None)
        if multi:
            tokens.append(Token(TokKind.PUNCT, multi))
            pos += len(multi)
            continue
        if ch in _PUNCT_SINGLE:
            tokens.append(Token(TokKind.PUNCT, ch))
            pos += 1
            continue
        raise LexError(f"unexpected character {ch!r} at offset {pos}")
    return tokens


def _pname_token(m: re.Match) -> Token:
    label = m.group("label") or ""
    local = m.group("local") or ""
    # A trailing dot belongs to the surrounding triple pattern, not the name.
    while local.endswith(".") and not local.endswith("\\."):
        local = local[:-1]
    text = f"{label}:{local}"
    return Token(TokKind.PNAME, text, (label, local))


def render(tokens: list[Token]) -> str:
    return " ".join(t.render() for t in tokens)


class PrefixTable:
    """Ordered prefix-label/namespace mapping, longest namespace first.

    A label may carry alias namespaces (e.g. the https:// spelling of a
    Wikidata host); aliases participate in contraction, while declarations
    are emitted for the primary namespace only.
    """

    def __init__(self, entries):
        self._primary: dict[str, str] = {}
        self._match: list[tuple[str, str]] = []  # (namespace, label)
        seen_ns = set()
        for label, namespace in entries:
            if namespace in seen_ns:
                raise ValueError(f"duplicate namespace {namespace!r}")
            seen_ns.add(namespace)
            if label not in self._primary:
                self._primary[label] = namespace
            self._match.append((namespace, label))
        self._match.sort(key=lambda e: len(e[0]), reverse=True)

    def __contains__(self, label: str) -> bool:
        return label in self._primary

    def __len__(self) -> int:
        return len(self._primary)

    def namespace(self, label: str) -> str:
        return self._primary[label]

    def labels(self):
        return list(self._primary)

    def match(self, iri: str):
        """Longest (namespace, label) entry that prefixes iri, or None."""
        for namespace, label in self._match:
            if iri.startswith(namespace) and len(iri) > len(namespace):
                return namespace, label
        return None

    def merged_with(self, declared: dict[str, str]) -> "PrefixTable":
        """Table extended by per-query PREFIX declarations (query wins)."""
        if not declared:
            return self
        entries = []
        for label, ns in declared.items():
            entries.append((label, ns))
        for ns, label in self._match:
            if ns not in {n for _, n in entries}:
                entries.append((label, ns))
        return PrefixTable(entries)


WIKIDATA_PREFIXES = [
    ("wd", "http://www.wikidata.org/entity/"),
    ("wdt", "http://www.wikidata.org/prop/direct/"),
    ("p", "http://www.wikidata.org/prop/"),
    ("ps", "http://www.wikidata.org/prop/statement/"),
    ("pq", "http://www.wikidata.org/prop/qualifier/"),
    ("psn", "http://www.wikidata.org/prop/statement/value-normalized/"),
    ("pqn", "http://www.wikidata.org/prop/qualifier/value-normalized/"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("schema", "http://schema.org/"),
    ("wikibase", "http://wikiba.se/ontology#"),
    ("bd", "http://www.bigdata.com/rdf#"),
]


def default_prefix_table() -> PrefixTable:
    """Standard Wikidata set, tolerating https:// spellings at encode time."""
    entries = list(WIKIDATA_PREFIXES)
    for label, ns in WIKIDATA_PREFIXES:
        if ns.startswith("http://"):
            entries.append((label, "https://" + ns[len("http://"):]))
    return PrefixTable(entries)


def load_prefix_table(path) -> PrefixTable:
    """Read a `label<TAB>namespace` table, `#` comments allowed."""
    entries = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected label<TAB>namespace")
            entries.append((parts[0], parts[1]))
    return PrefixTable(entries)


def save_prefix_table(table: PrefixTable, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# prefix label <TAB> namespace IRI\n")
        for namespace, label in sorted(table._match, key=lambda e: (e[1], e[0])):
            handle.write(f"{label}\t{namespace}\n")


@dataclass(frozen=True)
class CanonicalQuery:
    """Placeholder-encoded, prefix-contracted SPARQL surface form."""

    text: str
    provenance: str = "ENCODED_GOLD"  # or MODEL_OUTPUT


def _strip_decl_tokens(tokens: list[Token]):
    """Remove PREFIX declarations; return (body tokens, declared map)."""
    out: list[Token] = []
    declared: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if (
            tok.kind is TokKind.WORD
            and tok.text.upper() == "PREFIX"
            and i + 2 < len(tokens)
            and tokens[i + 1].kind is TokKind.PNAME
            and tokens[i + 1].value[1] == ""
            and tokens[i + 2].kind is TokKind.IRI
        ):
            label = tokens[i + 1].value[0]
            declared[label] = tokens[i + 2].value
            i += 3
            continue
        out.append(tok)
        i += 1
    return out, declared


def strip_prefix_decls(query: str) -> str:
    """Drop all `PREFIX label: <iri>` declarations, keep the body."""
    tokens, _ = _strip_decl_tokens(tokenize(query))
    return render(tokens)


def _contract_token(tok: Token, table: PrefixTable) -> Token:
    if tok.kind is TokKind.IRI:
        hit = table.match(tok.value)
        if hit:
            namespace, label = hit
            local = tok.value[len(namespace):]
            if _SAFE_LOCAL.match(local):
                return Token(TokKind.PNAME, f"{label}:{local}", (label, local))
        return tok
    if tok.kind is TokKind.LITERAL:
        body, lang, dtype = tok.value
        if dtype is not None and dtype.kind is TokKind.IRI:
            new_dtype = _contract_token(dtype, table)
            if new_dtype is not dtype:
                text = f"{body}^^{new_dtype.text}"
                return Token(TokKind.LITERAL, text, (body, lang, new_dtype))
    return tok


def _contract_tokens(tokens: list[Token], table: PrefixTable) -> list[Token]:
    return [_contract_token(t, table) for t in tokens]


def contract_uris(query: str, table: PrefixTable | None = None) -> str:
    """Rewrite full IRIs from known namespaces as prefixed names."""
    table = table or default_prefix_table()
    return render(_contract_tokens(tokenize(query), table))


def normal_form(query: str, table: PrefixTable | None = None) -> str:
    """strip_prefix_decls + contract_uris + whitespace normalization.

    This is the surface form under which two queries are considered
    token-equivalent; the fixture endpoint keys its recordings on it.
    """
    table = table or default_prefix_table()
    tokens, declared = _strip_decl_tokens(tokenize(query))
    return render(_contract_tokens(tokens, table.merged_with(declared)))


def encode_target(query: str, table: PrefixTable | None = None) -> CanonicalQuery:
    """Produce the model-facing target form of a gold query."""
    table = table or default_prefix_table()
    tokens, declared = _strip_decl_tokens(tokenize(query))
    for tok in tokens:
        if tok.kind is TokKind.WORD and (
            _RESERVED_WORD.match(tok.text) or tok.text in (BRACK_OPEN, BRACK_CLOSE)
        ):
            raise CollisionError(
                f"input already contains reserved token {tok.text!r}"
            )
    tokens = _contract_tokens(tokens, table.merged_with(declared))
    encoded: list[Token] = []
    for tok in tokens:
        if tok.kind is TokKind.VAR:
            encoded.append(Token(TokKind.WORD, VAR_PREFIX + tok.value))
        elif tok.kind is TokKind.PUNCT and tok.text == "{":
            encoded.append(Token(TokKind.WORD, BRACK_OPEN))
        elif tok.kind is TokKind.PUNCT and tok.text == "}":
            encoded.append(Token(TokKind.WORD, BRACK_CLOSE))
        else:
            encoded.append(tok)
    return CanonicalQuery(text=render(encoded), provenance="ENCODED_GOLD")


def _decode_word(word: str) -> Token | None:
    if word == BRACK_OPEN:
        return Token(TokKind.PUNCT, "{")
    if word == BRACK_CLOSE:
        return Token(TokKind.PUNCT, "}")
    if word.startswith(VAR_PREFIX) and len(word) > len(VAR_PREFIX):
        name = word[len(VAR_PREFIX):]
        return Token(TokKind.VAR, "?" + name, name)
    return None


def decode_prediction(
    canonical: CanonicalQuery | str, table: PrefixTable | None = None
) -> str:
    """Best-effort inverse of encode_target for arbitrary model output.

    Placeholders become their original symbols and a PREFIX declaration is
    emitted for every known label actually used in the body. Never raises:
    text that cannot be lexed is decoded word-by-word.
    """
    table = table or default_prefix_table()
    text = canonical.text if isinstance(canonical, CanonicalQuery) else canonical
    try:
        tokens = tokenize(text)
    except LexError:
        words = []
        used = []
        for word in text.split():
            decoded = _decode_word(word)
            words.append(decoded.text if decoded else word)
            head = word.split(":", 1)[0]
            if ":" in word and head in table and head not in used:
                used.append(head)
        decls = [f"PREFIX {l}: <{table.namespace(l)}>" for l in used]
        return " ".join(decls + words)

    decoded: list[Token] = []
    used_labels: list[str] = []
    for tok in tokens:
        if tok.kind is TokKind.WORD:
            repl = _decode_word(tok.text)
            if repl is not None:
                decoded.append(repl)
                continue
        if tok.kind is TokKind.PNAME:
            label = tok.value[0]
            if label in table and label not in used_labels:
                used_labels.append(label)
        if tok.kind is TokKind.LITERAL:
            dtype = tok.value[2]
            if dtype is not None and dtype.kind is TokKind.PNAME:
                label = dtype.value[0]
                if label in table and label not in used_labels:
                    used_labels.append(label)
        decoded.append(tok)
    decls = [f"PREFIX {l}: <{table.namespace(l)}>" for l in used_labels]
    body = render(decoded)
    return " ".join(decls + [body]) if decls else body

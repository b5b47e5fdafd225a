"""Immutable in-memory RDF triple store with BGP schema extraction.

Triples load from N-Triples or TSV into a fully indexed, read-only set.
The schema is the list of distinct (subject type, predicate, object type)
rows observed in the data, rendered as the CSV the linking prompts consume.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Literal, Mapping

from .errors import ParseError

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

# Local names (case-insensitive) of predicates that carry display names.
NAME_LOCAL_NAMES = ("name", "label", "title")

UNTYPED = "Untyped"
LITERAL_TYPE = "Literal"


@dataclass(frozen=True, order=True)
class Term:
    """An RDF term: an absolute IRI or a plain-string literal."""

    kind: Literal["iri", "literal"]
    value: str

    @staticmethod
    def iri(value: str) -> "Term":
        return Term("iri", value)

    @staticmethod
    def literal(value: str) -> "Term":
        return Term("literal", value)

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Triple:
    """Subject and predicate are always IRIs; the object may be a literal."""

    subject: Term
    predicate: Term
    object: Term


def local_name(iri: str) -> str:
    """Fragment after the last '#' or '/' (the IRI itself if neither occurs)."""
    for sep in ("#", "/"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1]
    return iri


def _is_name_predicate(pred_iri: str) -> bool:
    return local_name(pred_iri).lower() in NAME_LOCAL_NAMES


# Preference order for display strings: name, then label, then title.
_NAME_RANK = {name: rank for rank, name in enumerate(NAME_LOCAL_NAMES)}


class TripleStore:
    """Read-only triple set with subject/predicate/object indexes.

    Construction happens once in :func:`load_triples`; afterwards the store
    is safe for unlimited concurrent readers.
    """

    def __init__(self, triples: Iterable[Triple], typing_predicate: str | None = None):
        self._triples: tuple[Triple, ...] = tuple(sorted(set(triples)))
        self._by_subject: dict[str, list[Triple]] = {}
        self._by_predicate: dict[str, list[Triple]] = {}
        self._by_object: dict[str, list[Triple]] = {}
        self.typing_predicate = typing_predicate

        name_values: dict[str, list[tuple[int, str]]] = {}  # node -> [(rank, literal)]
        types: dict[str, set[str]] = {}

        for t in self._triples:
            self._by_subject.setdefault(t.subject.value, []).append(t)
            self._by_predicate.setdefault(t.predicate.value, []).append(t)
            self._by_object.setdefault(t.object.value, []).append(t)

            pred = t.predicate.value
            if not t.object.is_iri and _is_name_predicate(pred):
                rank = _NAME_RANK[local_name(pred).lower()]
                name_values.setdefault(t.subject.value, []).append((rank, t.object.value))
            if self._is_typing(pred):
                types.setdefault(t.subject.value, set()).add(_type_name(t.object))

        self.type_of: dict[str, tuple[str, ...]] = {
            node: tuple(sorted(ts)) for node, ts in types.items()
        }
        self._display: dict[str, str] = {
            node: min(vals)[1] for node, vals in name_values.items()
        }
        self.name_index: dict[str, set[str]] = {}
        for node, vals in name_values.items():
            for _, lit in vals:
                self.name_index.setdefault(lit.lower(), set()).add(node)

    def _is_typing(self, pred_iri: str) -> bool:
        if self.typing_predicate is not None:
            return pred_iri == self.typing_predicate
        return pred_iri == RDF_TYPE or local_name(pred_iri).lower() == "type"

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._by_subject.get(triple.subject.value, ())

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    def by_subject(self, iri: str) -> tuple[Triple, ...]:
        return tuple(self._by_subject.get(iri, ()))

    def by_predicate(self, iri: str) -> tuple[Triple, ...]:
        return tuple(self._by_predicate.get(iri, ()))

    def by_object(self, value: str) -> tuple[Triple, ...]:
        return tuple(self._by_object.get(value, ()))

    def types(self, node_iri: str) -> tuple[str, ...]:
        """Declared types of a node, or ("Untyped",)."""
        return self.type_of.get(node_iri, (UNTYPED,))

    def display(self, term: Term) -> str:
        """Human-readable form: literal verbatim, else name/label/title, else local name."""
        if not term.is_iri:
            return term.value
        return self._display.get(term.value, local_name(term.value))

    def display_iri(self, iri: str) -> str:
        return self.display(Term.iri(iri))

    def predicates(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_predicate))

    def is_typing_predicate(self, pred_iri: str) -> bool:
        return self._is_typing(pred_iri)

    def is_name_predicate(self, pred_iri: str) -> bool:
        return _is_name_predicate(pred_iri)

    def nodes_by_name(self, name: str) -> tuple[str, ...]:
        """Node IRIs whose name/label/title equals `name` case-insensitively, sorted."""
        return tuple(sorted(self.name_index.get(name.lower(), ())))

    def nodes_of_type(self, type_name: str) -> tuple[str, ...]:
        return tuple(sorted(n for n, ts in self.type_of.items() if type_name in ts))


def _type_name(obj: Term) -> str:
    return obj.value if not obj.is_iri else local_name(obj.value)


@dataclass(frozen=True)
class BGP:
    """One schema row: (subject type, predicate local name, object type)."""

    subject_type: str
    predicate: str
    object_type: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.subject_type, self.predicate, self.object_type)


@dataclass(frozen=True)
class KGSchema:
    bgps: tuple[BGP, ...]
    prefix: str
    # predicate local name -> full IRIs observed, sorted
    predicate_iris: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def types(self) -> tuple[str, ...]:
        seen = {b.subject_type for b in self.bgps} | {b.object_type for b in self.bgps}
        seen.discard(LITERAL_TYPE)
        return tuple(sorted(seen))

    def predicate_iri(self, local: str) -> str | None:
        iris = self.predicate_iris.get(local.lower())
        return iris[0] if iris else None


_IRI_RE = r"<([^<>\s]*)>"
_LIT_RE = r'"((?:[^"\\]|\\.)*)"'
_NT_LINE = re.compile(
    rf"^{_IRI_RE}\s+{_IRI_RE}\s+(?:{_IRI_RE}|{_LIT_RE})\s*\.\s*$"
)
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape(raw: str, line_no: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            if i + 1 >= len(raw) or raw[i + 1] not in _ESCAPES:
                raise ParseError(f"bad escape in literal: {raw[i:i+2]!r}", line_no)
            out.append(_ESCAPES[raw[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _escape(value: str) -> str:
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _parse_ntriples(lines: Iterable[str]) -> Iterator[Triple]:
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _NT_LINE.match(stripped)
        if not m:
            raise ParseError(f"not a valid triple: {stripped!r}", line_no)
        subj, pred, obj_iri, obj_lit = m.groups()
        if obj_iri is not None:
            obj = Term.iri(obj_iri)
        else:
            obj = Term.literal(_unescape(obj_lit, line_no))
        yield Triple(Term.iri(subj), Term.iri(pred), obj)


def _tsv_term(fieldtext: str, line_no: int, position: str) -> Term:
    text = fieldtext.strip()
    if text.startswith("<") and text.endswith(">"):
        return Term.iri(text[1:-1])
    if position in ("subject", "predicate"):
        raise ParseError(f"{position} must be an <iri>: {text!r}", line_no)
    return Term.literal(text)


def _parse_tsv(lines: Iterable[str]) -> Iterator[Triple]:
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.rstrip("\r\n").split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated columns, got {len(parts)}", line_no)
        yield Triple(
            _tsv_term(parts[0], line_no, "subject"),
            _tsv_term(parts[1], line_no, "predicate"),
            _tsv_term(parts[2], line_no, "object"),
        )


def load_triples(
    source: str | bytes | IO,
    format: Literal["ntriples", "tsv"] = "ntriples",
    typing_predicate: str | None = None,
) -> TripleStore:
    """Parse a triple source into an immutable store.

    Duplicate triples are silently deduplicated; malformed lines raise
    :class:`ParseError` with the 1-based line number.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = io.StringIO(text)
    if format == "ntriples":
        triples = _parse_ntriples(lines)
    elif format == "tsv":
        triples = _parse_tsv(lines)
    else:
        raise ValueError(f"unknown format: {format}")
    return TripleStore(triples, typing_predicate=typing_predicate)


def serialize_ntriples(store: TripleStore) -> str:
    """Canonical N-Triples text; load(serialize(store)) reproduces the triple set."""
    out = []
    for t in store:
        if t.object.is_iri:
            obj = f"<{t.object.value}>"
        else:
            obj = f'"{_escape(t.object.value)}"'
        out.append(f"<{t.subject.value}> <{t.predicate.value}> {obj} .")
    return "\n".join(out) + ("\n" if out else "")


def extract_schema(store: TripleStore, prefix: str) -> KGSchema:
    """Distinct type signatures of every triple, sorted for determinism.

    Multi-typed nodes contribute one row per type; literal objects are typed
    "Literal"; nodes with no type declaration are typed "Untyped".
    """
    rows: set[BGP] = set()
    pred_iris: dict[str, set[str]] = {}
    for t in store:
        pred_local = local_name(t.predicate.value)
        pred_iris.setdefault(pred_local.lower(), set()).add(t.predicate.value)
        if t.object.is_iri:
            otypes = store.types(t.object.value)
        else:
            otypes = (LITERAL_TYPE,)
        for stype in store.types(t.subject.value):
            for otype in otypes:
                rows.add(BGP(stype, pred_local, otype))
    return KGSchema(
        bgps=tuple(sorted(rows, key=BGP.as_tuple)),
        prefix=prefix,
        predicate_iris={k: tuple(sorted(v)) for k, v in pred_iris.items()},
    )


def schema_to_csv(schema: KGSchema) -> str:
    """One `subject-type, predicate, object-type` line per BGP row."""
    return "".join(f"{b.subject_type}, {b.predicate}, {b.object_type}\n" for b in schema.bgps)


def neighbors(
    store: TripleStore, node: str, direction: Literal["out", "in", "both"] = "both"
) -> list[Triple]:
    """Triples incident to `node`, ordered by (predicate, counterpart term).

    Unknown nodes yield an empty list.
    """
    found: list[Triple] = []
    if direction in ("out", "both"):
        found.extend(store.by_subject(node))
    if direction in ("in", "both"):
        found.extend(t for t in store.by_object(node) if t.object.is_iri)
    seen: set[Triple] = set()
    unique = [t for t in found if not (t in seen or seen.add(t))]

    def sort_key(t: Triple):
        counterpart = t.object if t.subject.value == node else t.subject
        return (t.predicate.value, counterpart.value, t.subject.value, t.object.value)

    return sorted(unique, key=sort_key)

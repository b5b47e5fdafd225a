"""Minimal N-Triples reader for KG exports.

Only the subset the store exports is supported: IRI subject/predicate and
IRI or plain-string-literal objects, one triple per line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator


@dataclass(frozen=True)
class RawTriple:
    subject: str
    predicate: str
    object: str
    object_is_iri: bool


_LINE = re.compile(
    r"^<([^<>\s]*)>\s+<([^<>\s]*)>\s+(?:<([^<>\s]*)>|\"((?:[^\"\\]|\\.)*)\")\s*\.\s*$"
)
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape(raw: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(raw):
        if raw[i] == "\\" and i + 1 < len(raw) and raw[i + 1] in _ESCAPES:
            out.append(_ESCAPES[raw[i + 1]])
            i += 2
        else:
            out.append(raw[i])
            i += 1
    return "".join(out)


def parse_ntriples(text: str) -> Iterator[RawTriple]:
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(stripped)
        if not m:
            raise ValueError(f"line {line_no}: not a valid triple: {stripped!r}")
        subject, predicate, obj_iri, obj_lit = m.groups()
        if obj_iri is not None:
            yield RawTriple(subject, predicate, obj_iri, True)
        else:
            yield RawTriple(subject, predicate, _unescape(obj_lit), False)


def read_ntriples(source: str | Path) -> list[RawTriple]:
    text = str(source)
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text(encoding="utf-8")
    return list(parse_ntriples(text))


def local_name(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1]
    return iri

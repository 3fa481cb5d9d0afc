"""Reversible flat-string encoding for composite type names.

Transformed logs must stay valid OCEL 2.0, whose type names are flat
strings. The grammar (normative, see README):

    object-type := base ("~" attribute "=" value)*
    event-type  := base ("@" object-type)*

``\\`` escapes the four structural characters ``~ = @ \\`` wherever they
occur inside a base name, attribute name, or rendered value. Values are
rendered canonically by :meth:`AttributeValue.render` and recovered by
:func:`recognize_value`, so ``decode(encode(t)) == t`` for every composite
type whose text values are not themselves canonical renderings of another
tag.
"""
from __future__ import annotations

from .errors import MalformedTypeName
from .model import CompositeEventType, CompositeObjectType, recognize_value

_ESCAPABLE = "~=@\\"

_Token = tuple[str, bool]  # (character, was-escaped)


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPABLE:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise MalformedTypeName(f"dangling escape at end of {text!r}")
            nxt = text[i + 1]
            if nxt not in _ESCAPABLE:
                raise MalformedTypeName(f"invalid escape \\{nxt} in {text!r}")
            tokens.append((nxt, True))
            i += 2
        else:
            tokens.append((ch, False))
            i += 1
    return tokens


def _split(tokens: list[_Token], delim: str) -> list[list[_Token]]:
    parts: list[list[_Token]] = [[]]
    for tok in tokens:
        if tok == (delim, False):
            parts.append([])
        else:
            parts[-1].append(tok)
    return parts


def _text(tokens: list[_Token]) -> str:
    return "".join(ch for ch, _ in tokens)


def encode_object_type(t: CompositeObjectType) -> str:
    pieces = [_escape(t.base)]
    for attr, value in t.drills:
        pieces.append("~" + _escape(attr) + "=" + _escape(value.render()))
    return "".join(pieces)


def encode_event_type(t: CompositeEventType) -> str:
    pieces = [_escape(t.base)]
    for unfold in t.unfolds:
        pieces.append("@" + encode_object_type(unfold))
    return "".join(pieces)


def _decode_object_tokens(tokens: list[_Token], source: str) -> CompositeObjectType:
    if any(tok == ("@", False) for tok in tokens):
        raise MalformedTypeName(f"'@' is not valid inside an object type: {source!r}")
    segments = _split(tokens, "~")
    base_tokens = segments[0]
    if any(tok == ("=", False) for tok in base_tokens):
        raise MalformedTypeName(f"'=' outside a drill segment in {source!r}")
    base = _text(base_tokens)
    if not base:
        raise MalformedTypeName(f"empty base name in {source!r}")
    drills = []
    for segment in segments[1:]:
        halves = _split(segment, "=")
        if len(halves) != 2:
            raise MalformedTypeName(
                f"drill segment must be attribute=value in {source!r}"
            )
        attr = _text(halves[0])
        if not attr:
            raise MalformedTypeName(f"empty attribute name in {source!r}")
        drills.append((attr, recognize_value(_text(halves[1]))))
    return CompositeObjectType(base, tuple(drills))


def decode_object_type(text: str) -> CompositeObjectType:
    return _decode_object_tokens(_tokenize(text), text)


def decode_event_type(text: str) -> CompositeEventType:
    segments = _split(_tokenize(text), "@")
    base_tokens = segments[0]
    if any(tok in (("~", False), ("=", False)) for tok in base_tokens):
        raise MalformedTypeName(f"event base name may not contain '~' or '=': {text!r}")
    base = _text(base_tokens)
    if not base:
        raise MalformedTypeName(f"empty base name in {text!r}")
    unfolds = tuple(_decode_object_tokens(seg, text) for seg in segments[1:])
    return CompositeEventType(base, unfolds)

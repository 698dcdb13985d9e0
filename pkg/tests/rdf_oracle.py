"""Independent RDF parsers used as serialization oracles.

Implemented from the N-Triples / Turtle grammars as character-level state
machines, sharing no code with the production writer or reader. Terms are
plain tuples: ("iri", value) or ("lit", lexical, lang, datatype).
"""

from __future__ import annotations

HEX = "0123456789abcdefABCDEF"


class OracleParseError(Exception):
    pass


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def expect(self, token: str):
        if not self.text.startswith(token, self.pos):
            raise OracleParseError(
                f"expected {token!r} at offset {self.pos}: {self.text[self.pos:self.pos+20]!r}"
            )
        self.pos += len(token)

    def skip_ws(self):
        while self.peek() in (" ", "\t"):
            self.pos += 1


def _read_iri(cur: _Cursor) -> tuple:
    cur.expect("<")
    out = []
    while True:
        if cur.eof():
            raise OracleParseError("unterminated IRI")
        ch = cur.take()
        if ch == ">":
            break
        out.append(ch)
    return ("iri", "".join(out))


def _read_string(cur: _Cursor) -> str:
    cur.expect('"')
    out = []
    while True:
        if cur.eof():
            raise OracleParseError("unterminated string")
        ch = cur.take()
        if ch == '"':
            break
        if ch == "\\":
            esc = cur.take()
            if esc == "u":
                code = "".join(cur.take() for _ in range(4))
                if any(c not in HEX for c in code):
                    raise OracleParseError(f"bad \\u escape {code!r}")
                out.append(chr(int(code, 16)))
            elif esc == "U":
                code = "".join(cur.take() for _ in range(8))
                if any(c not in HEX for c in code):
                    raise OracleParseError(f"bad \\U escape {code!r}")
                out.append(chr(int(code, 16)))
            elif esc == "t":
                out.append("\t")
            elif esc == "n":
                out.append("\n")
            elif esc == "r":
                out.append("\r")
            elif esc == "b":
                out.append("\b")
            elif esc == "f":
                out.append("\f")
            elif esc in ('"', "'", "\\"):
                out.append(esc)
            else:
                raise OracleParseError(f"unknown escape \\{esc}")
        else:
            out.append(ch)
    return "".join(out)


def _read_langtag(cur: _Cursor) -> str:
    cur.expect("@")
    out = []
    while not cur.eof() and (cur.peek().isalnum() or cur.peek() == "-"):
        out.append(cur.take())
    if not out:
        raise OracleParseError("empty language tag")
    return "".join(out)


def _read_literal(cur: _Cursor, resolve_iri) -> tuple:
    lexical = _read_string(cur)
    lang = None
    datatype = None
    if cur.peek() == "@":
        lang = _read_langtag(cur)
    elif cur.text.startswith("^^", cur.pos):
        cur.expect("^^")
        datatype = resolve_iri(cur)
    return ("lit", lexical, lang, datatype)


# ---------------------------------------------------------------------------
# N-Triples
# ---------------------------------------------------------------------------

def parse_ntriples(text: str) -> set:
    def resolve(cur):
        return _read_iri(cur)[1]

    triples = set()
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        cur = _Cursor(line)
        try:
            subject = _read_iri(cur)
            cur.skip_ws()
            predicate = _read_iri(cur)
            cur.skip_ws()
            if cur.peek() == "<":
                obj = _read_iri(cur)
            elif cur.peek() == '"':
                obj = _read_literal(cur, resolve)
            else:
                raise OracleParseError(f"unexpected object start {cur.peek()!r}")
            cur.skip_ws()
            cur.expect(".")
            cur.skip_ws()
            if not cur.eof():
                raise OracleParseError(f"trailing content {cur.text[cur.pos:]!r}")
        except OracleParseError as exc:
            raise OracleParseError(f"line {line_no}: {exc}") from exc
        triples.add((subject, predicate, obj))
    return triples


# ---------------------------------------------------------------------------
# Turtle (the subset the writer emits: prefixes, `a`, `;` and `,` lists)
# ---------------------------------------------------------------------------

RDF_TYPE_IRI = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

_LOCAL_END = set(" \t\n,;.")


def parse_turtle(text: str) -> set:
    prefixes: dict[str, str] = {}
    triples = set()
    cur = _Cursor(text.replace("\r\n", "\n"))

    def skip_all_ws():
        while not cur.eof() and cur.peek() in (" ", "\t", "\n"):
            cur.pos += 1

    def read_term():
        skip_all_ws()
        ch = cur.peek()
        if ch == "<":
            return _read_iri(cur)
        if ch == '"':
            return _read_literal(cur, lambda c: read_resolved_iri())
        return read_prefixed()

    def read_resolved_iri() -> str:
        term = read_term()
        if term[0] != "iri":
            raise OracleParseError("expected an IRI")
        return term[1]

    def read_prefixed():
        out = []
        while not cur.eof() and cur.peek() not in _LOCAL_END:
            out.append(cur.take())
        token = "".join(out)
        if token == "a":
            return ("iri", RDF_TYPE_IRI)
        if ":" not in token:
            raise OracleParseError(f"not a prefixed name: {token!r}")
        prefix, local = token.split(":", 1)
        if prefix not in prefixes:
            raise OracleParseError(f"unknown prefix {prefix!r}")
        return ("iri", prefixes[prefix] + local)

    while True:
        skip_all_ws()
        if cur.eof():
            break
        if cur.text.startswith("@prefix", cur.pos):
            cur.expect("@prefix")
            skip_all_ws()
            name = []
            while cur.peek() != ":":
                name.append(cur.take())
            cur.expect(":")
            skip_all_ws()
            iri = _read_iri(cur)[1]
            skip_all_ws()
            cur.expect(".")
            prefixes["".join(name)] = iri
            continue
        subject = read_term()
        while True:
            skip_all_ws()
            predicate = read_term()
            while True:
                obj = read_term()
                triples.add((subject, predicate, obj))
                skip_all_ws()
                if cur.peek() == ",":
                    cur.take()
                    continue
                break
            if cur.peek() == ";":
                cur.take()
                continue
            cur.expect(".")
            break
    return triples

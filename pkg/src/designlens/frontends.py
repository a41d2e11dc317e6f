"""Frontends that turn external text into a CodeModel.

Two input forms are supported: the MiniOO declaration language (recursive
descent parser with error recovery at `;` / `}`) and a canonical JSON
interchange document (strict schema, byte-stable writer).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any

from .model import (
    AGGREGATION,
    ASSOCIATION,
    IDENTIFIER_RE,
    NO_TARGET,
    AttributeDef,
    ClassDef,
    CodeModel,
    MethodDef,
    ModelError,
    PackageDef,
    QualifiedName,
    ValidationError,
    validate_packages,
)

MALFORMED_DOCUMENT = "MalformedDocument"
SCHEMA_ERROR = "SchemaError"

_PRIMITIVES = ("int", "real", "text", "bool")
_PUNCTUATION = "{}();:,."
_ATTRIBUTE_KINDS = {"assoc": ASSOCIATION, "aggr": AGGREGATION}


@dataclass(frozen=True)
class SourcePosition:
    line: int    # 1-based
    column: int  # 1-based, in Unicode scalar values


@dataclass(frozen=True)
class ParseError:
    position: SourcePosition
    expected: str
    found: str

    @property
    def message(self) -> str:
        return (f"{self.position.line}:{self.position.column}: "
                f"expected {self.expected}, found {self.found}")


class ParseFailure(Exception):
    """Raised for MiniOO syntax errors; carries every error found before giving up."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        head = self.errors[0].message if self.errors else "unknown"
        super().__init__(f"{len(self.errors)} syntax error(s): {head}")


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | a punctuation character | "eof"
    text: str
    line: int
    column: int

    @property
    def position(self) -> SourcePosition:
        return SourcePosition(self.line, self.column)


def tokenize(source: str) -> tuple[list[Token], list[ParseError]]:
    """Split MiniOO source into tokens; illegal characters become errors and are skipped."""
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, column = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            column += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
                column += 1
            continue
        start_col = column
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if not IDENTIFIER_RE.match(word):
                # isalpha() accepts non-ASCII letters the grammar does not
                errors.append(ParseError(SourcePosition(line, start_col), "a name", repr(word)))
            else:
                tokens.append(Token("name", word, line, start_col))
            column += j - i
            i = j
        elif ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], line, start_col))
            column += j - i
            i = j
        elif ch in _PUNCTUATION:
            tokens.append(Token(ch, ch, line, start_col))
            i += 1
            column += 1
        else:
            errors.append(ParseError(SourcePosition(line, start_col), "a token", repr(ch)))
            i += 1
            column += 1
    tokens.append(Token("eof", "", line, column))
    return tokens, errors


class _Panic(Exception):
    """Internal signal: abandon the current production and resynchronize."""


class _MiniOOParser:
    def __init__(self, source: str):
        self.tokens, self.errors = tokenize(source)
        self.pos = 0
        # locus ("pkg", "pkg.Cls", "pkg.Cls.member") -> declaration position
        self.positions: dict[str, SourcePosition] = {}

    # -- token stream helpers ------------------------------------------------

    def _cur(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _at(self, text: str) -> bool:
        return self._cur().text == text and self._cur().kind != "eof"

    def _match(self, text: str) -> bool:
        if self._at(text):
            self._advance()
            return True
        return False

    def _found(self) -> str:
        tok = self._cur()
        return "end of input" if tok.kind == "eof" else f"'{tok.text}'"

    def _fail(self, expected: str) -> None:
        self.errors.append(ParseError(self._cur().position, expected, self._found()))
        raise _Panic()

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            self._fail(f"'{text}'")
        return self._advance()

    def _expect_name(self, expected: str) -> Token:
        if self._cur().kind != "name":
            self._fail(expected)
        return self._advance()

    def _synchronize(self) -> str | None:
        """Skip ahead past the next ';' or '}'; returns the consumed terminator."""
        while self._cur().kind != "eof":
            tok = self._advance()
            if tok.text in (";", "}"):
                return tok.text
        return None

    # -- grammar productions -------------------------------------------------

    def parse_model(self) -> list[PackageDef]:
        packages: list[PackageDef] = []
        while self._cur().kind != "eof":
            if self._at("package"):
                try:
                    packages.append(self._package())
                except _Panic:
                    self._synchronize()
            else:
                try:
                    self._fail("'package'")
                except _Panic:
                    self._synchronize()
        if not packages and not self.errors:
            self.errors.append(ParseError(
                self._cur().position, "at least one package declaration", "end of input"))
        return packages

    def _package(self) -> PackageDef:
        self._expect("package")
        name_tok = self._expect_name("a package name")
        self.positions.setdefault(name_tok.text, name_tok.position)
        self._expect("{")
        classes: list[ClassDef] = []
        closed = False
        while not closed:
            if self._match("}"):
                closed = True
            elif self._cur().kind == "eof":
                self.errors.append(ParseError(self._cur().position, "'class' or '}'", "end of input"))
                closed = True
            elif self._at("class") or self._at("abstract"):
                try:
                    classes.append(self._class(name_tok.text))
                except _Panic:
                    closed = self._synchronize() is None
            else:
                try:
                    self._fail("'class', 'abstract' or '}'")
                except _Panic:
                    closed = self._synchronize() is None
        return PackageDef(name_tok.text, tuple(classes))

    def _class(self, package: str) -> ClassDef:
        is_abstract = self._match("abstract")
        self._expect("class")
        name_tok = self._expect_name("a class name")
        self.positions.setdefault(f"{package}.{name_tok.text}", name_tok.position)
        parents: list[QualifiedName] = []
        if self._match("extends"):
            parents.append(self._typeref(package))
            while self._match(","):
                parents.append(self._typeref(package))
        self._expect("{")
        attributes: list[AttributeDef] = []
        methods: list[MethodDef] = []
        closed = False
        while not closed:
            if self._match("}"):
                closed = True
            elif self._cur().kind == "eof":
                self.errors.append(ParseError(
                    self._cur().position, "'field', 'method' or '}'", "end of input"))
                closed = True
            elif self._at("field") or self._at("method") or self._at("abstract"):
                try:
                    self._member(package, name_tok.text, attributes, methods)
                except _Panic:
                    if self._synchronize() in ("}", None):
                        closed = True
            else:
                try:
                    self._fail("'field', 'method' or '}'")
                except _Panic:
                    if self._synchronize() in ("}", None):
                        closed = True
        return ClassDef(name_tok.text, is_abstract, tuple(parents), tuple(attributes), tuple(methods))

    def _member(self, package: str, cls: str,
                attributes: list[AttributeDef], methods: list[MethodDef]) -> None:
        if self._at("field"):
            attributes.append(self._field(package, cls))
        else:
            methods.append(self._method(package, cls))

    def _field(self, package: str, cls: str) -> AttributeDef:
        self._expect("field")
        name_tok = self._expect_name("a field name")
        self.positions.setdefault(f"{package}.{cls}.{name_tok.text}", name_tok.position)
        self._expect(":")
        if self._cur().kind == "name" and self._cur().text in _PRIMITIVES:
            self._advance()
            target, kind = None, NO_TARGET
        elif self._cur().kind == "name":
            target = self._typeref(package)
            kind = ASSOCIATION
            if self._match(","):
                kind_tok = self._cur()
                if kind_tok.kind == "name" and kind_tok.text in _ATTRIBUTE_KINDS:
                    self._advance()
                    kind = _ATTRIBUTE_KINDS[kind_tok.text]
                else:
                    self._fail("'assoc' or 'aggr'")
        else:
            self._fail("a type name")
        self._expect(";")
        return AttributeDef(name_tok.text, target, kind)

    def _method(self, package: str, cls: str) -> MethodDef:
        is_abstract = self._match("abstract")
        self._expect("method")
        name_tok = self._expect_name("a method name")
        self.positions.setdefault(f"{package}.{cls}.{name_tok.text}", name_tok.position)
        weight = 1
        if self._match("weight"):
            weight_tok = self._cur()
            # INT must match [1-9][0-9]*
            if weight_tok.kind != "int" or weight_tok.text[0] == "0":
                self._fail("a positive integer")
            self._advance()
            weight = int(weight_tok.text)
        reads: list[str] = []
        if self._match("reads"):
            self._expect("(")
            reads.append(self._expect_name("an attribute name").text)
            while self._match(","):
                reads.append(self._expect_name("an attribute name").text)
            self._expect(")")
        uses: list[QualifiedName] = []
        if self._match("uses"):
            self._expect("(")
            uses.append(self._typeref(package))
            while self._match(","):
                uses.append(self._typeref(package))
            self._expect(")")
        self._expect(";")
        return MethodDef(name_tok.text, is_abstract, weight, frozenset(reads), frozenset(uses))

    def _typeref(self, default_package: str) -> QualifiedName:
        first = self._expect_name("a type name")
        if self._match("."):
            second = self._expect_name("a class name")
            return QualifiedName(first.text, second.text)
        return QualifiedName(default_package, first.text)


def parse_minioo_declarations(source: str) -> tuple[list[PackageDef], dict[str, SourcePosition]]:
    """Syntax-only MiniOO parse: declarations plus a locus -> position index.

    Raises ParseFailure on any syntax error; semantic validation is the
    caller's job (see parse_minioo).
    """
    parser = _MiniOOParser(source)
    packages = parser.parse_model()
    if parser.errors:
        raise ParseFailure(parser.errors)
    return packages, parser.positions


def attach_positions(
    errors: list[ValidationError], positions: dict[str, SourcePosition],
) -> list[ValidationError]:
    """Give each validation error the source position of its locus (best prefix match)."""
    located = []
    for error in errors:
        locus = error.locus
        position = None
        while locus:
            position = positions.get(locus)
            if position is not None:
                break
            locus, _, _ = locus.rpartition(".")
        located.append(dataclasses.replace(error, position=position))
    return located


def parse_minioo(source: str) -> CodeModel:
    """Parse MiniOO source and validate it into a CodeModel.

    Raises ParseFailure for syntax errors, ModelError (with source positions
    attached) for semantic ones.
    """
    packages, positions = parse_minioo_declarations(source)
    errors = validate_packages(packages)
    if errors:
        raise ModelError(attach_positions(errors, positions))
    return CodeModel(tuple(packages))


# -- interchange documents ---------------------------------------------------


class _SchemaWalker:
    """Strict walk of the interchange document; collects every schema error."""

    def __init__(self) -> None:
        self.errors: list[ValidationError] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(ValidationError(SCHEMA_ERROR, path, message))

    def obj(self, value: Any, path: str, keys: tuple[str, ...]) -> dict | None:
        if not isinstance(value, dict):
            self.error(path or "document", f"expected an object, got {type(value).__name__}")
            return None
        for key in value:
            if key not in keys:
                self.error(f"{path}.{key}" if path else str(key), "unknown field")
        missing = [k for k in keys if k not in value]
        for key in missing:
            self.error(f"{path}.{key}" if path else str(key), "missing field")
        return None if missing else value

    def array(self, value: Any, path: str) -> list | None:
        if not isinstance(value, list):
            self.error(path, f"expected an array, got {type(value).__name__}")
            return None
        return value

    def string(self, value: Any, path: str) -> str | None:
        if not isinstance(value, str):
            self.error(path, f"expected a string, got {type(value).__name__}")
            return None
        return value

    def identifier(self, value: Any, path: str) -> str | None:
        text = self.string(value, path)
        if text is not None and not IDENTIFIER_RE.match(text):
            self.error(path, f"not a valid identifier: {text!r}")
            return None
        return text

    def boolean(self, value: Any, path: str) -> bool | None:
        if not isinstance(value, bool):
            self.error(path, f"expected a boolean, got {type(value).__name__}")
            return None
        return value

    def qualified(self, value: Any, path: str) -> QualifiedName | None:
        text = self.string(value, path)
        if text is None:
            return None
        package, dot, cls = text.partition(".")
        if not dot or not IDENTIFIER_RE.match(package) or not IDENTIFIER_RE.match(cls):
            self.error(path, f"expected 'pkg.Class', got {text!r}")
            return None
        return QualifiedName(package, cls)


def decode_interchange(document: str) -> list[PackageDef]:
    """Decode an interchange document to declarations, without semantic validation.

    Raises ModelError with MalformedDocument / SchemaError entries (the locus
    is the JSON path of the offending field).
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelError([ValidationError(
            MALFORMED_DOCUMENT, f"line {exc.lineno}", f"not well-formed JSON: {exc.msg}")]) from None

    walker = _SchemaWalker()
    packages: list[PackageDef] = []
    root = walker.obj(data, "", ("packages",))
    if root is not None:
        package_array = walker.array(root["packages"], "packages")
        for p, package_value in enumerate(package_array or []):
            package = _decode_package(walker, package_value, f"packages[{p}]")
            if package is not None:
                packages.append(package)
    if walker.errors:
        raise ModelError(walker.errors)
    return packages


def _decode_package(walker: _SchemaWalker, value: Any, path: str) -> PackageDef | None:
    obj = walker.obj(value, path, ("name", "classes"))
    if obj is None:
        return None
    name = walker.identifier(obj["name"], f"{path}.name")
    class_array = walker.array(obj["classes"], f"{path}.classes")
    classes = []
    for c, class_value in enumerate(class_array or []):
        cls = _decode_class(walker, class_value, f"{path}.classes[{c}]")
        if cls is not None:
            classes.append(cls)
    if name is None or class_array is None or len(classes) != len(class_array):
        return None
    return PackageDef(name, tuple(classes))


def _decode_class(walker: _SchemaWalker, value: Any, path: str) -> ClassDef | None:
    obj = walker.obj(value, path, ("name", "abstract", "parents", "attributes", "methods"))
    if obj is None:
        return None
    name = walker.identifier(obj["name"], f"{path}.name")
    is_abstract = walker.boolean(obj["abstract"], f"{path}.abstract")
    parents: list[QualifiedName | None] = []
    parent_array = walker.array(obj["parents"], f"{path}.parents")
    for i, parent in enumerate(parent_array or []):
        parents.append(walker.qualified(parent, f"{path}.parents[{i}]"))
    attributes = []
    attribute_array = walker.array(obj["attributes"], f"{path}.attributes")
    for i, attribute in enumerate(attribute_array or []):
        attributes.append(_decode_attribute(walker, attribute, f"{path}.attributes[{i}]"))
    methods = []
    method_array = walker.array(obj["methods"], f"{path}.methods")
    for i, method in enumerate(method_array or []):
        methods.append(_decode_method(walker, method, f"{path}.methods[{i}]"))
    parts = [name, is_abstract, parent_array, attribute_array, method_array, *parents,
             *attributes, *methods]
    if any(part is None for part in parts):
        return None
    return ClassDef(name, is_abstract, tuple(parents), tuple(attributes), tuple(methods))


def _decode_attribute(walker: _SchemaWalker, value: Any, path: str) -> AttributeDef | None:
    obj = walker.obj(value, path, ("name", "target", "kind"))
    if obj is None:
        return None
    name = walker.identifier(obj["name"], f"{path}.name")
    target = None
    if obj["target"] is not None:
        target = walker.qualified(obj["target"], f"{path}.target")
        if target is None:
            return None
    kind = obj["kind"]
    if kind not in (ASSOCIATION, AGGREGATION, NO_TARGET):
        walker.error(f"{path}.kind", f"expected 'association', 'aggregation' or 'none', got {kind!r}")
        return None
    if (kind == NO_TARGET) != (obj["target"] is None):
        walker.error(f"{path}.kind", "kind 'none' is required exactly when target is null")
        return None
    if name is None:
        return None
    return AttributeDef(name, target, kind)


def _decode_method(walker: _SchemaWalker, value: Any, path: str) -> MethodDef | None:
    obj = walker.obj(value, path, ("name", "abstract", "weight", "reads", "uses"))
    if obj is None:
        return None
    name = walker.identifier(obj["name"], f"{path}.name")
    is_abstract = walker.boolean(obj["abstract"], f"{path}.abstract")
    weight = obj["weight"]
    if isinstance(weight, bool) or not isinstance(weight, int) or weight < 1:
        walker.error(f"{path}.weight", f"expected a positive integer, got {weight!r}")
        weight = None
    reads: list[str | None] = []
    read_array = walker.array(obj["reads"], f"{path}.reads")
    for i, read in enumerate(read_array or []):
        reads.append(walker.identifier(read, f"{path}.reads[{i}]"))
    uses: list[QualifiedName | None] = []
    use_array = walker.array(obj["uses"], f"{path}.uses")
    for i, use in enumerate(use_array or []):
        uses.append(walker.qualified(use, f"{path}.uses[{i}]"))
    parts = [name, is_abstract, weight, read_array, use_array, *reads, *uses]
    if any(part is None for part in parts):
        return None
    return MethodDef(name, is_abstract, weight, frozenset(reads), frozenset(uses))


def read_interchange(document: str) -> CodeModel:
    """Read an interchange document into a validated CodeModel.

    Raises ModelError for malformed documents, schema violations, and
    semantic validation failures.
    """
    packages = decode_interchange(document)
    errors = validate_packages(packages)
    if errors:
        raise ModelError(errors)
    return CodeModel(tuple(packages))


def write_interchange(model: CodeModel) -> str:
    """Serialize a model canonically: fixed key order, declaration order, trailing newline."""
    document = {"packages": [
        {"name": pkg.name, "classes": [
            {"name": cls.name,
             "abstract": cls.is_abstract,
             "parents": [str(parent) for parent in cls.parents],
             "attributes": [
                 {"name": attr.name,
                  "target": str(attr.target) if attr.target is not None else None,
                  "kind": attr.kind}
                 for attr in cls.attributes],
             "methods": [
                 {"name": method.name,
                  "abstract": method.is_abstract,
                  "weight": method.weight,
                  "reads": sorted(method.reads),
                  "uses": [str(use) for use in sorted(method.uses)]}
                 for method in cls.methods]}
            for cls in pkg.classes]}
        for pkg in model.packages]}
    return json.dumps(document, separators=(",", ":")) + "\n"

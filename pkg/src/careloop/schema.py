"""Language-agnostic constraint-schema trees.

Five node kinds (object, sequence, string, integer, literal_set) compile to
a draft-07 JSON Schema document that is forwarded to model backends capable
of schema-guided decoding; the same tree drives post-hoc validation,
dynamic literal binding (citations restricted to retrieved document ids),
and minimal-instance synthesis for the scripted backend.

Trees are immutable and finite; every object field is required (optional
content is modeled as an empty sequence or string).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator

from careloop.errors import InvalidSchemaError, SchemaPathError

OBJECT = "object"
SEQUENCE = "sequence"
STRING = "string"
INTEGER = "integer"
LITERAL_SET = "literal_set"


@dataclass(frozen=True)
class FieldSpec:
    name: str
    node: "SchemaNode"
    doc: str = ""


@dataclass(frozen=True)
class SchemaNode:
    kind: str
    fields: tuple[FieldSpec, ...] = ()
    element: "SchemaNode | None" = None
    min_items: int = 0
    max_items: int | None = None
    literals: frozenset[str] = frozenset()
    binder: str | None = None
    doc: str = ""

    def __post_init__(self):
        if self.kind == OBJECT:
            names = [f.name for f in self.fields]
            if len(set(names)) != len(names):
                raise InvalidSchemaError(f"duplicate object field names: {names}")
        elif self.kind == SEQUENCE:
            if self.element is None:
                raise InvalidSchemaError("sequence node needs an element schema")
            if self.min_items < 0:
                raise InvalidSchemaError("min_items must be >= 0")
            if self.max_items is not None and self.max_items < self.min_items:
                raise InvalidSchemaError("max_items must be >= min_items")
        elif self.kind == LITERAL_SET:
            if not self.literals:
                raise InvalidSchemaError("literal_set must be non-empty")
        elif self.kind not in (STRING, INTEGER):
            raise InvalidSchemaError(f"unknown schema kind {self.kind!r}")

    def sorted_literals(self) -> list[str]:
        return sorted(self.literals)


def string(doc: str = "") -> SchemaNode:
    return SchemaNode(kind=STRING, doc=doc)


def integer(doc: str = "") -> SchemaNode:
    return SchemaNode(kind=INTEGER, doc=doc)


def literal_set(values: Iterable[str], doc: str = "", binder: str | None = None) -> SchemaNode:
    return SchemaNode(kind=LITERAL_SET, literals=frozenset(values), doc=doc, binder=binder)


def sequence(element: SchemaNode, min_items: int = 0, max_items: int | None = None, doc: str = "") -> SchemaNode:
    return SchemaNode(kind=SEQUENCE, element=element, min_items=min_items, max_items=max_items, doc=doc)


def object_of(fields: Iterable[tuple], doc: str = "") -> SchemaNode:
    """Build an object node from (name, node) or (name, node, doc) tuples."""
    specs = []
    for entry in fields:
        if len(entry) == 2:
            name, node = entry
            specs.append(FieldSpec(name, node))
        else:
            name, node, fdoc = entry
            specs.append(FieldSpec(name, node, fdoc))
    return SchemaNode(kind=OBJECT, fields=tuple(specs), doc=doc)


def yes_no(doc: str = "") -> SchemaNode:
    """Boolean-valued leaf; the schema language has no boolean kind."""
    return literal_set(("yes", "no"), doc=doc)


def compile_schema(schema: SchemaNode, root: bool = True) -> dict:
    """Deterministic draft-07 JSON Schema document for the tree."""
    doc = _compile(schema)
    if root:
        out = {"$schema": "http://json-schema.org/draft-07/schema#"}
        out.update(doc)
        return out
    return doc


def compile_text(schema: SchemaNode) -> str:
    return json.dumps(compile_schema(schema), ensure_ascii=False, indent=2)


def _compile(schema: SchemaNode) -> dict:
    out: dict[str, Any] = {}
    if schema.kind == OBJECT:
        out["type"] = "object"
        out["properties"] = {f.name: _with_doc(_compile(f.node), f.doc) for f in schema.fields}
        out["required"] = [f.name for f in schema.fields]
        out["additionalProperties"] = False
    elif schema.kind == SEQUENCE:
        out["type"] = "array"
        out["items"] = _compile(schema.element)
        if schema.min_items:
            out["minItems"] = schema.min_items
        if schema.max_items is not None:
            out["maxItems"] = schema.max_items
    elif schema.kind == STRING:
        out["type"] = "string"
    elif schema.kind == INTEGER:
        out["type"] = "integer"
    elif schema.kind == LITERAL_SET:
        out["enum"] = schema.sorted_literals()
    if schema.doc:
        out["description"] = schema.doc
    return out


def _with_doc(compiled: dict, doc: str) -> dict:
    if doc and "description" not in compiled:
        compiled = dict(compiled)
        compiled["description"] = doc
    return compiled


@dataclass(frozen=True)
class Violation:
    path: str
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def describe(self) -> str:
        return "; ".join(f"{v.path}: {v.reason}" for v in self.violations) or "ok"


def validate(value: Any, schema: SchemaNode) -> ValidationReport:
    violations: list[Violation] = []
    _validate(value, schema, "$", violations)
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _validate(value: Any, schema: SchemaNode, path: str, out: list[Violation]) -> None:
    if schema.kind == OBJECT:
        if not isinstance(value, dict):
            out.append(Violation(path, f"expected object, got {_typename(value)}"))
            return
        known = {f.name for f in schema.fields}
        for f in schema.fields:
            if f.name not in value:
                out.append(Violation(path, f"missing required field '{f.name}'"))
            else:
                _validate(value[f.name], f.node, f"{path}.{f.name}", out)
        for key in value:
            if key not in known:
                out.append(Violation(f"{path}.{key}", "unexpected field"))
    elif schema.kind == SEQUENCE:
        if not isinstance(value, list):
            out.append(Violation(path, f"expected array, got {_typename(value)}"))
            return
        if len(value) < schema.min_items:
            out.append(Violation(path, f"expected at least {schema.min_items} items, got {len(value)}"))
        if schema.max_items is not None and len(value) > schema.max_items:
            out.append(Violation(path, f"expected at most {schema.max_items} items, got {len(value)}"))
        for i, item in enumerate(value):
            _validate(item, schema.element, f"{path}[{i}]", out)
    elif schema.kind == STRING:
        if not isinstance(value, str):
            out.append(Violation(path, f"expected string, got {_typename(value)}"))
    elif schema.kind == INTEGER:
        if isinstance(value, bool) or not isinstance(value, int):
            out.append(Violation(path, f"expected integer, got {_typename(value)}"))
    elif schema.kind == LITERAL_SET:
        if not isinstance(value, str) or value not in schema.literals:
            allowed = schema.sorted_literals()
            out.append(Violation(path, f"value {value!r} not in literal set {allowed}"))


def _typename(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    return type(value).__name__


def minimal_instance(schema: SchemaNode) -> Any:
    """Smallest value accepted by the schema.

    Sequences at min length, strings empty, integers 0, literal sets pick
    the first element in sorted order.
    """
    if schema.kind == OBJECT:
        return {f.name: minimal_instance(f.node) for f in schema.fields}
    if schema.kind == SEQUENCE:
        return [minimal_instance(schema.element) for _ in range(schema.min_items)]
    if schema.kind == STRING:
        return ""
    if schema.kind == INTEGER:
        return 0
    return schema.sorted_literals()[0]


def bind_literals(schema: SchemaNode, selector: str, values: Iterable[str]) -> SchemaNode:
    """Replace designated literal_set nodes with a new value set.

    The selector is either a binder name (replaces every literal_set node
    registered under that name) or a dotted field path; path traversal
    descends through sequence elements implicitly. The input tree is not
    modified.
    """
    values = frozenset(values)
    if not values:
        raise InvalidSchemaError("cannot bind an empty literal set")

    count = 0

    def rebind(node: SchemaNode) -> SchemaNode:
        nonlocal count
        if node.kind == LITERAL_SET and node.binder == selector:
            count += 1
            return replace(node, literals=values)
        if node.kind == OBJECT:
            return replace(
                node,
                fields=tuple(FieldSpec(f.name, rebind(f.node), f.doc) for f in node.fields),
            )
        if node.kind == SEQUENCE:
            return replace(node, element=rebind(node.element))
        return node

    bound = rebind(schema)
    if count:
        return bound
    return _bind_at_path(schema, selector.split("."), values)


def _bind_at_path(node: SchemaNode, parts: list[str], values: frozenset[str]) -> SchemaNode:
    if node.kind == SEQUENCE:
        return replace(node, element=_bind_at_path(node.element, parts, values))
    if not parts:
        if node.kind != LITERAL_SET:
            raise SchemaPathError(f"path resolves to a {node.kind} node, not a literal_set")
        return replace(node, literals=values)
    if node.kind != OBJECT:
        raise SchemaPathError(f"cannot descend into a {node.kind} node with field {parts[0]!r}")
    head, rest = parts[0], parts[1:]
    new_fields = []
    hit = False
    for f in node.fields:
        if f.name == head:
            hit = True
            new_fields.append(FieldSpec(f.name, _bind_at_path(f.node, rest, values), f.doc))
        else:
            new_fields.append(f)
    if not hit:
        raise SchemaPathError(f"no field named {head!r} on object node")
    return replace(node, fields=tuple(new_fields))


def iter_literal_sets(schema: SchemaNode) -> Iterator[SchemaNode]:
    """All literal_set nodes in the tree, in definition order."""
    if schema.kind == LITERAL_SET:
        yield schema
    elif schema.kind == OBJECT:
        for f in schema.fields:
            yield from iter_literal_sets(f.node)
    elif schema.kind == SEQUENCE:
        yield from iter_literal_sets(schema.element)

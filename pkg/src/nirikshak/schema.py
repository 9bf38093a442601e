"""Resource schemas, seeded fake-data generation and template population.

A resource schema is a small JSON document::

    {"name": "student", "idField": "id",
     "fields": {"id": {"kind": "uuid"}, "age": {"kind": "integer", "min": 17, "max": 25}}}

Templates are strings or JSON structures containing ``{resource:FIELD}``
placeholders (``FIELD`` may be a dot path into ``object`` fields).
"""

from __future__ import annotations

import datetime as _dt
import json
import random
import re
import uuid
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import SchemaError, TemplateError

KINDS = (
    "name",
    "address",
    "email",
    "uuid",
    "integer",
    "float",
    "boolean",
    "date",
    "enum",
    "text",
    "object",
    "array",
)
ID_KINDS = ("uuid", "integer")

PLACEHOLDER = re.compile(r"\{resource:([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\}")

_FIRST = (
    "Aarav", "Zoe", "Priya", "Liam", "Meera", "Noah", "Ishaan", "Emma", "Kabir",
    "Olivia", "Ananya", "Lucas", "Diya", "Mia", "Rohan", "Sara", "Arjun", "Nina",
)
_LAST = (
    "Sharma", "Smith", "Verma", "Garcia", "Iyer", "Brown", "Khan", "Lee", "Patel",
    "Martin", "Reddy", "Wilson", "Gupta", "Lopez", "Nair", "Clark",
)
_STREETS = ("Maple", "Oak", "Station", "Lake", "Hill", "Church", "Park", "Temple", "Mill")
_SUFFIX = ("Street", "Road", "Avenue", "Lane", "Marg")
_CITIES = ("Bhopal", "Springfield", "Indore", "Riverton", "Pune", "Fairview", "Jaipur")
_WORDS = (
    "lorem", "ipsum", "dolor", "sit", "amet", "consectetur", "adipiscing", "elit",
    "sed", "do", "eiusmod", "tempor", "incididunt", "labore", "magna", "aliqua",
)
_EPOCH = _dt.date(1990, 1, 1)

_INT_DEFAULT = (0, 1000)
_INT_ID_DEFAULT = (1, 2**31 - 1)


@dataclass(frozen=True, eq=True)
class FieldSpec:
    kind: str
    optional: bool = False
    minimum: float | None = None
    maximum: float | None = None
    choices: tuple = ()
    element: FieldSpec | None = None
    min_len: int = 0
    max_len: int = 3
    fields: Mapping[str, FieldSpec] = field(default_factory=dict)

    def bounds(self, *, is_id: bool = False) -> tuple:
        if self.kind == "integer":
            lo, hi = _INT_ID_DEFAULT if is_id else _INT_DEFAULT
            lo = int(self.minimum) if self.minimum is not None else lo
            hi = int(self.maximum) if self.maximum is not None else max(hi, lo)
            return lo, hi
        if self.kind == "float":
            lo = float(self.minimum) if self.minimum is not None else 0.0
            hi = float(self.maximum) if self.maximum is not None else max(1000.0, lo)
            return lo, hi
        raise TypeError(f"no numeric bounds for kind {self.kind!r}")


@dataclass(frozen=True)
class ResourceSchema:
    name: str
    id_field: str
    fields: Mapping[str, FieldSpec]

    def id_of(self, instance: ResourceInstance | Mapping[str, Any]) -> Any:
        values = instance.values if isinstance(instance, ResourceInstance) else instance
        return values[self.id_field]

    def resolve(self, path: str) -> FieldSpec:
        """Field spec at a dot path, or ``KeyError``."""
        spec: FieldSpec | None = None
        fields = self.fields
        for part in path.split("."):
            if fields is None or part not in fields:
                raise KeyError(path)
            spec = fields[part]
            fields = spec.fields if spec.kind == "object" else None
        assert spec is not None
        return spec


@dataclass(frozen=True)
class ResourceInstance:
    resource: str
    values: Mapping[str, Any]

    def to_json(self) -> str:
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"))


# --------------------------------------------------------------------------
# parsing


def _parse_field(name: str, doc: Any) -> FieldSpec:
    if not isinstance(doc, dict):
        raise SchemaError(f"field {name!r}: expected an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"field {name!r}: unknown kind {kind!r}")
    optional = bool(doc.get("optional", False))

    if kind in ("integer", "float"):
        lo, hi = doc.get("min"), doc.get("max")
        for label, v in (("min", lo), ("max", hi)):
            if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
                raise SchemaError(f"field {name!r}: {label} must be a number")
            if kind == "integer" and v is not None and int(v) != v:
                raise SchemaError(f"field {name!r}: {label} must be an integer")
        if lo is not None and hi is not None and lo > hi:
            raise SchemaError(f"field {name!r}: min {lo} > max {hi}")
        return FieldSpec(kind, optional, minimum=lo, maximum=hi)

    if kind == "enum":
        choices = doc.get("choices")
        if not isinstance(choices, list) or not choices:
            raise SchemaError(f"field {name!r}: enum needs a non-empty 'choices' list")
        if len({json.dumps(c, sort_keys=True) for c in choices}) != len(choices):
            raise SchemaError(f"field {name!r}: duplicate enum choices")
        return FieldSpec(kind, optional, choices=tuple(choices))

    if kind == "array":
        if "items" not in doc:
            raise SchemaError(f"field {name!r}: array needs 'items'")
        element = _parse_field(f"{name}[]", doc["items"])
        lo, hi = doc.get("minLen", 0), doc.get("maxLen", 3)
        if not (isinstance(lo, int) and isinstance(hi, int) and 0 <= lo <= hi):
            raise SchemaError(f"field {name!r}: need 0 <= minLen <= maxLen")
        return FieldSpec(kind, optional, element=element, min_len=lo, max_len=hi)

    if kind == "object":
        children = doc.get("fields")
        if not isinstance(children, dict) or not children:
            raise SchemaError(f"field {name!r}: object needs a non-empty 'fields' map")
        return FieldSpec(kind, optional, fields=_parse_fields(children, prefix=f"{name}."))

    return FieldSpec(kind, optional)


def _parse_fields(doc: dict, prefix: str = "") -> dict[str, FieldSpec]:
    out = {}
    for fname, fdoc in doc.items():
        if not isinstance(fname, str) or not fname.strip():
            raise SchemaError("field names must be non-empty strings")
        if not re.fullmatch(r"[A-Za-z_]\w*", fname):
            raise SchemaError(f"field {prefix}{fname!r}: names must be identifiers")
        out[fname] = _parse_field(prefix + fname, fdoc)
    return out


def parse_resource_schema(document: str | bytes) -> ResourceSchema:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise SchemaError("schema document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z_][\w-]*", name):
        raise SchemaError(f"resource name must be an identifier, got {name!r}")
    id_field = doc.get("idField")
    if isinstance(id_field, list):
        raise SchemaError("exactly one idField is allowed")
    if not isinstance(id_field, str) or not id_field:
        raise SchemaError("missing idField")
    raw_fields = doc.get("fields")
    if not isinstance(raw_fields, dict) or not raw_fields:
        raise SchemaError("schema needs a non-empty 'fields' map")
    fields = _parse_fields(raw_fields)
    if id_field not in fields:
        raise SchemaError(f"idField {id_field!r} is not a declared field")
    id_spec = fields[id_field]
    if id_spec.kind not in ID_KINDS:
        raise SchemaError(f"idField {id_field!r} must be uuid or integer, got {id_spec.kind}")
    if id_spec.optional:
        raise SchemaError(f"idField {id_field!r} cannot be optional")
    return ResourceSchema(name, id_field, fields)


# --------------------------------------------------------------------------
# generation


def _gen_value(spec: FieldSpec, rng: random.Random, *, is_id: bool = False) -> Any:
    kind = spec.kind
    if kind == "name":
        return f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
    if kind == "address":
        return (
            f"{rng.randint(1, 999)} {rng.choice(_STREETS)} {rng.choice(_SUFFIX)}, "
            f"{rng.choice(_CITIES)}"
        )
    if kind == "email":
        return (
            f"{rng.choice(_FIRST).lower()}.{rng.choice(_LAST).lower()}"
            f"{rng.randint(1, 9999)}@example.com"
        )
    if kind == "uuid":
        return str(uuid.UUID(int=rng.getrandbits(128), version=4))
    if kind == "integer":
        lo, hi = spec.bounds(is_id=is_id)
        return rng.randint(lo, hi)
    if kind == "float":
        lo, hi = spec.bounds()
        return min(hi, max(lo, round(rng.uniform(lo, hi), 4)))
    if kind == "boolean":
        return rng.random() < 0.5
    if kind == "date":
        return (_EPOCH + _dt.timedelta(days=rng.randint(0, 12000))).isoformat()
    if kind == "enum":
        return spec.choices[rng.randrange(len(spec.choices))]
    if kind == "text":
        return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(3, 8)))
    if kind == "object":
        return _gen_fields(spec.fields, rng)
    if kind == "array":
        assert spec.element is not None
        n = rng.randint(spec.min_len, spec.max_len)
        return [_gen_value(spec.element, rng) for _ in range(n)]
    raise AssertionError(kind)


def _gen_fields(fields: Mapping[str, FieldSpec], rng: random.Random, id_field: str | None = None) -> dict:
    out = {}
    for name, spec in fields.items():
        # draw the coin even for required fields so optionality never shifts the stream
        present = rng.random() < 0.5 or not spec.optional
        value = _gen_value(spec, rng, is_id=name == id_field)
        if present:
            out[name] = value
    return out


def generate_instance(schema: ResourceSchema, rng: random.Random) -> ResourceInstance:
    """Draw one instance; deterministic in the state of ``rng``."""
    return ResourceInstance(schema.name, _gen_fields(schema.fields, rng, schema.id_field))


def validate_instance(schema: ResourceSchema, values: Mapping[str, Any]) -> list[str]:
    """Return a list of constraint violations (empty when the instance conforms)."""
    problems: list[str] = []

    def check(path: str, spec: FieldSpec, v: Any, is_id: bool = False) -> None:
        k = spec.kind
        if k in ("name", "address", "email", "text", "uuid", "date"):
            if not isinstance(v, str) or not v:
                problems.append(f"{path}: expected non-empty string")
                return
            if k == "uuid":
                try:
                    uuid.UUID(v)
                except ValueError:
                    problems.append(f"{path}: not a uuid")
            elif k == "date":
                try:
                    _dt.date.fromisoformat(v)
                except ValueError:
                    problems.append(f"{path}: not an ISO date")
            elif k == "email" and "@" not in v:
                problems.append(f"{path}: not an email")
        elif k == "integer":
            if isinstance(v, bool) or not isinstance(v, int):
                problems.append(f"{path}: expected integer")
                return
            lo, hi = spec.bounds(is_id=is_id)
            if not lo <= v <= hi:
                problems.append(f"{path}: {v} outside [{lo}, {hi}]")
        elif k == "float":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                problems.append(f"{path}: expected number")
                return
            lo, hi = spec.bounds()
            if not lo <= v <= hi:
                problems.append(f"{path}: {v} outside [{lo}, {hi}]")
        elif k == "boolean":
            if not isinstance(v, bool):
                problems.append(f"{path}: expected boolean")
        elif k == "enum":
            if v not in spec.choices:
                problems.append(f"{path}: {v!r} not in choices")
        elif k == "object":
            if not isinstance(v, dict):
                problems.append(f"{path}: expected object")
                return
            check_fields(path + ".", spec.fields, v)
        elif k == "array":
            if not isinstance(v, list):
                problems.append(f"{path}: expected array")
                return
            if not spec.min_len <= len(v) <= spec.max_len:
                problems.append(f"{path}: length {len(v)} outside bounds")
            for i, item in enumerate(v):
                check(f"{path}[{i}]", spec.element, item)

    def check_fields(prefix: str, fields: Mapping[str, FieldSpec], vals: Mapping[str, Any]) -> None:
        for extra in set(vals) - set(fields):
            problems.append(f"{prefix}{extra}: not in schema")
        for name, spec in fields.items():
            if name not in vals:
                if not spec.optional:
                    problems.append(f"{prefix}{name}: missing")
                continue
            check(prefix + name, spec, vals[name], is_id=not prefix and name == schema.id_field)

    check_fields("", schema.fields, values)
    return problems


# --------------------------------------------------------------------------
# templates


def template_fields(template: Any) -> set[str]:
    """All placeholder paths appearing anywhere in ``template``."""
    found: set[str] = set()
    if isinstance(template, str):
        found.update(PLACEHOLDER.findall(template))
    elif isinstance(template, dict):
        for v in template.values():
            found |= template_fields(v)
    elif isinstance(template, list):
        for v in template:
            found |= template_fields(v)
    return found


def check_template(template: Any, schema: ResourceSchema) -> None:
    for path in sorted(template_fields(template)):
        try:
            schema.resolve(path)
        except KeyError:
            raise TemplateError(
                f"placeholder {{resource:{path}}} names no field of {schema.name!r}"
            ) from None


def stringify(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, separators=(",", ":"), sort_keys=True)


def _lookup(values: Mapping[str, Any], path: str) -> Any:
    cur: Any = values
    for part in path.split("."):
        if not isinstance(cur, Mapping) or part not in cur:
            raise TemplateError(f"instance has no value for field {path!r}")
        cur = cur[part]
    return cur


def populate_template(template: Any, instance: ResourceInstance, *, as_text: bool = False) -> Any:
    """Substitute placeholders with the instance's values.

    A string that is exactly one placeholder keeps the value's JSON type
    unless ``as_text`` is set (URL, header and query positions). Placeholders
    embedded in longer strings are always stringified.
    """
    if isinstance(template, str):
        m = PLACEHOLDER.fullmatch(template)
        if m and not as_text:
            return _lookup(instance.values, m.group(1))
        return PLACEHOLDER.sub(lambda mm: stringify(_lookup(instance.values, mm.group(1))), template)
    if isinstance(template, dict):
        return {k: populate_template(v, instance, as_text=as_text) for k, v in template.items()}
    if isinstance(template, list):
        return [populate_template(v, instance, as_text=as_text) for v in template]
    return template

"""Machine-readable parameter specs and the rule-based validity oracle.

The oracle decides ground truth for generated corpora and for scoring: it
checks each entry's value shape (syntax), its value domain (range), parameter
dependencies, and version applicability, and reports one violation per fault.

Check precedence per entry is version, then syntax, then range; dependency
constraints are evaluated last and are skipped when an operand already failed
a value-level check (a broken value cannot be compared meaningfully).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .config_model import ConfigFile, ConfigFormat
from .errors import DependencyEvalError, SpecError, UnknownParameterError


class ValueKind(Enum):
    INTEGER = "integer"
    FLOAT = "float"
    LONG = "long"
    BOOLEAN = "boolean"
    STRING = "string"
    PATH = "path"
    URL = "url"
    IP_ADDRESS = "ip_address"
    PORT = "port"
    PERMISSION = "permission"
    ENUM = "enum"
    NUMBER_WITH_UNIT = "number_with_unit"


class Comparator(Enum):
    GT = ">"
    GE = ">="
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="

    def negate(self) -> "Comparator":
        return _NEGATION[self]


_NEGATION = {
    Comparator.GT: Comparator.LE,
    Comparator.LE: Comparator.GT,
    Comparator.GE: Comparator.LT,
    Comparator.LT: Comparator.GE,
    Comparator.EQ: Comparator.NE,
    Comparator.NE: Comparator.EQ,
}


class Category(Enum):
    SYNTAX = "syntax"
    RANGE = "range"
    DEPENDENCY = "dependency"
    VERSION = "version"


class Subcategory(Enum):
    """The 15 violation sub-categories; each knows its category."""

    SYNTAX_DATA_TYPE = "syntax/data_type"
    SYNTAX_PATH = "syntax/path"
    SYNTAX_URL = "syntax/url"
    SYNTAX_IP_ADDRESS = "syntax/ip_address"
    SYNTAX_PORT = "syntax/port"
    SYNTAX_PERMISSION = "syntax/permission"
    RANGE_NUMERIC = "range/basic_numeric"
    RANGE_BOOL = "range/bool"
    RANGE_ENUM = "range/enum"
    RANGE_IP_ADDRESS = "range/ip_address"
    RANGE_PORT = "range/port"
    RANGE_PERMISSION = "range/permission"
    DEPENDENCY_CONTROL = "dependency/control"
    DEPENDENCY_VALUE_RELATIONSHIP = "dependency/value_relationship"
    VERSION_PARAMETER_CHANGE = "version/parameter_change"

    @property
    def category(self) -> Category:
        return Category(self.value.split("/", 1)[0])


ALL_SUBCATEGORIES = tuple(Subcategory)


class DependencyKind(Enum):
    CONTROL = "control"
    VALUE_RELATIONSHIP = "value_relationship"


@dataclass(frozen=True)
class DependencyConstraint:
    """Either p2's presence is gated on p1 comparing to a literal value
    (control), or p1's value must compare to p2's value (value relationship)."""

    kind: DependencyKind
    p1: str
    p2: str
    comparator: Comparator
    value: str | None = None

    def __post_init__(self):
        if self.p1 == self.p2:
            raise ValueError("dependency must relate two distinct parameters")
        if self.kind is DependencyKind.CONTROL and self.value is None:
            raise ValueError("control dependency requires a literal value")
        if self.kind is DependencyKind.VALUE_RELATIONSHIP and self.value is not None:
            raise ValueError("value relationship must not carry a literal value")


@dataclass(frozen=True)
class VersionChange:
    v1: str
    v2: str
    removed_in_v2: frozenset[str] = field(default_factory=frozenset)
    added_in_v2: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.v1 == self.v2:
            raise ValueError("version change needs two distinct versions")
        object.__setattr__(self, "removed_in_v2", frozenset(self.removed_in_v2))
        object.__setattr__(self, "added_in_v2", frozenset(self.added_in_v2))
        if self.removed_in_v2 & self.added_in_v2:
            raise ValueError("a parameter cannot be both removed and added in v2")


# numeric_range only makes sense where the value parses as one number
_RANGED_KINDS = {
    ValueKind.INTEGER,
    ValueKind.LONG,
    ValueKind.FLOAT,
    ValueKind.PORT,
    ValueKind.PERMISSION,
}

_KIND_RANGE_CAP = {
    ValueKind.PORT: (0, 65535),
    ValueKind.PERMISSION: (0, 777),
}


@dataclass(frozen=True)
class ParameterSpec:
    """The correctness spec of one parameter."""

    name: str
    project: str
    kind: ValueKind
    numeric_range: tuple[float, float] | None = None
    default_value: str | None = None
    options: tuple[str, ...] = ()
    units: tuple[str, ...] = ()
    description: str | None = None
    dependencies: tuple[DependencyConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "dependencies", tuple(self.dependencies))
        if self.kind is ValueKind.ENUM and not self.options:
            raise ValueError(f"{self.name}: enum kind requires options")
        if self.kind is ValueKind.NUMBER_WITH_UNIT and not self.units:
            raise ValueError(f"{self.name}: number_with_unit kind requires units")
        if self.numeric_range is not None:
            lo, hi = self.numeric_range
            if lo > hi:
                raise ValueError(f"{self.name}: empty numeric range [{lo}, {hi}]")
            if self.kind not in _RANGED_KINDS:
                raise ValueError(f"{self.name}: numeric_range not applicable to {self.kind.value}")
            cap = _KIND_RANGE_CAP.get(self.kind)
            if cap and not (cap[0] <= lo and hi <= cap[1]):
                raise ValueError(f"{self.name}: range must stay within {list(cap)}")


@dataclass(frozen=True)
class Violation:
    subcategory: Subcategory
    parameter: str
    detail: str

    @property
    def category(self) -> Category:
        return self.subcategory.category


@dataclass(frozen=True)
class SpecSet:
    """All specs, dependencies and version history for one project."""

    project: str
    version: str
    file_format: ConfigFormat
    parameters: dict[str, ParameterSpec]
    dependencies: tuple[DependencyConstraint, ...] = ()
    version_changes: tuple[VersionChange, ...] = ()

    def version_known_names(self) -> frozenset[str]:
        names: set[str] = set()
        for change in self.version_changes:
            names |= change.removed_in_v2 | change.added_in_v2
        return frozenset(names)


def build_spec_set(
    project: str,
    version: str,
    file_format: ConfigFormat,
    parameters: list[ParameterSpec],
    dependencies: list[DependencyConstraint] = (),
    version_changes: list[VersionChange] = (),
) -> SpecSet:
    """Assemble a SpecSet, attaching each constraint to both its parameters."""
    dependencies = tuple(dependencies)
    by_name: dict[str, ParameterSpec] = {}
    for spec in parameters:
        if spec.name in by_name:
            raise SpecError(f"duplicate parameter spec: {spec.name}")
        involved = tuple(c for c in dependencies if spec.name in (c.p1, c.p2))
        by_name[spec.name] = replace(spec, project=project, dependencies=involved)
    for c in dependencies:
        for p in (c.p1, c.p2):
            if p not in by_name:
                raise SpecError(f"dependency references unknown parameter: {p}")
    return SpecSet(
        project=project,
        version=version,
        file_format=file_format,
        parameters=by_name,
        dependencies=dependencies,
        version_changes=tuple(version_changes),
    )


# --- sub-category assignment ---

_SYNTAX_SUBCAT = {
    ValueKind.INTEGER: Subcategory.SYNTAX_DATA_TYPE,
    ValueKind.LONG: Subcategory.SYNTAX_DATA_TYPE,
    ValueKind.FLOAT: Subcategory.SYNTAX_DATA_TYPE,
    ValueKind.BOOLEAN: Subcategory.SYNTAX_DATA_TYPE,
    ValueKind.NUMBER_WITH_UNIT: Subcategory.SYNTAX_DATA_TYPE,
    ValueKind.PATH: Subcategory.SYNTAX_PATH,
    ValueKind.URL: Subcategory.SYNTAX_URL,
    ValueKind.IP_ADDRESS: Subcategory.SYNTAX_IP_ADDRESS,
    ValueKind.PORT: Subcategory.SYNTAX_PORT,
    ValueKind.PERMISSION: Subcategory.SYNTAX_PERMISSION,
}

_RANGE_SUBCAT = {
    ValueKind.INTEGER: Subcategory.RANGE_NUMERIC,
    ValueKind.LONG: Subcategory.RANGE_NUMERIC,
    ValueKind.FLOAT: Subcategory.RANGE_NUMERIC,
    ValueKind.BOOLEAN: Subcategory.RANGE_BOOL,
    ValueKind.ENUM: Subcategory.RANGE_ENUM,
    ValueKind.IP_ADDRESS: Subcategory.RANGE_IP_ADDRESS,
    ValueKind.PORT: Subcategory.RANGE_PORT,
    ValueKind.PERMISSION: Subcategory.RANGE_PERMISSION,
}


def assign_subcategories(spec: ParameterSpec) -> frozenset[Subcategory]:
    """Every sub-category whose specification this parameter satisfies."""
    out: set[Subcategory] = set()
    if spec.kind in _SYNTAX_SUBCAT:
        out.add(_SYNTAX_SUBCAT[spec.kind])
    if spec.kind in _RANGE_SUBCAT:
        out.add(_RANGE_SUBCAT[spec.kind])
    for c in spec.dependencies:
        if c.kind is DependencyKind.CONTROL and c.p2 == spec.name:
            out.add(Subcategory.DEPENDENCY_CONTROL)
        if c.kind is DependencyKind.VALUE_RELATIONSHIP and c.p1 == spec.name:
            out.add(Subcategory.DEPENDENCY_VALUE_RELATIONSHIP)
    return frozenset(out)


# --- syntax checks ---
# URL and IP patterns are kept exactly as published (the IP pattern's dot is
# an unescaped any-char); the range step then demands dotted-quad structure.

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_WORD_RE = re.compile(r"^[A-Za-z]+$")
_DIGITS_RE = re.compile(r"^\d+$")
_PERMISSION_RE = re.compile(r"^\d{3}$")
_URL_RE = re.compile(r"[a-z]+://.*")
_IP_RE = re.compile(r"[\d]{1,3}(.[\d]{1,3}){3}")
# Path segments must be non-empty and space-free; bare "/" allowed.
_PATH_RE = re.compile(r"^(/[^/ ]+)+/?$")

_INT32 = (-(2**31), 2**31 - 1)
_INT64 = (-(2**63), 2**63 - 1)
_FLOAT_MAX = 1.7976931348623157e308


def _number_with_unit_re(units: tuple[str, ...]) -> re.Pattern:
    alts = "|".join(re.escape(u) for u in units)
    return re.compile(r"^[+-]?(\d+\.?\d*|\.\d+) ?(" + alts + r")$")


def _syntax_ok(spec: ParameterSpec, value: str) -> bool:
    kind = spec.kind
    if kind in (ValueKind.INTEGER, ValueKind.LONG):
        return bool(_INT_RE.match(value))
    if kind is ValueKind.FLOAT:
        return bool(_FLOAT_RE.match(value))
    if kind is ValueKind.BOOLEAN:
        return bool(_WORD_RE.match(value))
    if kind is ValueKind.NUMBER_WITH_UNIT:
        return bool(_number_with_unit_re(spec.units).match(value))
    if kind is ValueKind.PATH:
        return value == "/" or bool(_PATH_RE.match(value))
    if kind is ValueKind.URL:
        return bool(_URL_RE.fullmatch(value))
    if kind is ValueKind.IP_ADDRESS:
        return bool(_IP_RE.fullmatch(value))
    if kind is ValueKind.PORT:
        return bool(_DIGITS_RE.match(value))
    if kind is ValueKind.PERMISSION:
        return bool(_PERMISSION_RE.match(value))
    return True  # STRING, ENUM: no syntactic shape


def _syntax_detail(spec: ParameterSpec, value: str) -> str:
    kind = spec.kind
    if kind is ValueKind.NUMBER_WITH_UNIT:
        return f"value {value!r} is not a number with one of the units {sorted(spec.units)}"
    if kind in (ValueKind.INTEGER, ValueKind.LONG, ValueKind.FLOAT, ValueKind.BOOLEAN):
        return f"value {value!r} is not a valid {kind.value}"
    return f"value {value!r} is not a well-formed {kind.value}"


def _numeric_bounds(spec: ParameterSpec) -> tuple[float, float]:
    if spec.numeric_range is not None:
        return spec.numeric_range
    if spec.kind is ValueKind.INTEGER:
        return _INT32
    if spec.kind is ValueKind.LONG:
        return _INT64
    return (-_FLOAT_MAX, _FLOAT_MAX)


def _range_violation(spec: ParameterSpec, value: str) -> str | None:
    kind = spec.kind
    if kind in (ValueKind.INTEGER, ValueKind.LONG, ValueKind.FLOAT):
        number = float(value) if kind is ValueKind.FLOAT else int(value)
        lo, hi = _numeric_bounds(spec)
        if not (lo <= number <= hi):
            return f"value {value} is outside the valid range [{lo}, {hi}]"
        return None
    if kind is ValueKind.BOOLEAN:
        if value.lower() not in ("true", "false"):
            return f"value {value!r} must be true or false"
        return None
    if kind is ValueKind.ENUM:
        if value not in spec.options:
            return f"value {value!r} must be one of {list(spec.options)}"
        return None
    if kind is ValueKind.IP_ADDRESS:
        parts = value.split(".")
        if len(parts) != 4 or not all(_DIGITS_RE.match(p) for p in parts):
            return f"value {value!r} is not a dotted quad of octets"
        for p in parts:
            if int(p) > 255:
                return f"octet {p} exceeds 255"
        return None
    if kind is ValueKind.PORT:
        lo, hi = spec.numeric_range or (0, 65535)
        port = int(value)
        if not (lo <= port <= hi):
            return f"value {value} exceeds port range [{int(lo)}, {int(hi)}]"
        return None
    if kind is ValueKind.PERMISSION:
        if any(digit > "7" for digit in value):
            return f"value {value} has a digit outside the octal range [000, 777]"
        return None
    return None


def value_violation(spec: ParameterSpec, value: str) -> Violation | None:
    """Syntax check first, then range; at most one violation per value."""
    if not _syntax_ok(spec, value):
        return Violation(_SYNTAX_SUBCAT[spec.kind], spec.name, _syntax_detail(spec, value))
    detail = _range_violation(spec, value)
    if detail is not None:
        return Violation(_RANGE_SUBCAT[spec.kind], spec.name, detail)
    return None


# --- dependency evaluation ---

_NUMERIC_OPS = {
    Comparator.GT: lambda a, b: a > b,
    Comparator.GE: lambda a, b: a >= b,
    Comparator.EQ: lambda a, b: a == b,
    Comparator.NE: lambda a, b: a != b,
    Comparator.LT: lambda a, b: a < b,
    Comparator.LE: lambda a, b: a <= b,
}


def _as_number(value: str) -> float | None:
    if _INT_RE.match(value) or _FLOAT_RE.match(value):
        return float(value)
    return None


def compare_values(a: str, comparator: Comparator, b: str) -> bool:
    """Numeric comparison when both sides parse as numbers, string equality
    otherwise; ordering comparators demand numeric operands."""
    na, nb = _as_number(a), _as_number(b)
    if na is not None and nb is not None:
        return _NUMERIC_OPS[comparator](na, nb)
    if comparator is Comparator.EQ:
        return a == b
    if comparator is Comparator.NE:
        return a != b
    raise DependencyEvalError(
        f"comparator {comparator.value!r} needs numeric operands, got {a!r} and {b!r}"
    )


def _resolve(name: str, file: ConfigFile, specs: SpecSet) -> str | None:
    entry = file.get(name)
    if entry is not None:
        return entry.value
    spec = specs.parameters.get(name)
    if spec is not None:
        return spec.default_value
    return None


def check_dependency(
    c: DependencyConstraint, file: ConfigFile, specs: SpecSet
) -> Violation | None:
    """Evaluate one constraint against configured (or default) values.

    Control violations land on p2 (the parameter set without its enabling
    condition); value-relationship violations land on p1. Constraints with an
    unresolvable operand are skipped, mirroring systems whose defaults satisfy
    their own constraints.
    """
    if c.kind is DependencyKind.CONTROL:
        v1 = _resolve(c.p1, file, specs)
        if v1 is None or file.get(c.p2) is None:
            return None
        if not compare_values(v1, c.comparator, c.value):
            return Violation(
                Subcategory.DEPENDENCY_CONTROL,
                c.p2,
                f"{c.p2!r} is set but requires {c.p1!r} {c.comparator.value} "
                f"{c.value!r} (found {v1!r})",
            )
        return None
    v1 = _resolve(c.p1, file, specs)
    v2 = _resolve(c.p2, file, specs)
    if v1 is None or v2 is None:
        return None
    if not compare_values(v1, c.comparator, v2):
        return Violation(
            Subcategory.DEPENDENCY_VALUE_RELATIONSHIP,
            c.p1,
            f"{c.p1!r}={v1} violates {c.p1} {c.comparator.value} {c.p2} "
            f"(found {c.p2!r}={v2})",
        )
    return None


def _version_violation(
    name: str, file_version: str, changes: tuple[VersionChange, ...]
) -> Violation | None:
    for change in changes:
        if file_version == change.v2 and name in change.removed_in_v2:
            return Violation(
                Subcategory.VERSION_PARAMETER_CHANGE,
                name,
                f"parameter was removed in version {change.v2}",
            )
        if file_version == change.v1 and name in change.added_in_v2:
            return Violation(
                Subcategory.VERSION_PARAMETER_CHANGE,
                name,
                f"parameter is not introduced until version {change.v2}",
            )
    return None


def oracle_validate(
    file: ConfigFile,
    specs: SpecSet,
    version_changes: tuple[VersionChange, ...] | None = None,
) -> list[Violation]:
    """Return exactly the violations present in the file; [] means valid.

    Every entry must have a spec or appear in a version-change record;
    anything else raises UnknownParameterError.
    """
    changes = specs.version_changes if version_changes is None else tuple(version_changes)
    version_names = set()
    for change in changes:
        version_names |= change.removed_in_v2 | change.added_in_v2

    violations: list[Violation] = []
    flagged: set[str] = set()
    for entry in file.entries:
        spec = specs.parameters.get(entry.name)
        if spec is None and entry.name not in version_names:
            raise UnknownParameterError(
                f"no spec and no version record for parameter {entry.name!r}"
            )
        v = _version_violation(entry.name, file.version, changes)
        if v is not None:
            violations.append(v)
            flagged.add(entry.name)
            continue
        if spec is None:
            continue  # version-known only; no value spec to check against
        v = value_violation(spec, entry.value)
        if v is not None:
            violations.append(v)
            flagged.add(entry.name)

    for c in specs.dependencies:
        if c.p1 in flagged or c.p2 in flagged:
            continue  # a value-level fault shadows constraints touching it
        v = check_dependency(c, file, specs)
        if v is not None:
            violations.append(v)
    return violations


# --- spec documents on disk ---

SPEC_SCHEMA_VERSION = 1


def spec_set_to_dict(specs: SpecSet) -> dict:
    params = []
    for spec in specs.parameters.values():
        item: dict = {"name": spec.name, "kind": spec.kind.value}
        if spec.numeric_range is not None:
            item["range"] = list(spec.numeric_range)
        if spec.default_value is not None:
            item["default"] = spec.default_value
        if spec.options:
            item["options"] = list(spec.options)
        if spec.units:
            item["units"] = list(spec.units)
        if spec.description is not None:
            item["description"] = spec.description
        params.append(item)
    deps = []
    for c in specs.dependencies:
        item = {"kind": c.kind.value, "p1": c.p1, "p2": c.p2, "comparator": c.comparator.value}
        if c.value is not None:
            item["value"] = c.value
        deps.append(item)
    changes = [
        {
            "v1": ch.v1,
            "v2": ch.v2,
            "removed_in_v2": sorted(ch.removed_in_v2),
            "added_in_v2": sorted(ch.added_in_v2),
        }
        for ch in specs.version_changes
    ]
    return {
        "schema_version": SPEC_SCHEMA_VERSION,
        "project": specs.project,
        "version": specs.version,
        "file_format": specs.file_format.value,
        "parameters": params,
        "dependencies": deps,
        "version_changes": changes,
    }


def spec_set_from_dict(doc: dict) -> SpecSet:
    try:
        project = doc["project"]
        version = doc["version"]
        file_format = ConfigFormat(doc.get("file_format", "xml"))
        params = []
        for item in doc["parameters"]:
            rng = item.get("range")
            params.append(
                ParameterSpec(
                    name=item["name"],
                    project=project,
                    kind=ValueKind(item["kind"]),
                    numeric_range=tuple(rng) if rng is not None else None,
                    default_value=item.get("default"),
                    options=tuple(item.get("options", ())),
                    units=tuple(item.get("units", ())),
                    description=item.get("description"),
                )
            )
        deps = [
            DependencyConstraint(
                kind=DependencyKind(item["kind"]),
                p1=item["p1"],
                p2=item["p2"],
                comparator=Comparator(item["comparator"]),
                value=item.get("value"),
            )
            for item in doc.get("dependencies", ())
        ]
        changes = [
            VersionChange(
                v1=item["v1"],
                v2=item["v2"],
                removed_in_v2=frozenset(item.get("removed_in_v2", ())),
                added_in_v2=frozenset(item.get("added_in_v2", ())),
            )
            for item in doc.get("version_changes", ())
        ]
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"invalid spec document: {exc}") from exc
    return build_spec_set(project, version, file_format, params, deps, changes)


def load_spec_set(path: str | Path) -> SpecSet:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec document {path}: {exc}") from exc
    return spec_set_from_dict(doc)


def save_spec_set(specs: SpecSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(spec_set_to_dict(specs), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

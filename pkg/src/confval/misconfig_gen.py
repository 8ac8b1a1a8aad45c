"""Labeled corpus generation: valid files and single-fault misconfigured files.

Every produced file is checked against the rule oracle before it is accepted:
a misconfigured file must yield exactly its injected violation, a valid file
none at all. Generation retries with fresh draws when a random combination of
companion values trips an unrelated constraint, so the published corpus is
sound by construction. All randomness flows through one seeded generator,
making a dataset a pure function of (specs, seed).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .config_model import (
    ConfigEntry,
    ConfigFile,
    ConfigFormat,
    render_config,
)
from .constraints import (
    ALL_SUBCATEGORIES,
    Comparator,
    DependencyConstraint,
    DependencyKind,
    ParameterSpec,
    SpecSet,
    Subcategory,
    ValueKind,
    VersionChange,
    assign_subcategories,
    compare_values,
    oracle_validate,
    value_violation,
)
from .errors import GenerationError, SpecError

MAX_ATTEMPTS = 40
ENTRIES_PER_FILE = 8
SAMPLE_PER_SUBCATEGORY = 5


class Label(Enum):
    VALID = "valid"
    MISCONFIG = "misconfig"


@dataclass(frozen=True)
class InjectedFault:
    parameter: str
    subcategory: Subcategory
    reason: str

    @property
    def category(self):
        return self.subcategory.category


@dataclass(frozen=True)
class LabeledFile:
    """A config file with its ground truth; bucket records the sampling
    sub-category (for valid files too, where no fault exists)."""

    file: ConfigFile
    label: Label
    injected: InjectedFault | None = None
    bucket: Subcategory | None = None

    def __post_init__(self):
        if (self.label is Label.MISCONFIG) != (self.injected is not None):
            raise ValueError("misconfig label and injected fault must come together")
        if self.injected is not None and self.file.get(self.injected.parameter) is None:
            raise ValueError(
                f"injected parameter {self.injected.parameter!r} missing from file"
            )


@dataclass(frozen=True)
class DatasetSplit:
    shot_pool: tuple[LabeledFile, ...]
    eval_set: tuple[LabeledFile, ...]

    def __post_init__(self):
        object.__setattr__(self, "shot_pool", tuple(self.shot_pool))
        object.__setattr__(self, "eval_set", tuple(self.eval_set))
        shot_keys = {lf.file.content_key() for lf in self.shot_pool}
        eval_keys = {lf.file.content_key() for lf in self.eval_set}
        if shot_keys & eval_keys:
            raise ValueError("shot pool and eval set share file content")
        per_subcat: dict[Subcategory, int] = {}
        for lf in self.shot_pool:
            if lf.label is Label.MISCONFIG:
                sc = lf.injected.subcategory
                per_subcat[sc] = per_subcat.get(sc, 0) + 1
        if any(count > 1 for count in per_subcat.values()):
            raise ValueError("shot pool holds more than one misconfig per sub-category")


# --- single-value generators ---

_VALID_STRINGS = ("default", "primary", "standard", "worker", "production", "replica")
_VALID_PATHS = ("/var/log/app", "/data/store", "/tmp/cache", "/opt/service/run")
_VALID_URLS = (
    "hdfs://node-1:9000/data",
    "http://127.0.0.1:8080/status",
    "file:///var/tmp",
    "https://metrics.example.org/push",
)
_PLAUSIBLE_VERSION_VALUES = ("1", "true", "/tmp/data", "enabled")

_BAD_INT = ("true", "none", "fourty", "12x4", "1 000")
_BAD_FLOAT = ("abc", "1.2.3", "12,5", "half")
_BAD_BOOL = ("tru3", "y3s", "0n", "3nabled")
_BAD_PATH = ("/hello//world", "relative/path", "/a b/c", "no-slash", "//")
_BAD_URL = ("file///", "not a url", "://missing-scheme", "HTTPS://Example.org/x")
_BAD_IP = ("127.x0.0.1", "10.0.0", "1.2.3.4.5", "abc.def.ghi.jkl", "192.168..1")
_BAD_PORT = ("80a0", "http", "8 080", "port22")
_BAD_PERMISSION = ("rwxr-xr-x", "75", "07555", "7a7")
_BAD_OPTION_WORDS = ("yes", "no", "enabled", "disabled", "on", "off", "maybe")


def _effective_bounds(spec: ParameterSpec) -> tuple[float, float]:
    if spec.numeric_range is not None:
        return spec.numeric_range
    if spec.kind is ValueKind.INTEGER:
        return (-(2**31), 2**31 - 1)
    if spec.kind is ValueKind.LONG:
        return (-(2**63), 2**63 - 1)
    if spec.kind is ValueKind.PORT:
        return (0, 65535)
    return (-1e9, 1e9)


def _plausible_window(lo: float, hi: float) -> tuple[float, float]:
    # huge data-type ranges make poor sample spaces; prefer a human-scale slice
    wlo, whi = max(lo, 0.0), min(hi, 1e6)
    if wlo > whi:
        return lo, hi
    return wlo, whi


def generate_valid_value(spec: ParameterSpec, rng: random.Random) -> str:
    """A value the oracle accepts for this parameter, sometimes the default."""
    for _ in range(MAX_ATTEMPTS):
        candidate = _draw_valid(spec, rng)
        if candidate is not None and value_violation(spec, candidate) is None:
            return candidate
    raise GenerationError(f"cannot generate a valid value for {spec.name!r}")


def _draw_valid(spec: ParameterSpec, rng: random.Random) -> str | None:
    if spec.default_value is not None and rng.random() < 0.5:
        return spec.default_value
    kind = spec.kind
    if kind in (ValueKind.INTEGER, ValueKind.LONG, ValueKind.PORT):
        lo, hi = _plausible_window(*_effective_bounds(spec))
        return str(rng.randint(int(lo), int(hi)))
    if kind is ValueKind.FLOAT:
        lo, hi = _plausible_window(*_effective_bounds(spec))
        return f"{rng.uniform(lo, hi):.6g}"
    if kind is ValueKind.BOOLEAN:
        return rng.choice(("true", "false"))
    if kind is ValueKind.STRING:
        return rng.choice(_VALID_STRINGS)
    if kind is ValueKind.PATH:
        return rng.choice(_VALID_PATHS)
    if kind is ValueKind.URL:
        return rng.choice(_VALID_URLS)
    if kind is ValueKind.IP_ADDRESS:
        return ".".join(str(rng.randint(1, 254)) for _ in range(4))
    if kind is ValueKind.PERMISSION:
        return "".join(rng.choice("01234567") for _ in range(3))
    if kind is ValueKind.ENUM:
        return rng.choice(spec.options)
    if kind is ValueKind.NUMBER_WITH_UNIT:
        return f"{rng.randint(1, 1024)}{rng.choice(spec.units)}"
    return None


def _invalid_candidates(
    spec: ParameterSpec, subcat: Subcategory, rng: random.Random
) -> list[str]:
    kind = spec.kind
    if subcat is Subcategory.SYNTAX_DATA_TYPE:
        if kind in (ValueKind.INTEGER, ValueKind.LONG):
            return list(_BAD_INT)
        if kind is ValueKind.FLOAT:
            return list(_BAD_FLOAT)
        if kind is ValueKind.BOOLEAN:
            return list(_BAD_BOOL)
        if kind is ValueKind.NUMBER_WITH_UNIT:
            return [f"{rng.randint(1, 512)}nounit", "64nounit", "sixty4kb"]
    if subcat is Subcategory.SYNTAX_PATH:
        return list(_BAD_PATH)
    if subcat is Subcategory.SYNTAX_URL:
        return list(_BAD_URL)
    if subcat is Subcategory.SYNTAX_IP_ADDRESS:
        return list(_BAD_IP)
    if subcat is Subcategory.SYNTAX_PORT:
        return list(_BAD_PORT)
    if subcat is Subcategory.SYNTAX_PERMISSION:
        return list(_BAD_PERMISSION)
    if subcat is Subcategory.RANGE_NUMERIC:
        lo, hi = _effective_bounds(spec)
        if kind is ValueKind.FLOAT:
            if spec.numeric_range is None:
                return ["1e400", "-1e400"]
            return [f"{hi + abs(hi) + 1:g}", f"{lo - abs(lo) - 1:g}"]
        return [str(int(hi) + 1), str(int(lo) - 1)]
    if subcat is Subcategory.RANGE_BOOL:
        return list(_BAD_OPTION_WORDS)
    if subcat is Subcategory.RANGE_ENUM:
        return [w for w in ("fallback_mode", "unsupported", "none_of_the_above") if w not in spec.options]
    if subcat is Subcategory.RANGE_IP_ADDRESS:
        fixed = "256.123.45.6"
        octets = [str(rng.randint(0, 255)) for _ in range(4)]
        octets[rng.randrange(4)] = str(rng.randint(256, 999))
        return [fixed, ".".join(octets)]
    if subcat is Subcategory.RANGE_PORT:
        lo, hi = spec.numeric_range or (0, 65535)
        out = [str(rng.randint(int(hi) + 1, 99999))]
        if lo > 0:
            out.append(str(int(lo) - 1))
        return out
    if subcat is Subcategory.RANGE_PERMISSION:
        digits = [rng.choice("01234567") for _ in range(3)]
        digits[rng.randrange(3)] = rng.choice("89")
        return ["".join(digits), "789"]
    return []


def generate_invalid_value(
    spec: ParameterSpec, subcat: Subcategory, rng: random.Random
) -> str:
    """A value that violates exactly the given sub-category for this spec."""
    if subcat not in assign_subcategories(spec):
        raise GenerationError(
            f"sub-category {subcat.value} not applicable to {spec.name!r}"
        )
    candidates = _invalid_candidates(spec, subcat, rng)
    verified = [
        v
        for v in candidates
        if (hit := value_violation(spec, v)) is not None and hit.subcategory is subcat
    ]
    if not verified:
        raise GenerationError(
            f"no value violating {subcat.value} found for {spec.name!r}"
        )
    return rng.choice(verified)


# --- ground-truth reasons ---


def ground_truth_reason(subcat: Subcategory, parameter: str, value: str, specs: SpecSet) -> str:
    spec = specs.parameters.get(parameter)
    if subcat is Subcategory.SYNTAX_DATA_TYPE:
        if spec is not None and spec.kind is ValueKind.NUMBER_WITH_UNIT:
            return f"value '{value}' of '{parameter}' uses an unknown unit"
        kind = spec.kind.value if spec else "expected type"
        return f"value '{value}' of '{parameter}' is not a valid {kind}"
    if subcat is Subcategory.SYNTAX_PATH:
        return f"value '{value}' of '{parameter}' is not a well-formed absolute path"
    if subcat is Subcategory.SYNTAX_URL:
        return f"value '{value}' of '{parameter}' is not a well-formed URL"
    if subcat is Subcategory.SYNTAX_IP_ADDRESS:
        return f"value '{value}' of '{parameter}' is not a well-formed IP address"
    if subcat is Subcategory.SYNTAX_PORT:
        return f"value '{value}' of '{parameter}' is not a numeric port"
    if subcat is Subcategory.SYNTAX_PERMISSION:
        return f"value '{value}' of '{parameter}' is not a three-digit permission"
    if subcat is Subcategory.RANGE_NUMERIC:
        lo, hi = _effective_bounds(spec)
        return f"value {value} of '{parameter}' is outside the valid range [{lo:g}, {hi:g}]"
    if subcat is Subcategory.RANGE_BOOL:
        return f"value '{value}' of '{parameter}' must be true or false"
    if subcat is Subcategory.RANGE_ENUM:
        return f"value '{value}' of '{parameter}' must be one of {list(spec.options)}"
    if subcat is Subcategory.RANGE_IP_ADDRESS:
        return f"value '{value}' of '{parameter}' has an octet outside [0, 255]"
    if subcat is Subcategory.RANGE_PORT:
        lo, hi = (spec.numeric_range if spec and spec.numeric_range else (0, 65535))
        return f"value {value} exceeds port range [{int(lo)}, {int(hi)}]"
    if subcat is Subcategory.RANGE_PERMISSION:
        return f"value {value} of '{parameter}' is outside the permission range [000, 777]"
    if subcat is Subcategory.VERSION_PARAMETER_CHANGE:
        return f"parameter '{parameter}' does not exist in version {specs.version}"
    raise GenerationError(f"no reason template for {subcat.value}")


def _dependency_reason(c: DependencyConstraint) -> str:
    if c.kind is DependencyKind.CONTROL:
        return (
            f"'{c.p2}' is set but '{c.p1}' does not satisfy "
            f"{c.p1} {c.comparator.value} {c.value}"
        )
    return f"value of '{c.p1}' violates required relation {c.p1} {c.comparator.value} {c.p2}"


# --- dependency pair construction ---

_NUMERIC_KINDS = (ValueKind.INTEGER, ValueKind.LONG, ValueKind.PORT, ValueKind.FLOAT)


def _format_number(x: float, integral: bool) -> str:
    return str(int(round(x))) if integral else f"{x:.6g}"


def _draw_between(lo: float, hi: float, integral: bool, rng: random.Random) -> float:
    if integral:
        return float(rng.randint(int(-(-lo // 1)), int(hi // 1)))
    return rng.uniform(lo, hi)


def _ordered_pair(
    spec1: ParameterSpec,
    spec2: ParameterSpec,
    relation: Comparator,
    rng: random.Random,
) -> tuple[str, str] | None:
    """Construct in-range numeric values with v1 <relation> v2, or None when
    the windows make the relation unsatisfiable."""
    if spec1.kind not in _NUMERIC_KINDS or spec2.kind not in _NUMERIC_KINDS:
        return None
    lo1, hi1 = map(float, _plausible_window(*_effective_bounds(spec1)))
    lo2, hi2 = map(float, _plausible_window(*_effective_bounds(spec2)))
    integral = spec1.kind is not ValueKind.FLOAT and spec2.kind is not ValueKind.FLOAT
    step = 1.0 if integral else max(abs(hi1), abs(hi2), 1.0) * 1e-4

    if relation in (Comparator.GT, Comparator.GE):
        margin = step if relation is Comparator.GT else 0.0
        v2_hi = min(hi2, hi1 - margin)
        if v2_hi < lo2:
            return None
        v2 = _draw_between(lo2, v2_hi, integral, rng)
        v1 = _draw_between(max(lo1, v2 + margin), hi1, integral, rng)
        return _format_number(v1, integral), _format_number(v2, integral)
    if relation in (Comparator.LT, Comparator.LE):
        mirror = Comparator.GT if relation is Comparator.LT else Comparator.GE
        pair = _ordered_pair(spec2, spec1, mirror, rng)
        return None if pair is None else (pair[1], pair[0])
    if relation is Comparator.EQ:
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return None
        v = _format_number(_draw_between(lo, hi, integral, rng), integral)
        return v, v
    v1 = _draw_between(lo1, hi1, integral, rng)
    v2 = _draw_between(lo2, hi2, integral, rng)
    if v1 == v2:
        v2 = v2 + step if v2 + step <= hi2 else v2 - step
    return _format_number(v1, integral), _format_number(v2, integral)


def _solve_pair(
    c: DependencyConstraint, specs: SpecSet, rng: random.Random, violate: bool
) -> dict[str, str]:
    """Values for (p1, p2): satisfying the constraint, or violating exactly it
    while both values stay individually valid."""
    spec1 = specs.parameters[c.p1]
    spec2 = specs.parameters[c.p2]
    want = not violate
    if c.kind is DependencyKind.CONTROL:
        # targeted equality first: the literal itself (when valid) satisfies
        if c.comparator is Comparator.EQ and want and value_violation(spec1, c.value) is None:
            return {c.p1: c.value, c.p2: generate_valid_value(spec2, rng)}
        for _ in range(MAX_ATTEMPTS * 5):
            v1 = generate_valid_value(spec1, rng)
            if compare_values(v1, c.comparator, c.value) == want:
                return {c.p1: v1, c.p2: generate_valid_value(spec2, rng)}
        raise GenerationError(f"cannot {'violate' if violate else 'satisfy'} control {c}")

    relation = c.comparator if want else c.comparator.negate()
    for _ in range(MAX_ATTEMPTS):
        pair = _ordered_pair(spec1, spec2, relation, rng)
        if pair is None:
            break  # non-numeric operands: fall back to drawing below
        v1, v2 = pair
        if (
            value_violation(spec1, v1) is None
            and value_violation(spec2, v2) is None
            and compare_values(v1, c.comparator, v2) == want
        ):
            return {c.p1: v1, c.p2: v2}
    for _ in range(MAX_ATTEMPTS * 5):
        v1 = generate_valid_value(spec1, rng)
        v2 = generate_valid_value(spec2, rng)
        if compare_values(v1, c.comparator, v2) == want:
            return {c.p1: v1, c.p2: v2}
    raise GenerationError(
        f"cannot {'violate' if violate else 'satisfy'} relation {c} over the value domain"
    )


def inject_dependency_misconfig(
    c: DependencyConstraint, file: ConfigFile, specs: SpecSet, rng: random.Random
) -> LabeledFile:
    """Rewrite both constraint parameters in the file so that the constraint
    is the file's only violation."""
    flagged = c.p2 if c.kind is DependencyKind.CONTROL else c.p1
    subcat = (
        Subcategory.DEPENDENCY_CONTROL
        if c.kind is DependencyKind.CONTROL
        else Subcategory.DEPENDENCY_VALUE_RELATIONSHIP
    )
    for _ in range(MAX_ATTEMPTS):
        pair = _solve_pair(c, specs, rng, violate=True)
        entries = [e for e in file.entries if e.name not in pair]
        for name, value in pair.items():
            spec = specs.parameters[name]
            entries.append(ConfigEntry(name, value, spec.description))
        candidate = ConfigFile(file.project, file.version, file.format, tuple(entries))
        found = oracle_validate(candidate, specs)
        if len(found) == 1 and found[0].parameter == flagged and found[0].subcategory is subcat:
            fault = InjectedFault(flagged, subcat, _dependency_reason(c))
            return LabeledFile(candidate, Label.MISCONFIG, fault, bucket=subcat)
    raise GenerationError(f"constraint {c} unsatisfiable as a single-fault injection")


# --- dataset construction ---


def _version_eligible(specs: SpecSet) -> list[str]:
    names: set[str] = set()
    for change in specs.version_changes:
        if specs.version == change.v2:
            names |= change.removed_in_v2
        if specs.version == change.v1:
            names |= change.added_in_v2
    return sorted(names)


def _eligible_by_subcategory(specs: SpecSet) -> dict[Subcategory, list[str]]:
    eligible: dict[Subcategory, list[str]] = {sc: [] for sc in ALL_SUBCATEGORIES}
    for name, spec in specs.parameters.items():
        for sc in assign_subcategories(spec):
            eligible[sc].append(name)
    eligible[Subcategory.VERSION_PARAMETER_CHANGE] = _version_eligible(specs)
    return {sc: names for sc, names in eligible.items() if names}


def _safe_companions(specs: SpecSet) -> list[str]:
    version_names = specs.version_known_names()
    return [
        name
        for name, spec in specs.parameters.items()
        if not spec.dependencies and name not in version_names
    ]


def _constraint_for(specs: SpecSet, subcat: Subcategory, parameter: str) -> DependencyConstraint:
    for c in specs.dependencies:
        if subcat is Subcategory.DEPENDENCY_CONTROL and c.kind is DependencyKind.CONTROL:
            if c.p2 == parameter:
                return c
        if (
            subcat is Subcategory.DEPENDENCY_VALUE_RELATIONSHIP
            and c.kind is DependencyKind.VALUE_RELATIONSHIP
            and c.p1 == parameter
        ):
            return c
    raise GenerationError(f"no {subcat.value} constraint for {parameter!r}")


class _FileBuilder:
    """Assembles oracle-checked labeled files for one project."""

    def __init__(self, specs: SpecSet, rng: random.Random, entries_per_file: int):
        self.specs = specs
        self.rng = rng
        self.entries_per_file = entries_per_file
        self.pool = _safe_companions(specs)
        self.seen_keys: set[str] = set()

    def _entry(self, name: str, value: str) -> ConfigEntry:
        spec = self.specs.parameters.get(name)
        return ConfigEntry(name, value, spec.description if spec else None)

    def _companions(self, exclude: set[str], count: int) -> list[ConfigEntry]:
        pool = [n for n in self.pool if n not in exclude]
        if len(pool) < count:
            raise SpecError(
                f"project {self.specs.project!r} needs at least {count} "
                "dependency-free parameters to pad generated files"
            )
        chosen = self.rng.sample(pool, count)
        return [
            self._entry(name, generate_valid_value(self.specs.parameters[name], self.rng))
            for name in chosen
        ]

    def _assemble(self, fixed: list[ConfigEntry]) -> ConfigFile:
        companions = self._companions(
            {e.name for e in fixed}, self.entries_per_file - len(fixed)
        )
        entries = fixed + companions
        self.rng.shuffle(entries)
        return ConfigFile(
            self.specs.project,
            self.specs.version,
            self.specs.file_format,
            tuple(entries),
        )

    def _accept(self, labeled: LabeledFile) -> bool:
        key = labeled.file.content_key()
        if key in self.seen_keys:
            return False
        self.seen_keys.add(key)
        return True

    def misconfig_file(self, subcat: Subcategory, parameter: str) -> LabeledFile:
        for _ in range(MAX_ATTEMPTS):
            if subcat in (
                Subcategory.DEPENDENCY_CONTROL,
                Subcategory.DEPENDENCY_VALUE_RELATIONSHIP,
            ):
                c = _constraint_for(self.specs, subcat, parameter)
                pair = _solve_pair(c, self.specs, self.rng, violate=True)
                fixed = [self._entry(n, v) for n, v in pair.items()]
                flagged = c.p2 if c.kind is DependencyKind.CONTROL else c.p1
                reason = _dependency_reason(c)
            elif subcat is Subcategory.VERSION_PARAMETER_CHANGE:
                value = self.rng.choice(_PLAUSIBLE_VERSION_VALUES)
                fixed = [self._entry(parameter, value)]
                flagged = parameter
                reason = ground_truth_reason(subcat, parameter, value, self.specs)
            else:
                spec = self.specs.parameters[parameter]
                value = generate_invalid_value(spec, subcat, self.rng)
                fixed = [self._entry(parameter, value)]
                flagged = parameter
                reason = ground_truth_reason(subcat, parameter, value, self.specs)
            file = self._assemble(fixed)
            found = oracle_validate(file, self.specs)
            if (
                len(found) == 1
                and found[0].parameter == flagged
                and found[0].subcategory is subcat
            ):
                labeled = LabeledFile(
                    file, Label.MISCONFIG, InjectedFault(flagged, subcat, reason), bucket=subcat
                )
                if self._accept(labeled):
                    return labeled
        raise GenerationError(
            f"could not build a clean {subcat.value} misconfig for {parameter!r}"
        )

    def valid_file(self, subcat: Subcategory, parameter: str) -> LabeledFile:
        for _ in range(MAX_ATTEMPTS):
            if subcat in (
                Subcategory.DEPENDENCY_CONTROL,
                Subcategory.DEPENDENCY_VALUE_RELATIONSHIP,
            ):
                c = _constraint_for(self.specs, subcat, parameter)
                pair = _solve_pair(c, self.specs, self.rng, violate=False)
                fixed = [self._entry(n, v) for n, v in pair.items()]
            elif subcat is Subcategory.VERSION_PARAMETER_CHANGE:
                # a version-affected parameter has no valid value at this
                # version, so its valid counterpart uses supported ones only
                fixed = []
            else:
                spec = self.specs.parameters[parameter]
                fixed = [self._entry(parameter, generate_valid_value(spec, self.rng))]
            file = self._assemble(fixed)
            if not oracle_validate(file, self.specs):
                labeled = LabeledFile(file, Label.VALID, bucket=subcat)
                if self._accept(labeled):
                    return labeled
        raise GenerationError(f"could not build a violation-free file for {parameter!r}")


def build_dataset(
    specs: SpecSet,
    version_changes: tuple[VersionChange, ...] | None = None,
    rng: random.Random | int = 0,
    entries_per_file: int = ENTRIES_PER_FILE,
) -> DatasetSplit:
    """Sample parameters per sub-category and emit the shot pool / eval set.

    Sub-categories with at least SAMPLE_PER_SUBCATEGORY eligible parameters
    contribute one shot file and the rest as eval files; smaller ones send
    everything to the eval set. Valid counterparts mirror the misconfig files
    one for one.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    if version_changes is not None:
        specs = SpecSet(
            project=specs.project,
            version=specs.version,
            file_format=specs.file_format,
            parameters=specs.parameters,
            dependencies=specs.dependencies,
            version_changes=tuple(version_changes),
        )
    builder = _FileBuilder(specs, rng, entries_per_file)
    eligible = _eligible_by_subcategory(specs)

    shot_pool: list[LabeledFile] = []
    eval_set: list[LabeledFile] = []
    for subcat in ALL_SUBCATEGORIES:
        names = eligible.get(subcat)
        if not names:
            continue
        sample = rng.sample(names, min(SAMPLE_PER_SUBCATEGORY, len(names)))
        if len(sample) >= SAMPLE_PER_SUBCATEGORY:
            shot_param = rng.choice(sample)
            eval_params = [p for p in sample if p != shot_param]
        else:
            shot_param = None
            eval_params = sample
        if shot_param is not None:
            shot_pool.append(builder.misconfig_file(subcat, shot_param))
            shot_pool.append(builder.valid_file(subcat, shot_param))
        for param in eval_params:
            eval_set.append(builder.misconfig_file(subcat, param))
            eval_set.append(builder.valid_file(subcat, param))
    return DatasetSplit(tuple(shot_pool), tuple(eval_set))


# --- corpus on disk ---

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1


def write_dataset(split: DatasetSplit, root: str | Path, specs: SpecSet) -> Path:
    """Emit <root>/<project>/<split>/<subcategory>/<id>.<ext> plus a manifest."""
    root = Path(root)
    project_dir = root / specs.project
    rows = []
    counters: dict[tuple[str, str, str], int] = {}
    for split_name, files in (("shot_pool", split.shot_pool), ("eval_set", split.eval_set)):
        for lf in files:
            bucket = lf.bucket.value if lf.bucket else "unbucketed"
            slug = bucket.replace("/", "_")
            prefix = "m" if lf.label is Label.MISCONFIG else "v"
            counter_key = (split_name, slug, prefix)
            index = counters.get(counter_key, 0)
            counters[counter_key] = index + 1
            ext = lf.file.format.value
            rel = f"{split_name}/{slug}/{prefix}{index:03d}.{ext}"
            target = project_dir / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(render_config(lf.file, lf.file.format), encoding="utf-8")
            row = {
                "path": rel,
                "split": split_name,
                "label": lf.label.value,
                "bucket": bucket,
                "format": lf.file.format.value,
                "entry_count": len(lf.file.entries),
                "content_key": lf.file.content_key(),
            }
            if lf.injected is not None:
                row["parameter"] = lf.injected.parameter
                row["category"] = lf.injected.category.value
                row["subcategory"] = lf.injected.subcategory.value
                row["reason"] = lf.injected.reason
            rows.append(row)
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "project": specs.project,
        "version": specs.version,
        "files": rows,
    }
    (project_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return project_dir


def load_dataset(project_dir: str | Path) -> tuple[str, DatasetSplit]:
    """Read one project's corpus back from disk."""
    from .config_model import load_config_file  # local import keeps module load light

    project_dir = Path(project_dir)
    manifest = json.loads((project_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    project = manifest["project"]
    version = manifest["version"]
    shots: list[LabeledFile] = []
    evals: list[LabeledFile] = []
    for row in manifest["files"]:
        file = load_config_file(
            project_dir / row["path"],
            project,
            version,
            ConfigFormat(row["format"]),
        )
        injected = None
        if row["label"] == Label.MISCONFIG.value:
            injected = InjectedFault(
                parameter=row["parameter"],
                subcategory=Subcategory(row["subcategory"]),
                reason=row["reason"],
            )
        bucket = None if row["bucket"] == "unbucketed" else Subcategory(row["bucket"])
        labeled = LabeledFile(file, Label(row["label"]), injected, bucket=bucket)
        (shots if row["split"] == "shot_pool" else evals).append(labeled)
    return project, DatasetSplit(tuple(shots), tuple(evals))

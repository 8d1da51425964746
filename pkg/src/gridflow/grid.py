"""Electrical data model: buses, generators, loads, branches, and the
gridcase-v1 JSON file format.

All quantities are stored per-unit on the system base (``base_mva``);
angles are radians internally and degrees in case files. A validated
``GridCase`` is immutable; the ``apply_*`` operations return new cases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class CaseFormatError(ValueError):
    """Raised when a case file does not conform to the gridcase-v1 schema."""


class CaseValidationError(ValueError):
    """Raised when a structurally well-formed case breaks a model invariant."""


class BusKind(Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


@dataclass(frozen=True)
class Bus:
    id: int
    kind: BusKind
    v_mag: float = 1.0
    v_ang: float = 0.0          # radians
    v_min: float = 0.9
    v_max: float = 1.1
    g_sh: float = 0.0           # shunt conductance, pu
    b_sh: float = 0.0           # shunt susceptance, pu


@dataclass(frozen=True)
class Generator:
    bus_id: int
    p_out: float
    q_out: float = 0.0
    p_min: float = 0.0
    p_max: float = 99.0
    q_min: float = -99.0
    q_max: float = 99.0
    controllable: bool = False


@dataclass(frozen=True)
class Load:
    bus_id: int
    p_d: float
    q_d: float = 0.0
    group_id: str | None = None
    is_swing: bool = False


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    r: float
    x: float
    b_ch: float = 0.0
    tap: float = 1.0
    p_limit: float = 99.0
    s_max: float = 99.0
    in_service: bool = True


@dataclass(frozen=True)
class GridCase:
    base_mva: float
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    branches: tuple[Branch, ...]
    zone: str | None = None

    def bus_index(self) -> dict[int, int]:
        """Map bus id -> position in ``buses``."""
        return {b.id: i for i, b in enumerate(self.buses)}

    def branch_by_id(self, branch_id: int) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise LookupError(f"no branch with id {branch_id}")

    def controllable_generators(self) -> list[int]:
        """Indices into ``generators`` of the controllable units."""
        return [i for i, g in enumerate(self.generators) if g.controllable]

    def group_loads(self, group_id: str) -> list[int]:
        """Indices into ``loads`` of the members of a control group."""
        return [i for i, l in enumerate(self.loads) if l.group_id == group_id]


FORMAT_VERSION = "gridcase-v1"

_BUS_KEYS = {"id", "kind", "v_mag", "v_ang_deg", "v_min", "v_max", "g_sh", "b_sh"}
_GEN_KEYS = {"bus_id", "p_out", "q_out", "p_min", "p_max", "q_min", "q_max", "controllable"}
_LOAD_KEYS = {"bus_id", "p_d", "q_d", "group_id", "is_swing"}
_BRANCH_KEYS = {"id", "from_bus", "to_bus", "r", "x", "b_ch", "tap", "p_limit", "s_max", "in_service"}
_TOP_KEYS = {"version", "base_mva", "buses", "generators", "loads", "branches", "zone"}


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise CaseFormatError(f"{where}: missing required field '{key}'")
    return record[key]


def _check_keys(record: dict, allowed: set[str], where: str) -> None:
    unknown = set(record) - allowed
    if unknown:
        raise CaseFormatError(f"{where}: unknown field(s) {sorted(unknown)}")


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _flag(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise CaseFormatError(f"{where}: expected true/false, got {value!r}")
    return value


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CaseFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _file_degrees(rad: float) -> float:
    """Degrees value whose radians() round-trips to ``rad`` exactly when
    such a float exists (radians->degrees->radians is not exact in general)."""
    deg = math.degrees(rad)
    if math.radians(deg) == rad:
        return deg
    lo = hi = deg
    for _ in range(4):
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
        if math.radians(lo) == rad:
            return lo
        if math.radians(hi) == rad:
            return hi
    return deg


def _parse_bus(rec: dict, i: int) -> Bus:
    where = f"buses[{i}]"
    _check_keys(rec, _BUS_KEYS, where)
    kind_raw = _require(rec, "kind", where)
    try:
        kind = BusKind(kind_raw)
    except ValueError:
        raise CaseFormatError(f"{where}.kind: must be one of 'slack', 'pv', 'pq', got {kind_raw!r}")
    return Bus(
        id=_int(_require(rec, "id", where), f"{where}.id"),
        kind=kind,
        v_mag=_num(rec.get("v_mag", 1.0), f"{where}.v_mag"),
        v_ang=math.radians(_num(rec.get("v_ang_deg", 0.0), f"{where}.v_ang_deg")),
        v_min=_num(rec.get("v_min", 0.9), f"{where}.v_min"),
        v_max=_num(rec.get("v_max", 1.1), f"{where}.v_max"),
        g_sh=_num(rec.get("g_sh", 0.0), f"{where}.g_sh"),
        b_sh=_num(rec.get("b_sh", 0.0), f"{where}.b_sh"),
    )


def _parse_generator(rec: dict, i: int) -> Generator:
    where = f"generators[{i}]"
    _check_keys(rec, _GEN_KEYS, where)
    return Generator(
        bus_id=_int(_require(rec, "bus_id", where), f"{where}.bus_id"),
        p_out=_num(_require(rec, "p_out", where), f"{where}.p_out"),
        q_out=_num(rec.get("q_out", 0.0), f"{where}.q_out"),
        p_min=_num(rec.get("p_min", 0.0), f"{where}.p_min"),
        p_max=_num(rec.get("p_max", 99.0), f"{where}.p_max"),
        q_min=_num(rec.get("q_min", -99.0), f"{where}.q_min"),
        q_max=_num(rec.get("q_max", 99.0), f"{where}.q_max"),
        controllable=_flag(rec.get("controllable", False), f"{where}.controllable"),
    )


def _parse_load(rec: dict, i: int) -> Load:
    where = f"loads[{i}]"
    _check_keys(rec, _LOAD_KEYS, where)
    group = rec.get("group_id")
    if group is not None and not isinstance(group, str):
        raise CaseFormatError(f"{where}.group_id: expected a string or null")
    return Load(
        bus_id=_int(_require(rec, "bus_id", where), f"{where}.bus_id"),
        p_d=_num(_require(rec, "p_d", where), f"{where}.p_d"),
        q_d=_num(rec.get("q_d", 0.0), f"{where}.q_d"),
        group_id=group,
        is_swing=_flag(rec.get("is_swing", False), f"{where}.is_swing"),
    )


def _parse_branch(rec: dict, i: int) -> Branch:
    where = f"branches[{i}]"
    _check_keys(rec, _BRANCH_KEYS, where)
    return Branch(
        id=_int(_require(rec, "id", where), f"{where}.id"),
        from_bus=_int(_require(rec, "from_bus", where), f"{where}.from_bus"),
        to_bus=_int(_require(rec, "to_bus", where), f"{where}.to_bus"),
        r=_num(_require(rec, "r", where), f"{where}.r"),
        x=_num(_require(rec, "x", where), f"{where}.x"),
        b_ch=_num(rec.get("b_ch", 0.0), f"{where}.b_ch"),
        tap=_num(rec.get("tap", 1.0), f"{where}.tap"),
        p_limit=_num(rec.get("p_limit", 99.0), f"{where}.p_limit"),
        s_max=_num(rec.get("s_max", 99.0), f"{where}.s_max"),
        in_service=_flag(rec.get("in_service", True), f"{where}.in_service"),
    )


def connected_buses(case: GridCase, start: int | None = None,
                    skip_branch_id: int | None = None) -> set[int]:
    """Bus ids reachable from ``start`` over in-service branches, optionally
    with one branch removed."""
    adj: dict[int, list[int]] = {b.id: [] for b in case.buses}
    for br in case.branches:
        if not br.in_service or br.id == skip_branch_id:
            continue
        adj[br.from_bus].append(br.to_bus)
        adj[br.to_bus].append(br.from_bus)
    if start is None:
        start = case.buses[0].id
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def is_connected(case: GridCase, skip_branch_id: int | None = None) -> bool:
    if not case.buses:
        return True
    return len(connected_buses(case, skip_branch_id=skip_branch_id)) == len(case.buses)


def validate_case(case: GridCase) -> GridCase:
    """Check every model invariant; returns the case for chaining."""
    if case.base_mva <= 0:
        raise CaseValidationError("base_mva must be positive")
    if not case.buses:
        raise CaseValidationError("case has no buses")

    seen_ids: set[int] = set()
    for b in case.buses:
        if b.id in seen_ids:
            raise CaseValidationError(f"duplicate bus id {b.id}")
        seen_ids.add(b.id)
        if not b.v_min < b.v_max:
            raise CaseValidationError(f"bus {b.id}: v_min must be < v_max")
        if b.v_mag <= 0:
            raise CaseValidationError(f"bus {b.id}: v_mag must be positive")

    slack = [b.id for b in case.buses if b.kind is BusKind.SLACK]
    if len(slack) != 1:
        raise CaseValidationError(f"expected exactly one slack bus, found {len(slack)}")

    for i, g in enumerate(case.generators):
        if g.bus_id not in seen_ids:
            raise CaseValidationError(f"generators[{i}]: unknown bus id {g.bus_id}")
        if g.p_min > g.p_max or g.q_min > g.q_max:
            raise CaseValidationError(f"generators[{i}]: inverted limits")

    swing_count: dict[str, int] = {}
    for i, l in enumerate(case.loads):
        if l.bus_id not in seen_ids:
            raise CaseValidationError(f"loads[{i}]: unknown bus id {l.bus_id}")
        if l.is_swing:
            if l.group_id is None:
                raise CaseValidationError(f"loads[{i}]: swing load must belong to a group")
            swing_count[l.group_id] = swing_count.get(l.group_id, 0) + 1
            if swing_count[l.group_id] > 1:
                raise CaseValidationError(f"group '{l.group_id}' has more than one swing load")

    branch_ids: set[int] = set()
    for i, br in enumerate(case.branches):
        if br.id in branch_ids:
            raise CaseValidationError(f"duplicate branch id {br.id}")
        branch_ids.add(br.id)
        if br.from_bus == br.to_bus:
            raise CaseValidationError(f"branch {br.id}: from_bus equals to_bus")
        if br.from_bus not in seen_ids or br.to_bus not in seen_ids:
            raise CaseValidationError(f"branch {br.id}: references unknown bus")
        if br.x == 0.0 and br.r == 0.0:
            raise CaseValidationError(f"branch {br.id}: zero impedance")
        if br.x == 0.0:
            raise CaseValidationError(f"branch {br.id}: zero reactance")
        if br.p_limit <= 0:
            raise CaseValidationError(f"branch {br.id}: p_limit must be positive")
        if br.tap <= 0:
            raise CaseValidationError(f"branch {br.id}: tap must be positive")

    if not is_connected(case):
        raise CaseValidationError("network is not connected over in-service branches")
    return case


def case_from_dict(data: dict) -> GridCase:
    if not isinstance(data, dict):
        raise CaseFormatError("top level must be a JSON object")
    _check_keys(data, _TOP_KEYS, "top level")
    version = _require(data, "version", "top level")
    if version != FORMAT_VERSION:
        raise CaseFormatError(f"unsupported version {version!r}, expected {FORMAT_VERSION!r}")
    zone = data.get("zone")
    if zone is not None and not isinstance(zone, str):
        raise CaseFormatError("top level.zone: expected a string or null")
    for key in ("buses", "generators", "loads", "branches"):
        if not isinstance(data.get(key, []), list):
            raise CaseFormatError(f"top level.{key}: expected a list")
    case = GridCase(
        base_mva=_num(_require(data, "base_mva", "top level"), "top level.base_mva"),
        buses=tuple(_parse_bus(r, i) for i, r in enumerate(data.get("buses", []))),
        generators=tuple(_parse_generator(r, i) for i, r in enumerate(data.get("generators", []))),
        loads=tuple(_parse_load(r, i) for i, r in enumerate(data.get("loads", []))),
        branches=tuple(_parse_branch(r, i) for i, r in enumerate(data.get("branches", []))),
        zone=zone,
    )
    return validate_case(case)


def case_to_dict(case: GridCase) -> dict:
    return {
        "version": FORMAT_VERSION,
        "base_mva": case.base_mva,
        "zone": case.zone,
        "buses": [
            {
                "id": b.id,
                "kind": b.kind.value,
                "v_mag": b.v_mag,
                "v_ang_deg": _file_degrees(b.v_ang),
                "v_min": b.v_min,
                "v_max": b.v_max,
                "g_sh": b.g_sh,
                "b_sh": b.b_sh,
            }
            for b in case.buses
        ],
        "generators": [
            {
                "bus_id": g.bus_id,
                "p_out": g.p_out,
                "q_out": g.q_out,
                "p_min": g.p_min,
                "p_max": g.p_max,
                "q_min": g.q_min,
                "q_max": g.q_max,
                "controllable": g.controllable,
            }
            for g in case.generators
        ],
        "loads": [
            {
                "bus_id": l.bus_id,
                "p_d": l.p_d,
                "q_d": l.q_d,
                "group_id": l.group_id,
                "is_swing": l.is_swing,
            }
            for l in case.loads
        ],
        "branches": [
            {
                "id": br.id,
                "from_bus": br.from_bus,
                "to_bus": br.to_bus,
                "r": br.r,
                "x": br.x,
                "b_ch": br.b_ch,
                "tap": br.tap,
                "p_limit": br.p_limit,
                "s_max": br.s_max,
                "in_service": br.in_service,
            }
            for br in case.branches
        ],
    }


def loads_case(text: str) -> GridCase:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return case_from_dict(data)


def dumps_case(case: GridCase) -> str:
    """Canonical serialization: sorted keys, fixed layout, byte-deterministic."""
    return json.dumps(case_to_dict(case), indent=2, sort_keys=True) + "\n"


def load_case(path: str | Path) -> GridCase:
    return loads_case(Path(path).read_text(encoding="utf-8"))


def save_case(case: GridCase, path: str | Path) -> None:
    Path(path).write_text(dumps_case(case), encoding="utf-8")


def apply_generator_setpoints(case: GridCase, setpoints: Sequence[float]) -> GridCase:
    """Replace the active-power outputs of the controllable generators.

    Values are clipped to each unit's [p_min, p_max]; one value per
    controllable generator, in case order.
    """
    idx = case.controllable_generators()
    if len(setpoints) != len(idx):
        raise ValueError(
            f"expected {len(idx)} setpoints (one per controllable generator), got {len(setpoints)}"
        )
    gens = list(case.generators)
    for i, p in zip(idx, setpoints):
        g = gens[i]
        gens[i] = replace(g, p_out=min(max(float(p), g.p_min), g.p_max))
    return replace(case, generators=tuple(gens))


def apply_load_group(case: GridCase, group_id: str, values: Sequence[float]) -> GridCase:
    """Redistribute demand inside a load group at constant total.

    ``values`` are the new per-unit demands of the non-swing members, in
    case order; the swing load absorbs the residual. If the requested
    values exceed the group total they are scaled down proportionally so
    the swing lands at zero. Reactive demand is rescaled to keep each
    load's original power factor.
    """
    members = case.group_loads(group_id)
    if not members:
        raise LookupError(f"no load group '{group_id}'")
    swing = [i for i in members if case.loads[i].is_swing]
    if len(swing) != 1:
        raise CaseValidationError(f"group '{group_id}' needs exactly one swing load")
    swing_i = swing[0]
    others = [i for i in members if i != swing_i]
    if len(values) != len(others):
        raise ValueError(
            f"expected {len(others)} values (non-swing members of '{group_id}'), got {len(values)}"
        )
    vals = [float(v) for v in values]
    if any(v < 0 for v in vals):
        raise ValueError("load demands must be non-negative")

    total = sum(case.loads[i].p_d for i in members)
    requested = sum(vals)
    if requested > total:
        scale = total / requested if requested > 0 else 0.0
        vals = [v * scale for v in vals]

    loads = list(case.loads)

    def _rescaled(load: Load, p_new: float) -> Load:
        q_new = load.q_d * (p_new / load.p_d) if load.p_d > 0 else load.q_d
        return replace(load, p_d=p_new, q_d=q_new)

    for i, v in zip(others, vals):
        loads[i] = _rescaled(loads[i], v)
    swing_p = max(total - sum(vals), 0.0)
    loads[swing_i] = _rescaled(loads[swing_i], swing_p)
    return replace(case, loads=tuple(loads))


def with_load_group(case: GridCase, load_indices: Iterable[int], swing_index: int,
                    group_id: str = "auto") -> GridCase:
    """Tag a set of loads as a control group with the given swing member."""
    indices = set(load_indices)
    if swing_index not in indices:
        raise ValueError("swing_index must be one of load_indices")
    loads = list(case.loads)
    for i in indices:
        loads[i] = replace(loads[i], group_id=group_id, is_swing=(i == swing_index))
    return replace(case, loads=tuple(loads))

"""Serialization: mechanism JSON (version 1), trajectory CSV, SVG frames.

The mechanism document is deliberately small and hand-authorable:

    {"version": 1,
     "links":  [{"id": ..., "role": ..., "markers": {"origin": [x, y], ...}}],
     "joints": [{"id": ..., "link_a": ..., "marker_a": ..., "link_b": ...,
                 "marker_b": ..., "actuated": false,
                 "stiffness_nm_per_rad": ..., "rest_angle_rad": ...}],
     "ground": ..., "wing_polygon": [[link, marker], ...],
     "shoulder": [link, marker], "wingtip": [link, marker],
     "hinges": [{"joint": ..., "width_m": ..., "thickness_m": ...,
                 "length_m": ..., "modulus_pa": ..., "rest_angle_rad": ...}]}

A joint becomes a compliant hinge either through an entry in "hinges"
(stiffness derived from the flexure dimensions) or through an explicit
"stiffness_nm_per_rad". All numbers are SI; angles are radians.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .compliance import HingeGeometry, hinge_stiffness
from .errors import MechanismValidationError, ParseError, SchemaError
from .gait import GaitTrajectory
from .geometry import Point2
from .kinematics import Configuration, marker_world
from .mechanism import (
    CompliantHinge,
    Joint,
    Link,
    LinkRole,
    Mechanism,
    RigidPin,
    validate_mechanism,
)

SCHEMA_VERSION = 1
_TOP_KEYS = {"version", "links", "joints", "ground", "wing_polygon", "shoulder", "wingtip", "hinges"}
_LINK_KEYS = {"id", "role", "markers"}
_JOINT_KEYS = {"id", "link_a", "marker_a", "link_b", "marker_b", "actuated",
               "stiffness_nm_per_rad", "rest_angle_rad"}
_HINGE_KEYS = {"joint", "width_m", "thickness_m", "length_m", "modulus_pa", "rest_angle_rad"}


def _require(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _marker_ref(value: Any, where: str) -> tuple[str, str]:
    _require(isinstance(value, (list, tuple)) and len(value) == 2
             and all(isinstance(v, str) for v in value), f"{where}: expected [link, marker]")
    return (value[0], value[1])


def parse_mechanism(data: bytes | str, validate: bool = True) -> Mechanism:
    """Parse and validate a mechanism document.

    Raises ParseError (malformed JSON, with line/column), SchemaError
    (unknown key or wrong type/version), or MechanismValidationError (a
    structural invariant fails; the message carries the violation code).
    With validate=False the structural gate is skipped so callers can
    inspect the full validation report themselves.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    _require(isinstance(doc, dict), "top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    _require(doc.get("version") == SCHEMA_VERSION,
             f"unsupported version {doc.get('version')!r}, expected {SCHEMA_VERSION}")
    for key in ("links", "joints", "ground"):
        _require(key in doc, f"missing required key {key!r}")

    links = []
    _require(isinstance(doc["links"], list), "'links' must be a list")
    for entry in doc["links"]:
        _require(isinstance(entry, dict), "link entries must be objects")
        unknown = set(entry) - _LINK_KEYS
        _require(not unknown, f"link: unknown keys {sorted(unknown)}")
        _require(isinstance(entry.get("id"), str), "link 'id' must be a string")
        markers = entry.get("markers")
        _require(isinstance(markers, dict) and markers, f"link {entry['id']!r}: 'markers' must be a non-empty object")
        parsed_markers = {}
        for name, xy in markers.items():
            _require(isinstance(xy, (list, tuple)) and len(xy) == 2
                     and all(isinstance(v, (int, float)) for v in xy),
                     f"link {entry['id']!r} marker {name!r}: expected [x, y]")
            try:
                parsed_markers[name] = Point2(float(xy[0]), float(xy[1]))
            except ValueError as e:
                raise SchemaError(f"link {entry['id']!r} marker {name!r}: {e}") from e
        role = entry.get("role", "generic")
        try:
            role = LinkRole(role)
        except ValueError:
            raise SchemaError(f"link {entry['id']!r}: unknown role {role!r}")
        try:
            links.append(Link(entry["id"], parsed_markers, role))
        except ValueError as e:
            raise SchemaError(f"link {entry['id']!r}: {e}") from e

    hinge_specs: dict[str, tuple[CompliantHinge | None, dict]] = {}
    hinges_doc = doc.get("hinges", [])
    _require(isinstance(hinges_doc, list), "'hinges' must be a list")
    for entry in hinges_doc:
        _require(isinstance(entry, dict), "hinge entries must be objects")
        unknown = set(entry) - _HINGE_KEYS
        _require(not unknown, f"hinge: unknown keys {sorted(unknown)}")
        _require(isinstance(entry.get("joint"), str), "hinge 'joint' must be a string")
        for k in ("width_m", "thickness_m", "length_m", "modulus_pa"):
            _require(isinstance(entry.get(k), (int, float)), f"hinge {entry['joint']!r}: missing numeric {k!r}")
        try:
            geom = HingeGeometry(float(entry["width_m"]), float(entry["thickness_m"]),
                                 float(entry["length_m"]), float(entry["modulus_pa"]))
        except ValueError as e:
            raise SchemaError(f"hinge {entry['joint']!r}: {e}") from e
        rest = float(entry.get("rest_angle_rad", 0.0))
        hinge_specs[entry["joint"]] = (CompliantHinge(hinge_stiffness(geom), rest, geom), entry)

    joints = []
    _require(isinstance(doc["joints"], list), "'joints' must be a list")
    for entry in doc["joints"]:
        _require(isinstance(entry, dict), "joint entries must be objects")
        unknown = set(entry) - _JOINT_KEYS
        _require(not unknown, f"joint: unknown keys {sorted(unknown)}")
        for k in ("id", "link_a", "marker_a", "link_b", "marker_b"):
            _require(isinstance(entry.get(k), str), f"joint: {k!r} must be a string")
        actuated = entry.get("actuated", False)
        _require(isinstance(actuated, bool), f"joint {entry['id']!r}: 'actuated' must be a boolean")
        kind = RigidPin()
        if entry["id"] in hinge_specs:
            _require("stiffness_nm_per_rad" not in entry,
                     f"joint {entry['id']!r}: give stiffness either inline or via 'hinges', not both")
            kind = hinge_specs.pop(entry["id"])[0]
        elif "stiffness_nm_per_rad" in entry:
            _require(isinstance(entry["stiffness_nm_per_rad"], (int, float)),
                     f"joint {entry['id']!r}: stiffness must be numeric")
            try:
                kind = CompliantHinge(float(entry["stiffness_nm_per_rad"]),
                                      float(entry.get("rest_angle_rad", 0.0)))
            except ValueError as e:
                raise SchemaError(f"joint {entry['id']!r}: {e}") from e
        try:
            joints.append(Joint(entry["id"], entry["link_a"], entry["marker_a"],
                                entry["link_b"], entry["marker_b"], kind, actuated))
        except ValueError as e:
            raise SchemaError(f"joint {entry['id']!r}: {e}") from e
    _require(not hinge_specs, f"hinges reference unknown joints: {sorted(hinge_specs)}")

    _require(isinstance(doc["ground"], str), "'ground' must be a link id string")
    polygon = tuple(_marker_ref(r, "wing_polygon") for r in doc.get("wing_polygon", []))
    shoulder = _marker_ref(doc["shoulder"], "shoulder") if "shoulder" in doc else None
    wingtip = _marker_ref(doc["wingtip"], "wingtip") if "wingtip" in doc else None

    m = Mechanism(tuple(links), tuple(joints), doc["ground"], polygon, shoulder, wingtip)
    if validate:
        report = validate_mechanism(m)
        if not report.ok:
            first = next(v for v in report if v.severity.value == "error")
            raise MechanismValidationError(first.message, code=first.code)
    return m


def mechanism_to_doc(m: Mechanism) -> dict:
    doc: dict[str, Any] = {"version": SCHEMA_VERSION}
    doc["links"] = [
        {"id": l.id, "role": l.role.value,
         "markers": {k: [p.x, p.y] for k, p in l.markers.items()}}
        for l in m.links
    ]
    joints = []
    hinges = []
    for j in m.joints:
        entry: dict[str, Any] = {"id": j.id, "link_a": j.link_a, "marker_a": j.marker_a,
                                 "link_b": j.link_b, "marker_b": j.marker_b}
        if j.actuated:
            entry["actuated"] = True
        if isinstance(j.kind, CompliantHinge):
            if j.kind.geometry is not None:
                g = j.kind.geometry
                hinges.append({"joint": j.id, "width_m": g.width, "thickness_m": g.thickness,
                               "length_m": g.length, "modulus_pa": g.elastic_modulus,
                               "rest_angle_rad": j.kind.rest_angle})
            else:
                entry["stiffness_nm_per_rad"] = j.kind.stiffness
                entry["rest_angle_rad"] = j.kind.rest_angle
        joints.append(entry)
    doc["joints"] = joints
    doc["ground"] = m.ground
    doc["wing_polygon"] = [list(r) for r in m.wing_polygon]
    if m.shoulder is not None:
        doc["shoulder"] = list(m.shoulder)
    if m.wingtip is not None:
        doc["wingtip"] = list(m.wingtip)
    if hinges:
        doc["hinges"] = hinges
    return doc


def serialize_mechanism(m: Mechanism) -> str:
    return json.dumps(mechanism_to_doc(m), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Trajectory CSV

TRAJECTORY_HEADER = "t_s,crank_rad,plunge_rad,extension,area_m2,wingtip_x_m,wingtip_y_m"


def _num(x: float) -> str:
    return f"{x:.12g}"


def trajectory_csv(gt: GaitTrajectory) -> str:
    """Render a gait as CSV: fixed header, 12 significant digits, LF endings."""
    lines = [TRAJECTORY_HEADER]
    for k in range(gt.samples):
        lines.append(",".join([
            _num(gt.t[k]), _num(gt.crank[k]), _num(gt.plunge[k]),
            _num(gt.extension[k]), _num(gt.area[k]),
            _num(gt.wingtip[k, 0]), _num(gt.wingtip[k, 1]),
        ]))
    return "\n".join(lines) + "\n"


AERO_HEADER = "t_s,vertical_force_n,horizontal_force_n"


def aero_csv(report) -> str:
    lines = [AERO_HEADER]
    for k in range(len(report.t)):
        lines.append(",".join([_num(report.t[k]), _num(report.vertical_force[k]),
                               _num(report.horizontal_force[k])]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG frames


def _link_polyline(m: Mechanism, c: Configuration, link_id: str) -> list[tuple[float, float]]:
    """World joint-marker points of a link, ordered by joint declaration."""
    pts = []
    for j in m.joints:
        if j.link_a == link_id:
            p = marker_world(m, c, link_id, j.marker_a)
        elif j.link_b == link_id:
            p = marker_world(m, c, link_id, j.marker_b)
        else:
            continue
        pts.append((p.x, p.y))
    if len(pts) < 2:  # lone marker: draw a short stub so the link is visible
        p = marker_world(m, c, link_id, "origin")
        pts = [(p.x, p.y)]
    return pts


def render_svg(gt: GaitTrajectory, m: Mechanism, frames: int,
               configurations: list[Configuration] | None = None) -> list[str]:
    """One SVG document per frame: links as segments, joints as circles
    (filled when compliant), the wing polygon shaded. The viewBox is the
    global bounding box of all frames plus a 5% margin, fixed across frames.
    """
    from .kinematics import sweep_arrays  # local import to avoid cycles at import time

    if frames < 1 or frames > gt.samples:
        raise ValueError(f"frames must be in [1, {gt.samples}]")
    if configurations is None:
        idx = np.linspace(0, gt.samples - 1, frames).astype(int)
        pa = sweep_arrays(m, gt.crank[idx])
        if pa.failed_at is not None:
            raise MechanismValidationError("mechanism no longer assembles while rendering",
                                           code="SWEEP_FAILED")
        configurations = pa.configurations()

    frame_data = []
    all_pts: list[tuple[float, float]] = []
    for c in configurations:
        polylines = {}
        for l in m.links:
            pts = _link_polyline(m, c, l.id)
            polylines[l.id] = pts
            all_pts.extend(pts)
        joints = []
        for j in m.joints:
            p = marker_world(m, c, j.link_a, j.marker_a)
            joints.append((p.x, p.y, isinstance(j.kind, CompliantHinge)))
            all_pts.append((p.x, p.y))
        poly = [(marker_world(m, c, lid, mk).x, marker_world(m, c, lid, mk).y)
                for lid, mk in m.wing_polygon]
        all_pts.extend(poly)
        frame_data.append((polylines, joints, poly))

    xs = [p[0] for p in all_pts]
    ys = [p[1] for p in all_pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    w, h = max(x1 - x0, 1e-9), max(y1 - y0, 1e-9)
    mx, my = 0.05 * w, 0.05 * h
    view_box = f"{_num(x0 - mx)} {_num(-(y1 + my))} {_num(w + 2 * mx)} {_num(h + 2 * my)}"
    stroke = _num(0.01 * max(w, h))
    r_pin = _num(0.015 * max(w, h))

    docs = []
    for polylines, joints, poly in frame_data:
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view_box}">',
            f'<g transform="scale(1,-1)" stroke="#222" stroke-width="{stroke}" '
            'stroke-linecap="round" fill="none">',
        ]
        area = polygon_area_xy(poly)
        if poly and area >= 1e-12:
            pts_attr = " ".join(f"{_num(x)},{_num(y)}" for x, y in poly)
            parts.append(f'<polygon points="{pts_attr}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>')
        for lid, pts in polylines.items():
            if len(pts) >= 2:
                attr = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
                parts.append(f'<polyline points="{attr}"/>')
        for x, y, compliant in joints:
            fill = "#222" if compliant else "#fff"
            parts.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{r_pin}" fill="{fill}"/>')
        parts.append("</g></svg>")
        docs.append("\n".join(parts) + "\n")
    return docs


def polygon_area_xy(pts: list[tuple[float, float]]) -> float:
    if len(pts) < 3:
        return 0.0
    arr = np.asarray(pts)
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

"""JSON instance schema: parsing with field-path diagnostics, canonical
serialization, and content digests.

Document layout::

    {
      "space": "segment" | "square" | "circle"
               | {"kind": "tree", "vertices": V, "edges": [[u, v, len], ...]},
      "agents": [<point>, ...],
      "types": [0, 1, ...],            # optional, segment only (dual mode)
      "prediction": <point>,
      "lambda": 0.5
    }

Points are numbers on segment/circle, ``[x, y]`` pairs on the square and
``{"vertex": v}`` or ``{"edge": e, "offset": o}`` on trees.
"""

from __future__ import annotations

import hashlib
import json

from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    Space,
    SpaceError,
    TreeGraph,
    TreePoint,
    check_point,
)
from .welfare import Profile


class InstanceError(ValueError):
    """Malformed instance document; the message names the offending field."""


def _number(doc, path):
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        raise InstanceError(f"{path}: expected a number, got {doc!r}")
    return float(doc)


def _parse_space(doc, path) -> Space:
    if isinstance(doc, str):
        if doc not in (SEGMENT, SQUARE, CIRCLE):
            raise InstanceError(f"{path}: unknown space kind {doc!r}")
        return Space(doc)
    if not isinstance(doc, dict):
        raise InstanceError(f"{path}: expected a kind string or a tree object")
    if doc.get("kind") != TREE:
        raise InstanceError(f"{path}.kind: expected {TREE!r}, got {doc.get('kind')!r}")
    nv = doc.get("vertices")
    if not isinstance(nv, int) or isinstance(nv, bool) or nv < 1:
        raise InstanceError(f"{path}.vertices: expected a positive integer")
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise InstanceError(f"{path}.edges: expected a list")
    parsed = []
    for i, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 3):
            raise InstanceError(f"{path}.edges[{i}]: expected [u, v, length]")
        u, v = e[0], e[1]
        if not all(isinstance(w, int) and not isinstance(w, bool) for w in (u, v)):
            raise InstanceError(f"{path}.edges[{i}]: endpoints must be integers")
        parsed.append((u, v, _number(e[2], f"{path}.edges[{i}][2]")))
    try:
        return Space(TREE, tree=TreeGraph(nv, parsed))
    except SpaceError as exc:
        raise InstanceError(f"{path}: {exc}") from exc


def _parse_point(space: Space, doc, path):
    kind = space.kind
    if kind in (SEGMENT, CIRCLE):
        pt = _number(doc, path)
    elif kind == SQUARE:
        if not (isinstance(doc, list) and len(doc) == 2):
            raise InstanceError(f"{path}: expected [x, y]")
        pt = (_number(doc[0], f"{path}[0]"), _number(doc[1], f"{path}[1]"))
    else:
        if not isinstance(doc, dict):
            raise InstanceError(f"{path}: expected {{'vertex': v}} or {{'edge': e, 'offset': o}}")
        if "vertex" in doc:
            v = doc["vertex"]
            if not isinstance(v, int) or isinstance(v, bool):
                raise InstanceError(f"{path}.vertex: expected an integer")
            pt = TreePoint.at_vertex(v)
        elif "edge" in doc:
            e = doc["edge"]
            if not isinstance(e, int) or isinstance(e, bool):
                raise InstanceError(f"{path}.edge: expected an integer")
            pt = TreePoint.on_edge(e, _number(doc.get("offset"), f"{path}.offset"))
        else:
            raise InstanceError(f"{path}: needs a 'vertex' or 'edge' key")
    try:
        return check_point(space, pt)
    except SpaceError as exc:
        raise InstanceError(f"{path}: {exc}") from exc


def parse_instance(doc) -> tuple:
    """Parse a document into (space, profile, prediction, lam)."""
    if not isinstance(doc, dict):
        raise InstanceError("instance: expected a JSON object")
    for key in ("space", "agents", "prediction", "lambda"):
        if key not in doc:
            raise InstanceError(f"instance: missing field {key!r}")
    space = _parse_space(doc["space"], "space")
    agents_doc = doc["agents"]
    if not isinstance(agents_doc, list):
        raise InstanceError("agents: expected a list")
    agents = [
        _parse_point(space, a, f"agents[{i}]") for i, a in enumerate(agents_doc)
    ]
    types = None
    if "types" in doc and doc["types"] is not None:
        if space.kind != SEGMENT:
            raise InstanceError("types: agent types are segment-only")
        tdoc = doc["types"]
        if not isinstance(tdoc, list) or len(tdoc) != len(agents):
            raise InstanceError("types: expected a list matching agents in length")
        for i, t in enumerate(tdoc):
            if t not in (0, 1) or isinstance(t, bool):
                raise InstanceError(f"types[{i}]: expected 0 or 1")
        types = tuple(int(t) for t in tdoc)
    prediction = _parse_point(space, doc["prediction"], "prediction")
    lam = _number(doc["lambda"], "lambda")
    if not 0.0 <= lam <= 1.0:
        raise InstanceError(f"lambda: {lam} outside [0, 1]")
    return space, Profile(tuple(agents), types), prediction, lam


def _point_doc(space: Space, pt):
    if space.kind in (SEGMENT, CIRCLE):
        return float(pt)
    if space.kind == SQUARE:
        return [float(pt[0]), float(pt[1])]
    if pt.vertex is not None:
        return {"vertex": int(pt.vertex)}
    return {"edge": int(pt.edge), "offset": float(pt.offset)}


def serialize_instance(space: Space, profile: Profile, prediction, lam: float) -> dict:
    if space.kind == TREE:
        space_doc = {
            "kind": TREE,
            "vertices": space.tree.n_vertices,
            "edges": [[int(u), int(v), float(w)] for u, v, w in space.tree.edges],
        }
    else:
        space_doc = space.kind
    doc = {
        "space": space_doc,
        "agents": [_point_doc(space, check_point(space, p)) for p in profile.points],
        "prediction": _point_doc(space, check_point(space, prediction)),
        "lambda": float(lam),
    }
    if profile.types is not None:
        doc["types"] = list(profile.types)
    return doc


def instance_digest(space: Space, profile: Profile, prediction, lam: float) -> str:
    """Short stable hash of the canonical JSON form."""
    doc = serialize_instance(space, profile, prediction, lam)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]

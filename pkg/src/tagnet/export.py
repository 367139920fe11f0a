"""Serialization of graphs, centrality reports and partitions.

Every writer emits vertices and edges in sorted order so equal inputs give
equal bytes. GraphML and DOT come with small readers for the subset that
is written here, which the round-trip tests rely on.
"""

from __future__ import annotations

import csv
import io
import json
import re
import xml.etree.ElementTree as ET
from xml.sax.saxutils import quoteattr

from .errors import AttributeMismatchError, InputError, PartitionError
from .graph import CooccurrenceGraph, VertexMeta, edge_key

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

# 12 qualitative colours, cycled by community id
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
)


def community_color(cid: int) -> str:
    return PALETTE[cid % len(PALETTE)]


def fmt_number(x: float, digits: int = 6) -> str:
    return format(float(x), f".{digits}g")


def _round(x: float, digits: int = 6) -> float:
    return float(fmt_number(x, digits))


def _check_attributes(g, tables, partition):
    verts = set(g.vertices)
    for t in tables:
        extra = set(t.scores) - verts
        if extra:
            raise AttributeMismatchError(
                f"{t.measure} scores name vertices outside the graph: {sorted(extra)[:5]}"
            )
    if partition is not None:
        assignment = getattr(partition, "assignment", partition)
        missing = verts - set(assignment)
        extra = set(assignment) - verts
        if missing or extra:
            raise PartitionError(
                f"partition does not match graph (missing {sorted(missing)[:5]}, extra {sorted(extra)[:5]})"
            )
        return assignment
    return None


# -- GraphML ---------------------------------------------------------------


def export_graphml(g: CooccurrenceGraph, tables=(), partition=None) -> str:
    """GraphML 1.0 document with ``weight``, ``frequency``, ``is_query``,
    one double attribute per centrality table and an int ``community``."""
    tables = list(tables)
    assignment = _check_attributes(g, tables, partition)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<graphml xmlns="{GRAPHML_NS}" '
        'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
        f'xsi:schemaLocation="{GRAPHML_NS} {GRAPHML_NS}/1.0/graphml.xsd">',
        '  <key id="post_count" for="graph" attr.name="post_count" attr.type="int"/>',
        '  <key id="frequency" for="node" attr.name="frequency" attr.type="int"/>',
        '  <key id="is_query" for="node" attr.name="is_query" attr.type="boolean"/>',
    ]
    for t in tables:
        out.append(f'  <key id="{t.measure}" for="node" attr.name="{t.measure}" attr.type="double"/>')
    if assignment is not None:
        out.append('  <key id="community" for="node" attr.name="community" attr.type="int"/>')
    out.append('  <key id="weight" for="edge" attr.name="weight" attr.type="int"/>')
    out.append('  <graph id="G" edgedefault="undirected">')
    out.append(f'    <data key="post_count">{g.post_count}</data>')
    for tag in g.nodes:
        meta = g.vertices[tag]
        out.append(f"    <node id={quoteattr(tag)}>")
        out.append(f'      <data key="frequency">{meta.frequency}</data>')
        out.append(f'      <data key="is_query">{"true" if meta.is_query else "false"}</data>')
        for t in tables:
            if tag in t.scores:
                out.append(f'      <data key="{t.measure}">{float(t.scores[tag])!r}</data>')
        if assignment is not None:
            out.append(f'      <data key="community">{assignment[tag]}</data>')
        out.append("    </node>")
    for (u, v), w in sorted(g.edges.items()):
        out.append(f"    <edge source={quoteattr(u)} target={quoteattr(v)}>")
        out.append(f'      <data key="weight">{w}</data>')
        out.append("    </edge>")
    out.append("  </graph>")
    out.append("</graphml>")
    return "\n".join(out) + "\n"


def read_graphml(text: str):
    """Parse a GraphML document written by ``export_graphml``.

    Returns ``(graph, node_attributes)`` where ``node_attributes`` maps an
    attribute name (measures, ``community``) to a tag -> value dict.
    """
    ns = {"g": GRAPHML_NS}
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise InputError(f"invalid GraphML: {exc}") from exc
    keys = {}
    for key in root.findall("g:key", ns):
        keys[key.get("id")] = (key.get("attr.name"), key.get("attr.type"))

    def convert(kid, raw):
        name, typ = keys[kid]
        raw = (raw or "").strip()
        if typ in ("int", "long"):
            return name, int(raw)
        if typ in ("double", "float"):
            return name, float(raw)
        if typ == "boolean":
            return name, raw.lower() == "true"
        return name, raw

    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise InputError("GraphML document has no graph element")
    post_count = 0
    for data in graph_el.findall("g:data", ns):
        name, value = convert(data.get("key"), data.text)
        if name == "post_count":
            post_count = value
    vertices = {}
    extra: dict[str, dict] = {}
    for node in graph_el.findall("g:node", ns):
        tag = node.get("id")
        attrs = dict(convert(d.get("key"), d.text) for d in node.findall("g:data", ns))
        vertices[tag] = VertexMeta(
            frequency=attrs.pop("frequency", 0), is_query=attrs.pop("is_query", False)
        )
        for name, value in attrs.items():
            extra.setdefault(name, {})[tag] = value
    edges = {}
    for edge in graph_el.findall("g:edge", ns):
        attrs = dict(convert(d.get("key"), d.text) for d in edge.findall("g:data", ns))
        k = edge_key(edge.get("source"), edge.get("target"))
        edges[k] = edges.get(k, 0) + attrs.get("weight", 1)
    g = CooccurrenceGraph(dict(sorted(vertices.items())), dict(sorted(edges.items())), post_count)
    return g, extra


# -- DOT ---------------------------------------------------------------------


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: CooccurrenceGraph, partition=None) -> str:
    """Undirected DOT; with a partition, vertices are filled by community."""
    assignment = _check_attributes(g, (), partition)
    out = ["graph cooccurrence {", f"  graph [post_count={g.post_count}];"]
    if assignment is not None:
        out.append("  node [style=filled];")
    for tag in g.nodes:
        meta = g.vertices[tag]
        attrs = [f"frequency={meta.frequency}", f"is_query={'true' if meta.is_query else 'false'}"]
        if assignment is not None:
            cid = assignment[tag]
            attrs.append(f"community={cid}")
            attrs.append(f'fillcolor="{community_color(cid)}"')
        out.append(f"  {_dot_id(tag)} [{', '.join(attrs)}];")
    for (u, v), w in sorted(g.edges.items()):
        out.append(f"  {_dot_id(u)} -- {_dot_id(v)} [weight={w}];")
    out.append("}")
    return "\n".join(out) + "\n"


_DOT_TOKEN = re.compile(
    r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<edge>--)|(?P<punct>[{}\[\];=,])|(?P<id>[^\s{}\[\];=,"]+))'
)


def _dot_tokens(text):
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _DOT_TOKEN.match(text, pos)
        if not m:
            raise InputError(f"unexpected DOT input at offset {pos}")
        pos = m.end()
        if m.group("str") is not None:
            raw = m.group("str")[1:-1]
            yield ("id", re.sub(r"\\(.)", r"\1", raw))
        elif m.group("edge"):
            yield ("--", "--")
        elif m.group("punct"):
            yield (m.group("punct"), m.group("punct"))
        else:
            yield ("id", m.group("id"))


def read_dot(text: str):
    """Parse the DOT subset written by ``export_dot``.

    Returns ``(graph, node_attributes)`` like ``read_graphml``.
    """
    toks = list(_dot_tokens(text))
    if len(toks) < 3 or toks[0] != ("id", "graph") or toks[-1][0] != "}":
        raise InputError("expected 'graph <name> { ... }'")
    i = 3 if toks[1][0] == "id" else 2
    body = toks[i:-1]

    def attrs_at(j):
        out = {}
        if j < len(body) and body[j][0] == "[":
            j += 1
            while body[j][0] != "]":
                key = body[j][1]
                val = body[j + 2][1]
                out[key] = val
                j += 3
                if body[j][0] == ",":
                    j += 1
            j += 1
        return out, j

    post_count = 0
    vertices, edges, extra = {}, {}, {}
    j = 0
    while j < len(body):
        kind, val = body[j]
        if kind == ";":
            j += 1
            continue
        if kind == "id" and val in ("graph", "node", "edge") and j + 1 < len(body) and body[j + 1][0] == "[":
            attrs, j = attrs_at(j + 1)
            if val == "graph" and "post_count" in attrs:
                post_count = int(attrs["post_count"])
            continue
        if j + 1 < len(body) and body[j + 1][0] == "--":
            u, v = val, body[j + 2][1]
            attrs, j = attrs_at(j + 3)
            k = edge_key(u, v)
            edges[k] = edges.get(k, 0) + int(attrs.get("weight", 1))
            vertices.setdefault(u, VertexMeta())
            vertices.setdefault(v, VertexMeta())
            continue
        attrs, j = attrs_at(j + 1)
        vertices[val] = VertexMeta(
            frequency=int(attrs.pop("frequency", 0)),
            is_query=attrs.pop("is_query", "false") == "true",
        )
        attrs.pop("fillcolor", None)
        for name, value in attrs.items():
            extra.setdefault(name, {})[val] = int(value) if name == "community" else value
    g = CooccurrenceGraph(dict(sorted(vertices.items())), dict(sorted(edges.items())), post_count)
    return g, extra


# -- reports -----------------------------------------------------------------


def centrality_csv(report, digits: int = 6) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tag", *report.measures])
    for tag, row in report.rows:
        writer.writerow([tag, *(fmt_number(row[m], digits) for m in report.measures)])
    return buf.getvalue()


def _clean_params(params, digits):
    out = {}
    for k, v in sorted(params.items()):
        if isinstance(v, float):
            v = _round(v, digits)
        out[k] = v
    return out


def centrality_json(report, digits: int = 6) -> str:
    doc = {
        "measures": list(report.measures),
        "sort_measure": report.sort_measure,
        "params": {m: _clean_params(t.params, digits) for m, t in report.tables.items()},
        "rows": [
            {"tag": tag, **{m: _round(row[m], digits) for m in report.measures}}
            for tag, row in report.rows
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def load_centrality_json(text: str) -> dict[str, dict[str, float]]:
    """measure -> {tag: score} from a ``centrality_json`` document."""
    try:
        doc = json.loads(text)
        return {m: {row["tag"]: float(row[m]) for row in doc["rows"]} for m in doc["measures"]}
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed centrality document: {exc}") from exc


def partition_json(partition) -> str:
    doc = {
        "q": partition.q,
        "n_communities": partition.n_communities,
        "assignment": dict(sorted(partition.assignment.items())),
        "communities": partition.communities(),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def load_partition_json(text: str):
    from .community import CommunityPartition

    try:
        doc = json.loads(text)
        return CommunityPartition({t: int(c) for t, c in doc["assignment"].items()}, float(doc["q"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed partition document: {exc}") from exc


def summary_text(partition, summaries, measure: str, digits: int = 6) -> str:
    lines = [
        "Hashtag communities (fast greedy modularity, best cut)",
        f"modularity Q = {fmt_number(partition.q, digits)}",
        f"communities: {partition.n_communities}",
        f"ranked by: {measure}",
        "",
    ]
    for s in summaries:
        tags = ", ".join(f"{t} ({fmt_number(v, 4)})" for t, v in s.top)
        lines.append(f"community {s.community} [{s.size} tags]: {tags}")
    return "\n".join(lines) + "\n"

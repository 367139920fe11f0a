"""Command line pipeline: ingest -> graph -> analyze -> plot, plus the
agreement tools ``kappa`` and ``sample-curve``.

Settings come from an optional JSON ``--config`` file whose keys mirror
:class:`PipelineConfig`; command-line flags override the file.

Exit codes: 0 success, 2 usage or input error, 3 analysis infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import __version__
from .agreement import (
    cohens_kappa,
    confusion_matrix,
    cumulative_class_curve,
    load_batched_labels,
    load_labels,
    load_taxonomy,
    percent_agreement,
    stabilization_point,
)
from .centrality import DISTANCE_MODES, centrality_report, parse_measures
from .community import community_summary, detect_communities
from .corpus import (
    FilterConfig,
    filter_by_query,
    filter_posts,
    load_blocklist,
    merge_collections,
    parse_posts,
    write_posts,
)
from .errors import AnalysisError, ConfigError, InputError
from .export import (
    centrality_csv,
    centrality_json,
    export_dot,
    export_graphml,
    fmt_number,
    load_centrality_json,
    load_partition_json,
    partition_json,
    summary_text,
)
from .graph import build_graph, dumps_graph, exclude_tags, largest_component, loads_graph, project_top_n
from .normalize import NormalizationRules, canonical_form, load_translation_map, normalize_corpus
from .viz import layout_force, render_svg

logger = logging.getLogger("tagnet")

EXIT_OK, EXIT_INPUT, EXIT_ANALYSIS = 0, 2, 3


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline; the JSON config file uses these keys."""

    inputs: tuple[str, ...] = ()
    format: str | None = None
    query: tuple[str, ...] = ()
    blocklist: str | None = None
    max_hashtags_per_post: int | None = 30
    min_hashtags_per_post: int = 1
    drop_duplicate_hashtag_sets: bool = True
    translations: str | None = None
    variant_merge_enabled: bool = True
    edit_distance_threshold: int = 1
    plural_folding_enabled: bool = True
    min_frequency_for_canonical: int = 2
    top_n: int | None = None
    min_edge_weight: int = 1
    exclude: tuple[str, ...] = ()
    exclude_query: bool = False
    largest_component: bool = False
    measures: tuple[str, ...] = ("all",)
    distance_mode: str = "inverse_weight"
    damping: float = 0.85
    top_k: int = 10
    plot_top_n: int = 100
    seed: int = 0
    iterations: int = 500
    size_by: str = "eigenvector"
    label_top_k: int = 30
    taxonomy: str | None = None
    window: int = 3
    epsilon_pct: float = 2.0
    output_dir: str = "."
    strict: bool = False

    @classmethod
    def from_dict(cls, data: dict, strict: bool = False) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            if strict:
                raise ConfigError(f"unknown config keys {unknown}")
            logger.warning("ignoring unknown config keys %s", unknown)
        values = {}
        for k, v in data.items():
            if k in known:
                values[k] = tuple(v) if isinstance(v, list) else v
        return cls(**values)

    def validate(self) -> "PipelineConfig":
        for name in ("blocklist", "translations", "taxonomy"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise InputError(f"{name} file not found: {path}")
        for path in self.inputs:
            if not Path(path).is_file():
                raise InputError(f"input file not found: {path}")
        if self.format not in (None, "jsonl", "csv"):
            raise ConfigError(f"format must be jsonl or csv, got {self.format!r}")
        if self.top_n is not None and self.top_n < 1:
            raise ConfigError("top-n must be >= 1")
        if self.plot_top_n < 1:
            raise ConfigError("plot top-n must be >= 1")
        if self.min_edge_weight < 1:
            raise ConfigError("min-edge-weight must be >= 1")
        if self.distance_mode not in DISTANCE_MODES:
            raise ConfigError(f"distance mode must be one of {list(DISTANCE_MODES)}")
        if not 0.0 < self.damping < 1.0:
            raise ConfigError("damping must lie in (0, 1)")
        if self.top_k < 0 or self.label_top_k < 0:
            raise ConfigError("top-k values must be >= 0")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.epsilon_pct <= 0:
            raise ConfigError("epsilon must be > 0")
        FilterConfig(
            max_hashtags_per_post=self.max_hashtags_per_post,
            min_hashtags_per_post=self.min_hashtags_per_post,
        )
        if self.edit_distance_threshold not in (0, 1, 2):
            raise ConfigError("edit distance threshold must be 0, 1 or 2")
        if self.min_frequency_for_canonical < 1:
            raise ConfigError("min frequency for canonical must be >= 1")
        return self


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return PipelineConfig.from_dict(data)


# flag dest -> config field, for flags stored under a different name
_FLAG_FIELDS = {
    "max_hashtags": "max_hashtags_per_post",
    "min_hashtags": "min_hashtags_per_post",
    "edit_distance": "edit_distance_threshold",
    "min_frequency": "min_frequency_for_canonical",
    "epsilon": "epsilon_pct",
}


def resolve_config(args) -> PipelineConfig:
    """Config file values, overridden by any flag the user actually set."""
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if getattr(args, "strict", None):
            with open(args.config, encoding="utf-8") as fh:
                PipelineConfig.from_dict(json.load(fh), strict=True)
    known = {f.name for f in fields(PipelineConfig)}
    overrides = {}
    for dest, value in vars(args).items():
        name = _FLAG_FIELDS.get(dest, dest)
        if name in known and value is not None and value != []:
            overrides[name] = tuple(value) if isinstance(value, list) else value
    return replace(cfg, **overrides).validate()


def _out(cfg: PipelineConfig, name: str) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")
    logger.info("wrote %s", path)


def _json(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def _require(path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{what} not found: {path} (run the previous pipeline step first)")
    return path


def _query(cfg: PipelineConfig) -> tuple[str, ...]:
    return tuple(sorted({canonical_form(q) for q in cfg.query}))


# -- commands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = resolve_config(args)
    if not cfg.inputs:
        raise InputError("no input files given")
    collections = [parse_posts(p, cfg.format, strict=cfg.strict) for p in cfg.inputs]
    posts = merge_collections(collections)
    posts = filter_by_query(posts, cfg.query)
    blocklist = load_blocklist(cfg.blocklist) if cfg.blocklist else frozenset()
    fcfg = FilterConfig(
        blocklist=blocklist,
        max_hashtags_per_post=cfg.max_hashtags_per_post,
        min_hashtags_per_post=cfg.min_hashtags_per_post,
        drop_duplicate_hashtag_sets=cfg.drop_duplicate_hashtag_sets,
    )
    posts, freport = filter_posts(posts, fcfg)
    rules = NormalizationRules(
        translation_map=load_translation_map(cfg.translations) if cfg.translations else {},
        variant_merge_enabled=cfg.variant_merge_enabled,
        edit_distance_threshold=cfg.edit_distance_threshold,
        plural_folding_enabled=cfg.plural_folding_enabled,
        min_frequency_for_canonical=cfg.min_frequency_for_canonical,
    )
    posts, nreport = normalize_corpus(posts, rules)

    out_path = Path(args.output) if args.output else _out(cfg, "posts.jsonl")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_posts(posts, out_path, "csv" if out_path.suffix == ".csv" else "jsonl")
    filter_doc = freport.as_dict()
    filter_doc["parse"] = {
        "duplicates": posts.duplicates,
        "skipped": posts.skipped,
        "sources": [Path(s).name for s in posts.source_files],
    }
    _write(_out(cfg, "filter_report.json"), _json(filter_doc))
    _write(_out(cfg, "normalization_report.json"), _json(nreport.as_dict()))
    print(f"parsed: {freport.input_count} posts ({posts.duplicates} duplicate rows, {posts.skipped} skipped)")
    for rule, n in filter_doc["removed"].items():
        print(f"removed by {rule}: {n}")
    print(f"retained: {freport.retained}")
    print(f"vocabulary: {nreport.vocabulary_before} -> {nreport.vocabulary_after}")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_graph(args) -> int:
    cfg = resolve_config(args)
    src = _require(args.posts or _out(cfg, "posts.jsonl"), "post file")
    posts = parse_posts(src, cfg.format, strict=cfg.strict)
    query = _query(cfg)
    g = build_graph(posts, query)
    drop = set(canonical_form(t) for t in cfg.exclude)
    if cfg.exclude_query:
        drop |= {t for t, meta in g.vertices.items() if meta.is_query}
    if drop:
        g = exclude_tags(g, drop)
    if cfg.top_n is not None or cfg.min_edge_weight > 1:
        g = project_top_n(g, cfg.top_n or len(g.vertices) or 1, cfg.min_edge_weight)
    if cfg.largest_component:
        g = largest_component(g)
    _write(_out(cfg, "graph.json"), dumps_graph(g))
    if args.graphml:
        _write(_out(cfg, "graph.graphml"), export_graphml(g))
    if args.dot:
        _write(_out(cfg, "graph.dot"), export_dot(g))
    print(f"graph: {len(g.vertices)} vertices, {g.n_edges} edges from {g.post_count} posts")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = resolve_config(args)
    measures = parse_measures(" ".join(cfg.measures))
    src = _require(args.graph or _out(cfg, "graph.json"), "graph file")
    g = loads_graph(src.read_text(encoding="utf-8"))
    if not g.vertices:
        raise AnalysisError("graph has no vertices; nothing to analyze")
    if g.n_edges == 0:
        raise AnalysisError(
            "graph has no edges: centrality and modularity are undefined "
            "(check filtering, top-n or min-edge-weight)"
        )
    report = centrality_report(g, measures, distance_mode=cfg.distance_mode, damping=cfg.damping)
    partition = detect_communities(g)
    summaries = community_summary(partition, report.tables[report.sort_measure], cfg.top_k)
    text = summary_text(partition, summaries, report.sort_measure)
    _write(_out(cfg, "centrality.csv"), centrality_csv(report))
    _write(_out(cfg, "centrality.json"), centrality_json(report))
    _write(_out(cfg, "communities.json"), partition_json(partition))
    _write(_out(cfg, "summary.txt"), text)
    if report.tables.get("eigenvector") and report.tables["eigenvector"].params.get("disconnected"):
        print("warning: graph is disconnected; eigenvector scores concentrate on one component "
              "(consider graph --largest-component)", file=sys.stderr)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_plot(args) -> int:
    cfg = resolve_config(args)
    g = loads_graph(_require(args.graph or _out(cfg, "graph.json"), "graph file").read_text(encoding="utf-8"))
    cent_path = _require(args.centrality or _out(cfg, "centrality.json"), "centrality file")
    comm_path = _require(args.communities or _out(cfg, "communities.json"), "community file")
    tables = load_centrality_json(cent_path.read_text(encoding="utf-8"))
    partition = load_partition_json(comm_path.read_text(encoding="utf-8"))
    if cfg.size_by not in tables:
        raise InputError(f"measure {cfg.size_by!r} is not in {cent_path}; available: {sorted(tables)}")
    if not g.vertices:
        raise InputError("graph is empty; nothing to plot")
    g = project_top_n(g, cfg.plot_top_n)
    layout = layout_force(g, cfg.iterations, cfg.seed)
    scores = tables[cfg.size_by]
    missing = set(g.vertices) - set(scores)
    if missing:
        raise InputError(f"centrality file lacks graph vertices {sorted(missing)[:5]}")
    svg = render_svg(
        g,
        layout,
        {t: partition.assignment[t] for t in g.vertices if t in partition.assignment},
        {t: scores[t] for t in g.vertices},
        label_top_k=cfg.label_top_k,
        title=args.title,
    )
    out_path = Path(args.output) if args.output else _out(cfg, "network.svg")
    _write(out_path, svg)
    print(f"wrote {out_path} ({len(g.vertices)} vertices, seed {cfg.seed})")
    return EXIT_OK


def cmd_kappa(args) -> int:
    cfg = resolve_config(args)
    tax = load_taxonomy(cfg.taxonomy)
    a = load_labels(_require(args.labels_a, "label file"))
    b = load_labels(_require(args.labels_b, "label file"))
    m = confusion_matrix(a, b, tax)
    res = cohens_kappa(m)
    pa = percent_agreement(m)
    doc = res.as_dict()
    doc["percent_agreement"] = pa
    doc["classes"] = list(m.classes)
    doc["confusion_matrix"] = m.counts.tolist()
    _write(_out(cfg, "kappa.json"), _json(doc))
    lines = [
        f"items: {res.n}",
        f"observed agreement: {fmt_number(res.observed)}",
        f"expected agreement: {fmt_number(res.expected)}",
        f"percent agreement: {fmt_number(100 * pa)}%",
        f"kappa: {fmt_number(res.kappa)} ({res.band})" + (" [degenerate: one shared class]" if res.degenerate else ""),
    ]
    text = "\n".join(lines) + "\n"
    _write(_out(cfg, "kappa.txt"), text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sample_curve(args) -> int:
    cfg = resolve_config(args)
    tax = load_taxonomy(cfg.taxonomy)
    batches = load_batched_labels(_require(args.batches, "batched label file"))
    curves = cumulative_class_curve(batches, tax)
    point = stabilization_point(curves, cfg.window, cfg.epsilon_pct)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["batch", "items", *(f"class_{c}" for c in curves.classes)])
    seen = 0
    for k, size in enumerate(curves.batch_sizes):
        seen += size
        writer.writerow([k, seen, *(fmt_number(curves.series[c][k]) for c in curves.classes)])
    _write(_out(cfg, "curves.csv"), buf.getvalue())
    doc = {
        "stabilization_index": point,
        "window": cfg.window,
        "epsilon_pct": cfg.epsilon_pct,
        "n_batches": curves.n_batches,
    }
    _write(_out(cfg, "stabilization.json"), _json(doc))
    print(f"batches: {curves.n_batches}")
    print(f"stabilization index: {'none' if point is None else point}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=default, help="JSON file with PipelineConfig keys")
    p.add_argument("--output-dir", dest="output_dir", default=default, help="directory for outputs")
    p.add_argument(
        "--strict",
        action="store_const",
        const=True,
        default=default,
        help="fail on malformed records and unknown config keys",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagnet", description="Hashtag co-occurrence network pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "parse, filter and normalize post exports")
    p.add_argument("inputs", nargs="*", default=None, help="JSONL or CSV export files (merged)")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--query", nargs="+", default=None, help="keep only posts carrying one of these tags")
    p.add_argument("--blocklist", default=None, help="file of tags marking a post as advertisement")
    p.add_argument("--translations", default=None, help="raw<TAB>canonical translation map")
    p.add_argument("--max-hashtags", type=int, default=None)
    p.add_argument("--min-hashtags", type=int, default=None)
    p.add_argument("--keep-duplicate-sets", dest="drop_duplicate_hashtag_sets",
                   action="store_const", const=False, default=None)
    p.add_argument("--no-variant-merge", dest="variant_merge_enabled",
                   action="store_const", const=False, default=None)
    p.add_argument("--no-plural-folding", dest="plural_folding_enabled",
                   action="store_const", const=False, default=None)
    p.add_argument("--edit-distance", type=int, choices=(0, 1, 2), default=None)
    p.add_argument("--min-frequency", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="post file to write (default OUTPUT_DIR/posts.jsonl)")

    p = add("graph", cmd_graph, "build the co-occurrence graph")
    p.add_argument("posts", nargs="?", default=None, help="normalized post file (default OUTPUT_DIR/posts.jsonl)")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--query", nargs="+", default=None, help="tags to flag as query vertices")
    p.add_argument("--top-n", type=int, default=None, help="keep the N most frequent tags")
    p.add_argument("--min-edge-weight", type=int, default=None)
    p.add_argument("--exclude", nargs="+", default=None, help="tags to drop")
    p.add_argument("--exclude-query", action="store_const", const=True, default=None)
    p.add_argument("--largest-component", action="store_const", const=True, default=None)
    p.add_argument("--graphml", action="store_true", help="also write graph.graphml")
    p.add_argument("--dot", action="store_true", help="also write graph.dot")

    p = add("analyze", cmd_analyze, "centrality measures and communities")
    p.add_argument("graph", nargs="?", default=None, help="graph JSON (default OUTPUT_DIR/graph.json)")
    p.add_argument("--measures", nargs="+", default=None, help="measure names or 'all'")
    p.add_argument("--distance-mode", choices=DISTANCE_MODES, default=None)
    p.add_argument("--damping", type=float, default=None)
    p.add_argument("--top-k", type=int, default=None, help="tags listed per community")

    p = add("plot", cmd_plot, "render the network as SVG")
    p.add_argument("graph", nargs="?", default=None, help="graph JSON (default OUTPUT_DIR/graph.json)")
    p.add_argument("--centrality", default=None, help="centrality JSON from analyze")
    p.add_argument("--communities", default=None, help="community JSON from analyze")
    p.add_argument("--top-n", dest="plot_top_n", type=int, default=None, help="vertices drawn (default 100)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--size-by", default=None, help="measure for vertex size (default eigenvector)")
    p.add_argument("--label-top-k", type=int, default=None)
    p.add_argument("--title", default=None)
    p.add_argument("-o", "--output", default=None, help="SVG path (default OUTPUT_DIR/network.svg)")

    p = add("kappa", cmd_kappa, "Cohen's kappa between two label files")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.add_argument("--taxonomy", default=None, help="id,name,description CSV (default: bundled CES table)")

    p = add("sample-curve", cmd_sample_curve, "cumulative class curves and stabilization point")
    p.add_argument("batches", help="batch,item_id,class_id CSV")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None, help="tolerance in percentage points")
    p.add_argument("--taxonomy", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except AnalysisError as exc:
        print(f"tagnet {args.command}: analysis not possible: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (InputError, OSError, ValueError) as exc:
        print(f"tagnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Hashtag co-occurrence networks: ingestion, normalization, centrality,
communities, agreement statistics and export."""

__version__ = "0.1.0"

from .agreement import (
    CESClass,
    ConfusionMatrix,
    CumulativeCurves,
    KappaResult,
    Taxonomy,
    cohens_kappa,
    confusion_matrix,
    cumulative_class_curve,
    default_taxonomy,
    load_taxonomy,
    percent_agreement,
    stabilization_point,
)
from .centrality import (
    MEASURES,
    CentralityReport,
    CentralityTable,
    betweenness,
    centrality_report,
    closeness,
    degree,
    eigenvector,
    hits,
    pagerank,
)
from .community import (
    CommunityPartition,
    Dendrogram,
    best_partition,
    community_summary,
    detect_communities,
    fast_greedy,
    modularity,
)
from .corpus import (
    FilterConfig,
    FilterReport,
    Post,
    PostCollection,
    filter_posts,
    merge_collections,
    parse_posts,
)
from .errors import AnalysisError, InputError, TagnetError
from .export import export_dot, export_graphml, read_dot, read_graphml
from .graph import (
    CooccurrenceGraph,
    VertexMeta,
    build_graph,
    exclude_tags,
    largest_component,
    project_top_n,
)
from .normalize import (
    NormalizationReport,
    NormalizationRules,
    VariantMap,
    build_variant_map,
    canonical_form,
    normalize_corpus,
)
from .viz import LayoutResult, layout_force, render_svg

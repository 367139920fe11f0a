"""Rater agreement and subsample-size statistics for CES labels.

Labels are integer class ids from a taxonomy (the bundled default has the
twelve cultural ecosystem service classes). A label sequence is a mapping
``item_id -> class_id`` from one rater or one automatic source.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyBatchError,
    EmptyMatrixError,
    InputError,
    ItemMismatchError,
    UnknownClassError,
)

# Descriptive bands for reporting only; thresholds after McHugh (2012).
KAPPA_BANDS = (
    (0.20, "none"),
    (0.39, "minimal"),
    (0.59, "weak"),
    (0.79, "moderate"),
    (0.90, "strong"),
    (float("inf"), "almost perfect"),
)


@dataclass(frozen=True)
class CESClass:
    id: int
    name: str
    description: str = ""


@dataclass(frozen=True)
class Taxonomy:
    classes: tuple[CESClass, ...]

    def __post_init__(self):
        ids = [c.id for c in self.classes]
        if len(set(ids)) != len(ids):
            raise InputError("taxonomy class ids must be unique")
        if not ids:
            raise InputError("taxonomy is empty")

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(c.id for c in self.classes)

    def name(self, class_id: int) -> str:
        for c in self.classes:
            if c.id == class_id:
                return c.name
        raise UnknownClassError(f"class id {class_id} is not in the taxonomy")

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "Taxonomy":
        return cls(tuple(CESClass(int(i), f"class {i}") for i in ids))


def _read_taxonomy(fh) -> Taxonomy:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or not {"id", "name"} <= set(reader.fieldnames):
        raise InputError("taxonomy CSV needs an 'id,name,description' header")
    classes = []
    for row in reader:
        try:
            cid = int(row["id"])
        except (TypeError, ValueError):
            raise InputError(f"bad taxonomy id {row['id']!r}") from None
        classes.append(CESClass(cid, row["name"].strip(), (row.get("description") or "").strip()))
    return Taxonomy(tuple(classes))


def load_taxonomy(path=None) -> Taxonomy:
    """Load a taxonomy CSV; without a path, the bundled CES table."""
    if path is None:
        text = resources.files("tagnet").joinpath("data/ces_taxonomy.csv").read_text("utf-8")
        return _read_taxonomy(io.StringIO(text))
    with open(path, encoding="utf-8", newline="") as fh:
        return _read_taxonomy(fh)


def default_taxonomy() -> Taxonomy:
    return load_taxonomy()


def _coerce_taxonomy(taxonomy) -> Taxonomy:
    if taxonomy is None:
        return default_taxonomy()
    if isinstance(taxonomy, Taxonomy):
        return taxonomy
    return Taxonomy.from_ids(taxonomy)


def load_labels(path) -> dict[str, int]:
    """Read an ``item_id,class_id`` CSV (header required)."""
    labels = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"item_id", "class_id"} <= set(reader.fieldnames):
            raise InputError(f"{path}: label CSV needs an 'item_id,class_id' header")
        for row in reader:
            item = row["item_id"].strip()
            if item in labels:
                raise InputError(f"{path}: item {item!r} labelled twice")
            try:
                labels[item] = int(row["class_id"])
            except (TypeError, ValueError):
                raise InputError(f"{path}: bad class id {row['class_id']!r} for {item!r}") from None
    return labels


def load_batched_labels(path) -> list[list[int]]:
    """Read a ``batch,item_id,class_id`` CSV into batches ordered by batch id."""
    batches: dict[int, list[int]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"batch", "class_id"} <= set(reader.fieldnames):
            raise InputError(f"{path}: batched label CSV needs a 'batch,item_id,class_id' header")
        for row in reader:
            try:
                batches.setdefault(int(row["batch"]), []).append(int(row["class_id"]))
            except (TypeError, ValueError):
                raise InputError(f"{path}: bad row {row}") from None
    return [batches[b] for b in sorted(batches)]


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows: rater A, columns: rater B
    classes: tuple[int, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise InputError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(self.classes):
            raise InputError("class list does not match matrix size")
        if (counts < 0).any():
            raise InputError("confusion matrix entries must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts, classes=None) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        if classes is None:
            classes = tuple(range(1, counts.shape[0] + 1))
        return cls(counts, tuple(classes))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def transpose(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts.T.copy(), self.classes)


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed: float
    expected: float
    n: int
    degenerate: bool = False

    @property
    def band(self) -> str:
        return kappa_band(self.kappa)

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed,
            "expected_agreement": self.expected,
            "n": self.n,
            "degenerate": self.degenerate,
            "band": self.band,
        }


def kappa_band(kappa: float) -> str:
    for upper, label in KAPPA_BANDS:
        if kappa <= upper:
            return label
    return KAPPA_BANDS[-1][1]


def confusion_matrix(
    a: Mapping[str, int], b: Mapping[str, int], taxonomy=None
) -> ConfusionMatrix:
    """Cross-tabulate two raters over the same items."""
    tax = _coerce_taxonomy(taxonomy)
    only_a, only_b = set(a) - set(b), set(b) - set(a)
    if only_a or only_b:
        raise ItemMismatchError(only_a, only_b)
    if not a:
        raise EmptyMatrixError("no items to compare")
    pos = {cid: i for i, cid in enumerate(tax.ids)}
    counts = np.zeros((len(pos), len(pos)), dtype=np.int64)
    for item in sorted(a):
        for label in (a[item], b[item]):
            if label not in pos:
                raise UnknownClassError(f"item {item!r} has unknown class id {label}")
        counts[pos[a[item]], pos[b[item]]] += 1
    return ConfusionMatrix(counts, tax.ids)


def _matrix(m) -> np.ndarray:
    counts = m.counts if isinstance(m, ConfusionMatrix) else np.asarray(m, dtype=np.int64)
    if counts.size == 0 or counts.sum() == 0:
        raise EmptyMatrixError("confusion matrix is empty")
    return counts


def cohens_kappa(m) -> KappaResult:
    """Cohen's kappa, ``(p_o - p_e) / (1 - p_e)``.

    Computed from integer counts as ``(N*trace - sum(row*col)) /
    (N^2 - sum(row*col))`` so that relabelling and transposition leave the
    value bit-identical. When both raters use one and the same class
    (``p_e == 1``) kappa is reported as 1 with ``degenerate=True``.
    """
    counts = _matrix(m)
    n = int(counts.sum())
    trace = int(np.trace(counts))
    chance = int(sum(int(r) * int(c) for r, c in zip(counts.sum(axis=1), counts.sum(axis=0))))
    observed = trace / n
    expected = chance / (n * n)
    if chance == n * n:
        return KappaResult(1.0, observed, expected, n, degenerate=True)
    kappa = (n * trace - chance) / (n * n - chance)
    return KappaResult(kappa, observed, expected, n)


def percent_agreement(m) -> float:
    counts = _matrix(m)
    return int(np.trace(counts)) / int(counts.sum())


@dataclass(frozen=True)
class CumulativeCurves:
    classes: tuple[int, ...]
    series: dict[int, list[float]]  # class id -> cumulative % after each batch
    batch_sizes: tuple[int, ...]

    @property
    def n_batches(self) -> int:
        return len(self.batch_sizes)


def _batch_labels(batch) -> list[int]:
    if isinstance(batch, Mapping):
        return [batch[k] for k in sorted(batch)]
    return list(batch)


def cumulative_class_curve(batches: Sequence, taxonomy=None) -> CumulativeCurves:
    """Cumulative percentage of items per class after each successive batch."""
    tax = _coerce_taxonomy(taxonomy)
    if not batches:
        raise EmptyBatchError("no batches given")
    pos = {cid: i for i, cid in enumerate(tax.ids)}
    totals = np.zeros(len(pos), dtype=np.int64)
    seen = 0
    series = {cid: [] for cid in tax.ids}
    sizes = []
    for k, batch in enumerate(batches):
        labels = _batch_labels(batch)
        if not labels:
            raise EmptyBatchError(f"batch {k} is empty")
        for label in labels:
            if label not in pos:
                raise UnknownClassError(f"batch {k} has unknown class id {label}")
            totals[pos[label]] += 1
        seen += len(labels)
        sizes.append(len(labels))
        for cid, i in pos.items():
            series[cid].append(100.0 * int(totals[i]) / seen)
    return CumulativeCurves(tax.ids, series, tuple(sizes))


def stabilization_point(curves, window: int = 3, epsilon_pct: float = 2.0) -> int | None:
    """First batch index (0-based) at which every class curve has moved by
    less than ``epsilon_pct`` points on each of the last ``window`` steps.

    The earliest possible answer is ``window``; None means never.
    """
    if window < 1:
        raise InputError("window must be >= 1")
    if epsilon_pct <= 0:
        raise InputError("epsilon_pct must be > 0")
    series = curves.series if isinstance(curves, CumulativeCurves) else curves
    values = np.array([series[c] for c in sorted(series)], dtype=float)
    if values.size == 0:
        return None
    steps = np.abs(np.diff(values, axis=1)).max(axis=0)  # steps[t-1]: change t-1 -> t
    for t in range(window, values.shape[1]):
        if (steps[t - window:t] < epsilon_pct).all():
            return t
    return None

import random

import numpy as np
import pytest
from sklearn.metrics import cohen_kappa_score

from conftest import DATA
from tagnet.agreement import (
    ConfusionMatrix,
    Taxonomy,
    cohens_kappa,
    confusion_matrix,
    cumulative_class_curve,
    default_taxonomy,
    kappa_band,
    load_batched_labels,
    load_labels,
    load_taxonomy,
    percent_agreement,
    stabilization_point,
)
from tagnet.errors import (
    EmptyBatchError,
    EmptyMatrixError,
    InputError,
    ItemMismatchError,
    UnknownClassError,
)

WORKED = [[20, 5], [10, 15]]


def seq(labels):
    return {f"i{k:03d}": c for k, c in enumerate(labels)}


# -- taxonomy -----------------------------------------------------------------


def test_default_taxonomy_has_twelve_classes():
    tax = default_taxonomy()
    assert tax.ids == tuple(range(1, 13))
    names = [c.name.lower() for c in tax.classes]
    assert names[0].startswith("artistic") and names[-1] == "other"
    assert all(c.description for c in tax.classes)


def test_custom_taxonomy(tmp_path):
    path = tmp_path / "tax.csv"
    path.write_text("id,name,description\n7,reef,coral reef\n9,beach,\n")
    tax = load_taxonomy(path)
    assert tax.ids == (7, 9) and tax.name(9) == "beach"
    with pytest.raises(UnknownClassError):
        tax.name(1)
    bad = tmp_path / "bad.csv"
    bad.write_text("id,name\n1,a\n1,b\n")
    with pytest.raises(InputError):
        load_taxonomy(bad)


# -- confusion matrix -----------------------------------------------------------


def test_identical_sequences_diagonal():
    a = seq([1, 2, 3, 3, 5, 5, 5, 12, 11, 1])
    m = confusion_matrix(a, dict(a))
    assert m.n == 10
    assert np.count_nonzero(m.counts - np.diag(np.diag(m.counts))) == 0


def test_disjoint_items_rejected():
    with pytest.raises(ItemMismatchError) as exc:
        confusion_matrix({"x": 1}, {"y": 1})
    assert exc.value.only_a == ["x"] and exc.value.only_b == ["y"]


def test_hand_tabulation():
    m = confusion_matrix(seq([1, 1, 2]), seq([1, 2, 2]), [1, 2])
    assert m.counts.tolist() == [[1, 1], [0, 1]]


def test_unknown_class_and_empty():
    with pytest.raises(UnknownClassError):
        confusion_matrix({"x": 13}, {"x": 1})
    with pytest.raises(EmptyMatrixError):
        confusion_matrix({}, {})


def test_matrix_validation():
    with pytest.raises(InputError):
        ConfusionMatrix.from_counts([[1, 2, 3]])
    with pytest.raises(InputError):
        ConfusionMatrix.from_counts([[1, -1], [0, 1]])


# -- kappa --------------------------------------------------------------------


def test_kappa_perfect():
    r = cohens_kappa(ConfusionMatrix.from_counts(np.diag([5, 5, 5])))
    assert r.kappa == 1.0 and r.observed == 1.0 and not r.degenerate


def test_kappa_worked_example():
    r = cohens_kappa(ConfusionMatrix.from_counts(WORKED))
    assert r.observed == pytest.approx(0.7) and r.expected == pytest.approx(0.5)
    assert r.kappa == pytest.approx(0.4, abs=1e-12) and r.n == 50
    assert r.band == "weak"


def test_kappa_independent_raters():
    rng = np.random.default_rng(41)
    for _ in range(50):
        k = int(rng.integers(2, 6))
        rows = rng.integers(1, 6, size=k)
        cols = rng.integers(1, 6, size=k)
        assert cohens_kappa(np.outer(rows, cols)).kappa == pytest.approx(0.0, abs=1e-12)


def test_kappa_degenerate_and_constant_different():
    r = cohens_kappa(ConfusionMatrix.from_counts([[7, 0], [0, 0]]))
    assert r.kappa == 1.0 and r.degenerate
    r = cohens_kappa(ConfusionMatrix.from_counts([[0, 7], [0, 0]]))
    assert r.kappa == 0.0 and r.observed == 0.0 and r.expected == 0.0
    with pytest.raises(EmptyMatrixError):
        cohens_kappa(np.zeros((2, 2), dtype=int))


def test_kappa_matches_sklearn():
    rng = random.Random(42)
    for _ in range(100):
        n = rng.randint(1, 60)
        k = rng.randint(2, 6)
        a = [rng.randint(1, k) for _ in range(n)]
        b = [x if rng.random() < 0.6 else rng.randint(1, k) for x in a]
        r = cohens_kappa(confusion_matrix(seq(a), seq(b)))
        if r.degenerate:
            continue
        assert r.kappa == pytest.approx(cohen_kappa_score(a, b), abs=1e-12)


def test_kappa_invariances():
    rng = np.random.default_rng(43)
    for _ in range(200):
        k = int(rng.integers(1, 8))
        m = rng.integers(0, 20, size=(k, k))
        if m.sum() == 0:
            continue
        base = cohens_kappa(m)
        perm = rng.permutation(k)
        assert cohens_kappa(m[np.ix_(perm, perm)]).kappa == base.kappa
        assert cohens_kappa(m.T).kappa == base.kappa
        pa = percent_agreement(m)
        assert base.kappa <= pa + 1e-12
        if base.expected == 0:
            assert base.kappa == pytest.approx(pa)
        elif not base.degenerate:
            assert base.kappa < pa


def test_percent_agreement():
    assert percent_agreement(np.diag([3, 4])) == 1.0
    assert percent_agreement(np.array([[0, 3], [4, 0]])) == 0.0
    assert percent_agreement(np.array(WORKED)) == 0.7


def test_bands():
    assert [kappa_band(x) for x in (-0.1, 0.1, 0.3, 0.51, 0.7, 0.87, 0.95)] == [
        "none", "none", "minimal", "weak", "moderate", "strong", "almost perfect",
    ]


def test_label_files():
    a, b = load_labels(DATA / "labels_a.csv"), load_labels(DATA / "labels_b.csv")
    m = confusion_matrix(a, b, default_taxonomy())
    assert m.counts[:2, :2].tolist() == WORKED
    assert cohens_kappa(m).kappa == pytest.approx(0.4)


def test_label_file_errors(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("item,class\n1,2\n")
    with pytest.raises(InputError):
        load_labels(p)
    p.write_text("item_id,class_id\na,1\na,2\n")
    with pytest.raises(InputError):
        load_labels(p)
    p.write_text("item_id,class_id\na,one\n")
    with pytest.raises(InputError):
        load_labels(p)


# -- cumulative curves --------------------------------------------------------


def test_one_batch_all_class5():
    c = cumulative_class_curve([[5] * 10])
    assert c.series[5] == [100.0]
    assert all(c.series[k] == [0.0] for k in c.classes if k != 5)


def test_two_batches():
    c = cumulative_class_curve([[1] * 10, [2] * 10])
    assert c.series[1] == [100.0, 50.0] and c.series[2] == [0.0, 50.0]


def test_identical_batches_constant():
    c = cumulative_class_curve([[1, 2, 2, 7]] * 5)
    assert all(len(set(s)) == 1 for s in c.series.values())


def test_curves_sum_to_100():
    rng = random.Random(44)
    batches = [[rng.randint(1, 12) for _ in range(rng.randint(1, 10))] for _ in range(30)]
    c = cumulative_class_curve(batches)
    for k in range(30):
        assert sum(c.series[cl][k] for cl in c.classes) == pytest.approx(100.0, abs=1e-9)


def test_curve_errors():
    with pytest.raises(EmptyBatchError):
        cumulative_class_curve([])
    with pytest.raises(EmptyBatchError):
        cumulative_class_curve([[1], []])
    with pytest.raises(UnknownClassError):
        cumulative_class_curve([[99]])
    assert cumulative_class_curve([{"b": 2, "a": 1}], Taxonomy.from_ids([1, 2])).series[1] == [50.0]


# -- stabilization --------------------------------------------------------------


def test_constant_curves_stabilize_at_window():
    c = cumulative_class_curve([[1, 2]] * 6)
    assert stabilization_point(c, window=3) == 3
    assert stabilization_point(c, window=1) == 1


def test_alternating_never_within_four():
    # class 1 then class 2 then class 1 ...: 100, 50, 66.7, 50
    c = cumulative_class_curve([[1], [2], [1], [2]])
    assert stabilization_point(c, window=3, epsilon_pct=2.0) is None


def _one_over_t_oracle(n, window, eps):
    # class-1 share after t+1 single-item batches is 100 / (t + 1)
    vals = [100.0 / (t + 1) for t in range(n)]
    deltas = [abs(vals[t] - vals[t - 1]) for t in range(1, n)]
    for t in range(window, n):
        if all(d < eps for d in deltas[t - window:t]):
            return t
    return None


def test_one_over_t_fixture():
    batches = load_batched_labels(DATA / "batches_one_over_t.csv")
    c = cumulative_class_curve(batches)
    assert stabilization_point(c, 3, 2.0) == 9 == _one_over_t_oracle(len(batches), 3, 2.0)
    for window in (1, 2, 4):
        for eps in (0.5, 1.0, 5.0):
            assert stabilization_point(c, window, eps) == _one_over_t_oracle(len(batches), window, eps)


def test_insufficient_data_and_validation():
    c = cumulative_class_curve([[1, 2, 3]])
    assert stabilization_point(c, window=3) is None
    with pytest.raises(InputError):
        stabilization_point(c, window=0)
    with pytest.raises(InputError):
        stabilization_point(c, epsilon_pct=0)

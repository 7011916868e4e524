import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcfl.classifiers import LinearSvcModel
from svcfl.errors import EmptyEvalError, ShapeError
from svcfl.evaluation import (
    HEADER,
    Cell,
    CellFailure,
    ConfusionMatrix,
    ExperimentOptions,
    MetricsReport,
    confusion,
    default_cells,
    evaluate,
    metrics,
    published_reports,
    parse_json,
    percent,
    render_json,
    render_table,
    run_experiment_matrix,
    split_silos,
)

pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n), st.lists(st.integers(0, 1), min_size=n, max_size=n))
)


def count_oracle(pred, truth):
    tp = fp = fn = tn = 0
    for p, t in zip(pred, truth):
        if p == 1 and t == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif t == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def metric_oracle(pred, truth):
    tp, fp, fn, tn = count_oracle(pred, truth)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1, (tp + tn) / len(pred)


# ---- confusion


def test_confusion_examples():
    assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionMatrix(tp=2, fp=0, fn=0, tn=1)
    cm = confusion([0, 1, 1, 0], [1, 0, 0, 1])
    assert cm.tp == 0 and cm.tn == 0
    with pytest.raises(ShapeError):
        confusion([1, 0], [1])
    with pytest.raises(ValueError):
        confusion([2], [1])


def test_confusion_random_pair_matches_counter():
    rng = np.random.default_rng(50)
    p, t = rng.integers(0, 2, 50).tolist(), rng.integers(0, 2, 50).tolist()
    cm = confusion(p, t)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == count_oracle(p, t)


# ---- metrics


def test_metrics_examples():
    perfect = evaluate([1, 0, 1, 0], [1, 0, 1, 0])
    assert (perfect.accuracy, perfect.precision, perfect.recall, perfect.f1_positive, perfect.f1_weighted) == (1.0,) * 5
    r = metrics(ConfusionMatrix(tp=3, fp=1, fn=1, tn=5))
    assert (r.precision, r.recall, r.f1_positive, r.accuracy) == (0.75, 0.75, 0.75, 0.8)
    d = metrics(ConfusionMatrix(tp=0, fp=0, fn=2, tn=3))
    assert d.precision == 0.0
    assert "precision" in d.degenerate


def test_empty_matrix():
    with pytest.raises(EmptyEvalError):
        metrics(ConfusionMatrix(0, 0, 0, 0))


def test_f1_weighted_by_hand():
    # class 1: P=3/4, R=3/4, F1=3/4, support 4; class 0: P=5/6, R=5/6, support 6
    r = metrics(ConfusionMatrix(tp=3, fp=1, fn=1, tn=5))
    assert r.f1_weighted == pytest.approx((4 * 0.75 + 6 * 5 / 6) / 10, abs=1e-15)


def test_metrics_oracle_thousand_pairs():
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        p, t = rng.integers(0, 2, n).tolist(), rng.integers(0, 2, n).tolist()
        r = evaluate(p, t)
        assert r.confusion == count_oracle(p, t)
        assert (r.precision, r.recall, r.f1_positive, r.accuracy) == metric_oracle(p, t)


@settings(max_examples=200, deadline=None)
@given(pairs)
def test_accuracy_is_mean_agreement(pair):
    p, t = pair
    assert evaluate(p, t).accuracy == np.mean(np.array(p) == np.array(t))


@settings(max_examples=200, deadline=None)
@given(pairs)
def test_transposed_matrix_swaps_classes(pair):
    p, t = pair
    flipped = metrics(confusion([1 - v for v in p], [1 - v for v in t]))
    direct = metrics(confusion(p, t).transposed())
    assert (flipped.precision, flipped.recall) == (direct.precision, direct.recall)
    tp, fp, fn, tn = count_oracle(p, t)
    assert direct.precision == (tn / (tn + fn) if tn + fn else 0.0)
    assert direct.recall == (tn / (tn + fp) if tn + fp else 0.0)


@settings(max_examples=200, deadline=None)
@given(pairs)
def test_f1_between_precision_and_recall(pair):
    r = evaluate(*pair)
    if "precision" not in r.degenerate and "recall" not in r.degenerate and r.precision + r.recall > 0:
        assert min(r.precision, r.recall) - 1e-15 <= r.f1_positive <= max(r.precision, r.recall) + 1e-15
    for v in (r.accuracy, r.precision, r.recall, r.f1_positive, r.f1_weighted):
        assert 0.0 <= v <= 1.0


def test_report_rejects_out_of_range():
    with pytest.raises(ValueError):
        MetricsReport(1.2, 0.5, 0.5, 0.5, 0.5, 4, "fedavg", "svc")


# ---- rendering


def test_percent_rounds_half_up():
    assert percent(0.63) == "63%"
    assert percent(0.625) == "63%"
    assert percent(0.635) == "64%"
    assert percent(0.0) == "0%"
    assert percent(1.0) == "100%"


def test_single_row_rendering():
    r = MetricsReport(0.63, 0.86, 0.52, 0.65, 0.82, 100, "raw-single-site", "svc", site="adults-uci")
    table = render_table([r])
    assert table.splitlines()[0].split() == list(HEADER)
    assert table.splitlines()[1].split()[-4:] == ["86%", "52%", "82%", "63%"]


def test_empty_table_is_header_only():
    assert render_table([]).splitlines() == ["  ".join(HEADER)]


@settings(max_examples=100, deadline=None)
@given(st.lists(pairs, min_size=0, max_size=4))
def test_json_round_trip(batch):
    reports = [evaluate(p, t, condition="meta-vote", classifier_kind="rf") for p, t in batch]
    raw = render_json(reports)
    back = parse_json(raw)
    assert back == reports
    assert render_table(back) == render_table(reports)
    assert render_json(back) == raw


def test_published_rows_echo_table_layout():
    rows = render_table(published_reports()).splitlines()
    assert rows[-1].split() == ["Federated", "learning", "SVC", "99%", "99%", "99%", "99%"]
    assert rows[1].split()[-4:] == ["85%", "15%", "75%", "62%"]


# ---- experiment matrix


def test_cells():
    cells = default_cells()
    assert len(cells) == 13
    assert str(Cell("svc", "raw-single-site", "adults-uci")) == "svc/raw-single-site/adults-uci"
    with pytest.raises(ValueError):
        Cell("dt", "fedavg")
    with pytest.raises(ValueError):
        Cell("svc", "raw-single-site")


def test_empty_config_list(prepared):
    assert run_experiment_matrix(prepared.silos, []) == []


def test_union_split_is_stratified_partition(prepared):
    train, test = split_silos(prepared.silos, 0.2, 42)
    total = sum(len(d) for d in prepared.silos)
    assert sum(len(d) for d in train) + len(test) == total
    assert abs(len(test) - 0.2 * total) <= 2
    union_rate = np.mean(np.concatenate([d.labels() for d in prepared.silos]))
    assert abs(np.mean(test.labels()) - union_rate) < 0.01
    assert [d.source_id for d in train] == [d.source_id for d in prepared.silos]


def test_small_matrix_runs_and_is_deterministic(prepared):
    opts = ExperimentOptions(n_rounds=2, local_epochs=2)
    cells = [Cell("svc", "fedavg"), Cell("dt", "meta-vote"), Cell("dt", "raw-single-site", "adults-uci")]
    a = run_experiment_matrix(prepared.silos, cells, opts)
    b = run_experiment_matrix(prepared.silos, cells, opts)
    assert render_json(a) == render_json(b)
    assert [(r.classifier_kind, r.condition, r.site) for r in a] == [
        ("svc", "fedavg", ""),
        ("dt", "meta-vote", ""),
        ("dt", "raw-single-site", "adults-uci"),
    ]
    assert len({r.n for r in a}) == 1


def test_component_error_carries_cell(prepared):
    cell = Cell("svc", "pooled-diagnostic")
    wrong = LinearSvcModel((1.0,), 0.0, 1.0, (0.0,), (1.0,))
    with pytest.raises(CellFailure) as info:
        run_experiment_matrix(prepared.silos, [cell], models={cell: wrong})
    assert info.value.cell == cell
    assert "svc/pooled-diagnostic" in str(info.value)

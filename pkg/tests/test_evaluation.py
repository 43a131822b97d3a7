import numpy as np
import pytest

from mdfs.data import Dataset
from mdfs.evaluation import (
    EvalReport,
    ExperimentError,
    ExperimentSpec,
    MethodSpec,
    compare_methods,
    derive_seed,
    fold_mauc,
    run_experiment,
)
from mdfs.selectors import SelectorConfig, select


def _ds(n=60, m=6, c=3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % c
    x = rng.normal(size=(n, m))
    x[:, 0] += labels
    return Dataset(x, labels, (), c)


def _report(a_vals, b_vals, baseline_label="base"):
    a_vals, b_vals = np.asarray(a_vals), np.asarray(b_vals)
    return EvalReport(
        (baseline_label, "other"), ("nb",), (5,), a_vals.size, 1, 0,
        {(baseline_label, "nb", 5): a_vals, ("other", "nb", 5): b_vals}, {}, [],
    )


def test_derive_seed_stable():
    assert derive_seed(1, "mdfs") == derive_seed(1, "mdfs")
    assert derive_seed(1, "mdfs") != derive_seed(1, "chi")
    assert derive_seed(1, 2) != derive_seed(2, 1)


def test_fold_count_tiny_spec():
    ds = _ds(n=20, m=3, c=2)
    spec = ExperimentSpec(ds, (MethodSpec("chi", "chi"),), subset_sizes=(2,), folds=2, repeats=1)
    report = run_experiment(spec)
    assert report.fold_values[("chi", "nb", 2)].shape == (2,)


def test_same_method_twice_no_difference():
    spec = ExperimentSpec(
        _ds(), (MethodSpec("a", "chi"), MethodSpec("b", "chi")), subset_sizes=(3,), folds=5, repeats=2
    )
    report = run_experiment(spec)
    res = report.wilcoxon[("a", "b", "nb", 3)]
    assert res.decision == "no-difference" and res.p_value == 1.0
    assert compare_methods(report, "a")["nb"] == {"a": {3: ""}, "b": {3: ""}}


def test_deterministic_and_thread_independent():
    spec = ExperimentSpec(
        _ds(), (MethodSpec("mdfs", "mdfs"), MethodSpec("relieff", "relieff")),
        classifiers=("nb", "1nn"), subset_sizes=(2, 4), folds=4, repeats=2, seed=5,
    )
    a = run_experiment(spec)
    b = run_experiment(spec)
    c = run_experiment(spec, threads=4)
    assert a == b == c
    for vals in a.fold_values.values():
        assert np.all((vals >= 0) & (vals <= 1))


def test_prefix_matches_direct_selection():
    # K results come from the K_max run; greedy selectors make that exact
    ds = _ds(m=8)
    for method in ("mdfs", "mrmr", "schi", "relieff"):
        full = select(method, ds, SelectorConfig(8, seed=3))
        for k in (1, 4):
            assert full.selected[:k] == select(method, ds, SelectorConfig(k, seed=3)).selected


def test_compare_worse_marker():
    rng = np.random.default_rng(1)
    base = 0.8 + rng.normal(scale=0.01, size=20)
    table = compare_methods(_report(base, base - 0.05), "base")
    assert table["nb"]["other"][5] == "†"
    assert table["nb"]["base"][5] == ""
    better = compare_methods(_report(base, base + 0.05), "base")
    assert better["nb"]["other"][5] == "‡"


def test_compare_table_shape():
    spec = ExperimentSpec(
        _ds(), (MethodSpec("mdfs", "mdfs"), MethodSpec("chi", "chi"), MethodSpec("su", "su")),
        subset_sizes=(1, 2, 3), folds=3, repeats=1,
    )
    table = compare_methods(run_experiment(spec), "mdfs")
    assert set(table["nb"]) == {"mdfs", "chi", "su"}
    assert all(set(row) == {1, 2, 3} for row in table["nb"].values())
    with pytest.raises(ExperimentError):
        compare_methods(run_experiment(spec), "lasso")


def test_spec_problems_exhaustive():
    spec = ExperimentSpec(
        _ds(), (MethodSpec("x", "nope"), MethodSpec("x", "chi", {"bogus": 1})),
        classifiers=("svm",), subset_sizes=(0, 99), folds=1, repeats=0,
    )
    problems = spec.problems()
    assert len(problems) == 8
    with pytest.raises(ExperimentError):
        run_experiment(spec)


def test_fold_mauc_subset_of_classes():
    scores = np.array([[0.9, 0.1, 0.0], [0.2, 0.8, 0.0], [0.7, 0.3, 0.0]])
    assert fold_mauc(scores, [0, 1, 0]) == 1.0
    with pytest.raises(ExperimentError):
        fold_mauc(scores, [1, 1, 1])


def test_selector_failure_is_reported():
    def broken(dataset, config):
        raise RuntimeError("boom")

    spec = ExperimentSpec(_ds(), (MethodSpec("broken", broken),), subset_sizes=(2,), folds=2, repeats=1)
    with pytest.raises(ExperimentError, match="boom"):
        run_experiment(spec)


def test_audit_records_training_rows_only():
    spec = ExperimentSpec(_ds(), (MethodSpec("chi", "chi"),), subset_sizes=(2,), folds=3, repeats=2)
    report = run_experiment(spec)
    assert len(report.audit) == 6
    for rec in report.audit:
        assert np.intersect1d(rec["rows_seen"], rec["test_rows"]).size == 0
        assert rec["rows_seen"].size + rec["test_rows"].size == 60

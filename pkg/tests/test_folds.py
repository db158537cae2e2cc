import numpy as np
import pytest

from voicemarkers.errors import DataError
from voicemarkers.features import Dataset
from voicemarkers.learn import make_fold_plan


def _dataset(n_participants=20, rows_per=4, n_high=8, seed=0):
    rng = np.random.default_rng(seed)
    pids, ys, keys = [], [], []
    for i in range(n_participants):
        y = 1 if i < n_high else 0
        for q in range(rows_per):
            pids.append("P%02d" % i)
            ys.append(y)
            keys.append(("P%02d" % i, "q%d" % q))
    X = rng.standard_normal((len(pids), 5))
    return Dataset(X=X, y=np.array(ys), feature_names=tuple("f%d" % j for j in range(5)),
                   participant_ids=pids, row_keys=keys, condition="cognitive",
                   ecog=rng.uniform(1, 4, len(pids)))


def test_outer_folds_partition_participants():
    ds = _dataset()
    plan = make_fold_plan(ds, seed=3)
    assert len(plan.outer) == 10
    everyone = [p for fold in plan.outer for p in fold]
    assert sorted(everyone) == sorted(set(ds.participant_ids))


def test_folds_are_stratified():
    ds = _dataset(n_participants=30, n_high=12)
    plan = make_fold_plan(ds, seed=1)
    label = {p: y for p, y in zip(ds.participant_ids, ds.y)}
    for fold in plan.outer:
        highs = sum(label[p] for p in fold)
        assert 1 <= highs <= 2  # 12 highs over 10 folds


def test_inner_folds_nest_inside_outer_train():
    ds = _dataset()
    plan = make_fold_plan(ds, seed=5)
    for k, fold in enumerate(plan.outer):
        train = set(p for j, f in enumerate(plan.outer) if j != k for p in f)
        inner = plan.inner[k]
        assert len(inner) == 3
        inner_all = [p for part in inner for p in part]
        assert sorted(inner_all) == sorted(train)
        for part in inner:
            assert part  # no empty inner fold


def test_fold_plan_deterministic_and_seed_sensitive():
    ds = _dataset()
    a = make_fold_plan(ds, seed=7)
    b = make_fold_plan(ds, seed=7)
    c = make_fold_plan(ds, seed=8)
    assert a.outer == b.outer and a.inner == b.inner
    assert a.outer != c.outer


def test_fold_plan_json_roundtrip(tmp_path):
    ds = _dataset()
    plan = make_fold_plan(ds, seed=2)
    path = str(tmp_path / "plan.json")
    plan.to_json(path)
    from voicemarkers.learn import FoldPlan
    back = FoldPlan.from_json(path)
    assert back.outer == plan.outer
    assert back.inner == plan.inner
    assert back.seed == plan.seed


def test_too_few_participants_raises():
    ds = _dataset(n_participants=8, n_high=4)
    with pytest.raises(DataError):
        make_fold_plan(ds, seed=0)


def test_inconsistent_participant_labels_raise():
    ds = _dataset()
    ds.y[0] = 0  # P00's first row disagrees with the rest
    with pytest.raises(DataError):
        make_fold_plan(ds, seed=0)

"""Acceptance suite: property oracles plus the frozen synthetic benchmark.

The benchmark is the default generator config (seed 42, n = 20000) run
through the standard pipeline: align -> outlier filter -> task build ->
80/20 split (seed 42) -> z-score scaling -> all five learners with their
default hyperparameters. Each criterion prints one [PASS]/[FAIL] line.

Two criteria encode orderings that the default generator configuration does
not produce (its additive noise floor dominates what any learner can do, and
its bit rate is a near-linear, SNR-driven mechanism). They are asserted
exactly as stated and fail with the measured values; the docstrings carry
the analysis. Reference implementations (scikit-learn) reproduce the same
outcome on this data, so the gap is a property of the benchmark, not of the
learners here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

import ranpredict as rp
from ranpredict.cli import EXIT_OK, main
from ranpredict.regressors.common import predict_nodes

SPLIT_SEED = 42
FITTERS = {
    "linear": rp.fit_linear,
    "tree": rp.fit_tree,
    "forest": rp.fit_forest,
    "xgb_like": rp.fit_boosted_second_order,
    "lgbm_like": rp.fit_boosted_leafwise,
}


def check(name: str, condition: bool, detail: str = "") -> None:
    line = f"[{'PASS' if condition else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    print(line)
    assert condition, line


@dataclass
class Task:
    X_tr: rp.FeatureMatrix
    y_tr: rp.TargetVector
    X_te: rp.FeatureMatrix
    y_te: rp.TargetVector
    models: dict = field(default_factory=dict)
    fit_seconds: dict = field(default_factory=dict)


@pytest.fixture(scope="module")
def benchmark():
    records = rp.generate(rp.GenConfig())  # defaults: n=20000, seed=42
    kept, _ = rp.filter_outliers(rp.align_timestamps(records)[0])
    tasks = {}
    for target in ("brate", "snr"):
        X, y = rp.build_task(kept, rp.TaskSpec(target))
        X_tr, y_tr, X_te, y_te = rp.split_train_test(X, y, 0.8, seed=SPLIT_SEED)
        scaler = rp.fit_scaler(X_tr)
        task = Task(rp.transform(scaler, X_tr), y_tr, rp.transform(scaler, X_te), y_te)
        for name, fitter in FITTERS.items():
            started = time.perf_counter()
            task.models[name] = fitter(task.X_tr, task.y_tr)
            task.fit_seconds[name] = time.perf_counter() - started
        tasks[target] = task
    return tasks


def leaf_assignment(nodes, values):
    cur = np.zeros(values.shape[0], dtype=int)
    while True:
        f = nodes.feature_index[cur]
        active = f >= 0
        if not active.any():
            return cur
        rows = np.nonzero(active)[0]
        go_left = values[rows, f[rows]] <= nodes.threshold[cur[rows]]
        cur[rows] = np.where(go_left, nodes.left[cur[rows]], nodes.right[cur[rows]])


def test_criterion_1_metric_oracle_equivalence():
    """mse/rmse/r2 match an independent recomputation within 1e-12."""
    started = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(100):
        y = rng.random(10)
        p = rng.random(10)
        o_mse = math.fsum((a - b) ** 2 for a, b in zip(y, p)) / 10
        o_rmse = math.sqrt(o_mse)
        mean = math.fsum(y) / 10
        o_r2 = 1.0 - math.fsum((a - b) ** 2 for a, b in zip(y, p)) / math.fsum(
            (a - mean) ** 2 for a in y
        )
        worst = max(
            worst,
            abs(rp.mse(y, p) - o_mse),
            abs(rp.rmse(y, p) - o_rmse),
            abs(rp.r2(y, p) - o_r2),
        )
    elapsed = time.perf_counter() - started
    check(
        "metric oracle equivalence (100 fixtures, 1e-12)",
        worst <= 1e-12 and elapsed < 1.0,
        f"worst dev {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_2_split_oracle():
    """fit_tree's root split equals the brute-force criterion argmin."""
    started = time.perf_counter()
    rng = np.random.default_rng(2002)
    tie = 1e-9

    def brute_force(values, y):
        best = None
        for j in range(values.shape[1]):
            distinct = np.unique(values[:, j])
            for a, b in zip(distinct[:-1], distinct[1:]):
                thr = 0.5 * (a + b)
                left = y[values[:, j] <= thr]
                right = y[values[:, j] > thr]
                crit = float(
                    ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
                )
                if best is None or crit < best[0] - tie * best[0]:
                    best = (crit, j, thr)
        if best is None:
            return None
        node = float(((y - y.mean()) ** 2).sum())
        return None if best[0] >= node - tie * node else (best[1], best[2])

    failures = 0
    for _ in range(200):
        n = int(rng.integers(2, 31))
        d = int(rng.integers(1, 4))
        values = rng.random((n, d))
        y = rng.random(n)
        model = rp.fit_tree(
            rp.FeatureMatrix(tuple(f"f{i}" for i in range(d)), values),
            rp.TargetVector("y", y),
            max_depth=1,
            min_samples_leaf=1,
        )
        expected = brute_force(values, y)
        if expected is None:
            failures += model.nodes.feature_index[0] != -1
        else:
            failures += not (
                model.nodes.feature_index[0] == expected[0]
                and abs(model.nodes.threshold[0] - expected[1]) < 1e-15
            )
    elapsed = time.perf_counter() - started
    check(
        "split oracle (200 random datasets)",
        failures == 0 and elapsed < 5.0,
        f"{failures} mismatches, {elapsed:.2f}s",
    )


def test_criterion_3_boosting_closed_form(benchmark):
    """Leaf weights equal -G/(H+lambda) within 1e-9; training MSE monotone."""
    task = benchmark["brate"]
    started = time.perf_counter()
    worst = 0.0
    monotone = True
    for name in ("xgb_like", "lgbm_like"):
        model = task.models[name]
        lam = model.params.reg_lambda
        pred = np.full(task.X_tr.n_rows, model.base_score)
        previous_mse = rp.mse(task.y_tr.values, pred)
        for tree in model.trees:
            g = pred - task.y_tr.values
            leaves = leaf_assignment(tree.nodes, task.X_tr.values)
            for leaf in np.unique(leaves):
                members = leaves == leaf
                expected = -g[members].sum() / (members.sum() + lam)
                worst = max(worst, abs(float(tree.nodes.value[leaf]) - expected))
            pred = pred + model.learning_rate * predict_nodes(tree.nodes, task.X_tr.values)
            current_mse = rp.mse(task.y_tr.values, pred)
            monotone &= current_mse <= previous_mse + 1e-9
            previous_mse = current_mse
    verify = time.perf_counter() - started
    budget = task.fit_seconds["xgb_like"] + task.fit_seconds["lgbm_like"] + verify
    check(
        "boosting closed form + monotone training MSE (200 rounds)",
        worst <= 1e-9 and monotone and budget < 30.0,
        f"worst leaf dev {worst:.2e}, monotone={monotone}, {budget:.1f}s",
    )


def test_criterion_4_histogram_exact_equivalence():
    """Bin-exact leaf-wise growth reproduces the exact learner's predictions."""
    started = time.perf_counter()
    rng = np.random.default_rng(4004)
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(4, 31))
        d = int(rng.integers(1, 4))
        values = rng.random((n, d))
        y = rng.random(n)
        X = rp.FeatureMatrix(tuple(f"f{i}" for i in range(d)), values)
        yv = rp.TargetVector("y", y)
        for depth, leaves in ((1, 2), (30, 2**30)):
            exact = rp.fit_boosted_second_order(
                X, yv, n_rounds=3, learning_rate=0.3, max_depth=depth, min_samples_leaf=1
            )
            hist = rp.fit_boosted_leafwise(
                X, yv, n_rounds=3, learning_rate=0.3, num_leaves=leaves, n_bins=64,
                min_samples_leaf=1,
            )
            worst = max(
                worst,
                float(np.max(np.abs(rp.predict(exact, X).values - rp.predict(hist, X).values))),
            )
    elapsed = time.perf_counter() - started
    check(
        "histogram/exact equivalence (n<=30 fixtures, 1e-9)",
        worst <= 1e-9 and elapsed < 5.0,
        f"worst dev {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_5_brate_ordering(benchmark):
    """Bit-rate task ordering, asserted as stated.

    Known benchmark gap: the default generator adds Normal(0, 50) kbps noise
    (irreducible test MSE around 2500 kbps^2) while its systematic part is
    close to linear in the features, so the linear model sits near the
    noise floor. Halving its MSE is below that floor, and depth-8 trees give
    up more to variance than they gain; scikit-learn's tree/forest/boosting
    reproduce the same relations on this data.
    """
    task = benchmark["brate"]
    results = {
        name: rp.evaluate(task.y_te.values, rp.predict(model, task.X_te).values)
        for name, model in task.models.items()
    }
    detail = " ".join(f"{n}:r2={r.r2:.4f}" for n, r in results.items())
    ensembles = ("lgbm_like", "xgb_like", "forest")
    ordering = all(results[n].r2 >= results["tree"].r2 for n in ensembles)
    ordering &= results["tree"].r2 >= results["linear"].r2
    best_ensemble_mse = min(results[n].mse for n in ensembles)
    ratio = best_ensemble_mse / results["linear"].mse
    budget = sum(task.fit_seconds.values())
    check(
        "bit-rate task ordering + ensemble MSE <= 0.5x linear",
        ordering and ratio <= 0.5 and budget < 120.0,
        f"{detail} | best-ensemble/linear MSE ratio {ratio:.3f}, fit {budget:.1f}s",
    )


def test_criterion_6_snr_quality(benchmark):
    """SNR task: every model reaches R^2 >= 0.5 and boosted beat linear."""
    task = benchmark["snr"]
    results = {
        name: rp.evaluate(task.y_te.values, rp.predict(model, task.X_te).values)
        for name, model in task.models.items()
    }
    detail = " ".join(f"{n}:r2={r.r2:.4f}" for n, r in results.items())
    all_good = all(r.r2 >= 0.5 for r in results.values())
    boosted_beat_linear = all(
        results[n].r2 >= results["linear"].r2 for n in ("xgb_like", "lgbm_like")
    )
    budget = sum(task.fit_seconds.values())
    check(
        "snr task R^2 >= 0.5 for all five, boosted >= linear",
        all_good and boosted_beat_linear and budget < 120.0,
        f"{detail}, fit {budget:.1f}s",
    )


def test_criterion_7_mcs_importance(benchmark):
    """MCS leads the boosted importance ranking, asserted as stated.

    Known benchmark gap: in the default generator SNR is the root cause of
    every other column (MCS is a quantization of it, BLER a logistic of it),
    so splits on the continuous SNR column carry most of the gain and SNR
    tops the ranking instead.
    """
    task = benchmark["brate"]
    tops = {}
    for name in ("xgb_like", "lgbm_like"):
        report = rp.gain_importance(task.models[name])
        tops[name] = report.ranked()[0]
    detail = " ".join(f"{n}:top={e.name}({e.share:.3f})" for n, e in tops.items())
    check(
        "mcs holds the largest importance share for boosted models",
        all(e.name == "mcs" for e in tops.values()),
        detail,
    )


def test_criterion_8_scaler_contract(benchmark):
    """Scaled training features have zero mean and unit variance."""
    X = benchmark["brate"].X_tr.values
    means = np.abs(X.mean(axis=0))
    stds = X.std(axis=0)
    nonconstant = stds > 0
    ok = bool(np.all(means < 1e-10) and np.all(np.abs(stds[nonconstant] - 1.0) < 1e-10))
    check(
        "scaler contract: |mean| < 1e-10, |std-1| < 1e-10",
        ok,
        f"max|mean|={means.max():.2e}, max|std-1|={np.abs(stds[nonconstant]-1).max():.2e}",
    )


def test_criterion_9_error_distribution(benchmark):
    """Boosted test errors concentrate around zero: |mean| < 0.1 * std."""
    task = benchmark["brate"]
    ok = True
    details = []
    for name in ("xgb_like", "lgbm_like"):
        eps = task.y_te.values - rp.predict(task.models[name], task.X_te).values
        hist = rp.error_histogram(task.y_te.values, rp.predict(task.models[name], task.X_te).values)
        assert hist.counts.sum() == eps.size
        ratio = abs(float(eps.mean())) / float(eps.std())
        ok &= ratio < 0.1
        details.append(f"{name}:|mean|/std={ratio:.4f}")
    check("error distribution centered (|mean| < 0.1 std)", ok, " ".join(details))


def test_criterion_10_end_to_end_determinism(tmp_path):
    """Two identical synth->train->evaluate->report runs, byte-identical."""
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_samples = 2000\nseed = 42\ntask = brate\n")
    outputs = []
    for tag in ("one", "two"):
        root = tmp_path / tag
        root.mkdir()
        data = root / "data.csv"
        out = root / "out"
        assert main(["synth", "--config", str(cfg), "--out", str(data)]) == EXIT_OK
        assert main(["train", "--config", str(cfg), "--input", str(data), "--out", str(out)]) == EXIT_OK
        assert main(["evaluate", "--config", str(cfg), "--input", str(data), "--out", str(out)]) == EXIT_OK
        assert main(["importance", "--model", str(out / "model_lgbm_like.json"),
                     "--out", str(out)]) == EXIT_OK
        assert main(["report", "--out", str(out)]) == EXIT_OK
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        files["data.csv"] = data.read_bytes()
        outputs.append(files)
    same = outputs[0].keys() == outputs[1].keys() and all(
        outputs[0][k] == outputs[1][k] for k in outputs[0]
    )
    check("end-to-end determinism (byte-identical artifacts)", same,
          f"{len(outputs[0])} artifacts compared")


def test_criterion_11_model_round_trip(benchmark):
    """serialize/deserialize preserves predictions exactly, 1000 inputs."""
    task = benchmark["brate"]
    rng = np.random.default_rng(1111)
    probe = rp.FeatureMatrix(
        task.X_tr.column_names, rng.normal(0.0, 2.0, size=(1000, task.X_tr.n_cols))
    )
    exact = True
    for name, model in task.models.items():
        clone = rp.deserialize_model(rp.serialize_model(model))
        exact &= bool(
            np.array_equal(rp.predict(model, probe).values, rp.predict(clone, probe).values)
        )
    check("model round trip exact on 1000 random inputs (5 kinds)", exact)

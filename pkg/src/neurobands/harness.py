"""Experiment runner: per-set training/evaluation and set comparisons.

All sets within one comparison share the same split seed and training
configuration, so accuracy differences reflect the electrodes and not
partition luck.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import LabelConfig, Recording
from .electrode_sets import ElectrodeSet, literature_set
from .errors import SplitError
from .neural import (
    NetworkConfig,
    TrainConfig,
    TrainHistory,
    apply_column_stats,
    build_network,
    fit_column_stats,
    predict,
    train,
)
from .spectral import FeatureSet, N_BANDS, WindowPlan, concat_features, extract_features

# Sweep candidates in ascending-size order; sizes 4, 5, 8, 8, 12, 32.
# Same-size candidates are collapsed to the better performer.
SWEEP_SET_NUMBERS = (4, 3, 8, 5, 1, 9)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    granularity: str = "window"  # "window" or "trial"
    seed: int = 42

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise SplitError(f"train_fraction {self.train_fraction} outside (0, 1)")
        if self.granularity not in ("window", "trial"):
            raise SplitError(f"granularity must be 'window' or 'trial', got {self.granularity!r}")


@dataclass
class EvalReport:
    set_id: str
    n_electrodes: int
    electrodes: list[str]
    test_accuracy: float
    train_history: TrainHistory
    confusion: list[list[int]]  # confusion[true][pred]
    prior_accuracy: float | None = None

    def as_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "n_electrodes": self.n_electrodes,
            "electrodes": list(self.electrodes),
            "test_accuracy": self.test_accuracy,
            "prior_accuracy": self.prior_accuracy,
            "confusion": [list(row) for row in self.confusion],
            "history": {
                "losses": list(self.train_history.losses),
                "accuracies": list(self.train_history.accuracies),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            set_id=d["set_id"],
            n_electrodes=d["n_electrodes"],
            electrodes=list(d["electrodes"]),
            test_accuracy=d["test_accuracy"],
            prior_accuracy=d["prior_accuracy"],
            confusion=[list(row) for row in d["confusion"]],
            train_history=TrainHistory(
                losses=list(d["history"]["losses"]),
                accuracies=list(d["history"]["accuracies"]),
            ),
        )


def _stratum_split(indices: np.ndarray, fraction: float,
                   rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if len(indices) < 2:
        raise SplitError("a class stratum has fewer than 2 members")
    shuffled = rng.permutation(indices)
    n_train = int(round(fraction * len(indices)))
    n_train = min(max(n_train, 1), len(indices) - 1)
    return shuffled[:n_train], shuffled[n_train:]


def split(features: FeatureSet, spec: SplitSpec) -> tuple[FeatureSet, FeatureSet]:
    """Disjoint stratified train/test row partition.

    At trial granularity all windows of a (subject, trial) pair land on
    the same side.

    Raises:
        SplitError: a class has too few rows (or trials) to populate
        both sides.
    """
    labels = features.labels
    if len(np.unique(labels)) < 2:
        raise SplitError("both classes must be present to split")
    rng = np.random.default_rng(spec.seed)

    train_parts, test_parts = [], []
    if spec.granularity == "window":
        for cls in np.unique(labels):
            tr, te = _stratum_split(np.flatnonzero(labels == cls), spec.train_fraction, rng)
            train_parts.append(tr)
            test_parts.append(te)
    else:
        group_key = features.subject.astype(np.int64) * 1_000_000 + features.trial
        groups, first_rows = np.unique(group_key, return_index=True)
        group_labels = labels[first_rows]
        for cls in np.unique(labels):
            tr_groups, te_groups = _stratum_split(
                np.flatnonzero(group_labels == cls), spec.train_fraction, rng
            )
            train_parts.append(np.flatnonzero(np.isin(group_key, groups[tr_groups])))
            test_parts.append(np.flatnonzero(np.isin(group_key, groups[te_groups])))

    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return features.take(train_idx), features.take(test_idx)


def _confusion_matrix(truth: np.ndarray, pred: np.ndarray) -> list[list[int]]:
    counts = np.zeros((2, 2), dtype=np.int64)
    for t, p in zip(truth, pred):
        counts[t, p] += 1
    return counts.tolist()


def run_set(
    rec_list: list[Recording],
    electrode_set: ElectrodeSet,
    train_cfg: TrainConfig | None = None,
    split_spec: SplitSpec | None = None,
    plan: WindowPlan | None = None,
    label_cfg: LabelConfig | None = None,
    network: NetworkConfig | None = None,
) -> EvalReport:
    """Features -> split -> standardize on train stats -> train -> evaluate.

    Recordings must already be baseline-trimmed. The network seed
    follows the train seed so whole runs are reproducible.
    """
    train_cfg = train_cfg or TrainConfig()
    split_spec = split_spec or SplitSpec()
    plan = plan or WindowPlan()
    label_cfg = label_cfg or LabelConfig()

    features = concat_features(
        [extract_features(rec, electrode_set, plan, label_cfg) for rec in rec_list]
    )
    train_fs, test_fs = split(features, split_spec)

    stats = fit_column_stats(train_fs.matrix)
    train_fs.matrix = apply_column_stats(train_fs.matrix, stats)
    test_fs.matrix = apply_column_stats(test_fs.matrix, stats)

    if network is None:
        network = NetworkConfig(
            input_dim=electrode_set.size * N_BANDS, seed=train_cfg.seed
        )
    net = build_network(network)
    net.column_stats = stats
    history = train(net, train_fs, train_cfg)

    pred = predict(net, test_fs.matrix)
    confusion = _confusion_matrix(test_fs.labels, pred)
    accuracy = (confusion[0][0] + confusion[1][1]) / test_fs.n_rows
    return EvalReport(
        set_id=electrode_set.id,
        n_electrodes=electrode_set.size,
        electrodes=list(electrode_set.electrodes),
        test_accuracy=accuracy,
        train_history=history,
        confusion=confusion,
        prior_accuracy=electrode_set.prior_accuracy,
    )


@dataclass
class ComparisonTable:
    reports: list[EvalReport] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["set_id,n_electrodes,electrodes,prior_accuracy,our_accuracy"]
        for r in self.reports:
            prior = "" if r.prior_accuracy is None else f"{r.prior_accuracy:.2f}"
            lines.append(
                f"{r.set_id},{r.n_electrodes},{' '.join(r.electrodes)},"
                f"{prior},{100.0 * r.test_accuracy:.4f}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"reports": [r.as_dict() for r in self.reports]},
                          indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonTable":
        payload = json.loads(text)
        return cls(reports=[EvalReport.from_dict(d) for d in payload["reports"]])

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_csv().encode("utf-8"))

    def write_json(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_json().encode("utf-8"))


def _run_one(args) -> EvalReport:
    return run_set(*args)


def compare_sets(
    rec_list: list[Recording],
    sets: list[ElectrodeSet],
    train_cfg: TrainConfig | None = None,
    split_spec: SplitSpec | None = None,
    plan: WindowPlan | None = None,
    label_cfg: LabelConfig | None = None,
    jobs: int = 1,
) -> ComparisonTable:
    """One EvalReport per set, same split seed and train config throughout.

    Report order follows the given set order regardless of jobs.
    """
    if not sets:
        raise ValueError("at least one electrode set is required")
    job_args = [
        (rec_list, es, train_cfg, split_spec, plan, label_cfg) for es in sets
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, job_args))
    else:
        reports = [_run_one(a) for a in job_args]
    return ComparisonTable(reports=reports)


@dataclass
class CurveData:
    """Accuracy as a function of electrode count (one point per count)."""

    points: list[tuple[int, str, float]] = field(default_factory=list)
    reports: list[EvalReport] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["n_electrodes,set_id,accuracy"]
        for n, set_id, acc in self.points:
            lines.append(f"{n},{set_id},{100.0 * acc:.4f}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_csv().encode("utf-8"))


def electrode_count_sweep(
    rec_list: list[Recording],
    train_cfg: TrainConfig | None = None,
    split_spec: SplitSpec | None = None,
    plan: WindowPlan | None = None,
    label_cfg: LabelConfig | None = None,
    jobs: int = 1,
) -> CurveData:
    """Accuracy vs electrode count over the published sets.

    Evaluates sets 04, 03, 08, 05, 01, 09; where two sets share a size,
    only the better performer is kept, so the curve is a function.
    """
    sets = [literature_set(n) for n in SWEEP_SET_NUMBERS]
    table = compare_sets(rec_list, sets, train_cfg, split_spec, plan, label_cfg, jobs)

    best: dict[int, EvalReport] = {}
    for report in table.reports:
        current = best.get(report.n_electrodes)
        if current is None or report.test_accuracy > current.test_accuracy:
            best[report.n_electrodes] = report
    points = [
        (n, best[n].set_id, best[n].test_accuracy) for n in sorted(best)
    ]
    return CurveData(points=points, reports=table.reports)

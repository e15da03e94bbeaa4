"""Correlation with human judgments and significance testing.

Implements the three rank/linear coefficients with explicit tie handling,
the two aggregation granularities (per-system means vs per-text rows), and
the dependent-correlation t test for comparing two metrics against the same
human scores. The Student-t tail is computed in-house via a continued
fraction for the regularized incomplete beta, accurate to ~1e-10 or better.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllRowsDegenerate,
    DegenerateInput,
    DimensionMismatch,
    DomainError,
    NonFinite,
    ParseError,
    SchemaError,
)

COEFFICIENTS = ("pearson", "spearman", "kendall")
LEVELS = ("system", "text")

_KENDALL_CHUNK = 256


def _validate_pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionMismatch("correlation inputs must be 1-D vectors")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"length mismatch: {x.shape[0]} vs {y.shape[0]}"
        )
    if x.shape[0] < 2:
        raise DegenerateInput("need at least 2 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFinite("correlation inputs contain NaN or Inf")
    return x, y


def pearson(x, y) -> float:
    """Sample Pearson correlation; zero variance is an error, never NaN."""
    x, y = _validate_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    var_x = float(dx @ dx)
    var_y = float(dy @ dy)
    if var_x <= 0.0 or var_y <= 0.0:
        raise DegenerateInput("zero variance on at least one side")
    return float((dx @ dy) / math.sqrt(var_x * var_y))


def average_ranks(values) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the mean of their ranks."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation of average-tie fractional ranks."""
    x, y = _validate_pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))


def _tie_pair_count(values) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def kendall(x, y) -> float:
    """Kendall tau-b: pair counting with the tie-corrected denominator."""
    x, y = _validate_pair(x, y)
    n = x.shape[0]
    n0 = n * (n - 1) // 2
    ties_x = _tie_pair_count(x)
    ties_y = _tie_pair_count(y)
    if n0 - ties_x == 0 or n0 - ties_y == 0:
        raise DegenerateInput("all values tie on at least one side")
    # sum over ordered pairs of sign(dx)*sign(dy); each unordered pair twice
    s2 = 0
    for start in range(0, n, _KENDALL_CHUNK):
        stop = min(start + _KENDALL_CHUNK, n)
        sx = np.sign(x[start:stop, None] - x[None, :]).astype(np.int64)
        sy = np.sign(y[start:stop, None] - y[None, :]).astype(np.int64)
        s2 += int((sx * sy).sum())
    s = s2 // 2
    return s / math.sqrt((n0 - ties_x) * (n0 - ties_y))


_COEF_FUNCS = {"pearson": pearson, "spearman": spearman, "kendall": kendall}


@dataclass
class CorrelationReport:
    coefficient: str
    level: str
    value: float
    n_effective: int

    def __post_init__(self):
        if self.coefficient not in COEFFICIENTS:
            raise ValueError(f"unknown coefficient {self.coefficient!r}")
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}")
        if abs(self.value) > 1.0 + 1e-12:
            raise ValueError(f"correlation {self.value!r} outside [-1, 1]")


@dataclass
class EvalDataset:
    """A complete N-texts x S-systems grid of candidates and human scores."""

    text_ids: list[str]
    system_ids: list[str]
    candidate_ids: list[list[str]]
    human_scores: np.ndarray
    references: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        n, s = len(self.text_ids), len(self.system_ids)
        self.human_scores = np.asarray(self.human_scores, dtype=np.float64)
        if self.human_scores.shape != (n, s):
            raise DimensionMismatch(
                f"human scores have shape {self.human_scores.shape}, "
                f"expected ({n}, {s})"
            )
        if len(self.candidate_ids) != n or any(
            len(row) != s for row in self.candidate_ids
        ):
            raise DimensionMismatch("candidate grid is not N x S")
        if not np.all(np.isfinite(self.human_scores)):
            raise NonFinite("human scores contain NaN or Inf")

    @property
    def n_texts(self) -> int:
        return len(self.text_ids)

    @property
    def n_systems(self) -> int:
        return len(self.system_ids)


def _check_grid(dataset: EvalDataset, metric_scores) -> np.ndarray:
    scores = np.asarray(metric_scores, dtype=np.float64)
    expected = (dataset.n_texts, dataset.n_systems)
    if scores.shape != expected:
        raise DimensionMismatch(
            f"metric scores have shape {scores.shape}, expected {expected}"
        )
    if not np.all(np.isfinite(scores)):
        raise NonFinite("metric scores contain NaN or Inf")
    return scores


def system_level(dataset: EvalDataset, metric_scores,
                 coefficient: str = "pearson") -> CorrelationReport:
    """Correlate per-system mean metric scores with per-system mean human
    scores (one point per system)."""
    scores = _check_grid(dataset, metric_scores)
    coef = _COEF_FUNCS[coefficient]
    value = coef(scores.mean(axis=0), dataset.human_scores.mean(axis=0))
    return CorrelationReport(
        coefficient=coefficient,
        level="system",
        value=float(value),
        n_effective=dataset.n_systems,
    )


def text_level(dataset: EvalDataset, metric_scores,
               coefficient: str = "pearson") -> CorrelationReport:
    """Mean over texts of the per-text correlation across systems.

    Rows where either side is constant have no defined coefficient; they are
    excluded with a warning and n_effective reports the surviving rows.
    """
    scores = _check_grid(dataset, metric_scores)
    if dataset.n_systems < 2:
        raise DegenerateInput("text-level correlation needs at least 2 systems")
    coef = _COEF_FUNCS[coefficient]
    values = []
    degenerate = 0
    for i in range(dataset.n_texts):
        try:
            values.append(coef(scores[i], dataset.human_scores[i]))
        except DegenerateInput:
            degenerate += 1
    if not values:
        raise AllRowsDegenerate(
            f"all {dataset.n_texts} text rows are degenerate"
        )
    if degenerate:
        warnings.warn(
            f"excluded {degenerate} degenerate text row(s) from the "
            f"text-level mean",
            stacklevel=2,
        )
    return CorrelationReport(
        coefficient=coefficient,
        level="text",
        value=float(np.mean(values)),
        n_effective=len(values),
    )


# ---------------------------------------------------------------------------
# Student-t tail via the continued fraction for the incomplete beta.
# ---------------------------------------------------------------------------

_CF_MAX_ITER = 300
_CF_EPS = 3e-16
_CF_FPMIN = 1e-300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise DomainError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """One-sided tail P(T >= t) of the Student-t distribution."""
    if df <= 0:
        raise DomainError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(
        df / 2.0, 0.5, df / (df + t * t)
    )
    return tail if t > 0 else 1.0 - tail


def williams_test(r12: float, r13: float, r23: float, n: int):
    """One-sided test that r12 > r13 for correlations sharing variable 1.

    r12 and r13 are the two metrics' correlations with the shared variable
    (e.g. human scores), r23 the correlation between the metrics, n the
    number of observations. Returns (t_statistic, p_value) with n-3 degrees
    of freedom; equal correlations give t = 0 and p = 0.5 exactly.
    """
    if int(n) != n or n < 4:
        raise DomainError(f"n must be an integer >= 4, got {n}")
    n = int(n)
    for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
        if not -1.0 < r < 1.0:
            raise DomainError(f"{name}={r} must lie strictly inside (-1, 1)")
    det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23
    if det < 0.0:
        raise DomainError(
            f"(r12, r13, r23)=({r12}, {r13}, {r23}) is not a valid "
            f"correlation triple (determinant {det:.3e} < 0)"
        )
    mean_r = 0.5 * (r12 + r13)
    denom = math.sqrt(
        2.0 * det * (n - 1) / (n - 3) + mean_r * mean_r * (1.0 - r23) ** 3
    )
    t_stat = (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23)) / denom
    return t_stat, student_t_sf(t_stat, n - 3)


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------

def _read_jsonl(path):
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"invalid JSON: {exc.msg}", line_no=line_no
                ) from exc


def load_references_map(path) -> dict[str, list[str]]:
    """text_id -> reference id list from a JSONL mapping file."""
    references: dict[str, list[str]] = {}
    for line_no, obj in _read_jsonl(path):
        if not isinstance(obj, dict) or "text_id" not in obj:
            raise ParseError("mapping rows need a text_id", line_no=line_no)
        if "reference_ids" in obj:
            refs = obj["reference_ids"]
        elif "reference_id" in obj:
            refs = [obj["reference_id"]]
        else:
            raise ParseError(
                "mapping rows need reference_id or reference_ids",
                line_no=line_no,
            )
        if not isinstance(refs, list) or not refs:
            raise SchemaError(
                f"text {obj['text_id']!r}: reference list must be non-empty"
            )
        references[str(obj["text_id"])] = [str(r) for r in refs]
    return references


def load_eval_dataset(records_path, references_path=None) -> EvalDataset:
    """Assemble the complete N x S grid from line-delimited records.

    Each record is {text_id, system_id, candidate_id, human_score}. Missing
    or duplicated cells are load errors, never silently skipped.
    """
    cells: dict[tuple[str, str], tuple[str, float]] = {}
    text_ids: list[str] = []
    system_ids: list[str] = []
    for line_no, obj in _read_jsonl(records_path):
        try:
            text_id = str(obj["text_id"])
            system_id = str(obj["system_id"])
            candidate_id = str(obj["candidate_id"])
            human = float(obj["human_score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(
                "records need text_id, system_id, candidate_id, "
                "and a numeric human_score",
                line_no=line_no,
            ) from exc
        key = (text_id, system_id)
        if key in cells:
            raise SchemaError(f"duplicate cell {key}")
        cells[key] = (candidate_id, human)
        if text_id not in text_ids:
            text_ids.append(text_id)
        if system_id not in system_ids:
            system_ids.append(system_id)

    if not cells:
        raise SchemaError("dataset has no records")
    missing = [
        (t, s) for t in text_ids for s in system_ids if (t, s) not in cells
    ]
    if missing:
        raise SchemaError(
            f"incomplete grid: {len(missing)} missing cell(s), "
            f"e.g. {missing[:5]}"
        )

    candidate_ids = [
        [cells[(t, s)][0] for s in system_ids] for t in text_ids
    ]
    human = np.array(
        [[cells[(t, s)][1] for s in system_ids] for t in text_ids]
    )
    references = (
        load_references_map(references_path) if references_path else {}
    )
    if references:
        uncovered = [t for t in text_ids if t not in references]
        if uncovered:
            raise SchemaError(
                f"references mapping misses {len(uncovered)} text(s), "
                f"e.g. {uncovered[:5]}"
            )
    return EvalDataset(
        text_ids=text_ids,
        system_ids=system_ids,
        candidate_ids=candidate_ids,
        human_scores=human,
        references=references,
    )

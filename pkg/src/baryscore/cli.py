"""Command-line surface: score, barycenter, eval, williams, validate.

Exit codes: 0 full success, 1 fatal error, 2 partial per-record failures.
Output files are written to a temporary sibling and atomically renamed, so a
fatal error never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import embeddings as emb_mod
from .barycenter import BarycenterConfig, free_support_barycenter
from .embeddings import build_measures, compute_idf, load_bundle, read_header
from .errors import (
    BaryScoreError,
    DomainError,
    MissingScores,
    ParseError,
    SchemaError,
)
from .evaluation import (
    average_ranks,
    load_eval_dataset,
    pearson,
    system_level,
    text_level,
    williams_test,
)
from .scoring import ScoreConfig, batch_score

PROGRESS_EVERY = 200


def _fatal(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _emit(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def _require_files(*paths) -> None:
    for path in paths:
        if path is not None and not os.path.isfile(path):
            raise FileNotFoundError(f"no such file: {path}")


def _resolve_workers(flag_value) -> int:
    if flag_value is not None:
        return max(1, int(flag_value))
    env = os.environ.get("BARYSCORE_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def _float_repr(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def _parse_layers(spec_str: str | None):
    if spec_str is None or spec_str == "all":
        return None
    try:
        layers = [int(part) for part in spec_str.split(",") if part.strip()]
    except ValueError:
        raise DomainError(f"cannot parse layer list {spec_str!r}")
    if not layers:
        raise DomainError("empty layer list")
    return layers


def _idf_from_file(path):
    with open(path, "r", encoding="utf-8") as handle:
        obj = json.load(handle)
    try:
        return emb_mod.IdfTable(
            doc_count=int(obj["doc_count"]),
            entries={str(k): float(v) for k, v in obj["entries"].items()},
            default_idf=float(obj["default_idf"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad idf file {path}: {exc}") from exc


def cmd_score(args) -> int:
    _require_files(args.candidates, args.references)
    if args.idf_from == "file":
        if not args.idf_file:
            raise DomainError("--idf-from file requires --idf-file")
        _require_files(args.idf_file)

    cand_header = read_header(args.candidates)
    ref_header = read_header(args.references)
    for name, c_val, r_val in (
        ("L", cand_header[0], ref_header[0]),
        ("d", cand_header[1], ref_header[1]),
    ):
        if c_val != r_val:
            raise SchemaError(
                f"bundle header mismatch on {name}: candidates have "
                f"{name}={c_val}, references have {name}={r_val}"
            )

    cands = load_bundle(args.candidates)
    refs = load_bundle(args.references)
    if len(cands) != len(refs):
        raise SchemaError(
            f"bundle length mismatch: {len(cands)} candidates vs "
            f"{len(refs)} references"
        )

    if args.weighting == "idf" or args.final_weighting == "idf":
        if args.idf_from == "references":
            documents = [r.tokens for r in refs]
            idf = compute_idf(documents)
        elif args.idf_from == "candidates+references":
            idf = compute_idf([r.tokens for r in refs]
                              + [c.tokens for c in cands])
        else:
            idf = _idf_from_file(args.idf_file)
    else:
        idf = None

    config = ScoreConfig(
        p=args.p,
        weighting=args.weighting,
        layer_selection=_parse_layers(args.layers),
        barycenter=BarycenterConfig(
            support_size=1,
            max_outer_iter=args.max_iter,
            objective_tol=args.tol,
            init_strategy=args.init,
        ),
        final_weighting=args.final_weighting,
    )
    workers = _resolve_workers(args.workers)

    def progress(done, total):
        if done % PROGRESS_EVERY == 0 or done == total:
            print(f"scored {done}/{total} pairs", file=sys.stderr)

    records = batch_score(cands, refs, idf, config, workers=workers,
                          progress=progress if args.progress else None)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["candidate_id", "reference_id", "score"]
    if args.diagnostics:
        header += [
            "candidate_objective", "candidate_iterations",
            "candidate_converged", "reference_objective",
            "reference_iterations", "reference_converged", "error",
        ]
    writer.writerow(header)
    failures = 0
    for record in records:
        row = [
            record.candidate_id,
            record.reference_id,
            "" if record.score is None else _float_repr(record.score),
        ]
        if args.diagnostics:
            diag = record.diagnostics or {}
            row += [
                _float_repr(diag["candidate_objective"]) if diag else "",
                diag.get("candidate_iterations", ""),
                diag.get("candidate_converged", ""),
                _float_repr(diag["reference_objective"]) if diag else "",
                diag.get("reference_iterations", ""),
                diag.get("reference_converged", ""),
                record.error or "",
            ]
        writer.writerow(row)
        if record.error is not None:
            failures += 1
            print(
                f"warning: pair ({record.candidate_id}, "
                f"{record.reference_id}) failed: {record.error}",
                file=sys.stderr,
            )
    _emit(args.output, buffer.getvalue())
    return 2 if failures else 0


# ---------------------------------------------------------------------------
# barycenter
# ---------------------------------------------------------------------------

def cmd_barycenter(args) -> int:
    _require_files(args.bundle)
    records = load_bundle(args.bundle)
    if args.id is None:
        record = records[0]
    else:
        matches = [r for r in records if r.text_id == args.id]
        if not matches:
            raise SchemaError(f"no record with id {args.id!r} in {args.bundle}")
        record = matches[0]
    idf = (
        compute_idf([r.tokens for r in records])
        if args.weighting == "idf"
        else None
    )
    bundle = build_measures(record, idf, args.weighting)
    config = BarycenterConfig(
        support_size=record.n_tokens,
        max_outer_iter=args.max_iter,
        objective_tol=args.tol,
        init_strategy=args.init,
    )
    result = free_support_barycenter(bundle.layer_measures, config)
    payload = {
        "id": record.text_id,
        "support": result.measure.support.tolist(),
        "objective_trace": result.objective_trace,
        "iterations_used": result.iterations_used,
        "converged": result.converged,
        "unsquared_objective": result.unsquared_objective,
    }
    _emit(args.output, json.dumps(payload, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _read_scores_csv(path) -> dict[str, list[tuple[str, float]]]:
    """candidate_id -> [(reference_id, score), ...] from a score CSV."""
    by_candidate: dict[str, list[tuple[str, float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"candidate_id", "reference_id", "score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(
                f"{path}: score CSV must have columns candidate_id, "
                f"reference_id, score"
            )
        for line_no, row in enumerate(reader, start=2):
            raw = row["score"]
            if raw is None or raw == "":
                raise SchemaError(
                    f"{path} line {line_no}: empty score for candidate "
                    f"{row['candidate_id']!r}"
                )
            by_candidate.setdefault(row["candidate_id"], []).append(
                (row["reference_id"], float(raw))
            )
    return by_candidate


def _metric_grid(dataset, by_candidate, multi_ref: str) -> np.ndarray:
    grid = np.zeros((dataset.n_texts, dataset.n_systems))
    missing = []
    for i, text_id in enumerate(dataset.text_ids):
        allowed = set(dataset.references.get(text_id, []))
        for s in range(dataset.n_systems):
            candidate_id = dataset.candidate_ids[i][s]
            rows = by_candidate.get(candidate_id, [])
            if allowed:
                rows = [(ref, val) for ref, val in rows if ref in allowed]
            if not rows:
                missing.append((text_id, dataset.system_ids[s]))
                continue
            values = [val for _, val in rows]
            grid[i, s] = min(values) if multi_ref == "min" else (
                sum(values) / len(values)
            )
    if missing:
        listing = ", ".join(f"({t}, {s})" for t, s in missing)
        raise MissingScores(f"no score for {len(missing)} cell(s): {listing}")
    return grid


def cmd_eval(args) -> int:
    _require_files(args.scores, args.dataset, args.references)
    dataset = load_eval_dataset(args.dataset, args.references)
    by_candidate = _read_scores_csv(args.scores)
    grid = _metric_grid(dataset, by_candidate, args.multi_ref)
    if not args.no_negate:
        # the metric is a distance; correlate its negation with human scores
        grid = -grid

    levels = ["system", "text"] if args.level == "both" else [args.level]
    coefficients = (
        ["pearson", "spearman", "kendall"]
        if args.coef == "all"
        else [args.coef]
    )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["coefficient", "level", "value", "n_effective"])
    for level in levels:
        for coefficient in coefficients:
            fn = system_level if level == "system" else text_level
            report = fn(dataset, grid, coefficient)
            value = abs(report.value) if args.absolute else report.value
            writer.writerow(
                [coefficient, level, _float_repr(value), report.n_effective]
            )
    _emit(args.output, buffer.getvalue())
    return 0


# ---------------------------------------------------------------------------
# williams
# ---------------------------------------------------------------------------

def _aligned_vector(dataset, by_candidate, label: str) -> np.ndarray:
    values = []
    missing = []
    for i, text_id in enumerate(dataset.text_ids):
        for s in range(dataset.n_systems):
            candidate_id = dataset.candidate_ids[i][s]
            rows = by_candidate.get(candidate_id, [])
            if not rows:
                missing.append((text_id, dataset.system_ids[s]))
                continue
            values.append(min(val for _, val in rows))
    if missing:
        listing = ", ".join(f"({t}, {s})" for t, s in missing)
        raise MissingScores(
            f"{label}: no score for {len(missing)} cell(s): {listing}"
        )
    return np.asarray(values)


def cmd_williams(args) -> int:
    _require_files(args.scores_a, args.scores_b, args.dataset)
    dataset = load_eval_dataset(args.dataset)
    vec_a = _aligned_vector(dataset, _read_scores_csv(args.scores_a), "A")
    vec_b = _aligned_vector(dataset, _read_scores_csv(args.scores_b), "B")
    human = dataset.human_scores.ravel()
    if not args.no_negate:
        vec_a = -vec_a
        vec_b = -vec_b
    if args.coef == "spearman":
        vec_a = average_ranks(vec_a)
        vec_b = average_ranks(vec_b)
        human = average_ranks(human)
    n = human.shape[0]
    if n < 4:
        raise DomainError(f"williams test needs n >= 4 observations, got {n}")
    r12 = pearson(vec_a, human)
    if np.array_equal(vec_a, vec_b):
        # identical metrics: r23 = 1 makes the t statistic a 0/0 limit;
        # by symmetry there is no evidence either way
        r13, r23 = r12, 1.0
        t_stat, p_value = 0.0, 0.5
    else:
        r13 = pearson(vec_b, human)
        r23 = pearson(vec_a, vec_b)
        t_stat, p_value = williams_test(r12, r13, r23, n)
    lines = [
        f"n: {n}",
        f"r12 (A vs human): {_float_repr(r12)}",
        f"r13 (B vs human): {_float_repr(r13)}",
        f"r23 (A vs B): {_float_repr(r23)}",
        f"t: {_float_repr(t_stat)}",
        f"p: {_float_repr(p_value)}",
    ]
    _emit(args.output, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    _require_files(args.bundle)
    violations = []
    n_records = 0
    n_layers = dim = None
    with open(args.bundle, "r", encoding="utf-8") as handle:
        first = handle.readline()
        try:
            if not first.strip():
                raise ParseError("missing bundle header", line_no=1)
            n_layers, dim = emb_mod._parse_header(first)
        except (ParseError, SchemaError) as exc:
            violations.append(str(exc))
        else:
            for line_no, line in enumerate(handle, start=2):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    violations.append(f"line {line_no}: invalid JSON: {exc.msg}")
                    continue
                try:
                    emb_mod._record_to_embedding(obj, n_layers, dim, line_no)
                except (ParseError, SchemaError) as exc:
                    violations.append(str(exc))
                else:
                    n_records += 1
    if violations:
        for violation in violations:
            print(violation)
        print(f"{len(violations)} violation(s) found")
        return 1
    print(f"OK, {n_records} records, L={n_layers}, d={dim}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baryscore",
        description="Optimal-transport text evaluation: score candidate "
        "bundles, correlate with human judgments, and compare metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score aligned candidate/reference bundles")
    p_score.add_argument("candidates", help="candidates bundle (JSONL)")
    p_score.add_argument("references", help="references bundle (JSONL)")
    p_score.add_argument("--output", "-o", default=None, help="CSV path (default stdout)")
    p_score.add_argument("--p", type=float, default=2.0, help="distance exponent")
    p_score.add_argument("--weighting", choices=["idf", "uniform"], default="idf")
    p_score.add_argument("--final-weighting", choices=["uniform", "idf"], default="uniform")
    p_score.add_argument("--layers", default=None, help="'all' or comma-separated indices")
    p_score.add_argument("--idf-from", choices=["references", "candidates+references", "file"],
                         default="references")
    p_score.add_argument("--idf-file", default=None, help="IDF table JSON (with --idf-from file)")
    p_score.add_argument("--max-iter", type=int, default=50, help="barycenter outer iterations")
    p_score.add_argument("--tol", type=float, default=1e-6, help="barycenter relative tolerance")
    p_score.add_argument("--init", choices=["auto", "first_input", "mean_of_inputs"],
                         default="auto")
    p_score.add_argument("--workers", type=int, default=None,
                         help="parallel workers (default $BARYSCORE_WORKERS or 1)")
    p_score.add_argument("--diagnostics", action="store_true",
                         help="emit barycenter diagnostics columns")
    p_score.add_argument("--progress", action="store_true",
                         help="print a progress line every "
                         f"{PROGRESS_EVERY} pairs to stderr")
    p_score.set_defaults(func=cmd_score)

    p_bary = sub.add_parser("barycenter", help="barycenter of one record's layer measures")
    p_bary.add_argument("bundle")
    p_bary.add_argument("--id", default=None, help="record id (default: first record)")
    p_bary.add_argument("--weighting", choices=["uniform", "idf"], default="uniform")
    p_bary.add_argument("--max-iter", type=int, default=50)
    p_bary.add_argument("--tol", type=float, default=1e-6)
    p_bary.add_argument("--init", choices=["auto", "first_input", "mean_of_inputs"],
                        default="auto")
    p_bary.add_argument("--output", "-o", default=None)
    p_bary.set_defaults(func=cmd_barycenter)

    p_eval = sub.add_parser("eval", help="correlate scores with human judgments")
    p_eval.add_argument("scores", help="score CSV from `baryscore score`")
    p_eval.add_argument("dataset", help="JSONL records with text_id/system_id/candidate_id/human_score")
    p_eval.add_argument("--references", default=None,
                        help="JSONL text_id -> reference id(s) mapping")
    p_eval.add_argument("--level", choices=["system", "text", "both"], default="both")
    p_eval.add_argument("--coef", choices=["pearson", "spearman", "kendall", "all"],
                        default="all")
    p_eval.add_argument("--multi-ref", choices=["min", "mean"], default="min",
                        help="reduction over multiple references per candidate")
    p_eval.add_argument("--absolute", action="store_true",
                        help="report |value| for table parity")
    p_eval.add_argument("--no-negate", action="store_true",
                        help="correlate raw distances instead of their negation")
    p_eval.add_argument("--output", "-o", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_will = sub.add_parser("williams", help="significance of metric A over metric B")
    p_will.add_argument("scores_a", help="score CSV of metric A")
    p_will.add_argument("scores_b", help="score CSV of metric B")
    p_will.add_argument("dataset", help="JSONL dataset with human scores")
    p_will.add_argument("--coef", choices=["pearson", "spearman"], default="pearson")
    p_will.add_argument("--no-negate", action="store_true")
    p_will.add_argument("--output", "-o", default=None)
    p_will.set_defaults(func=cmd_williams)

    p_val = sub.add_parser("validate", help="check a bundle against the schema")
    p_val.add_argument("bundle")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BaryScoreError, FileNotFoundError, OSError, ValueError) as exc:
        return _fatal(str(exc))


if __name__ == "__main__":
    sys.exit(main())

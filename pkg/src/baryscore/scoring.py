"""The metric: candidate and reference barycenters, then their distance.

For each side, the L selected layer measures are aggregated into one
free-support barycenter with uniform masses and as many locations as the
text has tokens; the pair's score is the p-Wasserstein distance between the
two barycenters. Lower is better (0 means identical barycenters).
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .barycenter import BarycenterConfig, free_support_barycenter
from .embeddings import IdfTable, LayeredEmbedding, build_measures
from .errors import DimensionMismatch, EmptyText
from .measures import DiscreteMeasure
from .ot import wasserstein


@dataclass
class ScoreConfig:
    """Scoring knobs.

    layer_selection: indices into [0, L); None means every layer.
    barycenter: template whose support_size is replaced per side by the
        text's token count (masses stay uniform per side).
    final_weighting: masses used on the barycenter supports for the final
        distance; 'uniform' is the metric definition, 'idf' exists for
        sensitivity analysis only.
    """

    p: float = 2.0
    weighting: str = "idf"
    layer_selection: list[int] | None = None
    barycenter: BarycenterConfig = field(
        default_factory=lambda: BarycenterConfig(support_size=1)
    )
    final_weighting: str = "uniform"

    def __post_init__(self):
        if self.weighting not in ("idf", "uniform"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.final_weighting not in ("idf", "uniform"):
            raise ValueError(f"unknown final_weighting {self.final_weighting!r}")
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.layer_selection is not None and len(self.layer_selection) == 0:
            raise ValueError("layer_selection must be non-empty when given")


@dataclass
class ScoreRecord:
    candidate_id: str
    reference_id: str
    score: float | None
    diagnostics: dict | None = None
    error: str | None = None

    def __post_init__(self):
        if self.score is not None and self.score < 0:
            raise ValueError("score must be nonnegative")


def _selected_layers(emb: LayeredEmbedding, config: ScoreConfig) -> list[int]:
    if config.layer_selection is None:
        return list(range(emb.n_layers))
    for idx in config.layer_selection:
        if not 0 <= idx < emb.n_layers:
            raise DimensionMismatch(
                f"layer index {idx} outside [0, {emb.n_layers})"
            )
    return list(config.layer_selection)


def _side_barycenter(emb: LayeredEmbedding, idf: IdfTable | None,
                     layers: list[int], config: ScoreConfig):
    bundle = build_measures(emb, idf, config.weighting)
    measures = [bundle.layer_measures[i] for i in layers]
    bary_config = dataclasses.replace(
        config.barycenter, support_size=emb.n_tokens
    )
    return free_support_barycenter(measures, bary_config)


def bary_score(cand: LayeredEmbedding, ref: LayeredEmbedding,
               idf: IdfTable | None, config: ScoreConfig | None = None
               ) -> ScoreRecord:
    """Score one candidate/reference pair (distance; 0 is a perfect match)."""
    if config is None:
        config = ScoreConfig()
    if cand.n_tokens == 0 or ref.n_tokens == 0:
        raise EmptyText("cannot score a text with zero tokens")
    if cand.n_layers != ref.n_layers:
        raise DimensionMismatch(
            f"layer count mismatch: {cand.n_layers} vs {ref.n_layers}"
        )
    if cand.dim != ref.dim:
        raise DimensionMismatch(
            f"embedding width mismatch: {cand.dim} vs {ref.dim}"
        )
    layers = _selected_layers(cand, config)

    cand_result = _side_barycenter(cand, idf, layers, config)
    ref_result = _side_barycenter(ref, idf, layers, config)

    if config.final_weighting == "idf":
        if idf is None:
            raise ValueError("final_weighting='idf' requires an IdfTable")
        cand_measure = DiscreteMeasure(
            cand_result.measure.support, idf.weights_for(cand.tokens)
        )
        ref_measure = DiscreteMeasure(
            ref_result.measure.support, idf.weights_for(ref.tokens)
        )
    else:
        cand_measure = cand_result.measure
        ref_measure = ref_result.measure

    score = wasserstein(cand_measure, ref_measure, config.p)
    diagnostics = {
        "candidate_objective": cand_result.objective_trace[-1],
        "candidate_iterations": cand_result.iterations_used,
        "candidate_converged": cand_result.converged,
        "reference_objective": ref_result.objective_trace[-1],
        "reference_iterations": ref_result.iterations_used,
        "reference_converged": ref_result.converged,
    }
    return ScoreRecord(
        candidate_id=cand.text_id,
        reference_id=ref.text_id,
        score=score,
        diagnostics=diagnostics,
    )


def _score_pair(args) -> ScoreRecord:
    cand, ref, idf, config = args
    try:
        return bary_score(cand, ref, idf, config)
    except Exception as exc:  # annotate, never abort the batch
        return ScoreRecord(
            candidate_id=getattr(cand, "text_id", "?"),
            reference_id=getattr(ref, "text_id", "?"),
            score=None,
            error=f"{type(exc).__name__}: {exc}",
        )


def batch_score(cands, refs, idf: IdfTable | None,
                config: ScoreConfig | None = None, workers: int = 1,
                progress=None) -> list[ScoreRecord]:
    """Score aligned candidate/reference lists; pair i = (cands[i], refs[i]).

    Failed pairs come back as error records in place, so indexes always line
    up with the inputs. With workers > 1 pairs fan out across processes;
    output order and values are independent of the worker count.
    """
    cands = list(cands)
    refs = list(refs)
    if len(cands) != len(refs):
        raise DimensionMismatch(
            f"{len(cands)} candidates vs {len(refs)} references"
        )
    if config is None:
        config = ScoreConfig()
    tasks = [(c, r, idf, config) for c, r in zip(cands, refs)]
    records: list[ScoreRecord] = []
    if workers <= 1 or len(tasks) <= 1:
        for done, task in enumerate(tasks, start=1):
            records.append(_score_pair(task))
            if progress is not None:
                progress(done, len(tasks))
    else:
        chunk = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done, record in enumerate(
                pool.map(_score_pair, tasks, chunksize=chunk), start=1
            ):
                records.append(record)
                if progress is not None:
                    progress(done, len(tasks))
    return records

"""Greedy regime-tree growth scored by marginal likelihood.

Each admissible cut of the current tree gets its own short sampler run; the
marginal likelihood is estimated by averaging the per-draw likelihoods on
the natural scale,

    log p(y | tree)  ~=  logsumexp(loglik_1 .. loglik_S) - log S,

and the best cut is kept while it improves on the unsplit model.  Candidate
runs are seeded by hashing the tree and the cut, so results do not depend
on evaluation order or on how many workers share the list.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from .basis import MaturityGrid
from .gibbs import ChainConfig, PriorConfig, run_chain
from .panels import MacroPanel, YieldPanel, align_yields
from .statespace import NumericalError, smoother_loglik
from .tree import RegimeLabels, RegimeTree, SplitCandidate, assign_labels, enumerate_candidates, apply_split

__all__ = [
    "SearchConfig",
    "SplitEvaluation",
    "SearchResult",
    "candidate_seed",
    "log_marginal_likelihood",
    "evaluate_tree",
    "grow_tree",
    "stack_observations",
]


@dataclass
class SearchConfig:
    """Budgets and admissibility rules for the greedy search."""

    chain: ChainConfig = field(
        default_factory=lambda: ChainConfig(n_burn=500, n_draws=1000, thin=5, keep_factors="none")
    )
    min_months: int = 24
    max_regimes: int = 3
    thresholds: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    ml_mode: str = "prediction"  # "prediction" | "smoother"
    require_improvement: bool = True
    near_tie_margin: float = 0.5
    workers: int = 1

    def __post_init__(self) -> None:
        if self.ml_mode not in ("prediction", "smoother"):
            raise ValueError("ml_mode must be 'prediction' or 'smoother'")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class SplitEvaluation:
    """One scored candidate (or the keep-as-is baseline, var == None)."""

    level: int
    leaf: int | None
    var: str | None
    threshold: float | None
    n_regimes: int
    log_ml: float
    accept_rate: float
    status: str  # "ok" | "failed"
    message: str = ""
    chosen: bool = False


@dataclass
class SearchResult:
    tree: RegimeTree
    labels: RegimeLabels
    log_ml: float
    evaluations: list[SplitEvaluation]


def stack_observations(yields: YieldPanel, macro: MacroPanel, with_factors: bool = True):
    """Build the (T, n_obs) observation matrix on the macro sample.

    Yield columns come first, then the observed macro factors when requested.
    Returns the matrix together with the number of appended factor columns.
    """
    aligned = align_yields(yields, macro)
    if with_factors and macro.factors.shape[1]:
        return np.column_stack([aligned.values, macro.factors]), macro.factors.shape[1]
    return aligned.values.copy(), 0


def candidate_seed(
    root_seed: int, tree: RegimeTree, cand: SplitCandidate | None
) -> np.random.SeedSequence:
    """Stable seed for one candidate fit, independent of evaluation order."""
    if cand is None:
        tag = "keep"
    else:
        tag = f"{cand.leaf}|{cand.var}|{cand.threshold:.6f}"
    key = json.dumps(tree.to_dict(), sort_keys=True, separators=(",", ":")) + "#" + tag
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return np.random.SeedSequence([int(root_seed), int.from_bytes(digest[:8], "big")])


def log_marginal_likelihood(logliks) -> float:
    arr = np.asarray(logliks, dtype=float)
    if arr.size == 0:
        raise ValueError("no stored draws to average")
    return float(logsumexp(arr) - np.log(arr.size))


def evaluate_tree(
    data: np.ndarray,
    labels: RegimeLabels,
    grid: MaturityGrid,
    n_macro: int,
    chain: ChainConfig,
    seed: np.random.SeedSequence,
    ml_mode: str = "prediction",
    priors: PriorConfig | None = None,
):
    """Fit one label path and return (log_ml, accept_rate).

    In smoother mode the per-draw likelihood conditions each period on the
    draw's own factor path, which requires keeping every stored path.
    """
    if ml_mode == "smoother":
        chain = replace(chain, keep_factors="all")
    draws = run_chain(data, labels, grid, n_macro=n_macro, priors=priors, chain=chain, seed=seed)
    if ml_mode == "smoother":
        lls = np.array([
            smoother_loglik(draws.params_at(s), labels, data, draws.factors[s])
            for s in range(draws.n_stored)
        ])
    else:
        lls = draws.loglik
    return log_marginal_likelihood(lls), draws.accept_rate


def _evaluate_task(args):
    (data, labels, grid, n_macro, chain, seed, ml_mode) = args
    try:
        log_ml, accept = evaluate_tree(data, labels, grid, n_macro, chain, seed, ml_mode)
        return log_ml, accept, "ok", ""
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return -np.inf, 0.0, "failed", str(exc)


def _run_tasks(tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_task, tasks))
    return [_evaluate_task(t) for t in tasks]


def grow_tree(
    data: np.ndarray,
    macro: MacroPanel,
    grid: MaturityGrid,
    n_macro: int = 0,
    config: SearchConfig | None = None,
    root_seed: int = 0,
) -> SearchResult:
    """Grow from a single leaf, keeping the best admissible cut per level."""
    config = config or SearchConfig()
    data = np.asarray(data, dtype=float)
    if data.shape[0] != macro.n_periods:
        raise ValueError("observation matrix and macro panel disagree on T")

    tree = RegimeTree.single_leaf()
    labels = assign_labels(tree, macro)
    evaluations: list[SplitEvaluation] = []

    base_ml, base_accept, status, message = _evaluate_task((
        data, labels, grid, n_macro, config.chain,
        candidate_seed(root_seed, tree, None), config.ml_mode,
    ))
    if status != "ok":
        raise NumericalError(f"baseline fit failed: {message}")
    evaluations.append(SplitEvaluation(
        level=0, leaf=None, var=None, threshold=None, n_regimes=1,
        log_ml=base_ml, accept_rate=base_accept, status=status, chosen=True,
    ))
    current_ml = base_ml

    level = 1
    while True:
        cands = enumerate_candidates(
            tree, macro,
            min_months=config.min_months,
            max_regimes=config.max_regimes,
            thresholds=config.thresholds,
        )
        if not cands:
            break
        grown = [apply_split(tree, c) for c in cands]
        tasks = [
            (
                data, assign_labels(g, macro), grid, n_macro, config.chain,
                candidate_seed(root_seed, tree, c), config.ml_mode,
            )
            for c, g in zip(cands, grown)
        ]
        results = _run_tasks(tasks, config.workers)
        records = [
            SplitEvaluation(
                level=level, leaf=c.leaf, var=c.var, threshold=c.threshold,
                n_regimes=g.n_regimes, log_ml=r[0], accept_rate=r[1],
                status=r[2], message=r[3],
            )
            for c, g, r in zip(cands, grown, results)
        ]
        evaluations.extend(records)
        ok = [rec for rec in records if rec.status == "ok"]
        if not ok:
            raise NumericalError(f"every candidate fit failed at level {level}")

        best_idx = int(np.argmax([
            rec.log_ml if rec.status == "ok" else -np.inf for rec in records
        ]))
        best = records[best_idx]
        near = [
            rec for rec in ok
            if rec is not best and best.log_ml - rec.log_ml < config.near_tie_margin
        ]
        if near:
            rivals = ", ".join(f"{r.var}<{r.threshold} on leaf {r.leaf}" for r in near)
            warnings.warn(
                f"cut {best.var}<{best.threshold} on leaf {best.leaf} wins by less than "
                f"{config.near_tie_margin} log points over: {rivals}",
                RuntimeWarning,
                stacklevel=2,
            )
        if config.require_improvement and best.log_ml <= current_ml:
            break
        best.chosen = True
        tree = grown[best_idx]
        labels = assign_labels(tree, macro)
        current_ml = best.log_ml
        level += 1

    return SearchResult(tree=tree, labels=labels, log_ml=current_ml, evaluations=evaluations)

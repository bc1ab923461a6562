"""Binary regime trees over standardized macro variables.

A tree node either splits on ``var < threshold`` (Yes branch strictly below,
No branch at-or-above) or is a leaf carrying a regime id.  Regime ids always
run 1..G in depth-first order, Yes before No.  Trees are immutable: growing
a tree returns a new one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .panels import MacroPanel

__all__ = [
    "Leaf",
    "Split",
    "Node",
    "RegimeTree",
    "RegimeLabels",
    "SplitCandidate",
    "assign_labels",
    "enumerate_candidates",
    "apply_split",
]


@dataclass(frozen=True)
class Leaf:
    regime: int


@dataclass(frozen=True)
class Split:
    var: str
    threshold: float
    yes: "Node"
    no: "Node"


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class SplitCandidate:
    """A proposed cut: split the leaf with this regime id at var < threshold."""

    leaf: int
    var: str
    threshold: float


@dataclass(frozen=True)
class RegimeLabels:
    labels: np.ndarray  # (T,) ints in 1..n_regimes
    n_regimes: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_regimes + 1)[1:]


def _leaves(node: Node) -> list[Leaf]:
    if isinstance(node, Leaf):
        return [node]
    return _leaves(node.yes) + _leaves(node.no)


@dataclass(frozen=True)
class RegimeTree:
    root: Node

    def __post_init__(self) -> None:
        regimes = [leaf.regime for leaf in _leaves(self.root)]
        if sorted(regimes) != list(range(1, len(regimes) + 1)):
            raise ValueError(f"leaf regimes must be 1..G without gaps, got {regimes}")

    @staticmethod
    def single_leaf() -> "RegimeTree":
        return RegimeTree(Leaf(1))

    @property
    def n_regimes(self) -> int:
        return len(_leaves(self.root))

    def leaf_paths(self) -> dict[int, str]:
        """Map regime id to its root path, e.g. {1: 'Y', 2: 'NY', 3: 'NN'}."""
        out: dict[int, str] = {}

        def walk(node: Node, path: str) -> None:
            if isinstance(node, Leaf):
                out[node.regime] = path
            else:
                walk(node.yes, path + "Y")
                walk(node.no, path + "N")

        walk(self.root, "")
        return out

    def leaf_region(self, regime: int) -> dict[str, tuple[float, float]]:
        """Half-open interval constraints accumulated on the path to a leaf."""

        def walk(node: Node, region: dict[str, tuple[float, float]]):
            if isinstance(node, Leaf):
                return region if node.regime == regime else None
            lo, hi = region.get(node.var, (0.0, 1.0))
            found = walk(node.yes, {**region, node.var: (lo, min(hi, node.threshold))})
            if found is not None:
                return found
            return walk(node.no, {**region, node.var: (max(lo, node.threshold), hi)})

        region = walk(self.root, {})
        if region is None:
            raise ValueError(f"no leaf with regime id {regime}")
        return region

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        def conv(node: Node) -> dict:
            if isinstance(node, Leaf):
                return {"regime": node.regime}
            return {
                "var": node.var,
                "threshold": node.threshold,
                "yes": conv(node.yes),
                "no": conv(node.no),
            }

        return conv(self.root)

    @staticmethod
    def from_dict(data: dict) -> "RegimeTree":
        def conv(obj) -> Node:
            if not isinstance(obj, dict):
                raise ValueError(f"malformed tree node: {obj!r}")
            if "regime" in obj:
                return Leaf(int(obj["regime"]))
            try:
                return Split(
                    var=str(obj["var"]),
                    threshold=float(obj["threshold"]),
                    yes=conv(obj["yes"]),
                    no=conv(obj["no"]),
                )
            except KeyError as exc:
                raise ValueError(f"malformed tree node, missing {exc}") from exc

        return RegimeTree(conv(data))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "RegimeTree":
        return RegimeTree.from_dict(json.loads(text))


def assign_labels(tree: RegimeTree, macro: MacroPanel) -> RegimeLabels:
    """Evaluate the tree at every month of the panel."""
    n = macro.n_periods
    labels = np.zeros(n, dtype=np.int64)

    def walk(node: Node, mask: np.ndarray) -> None:
        if isinstance(node, Leaf):
            labels[mask] = node.regime
            return
        x = macro.candidate(node.var)
        yes = mask & (x < node.threshold)
        walk(node.yes, yes)
        walk(node.no, mask & ~yes)

    walk(tree.root, np.ones(n, dtype=bool))
    return RegimeLabels(labels=labels, n_regimes=tree.n_regimes)


def apply_split(tree: RegimeTree, cand: SplitCandidate) -> RegimeTree:
    """Replace a leaf by a rule and renumber regimes depth-first.

    Raises ``ValueError`` when the leaf id does not exist or when the rule
    cannot partition the leaf's region (the threshold falls outside the open
    interval the path already pins down for that variable).
    """
    region = tree.leaf_region(cand.leaf)
    lo, hi = region.get(cand.var, (0.0, 1.0))
    if not lo < cand.threshold < hi:
        raise ValueError(
            f"threshold {cand.threshold} on {cand.var} cannot split leaf {cand.leaf}: "
            f"path already restricts {cand.var} to [{lo}, {hi})"
        )

    def rebuild(node: Node) -> Node:
        if isinstance(node, Leaf):
            if node.regime == cand.leaf:
                return Split(cand.var, cand.threshold, Leaf(0), Leaf(0))
            return Leaf(node.regime)
        return Split(node.var, node.threshold, rebuild(node.yes), rebuild(node.no))

    counter = 0

    def renumber(node: Node) -> Node:
        nonlocal counter
        if isinstance(node, Leaf):
            counter += 1
            return Leaf(counter)
        return Split(node.var, node.threshold, renumber(node.yes), renumber(node.no))

    return RegimeTree(renumber(rebuild(tree.root)))


def enumerate_candidates(
    tree: RegimeTree,
    macro: MacroPanel,
    min_months: int = 24,
    max_regimes: int = 3,
    thresholds: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8),
) -> list[SplitCandidate]:
    """All admissible cuts of the current tree, in deterministic order.

    A cut is admissible when the grown tree stays within ``max_regimes`` and
    both children keep at least ``min_months`` months of the sample.  Order:
    by leaf regime id, then panel column order of the variable, then
    threshold.
    """
    if tree.n_regimes >= max_regimes:
        return []
    labels = assign_labels(tree, macro)
    out: list[SplitCandidate] = []
    for leaf in sorted(tree.leaf_paths()):
        in_leaf = labels.labels == leaf
        region = tree.leaf_region(leaf)
        for var in macro.candidate_names:
            x = macro.candidate(var)
            lo, hi = region.get(var, (0.0, 1.0))
            for thr in thresholds:
                if not lo < thr < hi:
                    continue
                n_yes = int(np.sum(in_leaf & (x < thr)))
                n_no = int(in_leaf.sum()) - n_yes
                if n_yes >= min_months and n_no >= min_months:
                    out.append(SplitCandidate(leaf=leaf, var=var, threshold=thr))
    return out

"""Completion-potential arithmetic and its report table."""

from __future__ import annotations

from typing import Sequence

from ..core.types import CompletionEstimate


def estimate_completion(
    relation: str,
    cardinality_wd: int,
    n_missing: int,
    high_acc_fraction: float,
    accuracy: float,
) -> CompletionEstimate:
    """Addable facts and growth factor for one relation."""
    return CompletionEstimate.compute(
        relation=relation,
        cardinality_wd=cardinality_wd,
        n_missing=n_missing,
        high_acc_fraction=high_acc_fraction,
        accuracy=accuracy,
    )


def format_estimates(estimates: Sequence[CompletionEstimate]) -> str:
    """Fixed-width completion table, one row per relation."""
    header = (
        f"{'relation':<20} {'cardinality_wd':>14} {'n_missing':>12} "
        f"{'high_acc':>8} {'accuracy':>8} {'addable':>12} {'growth':>8}"
    )
    lines = [header]
    for est in sorted(estimates, key=lambda e: e.relation):
        lines.append(
            f"{est.relation:<20} {est.cardinality_wd:>14} {est.n_missing:>12} "
            f"{est.high_acc_fraction:>8.2f} {est.accuracy:>8.2f} "
            f"{est.addable:>12} {est.growth_factor:>8.2f}"
        )
    return "\n".join(lines) + "\n"

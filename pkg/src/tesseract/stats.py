"""Friedman omnibus test with the Nemenyi critical-difference post-hoc."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import chi2, rankdata

# Studentized range statistic divided by sqrt(2), for k = 2..5 treatments
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459},
}


@dataclass
class FriedmanResult:
    chi2: float
    p_value: float
    critical_value: float
    significant: bool
    mean_ranks: list[float]
    cd: float
    pairwise: list[tuple[int, int, bool]] = field(default_factory=list)
    n_blocks: int = 0
    alpha: float = 0.05
    treatments: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pairwise"] = [{"i": i, "j": j, "significant": s} for i, j, s in self.pairwise]
        return d


def nemenyi_cd(k: int, n_blocks: int, alpha: float = 0.05) -> float:
    """Critical difference between mean ranks.

    >>> round(nemenyi_cd(3, 7), 3)
    1.252
    """
    try:
        q = NEMENYI_Q[alpha][k]
    except KeyError:
        raise ValueError(f"no Nemenyi q value for alpha={alpha}, k={k} (k must be 2..5, "
                         f"alpha one of {sorted(NEMENYI_Q)})") from None
    return q * math.sqrt(k * (k + 1) / (6.0 * n_blocks))


def within_block_ranks(scores: np.ndarray) -> np.ndarray:
    """Rank 1 for the highest score in each row; ties share the average rank."""
    return np.vstack([rankdata(-row, method="average") for row in scores])


def friedman_nemenyi(scores, alpha: float = 0.05, treatments=None) -> FriedmanResult:
    """Friedman test over a blocks x treatments score matrix, plus Nemenyi pairs.

    Parameters
    ----------
    scores : array-like, shape (n_blocks, k)
        Higher is better.
    alpha : float
        Significance level, 0.05 or 0.10.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValueError("scores must be a 2-d blocks x treatments matrix")
    n, k = scores.shape
    if n < 2:
        raise ValueError("need at least 2 blocks")
    cd = nemenyi_cd(k, n, alpha)
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    mean_ranks = within_block_ranks(scores).mean(axis=0)
    stat = 12.0 * n / (k * (k + 1)) * (float(np.sum(mean_ranks ** 2)) - k * (k + 1) ** 2 / 4.0)
    if abs(stat) < 1e-12:
        stat = 0.0
    crit = float(chi2.ppf(1.0 - alpha, k - 1))
    pairs = [(i, j, bool(abs(mean_ranks[i] - mean_ranks[j]) > cd))
             for i in range(k) for j in range(i + 1, k)]
    return FriedmanResult(
        chi2=float(stat),
        p_value=float(chi2.sf(stat, k - 1)),
        critical_value=crit,
        significant=bool(stat > crit),
        mean_ranks=[float(r) for r in mean_ranks],
        cd=float(cd),
        pairwise=pairs,
        n_blocks=n,
        alpha=alpha,
        treatments=list(treatments) if treatments is not None else [str(i) for i in range(k)],
    )

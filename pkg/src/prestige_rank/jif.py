"""Unweighted 3-year impact factor used as the baseline for comparisons."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class JifScores:
    """Windowed citations per windowed primary item; NaN where Art = 0."""

    journal_ids: tuple
    values: np.ndarray

    def as_dict(self):
        return {
            jid: (None if np.isnan(v) else float(v))
            for jid, v in zip(self.journal_ids, self.values)
        }


def compute_jif3y(net) -> JifScores:
    """Citations received by window-year papers over their primary-item count.

    Pass the *uncapped* network: self-citations count in full here.
    """
    if net.self_cite_cap is not None:
        raise ValueError("compute_jif3y expects the network before self-citation capping")
    received = net.received()
    art = net.art.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(art > 0, received / art, np.nan)
    return JifScores(net.journal_ids, values)

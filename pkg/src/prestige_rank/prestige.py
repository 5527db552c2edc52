"""Prestige iteration (size-dependent PSJR) and per-item normalization (SJR).

Each iteration gives every journal three shares of prestige:

* a floor ``(1 - d - e) / N`` for being in the database,
* ``e`` times its share of all primary items,
* ``d`` times the prestige it receives, i.e. windowed citations weighted by
  citing prestige over citing total references and scaled by the
  correction factor, plus its item share of the mass held by dangling
  journals.

The vector is renormalized to sum to one after every step.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNetworkError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrestigeParams:
    d: float = 0.9
    e: float = 0.0999
    convergence_tol: float = 1e-9
    max_iterations: int = 200
    c: float = 1.0

    def __post_init__(self):
        if not (self.d > 0 and self.e > 0 and self.d + self.e < 1):
            raise ValueError("need d > 0, e > 0 and d + e < 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.c > 0:
            raise ValueError("c must be positive")


@dataclass(frozen=True)
class PsjrResult:
    journal_ids: tuple
    prestige: np.ndarray
    iterations_run: int
    final_delta: float
    converged: bool
    params: PrestigeParams


@dataclass(frozen=True)
class SjrScores:
    """Per-item prestige; NaN marks journals without primary items."""

    journal_ids: tuple
    values: np.ndarray
    c: float

    def as_dict(self):
        return {
            jid: (None if np.isnan(v) else float(v))
            for jid, v in zip(self.journal_ids, self.values)
        }


def init_prestige(n):
    if n < 1:
        raise ValueError("need at least one journal")
    return np.full(n, 1.0 / n)


class TransferOperator:
    """Per-network constants of the iteration, computed once.

    ``threads`` splits the citation transfer into fixed row blocks of the
    transposed matrix.  Every block writes a disjoint slice and the block
    boundaries never change a row's summation order, so the output does not
    depend on the worker count.
    """

    def __init__(self, net, params, threads=1):
        self.params = params
        self.n = net.n
        self.linked = ~net.dangling_mask
        self.dangling = ~self.linked
        self.any_linked = bool(self.linked.any())

        # Dangling journals keep no self-loop weight: all their mass goes
        # through the item-share term.
        totals = np.where(self.linked, net.C_total, 1.0)
        self.inv_total = np.where(self.linked, 1.0 / totals, 0.0)
        self.row_sums = np.asarray(net.C.sum(axis=1)).ravel() * self.linked
        self.CT = net.C.T.tocsr()
        self.CT.sort_indices()

        art = net.art.astype(np.float64)
        total_art = art.sum()
        self.item_share = art / total_art if total_art > 0 else np.full(self.n, 1.0 / self.n)
        self.base = (1.0 - params.d - params.e) / self.n + params.e * self.item_share

        self.threads = max(1, int(threads))
        if self.threads > 1 and self.n > 1:
            bounds = np.linspace(0, self.n, min(self.threads, self.n) + 1).astype(int)
            self.blocks = [(a, b, self.CT[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
            self.pool = ThreadPoolExecutor(max_workers=len(self.blocks))
        else:
            self.blocks = None
            self.pool = None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def weights(self, prestige):
        return prestige * self.inv_total

    def correction_factor(self, prestige):
        if not self.any_linked:
            raise DegenerateNetworkError("every journal is dangling")
        numerator = 1.0 - np.sum(prestige[self.dangling])
        denominator = np.dot(self.row_sums, self.weights(prestige))
        return numerator / denominator

    def _transfer(self, x):
        if self.blocks is None:
            return self.CT @ x
        out = np.empty(self.n)

        def run(block):
            a, b, rows = block
            out[a:b] = rows @ x

        list(self.pool.map(run, self.blocks))
        return out

    def step(self, prestige):
        d = self.params.d
        dangling_mass = np.sum(prestige[self.dangling])
        received = d * dangling_mass * self.item_share
        if self.any_linked:
            cf = self.correction_factor(prestige)
            received = received + d * cf * self._transfer(self.weights(prestige))
        new = self.base + received
        return new / np.sum(new)


def correction_factor(net, prestige):
    """Ratio of the prestige available for transfer to the prestige moved by links.

    Raises :class:`DegenerateNetworkError` when every journal is dangling.
    """
    op = TransferOperator(net, PrestigeParams())
    return op.correction_factor(np.asarray(prestige, dtype=np.float64))


def iterate_once(net, prestige, params=PrestigeParams()):
    return TransferOperator(net, params).step(np.asarray(prestige, dtype=np.float64))


def compute_psjr(net, params=PrestigeParams(), threads=1, initial=None, callback=None):
    """Iterate from the uniform vector until the max-abs change is within tolerance.

    The vector returned is the input of the last step taken, so
    ``final_delta`` is exactly its residual ``max|iterate_once(v) - v|``.
    Non-convergence is reported through ``converged=False``, not raised.
    ``callback(iteration, vector)`` is invoked after each step.
    """
    prestige = init_prestige(net.n) if initial is None else np.asarray(initial, dtype=np.float64)
    delta = np.inf
    iterations = 0
    with TransferOperator(net, params, threads) as op:
        while iterations < params.max_iterations:
            new = op.step(prestige)
            delta = float(np.max(np.abs(new - prestige)))
            iterations += 1
            if callback is not None:
                callback(iterations, new)
            if delta <= params.convergence_tol:
                break
            prestige = new
    converged = delta <= params.convergence_tol
    if not converged:
        log.warning(
            "prestige iteration stopped after %d steps with delta %.3g", iterations, delta
        )
    return PsjrResult(net.journal_ids, prestige, iterations, delta, converged, params)


def normalize_to_sjr(psjr, net, c=1.0) -> SjrScores:
    """``c * psjr / Art``; journals with no primary items are undefined (NaN)."""
    prestige = psjr.prestige if isinstance(psjr, PsjrResult) else np.asarray(psjr, dtype=np.float64)
    art = net.art.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(art > 0, c * prestige / art, np.nan)
    return SjrScores(net.journal_ids, values, c)

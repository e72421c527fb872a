"""Alternating minimization of <e,f| M |e,f> over product vectors.

Fixing e, the reduced dB x dB operator (<e| (x) I) M (|e> (x) I) is formed
and f is set to its ground eigenvector; then the roles swap.  Each half-step
is non-increasing, so every start converges to a local product ground value.
Multistart gives the global value EVIDENCE; a negative value is always a
certificate (the argmin product vector exhibits it).

All starts run in lockstep on batched eigh calls; the merge is deterministic:
lowest value wins, ties broken by lowest start index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HermitianOperator, ProductVector
from .errors import InvalidArgumentError

MAX_SWEEPS = 500
CONV_TOL = 1e-12
DEFAULT_STARTS = 64


@dataclass(frozen=True)
class BlockPositivityReport:
    """Outcome of a multistart product-ground search."""

    min_value: float
    argmin: ProductVector
    starts: int
    converged_fraction: float


def _random_units(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def min_product_expectation(
    op: HermitianOperator,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    max_sweeps: int = MAX_SWEEPS,
    conv_tol: float = CONV_TOL,
) -> BlockPositivityReport:
    """Best (lowest) product expectation found from `starts` random starts.

    The returned value is an upper bound on the true product ground value.
    """
    if starts < 1:
        raise InvalidArgumentError("starts must be >= 1")
    da, db = op.dims
    m4 = op.mat.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    e = _random_units(rng, starts, da)
    f = _random_units(rng, starts, db)

    values = np.full(starts, np.inf)
    converged = np.zeros(starts, dtype=bool)
    for _ in range(max_sweeps):
        red_b = np.einsum("sa,abcd,sc->sbd", e.conj(), m4, e, optimize=True)
        red_b = (red_b + red_b.conj().transpose(0, 2, 1)) / 2.0
        w_b, v_b = np.linalg.eigh(red_b)
        f = v_b[:, :, 0]
        red_a = np.einsum("sb,abcd,sd->sac", f.conj(), m4, f, optimize=True)
        red_a = (red_a + red_a.conj().transpose(0, 2, 1)) / 2.0
        w_a, v_a = np.linalg.eigh(red_a)
        e = v_a[:, :, 0]
        new_values = w_a[:, 0]
        converged |= np.abs(values - new_values) < conv_tol
        values = new_values
        if converged.all():
            break

    best = int(np.argmin(values))
    argmin = ProductVector(e[best], f[best])
    # recompute at the argmin so the reported value matches it exactly
    ef = argmin.kron()
    min_value = float(np.real(ef.conj() @ op.mat @ ef))
    return BlockPositivityReport(
        min_value=min_value,
        argmin=argmin,
        starts=starts,
        converged_fraction=float(np.mean(converged)),
    )


def product_minima(
    op: HermitianOperator,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    top_k: int = 8,
    dedup_tol: float = 1e-6,
    max_sweeps: int = MAX_SWEEPS,
    conv_tol: float = CONV_TOL,
) -> list[tuple[float, ProductVector]]:
    """Distinct local product minima found by the multistart, ascending.

    Deduplicates by projector distance; used where several cuts or candidate
    directions per search are worth keeping.
    """
    if starts < 1:
        raise InvalidArgumentError("starts must be >= 1")
    da, db = op.dims
    m4 = op.mat.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    e = _random_units(rng, starts, da)
    f = _random_units(rng, starts, db)
    values = np.full(starts, np.inf)
    converged = np.zeros(starts, dtype=bool)
    for _ in range(max_sweeps):
        red_b = np.einsum("sa,abcd,sc->sbd", e.conj(), m4, e, optimize=True)
        red_b = (red_b + red_b.conj().transpose(0, 2, 1)) / 2.0
        _, v_b = np.linalg.eigh(red_b)
        f = v_b[:, :, 0]
        red_a = np.einsum("sb,abcd,sd->sac", f.conj(), m4, f, optimize=True)
        red_a = (red_a + red_a.conj().transpose(0, 2, 1)) / 2.0
        w_a, v_a = np.linalg.eigh(red_a)
        e = v_a[:, :, 0]
        new_values = w_a[:, 0]
        converged |= np.abs(values - new_values) < conv_tol
        values = new_values
        if converged.all():
            break
    order = np.argsort(values, kind="stable")
    out: list[tuple[float, ProductVector]] = []
    kept: list[np.ndarray] = []
    for idx in order:
        pv = ProductVector(e[idx], f[idx])
        p = pv.projector().mat
        if any(np.linalg.norm(p - q) < dedup_tol for q in kept):
            continue
        ef = pv.kron()
        out.append((float(np.real(ef.conj() @ op.mat @ ef)), pv))
        kept.append(p)
        if len(out) >= top_k:
            break
    return out


def refine_product_vector(
    op: HermitianOperator,
    start: ProductVector,
    max_sweeps: int = MAX_SWEEPS,
    conv_tol: float = CONV_TOL,
) -> tuple[float, ProductVector]:
    """Run the alternation from a given start; returns (value, vector)."""
    da, db = op.dims
    m4 = op.mat.reshape(da, db, da, db)
    e, f = start.e.copy(), start.f.copy()
    value = np.inf
    for _ in range(max_sweeps):
        red_b = np.einsum("a,abcd,c->bd", e.conj(), m4, e, optimize=True)
        w_b, v_b = np.linalg.eigh((red_b + red_b.conj().T) / 2.0)
        f = v_b[:, 0]
        red_a = np.einsum("b,abcd,d->ac", f.conj(), m4, f, optimize=True)
        w_a, v_a = np.linalg.eigh((red_a + red_a.conj().T) / 2.0)
        e = v_a[:, 0]
        if abs(value - w_a[0]) < conv_tol:
            value = w_a[0]
            break
        value = w_a[0]
    pv = ProductVector(e, f)
    ef = pv.kron()
    return float(np.real(ef.conj() @ op.mat @ ef)), pv

"""Separating functionals between an operator and a sampled convex cone.

The separator problem (unit-Frobenius H minimizing tr(H target) subject to
tr(H x) >= 0 on all samples) is solved through its dual: project the target
onto the cone generated by the samples (nonnegative least squares); the
normalized negative residual is the max-margin feasible separator.  A tiny
residual means the target sits inside the sampled hull and no separator
exists, which is a legitimate outcome, not an error of the search.

On top of that sits the cutting-plane witness search: alternately separate
the state from the product projectors collected so far and use the see-saw
to find the worst product state of the candidate, until the candidate is
block-positive evidence and still detects the state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import nnls

from .core import (
    DEFAULT_TOL,
    HermitianOperator,
    ProductVector,
    effective_tol,
    identity,
    pairing,
    random_unit_vector,
)
from .errors import InvalidArgumentError, NoSeparatorFoundError
from .seesaw import min_product_expectation, product_minima
from .states import QuantumState, Witness


@dataclass(frozen=True)
class SeparatorResult:
    """A functional strictly separating the target from the sampled set."""

    separator: HermitianOperator
    target_value: float
    set_floor: float


def _embed(m: np.ndarray) -> np.ndarray:
    # real embedding preserving tr(AB) for Hermitian A, B
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def separate(
    target: HermitianOperator,
    cone_samples: Sequence[HermitianOperator],
    iters: int = 2000,
    tol: float = DEFAULT_TOL,
) -> SeparatorResult:
    """Unit-Frobenius Hermitian H with tr(H x) >= 0 on the samples and
    tr(H target) < floor - tau, or NoSeparatorFoundError."""
    if not cone_samples:
        raise InvalidArgumentError("cone_samples must be nonempty")
    for x in cone_samples:
        target._check_dims(x)
    t_vec = _embed(target.mat)
    a = np.stack([_embed(x.mat) for x in cone_samples], axis=1)
    lam, _ = nnls(a, t_vec, maxiter=max(iters, 10 * a.shape[1]))
    resid = t_vec - a @ lam
    gap = float(np.linalg.norm(resid))
    scale = max(float(np.linalg.norm(target.mat)), 1.0)
    if gap <= 1e3 * tol * scale:
        raise NoSeparatorFoundError(
            f"target lies in the sampled cone hull (distance {gap:.3e})"
        )
    d = target.dims.total
    h_mat = -(resid[: d * d].reshape(d, d) + 1j * resid[d * d :].reshape(d, d))
    h_mat = (h_mat + h_mat.conj().T) / 2.0
    h = HermitianOperator(target.dims, h_mat / np.linalg.norm(h_mat))
    target_value = pairing(h, target)
    set_floor = min(pairing(h, x) for x in cone_samples)
    tau = effective_tol(h.max_abs_eig(), tol)
    if not target_value < set_floor - tau:
        raise NoSeparatorFoundError(
            f"no strict separation: target {target_value:.3e} vs floor {set_floor:.3e}"
        )
    return SeparatorResult(separator=h, target_value=target_value, set_floor=set_floor)


def _random_product_projectors(dims, n, rng) -> list[HermitianOperator]:
    out = []
    for _ in range(n):
        pv = ProductVector(
            random_unit_vector(dims.da, rng), random_unit_vector(dims.db, rng)
        )
        out.append(pv.projector())
    return out


def entangling_witness_search(
    rho: QuantumState,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rounds: int = 60,
    base_samples: int = 120,
    starts: int = 48,
) -> Optional[Witness]:
    """Cutting-plane construction of a witness detecting `rho`.

    Separate rho from the product projectors collected so far; every distinct
    negative product minimum of the candidate becomes a new cut.  Once the
    worst found violation v drops below the detection margin, the identity
    shift H + v*I is block-positive at the evidence level while still pairing
    negatively with rho, and is certified and returned.  None when the budget
    runs out or rho falls inside the sampled hull.
    """
    dims = rho.dims
    rng = np.random.default_rng(seed)
    samples = _random_product_projectors(dims, base_samples, rng)
    eye = identity(dims)
    for _ in range(rounds):
        try:
            res = separate(rho.op, samples, tol=tol)
        except NoSeparatorFoundError:
            return None
        cand = res.separator
        minima = product_minima(cand, starts=starts, seed=int(rng.integers(2**31)))
        tau = effective_tol(cand.max_abs_eig(), tol)
        violation = max(0.0, -minima[0][0])
        detect_value = pairing(cand, rho.op)
        new_cuts = 0
        for val, pv in minima:
            if val < -tau:
                samples.append(pv.projector())
                new_cuts += 1
        # shift repair: needs the violation comfortably inside the margin
        shift = violation * 1.05
        if detect_value + shift < -10 * tau:
            shifted = cand + shift * eye
            check = min_product_expectation(
                shifted, starts=2 * starts, seed=int(rng.integers(2**31))
            )
            tau_s = effective_tol(shifted.max_abs_eig(), tol)
            if check.min_value >= -tau_s and shifted.min_eig() < -tau_s:
                scale = shifted.max_abs_eig()
                w = Witness((1.0 / scale) * shifted, check.min_value / scale, check)
                if pairing(w.op, rho.op) < -tau_s:
                    return w
        if new_cuts == 0:
            samples.extend(_random_product_projectors(dims, 8, rng))
    return None

"""The order calculus on entangled states: witnessed sets, the delta ratio,
the finer relation, optimality and edge tests, and the best-separable-
approximation optimizer.

delta is computed on the support pencil: mu* (the largest weight of rho2
subtractable from rho1 while staying PSD) is 1/lambda_max of the
pinv-sqrt-conjugated form, and delta = 1/mu*.  rho2 is finer than rho1 when
the subtraction family contains a separable remainder; a remainder that is
itself strictly finer (more entangled) disqualifies the decomposition.

The optimizer subtracts product projectors found in the range of the running
remainder (greedy, weight-capped by the pseudo-inverse bound), periodically
refits all weights by convex programming over the collected directions, and
finishes rank-one remainders with an exact linear-program polish so the
reported remainder is a pure state up to machine precision.  The reported
separable weight is a certified lower bound on the true one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .core import (
    DEFAULT_TOL,
    RANK_TOL,
    Dims,
    HermitianOperator,
    ProductVector,
    effective_tol,
    identity,
    operator_rank,
    pairing,
    partial_transpose,
    pseudo_inverse,
    range_projector,
)
from .errors import (
    DimensionMismatchError,
    InconsistencyError,
    PreconditionError,
)
from .seesaw import DEFAULT_STARTS, min_product_expectation, product_minima
from .states import (
    SEP_SEPARABLE,
    QuantumState,
    Witness,
    as_state,
    is_ppt,
    is_separable,
)

_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}

# a product vector counts as lying in a range when its gap is below this
IN_RANGE_TOL = 1e-7
# range searches ending above this are confident "no product vector" verdicts
CONFIDENT_GAP = 1e-3


def in_witnessed_set(
    w: HermitianOperator, rho: QuantumState, tol: float = DEFAULT_TOL
) -> bool:
    """Membership in S_rho: non-PSD operators paired negatively with rho."""
    if w.dims != rho.dims:
        raise DimensionMismatchError(f"dims mismatch: {w.dims} vs {rho.dims}")
    tau = effective_tol(w.max_abs_eig(), tol)
    return w.min_eig() < -tau and pairing(w, rho.op) < -tau


@dataclass(frozen=True)
class DeltaResult:
    delta: float  # >= 1, or +inf when the supports are incompatible
    mu_star: float  # 1/delta when finite, else 0
    support_contained: bool


def _pinv_sqrt(op: HermitianOperator, rank_tol: float) -> np.ndarray:
    ev, vec = np.linalg.eigh(op.mat)
    lam_max = float(np.max(ev))
    keep = ev > rank_tol * max(lam_max, 0.0)
    return (vec[:, keep] / np.sqrt(ev[keep])) @ vec[:, keep].conj().T


def delta(
    rho1: QuantumState,
    rho2: QuantumState,
    rank_tol: float = RANK_TOL,
) -> DeltaResult:
    """Infimum ratio of witnessed-set pairings, via the support pencil.

    Finite exactly when support(rho2) lies inside support(rho1); then
    rho1 - mu_star*rho2 is PSD with a zero eigenvalue.
    """
    if rho1.dims != rho2.dims:
        raise DimensionMismatchError(f"dims mismatch: {rho1.dims} vs {rho2.dims}")
    proj1 = range_projector(rho1.op, rank_tol)
    leak = pairing(identity(rho1.dims) - proj1, rho2.op)
    if leak > 1e3 * rank_tol:
        return DeltaResult(delta=np.inf, mu_star=0.0, support_contained=False)
    s = _pinv_sqrt(rho1.op, rank_tol)
    t = s @ rho2.op.mat @ s
    dl = float(np.linalg.eigvalsh((t + t.conj().T) / 2.0)[-1])
    return DeltaResult(delta=dl, mu_star=1.0 / dl, support_contained=True)


@dataclass(eq=False)
class FinerVerdict:
    finer: bool
    epsilon: float
    p: Optional[QuantumState] = None
    counterexample: Optional[HermitianOperator] = None


def _subtraction_remainder(
    rho1: QuantumState, rho2: QuantumState, mu: float
) -> Optional[QuantumState]:
    """Normalized (rho1 - mu*rho2)/(1-mu) when it is PSD within tolerance."""
    m = (rho1.op.mat - mu * rho2.op.mat) / (1.0 - mu)
    m = (m + m.conj().T) / 2.0
    ev = np.linalg.eigvalsh(m)
    if ev[0] < -effective_tol(float(np.max(np.abs(ev)))):
        return None
    # clip the tolerated negative tail so downstream PSD checks stay clean
    w, v = np.linalg.eigh(m)
    m = (v * np.clip(w, 0.0, None)) @ v.conj().T
    m /= np.real(np.trace(m))
    return QuantumState(HermitianOperator(rho1.dims, m))


def _distinct_counterexample(
    rho1: QuantumState, rho2: QuantumState, base: Optional[HermitianOperator], tol: float
) -> HermitianOperator:
    """Shifted operator with tr(M rho1) < -tau <= tr(M rho2), scaled to unit
    spectral radius."""
    candidates = []
    if base is not None:
        candidates.append(base)
    candidates.append(rho2.op - rho1.op)
    for m0 in candidates:
        g1, g2 = pairing(m0, rho1.op), pairing(m0, rho2.op)
        if g2 - g1 <= 4 * tol:
            continue
        c = (g1 + g2) / 2.0
        m = m0 - c * identity(rho1.dims)
        m = (1.0 / m.max_abs_eig()) * m
        tau = effective_tol(1.0, tol)
        if m.min_eig() < -tau and pairing(m, rho1.op) < -tau and pairing(m, rho2.op) >= -tau:
            return m
    raise InconsistencyError("no verified counterexample could be constructed")


def _support_counterexample(
    rho1: QuantumState, rho2: QuantumState, rank_tol: float, tol: float
) -> HermitianOperator:
    """Counterexample from a support-violation direction v with
    <v|rho1|v> ~ 0 < <v|rho2|v>, shifted to be non-PSD."""
    out = identity(rho1.dims) - range_projector(rho1.op, rank_tol)
    m = out.mat @ rho2.op.mat @ out.mat
    ev, vec = np.linalg.eigh((m + m.conj().T) / 2.0)
    v = vec[:, -1]
    base = HermitianOperator(rho1.dims, np.outer(v, v.conj()))
    return _distinct_counterexample(rho1, rho2, base, tol)


def is_finer(
    rho1: QuantumState,
    rho2: QuantumState,
    seed: int = 0,
    grid: int = 129,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
) -> FinerVerdict:
    """Is rho2 finer (more entangled) than rho1?

    True when rho1 decomposes as (1-eps) rho2 + eps P with P a separable
    state; the scan walks the subtraction family down from the extremal
    pencil weight.  Separability of the remainder is exact at 2x2/2x3 (PPT)
    and PPT-evidence elsewhere.  False verdicts carry a verified
    counterexample operator witnessed by rho1 but not by rho2.
    """
    d = delta(rho1, rho2, rank_tol=rank_tol)
    if not d.support_contained:
        return FinerVerdict(
            finer=False,
            epsilon=0.0,
            counterexample=_support_counterexample(rho1, rho2, rank_tol, tol),
        )
    if d.delta - 1.0 <= 1e-9:
        return FinerVerdict(finer=True, epsilon=0.0, p=None)

    exact = (rho1.dims.da, rho1.dims.db) in _EXACT_DIMS
    entangled_remainder: Optional[QuantumState] = None
    for mu in np.linspace(d.mu_star, d.mu_star / grid, grid):
        p = _subtraction_remainder(rho1, rho2, float(mu))
        if p is None:
            continue
        if is_ppt(p, tol=tol):
            return FinerVerdict(finer=True, epsilon=1.0 - float(mu), p=p)
        if entangled_remainder is None:
            entangled_remainder = p

    base = None
    if entangled_remainder is not None:
        from .hierarchy import witness_for

        try:
            base = witness_for(entangled_remainder, seed=seed, tol=tol).op
        except Exception:
            base = None
    return FinerVerdict(
        finer=False,
        epsilon=0.0,
        counterexample=_distinct_counterexample(rho1, rho2, base, tol),
    )


@dataclass(eq=False)
class OptimalityVerdict:
    optimal: bool
    witness_vector: Optional[ProductVector]
    range_gap: float


def _entangled_after_subtraction(
    state: QuantumState, tol: float
) -> bool:
    # exact at 2x2/2x3; NPT suffices elsewhere (PPT survivors are ambiguous
    # and the caller treats them as unverified)
    return not is_ppt(state, tol=tol)


def is_optimal(
    rho: QuantumState,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
) -> OptimalityVerdict:
    """No-finer-state test via the range criterion.

    Non-optimal needs a product vector in the range of rho AND a verified
    entangled subtraction; a confidently empty range search certifies
    optimality at evidence level.  In between, the verdict falls back to
    optimal with the (small) range gap left as the low-confidence flag.
    """
    exact = (rho.dims.da, rho.dims.db) in _EXACT_DIMS
    if exact and is_ppt(rho, tol=tol):
        raise PreconditionError("state is separable; optimality is about entangled states")
    gap_op = identity(rho.dims) - range_projector(rho.op, rank_tol)
    minima = product_minima(gap_op, starts=starts, seed=seed)
    best_gap = max(minima[0][0], 0.0)
    if best_gap < IN_RANGE_TOL:
        pinv = pseudo_inverse(rho.op, rank_tol)
        # an NPT state stays NPT under subtractions below this weight, which
        # makes the verification below certain for NPT inputs
        pt_floor = float(np.linalg.eigvalsh(partial_transpose(rho.op).mat)[0])
        eps_npt = -pt_floor / (2.0 * (1.0 + pt_floor)) if -1.0 < pt_floor < 0.0 else 0.0
        for gap, pv in minima:
            if gap >= IN_RANGE_TOL:
                break
            denom = pv.projector()
            w_max = 1.0 / max(pairing(pinv, denom), 1e-15)
            if w_max >= 1.0 - 1e-12:
                continue
            eps_max = w_max / (1.0 - w_max)
            trials = [eps_max, eps_max / 2, eps_max / 8, eps_max / 64]
            if eps_npt > 0:
                trials.append(min(eps_max * (1.0 - 1e-9), eps_npt))
            for eps in trials:
                m = (1.0 + eps) * rho.op.mat - eps * denom.mat
                ev = np.linalg.eigvalsh(m)
                if ev[0] < -effective_tol(float(np.max(np.abs(ev))), tol):
                    continue
                w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
                m_psd = (v * np.clip(w, 0.0, None)) @ v.conj().T
                cand = QuantumState(
                    HermitianOperator(rho.dims, m_psd / np.real(np.trace(m_psd)))
                )
                if _entangled_after_subtraction(cand, tol):
                    return OptimalityVerdict(False, pv, float(gap))
    return OptimalityVerdict(True, None, float(best_gap))


def is_edge(
    rho: QuantumState,
    starts: int = 200,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
) -> bool:
    """True when no product vector |e,f> has |e,f> in range(rho) and
    |e,f*> in range(rho^G); exactly such a vector would permit a subtraction
    preserving both positivity and PPT."""
    if not is_ppt(rho, tol=tol):
        raise PreconditionError("edge states are PPT by definition; input is NPT")
    if (rho.dims.da, rho.dims.db) in _EXACT_DIMS:
        raise PreconditionError("PPT at 2x2/2x3 means separable; no edge states there")
    if rho.separable_certificate is not None:
        raise PreconditionError("state has a separable decomposition certificate")
    eye = identity(rho.dims)
    gap1 = eye - range_projector(rho.op, rank_tol)
    gap2 = eye - range_projector(partial_transpose(rho.op), rank_tol)
    joint = gap1 + partial_transpose(gap2)
    report = min_product_expectation(joint, starts=starts, seed=seed)
    return report.min_value >= IN_RANGE_TOL


# ---------------------------------------------------------------------------
# best separable approximation
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class BSAResult:
    lambda_sep: float
    sep_weights: tuple  # ((weight, ProductVector), ...) with weights summing to 1
    remainder: Optional[QuantumState]
    reconstruction_residual: float
    trace_rows: tuple = field(default=(), repr=False)  # (step, lambda, residual trace)


def _embed(m: np.ndarray) -> np.ndarray:
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def _refit_weights_sdp(
    rho_mat: np.ndarray, dims: Dims, projectors: list[np.ndarray]
) -> Optional[tuple[np.ndarray, Optional[np.ndarray]]]:
    """max sum(w) s.t. sum w_i P_i <= rho, w >= 0 (convex program).

    Returns (weights, dual) where the PSD dual multiplier satisfies
    tr(P_i dual) >= 1 on active columns; product vectors with
    <ef|dual|ef> < 1 are profitable new columns.
    """
    try:
        import cvxpy as cp
    except ImportError:  # pragma: no cover
        return None
    import warnings

    n = len(projectors)
    w = cp.Variable(n, nonneg=True)
    acc = sum(w[i] * projectors[i] for i in range(n))
    constraint = cp.Constant(rho_mat) - acc >> 0
    prob = cp.Problem(cp.Maximize(cp.sum(w)), [constraint])
    for solver in ("CLARABEL", "SCS"):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver=solver)
        except Exception:
            continue
        if prob.status in ("optimal", "optimal_inaccurate") and w.value is not None:
            dual = constraint.dual_value
            if dual is not None:
                dual = np.asarray(dual)
                dual = (dual + dual.conj().T) / 2.0
            return np.clip(w.value, 0.0, None), dual
    return None


def _column_generation(
    rho_mat: np.ndarray,
    dims: Dims,
    vectors: list[ProductVector],
    projectors: list[np.ndarray],
    rng: np.random.Generator,
    rounds: int = 25,
    price_tol: float = 1e-5,
) -> Optional[np.ndarray]:
    """Grow the product-direction pool along the refit dual until no product
    vector prices below the dual threshold; at convergence the refit weight
    equals the true separable weight over ALL product directions."""
    best_w = None
    stagnant = 0
    for _ in range(rounds):
        fit = _refit_weights_sdp(rho_mat, dims, projectors)
        if fit is None:
            return best_w
        w, dual = fit
        w = np.concatenate([w, np.zeros(len(projectors) - len(w))])
        if best_w is None or float(np.sum(w)) > float(np.sum(best_w)) + 1e-8:
            best_w = w
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= 2:
                break
        if dual is None:
            break
        dual_op = HermitianOperator(dims, dual)
        cand = product_minima(
            dual_op, starts=32, seed=int(rng.integers(2**31)), top_k=6
        )
        added = 0
        for val, pv in cand:
            if val >= 1.0 - price_tol:
                continue
            p = pv.projector().mat
            if any(np.linalg.norm(p - q) < 1e-6 for q in projectors[-60:]):
                continue
            vectors.append(pv)
            projectors.append(p)
            added += 1
        if added == 0:
            break
    if best_w is not None and len(best_w) < len(projectors):
        best_w = np.concatenate([best_w, np.zeros(len(projectors) - len(best_w))])
    return best_w


def _rank_one_polish(
    rho_mat: np.ndarray,
    dims: Dims,
    projectors: list[np.ndarray],
    chi: np.ndarray,
    seed: int,
    rounds: int = 12,
) -> Optional[tuple]:
    """Exact-fit linear program: max sum(w) with
    sum w_i P_i + kappa |chi><chi| = rho, w, kappa >= 0.

    Column generation on the equality multiplier keeps adding product
    directions until no profitable one remains.  Returns (weights, kappa)
    on success; the remainder is then exactly the pure state chi.
    """
    d = dims.total
    target = _embed(rho_mat)
    chi_col = _embed(np.outer(chi, chi.conj()))
    pool = list(projectors)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(rounds):
        a = np.stack([_embed(p) for p in pool] + [chi_col], axis=1)
        n = a.shape[1]
        c = np.zeros(n)
        c[:-1] = -1.0  # maximize total product weight
        res = linprog(c, A_eq=a, b_eq=target, bounds=[(0, None)] * n, method="highs")
        if not res.success:
            return best
        w = np.clip(res.x[:-1], 0.0, None)
        kappa = float(max(res.x[-1], 0.0))
        best = (w, kappa, list(pool))
        # pricing: dual y defines Y with tr(P Y) >= 1 for all product P at optimum
        y = res.eqlin.marginals
        ymat = -(y[: d * d].reshape(d, d) + 1j * y[d * d :].reshape(d, d))
        ymat = (ymat + ymat.conj().T) / 2.0
        y_op = HermitianOperator(dims, ymat)
        cand = product_minima(y_op, starts=24, seed=int(rng.integers(2**31)), top_k=4)
        added = 0
        for val, pv in cand:
            if val < 1.0 - 1e-9:
                pool.append(pv.projector().mat)
                added += 1
        if added == 0:
            break
    return best


def optimize(
    rho: QuantumState,
    max_steps: int = 200,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
) -> BSAResult:
    """Best separable approximation by product-projector subtraction.

    Greedy loop per step: among see-saw candidates in the range of the
    running remainder, subtract the one with the largest extractable weight
    (capped by the pseudo-inverse bound and the remaining trace).  Collected
    directions are refitted by convex programming, and rank-one remainders
    get the exact LP polish.  The reported lambda is a lower bound.
    """
    dims = rho.dims
    eye_mat = np.eye(dims.total, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    r = rho.op.mat.copy()
    vectors: list[ProductVector] = []
    projectors: list[np.ndarray] = []
    weights: list[float] = []
    rows: list[tuple[int, float, float]] = []

    def remaining_trace() -> float:
        return float(np.real(np.trace(r)))

    # ---- stage 1: greedy range subtraction (vector discovery) ----
    step = 0
    stale = 0
    while step < max_steps:
        step += 1
        tr_r = remaining_trace()
        rows.append((step, float(sum(weights)), tr_r))
        if tr_r <= 1e-9:
            break
        r_herm = HermitianOperator(dims, (r + r.conj().T) / 2.0)
        if operator_rank(r_herm, rank_tol) == 0:
            break
        gap_op = HermitianOperator(dims, eye_mat) - range_projector(r_herm, rank_tol)
        minima = product_minima(
            gap_op, starts=32, seed=int(rng.integers(2**31)), top_k=8
        )
        pinv = pseudo_inverse(r_herm, rank_tol)
        candidates = []
        for idx, (gap, pv) in enumerate(minima):
            if gap >= IN_RANGE_TOL:
                continue
            denom = float(np.real(pv.kron().conj() @ pinv.mat @ pv.kron()))
            if denom <= 0:
                continue
            w_cap = min(1.0 / denom, tr_r)
            candidates.append((w_cap, -idx, pv))
        if not candidates or max(c[0] for c in candidates) <= 1e-8:
            stale += 1
            if stale >= 2:
                break
            continue
        w_cap, _, pv = max(candidates, key=lambda t: (t[0], t[1]))
        stale = 0
        vectors.append(pv)
        projectors.append(pv.projector().mat)
        weights.append(w_cap)
        r = r - w_cap * projectors[-1]

    # ---- stage 2: weight refit with column generation along the dual ----
    if vectors:
        for _ in range(8):
            vectors.append(
                ProductVector(
                    _rand_unit(dims.da, rng), _rand_unit(dims.db, rng)
                )
            )
            projectors.append(vectors[-1].projector().mat)
        w_cg = _column_generation(rho.op.mat, dims, vectors, projectors, rng)
        if w_cg is not None and float(np.sum(w_cg)) > sum(weights):
            weights = list(w_cg)
            acc = np.zeros_like(r)
            for wi, p in zip(weights, projectors):
                acc += wi * p
            r = rho.op.mat - acc
            rows.append((step, float(sum(weights)), remaining_trace()))

    # ---- stage 3: rank-one remainder gets the exact LP polish ----
    r_herm = HermitianOperator(dims, (r + r.conj().T) / 2.0)
    tr_r = remaining_trace()
    if projectors and tr_r > 1e-9 and operator_rank(r_herm, max(rank_tol, 1e-7)) == 1:
        chi = np.linalg.eigh(r_herm.mat)[1][:, -1]
        polished = _rank_one_polish(
            rho.op.mat, dims, projectors, chi, seed=int(rng.integers(2**31))
        )
        if polished is not None:
            w_new, kappa, pool = polished
            if float(np.sum(w_new)) >= sum(weights) - 1e-9:
                keep = w_new > 1e-12
                vec_pool = vectors + [
                    _pv_from_projector(dims, p) for p in pool[len(projectors):]
                ]
                vectors = [v for v, k in zip(vec_pool, keep) if k]
                projectors = [p for p, k in zip(pool, keep) if k]
                weights = list(w_new[keep])
                acc = np.zeros_like(r)
                for wi, p in zip(weights, projectors):
                    acc += wi * p
                r = rho.op.mat - acc
                rows.append((step, float(sum(weights)), remaining_trace()))

    lam = float(sum(weights))
    lam = min(lam, 1.0)
    tr_r = remaining_trace()
    remainder: Optional[QuantumState] = None
    if tr_r > 1e-7 and lam < 1.0 - 1e-7:
        m = (r + r.conj().T) / 2.0
        w_ev, v_ev = np.linalg.eigh(m)
        m = (v_ev * np.clip(w_ev, 0.0, None)) @ v_ev.conj().T
        remainder = QuantumState(HermitianOperator(dims, m / np.real(np.trace(m))))

    recon = np.zeros_like(r)
    for wi, p in zip(weights, projectors):
        recon += wi * p
    if remainder is not None:
        recon = recon + (1.0 - lam) * remainder.op.mat
    residual = float(np.linalg.norm(rho.op.mat - recon))

    if lam > 0:
        sep_weights = tuple((wi / lam, pv) for wi, pv in zip(weights, vectors))
    else:
        sep_weights = ()
    return BSAResult(
        lambda_sep=lam,
        sep_weights=sep_weights,
        remainder=remainder,
        reconstruction_residual=residual,
        trace_rows=tuple(rows),
    )


def _pv_from_projector(dims: Dims, p: np.ndarray) -> ProductVector:
    """Recover the (e, f) pair from a product projector matrix."""
    v = np.linalg.eigh(p)[1][:, -1]
    u, _, vh = np.linalg.svd(v.reshape(dims.da, dims.db))
    return ProductVector(u[:, 0], vh[0])


def _rand_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)

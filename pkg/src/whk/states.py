"""Quantum states and entanglement witnesses: the two base strata.

Block-positivity is decided by the multistart see-saw (negative answers are
certificates, positive answers evidence), PPT by exact eigensolve, and
separability exactly at 2x2 / 2x3 via the partial transpose criterion,
heuristically elsewhere.  Witness decomposability runs alternating cone
projections with a PPT-state counterexample search as the fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import nnls

from .core import (
    DEFAULT_TOL,
    Dims,
    HermitianOperator,
    ProductVector,
    effective_tol,
    pairing,
    partial_transpose,
    random_unit_vector,
)
from .errors import (
    DimensionMismatchError,
    PreconditionError,
    StratumViolationError,
)
from .seesaw import (
    DEFAULT_STARTS,
    BlockPositivityReport,
    min_product_expectation,
)

# dims where PPT is exactly equivalent to separability
_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}

PPT_FLAG_PPT = "ppt"
PPT_FLAG_NPT = "npt"
PPT_FLAG_UNKNOWN = "unknown"

BP_YES = "yes_evidence"
BP_NO = "no_certified"
BP_INCONCLUSIVE = "inconclusive"

SEP_SEPARABLE = "separable"
SEP_ENTANGLED = "entangled"
SEP_UNKNOWN = "unknown"

DECOMP_RESIDUAL_TOL = 1e-7


@dataclass(eq=False)
class QuantumState:
    """Unit-trace PSD operator; entangled members double as super witnesses."""

    op: HermitianOperator
    ppt_flag: str = PPT_FLAG_UNKNOWN
    separable_certificate: Optional["ProductDecomposition"] = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if abs(self.op.trace() - 1.0) > 1e-10:
            raise PreconditionError(f"state trace {self.op.trace()} != 1")
        lam_min = self.op.min_eig()
        if lam_min < -effective_tol(self.op.max_abs_eig()):
            raise PreconditionError(f"state has negative eigenvalue {lam_min:.3e}")

    @property
    def dims(self) -> Dims:
        return self.op.dims

    def purity(self) -> float:
        return float(np.real(np.sum(self.op.mat * self.op.mat.T)))


def as_state(op: HermitianOperator, tol: float = DEFAULT_TOL) -> QuantumState:
    """Trace-normalize a PSD operator into a QuantumState."""
    tr = op.trace()
    if tr <= effective_tol(op.max_abs_eig(), tol):
        raise PreconditionError("cannot normalize an operator with nonpositive trace")
    return QuantumState((1.0 / tr) * op)


def pure_state(dims: Dims, vec: np.ndarray) -> QuantumState:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return QuantumState(HermitianOperator(dims, np.outer(v, v.conj())))


@dataclass(eq=False)
class Witness:
    """Block-positive, non-PSD operator.  Build through `certify` so both
    defining conditions are checked; direct construction is unvalidated."""

    op: HermitianOperator
    min_product_expectation: float
    evidence: Optional[BlockPositivityReport] = field(default=None, repr=False)

    @property
    def dims(self) -> Dims:
        return self.op.dims

    @classmethod
    def certify(
        cls,
        op: HermitianOperator,
        starts: int = DEFAULT_STARTS,
        seed: int = 0,
        tol: float = DEFAULT_TOL,
    ) -> "Witness":
        tau = effective_tol(op.max_abs_eig(), tol)
        if op.min_eig() >= -tau:
            raise PreconditionError("operator is PSD; a witness must not be")
        report = min_product_expectation(op, starts=starts, seed=seed)
        if report.min_value < -tau:
            raise StratumViolationError(
                f"product expectation {report.min_value:.3e} < 0: not block-positive"
            )
        return cls(op, report.min_value, report)


def is_block_positive(
    op: HermitianOperator,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> str:
    """Tri-state block-positivity verdict.

    Negative verdicts are certificates (the argmin product vector exhibits a
    negative expectation); positive verdicts are multistart evidence only,
    since the exact decision is intractable in general.
    """
    report = min_product_expectation(op, starts=starts, seed=seed)
    tau = effective_tol(op.max_abs_eig(), tol)
    if report.min_value < -tau:
        return BP_NO
    if report.converged_fraction >= 0.9:
        return BP_YES
    return BP_INCONCLUSIVE


class Detection(NamedTuple):
    detected: bool
    value: float


def detects(w: Witness, rho: QuantumState, tol: float = DEFAULT_TOL) -> Detection:
    """Pairing tr(W rho); detected iff strictly below -tau."""
    if w.op.dims != rho.op.dims:
        raise DimensionMismatchError(f"dims mismatch: {w.op.dims} vs {rho.op.dims}")
    value = pairing(w.op, rho.op)
    tau = effective_tol(w.op.max_abs_eig(), tol)
    return Detection(detected=value < -tau, value=value)


def is_ppt(rho: QuantumState, tol: float = DEFAULT_TOL) -> bool:
    """Positive partial transpose test; caches the flag on the state."""
    if rho.ppt_flag == PPT_FLAG_UNKNOWN:
        ev = np.linalg.eigvalsh(partial_transpose(rho.op).mat)
        tau = effective_tol(float(np.max(np.abs(ev))), tol)
        rho.ppt_flag = PPT_FLAG_PPT if ev[0] >= -tau else PPT_FLAG_NPT
    return rho.ppt_flag == PPT_FLAG_PPT


@dataclass(frozen=True)
class ProductDecomposition:
    """Explicit convex decomposition into product projectors; the replayable
    certificate behind every heuristic 'separable' verdict."""

    weights: tuple
    vectors: tuple
    residual: float

    def reconstruct(self, dims: Dims) -> HermitianOperator:
        m = np.zeros((dims.total, dims.total), dtype=np.complex128)
        for w, pv in zip(self.weights, self.vectors):
            m += w * pv.projector().mat
        return HermitianOperator(dims, m)


def _local_product_grid(rho: QuantumState) -> list[ProductVector]:
    """Product atoms from the eigenbases of the reduced operators plus the
    computational grid; exact fits for locally diagonal and product-form
    states come straight out of these."""
    da, db = rho.dims
    m4 = rho.op.mat.reshape(da, db, da, db)
    red_a = np.einsum("abcb->ac", m4)
    red_b = np.einsum("abad->bd", m4)
    _, vec_a = np.linalg.eigh((red_a + red_a.conj().T) / 2.0)
    _, vec_b = np.linalg.eigh((red_b + red_b.conj().T) / 2.0)
    out = []
    for i in range(da):
        for j in range(db):
            out.append(ProductVector(vec_a[:, i], vec_b[:, j]))
            out.append(ProductVector(np.eye(da)[i], np.eye(db)[j]))
    return out


def product_decomposition_search(
    rho: QuantumState,
    max_terms: int = 200,
    seed: int = 0,
    residual_tol: float = DECOMP_RESIDUAL_TOL,
) -> Optional[ProductDecomposition]:
    """Fit rho as a nonnegative combination of product projectors.

    The pool starts from structured local-eigenbasis atoms and grows by
    targeted see-saw on the residual; weights come from nonnegative least
    squares, with warm-started local refinement sweeps of the surviving
    atoms.  Returns None when the residual cannot be pushed below
    `residual_tol` within the term budget (the verdict is then unknown,
    never 'not separable').
    """
    from .seesaw import product_minima, refine_product_vector

    dims = rho.dims
    rng = np.random.default_rng(seed)
    d = dims.total

    def embed(m):
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    target = embed(rho.op.mat)
    pool: list[ProductVector] = list(_local_product_grid(rho))[:max_terms]
    for _ in range(min(2 * d, max(0, max_terms - len(pool)))):
        pool.append(
            ProductVector(random_unit_vector(dims.da, rng), random_unit_vector(dims.db, rng))
        )

    def refit(atoms):
        a = np.stack([embed(pv.projector().mat) for pv in atoms], axis=1)
        w, _ = nnls(a, target)
        return w, float(np.linalg.norm(target - a @ w))

    best = None

    def record(atoms, w, residual):
        nonlocal best
        if best is None or residual < best[0]:
            keep = w > 1e-14
            best = (
                residual,
                tuple(float(x) for x in w[keep]),
                tuple(p for p, k in zip(atoms, keep) if k),
            )

    # growth phase: fully corrective conditional gradient
    while True:
        w, residual = refit(pool)
        record(pool, w, residual)
        if residual <= residual_tol or len(pool) >= max_terms:
            break
        r_mat = rho.op.mat - sum(
            wi * pv.projector().mat for wi, pv in zip(w, pool) if wi > 1e-14
        )
        r_op = HermitianOperator(dims, (r_mat + r_mat.conj().T) / 2.0)
        for _, pv in product_minima(
            -1.0 * r_op, starts=16, seed=int(rng.integers(2**31)), top_k=3
        ):
            pool.append(pv)

    # refinement phase: local sweeps over the surviving atoms
    if best[0] > residual_tol:
        w, residual = refit(pool)
        atoms = [pv for wi, pv in zip(w, pool) if wi > 1e-12]
        for _ in range(12):
            if not atoms:
                break
            w, residual = refit(atoms)
            record(atoms, w, residual)
            if residual <= residual_tol:
                break
            keep = w > 1e-12
            atoms = [pv for pv, k in zip(atoms, keep) if k]
            w = w[keep]
            total = sum(wi * pv.projector().mat for wi, pv in zip(w, atoms))
            refined = []
            for wi, pv in zip(w, atoms):
                r_i = rho.op.mat - (total - wi * pv.projector().mat)
                r_op = HermitianOperator(dims, (r_i + r_i.conj().T) / 2.0)
                _, pv_new = refine_product_vector(-1.0 * r_op, pv)
                total += wi * (pv_new.projector().mat - pv.projector().mat)
                refined.append(pv_new)
            atoms = refined

    if best[0] > residual_tol:
        return None
    residual, weights, vectors = best
    return ProductDecomposition(weights=weights, vectors=vectors, residual=residual)


def is_separable(
    rho: QuantumState,
    effort: int = 200,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> str:
    """Tri-state separability verdict.

    Exact at 2x2 and 2x3 (PPT criterion).  Elsewhere: NPT states and states
    detected by a block-positive separator are entangled; states reproduced
    by an explicit product decomposition are separable; otherwise unknown.
    """
    exact = (rho.dims.da, rho.dims.db) in _EXACT_DIMS
    ppt = is_ppt(rho, tol=tol)
    if not ppt:
        return SEP_ENTANGLED
    if exact:
        return SEP_SEPARABLE
    cert = product_decomposition_search(rho, max_terms=effort, seed=seed)
    if cert is not None:
        rho.separable_certificate = cert
        return SEP_SEPARABLE
    from .separators import entangling_witness_search

    found = entangling_witness_search(rho, seed=seed, tol=tol)
    if found is not None:
        return SEP_ENTANGLED
    return SEP_UNKNOWN


# ---------------------------------------------------------------------------
# witness decomposability
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DecompositionCertificate:
    verdict: str  # "decomposable" | "indecomposable_evidence" | "inconclusive"
    a: float
    p: Optional[HermitianOperator]
    q: Optional[HermitianOperator]
    residual: float
    counterexample_state: Optional[QuantumState] = None


def _psd_clip(m: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh((m + m.conj().T) / 2.0)
    ev = np.clip(ev, 0.0, None)
    return (vec * ev) @ vec.conj().T


def _pt_mat(m: np.ndarray, dims: Dims) -> np.ndarray:
    da, db = dims
    return m.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def decompose_witness(
    w: Witness,
    iters: int = 2000,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> DecompositionCertificate:
    """Try to split a witness into PSD + partial-transposed-PSD parts.

    Success certifies decomposability; on failure a PPT counterexample state
    is searched for, which certifies the opposite.  Neither within budget
    gives an inconclusive verdict.
    """
    dims = w.op.dims
    wmat = w.op.mat
    tau = effective_tol(w.op.max_abs_eig(), tol)
    if w.op.min_eig() >= -tau:
        raise PreconditionError("input is PSD; not a witness")

    # exact path: W = Q^G with Q = W^G already PSD
    wg = _pt_mat(wmat, dims)
    if np.linalg.eigvalsh(wg)[0] >= -tau:
        q = HermitianOperator(dims, _psd_clip(wg))
        residual = float(np.linalg.norm(wmat - _pt_mat(q.mat, dims)))
        return DecompositionCertificate(
            verdict="decomposable",
            a=0.0,
            p=HermitianOperator(dims, np.zeros_like(wmat)),
            q=q,
            residual=residual,
        )

    # alternating projections between the product cone {X >= 0} x {Y^G >= 0}
    # and the affine constraint X + Y = W
    x = _psd_clip(wmat)
    y = wmat - x
    residual = np.inf
    for _ in range(iters):
        xc = _psd_clip(x)
        yc = _pt_mat(_psd_clip(_pt_mat(y, dims)), dims)
        gap = wmat - xc - yc
        residual = float(np.linalg.norm(gap))
        if residual <= DECOMP_RESIDUAL_TOL:
            x, y = xc, yc
            break
        x = xc + gap / 2.0
        y = yc + gap / 2.0

    if residual <= DECOMP_RESIDUAL_TOL:
        x = _psd_clip(x)
        qmat = _psd_clip(_pt_mat(y, dims))
        tr_x, tr_q = float(np.real(np.trace(x))), float(np.real(np.trace(qmat)))
        a = tr_x / (tr_x + tr_q) if tr_x + tr_q > 0 else 0.0
        p_op = HermitianOperator(dims, x / a if a > 0 else np.zeros_like(x))
        q_op = HermitianOperator(dims, qmat / (1 - a) if a < 1 else np.zeros_like(x))
        recon = a * p_op.mat + (1 - a) * _pt_mat(q_op.mat, dims)
        return DecompositionCertificate(
            verdict="decomposable",
            a=a,
            p=p_op,
            q=q_op,
            residual=float(np.linalg.norm(wmat - recon)),
        )

    counter = indecomposability_certificate(w, seed=seed, tol=tol)
    if counter is not None:
        return DecompositionCertificate(
            verdict="indecomposable_evidence",
            a=0.0,
            p=None,
            q=None,
            residual=residual,
            counterexample_state=counter,
        )
    return DecompositionCertificate(
        verdict="inconclusive", a=0.0, p=None, q=None, residual=residual
    )


def _project_to_ppt_state(m: np.ndarray, dims: Dims, sweeps: int = 40) -> np.ndarray:
    """Alternating projections onto {PSD} / {PT-PSD} / {trace 1}, then a mix
    with the maximally mixed state to clear any remaining negative tail."""
    d = dims.total
    eye = np.eye(d)
    for _ in range(sweeps):
        m = _psd_clip(m)
        m = _pt_mat(_psd_clip(_pt_mat(m, dims)), dims)
        m = m + (1.0 - np.real(np.trace(m))) * eye / d
    deficit = max(
        0.0,
        -float(np.linalg.eigvalsh(m)[0]),
        -float(np.linalg.eigvalsh(_pt_mat(m, dims))[0]),
    )
    if deficit > 0:
        t = min(1.0, 2.0 * deficit * d / (1.0 + 2.0 * deficit * d))
        m = (1 - t) * m + t * eye / d
    return (m + m.conj().T) / 2.0


def indecomposability_certificate(
    w: Witness,
    seed: int = 0,
    steps: int = 400,
    tol: float = DEFAULT_TOL,
) -> Optional[QuantumState]:
    """Projected-gradient search for a PPT state paired negatively with w.

    Any hit is a rigorous certificate that w is indecomposable (verified
    exactly before returning); None means the search found nothing.
    """
    dims = w.op.dims
    d = dims.total
    tau = effective_tol(w.op.max_abs_eig(), tol)
    grad = w.op.mat / max(w.op.max_abs_eig(), 1e-30)
    rng = np.random.default_rng(seed)

    starts = [np.eye(d, dtype=np.complex128) / d]
    for _ in range(2):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        m = g @ g.conj().T
        starts.append(_project_to_ppt_state(m / np.real(np.trace(m)), dims))

    best: Optional[QuantumState] = None
    best_val = -tau
    for m in starts:
        rho = m.copy()
        for k in range(steps):
            eta = 0.5 / np.sqrt(k + 1.0)
            rho = _project_to_ppt_state(rho - eta * grad, dims)
        val = float(np.real(np.sum(w.op.mat * rho.T)))
        if val < best_val:
            ev_min = float(np.linalg.eigvalsh(rho)[0])
            pt_min = float(np.linalg.eigvalsh(_pt_mat(rho, dims))[0])
            if ev_min >= -tau and pt_min >= -tau and abs(np.real(np.trace(rho)) - 1) < 1e-10:
                state = QuantumState(HermitianOperator(dims, rho))
                if is_ppt(state, tol=tol):
                    best, best_val = state, val
    return best


def random_decomposable_witness(
    dims: Dims,
    seed: int,
    detect: Optional[QuantumState] = None,
    max_tries: int = 500,
    tol: float = DEFAULT_TOL,
) -> Witness:
    """Seeded random witness of the form Q^G (+ tilt), optionally filtered to
    detect a given state.  Every member of this family is block-positive by
    construction, so no see-saw certification is needed."""
    dims = Dims(*dims)
    rng = np.random.default_rng(seed)
    d = dims.total
    tilt = 0.0
    v_neg = None
    if detect is not None:
        ev, vec = np.linalg.eigh(partial_transpose(detect.op).mat)
        v_neg = vec[:, 0]
    for attempt in range(max_tries):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q = g @ g.conj().T
        q /= np.real(np.trace(q))
        if v_neg is not None and tilt > 0:
            q = (1 - tilt) * q + tilt * np.outer(v_neg, v_neg.conj())
        wmat = _pt_mat(q, dims)
        op = HermitianOperator(dims, wmat)
        tau = effective_tol(op.max_abs_eig(), tol)
        if op.min_eig() >= -tau:
            continue
        if detect is not None:
            if pairing(op, detect.op) >= -tau:
                tilt = min(0.9, tilt + 0.05)
                continue
        return Witness(op, 0.0, None)
    raise PreconditionError(f"no detecting decomposable witness found in {max_tries} tries")

"""Stratum classification and the detector at every level of the hierarchy.

A Hermitian operator is a separable state, an entangled state, an
entanglement witness, or some other observable.  Witnesses detect entangled
states; entangled states detect witnesses; separable (product) states detect
the non-block-positive leftovers.  Common-detection questions reduce to the
concavity of the minimum eigenvalue along the mixing segment and are decided
by golden-section search with an explicit certificate in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    DEFAULT_TOL,
    HermitianOperator,
    ProductVector,
    effective_tol,
    identity,
    pairing,
    partial_transpose,
    random_hermitian,
    spectrum,
)
from .errors import (
    DimensionMismatchError,
    InconsistencyError,
    IndistinguishableError,
    InvalidArgumentError,
    NotInOtherObservablesError,
    NoWitnessError,
    SearchInconclusiveError,
    StratumViolationError,
)
from .seesaw import DEFAULT_STARTS, min_product_expectation
from .separators import SeparatorResult, entangling_witness_search, separate
from .states import (
    BP_NO,
    BP_YES,
    SEP_ENTANGLED,
    SEP_SEPARABLE,
    SEP_UNKNOWN,
    Detection,
    QuantumState,
    Witness,
    as_state,
    decompose_witness,
    detects,
    is_block_positive,
    is_ppt,
    is_separable,
    product_decomposition_search,
    pure_state,
    random_decomposable_witness,
)

_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}

STRATUM_SEPARABLE = "separable_state"
STRATUM_ENTANGLED = "entangled_state"
STRATUM_WITNESS = "entanglement_witness"
STRATUM_OTHER = "other_observable"
STRATUM_UNKNOWN = "unknown"

SUB_NPT = "npt"
SUB_PPT_BOUND = "ppt_bound"
SUB_DECOMPOSABLE = "decomposable"
SUB_INDECOMPOSABLE = "indecomposable_evidence"

_LEGAL_SUBS = {
    STRATUM_ENTANGLED: {SUB_NPT, SUB_PPT_BOUND},
    STRATUM_WITNESS: {SUB_DECOMPOSABLE, SUB_INDECOMPOSABLE},
}


@dataclass(frozen=True)
class ClassLabel:
    stratum: str
    sub: Optional[str] = None

    def __post_init__(self):
        if self.sub is not None and self.sub not in _LEGAL_SUBS.get(self.stratum, set()):
            raise InvalidArgumentError(f"sub {self.sub!r} illegal for {self.stratum!r}")


def classify(
    op: HermitianOperator,
    effort: int = 200,
    seed: int = 0,
    starts: int = DEFAULT_STARTS,
    tol: float = DEFAULT_TOL,
) -> ClassLabel:
    """Place an operator in its stratum.

    PSD operators are trace-normalized first (the strata are rays), then
    split by separability; the rest split on block-positivity, with the
    witness branch refined by a decomposition attempt.
    """
    scale = op.max_abs_eig()
    if scale <= tol:
        raise InvalidArgumentError("zero operator has no stratum")
    tau = effective_tol(scale, tol)
    if op.min_eig() >= -tau:
        if op.trace() <= tau:
            raise InvalidArgumentError("PSD operator with zero trace")
        rho = as_state(op, tol=tol)
        verdict = is_separable(rho, effort=effort, seed=seed, tol=tol)
        if verdict == SEP_SEPARABLE:
            return ClassLabel(STRATUM_SEPARABLE)
        if verdict == SEP_ENTANGLED:
            sub = SUB_PPT_BOUND if is_ppt(rho, tol=tol) else SUB_NPT
            return ClassLabel(STRATUM_ENTANGLED, sub)
        return ClassLabel(STRATUM_UNKNOWN)
    bp = is_block_positive(op, starts=starts, seed=seed, tol=tol)
    if bp == BP_NO:
        return ClassLabel(STRATUM_OTHER)
    if bp == BP_YES:
        w = Witness(op, 0.0, None)
        cert = decompose_witness(w, seed=seed, tol=tol)
        if cert.verdict == "decomposable":
            return ClassLabel(STRATUM_WITNESS, SUB_DECOMPOSABLE)
        if cert.verdict == "indecomposable_evidence":
            return ClassLabel(STRATUM_WITNESS, SUB_INDECOMPOSABLE)
        return ClassLabel(STRATUM_WITNESS)
    return ClassLabel(STRATUM_UNKNOWN)


def witness_for(
    rho: QuantumState,
    effort: int = 200,
    seed: int = 0,
    starts: int = DEFAULT_STARTS,
    tol: float = DEFAULT_TOL,
) -> Witness:
    """Witness detecting an entangled state, normalized to unit spectral radius.

    NPT states get the partial transpose of the projector onto the negative
    eigenvector of rho^G (optimal for the Werner family); PPT entangled
    states go through the cutting-plane separator search.
    """
    if not is_ppt(rho, tol=tol):
        ev, vec = np.linalg.eigh(partial_transpose(rho.op).mat)
        v = vec[:, 0]
        w_op = partial_transpose(
            HermitianOperator(rho.dims, np.outer(v, v.conj()))
        )
        w_op = (1.0 / w_op.max_abs_eig()) * w_op
        w = Witness.certify(w_op, starts=starts, seed=seed, tol=tol)
        if not detects(w, rho, tol=tol).detected:
            raise InconsistencyError("constructed witness fails to detect an NPT state")
        return w
    if (rho.dims.da, rho.dims.db) in _EXACT_DIMS:
        raise NoWitnessError("state is PPT at 2x2/2x3, hence separable")
    w = entangling_witness_search(rho, seed=seed, tol=tol)
    if w is not None:
        return w
    if product_decomposition_search(rho, max_terms=effort, seed=seed) is not None:
        raise NoWitnessError("state admits a product decomposition; separable")
    raise SearchInconclusiveError(
        "witness search budget exhausted; state neither certified entangled nor separable"
    )


def _schmidt_values(dims, vec: np.ndarray) -> np.ndarray:
    return np.linalg.svd(vec.reshape(dims.da, dims.db), compute_uv=False)


def super_witness_for(
    w: Witness,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    panel: int = 100,
) -> QuantumState:
    """The entangled state detecting a witness: the pure state on its most
    negative eigenvector.

    The pairing equals the witness's minimum eigenvalue (< 0); positivity of
    the pairing against arbitrary states holds identically for PSD pairs and
    is spot-checked on a random panel.
    """
    ev, vec = np.linalg.eigh(w.op.mat)
    tau = effective_tol(w.op.max_abs_eig(), tol)
    if ev[0] >= -tau:
        raise StratumViolationError("operator has no negative eigenvalue; not a witness")
    v = vec[:, 0]
    s = _schmidt_values(w.op.dims, v)
    if s[1] <= 1e-9 * s[0]:
        raise StratumViolationError(
            "ground eigenvector is a product vector; input was not block-positive"
        )
    state = pure_state(w.op.dims, v)
    if pairing(state.op, w.op) >= -tau:
        raise InconsistencyError("pairing against witness not negative")
    # detector status: the state must itself be witnessable (entangled)
    witness_for(state, seed=seed, tol=tol)
    for k in range(panel):
        probe = random_hermitian(w.op.dims, seed=(seed * 7919 + k), ensemble="state")
        if pairing(state.op, probe) < -tau:
            raise InconsistencyError("negative pairing against a quantum state")
    return state


def _random_block_positive_panel(dims, seed: int, n: int) -> list[HermitianOperator]:
    """PSD operators, partial transposes of PSD operators, and mixtures:
    block-positive by construction."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        kind = k % 3
        g = rng.standard_normal((dims.total, dims.total)) + 1j * rng.standard_normal(
            (dims.total, dims.total)
        )
        m = g @ g.conj().T
        m /= np.real(np.trace(m))
        op = HermitianOperator(dims, m)
        if kind == 1:
            op = partial_transpose(op)
        elif kind == 2:
            op = 0.5 * op + 0.5 * partial_transpose(op)
        out.append(op)
    return out


def super_super_witness_for(
    o: HermitianOperator,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    panel: int = 100,
) -> QuantumState:
    """The separable (product) state separating a non-block-positive
    observable from the witnesses: the block-positivity argmin projector."""
    report = min_product_expectation(o, starts=starts, seed=seed)
    tau = effective_tol(o.max_abs_eig(), tol)
    if report.min_value >= -tau:
        raise NotInOtherObservablesError(
            "no negative product expectation found; operator is block-positive evidence"
        )
    state = QuantumState(report.argmin.projector())
    if pairing(state.op, o) >= -tau:
        raise InconsistencyError("argmin product state lost its negative pairing")
    for b in _random_block_positive_panel(o.dims, seed + 1, panel):
        if pairing(state.op, b) < -effective_tol(b.max_abs_eig(), tol):
            raise InconsistencyError("product state paired negatively with block-positive panel member")
    return state


# ---------------------------------------------------------------------------
# common detection (golden section over the concave lambda_min profile)
# ---------------------------------------------------------------------------

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fn, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-12):
    """Maximize a concave function on [lo, hi]; returns (x, fn(x))."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
    x = (a + b) / 2.0
    candidates = [(fn(lo), lo), (fn(hi), hi), (fn(x), x)]
    fbest, xbest = max(candidates)
    return xbest, fbest


def _ground_space(mat: np.ndarray, deg_tol: float) -> np.ndarray:
    ev, vec = np.linalg.eigh(mat)
    keep = ev <= ev[0] + deg_tol
    return vec[:, keep]


def _balanced_ground_vector(
    m_star: np.ndarray, diff: np.ndarray, deg_tol: float
) -> np.ndarray:
    """Unit vector in the ground space of m_star on which the two mixed
    operators take (nearly) equal values: zero-crossing of diff restricted
    to the ground space, falling back to the extreme directions."""
    basis = _ground_space(m_star, deg_tol)
    a_res = basis.conj().T @ diff @ basis
    a_res = (a_res + a_res.conj().T) / 2.0
    mu, u = np.linalg.eigh(a_res)
    if mu[0] >= 0:
        return basis @ u[:, 0]
    if mu[-1] <= 0:
        return basis @ u[:, -1]
    t = np.arctan(np.sqrt(mu[-1] / -mu[0]))
    v = np.cos(t) * u[:, -1] + np.sin(t) * u[:, 0]
    return basis @ v


class CommonDetection(NamedTuple):
    state: Optional[QuantumState]
    blocking_lambda: Optional[float]


class CommonWitness(NamedTuple):
    witness: Optional[Witness]
    blocking_lambda: Optional[float]


def _common_ground_search(x1: HermitianOperator, x2: HermitianOperator, tol: float):
    """Shared engine: maximize lambda_min(lam*x1 + (1-lam)*x2) over [0,1].

    Returns either ("blocked", lam_star) when the maximum is nonnegative, or
    ("found", v) with a unit vector paired (equally) negatively with both.
    """
    x1._check_dims(x2)
    scale = max(x1.max_abs_eig(), x2.max_abs_eig())
    tau = effective_tol(scale, tol)

    def g(lam):
        return float(
            np.linalg.eigvalsh(lam * x1.mat + (1 - lam) * x2.mat)[0]
        )

    lam_star, g_star = _golden_max(g)
    if g_star >= -tau:
        return "blocked", lam_star, None
    m_star = lam_star * x1.mat + (1 - lam_star) * x2.mat
    diff = x1.mat - x2.mat
    deg_tol = max(1e-10 * scale, 1e-13)
    candidates = [_balanced_ground_vector(m_star, diff, deg_tol)]
    basis = _ground_space(m_star, deg_tol)
    candidates.append(basis[:, 0])
    for v in candidates:
        v1 = float(np.real(v.conj() @ x1.mat @ v))
        v2 = float(np.real(v.conj() @ x2.mat @ v))
        if v1 < -tau and v2 < -tau:
            return "found", lam_star, v
    raise InconsistencyError(
        "max of lambda_min is negative but no jointly negative vector was found"
    )


def common_detected_state(
    w1: Witness, w2: Witness, tol: float = DEFAULT_TOL
) -> CommonDetection:
    """State detected by both witnesses, or the mixing weight at which the
    segment crosses the PSD cone (then no common state exists)."""
    status, lam, v = _common_ground_search(w1.op, w2.op, tol)
    if status == "blocked":
        return CommonDetection(state=None, blocking_lambda=float(lam))
    state = pure_state(w1.op.dims, v)
    if not (detects(w1, state, tol=tol).detected and detects(w2, state, tol=tol).detected):
        raise InconsistencyError("certificate state fails a detects() check")
    return CommonDetection(state=state, blocking_lambda=None)


def common_witness(
    p1: QuantumState, p2: QuantumState, tol: float = DEFAULT_TOL
) -> CommonWitness:
    """Witness detecting both entangled states, or the mixing weight at which
    the segment becomes PPT (no common witness at PPT-exact dimensions)."""
    from .errors import PreconditionError

    if (p1.dims.da, p1.dims.db) in _EXACT_DIMS:
        if is_ppt(p1, tol=tol) or is_ppt(p2, tol=tol):
            raise PreconditionError("both inputs must be entangled states")
    x1 = partial_transpose(p1.op)
    x2 = partial_transpose(p2.op)
    status, lam, v = _common_ground_search(x1, x2, tol)
    if status == "blocked":
        return CommonWitness(witness=None, blocking_lambda=float(lam))
    w_op = partial_transpose(
        HermitianOperator(p1.dims, np.outer(v, v.conj()))
    )
    w_op = (1.0 / w_op.max_abs_eig()) * w_op
    w = Witness.certify(w_op, tol=tol)
    if not (detects(w, p1, tol=tol).detected and detects(w, p2, tol=tol).detected):
        raise InconsistencyError("certificate witness fails a detects() check")
    return CommonWitness(witness=w, blocking_lambda=None)


def distinguish(
    r1: QuantumState, r2: QuantumState, tol: float = DEFAULT_TOL
) -> HermitianOperator:
    """Constructive separator M with tr(M r2) < 0 < tr(M r1) and M non-PSD:
    M = (r1 - r2) - c I at the midpoint shift c."""
    if r1.dims != r2.dims:
        raise DimensionMismatchError(f"dims mismatch: {r1.dims} vs {r2.dims}")
    a = r1.op - r2.op
    gap = a.fro_norm()
    if gap <= 1e-8:
        raise IndistinguishableError(f"states coincide within {gap:.3e}")
    c = (pairing(a, r1.op) + pairing(a, r2.op)) / 2.0
    m = a - c * identity(r1.dims)
    if not (pairing(m, r2.op) < 0 < pairing(m, r1.op)):
        raise InconsistencyError("separator sign pattern failed")
    return m


__all__ = [
    "ClassLabel",
    "CommonDetection",
    "CommonWitness",
    "SeparatorResult",
    "classify",
    "common_detected_state",
    "common_witness",
    "distinguish",
    "separate",
    "super_super_witness_for",
    "super_witness_for",
    "witness_for",
]

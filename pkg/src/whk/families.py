"""Canonical families: the Werner line, its witnessed-set family, the tiles
unextendible product basis with its bound entangled complement, completely
entangled subspace arithmetic, and the witness-based entanglement measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    Dims,
    HermitianOperator,
    ProductVector,
    effective_tol,
    pairing,
    partial_transpose,
)
from .errors import InvalidArgumentError, PreconditionError
from .order import in_witnessed_set
from .seesaw import min_product_expectation
from .states import QuantumState, Witness, as_state, is_ppt, is_separable, pure_state

_D22 = Dims(2, 2)

UPB_UNEXTENDIBILITY_FLOOR = 1e-3


def bell_phi_plus() -> np.ndarray:
    """(|00> + |11>)/sqrt(2), the maximally entangled vector of the Werner line."""
    v = np.zeros(4, dtype=np.complex128)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return v


def singlet_vector() -> np.ndarray:
    """(|10> - |01>)/sqrt(2)."""
    v = np.zeros(4, dtype=np.complex128)
    v[2] = 1.0 / np.sqrt(2.0)
    v[1] = -1.0 / np.sqrt(2.0)
    return v


def werner_witness_operator() -> HermitianOperator:
    """The canonical trace-one 2x2 witness: partial transpose of the singlet
    projector.  Its negative eigenvector is the Werner Bell state."""
    v = singlet_vector()
    return partial_transpose(HermitianOperator(_D22, np.outer(v, v.conj())))


def werner(p: float) -> QuantumState:
    """p |psi><psi| + (1-p) I/4; separable for p <= 1/3, NPT entangled above."""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"werner parameter p={p} outside [0, 1]")
    psi = bell_phi_plus()
    m = p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return QuantumState(HermitianOperator(_D22, m))


class WitnessFamilyMember(NamedTuple):
    operator: HermitianOperator
    in_s: bool
    p_threshold_check: float


def werner_witness_family(
    q: float, rho: QuantumState, pi_p: QuantumState, tol: float = DEFAULT_TOL
) -> WitnessFamilyMember:
    """Member W(q, rho) = q * (singlet witness) + (1-q) * rho of the witnessed
    family, with its membership in S_{pi_p} and the raw pairing value."""
    if not 0.0 <= q <= 1.0:
        raise InvalidArgumentError(f"mixing parameter q={q} outside [0, 1]")
    op = q * werner_witness_operator() + (1.0 - q) * rho.op
    value = pairing(op, pi_p.op)
    return WitnessFamilyMember(
        operator=op,
        in_s=in_witnessed_set(op, pi_p, tol=tol),
        p_threshold_check=value,
    )


@dataclass(frozen=True)
class UPBSpec:
    """Pairwise-orthogonal product vectors with no product vector orthogonal
    to all of them (unextendibility checked as see-saw evidence)."""

    dims: Dims
    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", Dims(*self.dims).validate())
        vecs = tuple(self.vectors)
        if not vecs:
            raise InvalidArgumentError("a UPB needs at least one vector")
        kets = [pv.kron() for pv in vecs]
        for i in range(len(kets)):
            for j in range(i + 1, len(kets)):
                if abs(np.vdot(kets[i], kets[j])) > 1e-10:
                    raise PreconditionError(
                        f"UPB vectors {i} and {j} are not orthogonal"
                    )
        object.__setattr__(self, "vectors", vecs)
        residual = min_product_expectation(
            self.sum_projector(), starts=200, seed=0
        ).min_value
        if residual < UPB_UNEXTENDIBILITY_FLOOR:
            raise PreconditionError(
                f"orthogonal product vector found (residual {residual:.2e}); "
                "the family is extendible"
            )

    @property
    def n(self) -> int:
        return len(self.vectors)

    @property
    def total_dim(self) -> int:
        return self.dims.total

    def sum_projector(self) -> HermitianOperator:
        m = np.zeros((self.dims.total, self.dims.total), dtype=np.complex128)
        for pv in self.vectors:
            v = pv.kron()
            m += np.outer(v, v.conj())
        return HermitianOperator(self.dims, m)


def tiles_upb() -> UPBSpec:
    """The five 3x3 tiles vectors."""
    s2 = 1.0 / np.sqrt(2.0)
    s3 = 1.0 / np.sqrt(3.0)
    e = np.eye(3, dtype=np.complex128)
    pairs = [
        (e[0], s2 * (e[0] - e[1])),
        (e[2], s2 * (e[1] - e[2])),
        (s2 * (e[0] - e[1]), e[2]),
        (s2 * (e[1] - e[2]), e[0]),
        (s3 * (e[0] + e[1] + e[2]), s3 * (e[0] + e[1] + e[2])),
    ]
    return UPBSpec(Dims(3, 3), tuple(ProductVector(a, b) for a, b in pairs))


def upb_complement_state(upb: UPBSpec) -> QuantumState:
    """Uniform mixture on the orthocomplement of the UPB span: a bound
    entangled state of rank D - n."""
    d, n = upb.total_dim, upb.n
    m = (np.eye(d, dtype=np.complex128) - upb.sum_projector().mat) / (d - n)
    return QuantumState(HermitianOperator(upb.dims, m))


def ces_max_dim(dims: Sequence[int]) -> int:
    """Largest dimension of a subspace containing no product vector in a
    k-partite space: d1...dk - (d1 + ... + dk) + k - 1."""
    dims = list(dims)
    if len(dims) < 2:
        raise InvalidArgumentError("need at least two factors")
    if any(d < 2 for d in dims):
        raise InvalidArgumentError("every factor dimension must be >= 2")
    prod = 1
    for d in dims:
        prod *= d
    return prod - sum(dims) + len(dims) - 1


def ces_mixture_optimal_sample(upb: UPBSpec, seed: int) -> QuantumState:
    """Random full-rank mixture supported on the UPB complement; its range is
    inside a completely entangled subspace, so it is an optimal entangled
    state."""
    rng = np.random.default_rng(seed)
    comp = np.eye(upb.total_dim, dtype=np.complex128) - upb.sum_projector().mat
    ev, vec = np.linalg.eigh((comp + comp.conj().T) / 2.0)
    basis = vec[:, ev > 0.5]
    k = basis.shape[1]
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    mix = g @ g.conj().T
    m = basis @ mix @ basis.conj().T
    m /= np.real(np.trace(m))
    return QuantumState(HermitianOperator(upb.dims, m))


@dataclass(eq=False)
class MeasureResult:
    value: float
    achieving_witness: Optional[Witness]
    mode: str  # "decomposable_exact" | "indecomposable_search"


def measure(
    rho: QuantumState,
    seed: int = 0,
    search_indecomposable: bool = True,
    tol: float = DEFAULT_TOL,
) -> MeasureResult:
    """Entanglement content max{0, -min_W tr(W rho)}.

    Over trace-one decomposable witnesses the minimum is the most negative
    eigenvalue of the partial transpose, achieved by the transposed projector
    onto its eigenvector (exact closed form).  PPT entangled states fall back
    to the separator search, whose witness supplies a lower bound.  A positive
    value always ships the verified achieving witness.
    """
    pt = partial_transpose(rho.op)
    ev, vec = np.linalg.eigh(pt.mat)
    tau = effective_tol(float(np.max(np.abs(ev))), tol)
    if ev[0] < -tau:
        v = vec[:, 0]
        w_op = partial_transpose(
            HermitianOperator(rho.dims, np.outer(v, v.conj()))
        )
        w = Witness(w_op, 0.0, None)
        value = -pairing(w_op, rho.op)
        if abs(value + ev[0]) > 1e-9:
            raise PreconditionError("achieving witness fails to reproduce the value")
        return MeasureResult(value=value, achieving_witness=w, mode="decomposable_exact")
    if search_indecomposable and (rho.dims.da, rho.dims.db) not in {(2, 2), (2, 3), (3, 2)}:
        from .separators import entangling_witness_search

        w = entangling_witness_search(rho, seed=seed, tol=tol)
        if w is not None:
            value = max(0.0, -pairing(w.op, rho.op))
            return MeasureResult(
                value=value, achieving_witness=w, mode="indecomposable_search"
            )
    return MeasureResult(value=0.0, achieving_witness=None, mode="decomposable_exact")

"""Dense complex Hermitian linear algebra on a bipartite Hilbert space.

Carries the operator/vector types used everywhere else plus the basic
manipulations: partial transpose, eigendecomposition, range projectors,
pseudo-inverses and seeded random ensembles.  All values are immutable
after construction; every function here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    GenerationFailureError,
    InvalidArgumentError,
    MalformedOperatorError,
    NotPositiveError,
)

# Hermiticity acceptance: max-abs deviation from the conjugate transpose
# must stay below HERM_TOL * (1 + max-abs entry).
HERM_TOL = 1e-12

# Default relative threshold for PSD / zero decisions.  Effective threshold
# is DEFAULT_TOL scaled by the operator's largest absolute eigenvalue
# (floored at 1 so near-zero operators are not judged at absurd precision).
DEFAULT_TOL = 1e-9

# Default relative rank cutoff for range projectors and pseudo-inverses.
RANK_TOL = 1e-9

_NPT_RETRY_BUDGET = 500


class Dims(NamedTuple):
    """Subsystem dimensions (dA, dB) of a bipartite space C^dA x C^dB."""

    da: int
    db: int

    @property
    def total(self) -> int:
        return self.da * self.db

    def validate(self) -> "Dims":
        if self.da < 2 or self.db < 2:
            raise InvalidArgumentError(f"subsystem dimensions must be >= 2, got {self}")
        return self


def effective_tol(scale: float, tol: float = DEFAULT_TOL) -> float:
    """Threshold for sign decisions on an operator whose largest absolute
    eigenvalue is `scale`."""
    return tol * max(1.0, abs(scale))


@dataclass(frozen=True)
class HermitianOperator:
    """A D x D complex Hermitian matrix tagged with bipartite dimensions."""

    dims: Dims
    mat: np.ndarray

    def __post_init__(self):
        dims = Dims(*self.dims).validate()
        object.__setattr__(self, "dims", dims)
        m = np.asarray(self.mat, dtype=np.complex128)
        if m.shape != (dims.total, dims.total):
            raise MalformedOperatorError(
                f"matrix shape {m.shape} does not match dims {dims} (D={dims.total})"
            )
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERM_TOL * (1.0 + np.max(np.abs(m))):
            raise MalformedOperatorError(f"matrix is not Hermitian (deviation {dev:.3e})")
        m = (m + m.conj().T) / 2.0
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    # -- arithmetic (real-linear combinations stay Hermitian) --------------

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_dims(other)
        return HermitianOperator(self.dims, self.mat + other.mat)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_dims(other)
        return HermitianOperator(self.dims, self.mat - other.mat)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(self.dims, self.mat * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(self.dims, -self.mat)

    def _check_dims(self, other: "HermitianOperator"):
        from .errors import DimensionMismatchError

        if self.dims != other.dims:
            raise DimensionMismatchError(f"dims mismatch: {self.dims} vs {other.dims}")

    # -- scalars ------------------------------------------------------------

    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def max_abs_eig(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.mat))))

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])

    def expectation(self, vec: np.ndarray) -> float:
        v = np.asarray(vec, dtype=np.complex128).ravel()
        return float(np.real(v.conj() @ self.mat @ v))


def pairing(a: HermitianOperator, b: HermitianOperator) -> float:
    """Hilbert-Schmidt pairing tr(a b); real for Hermitian operands."""
    a._check_dims(b)
    return float(np.real(np.sum(a.mat * b.mat.T)))


def identity(dims: Dims) -> HermitianOperator:
    dims = Dims(*dims)
    return HermitianOperator(dims, np.eye(dims.total, dtype=np.complex128))


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        vec = np.asarray(self.eigenvectors, dtype=np.complex128)
        ev.setflags(write=False)
        vec.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "eigenvectors", vec)


@dataclass(frozen=True)
class ProductVector:
    """Normalized local vectors (e, f) representing the product vector e (x) f."""

    e: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.complex128).ravel()
        f = np.asarray(self.f, dtype=np.complex128).ravel()
        ne, nf = np.linalg.norm(e), np.linalg.norm(f)
        if abs(ne - 1.0) > 1e-12 or abs(nf - 1.0) > 1e-12:
            if ne < 1e-15 or nf < 1e-15:
                raise InvalidArgumentError("cannot normalize a zero local vector")
            e, f = e / ne, f / nf
        e.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "f", f)

    @property
    def dims(self) -> Dims:
        return Dims(len(self.e), len(self.f))

    def kron(self) -> np.ndarray:
        return np.kron(self.e, self.f)

    def projector(self) -> HermitianOperator:
        v = self.kron()
        return HermitianOperator(self.dims, np.outer(v, v.conj()))


def projector_from_vector(dims: Dims, vec: np.ndarray) -> HermitianOperator:
    """Rank-1 projector onto `vec` (normalized)."""
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return HermitianOperator(dims, np.outer(v, v.conj()))


def partial_transpose(op: HermitianOperator) -> HermitianOperator:
    """Transpose the B-subsystem indices: blockwise (i,j) -> (j,i).

    Involutive, trace- and Hermiticity-preserving, linear.
    """
    da, db = op.dims
    m = op.mat.reshape(da, db, da, db)
    pt = m.transpose(0, 3, 2, 1).reshape(da * db, da * db)
    return HermitianOperator(op.dims, pt)


def spectrum(op: HermitianOperator) -> Spectrum:
    """Eigendecomposition with ascending eigenvalues."""
    ev, vec = np.linalg.eigh(op.mat)
    return Spectrum(ev, vec)


def _psd_spectrum(op: HermitianOperator, rank_tol: float) -> Spectrum:
    s = spectrum(op)
    lam_max = float(np.max(np.abs(s.eigenvalues))) if s.eigenvalues.size else 0.0
    if s.eigenvalues[0] < -rank_tol * max(lam_max, 1.0):
        raise NotPositiveError(
            f"operator has eigenvalue {s.eigenvalues[0]:.3e}; not PSD at rank_tol {rank_tol:g}"
        )
    return s


def range_projector(op: HermitianOperator, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """Orthogonal projector onto the span of eigenvectors above the rank cutoff."""
    s = _psd_spectrum(op, rank_tol)
    lam_max = float(np.max(s.eigenvalues))
    keep = s.eigenvalues > rank_tol * max(lam_max, 0.0)
    v = s.eigenvectors[:, keep]
    return HermitianOperator(op.dims, v @ v.conj().T)


def pseudo_inverse(op: HermitianOperator, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """Moore-Penrose inverse on the range of a PSD operator."""
    s = _psd_spectrum(op, rank_tol)
    lam_max = float(np.max(s.eigenvalues))
    keep = s.eigenvalues > rank_tol * max(lam_max, 0.0)
    v = s.eigenvectors[:, keep]
    inv = v @ np.diag(1.0 / s.eigenvalues[keep]) @ v.conj().T
    return HermitianOperator(op.dims, inv)


def operator_rank(op: HermitianOperator, rank_tol: float = RANK_TOL) -> int:
    ev = np.linalg.eigvalsh(op.mat)
    lam_max = float(np.max(np.abs(ev)))
    return int(np.sum(ev > rank_tol * max(lam_max, 0.0)))


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_hermitian(dims: Dims, seed: int, ensemble: str = "gue") -> HermitianOperator:
    """Seeded random operator.

    Ensembles: "gue" (Gaussian Hermitian), "state" (Hilbert-Schmidt density
    matrix G G†/tr), "product_state" (random product projector), "npt_state"
    (state resampled until its partial transpose has an eigenvalue < -1e-6).
    """
    dims = Dims(*dims).validate()
    rng = np.random.default_rng(seed)
    d = dims.total
    if ensemble == "gue":
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return HermitianOperator(dims, (g + g.conj().T) / 2.0)
    if ensemble == "state":
        return _random_state_mat(dims, rng)
    if ensemble == "product_state":
        e = random_unit_vector(dims.da, rng)
        f = random_unit_vector(dims.db, rng)
        return ProductVector(e, f).projector()
    if ensemble == "npt_state":
        for _ in range(_NPT_RETRY_BUDGET):
            rho = _random_state_mat(dims, rng)
            if np.linalg.eigvalsh(partial_transpose(rho).mat)[0] < -1e-6:
                return rho
        raise GenerationFailureError(
            f"no NPT state found at dims {dims} in {_NPT_RETRY_BUDGET} draws"
        )
    raise InvalidArgumentError(f"unknown ensemble {ensemble!r}")


def _random_state_mat(dims: Dims, rng: np.random.Generator) -> HermitianOperator:
    d = dims.total
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return HermitianOperator(dims, m / np.real(np.trace(m)))

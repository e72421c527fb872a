"""Shared oracle helpers, built from raw numpy so they stay independent of
the library paths they check."""

import numpy as np
import pytest

from whk.core import Dims, HermitianOperator

D22 = Dims(2, 2)
D33 = Dims(3, 3)


def ket(*indices, dims=(2, 2)):
    """Computational-basis product ket |i j ...> as a flat vector."""
    v = np.array([1.0], dtype=np.complex128)
    for idx, d in zip(indices, dims):
        e = np.zeros(d, dtype=np.complex128)
        e[idx] = 1.0
        v = np.kron(v, e)
    return v


# Bell-type vectors in C^2 x C^2
PSI_PLUS = (ket(0, 0) + ket(1, 1)) / np.sqrt(2)  # (|00>+|11>)/sqrt(2)
PHI_WITNESS = (ket(1, 0) - ket(0, 1)) / np.sqrt(2)  # (|10>-|01>)/sqrt(2)
PSI_SWAP = (ket(0, 1) + ket(1, 0)) / np.sqrt(2)  # (|01>+|10>)/sqrt(2)


def proj(v, dims=D22):
    return HermitianOperator(dims, np.outer(v, v.conj()))


def werner_mat(p):
    """p |psi><psi| + (1-p) I/4 with psi = (|00>+|11>)/sqrt(2), raw numpy."""
    return p * np.outer(PSI_PLUS, PSI_PLUS.conj()) + (1 - p) * np.eye(4) / 4.0


def werner_op(p):
    return HermitianOperator(D22, werner_mat(p))


def pt_b_oracle(m, da, db):
    """Reference partial transpose on B: explicit index loop."""
    out = np.zeros_like(m)
    for a in range(da):
        for ap in range(da):
            blk = m[a * db : (a + 1) * db, ap * db : (ap + 1) * db]
            out[a * db : (a + 1) * db, ap * db : (ap + 1) * db] = blk.T
    return out


def pt_a_oracle(m, da, db):
    """Partial transpose on A, for the side-independence spectra check."""
    out = np.zeros_like(m)
    for a in range(da):
        for ap in range(da):
            out[ap * db : (ap + 1) * db, a * db : (a + 1) * db] = m[
                a * db : (a + 1) * db, ap * db : (ap + 1) * db
            ]
    return out


def product_grid_min(mat, n_angles=24):
    """Dense grid over Bloch-type angles of <e,f|M|e,f> at 2x2.

    Brute-force oracle for block-positivity statements; independent of the
    see-saw implementation.
    """
    best = np.inf
    thetas = np.linspace(0, np.pi, n_angles)
    phis = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    vecs = []
    for th in thetas:
        for ph in phis:
            vecs.append(np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)]))
    for e in vecs:
        for f in vecs:
            ef = np.kron(e, f)
            val = np.real(ef.conj() @ mat @ ef)
            best = min(best, val)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

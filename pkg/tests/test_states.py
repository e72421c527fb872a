import numpy as np
import pytest

from whk.core import (
    Dims,
    HermitianOperator,
    ProductVector,
    identity,
    pairing,
    partial_transpose,
    random_hermitian,
    random_unit_vector,
)
from whk.errors import InvalidArgumentError, PreconditionError, StratumViolationError
from whk.seesaw import min_product_expectation, product_minima, refine_product_vector
from whk.states import (
    DecompositionCertificate,
    QuantumState,
    Witness,
    as_state,
    decompose_witness,
    detects,
    indecomposability_certificate,
    is_block_positive,
    is_ppt,
    is_separable,
    product_decomposition_search,
    pure_state,
    random_decomposable_witness,
)

from conftest import (
    D22,
    D33,
    PHI_WITNESS,
    PSI_PLUS,
    proj,
    product_grid_min,
    werner_op,
)


def canonical_witness():
    return partial_transpose(proj(PHI_WITNESS))


def random_product_mixture(dims, n_terms, rng):
    m = np.zeros((dims.total, dims.total), dtype=np.complex128)
    pieces = []
    for w in rng.dirichlet(np.ones(n_terms)):
        pv = ProductVector(
            random_unit_vector(dims.da, rng), random_unit_vector(dims.db, rng)
        )
        pieces.append((w, pv))
        m += w * pv.projector().mat
    return QuantumState(HermitianOperator(dims, m)), pieces


class TestSeesaw:
    def test_identity_min_is_one(self):
        rep = min_product_expectation(identity(D22), starts=16, seed=0)
        assert abs(rep.min_value - 1.0) < 1e-10

    def test_canonical_witness_product_floor_zero(self):
        # oracle: <e,f|W|e,f> = |<phi|e,f*>|^2 >= 0 with 0 attained;
        # cross-checked by the dense Bloch-angle grid
        w = canonical_witness()
        rep = min_product_expectation(w, starts=64, seed=1)
        assert abs(rep.min_value) < 1e-8
        assert product_grid_min(w.mat) > -1e-8

    def test_negative_projector(self):
        op = -1.0 * proj(np.array([1, 0, 0, 0], dtype=complex))
        rep = min_product_expectation(op, starts=32, seed=0)
        assert abs(rep.min_value + 1.0) < 1e-10
        assert abs(abs(rep.argmin.e[0]) - 1.0) < 1e-6
        assert abs(abs(rep.argmin.f[0]) - 1.0) < 1e-6

    def test_zero_starts_rejected(self):
        with pytest.raises(InvalidArgumentError):
            min_product_expectation(identity(D22), starts=0)
        with pytest.raises(InvalidArgumentError):
            product_minima(identity(D22), starts=0)

    def test_min_value_matches_argmin(self):
        for seed in range(5):
            op = random_hermitian(D22, seed=seed, ensemble="gue")
            rep = min_product_expectation(op, starts=16, seed=seed)
            ef = rep.argmin.kron()
            direct = float(np.real(ef.conj() @ op.mat @ ef))
            assert abs(rep.min_value - direct) < 1e-10

    def test_monotone_in_sweeps(self):
        # more sweeps can only lower the best value found from the same starts
        for seed in range(5):
            op = random_hermitian(Dims(2, 3), seed=seed, ensemble="gue")
            short = min_product_expectation(op, starts=8, seed=3, max_sweeps=2)
            long = min_product_expectation(op, starts=8, seed=3, max_sweeps=500)
            assert long.min_value <= short.min_value + 1e-12

    def test_refine_never_increases(self):
        op = random_hermitian(D33, seed=4, ensemble="gue")
        pv = ProductVector(
            random_unit_vector(3, np.random.default_rng(0)),
            random_unit_vector(3, np.random.default_rng(1)),
        )
        ef = pv.kron()
        start_val = float(np.real(ef.conj() @ op.mat @ ef))
        val, _ = refine_product_vector(op, pv)
        assert val <= start_val + 1e-12


class TestBlockPositive:
    def test_identity_yes(self):
        assert is_block_positive(identity(D22)) == "yes_evidence"

    def test_negative_identity_certified_no(self):
        assert is_block_positive(-1.0 * identity(D22)) == "no_certified"

    def test_pt_of_bell_projector_yes(self):
        w = partial_transpose(proj(PSI_PLUS))
        assert is_block_positive(w, seed=2) == "yes_evidence"
        assert product_grid_min(w.mat) > -1e-8


class TestWitnessType:
    def test_certify_canonical(self):
        w = Witness.certify(canonical_witness())
        assert w.min_product_expectation > -1e-9
        assert w.op.min_eig() < -0.4

    def test_psd_rejected(self):
        with pytest.raises(PreconditionError):
            Witness.certify(identity(D22))

    def test_not_block_positive_rejected(self):
        with pytest.raises(StratumViolationError):
            Witness.certify(-1.0 * identity(D22))


class TestDetects:
    def test_bell_partner_detected(self):
        w = Witness.certify(canonical_witness())
        det = detects(w, pure_state(D22, PSI_PLUS))
        assert det.detected and abs(det.value + 0.5) < 1e-12

    def test_maximally_mixed_not_detected(self):
        w = Witness.certify(canonical_witness())
        det = detects(w, as_state(identity(D22)))
        assert not det.detected and abs(det.value - 0.25) < 1e-12

    def test_product_states_never_detected(self, rng):
        w = Witness.certify(canonical_witness())
        for _ in range(50):
            pv = ProductVector(random_unit_vector(2, rng), random_unit_vector(2, rng))
            det = detects(w, QuantumState(pv.projector()))
            assert det.value >= -1e-9


class TestPPT:
    def test_maximally_mixed(self):
        assert is_ppt(as_state(identity(D22)))

    def test_bell_projector_npt(self):
        rho = pure_state(D22, PSI_PLUS)
        assert not is_ppt(rho)
        assert rho.ppt_flag == "npt"
        # oracle: PT eigenvalue -1/2
        assert abs(np.linalg.eigvalsh(partial_transpose(rho.op).mat)[0] + 0.5) < 1e-12

    def test_flag_cached(self):
        rho = as_state(identity(D22))
        is_ppt(rho)
        assert rho.ppt_flag == "ppt"


class TestSeparability:
    def test_maximally_mixed_separable(self):
        assert is_separable(as_state(identity(D22))) == "separable"

    def test_werner_entangled(self):
        assert is_separable(QuantumState(werner_op(0.5))) == "entangled"

    def test_exact_dims_agree_with_ppt(self):
        for seed in range(1000):
            rho = QuantumState(random_hermitian(D22, seed=seed, ensemble="state"))
            verdict = is_separable(rho)
            assert (verdict == "separable") == is_ppt(rho)
            assert verdict in ("separable", "entangled")

    def test_product_mixture_certificate(self, rng):
        sigma, _ = random_product_mixture(D22, 6, rng)
        cert = product_decomposition_search(sigma, seed=3)
        assert cert is not None and cert.residual <= 1e-7
        recon = cert.reconstruct(D22)
        assert np.linalg.norm(recon.mat - sigma.op.mat) <= 1e-7
        assert abs(sum(cert.weights) - 1.0) < 1e-6

    def test_certified_separable_never_detected(self, rng):
        # any state carrying an explicit product decomposition pairs
        # nonnegatively with every witness the suite constructs
        w = Witness.certify(canonical_witness())
        for k in range(20):
            sigma, _ = random_product_mixture(D22, 5, rng)
            cert = product_decomposition_search(sigma, seed=k)
            assert cert is not None
            assert not detects(w, sigma).detected

    def test_structured_3x3_separable(self, rng):
        ma = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        ma = ma @ ma.conj().T
        mb = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        mb = mb @ mb.conj().T
        m = np.kron(ma / np.real(np.trace(ma)), mb / np.real(np.trace(mb)))
        rho = QuantumState(HermitianOperator(D33, m))
        assert is_separable(rho, effort=160, seed=0) == "separable"
        assert rho.separable_certificate is not None
        assert rho.separable_certificate.residual <= 1e-7


class TestStateValidation:
    def test_trace_enforced(self):
        with pytest.raises(PreconditionError):
            QuantumState(identity(D22))

    def test_negativity_enforced(self):
        m = np.diag([0.7, 0.5, -0.2, 0.0]).astype(complex)
        with pytest.raises(PreconditionError):
            QuantumState(HermitianOperator(D22, m))

    def test_as_state_normalizes(self):
        rho = as_state(identity(D22))
        assert abs(rho.op.trace() - 1.0) < 1e-12


class TestDecomposeWitness:
    def test_canonical_exact(self):
        w = Witness.certify(canonical_witness())
        cert = decompose_witness(w)
        assert cert.verdict == "decomposable"
        assert cert.a == 0.0
        assert np.linalg.norm(cert.q.mat - proj(PHI_WITNESS).mat) < 1e-10
        assert cert.residual <= 1e-7

    def test_psd_input_precondition(self):
        fake = Witness(identity(D22), 1.0, None)
        with pytest.raises(PreconditionError):
            decompose_witness(fake)

    def test_random_2x2_witnesses_decomposable(self):
        # every 2x2 witness is decomposable; the projection loop must find it
        for seed in range(10):
            w = random_decomposable_witness(D22, seed=seed)
            cert = decompose_witness(w, seed=seed)
            assert cert.verdict == "decomposable"
            recon = cert.a * cert.p.mat + (1 - cert.a) * partial_transpose(cert.q).mat
            assert np.linalg.norm(w.op.mat - recon) <= 1e-7
            assert cert.p.min_eig() >= -1e-9 and cert.q.min_eig() >= -1e-9

    def test_shifted_witness_decomposes(self):
        # witness with both a PSD and a transposed part
        w_op = 0.4 * identity(D22) + 0.6 * (2.0 * canonical_witness())
        w = Witness.certify(w_op)
        cert = decompose_witness(w)
        assert cert.verdict == "decomposable"
        assert 0.0 <= cert.a <= 1.0


class TestIndecomposability:
    def test_canonical_has_no_certificate(self):
        w = Witness.certify(canonical_witness())
        assert indecomposability_certificate(w, seed=0) is None

    def test_decomposable_identity_on_ppt_states(self):
        # oracle for the empty certificate: tr(Q^G rho) = tr(Q rho^G) >= 0
        # for PPT rho, checked on 500 random PPT states
        w = canonical_witness()
        q = partial_transpose(w)
        count = 0
        seed = 0
        while count < 500:
            rho = QuantumState(random_hermitian(D22, seed=seed, ensemble="state"))
            seed += 1
            if not is_ppt(rho):
                continue
            count += 1
            lhs = pairing(w, rho.op)
            rhs = pairing(q, partial_transpose(rho.op))
            assert abs(lhs - rhs) < 1e-12
            assert lhs >= -1e-10


def test_random_decomposable_witness_contract():
    for seed in range(20):
        w = random_decomposable_witness(D22, seed=seed)
        assert w.op.min_eig() < -1e-9
        assert product_grid_min(w.op.mat, n_angles=12) > -1e-8

    target = QuantumState(werner_op(0.8))
    w = random_decomposable_witness(D22, seed=5, detect=target)
    assert detects(w, target).detected

import numpy as np
import pytest

from sscool import analytics, dynamics, model
from sscool.model import E, FockSpace, G, Tier
from sscool.numkit import ContractError
from sscool.params import IonParams

FIG2 = IonParams(gamma=0.1, omega=0.5, eta=0.1, n0=10).with_ssc_detuning()
SMALL = FIG2.replace(n0=0.5)


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def reference_rhs(tier, rho):
    h = tier.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for l in tier.jump_set.jumps:
        ld = l.conj().T
        out += l @ rho @ ld - 0.5 * (ld @ l @ rho + rho @ ld @ l)
    return out


class TestLiouvillian:

    @pytest.mark.parametrize("tag", list(Tier))
    def test_matches_reference(self, tag):
        tier = model.build_tier(tag, FIG2, FockSpace(10))
        rho = random_density(20, 1)
        ref = reference_rhs(tier, rho)
        gen = dynamics.Liouvillian(tier)
        assert np.abs(gen(rho) - ref).max() < 1e-12
        assert np.abs(gen(rho, hermitian=True) - ref).max() < 1e-12

    def test_non_hermitian_input(self):
        tier = model.build_tier("LAMB_DICKE", FIG2, FockSpace(5))
        rng = np.random.default_rng(0)
        x = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
        assert np.abs(dynamics.lindblad_rhs(x, tier) - reference_rhs(tier, x)).max() < 1e-12

    @pytest.mark.parametrize("tag", list(Tier))
    def test_trace_and_hermiticity(self, tag):
        tier = model.build_tier(tag, FIG2, FockSpace(12))
        out = dynamics.lindblad_rhs(random_density(24, 2), tier)
        assert abs(np.trace(out)) < 1e-13
        assert np.abs(out - out.conj().T).max() < 1e-13

    def test_drop_diagonal(self):
        tier = model.build_tier("EXACT", FIG2, FockSpace(6))
        rho = random_density(12, 4)
        hd = np.diag(np.diag(tier.hamiltonian))
        full = dynamics.Liouvillian(tier)(rho)
        rot = dynamics.Liouvillian(tier, drop_diagonal=True)(rho)
        assert np.abs(full - rot - (-1j) * (hd @ rho - rho @ hd)).max() < 1e-13

    def test_shape_check(self):
        tier = model.build_tier("LAMB_DICKE", FIG2, FockSpace(4))
        with pytest.raises(ContractError):
            dynamics.lindblad_rhs(np.eye(6), tier)


class TestObservables:

    def test_mean_phonon(self):
        sp = FockSpace(6)
        rho = 0.25 * np.outer(model.basis_state(sp, G, 2), model.basis_state(sp, G, 2))
        rho += 0.75 * np.outer(model.basis_state(sp, E, 4), model.basis_state(sp, E, 4))
        assert dynamics.mean_phonon(rho) == pytest.approx(3.5)
        assert dynamics.excited_population(rho) == pytest.approx(0.75)

    def test_mean_phonon_imaginary(self):
        m = np.zeros((4, 4), dtype=complex)
        m[1, 1] = 1j
        with pytest.raises(ContractError):
            dynamics.mean_phonon(m)

    def test_subspace_populations(self):
        sp = FockSpace(5)
        db = analytics.dressed_basis(FIG2.delta, FIG2.omega)
        v = np.kron(db.plus_vec, np.eye(5)[2])  # |+, 2> lies in M_3
        pops = dynamics.dressed_subspace_populations(np.outer(v, v), FIG2)
        assert pops.size == 6 and pops[3] == pytest.approx(1.0, abs=1e-15)
        assert np.delete(pops, 3).max() < 1e-15

    def test_subspace_sum_is_trace(self):
        pops = dynamics.dressed_subspace_populations(random_density(16, 7), FIG2)
        assert pops.sum() == pytest.approx(1.0, abs=1e-14)

    def test_subspaces_need_resonance(self):
        with pytest.raises(ContractError):
            dynamics.dressed_subspace_populations(np.eye(8) / 8, FIG2.replace(delta=-0.3))


class TestEvolve:

    def test_frames_agree(self):
        sp = FockSpace(10)
        tier = model.build_tier("EXACT", SMALL, sp)
        rho0 = model.thermal_initial_state(SMALL, sp, max_tail=1e-3)
        a = dynamics.evolve(rho0, tier, 20.0, 11, frame="lab", rel_tol=1e-10, abs_tol=1e-12)
        b = dynamics.evolve(rho0, tier, 20.0, 11, frame="rotating", rel_tol=1e-10, abs_tol=1e-12)
        assert np.abs(a.nbar - b.nbar).max() < 1e-8
        assert np.abs(a.final_state - b.final_state).max() < 1e-8

    def test_conservation(self):
        sp = FockSpace(10)
        tier = model.build_tier("LAMB_DICKE", SMALL, sp)
        rho0 = model.thermal_initial_state(SMALL, sp, max_tail=1e-3)
        traj = dynamics.evolve(rho0, tier, 50.0, 26, frame="rotating", audit_points=5)
        assert traj.max_trace_drift < 1e-8
        assert traj.hermiticity_drift < 1e-8
        assert len(traj.min_eigenvalues) == 5 and traj.min_audit_eigenvalue > -1e-8
        assert traj.nbar[0] == pytest.approx(dynamics.mean_phonon(rho0.matrix))
        assert traj.nbar[-1] < traj.nbar[0]

    def test_rwa_tracks_subspaces(self):
        sp = FockSpace(10)
        tier = model.build_tier("RWA_DRESSED", SMALL, sp)
        rho0 = model.thermal_initial_state(SMALL, sp, max_tail=1e-3)
        traj = dynamics.evolve(rho0, tier, 10.0, 6)
        assert traj.subspace_pops.shape == (6, 11)
        np.testing.assert_allclose(traj.subspace_pops.sum(axis=1), 1.0, atol=1e-9)

    def test_stationary_ground_state_without_drive(self):
        p = SMALL.replace(omega=0.0, delta=-1.0)
        sp = FockSpace(4)
        tier = model.build_tier("EXACT", p, sp)
        rho0 = model.pure_state(model.basis_state(sp, G, 0))
        traj = dynamics.evolve(rho0, tier, 30.0, 4, frame="rotating")
        assert np.abs(traj.final_state - rho0.matrix).max() < 1e-12

    def test_rejects_bad_input(self):
        sp = FockSpace(4)
        tier = model.build_tier("LAMB_DICKE", SMALL, sp)
        rho0 = model.thermal_initial_state(SMALL, sp, max_tail=0.5)
        with pytest.raises(ContractError):
            dynamics.evolve(rho0, tier, -1.0)
        with pytest.raises(ContractError):
            dynamics.evolve(rho0, tier, 1.0, 1)
        with pytest.raises(ContractError):
            dynamics.evolve(np.eye(4) / 4, tier, 1.0)
        with pytest.raises(ContractError):
            dynamics.evolve(rho0, tier, 1.0, frame="sideways")


class TestSpecExamples:

    def test_zero_generator(self):
        sp = FockSpace(3)
        zero = np.zeros((6, 6), dtype=complex)
        tier = model.ModelTier(Tier.LAMB_DICKE, zero, model.JumpSet([zero]), SMALL, sp)
        assert np.abs(dynamics.lindblad_rhs(random_density(6, 0), tier)).max() == 0

    @pytest.mark.parametrize("tag", ["EXACT", "LAMB_DICKE"])
    def test_two_level_decay_rate(self, tag):
        p = SMALL.replace(omega=0.0, delta=-1.0)
        sp = FockSpace(8)
        v = model.basis_state(sp, E, 0)
        d = dynamics.lindblad_rhs(np.outer(v, v), model.build_tier(tag, p, sp))
        assert dynamics.excited_population(d) == pytest.approx(-p.gamma, abs=1e-14)

    def test_excited_decay_curve(self):
        p = SMALL.replace(omega=0.0, delta=-1.0)
        sp = FockSpace(6)
        rho0 = model.pure_state(model.basis_state(sp, E, 0))
        traj = dynamics.evolve(rho0, model.build_tier("EXACT", p, sp), 40.0, 21)
        assert np.abs(traj.p_excited - np.exp(-p.gamma * traj.times)).max() <= 1e-6

    def test_phonons_conserved_without_drive(self):
        p = SMALL.replace(omega=0.0, delta=-1.0, n0=2.0)
        sp = FockSpace(40)
        traj = dynamics.evolve(model.thermal_initial_state(p, sp), model.build_tier("LAMB_DICKE", p, sp),
                               100.0, 11)
        assert np.ptp(traj.nbar) <= 1e-9

    def test_mean_phonon_examples(self):
        sp = FockSpace(70)
        vac = model.basis_state(sp, G, 0)
        seven = model.basis_state(sp, G, 7)
        assert dynamics.mean_phonon(np.outer(vac, vac)) == 0
        assert dynamics.mean_phonon(np.outer(seven, seven)) == pytest.approx(7, abs=1e-15)
        x, n = 10 / 11, 70
        truncated = x / (1 - x) - n * x ** n / (1 - x ** n)  # geometric series on 0..n-1
        rho = model.thermal_initial_state(FIG2, sp)
        assert dynamics.mean_phonon(rho) == pytest.approx(truncated, rel=1e-12)

    def test_subspace_examples(self):
        sp = FockSpace(8)
        db = analytics.dressed_basis(FIG2.delta, FIG2.omega)
        minus0 = np.kron(db.minus_vec, np.eye(8)[0])
        pops = dynamics.dressed_subspace_populations(np.outer(minus0, minus0), FIG2)
        assert pops[0] == pytest.approx(1, abs=1e-15) and np.abs(pops[1:]).max() < 1e-15
        # eigenvectors of the resonant sideband coupling inside M_3
        h = model.hamiltonian_rwa(FIG2, sp)
        plus2, minus3 = np.kron(db.plus_vec, np.eye(8)[2]), np.kron(db.minus_vec, np.eye(8)[3])
        basis = np.column_stack([plus2, minus3])
        _, vecs = np.linalg.eigh(basis.T @ h @ basis)
        d_plus = basis @ vecs[:, 1]
        pops = dynamics.dressed_subspace_populations(np.outer(d_plus, d_plus.conj()), FIG2)
        assert pops[3] == pytest.approx(1, abs=1e-14)

    def test_thermal_projection(self):
        p = FIG2.replace(n0=1.5)
        sp = FockSpace(40)
        rho = model.thermal_initial_state(p, sp, max_tail=1e-3)
        weights = np.real(np.diagonal(rho.matrix)[:40])
        db = analytics.dressed_basis(p.delta, p.omega)
        c2, s2 = db.plus_vec[0] ** 2, db.minus_vec[0] ** 2  # <+|g>^2, <-|g>^2
        expected = np.zeros(41)
        expected[:40] += s2 * weights
        expected[1:] += c2 * weights
        pops = dynamics.dressed_subspace_populations(rho.matrix, p)
        assert np.abs(pops - expected).max() < 1e-15


@pytest.mark.slow
class TestFigureScaleInvariants:
    """Fig-2-scale runs (cutoff 70); a few minutes on one core."""

    def test_monotone_cooling(self):
        sp = FockSpace(70)
        traj = dynamics.evolve(model.thermal_initial_state(FIG2, sp),
                               model.build_tier("EXACT", FIG2, sp), 2000.0, 401)
        late = traj.nbar[traj.times > 50]
        running_min = np.minimum.accumulate(late)
        assert np.all(late <= running_min + 1e-3)
        assert traj.max_trace_drift <= 1e-7 and traj.hermiticity_drift <= 1e-8

    def test_lamb_dicke_consistency(self):
        # LD drops O(eta^2) recoil heating, so the gap grows linearly in t
        p = IonParams(gamma=0.1, omega=0.1, eta=0.05, n0=10).with_ssc_detuning()
        sp = FockSpace(70)
        rho0 = model.thermal_initial_state(p, sp)
        curves = [dynamics.evolve(rho0, model.build_tier(tag, p, sp), 2000.0, 201).nbar
                  for tag in ("EXACT", "LAMB_DICKE")]
        assert np.abs(curves[0] - curves[1]).max() <= 5e-3 * p.n0

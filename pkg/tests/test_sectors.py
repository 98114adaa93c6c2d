import pytest
import numpy as np

from sykchaosanalysis.HamiltonianFactory import HamiltonianFactory, ModelSpec
from sykchaosanalysis.utils.errors import AlgebraError, CoverageError, NumericalError
from sykchaosanalysis.utils.operators import DenseOperator, PauliString, build_dense
from sykchaosanalysis.utils.sectors import (
    SectorPolicy,
    SectorSpectrum,
    apply_policy,
    collapse_degenerate_pairs,
    make_charge,
    project_sector,
    resolve_sectors,
    restrict_operator,
    sector_basis,
)

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])


def overlapping_dense(N, sample_id=0, seed=0):
    spec = ModelSpec("overlapping_clusters_syk", N=N, M=2, seed=seed)
    return HamiltonianFactory(spec).build(sample_id).to_dense()


@pytest.fixture
def window_basis():
    return sector_basis([(make_charge("parity", 6), 1)], 3)


def test_parity_charge():
    charge = make_charge("parity", 8)
    assert charge.string.label == "ZZZZ"
    assert charge.is_diagonal
    assert charge.real_symmetric
    assert np.array_equal(charge.value_on_basis(np.array([0, 1, 3, 15])), [1, -1, 1, 1])


def test_particle_hole_charge():
    charge = make_charge("particle_hole", 16)
    assert charge.label == "P"
    assert charge.string.label == "YXYXYXYX"
    assert charge.commutes_with_parity
    assert charge.real_symmetric
    assert not make_charge("particle_hole", 12).real_symmetric


def test_cluster_parity_charge():
    charge = make_charge("cluster_parity", 12, cluster=2, cluster_size=6)
    assert charge.string.label == "IIIZZZ"
    with pytest.raises(IndexError):
        make_charge("cluster_parity", 12, cluster=3, cluster_size=6)


@pytest.mark.parametrize(
    "N, commutes, real",
    [(8, True, True), (10, False, False), (12, True, False), (14, False, True), (16, True, True)],
)
def test_particle_hole_algebra_by_residue(N, commutes, real):
    charge = make_charge("particle_hole", N)
    assert charge.commutes_with_parity == commutes
    assert charge.real_symmetric == real
    p_matrix = build_dense(charge.string).matrix
    parity_matrix = build_dense(make_charge("parity", N).string).matrix
    sign = 1.0 if commutes else -1.0
    assert np.max(np.abs(p_matrix @ parity_matrix - sign * parity_matrix @ p_matrix)) < 1e-12


def test_charge_flags_are_verified(mocker):
    mocker.patch.object(PauliString, "commutes_with", return_value=False)
    with pytest.raises(AlgebraError):
        make_charge("parity", 8)


def test_resolve_sectors_warns_on_zero_modes():
    dense = DenseOperator(np.diag([-1.0, 0.0, 2.0]), True, True)
    with pytest.warns(UserWarning, match="1 zero modes"):
        spectra = resolve_sectors(dense, SectorPolicy("none"), verbose=0)
    assert spectra[0].n_zero_modes == 1


def test_even_window_basis(window_basis):
    assert window_basis.vectors is None
    assert list(window_basis.indices) == [0b000, 0b011, 0b101, 0b110]


@pytest.mark.parametrize(
    "label, expected",
    [
        ("XXI", np.kron(X, X)),
        ("IXX", np.kron(I2, X)),
        ("XZX", np.kron(X, Z)),
        ("IYY", -np.kron(Z, X)),
        ("YZY", -np.kron(X, I2)),
    ],
)
def test_even_window_reduction(window_basis, label, expected):
    full = build_dense(PauliString.from_label(label)).matrix
    assert np.allclose(restrict_operator(full, window_basis), expected)


def test_sector_basis_with_off_diagonal_charge():
    charges = [(make_charge("parity", 16), 1), (make_charge("particle_hole", 16), -1)]
    basis = sector_basis(charges, 8)
    assert basis.dim == 64
    assert np.allclose(basis.vectors.conj().T @ basis.vectors, np.eye(64))


def test_non_commuting_charges():
    hamiltonian = np.eye(2)
    charges = [(make_charge("parity", 2), 1), (make_charge("particle_hole", 2), 1)]
    with pytest.raises(AlgebraError):
        project_sector(hamiltonian, charges)


def test_charge_not_conserved():
    hamiltonian = build_dense(PauliString.from_label("XI"))
    with pytest.raises(AlgebraError):
        project_sector(hamiltonian, [(make_charge("parity", 4), 1)])


def test_parity_sectors_partition_spectrum():
    dense = overlapping_dense(10, sample_id=3)
    parity = make_charge("parity", 10)
    even = project_sector(dense, [(parity, 1)])
    odd = project_sector(dense, [(parity, -1)])
    full = np.sort(np.linalg.eigvalsh(dense.matrix))
    assert np.allclose(np.sort(np.concatenate([even.eigenvalues, odd.eigenvalues])), full)


def test_n10_parity_sectors_match():
    dense = overlapping_dense(10)
    parity = make_charge("parity", 10)
    even = project_sector(dense, [(parity, 1)]).eigenvalues
    odd = project_sector(dense, [(parity, -1)]).eigenvalues
    width = even[-1] - even[0]
    assert np.max(np.abs(even - odd)) < 1e-10 * width


def test_n12_sectors_are_doubly_degenerate():
    dense = overlapping_dense(12, sample_id=1)
    parity = make_charge("parity", 12)
    for value in (1, -1):
        levels = project_sector(dense, [(parity, value)]).eigenvalues
        assert levels.size == 32
        assert collapse_degenerate_pairs(levels).size == 16


def test_n16_four_sectors():
    dense = overlapping_dense(16, sample_id=2)
    parity = make_charge("parity", 16)
    p_charge = make_charge("particle_hole", 16)
    p_matrix = build_dense(p_charge.string).matrix
    parity_matrix = build_dense(parity.string).matrix
    assert np.max(np.abs(p_matrix @ dense.matrix - dense.matrix @ p_matrix)) < 1e-12
    assert np.allclose(p_matrix @ parity_matrix, parity_matrix @ p_matrix)
    spectra = [
        project_sector(dense, [(parity, a), (p_charge, b)]) for a in (1, -1) for b in (1, -1)
    ]
    assert [s.dim for s in spectra] == [64, 64, 64, 64]
    pooled = np.sort(np.concatenate([s.eigenvalues for s in spectra]))
    assert np.allclose(pooled, np.sort(np.linalg.eigvalsh(dense.matrix)))


def test_collapse_rejects_unpaired_levels():
    with pytest.raises(NumericalError):
        collapse_degenerate_pairs(np.array([0.0, 0.0, 1.0]))


def test_policy_coverage():
    odd_only = [SectorSpectrum({"parity": -1}, np.array([0.0, 1.0]))]
    with pytest.raises(CoverageError):
        apply_policy(odd_only, 10)
    with pytest.raises(CoverageError):
        apply_policy(odd_only, 12)
    partial = [SectorSpectrum({"parity": 1, "P": 1}, np.zeros(2))]
    with pytest.raises(CoverageError):
        apply_policy(partial, 16)


@pytest.mark.parametrize(
    "spec, kind, expected, labels",
    [
        (ModelSpec("qudit_syk", d=3, L=4, q=2), "none", "GUE", ["full"]),
        (ModelSpec("qudit_syk", d=2, L=3, q=2), "kramers", "GSE", ["full"]),
        (ModelSpec("qudit_syk", d=2, L=4, q=2), "none", "GOE", ["full"]),
        (ModelSpec("clusters_spin_syk", L=3), "none", "GOE", ["full"]),
        (ModelSpec("overlapping_clusters_syk", N=12, M=2), "fermion_parity_real", "GUE", ["parity=+1", "parity=-1"]),
        (ModelSpec("overlapping_clusters_syk", N=14, M=2), "fermion_parity_real", "GOE", ["parity=+1"]),
        (
            ModelSpec("overlapping_clusters_syk", N=16, M=2),
            "fermion_parity_real",
            "GOE",
            ["parity=+1,P=+1", "parity=+1,P=-1", "parity=-1,P=+1", "parity=-1,P=-1"],
        ),
        (ModelSpec("original_syk", N=12), "fermion_parity_syk", "GSE", ["parity=+1", "parity=-1"]),
        (ModelSpec("original_syk", N=10), "fermion_parity_syk", "GUE", ["parity=+1"]),
        (ModelSpec("overlapping_clusters_syk", N=12, M=3, q_tilde=3), "fermion_parity", None, ["parity=+1", "parity=-1"]),
        (ModelSpec("gauged_clusters_syk", L=2, M=4), "cluster_parity", None, ["cluster_1=+1,cluster_2=+1"]),
    ],
)
def test_policy_for_spec(spec, kind, expected, labels):
    policy = SectorPolicy.for_spec(spec)
    assert policy.kind == kind
    assert policy.expected_class == expected
    assert policy.sector_labels == labels


def test_all_cluster_sectors():
    policy = SectorPolicy.for_spec(ModelSpec("gauged_clusters_syk", L=2, M=4), all_cluster_sectors=True)
    assert len(policy.sector_labels) == 4


def test_resolve_n12():
    dense = overlapping_dense(12)
    spectra = resolve_sectors(dense, SectorPolicy.for_spec(ModelSpec("overlapping_clusters_syk", N=12, M=2)))
    assert [s.dim for s in spectra] == [16, 16]
    assert all(s.degeneracy == 2 and s.policy_applied == "dedoubled_N4" for s in spectra)


def test_resolve_n14_keeps_even_sector():
    dense = overlapping_dense(14)
    spectra = resolve_sectors(dense, SectorPolicy.for_spec(ModelSpec("overlapping_clusters_syk", N=14, M=2)))
    assert len(spectra) == 1
    assert spectra[0].label == "parity=+1"
    assert spectra[0].dim == 64
    assert spectra[0].degeneracy == 2


def test_resolve_kramers_pairs():
    spec = ModelSpec("qudit_syk", d=2, L=3, q=2)
    dense = HamiltonianFactory(spec).build(0).to_dense()
    spectra = resolve_sectors(dense, SectorPolicy.for_spec(spec))
    assert spectra[0].dim == 4
    assert spectra[0].degeneracy == 2


def test_resolve_gauged_cluster_sector():
    spec = ModelSpec("gauged_clusters_syk", L=2, M=4)
    dense = HamiltonianFactory(spec).build(0).to_dense()
    spectra = resolve_sectors(dense, SectorPolicy.for_spec(spec, all_cluster_sectors=True))
    assert [s.dim for s in spectra] == [4, 4, 4, 4]
    pooled = np.sort(np.concatenate([s.eigenvalues for s in spectra]))
    assert np.allclose(pooled, np.sort(np.linalg.eigvalsh(dense.matrix)))

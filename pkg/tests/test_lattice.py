import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhssh.lattice import (
    Boundary,
    ModelError,
    ModelSpec,
    NonreciprocalForm,
    Variant,
    build_hamiltonian,
    chiral_operator,
    clean_realization,
    gainloss_rotation,
    sample_disorder,
    similarity_transform,
    verify_symmetry,
    working_frame,
)
from nhssh.spectral import decompose


def clean(spec):
    return build_hamiltonian(spec, clean_realization(spec)).entries


def test_dimerized_open_chain_has_only_intercell_bonds():
    spec = ModelSpec(t=0.0, t_prime=1.0, n_cells=3)
    h = clean(spec)
    expected = np.zeros((6, 6))
    for j in range(2):
        expected[2 * j + 2, 2 * j + 1] = 1.0
        expected[2 * j + 1, 2 * j + 2] = 1.0
    np.testing.assert_array_equal(h, expected)


def test_nonreciprocal_entries():
    spec = ModelSpec(t=1.0, t_prime=0.7, gamma=0.5, n_cells=4)
    h = clean(spec)
    assert h[0, 1] == h[1, 0] == 1.0
    # right hopping b_j -> a_{j+1} carries t'(1 + gamma)
    assert h[2, 1] == pytest.approx(0.7 * 1.5)
    assert h[1, 2] == pytest.approx(0.7)


def test_quadratic_form():
    spec = ModelSpec(t_prime=1.0, gamma=2.0, nonreciprocal_form=NonreciprocalForm.QUADRATIC, n_cells=3)
    assert spec.nonreciprocal_shift() == pytest.approx(3.0)
    assert clean(spec)[2, 1] == pytest.approx(4.0)


def test_periodic_differs_only_in_wrap_bond():
    spec = ModelSpec(gamma=0.4, W1=1.0, W2=0.5, n_cells=6)
    real = sample_disorder(spec, 3)
    h_open = build_hamiltonian(spec, real).entries
    h_pbc = build_hamiltonian(spec.with_(boundary=Boundary.PERIODIC), real).entries
    diff = np.argwhere(h_open != h_pbc)
    assert {tuple(x) for x in diff} == {(0, 11), (11, 0)}


def test_modified_chain_adds_long_bond():
    spec = ModelSpec(variant=Variant.MODIFIED, t_double_prime=0.3, n_cells=3)
    h = clean(spec)
    assert h[0, 3] == h[3, 0] == 0.3


def test_random_gamma_uses_per_cell_gamma():
    spec = ModelSpec(variant=Variant.RANDOM_GAMMA, sigma_gamma=1.0, t_prime=0.7, n_cells=5)
    real = sample_disorder(spec, 9)
    h = build_hamiltonian(spec, real).entries
    np.testing.assert_allclose([h[2 * j + 2, 2 * j + 1] for j in range(4)], 0.7 + real.gamma_j[:4])


def test_gain_loss_onsite_terms():
    spec = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=0.8, n_cells=3)
    h = clean(spec)
    assert h[0, 0] == 0.4j and h[1, 1] == -0.4j


def test_sampling_is_reproducible():
    spec = ModelSpec(W1=1.0, n_cells=10)
    a, b = sample_disorder(spec, 42), sample_disorder(spec, 42)
    np.testing.assert_array_equal(a.omega, b.omega)
    assert not np.array_equal(a.omega, sample_disorder(spec, 43).omega)
    assert np.all(np.abs(a.omega) <= 1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t_prime": float("nan")},
        {"W1": -1.0},
        {"n_cells": 1},
        {"n_cells": 2.5},
        {"variant": "bogus"},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ModelError):
        ModelSpec(**kwargs)


def test_similarity_rejects_bad_gamma_and_periodic():
    spec = ModelSpec(gamma=0.5, n_cells=4)
    h = build_hamiltonian(spec, clean_realization(spec))
    with pytest.raises(ModelError):
        similarity_transform(h, -1.0)
    hp = build_hamiltonian(spec.with_(boundary=Boundary.PERIODIC), clean_realization(spec))
    with pytest.raises(ModelError):
        similarity_transform(hp, 0.5)


def test_gainloss_rotation_gives_nonreciprocal_intracell():
    spec = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=0.6, n_cells=4)
    r = gainloss_rotation(build_hamiltonian(spec, clean_realization(spec))).entries
    assert sorted([r[0, 1].real, r[1, 0].real]) == pytest.approx([0.7, 1.3])
    assert np.allclose(np.diag(r), 0)


def test_working_frame_preserves_spectrum():
    spec = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=0.5, W1=0.5, n_cells=8)
    h = build_hamiltonian(spec, sample_disorder(spec, 1))
    frame = working_frame(spec, h)
    a = np.sort_complex(np.linalg.eigvals(h.entries))
    b = np.sort_complex(np.linalg.eigvals(frame.hamiltonian.entries))
    np.testing.assert_allclose(a, b, atol=1e-10)
    assert verify_symmetry(frame.hamiltonian, frame.chiral) < 1e-12


@settings(max_examples=40, deadline=None)
@given(
    variant=st.sampled_from(list(Variant)),
    boundary=st.sampled_from(list(Boundary)),
    gamma=st.floats(-0.9, 3.0),
    w1=st.floats(0, 5),
    w2=st.floats(0, 2),
    n_cells=st.integers(2, 12),
    seed=st.integers(0, 2**32),
)
def test_chiral_symmetry_property(variant, boundary, gamma, w1, w2, n_cells, seed):
    spec = ModelSpec(variant=variant, boundary=boundary, gamma=gamma, W1=w1, W2=w2, n_cells=n_cells,
                     sigma_gamma=1.0, Gamma=0.7, t_double_prime=0.2)
    h = build_hamiltonian(spec, sample_disorder(spec, seed))
    assert verify_symmetry(h, chiral_operator(spec)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(gamma=st.floats(0.01, 3.0), w1=st.floats(0, 3), seed=st.integers(0, 2**32))
def test_similarity_property(gamma, w1, seed):
    spec = ModelSpec(gamma=gamma, W1=w1, n_cells=15)
    h = build_hamiltonian(spec, sample_disorder(spec, seed))
    ht = similarity_transform(h, gamma).entries
    assert np.max(np.abs(ht - ht.conj().T)) < 1e-10
    np.testing.assert_allclose(decompose(h).eigenvalues, np.linalg.eigvalsh(ht), atol=1e-8)


def test_pt_symmetry_of_gain_loss():
    spec = ModelSpec(variant=Variant.GAIN_LOSS, Gamma=1.1, W1=1.0, W2=0.4, n_cells=10)
    h = build_hamiltonian(spec, sample_disorder(spec, 4))
    assert verify_symmetry(h, chiral_operator(spec), "pt") < 1e-12
    with pytest.raises(ModelError):
        verify_symmetry(build_hamiltonian(ModelSpec(n_cells=10), clean_realization(ModelSpec(n_cells=10))),
                        chiral_operator(ModelSpec(n_cells=10)), "pt")

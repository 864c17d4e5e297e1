import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndqv import linalg, states

pauli_words = st.tuples(
    st.sampled_from("+-"),
    st.text(alphabet="IXYZ", min_size=1, max_size=4),
).map(lambda t: t[0] + t[1])


def test_canonical_phase():
    v = np.array([0.0, 1j, 1.0]) / math.sqrt(2.0)
    out = states.canonical_phase(v)
    assert out[1].real > 0 and abs(out[1].imag) < 1e-15
    again = states.canonical_phase(np.exp(2.1j) * out)
    assert linalg.max_abs(again - out) < 1e-12


def test_canonical_phase_zero_vector():
    with pytest.raises(ValueError):
        states.canonical_phase(np.zeros(4))


def test_target_state_validation():
    with pytest.raises(ValueError):
        states.TargetState(label="bad", n_qubits=2, vector=np.ones(4))
    with pytest.raises(ValueError):
        states.TargetState(label="bad", n_qubits=3, vector=np.ones(4) / 2.0)


def test_bell_state():
    bell = states.bell_state()
    assert bell.dim == 4
    expected = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    assert linalg.max_abs(bell.vector - expected) < 1e-15
    assert linalg.is_projector(bell.projector())


def test_two_qubit_pure_domain():
    for bad in (0.0, math.pi / 4, -0.1, 1.0):
        with pytest.raises(ValueError):
            states.two_qubit_pure(bad)
    v = states.two_qubit_pure(0.3).vector
    assert abs(v[0] - math.sin(0.3)) < 1e-15
    assert abs(v[3] - math.cos(0.3)) < 1e-15


def test_ghz_domain():
    for bad in (1, 11):
        with pytest.raises(ValueError):
            states.ghz(bad)
    g = states.ghz(4)
    assert abs(g.vector[0] - 1 / math.sqrt(2)) < 1e-15
    assert abs(g.vector[-1] - 1 / math.sqrt(2)) < 1e-15


def test_parse_pauli_string_errors():
    with pytest.raises(ValueError):
        states.parse_pauli_string("")
    with pytest.raises(ValueError):
        states.parse_pauli_string("+")
    with pytest.raises(ValueError, match="position 2"):
        states.parse_pauli_string("+XQZ")
    assert states.parse_pauli_string("-YY") == (-1, "YY")
    assert states.parse_pauli_string("XZ") == (1, "XZ")


@settings(max_examples=40, deadline=None)
@given(pauli_words, pauli_words)
def test_pauli_product_matches_dense(a, b):
    body_a = a.lstrip("+-")
    body_b = b.lstrip("+-")
    if len(body_a) != len(body_b):
        with pytest.raises(ValueError):
            states.pauli_product(a, b)
        return
    phase, word = states.pauli_product(a, b)
    dense = states.pauli_operator(a) @ states.pauli_operator(b)
    rebuilt = phase * states.pauli_operator("+" + word)
    assert linalg.max_abs(dense - rebuilt) < 1e-12


def test_stabilizer_spec_rejections():
    with pytest.raises(ValueError, match="commute"):
        states.StabilizerGroupSpec(("+XI", "+ZI"))
    with pytest.raises(ValueError, match="independent"):
        states.StabilizerGroupSpec(("+ZZ", "-ZZ"))
    with pytest.raises(ValueError, match="exactly"):
        states.StabilizerGroupSpec(("+ZZ",))
    with pytest.raises(ValueError):
        states.StabilizerGroupSpec(("+Z", "+ZZ"))


def test_stabilizer_group_elements():
    spec = states.StabilizerGroupSpec(("+ZZ", "+XX"))
    elements = spec.elements()
    assert elements[0] == "+II"
    assert set(elements) == {"+II", "+ZZ", "+XX", "-YY"}


def test_stabilizer_state_bell():
    spec = states.StabilizerGroupSpec(("+ZZ", "+XX"))
    synth = states.stabilizer_state(spec)
    assert linalg.max_abs(synth.vector - states.bell_state().vector) < 1e-12


def test_stabilizer_state_eigenrelations():
    spec = states.StabilizerGroupSpec(("+XXX", "+ZIZ", "+ZZI"))
    target = states.stabilizer_state(spec)
    for word in spec.generators:
        op = states.pauli_operator(word)
        assert linalg.max_abs(op @ target.vector - target.vector) < 1e-12


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        states.NoiseSpec(kind="gamma", epsilon=0.1)
    with pytest.raises(ValueError):
        states.NoiseSpec(kind="depolarizing", epsilon=1.0)
    with pytest.raises(ValueError, match="seed"):
        states.NoiseSpec(kind="random_orthogonal", epsilon=0.1)
    states.NoiseSpec(kind="random_orthogonal", epsilon=0.0)  # seedless ok at zero


def test_perturbed_state_overlap():
    target = states.bell_state()
    noise = states.NoiseSpec(kind="worst_case_orthogonal", epsilon=0.3)
    v = states.perturbed_state(target, noise)
    assert abs(states.fidelity(v, target) - 0.7) < 1e-12
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12

    seeded = states.NoiseSpec(kind="random_orthogonal", epsilon=0.3, seed=9)
    w = states.perturbed_state(target, seeded)
    assert abs(states.fidelity(w, target) - 0.7) < 1e-12
    again = states.perturbed_state(target, seeded)
    assert np.array_equal(w, again)


def test_perturbed_state_rejects_depolarizing():
    target = states.bell_state()
    with pytest.raises(ValueError):
        states.perturbed_state(
            target, states.NoiseSpec(kind="depolarizing", epsilon=0.1)
        )


def test_perturbed_state_rejects_bad_witness():
    target = states.bell_state()
    noise = states.NoiseSpec(kind="worst_case_orthogonal", epsilon=0.3)
    with pytest.raises(ValueError, match="orthogonal"):
        states.perturbed_state(target, noise, witness=target.vector)


def test_depolarized_density():
    target = states.bell_state()
    rho = states.depolarized_density(target, 0.2)
    assert linalg.is_density_matrix(rho)
    assert abs(states.fidelity(rho, target) - (0.8 + 0.2 / 4.0)) < 1e-12


def test_source_density_dispatch():
    target = states.bell_state()
    pure = states.source_density(
        target, states.NoiseSpec(kind="worst_case_orthogonal", epsilon=0.0)
    )
    assert linalg.max_abs(pure - target.projector()) < 1e-12
    mixed = states.source_density(
        target, states.NoiseSpec(kind="depolarizing", epsilon=0.2)
    )
    assert linalg.max_abs(mixed - states.depolarized_density(target, 0.2)) < 1e-12


def test_first_orthogonal_complement():
    target = states.bell_state()
    w = states.first_orthogonal_complement(target)
    assert abs(np.vdot(target.vector, w)) < 1e-12
    assert abs(np.linalg.norm(w) - 1.0) < 1e-12

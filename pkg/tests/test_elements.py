"""Optical element factories: conventions, unitarity, projections."""

import numpy as np
import pytest

from ghz3d.elements import (
    ElementSpec,
    NotUnitary,
    Projector1,
    SorterConvention,
    beam_splitter,
    build_element,
    local_unitary,
    mirror,
    parity_sorter,
    project,
    relabel,
    spp_reflect,
)
from ghz3d.states import ModeLabel, PhotonicState, apply, compose

OMEGA = np.exp(2j * np.pi / 3)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: mirror("A"),
        lambda: spp_reflect("A"),
        lambda: beam_splitter("A", "B"),
        lambda: parity_sorter("B", "C"),
        lambda: parity_sorter("B", "C", SorterConvention(odd_swaps=False)),
        lambda: parity_sorter("B", "C", SorterConvention(swap_phase=-1.0)),
        lambda: local_unitary("A", np.eye(3), (0, 1, -1)),
        lambda: relabel("B", {2: (0, 1.0), 3: (1, 1.0), -1: (2, 1.0)}),
    ],
)
def test_factories_return_unitary_maps(factory):
    m = factory()
    assert m.unitary
    assert m.check_unitary()


def test_mirror_involution():
    m = compose(mirror("A"), mirror("A"))
    s = PhotonicState.single(ModeLabel("A", 1))
    assert apply(m, s) == s
    assert apply(mirror("A"), PhotonicState.single(ModeLabel("A", 0))) == PhotonicState.single(
        ModeLabel("A", 0)
    )
    assert apply(mirror("A"), s) == PhotonicState.single(ModeLabel("A", -1))


def test_spp_reflect_involution_on_support():
    # involution wherever image and preimage both sit inside the support
    m = spp_reflect("A")
    for ell in range(-1, 4):
        s = PhotonicState.single(ModeLabel("A", ell))
        assert apply(m, apply(m, s)) == s


def test_beam_splitter_single_photon_split():
    out = apply(beam_splitter("A", "B"), PhotonicState.single(ModeLabel("A", 1)))
    pa = abs(out.amplitude((ModeLabel("A", 1),))) ** 2
    pb = abs(out.amplitude((ModeLabel("B", 1),))) ** 2
    assert abs(pa - 0.5) < 1e-12 and abs(pb - 0.5) < 1e-12


def test_sorter_routing_and_parity():
    m = parity_sorter("B", "C")
    assert apply(m, PhotonicState.single(ModeLabel("B", 0))) == PhotonicState.single(
        ModeLabel("B", 0)
    )
    assert apply(m, PhotonicState.single(ModeLabel("C", -1))) == PhotonicState.single(
        ModeLabel("B", -1)
    )
    assert apply(m, PhotonicState.single(ModeLabel("B", -1))) == PhotonicState.single(
        ModeLabel("C", -1)
    )


@pytest.mark.parametrize("odd_swaps", [True, False])
@pytest.mark.parametrize("phase", [1.0, -1.0])
def test_sorter_twice_is_identity_and_preserves_ell(odd_swaps, phase):
    conv = SorterConvention(odd_swaps=odd_swaps, swap_phase=phase)
    m = parity_sorter("B", "C", conv)
    twice = compose(m, m)
    for ell in range(-3, 4):
        for path in ("B", "C"):
            s = PhotonicState.single(ModeLabel(path, ell))
            out = apply(m, s)
            (term,) = out.terms
            assert term.occupation[0].oam == ell  # sorter never changes OAM
            assert apply(twice, s).amplitude((ModeLabel(path, ell),)) == pytest.approx(
                phase**2 if ((ell % 2 == 1) == odd_swaps) else 1.0
            )


def test_local_unitary_fourier_column():
    f = np.array([[OMEGA ** (j * k) for k in range(3)] for j in range(3)]) / np.sqrt(3)
    m = local_unitary("A", f, (0, 1, 2))
    out = apply(m, PhotonicState.single(ModeLabel("A", 0)))
    for ell in range(3):
        assert abs(abs(out.amplitude((ModeLabel("A", ell),))) ** 2 - 1.0 / 3.0) < 1e-12


def test_local_unitary_diagonalizes_shift():
    # eigenbasis rotation of the cyclic shift: columns are its eigenvectors
    shift = np.zeros((3, 3), dtype=complex)
    for t in range(3):
        shift[(t + 1) % 3, t] = 1.0
    eigvals, eigvecs = np.linalg.eig(shift)
    m = local_unitary("A", eigvecs, (0, 1, 2))
    # applying shift after the rotation equals rotating the scaled basis state
    for k in range(3):
        basis = PhotonicState.single(ModeLabel("A", k))
        rotated = apply(m, basis)
        shifted = apply(local_unitary("A", shift, (0, 1, 2)), rotated)
        expected = rotated.scale(eigvals[k])
        for term in expected.terms:
            assert shifted.amplitude(term.occupation) == pytest.approx(term.amplitude)


def test_local_unitary_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        local_unitary("A", np.ones((3, 3)), (0, 1, 2))


def test_project_examples():
    plus = Projector1.of("A", {0: 1.0, -1: 1.0})
    in_plus = PhotonicState(
        {(ModeLabel("A", 0),): 1.0, (ModeLabel("A", -1),): 1.0}
    ).normalize()
    state, prob = project(plus, in_plus)
    assert abs(prob - 1.0) < 1e-12
    orth = PhotonicState.single(ModeLabel("A", 1))
    _, prob_orth = project(plus, orth)
    assert prob_orth == 0.0


def test_project_idempotent():
    plus = Projector1.of("A", {0: 1.0, -1: 1.0})
    s = PhotonicState(
        {(ModeLabel("A", 0), ModeLabel("B", 1)): 0.8, (ModeLabel("A", 1), ModeLabel("B", 0)): 0.6}
    )
    once, p_once = project(plus, s)
    twice, p_twice = project(plus, once)
    assert once == twice
    assert abs(p_twice - 1.0) < 1e-12


def test_element_spec_json_round_trip():
    spec = ElementSpec(
        "PARITY_SORTER", ("B", "C"), {"odd_swaps": True, "swap_phase": 1.0}
    )
    back = ElementSpec.from_json(spec.to_json())
    assert back == spec
    m = build_element(back)
    assert m.unitary


def test_element_spec_validation():
    with pytest.raises(ValueError):
        ElementSpec("BEAM_SPLITTER", ("A",))
    with pytest.raises(ValueError):
        ElementSpec("NOT_A_KIND", ("A",))
    with pytest.raises(ValueError):
        ElementSpec("MIRROR", ())

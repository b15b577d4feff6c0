"""Test the existence criteria and the structural Hall containers."""

import numpy as np
import pytest

from hallcert.core.errors import (
    DimensionTooSmall,
    EmptyPi,
    InvalidDecomposition,
    NoCandidateClause,
    PiContainsP,
    Singular,
)
from hallcert.core.field import make_field
from hallcert.core.matrix import (
    Epsilon,
    FormKind,
    batch_matmul,
    form_type,
    quadratic_values,
    standard_form,
)
from hallcert.core.models import GroupSpec
from hallcert.groups.classical import build_group, det_one_subgroup
from hallcert.groups.engine import closure, find_hall_pi, is_hall_pi, pi_part
from hallcert.groups.hall import (
    candidate_subgroups,
    circulant_intersection,
    coordinate_decomposition,
    adapted_orthogonal_basis,
    decompW,
    decomposition_stabilizer,
    epi_condition,
    hall_candidate,
    hall_candidates,
    inthom_check,
    monomial_subgroup,
    planes_and_lines_decomposition,
    split_construction_BC,
    subfield_embedding,
    sylow_plane_type,
    typed_plane_basis,
)


def spec(flag, n, q):
    return GroupSpec.from_flag(flag, n, q)


def test_epi_linear_no_clause():
    """Test GL_3(4) with pi = {3, 7}: e(3,4) = 1, e(7,4) = 3, no clause applies."""
    v = epi_condition(spec("GL", 3, 4), [7, 3])
    assert v.exists is False
    assert v.case_label == "GL: no clause"
    assert (v.r, v.a, v.b) == (3, 1, 3)
    assert v.pi == [3, 7]


def test_epi_sylow_and_trivial():
    """Test the one-prime and no-prime cases."""
    sylow = epi_condition(spec("GL", 2, 3), [2])
    assert sylow.exists is True and sylow.case_label == "Sylow" and sylow.r == 2
    trivial = epi_condition(spec("GL", 2, 3), [5])
    assert trivial.exists is True and trivial.case_label == "trivial"


def test_epi_two_and_three_have_no_criterion():
    """Test that 2, 3 in pi yields no verdict."""
    v = epi_condition(spec("GL", 2, 5), [2, 3])
    assert v.exists is None


def test_epi_parity_clause():
    """Test GSp_4(3) with pi = {2, 5}: 5 does not divide q + 1 = 4."""
    v = epi_condition(spec("GSp", 4, 3), [2, 5])
    assert v.exists is False
    assert v.r == 2 and v.a == 2


def test_epi_uses_the_general_group():
    """Test that SL and GL share a verdict, reported for GL."""
    a = epi_condition(spec("SL", 3, 4), [3, 7])
    b = epi_condition(spec("GL", 3, 4), [3, 7])
    assert a.exists == b.exists and a.case_label == b.case_label
    assert a.group == spec("GL", 3, 4)


def test_epi_errors():
    """Test empty pi and pi containing the characteristic."""
    with pytest.raises(EmptyPi):
        epi_condition(spec("GL", 2, 3), [])
    with pytest.raises(PiContainsP):
        epi_condition(spec("GL", 2, 9), [2, 3])


def test_decompW_shapes():
    """Test pairs of coordinates with tails of dimension 0, 1 and 2."""
    assert decompW(4).dims == [2, 2] and decompW(4).tail is None
    odd = decompW(5, standard_form(FormKind.QUADRATIC, Epsilon.CIRC, 5, make_field(3)))
    assert odd.dims == [2, 2] and len(odd.tail) == 1 and odd.orthogonal
    minus = decompW(4, standard_form(FormKind.QUADRATIC, Epsilon.MINUS, 4, make_field(3)))
    assert minus.dims == [2] and len(minus.tail) == 2


def test_decompW_is_an_orthogonal_sum():
    """Test that the symplectic decomposition validates."""
    f3 = make_field(3)
    form = standard_form(FormKind.SYMPLECTIC, None, 6, f3)
    decompW(6, form).validate(f3, form)


@pytest.mark.parametrize(
    "epsilon, q, n_planes",
    [
        (Epsilon.PLUS, 3, 2),
        (Epsilon.MINUS, 3, 1),
        (Epsilon.PLUS, 5, 2),
        (Epsilon.MINUS, 5, 1),
    ],
)
def test_decompW_planes_carry_the_sylow_type(epsilon, q, n_planes):
    """Test that every plane has the torus type for q and a plane tail has the other type."""
    field = make_field(q)
    form = standard_form(FormKind.QUADRATIC, epsilon, 4, field)
    D = decompW(4, form)
    D.validate(field, form)
    eta = sylow_plane_type(field)
    assert eta == (Epsilon.PLUS if q % 4 == 1 else Epsilon.MINUS)
    assert len(D.parts) == n_planes

    def restricted_type(rows):
        gram = batch_matmul(field, batch_matmul(field, rows, form.gram), rows.T)
        return form_type(gram, field)

    assert all(restricted_type(part) == eta for part in D.parts)
    if D.tail is not None:
        assert len(D.tail) == 2
        assert restricted_type(D.tail) != eta


def test_typed_plane_basis_is_orthogonal():
    """Test two anisotropic planes in the plus-type space over F_3."""
    f3 = make_field(3)
    form = standard_form(FormKind.QUADRATIC, Epsilon.PLUS, 4, f3)
    basis = typed_plane_basis(form, Epsilon.MINUS, 2).entries
    gram = batch_matmul(f3, batch_matmul(f3, basis, form.gram), basis.T)
    assert not (gram - np.diag(np.diag(gram))).any()
    assert (quadratic_values(form, basis) != 0).all()


def test_invalid_decompositions():
    """Test mismatched sizes and the plane/line dimension check."""
    with pytest.raises(InvalidDecomposition):
        coordinate_decomposition(4, [2, 1])
    with pytest.raises(InvalidDecomposition):
        planes_and_lines_decomposition(10, np.eye(10, dtype=np.uint16))


def test_planes_and_lines_shapes():
    """Test four planes, three lines and the extra line for n = 12."""
    d11 = planes_and_lines_decomposition(11, np.eye(11, dtype=np.uint16))
    assert d11.dims == [2, 2, 2, 2, 1, 1, 1] and d11.tail is None
    d12 = planes_and_lines_decomposition(12, np.eye(12, dtype=np.uint16))
    assert len(d12.tail) == 1


def test_monomial_subgroups():
    """Test |monomial| = n! (q-1)^n in GL_2(3) and GL_3(3)."""
    assert monomial_subgroup(build_group(spec("GL", 2, 3))).order == 8
    assert monomial_subgroup(build_group(spec("GL", 3, 3))).order == 48


def test_stabilizer_with_tail():
    """Test that fixing the line e1 and the tail e2 leaves the diagonal group."""
    G = build_group(spec("GL", 2, 3))
    H = decomposition_stabilizer(G, coordinate_decomposition(2, [1], tail=1))
    assert H.order == 4


def test_subfield_embedding_is_a_singer_cycle():
    """Test GL_1(9) inside GL_2(3): one generator of order 8."""
    gens = subfield_embedding(2, 3, 2)
    assert closure(gens).order == 8


def test_split_construction():
    """Test both blocks, the empty second block and the dimension check."""
    first, second = split_construction_BC(4, 3, 3)
    assert closure(first).order == 26
    for g in first:
        assert g.to_list()[3] == [0, 0, 0, 1]
    assert [g.to_list() for g in second] == [[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 2]]]
    _, empty = split_construction_BC(3, 4, 3)
    assert empty == []
    with pytest.raises(DimensionTooSmall):
        split_construction_BC(2, 4, 3)


def test_hall_candidate_refuses_nonexistence():
    """Test that a negative verdict has no container."""
    with pytest.raises(NoCandidateClause):
        hall_candidate(spec("GL", 3, 4), [3, 7])


def test_candidate_subgroups_of_gl25():
    """Test the containers for a Sylow 3-subgroup of GL_2(5); the monomial group of order 32 is dropped."""
    G = build_group(spec("GL", 2, 5))
    found = list(candidate_subgroups(G, [3]))
    assert [label for _, label in found] == ["blocks of dimension 2", "GL_[n/a](q^a) with a = 2"]
    assert [H.order for H, _ in found] == [480, 24]
    assert hall_candidates(spec("GL", 2, 5), [3])[0].provenance == "blocks of dimension 2"


@pytest.mark.parametrize(
    "flag, n, q, pi",
    [
        ("GL", 2, 3, [2]),
        ("GL", 2, 5, [3]),
        ("GL", 3, 3, [2]),
        ("O+", 4, 3, [2]),
        ("GO+", 4, 3, [2]),
        ("GO-", 4, 3, [2]),
        ("O", 3, 3, [2]),
        ("GO", 3, 5, [2]),
    ],
)
def test_first_container_has_the_full_pi_part(flag, n, q, pi):
    """Test that the first structural container holds |G|_pi and yields a Hall subgroup."""
    G = build_group(spec(flag, n, q))
    target = pi_part(G.order, pi)
    container = hall_candidate(spec(flag, n, q), pi).realize(G)
    assert container is not None
    assert pi_part(container.order, pi) == target
    H = find_hall_pi(G, pi)
    assert H is not None
    assert H.order == target
    assert is_hall_pi(H, G, pi)


def test_inthom_with_sl():
    """Test a Sylow 3-subgroup of GL_2(5) against SL_2(5)."""
    G = build_group(spec("GL", 2, 5))
    H = find_hall_pi(G, [3])
    result = inthom_check(G, det_one_subgroup(G), H, [3])
    assert result.intersection_order == 3
    assert result.hall_in_a and result.hall_in_quotient
    assert result.quotient_order == 4


def test_circulant_intersection():
    """Test that the monomial group meets its I + C conjugate in the cycle and scalars."""
    report = circulant_intersection(5, 3)
    assert report.monomial_order == 120 * 32
    assert report.contains_cycle
    assert report.scalar_count == 2
    assert not report.central
    with pytest.raises(Singular):
        circulant_intersection(5, 2)


def test_adapted_orthogonal_basis():
    """Test orthogonality and the prescribed Q-values."""
    f3 = make_field(3)
    form = standard_form(FormKind.QUADRATIC, Epsilon.CIRC, 3, f3)
    basis = adapted_orthogonal_basis(form, [0, 1]).entries
    gram = batch_matmul(f3, batch_matmul(f3, basis, form.gram), basis.T)
    assert not (gram - np.diag(np.diag(gram))).any()
    values = quadratic_values(form, basis)
    assert values[0] == 1 and values[1] == 1 and values[2] != 0


@pytest.mark.slow
def test_decompW_stabilizer_in_gsp43():
    """Test that the stabilizer of two orthogonal planes in GSp_4(3) has order 2304."""
    G = build_group(spec("GSp", 4, 3))
    H = decomposition_stabilizer(G, decompW(4, G.form))
    assert H.order == 2304


@pytest.mark.parametrize(
    "flag, n, q, pi",
    [
        ("GL", 2, 3, [2]),
        ("GL", 2, 5, [3]),
        ("GL", 2, 5, [2]),
        ("GL", 2, 7, [3]),
        ("GL", 2, 7, [2]),
        ("GL", 2, 4, [3]),
        ("GL", 2, 4, [5]),
        ("GL", 3, 3, [13]),
        ("GL", 3, 3, [2]),
        ("O", 3, 3, [2]),
        ("GO+", 4, 3, [2]),
    ],
)
def test_inthom_against_det_one(flag, n, q, pi):
    """Test that a Hall subgroup meets the determinant-one subgroup and its quotient in Hall subgroups."""
    G = build_group(spec(flag, n, q))
    H = find_hall_pi(G, pi)
    A = det_one_subgroup(G)
    result = inthom_check(G, A, H, pi)
    assert result.intersection_order == pi_part(A.order, pi)
    assert result.hall_in_a
    assert result.hall_in_quotient

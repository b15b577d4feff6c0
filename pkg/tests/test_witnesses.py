"""Test witness verification, greedy search and certificate replay."""

import pytest

from hallcert.core.context import RunContext
from hallcert.core.errors import (
    IntermediateNotAbelian,
    KindDimensionMismatch,
    ReplayMismatch,
    Singular,
    WitnessNotInGroup,
)
from hallcert.core.field import field_for, make_field
from hallcert.core.matrix import (
    Epsilon,
    FormKind,
    det,
    form_multiplier,
    from_ints,
    identity,
    is_diagonal,
    perm_matrix,
    standard_form,
)
from hallcert.core.models import Certificate, Family, GroupSpec, Verdict, matrix_to_json
from hallcert.groups.basesize import certify
from hallcert.groups.classical import build_group, det_one_subgroup
from hallcert.groups.engine import (
    closure,
    conjugate_subgroup,
    find_hall_pi,
    intersect,
    is_abelian,
    subgroup_closure,
)
from hallcert.groups.hall import decompW, decomposition_stabilizer
from hallcert.groups.witnesses import (
    WitnessKind,
    lemma_witness,
    lemma_witness_with_basis,
    replay_certificate,
    search_witnesses,
    sp4_witnesses,
    two_step_abelian_finish,
    verify_witnesses,
)


def s3_model():
    f2 = make_field(2)
    G = closure([perm_matrix([1, 0, 2], f2), perm_matrix([1, 2, 0], f2)])
    H = subgroup_closure(G, [G.find(perm_matrix([0, 2, 1], f2))])
    return G, H


def test_greedy_search_on_s3():
    """Test that one conjugate of a point stabilizer of S_3 suffices."""
    G, H = s3_model()
    cert = search_witnesses(G, H)
    assert cert is not None
    assert len(cert.witnesses) == 1
    assert cert.intersection_order == 1
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT
    assert cert.method == "greedy"
    assert cert.group.family == Family.USER


def test_no_witnesses_and_identity_witness():
    """Test that H itself is the intersection when nothing or only I is conjugated by."""
    G, H = s3_model()
    for ws in ([], [identity(G.field, 3)]):
        cert = verify_witnesses(G, H, ws)
        assert cert.intersection_order == H.order
        assert cert.verdict == Verdict.FAILED


def test_normal_subgroup_equals_its_core():
    """Test the kernel verdict for SL_2(3) in GL_2(3)."""
    G = build_group(GroupSpec.from_flag("GL", 2, 3))
    cert = verify_witnesses(G, det_one_subgroup(G), [])
    assert cert.verdict == Verdict.KERNEL_EQUALS_CORE
    assert cert.kernel_order == 24
    assert cert.center_order == 2


def test_witness_outside_group():
    """Test that a matrix outside G is rejected."""
    G, H = s3_model()
    outsider = from_ints(G.field, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(WitnessNotInGroup):
        verify_witnesses(G, H, [outsider])


def test_two_step_finish_on_s3():
    """Test x, y, xy with a trivial first intersection."""
    G, H = s3_model()
    x = perm_matrix([1, 0, 2], G.field)
    cert = two_step_abelian_finish(G, H, x)
    assert cert.method == "two-step"
    assert len(cert.witnesses) == 3
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT


def test_two_step_needs_abelian_intersection():
    """Test that a nonabelian H cap H^x is refused."""
    G = build_group(GroupSpec.from_flag("GL", 2, 3))
    H = find_hall_pi(G, [2])
    with pytest.raises(IntermediateNotAbelian):
        two_step_abelian_finish(G, H, identity(G.field, 2))


@pytest.mark.parametrize(
    "kind, n",
    [(WitnessKind.LINEAR_ODD_N, 3), (WitnessKind.LINEAR_ODD_N, 7), (WitnessKind.ORTH_ODD, 5), (WitnessKind.ORTH_11_12, 11)],
)
def test_signed_permutation_witnesses(kind, n):
    """Test the shape and determinant of the signed permutation witnesses."""
    f3 = make_field(3)
    x = lemma_witness(kind, n, f3)
    assert x.n == n
    assert det(x) == f3.one()


def test_even_orthogonal_witness_is_an_isometry():
    """Test the adapted-basis witness for O^+_4(3)."""
    f3 = make_field(3)
    x, basis = lemma_witness_with_basis(WitnessKind.ORTH_EVEN, 4, f3, Epsilon.PLUS)
    assert basis is not None
    form = standard_form(FormKind.QUADRATIC, Epsilon.PLUS, 4, f3)
    assert form_multiplier(x, form) == f3.one()
    assert det(x) == f3.one()


def test_circulant_witness():
    """Test I + C for odd n and its singularity in characteristic 2."""
    x = lemma_witness(WitnessKind.CIRCULANT_REMARK, 5, field_for(3))
    assert x.to_list()[4] == [1, 0, 0, 0, 1]
    with pytest.raises(Singular):
        lemma_witness(WitnessKind.CIRCULANT_REMARK, 5, field_for(2))


@pytest.mark.parametrize(
    "kind, n",
    [
        (WitnessKind.LINEAR_ODD_N, 4),
        (WitnessKind.ORTH_ODD, 6),
        (WitnessKind.ORTH_EVEN, 5),
        (WitnessKind.ORTH_11_12, 10),
        (WitnessKind.CIRCULANT_REMARK, 3),
    ],
)
def test_witness_dimension_checks(kind, n):
    """Test that each witness kind rejects dimensions it is not defined for."""
    with pytest.raises(KindDimensionMismatch):
        lemma_witness(kind, n, make_field(3))


def test_replay_round_trip():
    """Test that a serialized certificate replays to identical JSON."""
    G, H = s3_model()
    cert = search_witnesses(G, H)
    loaded = Certificate.model_validate_json(cert.canonical_json())
    again = replay_certificate(loaded)
    assert again.canonical_json() == cert.canonical_json()


def test_replay_detects_tampering():
    """Test that an edited certificate does not replay."""
    G, H = s3_model()
    cert = search_witnesses(G, H)
    tampered = cert.model_copy(update={"intersection_order": 2})
    with pytest.raises(ReplayMismatch):
        replay_certificate(tampered)


@pytest.mark.slow
def test_sp4_witnesses_in_gsp43():
    """Test that the three Sp_4 witnesses cut the decompW stabilizer down to the center."""
    G = build_group(GroupSpec.from_flag("GSp", 4, 3))
    H = decomposition_stabilizer(G, decompW(4, G.form))
    cert = verify_witnesses(G, H, list(sp4_witnesses(G.field)), pi=[2])
    assert cert.intersection_order == 2
    assert cert.central
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT


def test_certify_records_the_adapted_basis():
    """Test that a named witness keeps its kind and adapted basis through the two-step finish."""
    G = build_group(GroupSpec.from_flag("GO+", 4, 3))
    _, basis = lemma_witness_with_basis(WitnessKind.ORTH_EVEN, 4, G.field, Epsilon.PLUS)
    cert = certify(G, G.trivial(), [2], RunContext(), witness="orth_even")
    assert cert.method == "two-step:orth_even"
    assert cert.change_of_basis is not None
    assert cert.change_of_basis == matrix_to_json(basis)
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT
    again = replay_certificate(Certificate.model_validate_json(cert.canonical_json()))
    assert again.method == "two-step:orth_even"
    assert again.change_of_basis == cert.change_of_basis


@pytest.mark.parametrize(
    "q, hall_order, inter_order",
    [(3, 96, 8), pytest.param(5, 1920, 64, marks=pytest.mark.slow)],
)
def test_linear_odd_witness_meets_in_the_diagonal(q, hall_order, inter_order):
    """Test GL_3(q): H cap H^x is diagonal for the block stabilizer H, and x, y, xy finish it."""
    G = build_group(GroupSpec.from_flag("GL", 3, q))
    H = decomposition_stabilizer(G, decompW(3))
    assert H.order == hall_order
    x = lemma_witness(WitnessKind.LINEAR_ODD_N, 3, G.field)
    A = intersect([H, conjugate_subgroup(H, G.find(x))])
    assert A.order == inter_order
    assert all(is_diagonal(G.matrix(int(a))) for a in A.members)
    cert = two_step_abelian_finish(G, H, x, kind=WitnessKind.LINEAR_ODD_N)
    assert cert.method == "two-step:linear_odd_n"
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT


@pytest.mark.parametrize(
    "flag, n, q, pi",
    [
        ("GL", 2, 4, [3]),
        ("GL", 2, 4, [5]),
        ("GL", 2, 5, [3]),
        ("GL", 2, 7, [3]),
        ("GL", 3, 3, [13]),
    ],
)
def test_abelian_hall_needs_one_conjugate(flag, n, q, pi):
    """Test that an abelian Hall subgroup meets a single conjugate inside the center."""
    G = build_group(GroupSpec.from_flag(flag, n, q))
    H = find_hall_pi(G, pi)
    assert is_abelian(H)
    cert = search_witnesses(G, H, pi=pi)
    assert cert is not None
    assert len(cert.witnesses) == 1
    assert cert.verdict == Verdict.CENTRAL_CONTAINMENT

"""Test group enumeration and subgroup operations."""

import numpy as np
import pytest

from hallcert.core.errors import (
    BudgetExceeded,
    DimensionMismatch,
    IndexOutOfRange,
    NonInvertibleGenerator,
    ParentMismatch,
)
from hallcert.core.field import make_field
from hallcert.core.matrix import form_multiplier, from_ints, identity, perm_matrix
from hallcert.core.models import GroupSpec
from hallcert.groups.classical import build_group, det_one_subgroup, transvection_gens
from hallcert.groups.engine import (
    center,
    centralizer,
    closure,
    conjugate_subgroup,
    conjugating_element,
    element_orders,
    find_hall_pi,
    intersect,
    is_abelian,
    is_hall_pi,
    is_normal,
    is_solvable,
    kernel_HG,
    pi_part,
    subgroup_closure,
)


def s3_model():
    """S_3 as 3x3 permutation matrices over F_2, with a point stabilizer."""
    f2 = make_field(2)
    G = closure([perm_matrix([1, 0, 2], f2), perm_matrix([1, 2, 0], f2)])
    H = subgroup_closure(G, [G.find(perm_matrix([0, 2, 1], f2))])
    return G, H


def gl(n, q):
    return build_group(GroupSpec.from_flag("GL", n, q))


def test_closure_of_identity_is_trivial():
    """Test that the identity generates the trivial group."""
    G = closure([identity(make_field(3), 2)])
    assert G.order == 1
    assert G.find(identity(make_field(3), 2)) == 0


def test_s3_model():
    """Test the permutation-matrix model of S_3."""
    G, H = s3_model()
    assert G.order == 6
    assert H.order == 2
    assert np.array_equal(G.elements[0], np.eye(3))
    assert center(G).order == 1


def test_closure_is_deterministic():
    """Test that the canonical order only depends on the generator list."""
    f3 = make_field(3)
    gens = transvection_gens(f3, 2)
    a, b = closure(gens), closure(gens)
    assert np.array_equal(a.codes, b.codes)


def test_closure_budget():
    """Test that closure stops at the cap and reports a partial count."""
    f3 = make_field(3)
    gens = transvection_gens(f3, 3)
    with pytest.raises(BudgetExceeded) as info:
        closure(gens, cap=10)
    assert info.value.partial > 10


def test_closure_input_checks():
    """Test the generator checks."""
    f3 = make_field(3)
    with pytest.raises(NonInvertibleGenerator):
        closure([from_ints(f3, [[1, 0], [0, 0]])])
    with pytest.raises(DimensionMismatch):
        closure([])
    with pytest.raises(DimensionMismatch):
        closure([identity(f3, 2), identity(f3, 3)])
    with pytest.raises(ValueError):
        closure([identity(f3, 2)], cap=0)


def test_gl23_order_and_center():
    """Test |GL_2(3)| = 48 and Z(GL_2(3)) = {I, 2I}."""
    G = gl(2, 3)
    assert G.order == 48
    Z = center(G)
    assert Z.order == 2
    scalars = sorted(G.matrix(i).to_list() for i in Z.members)
    assert scalars == [[[1, 0], [0, 1]], [[2, 0], [0, 2]]]


def test_center_is_central():
    """Test the center against every element, not only the generators."""
    G = gl(2, 3)
    Z = center(G)
    everything = np.arange(G.order)
    for z in Z.members:
        assert np.array_equal(G.mul_ids(z, everything), G.mul_ids(everything, z))


def test_centralizer():
    """Test centralizers of the generators, of the identity and of a diagonal element."""
    G = gl(2, 3)
    assert centralizer(G, G.gen_ids) == center(G)
    assert centralizer(G, [0]).order == G.order
    diagonal = G.find(from_ints(G.field, [[1, 0], [0, 2]]))
    assert centralizer(G, [diagonal]).order == 4


def test_products_and_inverses_stay_in_table():
    """Test closure soundness on random pairs and on all inverses."""
    G = gl(2, 5)
    rng = np.random.default_rng(0)
    a = rng.integers(0, G.order, 100_000)
    b = rng.integers(0, G.order, 100_000)
    ab = G.mul_ids(a, b)
    assert np.all(ab >= 0)
    c = rng.integers(0, G.order, 100_000)
    assert np.array_equal(G.mul_ids(ab, c), G.mul_ids(a, G.mul_ids(b, c)))
    everything = np.arange(G.order)
    assert np.all(G.mul_ids(everything, G.inverse) == 0)


def test_conjugate_subgroup_properties():
    """Test conjugation by the identity, by members of H, and order preservation."""
    G = gl(2, 3)
    H = find_hall_pi(G, [2])
    assert conjugate_subgroup(H, 0) == H
    for h in H.members[:5]:
        assert conjugate_subgroup(H, int(h)) == H
    for g in range(0, G.order, 7):
        assert conjugate_subgroup(H, g).order == H.order
    with pytest.raises(IndexOutOfRange):
        conjugate_subgroup(H, G.order)


def test_intersect_properties():
    """Test idempotence, absorption and the shared-parent check."""
    G, H = s3_model()
    assert intersect([H, H]) == H
    assert intersect([G.whole(), H]) == H
    with pytest.raises(ParentMismatch):
        intersect([H, gl(2, 3).whole()])


def test_kernel_of_point_stabilizer_is_trivial():
    """Test that a point stabilizer of S_3 has trivial core."""
    G, H = s3_model()
    assert kernel_HG(G, H).order == 1


def test_kernel_of_normal_subgroup():
    """Test H_G = H for the normal subgroup SL_2(3) of GL_2(3)."""
    G = gl(2, 3)
    A = det_one_subgroup(G)
    assert A.order == 24
    assert is_normal(G, A)
    assert kernel_HG(G, A) == A


def test_kernel_contains_center_when_h_does():
    """Test Z(G) <= H implies Z(G) <= H_G, and H_G is normal."""
    G = gl(2, 3)
    H = find_hall_pi(G, [2])
    Z = center(G)
    assert Z.issubset(H)
    K = kernel_HG(G, H)
    assert Z.issubset(K)
    assert is_normal(G, K)
    for g in range(0, G.order, 5):
        assert K.issubset(intersect([H, conjugate_subgroup(H, g)]))


def test_pi_part():
    """Test pi-parts of group orders."""
    assert pi_part(48, [2]) == 16
    assert pi_part(51840, [5]) == 5
    assert pi_part(51840, [2, 3]) == 10368
    assert pi_part(35, [2]) == 1


def test_sylow_two_of_gl23():
    """Test that both strategies find a Hall 2-subgroup of order 16."""
    G = gl(2, 3)
    for strategy in ("structural", "exhaustive"):
        H = find_hall_pi(G, [2], strategy=strategy)
        assert H.order == 16
        assert is_hall_pi(H, G, [2])
        assert is_solvable(H)


def test_hall_for_all_primes_is_the_group():
    """Test that pi covering every prime gives G itself."""
    G = gl(2, 3)
    assert find_hall_pi(G, [2, 3]) == G.whole()
    assert find_hall_pi(G, [5]).order == 1


def test_sl25_hall_subgroups():
    """Test SL_2(5): a {2,3}-Hall subgroup SL_2(3) exists, a {3,5}-Hall subgroup does not."""
    G = build_group(GroupSpec.from_flag("SL", 2, 5))
    assert G.order == 120
    H = find_hall_pi(G, [2, 3], strategy="exhaustive")
    assert H is not None and H.order == 24
    assert find_hall_pi(G, [3, 5], strategy="exhaustive") is None


def test_solvability():
    """Test is_solvable on A_5, GL_2(3) and an abelian group."""
    assert not is_solvable(build_group(GroupSpec.from_flag("SL", 2, 4)).whole())
    G = gl(2, 3)
    assert is_solvable(G.whole())
    assert is_abelian(center(G))
    assert is_solvable(center(G))


def test_element_orders_divide_group_order():
    """Test element orders in GL_2(3), including a Singer cycle of order 8."""
    G = gl(2, 3)
    orders = element_orders(G)
    assert orders[0] == 1
    assert np.all(48 % orders == 0)
    assert orders.max() == 8


def test_multiplier_is_a_homomorphism():
    """Test the propagated multipliers against direct computation in GSp_2(5)."""
    G = build_group(GroupSpec.from_flag("GSp", 2, 5))
    assert G.order == 480
    for i in range(0, G.order, 11):
        assert G.multiplier[i] == form_multiplier(G.matrix(i), G.form).code
    assert int(np.sum(G.multiplier == 1)) == 120


def test_odd_order_hall_subgroups_are_conjugate():
    """Test that two Sylow 3-subgroups of GL_2(5) found independently are conjugate."""
    G = gl(2, 5)
    H1 = find_hall_pi(G, [3], strategy="structural")
    H2 = find_hall_pi(G, [3], strategy="exhaustive")
    g = conjugating_element(G, H1, H2)
    assert g is not None
    assert conjugate_subgroup(H1, g) == H2

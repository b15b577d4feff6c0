"""Test classical group orders, generators and enumeration."""

import numpy as np
import pytest

from hallcert.core.errors import BudgetExceeded, InconsistentTypeParameters, UnsupportedFamily
from hallcert.core.matrix import Epsilon, form_multiplier
from hallcert.core.models import Family, GroupSpec
from hallcert.groups.classical import build_group, generators, group_order
from hallcert.groups.engine import center


@pytest.mark.parametrize(
    "family, n, q, order",
    [
        ("GL", 2, 3, 48),
        ("SL", 2, 5, 120),
        ("GL", 3, 4, 181440),
        ("Sp", 4, 3, 51840),
        ("GSp", 4, 3, 103680),
        ("GU", 3, 3, 24192),
        ("SU", 3, 3, 6048),
        ("O", 3, 3, 48),
        ("SO", 3, 3, 24),
        ("GO", 3, 5, 480),
        ("O+", 4, 3, 1152),
        ("GO+", 4, 3, 2304),
        ("O-", 4, 3, 1440),
        ("GO-", 4, 3, 2880),
    ],
)
def test_order_formulas(family, n, q, order):
    """Test the order polynomials on known values."""
    assert group_order(GroupSpec.from_flag(family, n, q)) == order


def test_group_spec_flags():
    """Test family flags with orthogonal types and the unitary u."""
    spec = GroupSpec.from_flag("GO-", 4, 3)
    assert spec.family == Family.GO and spec.epsilon == Epsilon.MINUS
    assert GroupSpec.from_flag("SO", 3, 5).epsilon == Epsilon.CIRC
    assert GroupSpec.from_flag("GU", 3, 3).u == 2
    assert GroupSpec.from_flag("GU", 3, 3).field().order == 9
    assert GroupSpec.from_flag("GSp", 4, 3).u == 1


def test_order_formula_errors():
    """Test even-characteristic orthogonal and odd-dimensional symplectic groups."""
    with pytest.raises(UnsupportedFamily):
        group_order(GroupSpec.from_flag("GO+", 4, 4))
    with pytest.raises(InconsistentTypeParameters):
        group_order(GroupSpec.from_flag("Sp", 3, 3))


@pytest.mark.parametrize(
    "family, n, q",
    [
        ("GL", 2, 2),
        ("SL", 2, 2),
        ("GL", 2, 3),
        ("SL", 2, 3),
        ("GL", 3, 3),
        ("SL", 2, 4),
        ("GU", 3, 3),
        ("SU", 3, 3),
        ("O", 3, 3),
        ("SO", 3, 3),
        ("GO", 3, 5),
        ("GO+", 4, 3),
        ("GO-", 4, 3),
    ],
)
def test_enumeration_matches_order_formula(family, n, q):
    """Test that closure of the standard generators reaches the formula order."""
    spec = GroupSpec.from_flag(family, n, q)
    G = build_group(spec)
    assert G.order == group_order(spec)
    assert G.spec == spec


def test_gl22_equals_sl22():
    """Test GL_2(2) = SL_2(2) of order 6."""
    assert build_group(GroupSpec.from_flag("GL", 2, 2)).order == 6
    assert build_group(GroupSpec.from_flag("SL", 2, 2)).order == 6


def test_determinant_one_families():
    """Test det = 1 on every element of SL and SO."""
    for family, n, q in (("SL", 2, 5), ("SO", 3, 3), ("SU", 3, 3)):
        G = build_group(GroupSpec.from_flag(family, n, q))
        assert np.all(G.det == 1)


def test_isometries_preserve_the_form():
    """Test multiplier 1 directly on every element of O_3(3) and via the table for GU_3(3)."""
    G = build_group(GroupSpec.from_flag("O", 3, 3))
    for i in range(G.order):
        assert form_multiplier(G.matrix(i), G.form) == G.field.one()
    U = build_group(GroupSpec.from_flag("GU", 3, 3))
    assert np.all(U.multiplier == 1)


def test_similitude_multipliers_cover_the_units():
    """Test that GO_4^+(3) has multipliers 1 and 2, each on half the group."""
    G = build_group(GroupSpec.from_flag("GO+", 4, 3))
    values, counts = np.unique(G.multiplier, return_counts=True)
    assert values.tolist() == [1, 2]
    assert counts.tolist() == [1152, 1152]


def test_generators_are_deterministic():
    """Test that the generator list does not change between calls."""
    spec = GroupSpec.from_flag("SO", 3, 3)
    first = generators(spec)
    second = generators(spec)
    assert [g.to_list() for g in first] == [g.to_list() for g in second]


def test_build_group_budget():
    """Test that an over-budget group is rejected before enumeration."""
    with pytest.raises(BudgetExceeded):
        build_group(GroupSpec.from_flag("GL", 3, 3), cap=1000)


def test_user_groups_are_not_built_from_specs():
    """Test that the user family needs explicit generators."""
    with pytest.raises(UnsupportedFamily):
        build_group(GroupSpec(family=Family.USER, n=2, q=3))


@pytest.mark.slow
def test_sp43_and_gsp43():
    """Test |Sp_4(3)| = 51840 and |GSp_4(3)| = 103680 by enumeration, with centers of order 2."""
    sp = build_group(GroupSpec.from_flag("Sp", 4, 3))
    assert sp.order == 51840
    assert center(sp).order == 2
    gsp = build_group(GroupSpec.from_flag("GSp", 4, 3))
    assert gsp.order == 103680
    assert center(gsp).order == 2

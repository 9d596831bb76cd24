import pytest

from _suite import affine, glide_group, pm_group, split_glide_group
from coxrigid.cohomology import cf_equal, finite_subgroup_classes, h1, h1_of_matrices
from coxrigid.crystal import BudgetExceeded, change_basis, semidirect, translation_group
from coxrigid.finite import FiniteGroup
from coxrigid.linalg import AbelianInvariants, Lattice, identity, kernel, matmul, quotient_invariants

CYCLIC_ACTIONS = [
    ((1,),),
    ((-1,),),
    ((-1, 0), (0, -1)),
    ((0, 1), (1, 0)),
    ((0, -1), (1, 0)),
    ((0, -1), (1, -1)),
    ((1, 0), (0, -1)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
]


def _order(m):
    x, k = m, 1
    while x != identity(len(m)):
        x, k = matmul(x, m), k + 1
    return k


def cyclic_h1_oracle(a):
    """For a cyclic group generated by A: ker(1 + A + ... + A^(m-1)) modulo im(A - 1)."""
    n = len(a)
    m = _order(a)
    norm = [[0] * n for _ in range(n)]
    p = identity(n)
    for _ in range(m):
        norm = [[x + y for x, y in zip(r, s)] for r, s in zip(norm, p)]
        p = matmul(p, a)
    z = Lattice.from_generators(kernel(norm, n) or [tuple([0] * n)], n) if any(any(r) for r in norm) \
        else Lattice.standard(n)
    b = Lattice.from_generators([tuple(a[i][j] - int(i == j) for i in range(n)) for j in range(n)], n)
    return quotient_invariants(b, z)


@pytest.mark.parametrize("a", CYCLIC_ACTIONS)
def test_h1_of_cyclic_actions_against_norm_oracle(a):
    assert h1_of_matrices([a]) == cyclic_h1_oracle(a)


def test_h1_examples():
    assert h1_of_matrices([((1,),)]).is_trivial()
    assert h1_of_matrices([((-1,),)]) == AbelianInvariants((2,))
    assert h1_of_matrices([((-1, 0), (0, -1))]) == AbelianInvariants((2, 2))
    # trivial action of a nontrivial group: homomorphisms from a finite group to Z vanish
    assert h1(FiniteGroup.cyclic(3), [identity(2)]).is_trivial()


@pytest.mark.parametrize("gens", [[((-1, 0), (0, -1))], [((0, -1), (1, 0))], [((0, -1), (1, -1))],
                                  [((0, 1), (1, 0)), ((-1, 0), (0, -1))],
                                  [((0, 1, 0), (0, 0, 1), (1, 0, 0)), ((-1, 0, 0), (0, -1, 0), (0, 0, -1))]])
def test_h1_exponent_divides_group_order(gens):
    from coxrigid.crystal import PointGroup
    order = PointGroup(gens).order
    inv = h1_of_matrices(gens)
    assert inv.free_rank == 0
    assert all(order % d == 0 for d in inv.torsion)


def test_h1_requires_one_matrix_per_generator():
    with pytest.raises(ValueError):
        h1(FiniteGroup.cyclic(2), [((-1,),), ((-1,),)])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cf_of_lattice_is_a_single_point(n):
    cf = finite_subgroup_classes(translation_group(n))
    assert len(cf.classes) == 1 and cf.classes[0].order == 1
    assert cf.relation == {(0, 0)}


@pytest.mark.parametrize("g", [translation_group(2), glide_group()])
def test_torsion_free_groups_have_one_class(g):
    assert len(finite_subgroup_classes(g).classes) == 1


@pytest.mark.parametrize("name", ["pm", "reflection", "~I1", "~A2", "~C2", "~G2"])
def test_symmorphic_groups_realize_the_whole_point_group(name):
    g = {"pm": pm_group(), "reflection": split_glide_group(), "~I1": affine("I1"), "~A2": affine("A", 2),
         "~C2": affine("C", 2), "~G2": affine("G2")}[name]
    cf = finite_subgroup_classes(g)
    assert max(c.order for c in cf.classes) == g.point_order()


def test_cf_relation_is_a_partial_order():
    for g in (pm_group(), affine("C", 2), affine("G2")):
        cf = finite_subgroup_classes(g)
        k = len(cf.classes)
        assert all((i, i) in cf.relation for i in range(k))
        for i, j in cf.relation:
            if i != j:
                assert (j, i) not in cf.relation
            for a, b in cf.relation:
                if a == j:
                    assert (i, b) in cf.relation


def test_cf_examples():
    assert len(finite_subgroup_classes(affine("I1")).classes) == 3
    assert len(finite_subgroup_classes(pm_group()).classes) == 5
    # the reflection group in the plane has two conjugacy classes of mirrors
    assert len(finite_subgroup_classes(split_glide_group()).classes) == 3


def test_cf_budget():
    with pytest.raises(BudgetExceeded):
        finite_subgroup_classes(affine("G2"), budget=6)


def test_cf_equal():
    c2 = affine("C", 2)
    skew = change_basis(c2, [[1, 1], [0, 1]])
    a, b = finite_subgroup_classes(c2), finite_subgroup_classes(skew)
    assert cf_equal(a, b) and cf_equal(a, b, c2, skew)
    assert not cf_equal(a, finite_subgroup_classes(affine("G2")))
    assert not cf_equal(finite_subgroup_classes(pm_group()), finite_subgroup_classes(split_glide_group()))
    incomplete = finite_subgroup_classes(pm_group())
    incomplete.complete = False
    with pytest.raises(BudgetExceeded):
        cf_equal(incomplete, a)


def test_cf_equal_for_isomorphic_models_on_different_lattices():
    # -I on Z^2 versus -I on the sublattice spanned by (1,1), (1,-1): isomorphic groups, equal posets
    g = semidirect(Lattice.standard(2), [((-1, 0), (0, -1))])
    h = semidirect(Lattice.from_generators([(1, 1), (1, -1)], 2), [((-1, 0), (0, -1))])
    assert cf_equal(finite_subgroup_classes(g), finite_subgroup_classes(h), g, h)

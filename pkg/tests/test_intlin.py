import itertools
import random

import pytest
from sympy import ZZ, Matrix
from sympy.matrices.normalforms import invariant_factors

from torusdef.intlin import (
    FgAbGroup,
    GroupHom,
    as_matrix,
    cokernel,
    group_from_relations,
    hom_into_finite,
    image,
    integer_kernel,
    kernel,
    matmul,
    pro_p_part,
    smith_normal_form,
    solve_integer,
    subquotient,
    tensor,
)


def test_smith_normal_form_factors_the_input() -> None:
    a = as_matrix([[2, 4], [6, 8]])
    u, d, v = smith_normal_form(a)
    assert (matmul(matmul(u, a), v) == d).all()
    assert [d[0, 0], d[1, 1]] == [2, 4]
    assert d[0, 1] == 0 and d[1, 0] == 0


def test_smith_normal_form_rectangular() -> None:
    a = as_matrix([[1, 2, 3], [4, 5, 6]])
    u, d, v = smith_normal_form(a)
    assert (matmul(matmul(u, a), v) == d).all()
    assert [d[0, 0], d[1, 1]] == [1, 3]
    assert not d[:, 2].any()


def test_group_from_relations() -> None:
    g = group_from_relations(2, [[2, 4], [6, 8]])
    assert g.invariant_factors == [2, 4]
    assert g.free_rank == 0
    assert g.cardinality == 8
    assert g.describe() == "Z/2 x Z/4"


def test_group_from_empty_relations() -> None:
    assert group_from_relations(3, []).free_rank == 3
    assert group_from_relations(2, [[2, 0], [0, 3]]).describe() == "Z/6"
    with pytest.raises(ValueError, match="rows"):
        group_from_relations(3, [[1], [2]])


def test_from_invariants_normalizes_chain() -> None:
    g = FgAbGroup.from_invariants([2, 3, 0])
    assert g.invariants() == (1, (6,))
    assert g.describe() == "Z/6 x Z"
    assert not g.is_finite
    assert g.exponent == 0


def test_trivial_and_free_groups() -> None:
    assert FgAbGroup.trivial().is_trivial
    assert FgAbGroup.trivial().describe() == "0"
    assert FgAbGroup.free(3).describe() == "Z^3"
    assert FgAbGroup.from_invariants([1, 1]).is_trivial


def test_reduce_and_arithmetic() -> None:
    g = FgAbGroup.from_invariants([4])
    assert g.reduce([5]) == (1,)
    assert g.reduce([-1]) == (3,)
    assert g.add((3,), (2,)) == (1,)
    assert g.neg((1,)) == (3,)
    assert g.scale(2, (3,)) == (2,)
    assert g.is_zero([8])
    assert len(list(g.elements())) == 4


def test_enumerating_infinite_group_fails() -> None:
    with pytest.raises(ValueError, match="infinite"):
        list(FgAbGroup.free(1).elements())


def test_integer_kernel_and_solve() -> None:
    a = as_matrix([[1, 2, 3]])
    k = integer_kernel(a)
    assert k.shape == (3, 2)
    assert not matmul(a, k).any()

    assert solve_integer(as_matrix([[2]]), as_matrix([[3]])) is None
    x = solve_integer(as_matrix([[2]]), as_matrix([[4]]))
    assert x is not None and x[0, 0] == 2


def test_homomorphism_must_respect_relations() -> None:
    with pytest.raises(ValueError, match="does not induce"):
        GroupHom(FgAbGroup.from_invariants([2]), FgAbGroup.from_invariants([3]), [[1]])


def test_kernel_image_cokernel_of_doubling() -> None:
    z4 = FgAbGroup.from_invariants([4])
    double = GroupHom(z4, z4, [[2]])
    assert kernel(double).describe() == "Z/2"
    assert image(double).describe() == "Z/2"
    assert cokernel(double).describe() == "Z/2"


def test_kernel_of_free_map() -> None:
    h = GroupHom(FgAbGroup.free(2), FgAbGroup.free(1), [[1, 1]])
    assert kernel(h).describe() == "Z"
    assert cokernel(h).is_trivial


def test_subquotient_classifies_kernel_elements() -> None:
    z = FgAbGroup.free(1)
    h = GroupHom(z, z, [[0]])
    times_three = GroupHom(z, z, [[3]])
    sq = subquotient(h, times_three)
    assert sq.group.describe() == "Z/3"
    assert sq.classify([4]) == sq.classify([1])
    assert sq.classify([3]) == sq.group.zero()


def test_tensor_products() -> None:
    z4, z6 = FgAbGroup.from_invariants([4]), FgAbGroup.from_invariants([6])
    assert tensor(z4, z6).describe() == "Z/2"
    assert tensor(FgAbGroup.free(1), FgAbGroup.from_invariants([3])).describe() == "Z/3"
    assert tensor(FgAbGroup.free(2), FgAbGroup.free(3)).describe() == "Z^6"


def test_hom_into_finite_counts_and_enumerates() -> None:
    z4, z6 = FgAbGroup.from_invariants([4]), FgAbGroup.from_invariants([6])
    count, homs = hom_into_finite(z4, z6)
    assert count == 2
    assert len(set(homs)) == 2

    count, homs = hom_into_finite(FgAbGroup.free(1), FgAbGroup.from_invariants([3]))
    assert count == 3
    assert len(list(homs)) == 3

    count, homs = hom_into_finite(FgAbGroup.from_invariants([0, 2]), FgAbGroup.from_invariants([4]))
    assert count == 8
    assert len(set(homs)) == 8

    count, homs = hom_into_finite(FgAbGroup.from_invariants([8]), FgAbGroup.trivial())
    assert count == 1
    assert len(list(homs)) == 1


def test_hom_into_infinite_target_is_rejected() -> None:
    with pytest.raises(ValueError, match="not finite"):
        hom_into_finite(FgAbGroup.free(1), FgAbGroup.free(1))


def test_pro_p_part() -> None:
    g = FgAbGroup.from_invariants([12, 0])
    assert pro_p_part(g, 2) == (1, [4])
    assert pro_p_part(g, 3) == (1, [3])
    assert pro_p_part(g, 5) == (1, [])
    with pytest.raises(ValueError, match="not a prime"):
        pro_p_part(g, 4)


@pytest.mark.parametrize("seed", range(6))
def test_invariant_factors_match_sympy(seed: int) -> None:
    rng = random.Random(seed)
    rows = [[rng.randint(-6, 6) for _ in range(4)] for _ in range(3)]
    g = group_from_relations(3, rows)

    expected = sorted(abs(int(f)) for f in invariant_factors(Matrix(rows), domain=ZZ))
    assert g.invariant_factors == [f for f in expected if f > 1]
    assert g.free_rank == 3 - Matrix(rows).rank()


@pytest.mark.parametrize(
    "rows, cols, seed",
    [(5, 5, 0), (6, 4, 1), (4, 7, 2), (7, 7, 3), (8, 6, 4), (8, 8, 5), (8, 8, 6)],
)
def test_smith_normal_form_on_random_matrices(rows: int, cols: int, seed: int) -> None:
    rng = random.Random(seed)
    entries = [[rng.randint(-10, 10) for _ in range(cols)] for _ in range(rows)]
    a = as_matrix(entries)
    u, d, v = smith_normal_form(a)
    assert (matmul(matmul(u, a), v) == d).all()
    assert abs(Matrix(u.tolist()).det()) == 1
    assert abs(Matrix(v.tolist()).det()) == 1

    diag = [int(d[i, i]) for i in range(min(rows, cols))]
    off_diagonal = [
        d[i, j] for i in range(rows) for j in range(cols) if i != j
    ]
    assert not any(off_diagonal)
    assert all(x >= 0 for x in diag)
    for x, y in itertools.pairwise(diag):
        assert y == 0 if x == 0 else y % x == 0

    expected = sorted(abs(int(f)) for f in invariant_factors(Matrix(entries), domain=ZZ))
    assert [x for x in diag if x > 1] == [f for f in expected if f > 1]


def _groups() -> dict[str, FgAbGroup]:
    return {
        "z4": FgAbGroup.from_invariants([4]),
        "z6": FgAbGroup.from_invariants([6]),
        "z2z2": FgAbGroup.from_invariants([2, 2]),
        "z": FgAbGroup.free(1),
        "z12z": FgAbGroup.from_invariants([12, 0]),
    }


@pytest.mark.parametrize("left, right", itertools.combinations(_groups(), 2))
def test_tensor_is_symmetric(left: str, right: str) -> None:
    groups = _groups()
    a, b = groups[left], groups[right]
    assert tensor(a, b).describe() == tensor(b, a).describe()


@pytest.mark.parametrize("names", itertools.combinations(_groups(), 3))
def test_tensor_is_associative(names: tuple[str, str, str]) -> None:
    groups = _groups()
    a, b, c = (groups[n] for n in names)
    assert tensor(tensor(a, b), c).describe() == tensor(a, tensor(b, c)).describe()


@pytest.mark.parametrize("name", list(_groups()))
def test_tensor_with_integers_is_identity(name: str) -> None:
    group = _groups()[name]
    assert tensor(FgAbGroup.free(1), group).describe() == group.describe()
    assert tensor(group, FgAbGroup.free(1)).describe() == group.describe()


def _brute_force_hom_count(source: FgAbGroup, target: FgAbGroup) -> int:
    """Assignments of target elements to ambient generators killing every relation"""
    rel = source.relations
    count = 0
    for images in itertools.product(list(target.elements()), repeat=source.ambient_rank):
        lifted = [target.lift(t) for t in images]
        if all(
            target.is_zero(sum(int(rel[j, c]) * lifted[j] for j in range(len(lifted))))
            for c in range(rel.shape[1])
        ):
            count += 1
    return count


@pytest.mark.parametrize(
    "source, target",
    [
        (FgAbGroup.from_invariants([4, 6]), FgAbGroup.from_invariants([6])),
        (group_from_relations(2, [[2, 4], [6, 8]]), FgAbGroup.from_invariants([4, 2])),
        (FgAbGroup.from_invariants([8]), FgAbGroup.from_invariants([2, 2, 2])),
        (FgAbGroup.from_invariants([2, 3, 0]), FgAbGroup.from_invariants([6])),
        (FgAbGroup.from_invariants([9]), FgAbGroup.from_invariants([3, 3])),
        (group_from_relations(2, [[3, 1], [1, 3]]), FgAbGroup.from_invariants([8])),
    ],
)
def test_hom_count_matches_brute_force(source: FgAbGroup, target: FgAbGroup) -> None:
    count, homs = hom_into_finite(source, target)
    assert count == _brute_force_hom_count(source, target)
    assert len(set(homs)) == count

import itertools
import random

import pytest

from torusdef.ee import (
    GroupAlgebraDescriptor,
    build_E,
    coinvariants_with_q,
    representing_algebra,
    twisted_action_is_valid,
)
from torusdef.errors import CocycleError, ConfigError
from torusdef.gmod import (
    FiniteGroup,
    GModule,
    TwoCocycle,
    group_ring_module,
    validate_2cocycle,
)
from torusdef.intlin import FgAbGroup, matmul


@pytest.fixture
def c2() -> FiniteGroup:
    return FiniteGroup.cyclic(2)


def _z4(group: FiniteGroup) -> GModule:
    return GModule.trivial(group, FgAbGroup.from_invariants([4]))


def _carry(a_part: GModule) -> TwoCocycle:
    return TwoCocycle(a_part, [[[0], [0]], [[0], [1]]])


def test_worked_extension_is_cyclic_of_order_eight(c2: FiniteGroup) -> None:
    a_part = _z4(c2)
    emodule = build_E(c2, a_part, _carry(a_part))
    assert emodule.extension_is_equivariant()
    assert emodule.a_rank == 1
    assert emodule.ambient_rank == 2

    lattice = GModule.lattice(c2, [[[1]], [[1]]])
    qdata = coinvariants_with_q(emodule, lattice)
    assert qdata.em_tensor_m_coinv.describe() == "Z/8"
    assert qdata.h1.describe() == "Z/8"
    assert qdata.laurent_rank == 0
    assert representing_algebra(qdata).render() == "Z[Z/8]"


def test_split_extension(c2: FiniteGroup) -> None:
    a_part = _z4(c2)
    emodule = build_E(c2, a_part, TwoCocycle.zero(a_part))
    lattice = GModule.lattice(c2, [[[1]], [[1]]])
    qdata = coinvariants_with_q(emodule, lattice)
    assert qdata.em_tensor_m_coinv.describe() == "Z/2 x Z/4"


def test_regular_lattice_contributes_a_laurent_variable(c2: FiniteGroup) -> None:
    a_part = GModule.trivial(c2, FgAbGroup.from_invariants([]))
    emodule = build_E(c2, a_part, TwoCocycle.zero(a_part))
    qdata = coinvariants_with_q(emodule, group_ring_module(c2))
    assert qdata.laurent_rank == 1
    assert qdata.h1.is_trivial
    assert qdata.em_tensor_m_coinv.describe() == "Z"

    algebra = representing_algebra(qdata)
    assert algebra.lattice_rank == 2
    assert algebra.coinvariant_rank == 1
    assert algebra.render() == "Z[t1^±1]"


def test_q_is_split_by_its_section(c2: FiniteGroup) -> None:
    a_part = _z4(c2)
    emodule = build_E(c2, a_part, _carry(a_part))
    sign = GModule.sign(c2, (0, 1))
    qdata = coinvariants_with_q(emodule, sign)
    assert qdata.laurent_rank == 1
    through = qdata.q.compose(qdata.split)
    assert through.generator_images() == ((1,),)
    composite = qdata.q.compose(qdata.h1_inclusion)
    assert composite.is_zero_map()


def test_invalid_kappa_is_rejected(c2: FiniteGroup) -> None:
    a_part = _z4(c2)
    bad = TwoCocycle(a_part, [[[1], [0]], [[0], [0]]])
    with pytest.raises(CocycleError):
        build_E(c2, a_part, bad)


def test_twisted_action_needs_a_cocycle() -> None:
    c3 = FiniteGroup.cyclic(3)
    a_part = GModule.trivial(c3, FgAbGroup.from_invariants([0]))
    good = TwoCocycle.zero(a_part)
    bad = TwoCocycle(a_part, [[[0], [0], [0]], [[0], [1], [0]], [[0], [0], [0]]])
    assert twisted_action_is_valid(c3, a_part, good)
    assert not twisted_action_is_valid(c3, a_part, bad)


def test_lattice_over_another_group_is_rejected(c2: FiniteGroup) -> None:
    a_part = _z4(c2)
    emodule = build_E(c2, a_part, TwoCocycle.zero(a_part))
    other = FiniteGroup.cyclic(2)
    with pytest.raises(ConfigError, match="different group"):
        coinvariants_with_q(emodule, GModule.lattice(other, [[[1]], [[1]]]))


def _normalized_tables(
    group: FiniteGroup, modulus: int, rng: random.Random, count: int
) -> list[list[list[list[int]]]]:
    tables = []
    for _ in range(count):
        table = [[[0] for _ in group.elements] for _ in group.elements]
        for d, c in itertools.product(group.nonidentity, repeat=2):
            table[d][c] = [rng.randrange(modulus)]
        tables.append(table)
    return tables


def test_twisted_action_is_valid_exactly_for_cocycles_over_sign_module(c2: FiniteGroup) -> None:
    a_part = GModule(c2, FgAbGroup.from_invariants([4]), [[[1]], [[-1]]])
    valid = []
    for value in range(4):
        kappa = TwoCocycle(a_part, [[[0], [0]], [[0], [value]]])
        is_cocycle = validate_2cocycle(kappa) is None
        assert twisted_action_is_valid(c2, a_part, kappa) == is_cocycle
        if is_cocycle:
            valid.append(value)
    assert valid == [0, 2]


def test_twisted_action_is_valid_exactly_for_cocycles_over_klein_four() -> None:
    k4 = FiniteGroup.klein4()
    a_part = GModule.trivial(k4, FgAbGroup.from_invariants([2]))
    rng = random.Random(11)
    kappas = [TwoCocycle(a_part, table) for table in _normalized_tables(k4, 2, rng, 40)]
    kappas += [
        TwoCocycle.zero(a_part).coboundary_shift([[0], [x], [y], [z]])
        for x, y, z in itertools.product(range(2), repeat=3)
    ]
    outcomes = set()
    for kappa in kappas:
        is_cocycle = validate_2cocycle(kappa) is None
        assert twisted_action_is_valid(k4, a_part, kappa) == is_cocycle
        outcomes.add(is_cocycle)
    assert outcomes == {True, False}


def test_sign_lattice_without_extension_part(c2: FiniteGroup) -> None:
    a_part = GModule.trivial(c2, FgAbGroup.from_invariants([]))
    emodule = build_E(c2, a_part, TwoCocycle.zero(a_part))
    sign = GModule.sign(c2, (0, 1))
    qdata = coinvariants_with_q(emodule, sign)

    assert qdata.em_tensor_m_coinv.describe() == "Z"
    assert qdata.h1.is_trivial
    assert matmul(qdata.augmentation_basis, qdata.q.matrix).tolist() == [[-2]]
    assert representing_algebra(qdata).render() == "Z[t1^±1]"


def test_trivial_coinvariants_render_as_integers() -> None:
    algebra = GroupAlgebraDescriptor(
        base="0",
        base_invariants=(0, ()),
        h1="0",
        h1_invariants=(0, ()),
        laurent_rank=0,
        lattice_rank=1,
        coinvariant_rank=1,
    )
    assert algebra.render() == "Z"

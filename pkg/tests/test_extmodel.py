import math

import pytest

from torusdef.errors import BudgetExceededError, ConfigError
from torusdef.extmodel import (
    CocycleCorrespondence,
    CocycleTable,
    FiniteGroupModel,
    InducedModule,
    UnitGroupRing,
    build_extension,
    coboundary,
    cocycle_from_pair,
    conjugate_rep,
    conjugation_orbits,
    count_h1,
    delta_act_on_cocycle,
    delta_act_on_pair,
    enumerate_z1,
    hom_lattice_into,
    hom_module,
    is_coboundary,
    pair_from_cocycle,
    pseudochar_of_rep,
    rep_from_cocycle,
    z1_invariants_bridge,
)
from torusdef.gmod import FiniteGroup, GModule, TwoCocycle
from torusdef.intlin import FgAbGroup, GroupHom


def _worked_model(kappa_value: int = 1) -> FiniteGroupModel:
    c2 = FiniteGroup.cyclic(2)
    a_part = GModule.trivial(c2, FgAbGroup.from_invariants([4]))
    kappa = TwoCocycle(a_part, [[[0], [0]], [[0], [kappa_value]]])
    return build_extension(c2, a_part, kappa)


@pytest.fixture
def z8() -> FiniteGroupModel:
    return _worked_model()


@pytest.fixture
def v2() -> FgAbGroup:
    return FgAbGroup.from_invariants([2])


def _trivial_lattice(group: FiniteGroup) -> GModule:
    return GModule.lattice(group, [[[1]]] * group.order)


def test_carry_extension_is_cyclic(z8: FiniteGroupModel) -> None:
    assert z8.order == 8
    assert z8.order_census() == {1: 1, 2: 1, 4: 2, 8: 4}
    assert z8.element_order(z8.section(1)) == 8
    assert z8.projection == (0, 1, 0, 1, 0, 1, 0, 1)


def test_split_extension_census() -> None:
    split = _worked_model(kappa_value=0)
    assert split.order_census() == {1: 1, 2: 3, 4: 4}


def test_element_and_split_are_inverse(z8: FiniteGroupModel) -> None:
    for g in z8.elements:
        a, d = z8.split(g)
        assert z8.element(a, d) == g


def test_extension_needs_finite_kernel() -> None:
    c2 = FiniteGroup.cyclic(2)
    a_part = GModule.trivial(c2, FgAbGroup.free(1))
    with pytest.raises(ConfigError, match="finite"):
        build_extension(c2, a_part, TwoCocycle.zero(a_part))


def test_enumerate_z1_counts_homomorphisms(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    module = hom_lattice_into(_trivial_lattice(z8.delta), v2).pullback(z8, z8.projection)
    z1 = enumerate_z1(z8, module)
    assert len(z1) == 2
    assert all(c.is_cocycle() for c in z1)
    assert count_h1(z8, module, len(z1)) == 2
    assert conjugation_orbits(z1) == 2


def test_enumerate_z1_respects_budget(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    module = hom_lattice_into(_trivial_lattice(z8.delta), v2).pullback(z8, z8.projection)
    with pytest.raises(BudgetExceededError) as info:
        enumerate_z1(z8, module, budget=3)
    assert info.value.required == 4
    assert info.value.stage == "enumerate_z1"


def test_coboundaries_in_a_sign_module(z8: FiniteGroupModel) -> None:
    sign = GModule.sign(z8.delta, (0, 1))
    module = hom_lattice_into(sign, FgAbGroup.from_invariants([4])).pullback(z8, z8.projection)
    z1 = enumerate_z1(z8, module)
    boundaries = [c for c in z1 if is_coboundary(c)]
    assert len(boundaries) == 2
    assert count_h1(z8, module, len(z1)) == conjugation_orbits(z1)


@pytest.mark.parametrize(
    "modulus, expected",
    [(3, "Z/2"), (5, "Z/4"), (8, "Z/2 x Z/2"), (9, "Z/6"), (15, "Z/2 x Z/4")],
)
def test_unit_groups(modulus: int, expected: str) -> None:
    ring = UnitGroupRing(modulus)
    assert ring.units.describe() == expected
    units = [u for u in range(1, modulus) if math.gcd(u, modulus) == 1]
    assert {ring.exp(ring.log(u)) for u in units} == set(units)
    for u in units:
        assert ring.exp(ring.log(u)) == u


def test_unit_group_needs_modulus_two() -> None:
    with pytest.raises(ConfigError, match="modulus"):
        UnitGroupRing(1)


def test_shapiro_pair_round_trip(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    phi = GroupHom(z8.a_module.underlying, v2, [[1]])
    alpha = GroupHom(FgAbGroup.free(1), v2, [[1]])
    induced = InducedModule(z8, v2)
    cocycle = cocycle_from_pair(phi, alpha, z8, induced)
    assert cocycle.is_cocycle()
    back_phi, back_alpha = pair_from_cocycle(cocycle, z8)
    assert back_phi == phi
    assert back_alpha == alpha


def test_pair_needs_an_induced_module(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    module = GModule.trivial(z8, v2)
    table = CocycleTable(z8, module, ((0,),) * z8.order)
    with pytest.raises(ConfigError, match="induced"):
        pair_from_cocycle(table, z8)


def test_bridge_lands_in_invariants(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    bridge = z1_invariants_bridge(z8, GModule.sign(z8.delta, (0, 1)), v2)
    for cocycle in enumerate_z1(z8, bridge.module):
        lifted = bridge.forward(cocycle)
        assert lifted.is_cocycle()
        assert bridge.is_invariant(lifted)
        assert bridge.backward(lifted).values == cocycle.values


def test_delta_action_matches_on_both_sides(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    corr = CocycleCorrespondence(z8, _trivial_lattice(z8.delta), v2)
    phi = GroupHom(z8.a_module.underlying, v2, [[1]])
    alpha = GroupHom(FgAbGroup.free(1), v2, [[1]])
    induced = InducedModule(z8, v2)
    for d in z8.delta.elements:
        moved_phi, moved_alpha = delta_act_on_pair(d, phi, alpha, corr.emodule)
        expected = cocycle_from_pair(moved_phi, moved_alpha, z8, induced)
        actual = delta_act_on_cocycle(d, cocycle_from_pair(phi, alpha, z8, induced))
        assert actual.values == expected.values


@pytest.mark.parametrize("lattice_kind", ["trivial", "sign"])
def test_correspondence_is_a_bijection(z8: FiniteGroupModel, lattice_kind: str) -> None:
    lattice = (
        _trivial_lattice(z8.delta)
        if lattice_kind == "trivial"
        else GModule.sign(z8.delta, (0, 1))
    )
    units = UnitGroupRing(5).units
    corr = CocycleCorrespondence(z8, lattice, units)
    z1 = enumerate_z1(z8, corr.module)
    count, homs = corr.coinvariant_homs()
    assert len(z1) == count

    images = {corr.to_coinvariant_hom(c) for c in z1}
    assert images == set(homs)
    for cocycle in z1:
        hom = corr.to_coinvariant_hom(cocycle)
        assert corr.from_coinvariant_hom(hom).values == cocycle.values


def test_coboundaries_factor_through_q(z8: FiniteGroupModel) -> None:
    corr = CocycleCorrespondence(z8, GModule.sign(z8.delta, (0, 1)), FgAbGroup.from_invariants([4]))
    for cocycle in enumerate_z1(z8, corr.module):
        if is_coboundary(cocycle):
            assert corr.factors_through_q(corr.to_coinvariant_hom(cocycle))


def test_representations_from_cocycles(z8: FiniteGroupModel) -> None:
    corr = CocycleCorrespondence(z8, GModule.sign(z8.delta, (0, 1)), FgAbGroup.from_invariants([4]))
    z1 = enumerate_z1(z8, corr.module)
    for cocycle in z1:
        rho = rep_from_cocycle(cocycle)
        assert rho.is_homomorphism()
        assert rho.lies_over_projection()
        assert rho.cocycle().values == cocycle.values

        conj = conjugate_rep(rho, (1,))
        assert conj.is_homomorphism()
        assert is_coboundary(conj.cocycle() - rho.cocycle())
        assert pseudochar_of_rep(conj, corr) == pseudochar_of_rep(rho, corr)


def test_conjugation_shifts_cocycle_by_coboundary(z8: FiniteGroupModel) -> None:
    corr = CocycleCorrespondence(z8, GModule.sign(z8.delta, (0, 1)), FgAbGroup.from_invariants([4]))
    module = corr.module
    rho = rep_from_cocycle(enumerate_z1(z8, module)[-1])
    for x in module.underlying.elements():
        conj = conjugate_rep(rho, x)
        assert conj.lies_over_projection()
        assert (conj.cocycle() - rho.cocycle()).values == coboundary(z8, module, x).values

    zero = module.underlying.zero()
    assert conjugate_rep(rho, zero).images == rho.images


def test_rep_from_non_cocycle_is_rejected(z8: FiniteGroupModel, v2: FgAbGroup) -> None:
    module = GModule.trivial(z8, v2)
    values = ((0,),) + ((1,),) * (z8.order - 1)
    with pytest.raises(ConfigError, match="not a 1-cocycle"):
        rep_from_cocycle(CocycleTable(z8, module, values))


def test_hom_from_sign_lattice_into_units_mod_five(z8: FiniteGroupModel) -> None:
    module = hom_module(GModule.sign(z8.delta, (0, 1)), UnitGroupRing(5))
    underlying = module.underlying
    assert underlying.describe() == "Z/4"
    for x in underlying.elements():
        moved = underlying.reduce(module.act(1, underlying.lift(x)))
        assert moved == underlying.neg(x)

    over_model = hom_module(GModule.sign(z8.delta, (0, 1)), UnitGroupRing(5), z8)
    assert over_model.group is z8
    assert over_model.underlying.describe() == "Z/4"


def test_cocycles_of_order_two_in_inverted_z4() -> None:
    c2 = FiniteGroup.cyclic(2)
    a_part = GModule.trivial(c2, FgAbGroup.from_invariants([]))
    model = build_extension(c2, a_part, TwoCocycle.zero(a_part))
    inverted = GModule(model, FgAbGroup.from_invariants([4]), [[[1]], [[-1]]])
    assert len(enumerate_z1(model, inverted)) == 4


def test_cocycles_into_induced_module_count(z8: FiniteGroupModel) -> None:
    induced = InducedModule(z8, FgAbGroup.from_invariants([4]))
    assert len(enumerate_z1(z8, induced)) == 16


def test_parallel_enumeration_matches_serial(z8: FiniteGroupModel) -> None:
    induced = InducedModule(z8, FgAbGroup.from_invariants([4]))
    serial = enumerate_z1(z8, induced)
    parallel = enumerate_z1(z8, induced, workers=3)
    assert [c.values for c in parallel] == [c.values for c in serial]

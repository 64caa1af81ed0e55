"""Deformation-ring answers assembled from the algebraic side.

Abstract mode reads everything off (E (x) M)_G; local mode takes the standard
invariants of a p-adic Galois extension (p, [F:Q_p], Gal, mu, cyclotomic
character) and evaluates the closed-form rank and torsion formulas, which are
then checked against the finite model Z/p^a(chi) + Z + Z[G]^d.
"""

import itertools
import math
from functools import cached_property
from typing import Literal, NamedTuple

from loguru import logger
from pydantic import BaseModel, field_validator, model_validator
from sympy import factorint, isprime

from torusdef.ee import QData, build_E, coinvariants_with_q
from torusdef.errors import ConfigError, InvariantViolation
from torusdef.gmod import (
    FiniteGroup,
    GModule,
    TwoCocycle,
    carry_cocycle,
    coinvariants,
    group_ring_module,
    invariants,
)
from torusdef.intlin import FgAbGroup, identity, pro_p_part, zeros

GroupSpec = str | list[list[int]]


def build_group(spec: GroupSpec) -> FiniteGroup:
    if isinstance(spec, str):
        return FiniteGroup.from_spec(spec)
    return FiniteGroup(spec)


def _power_of(p: int, n: int) -> bool:
    return n > 1 and set(factorint(n)) == {p}


class ProPModule(BaseModel):
    """mu + Z_p^r"""

    p: int
    free_rank: int
    torsion: list[int]

    @model_validator(mode="after")
    def _check_chain(self) -> "ProPModule":
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not a prime")
        if self.free_rank < 0:
            raise ValueError("free_rank must be non-negative")
        for t in self.torsion:
            if not _power_of(self.p, t):
                raise ValueError(f"torsion entry {t} is not a power of {self.p}")
        for a, b in itertools.pairwise(self.torsion):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        return self

    @property
    def torsion_order(self) -> int:
        return math.prod(self.torsion)

    def describe(self) -> str:
        parts = [f"Z/{t}" for t in self.torsion]
        if self.free_rank:
            parts.append(f"Z_{self.p}^{self.free_rank}" if self.free_rank > 1 else f"Z_{self.p}")
        return " x ".join(parts) if parts else "0"


def pro_p(group: FgAbGroup, p: int) -> ProPModule:
    r, torsion = pro_p_part(group, p)
    return ProPModule(p=p, free_rank=r, torsion=torsion)


def roots_of_unity_note(torsion: list[int]) -> str:
    m = math.prod(torsion)
    if m == 1:
        return "no roots of unity required"
    return f"O must contain the {m}-th roots of unity"


class RingDescriptor(BaseModel):
    """O[mu][[x_1..x_r]][t_1^±1..t_s^±1]"""

    name: str
    torsion_mu: list[int]
    series_vars: int
    laurent_vars: int
    base_note: str
    complete_intersection: bool = True

    @property
    def relative_dimension(self) -> int:
        return self.series_vars + self.laurent_vars

    @property
    def component_count(self) -> int:
        return math.prod(self.torsion_mu)

    def render(self) -> str:
        ring = "O"
        if self.torsion_mu:
            ring += "[" + " x ".join(f"Z/{t}" for t in self.torsion_mu) + "]"
        if self.series_vars:
            ring += "[[" + ",".join(f"x{i}" for i in range(1, self.series_vars + 1)) + "]]"
        if self.laurent_vars:
            ring += "[" + ",".join(f"t{i}^±1" for i in range(1, self.laurent_vars + 1)) + "]"
        return ring


class RingDescriptors(NamedTuple):
    framed: RingDescriptor
    pseudo: RingDescriptor
    generic: RingDescriptor

    def headline(self) -> str:
        return f"R^□ ≅ {self.framed.render()}; components: {self.framed.component_count}"

    def relations(self) -> list[str]:
        s = self.generic.laurent_vars
        if not s:
            return ["R^□ ≅ R^ps", "A^gen ≅ R^ps"]
        ts = ",".join(f"t{i}" for i in range(1, s + 1))
        laurent = ",".join(f"t{i}^±1" for i in range(1, s + 1))
        return [f"R^□ ≅ R^ps[[{ts}]]", f"A^gen ≅ R^ps[{laurent}]"]


def ring_descriptors(n_ps: ProPModule, s: int) -> RingDescriptors:
    if s < 0:
        raise ValueError("s must be non-negative")
    mu, r = list(n_ps.torsion), n_ps.free_rank
    note = roots_of_unity_note(mu)
    descs = RingDescriptors(
        framed=RingDescriptor(
            name="R^□", torsion_mu=mu, series_vars=r + s, laurent_vars=0, base_note=note
        ),
        pseudo=RingDescriptor(
            name="R^ps", torsion_mu=mu, series_vars=r, laurent_vars=0, base_note=note
        ),
        generic=RingDescriptor(
            name="A^gen", torsion_mu=mu, series_vars=r, laurent_vars=s, base_note=note
        ),
    )
    counts = {d.component_count for d in descs}
    if descs.framed.relative_dimension != descs.pseudo.relative_dimension + s or len(counts) != 1:
        raise InvariantViolation("Ring descriptors are not mutually consistent")
    return descs


def abstract_descriptors(qdata: QData, p: int) -> tuple[ProPModule, RingDescriptors]:
    """Descriptors from H_1 and the Laurent rank of (E (x) M)_G"""
    n_ps = pro_p(qdata.h1, p)
    return n_ps, ring_descriptors(n_ps, qdata.laurent_rank)


# Components


class ComponentTorsor(BaseModel):
    """Irreducible components of O[[mu + Z_p^r]] as a torsor under X(mu)"""

    p: int | None
    mu: list[int]
    characters: list[tuple[int, ...]]
    labels: list[tuple[int, ...]]
    action: list[list[int]]
    basepoint: int | None = None
    roots_of_unity: str

    @property
    def count(self) -> int:
        return len(self.labels)

    def is_faithful(self) -> bool:
        return all(
            any(row[x] != x for x in range(self.count))
            for chi, row in zip(self.characters, self.action, strict=True)
            if any(chi)
        )

    def is_transitive(self) -> bool:
        return {row[0] for row in self.action} == set(range(self.count))

    def is_free(self) -> bool:
        return all(
            row[x] != x
            for chi, row in zip(self.characters, self.action, strict=True)
            if any(chi)
            for x in range(self.count)
        )

    def is_regular(self) -> bool:
        return self.is_faithful() and self.is_transitive() and self.is_free()


def components(mu: list[int], canonical_basepoint: bool = False) -> ComponentTorsor:
    """Labels form an X(mu)-torsor; a basepoint is marked only in the split case"""
    if any(t < 1 for t in mu):
        raise ConfigError(f"mu = {mu} must consist of positive orders")
    # a factor 1 = p^0 is the trivial cyclic group
    entries = sorted(t for t in mu if t != 1)
    p = None
    if entries:
        primes = {q for t in entries for q in factorint(t)}
        if len(primes) != 1:
            raise ConfigError(f"mu = {mu} must consist of powers of a single prime")
        p = primes.pop()
    group = FgAbGroup.from_invariants(entries)
    elements = list(group.elements()) if entries else [()]
    index = {x: i for i, x in enumerate(elements)}
    action = [
        [index[tuple((a + b) % t for a, b, t in zip(chi, x, entries, strict=True))] for x in elements]
        for chi in elements
    ]
    torsor = ComponentTorsor(
        p=p,
        mu=entries,
        characters=elements,
        labels=elements,
        action=action,
        basepoint=0 if canonical_basepoint else None,
        roots_of_unity=roots_of_unity_note(entries),
    )
    if torsor.count != math.prod(entries) or not torsor.is_regular():
        raise InvariantViolation(f"X(mu) does not act regularly on the components for mu = {mu}")
    return torsor


# Local-field presets


class LatticeSpec(BaseModel):
    """A G-lattice: rank plus "trivial" or one integer matrix per group element"""

    rank: int
    action: Literal["trivial"] | list[list[list[int]]]

    @field_validator("rank")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("rank must be non-negative")
        return v

    def build(self, group: FiniteGroup) -> GModule:
        if self.action == "trivial":
            return GModule(group, FgAbGroup.free(self.rank), [identity(self.rank)] * group.order)
        if len(self.action) != group.order:
            raise ConfigError(
                f"M needs {group.order} action matrices, got {len(self.action)}"
            )
        mats = []
        for g, mat in enumerate(self.action):
            if len(mat) != self.rank or any(len(row) != self.rank for row in mat):
                raise ConfigError(f"Action matrix of element {g} must be {self.rank}x{self.rank}")
            mats.append(mat if self.rank else zeros(0, 0))
        return GModule(group, FgAbGroup.free(self.rank), mats)


class LocalFieldPreset(BaseModel):
    """Standard invariants of a Galois extension E/F of p-adic fields"""

    model_config = {"arbitrary_types_allowed": True}

    p: int
    d: int
    delta: GroupSpec
    a: int
    chi_cyc: list[int]
    lattice: LatticeSpec

    @model_validator(mode="after")
    def _check(self) -> "LocalFieldPreset":
        if not isprime(self.p):
            raise ValueError(f"p = {self.p} is not a prime")
        if self.d < 1:
            raise ValueError("d = [F:Q_p] must be at least 1")
        if self.a < 0:
            raise ValueError("a must be non-negative")
        group = self.group
        if len(self.chi_cyc) != group.order:
            raise ValueError(f"chi_cyc needs {group.order} values, got {len(self.chi_cyc)}")
        n = self.p**self.a
        if self.a == 0 and any(c != 1 for c in self.chi_cyc):
            raise ValueError("a = 0 forces chi_cyc to be trivial")
        if self.a and any(math.gcd(c, n) != 1 for c in self.chi_cyc):
            raise ValueError(f"chi_cyc values must be units mod {n}")
        for g, h in itertools.product(group.elements, repeat=2):
            if (self.chi_cyc[g] * self.chi_cyc[h] - self.chi_cyc[group.mul(g, h)]) % n:
                raise ValueError(f"chi_cyc is not a homomorphism at ({g}, {h})")
        self.lattice_module  # noqa: B018
        return self

    @cached_property
    def group(self) -> FiniteGroup:
        return build_group(self.delta)

    @cached_property
    def lattice_module(self) -> GModule:
        return self.lattice.build(self.group)

    @property
    def mu_order(self) -> int:
        return self.p**self.a

    def roots_module(self) -> GModule | None:
        """mu_{p^inf}(E) = Z/p^a with the cyclotomic action, or None when a = 0"""
        if not self.a:
            return None
        n = self.mu_order
        return GModule(
            self.group,
            FgAbGroup.from_invariants([n]),
            [[[c % n]] for c in self.chi_cyc],
        )


def local_field_model(preset: LocalFieldPreset) -> GModule:
    """Z/p^a(chi) + Z + Z[G]^d, read as a Z_p-module"""
    group = preset.group
    model = GModule(group, FgAbGroup.free(1), [identity(1)] * group.order)
    roots = preset.roots_module()
    if roots is not None:
        model = roots.direct_sum(model)
    regular = group_ring_module(group)
    for _ in range(preset.d):
        model = model.direct_sum(regular)
    logger.debug(f"Local model {model.underlying.describe()} over {group.name}")
    return model


class ClosedForm(NamedTuple):
    r: int
    s: int
    m: int
    mu_delta: FgAbGroup


def mu_invariants(preset: LocalFieldPreset) -> FgAbGroup:
    """(mu_{p^inf}(E) (x) M)^G under the diagonal action"""
    roots = preset.roots_module()
    if roots is None:
        return FgAbGroup.trivial()
    return invariants(roots.tensor(preset.lattice_module))


def closed_form_invariants(preset: LocalFieldPreset) -> ClosedForm:
    lattice = preset.lattice_module
    rank_m = lattice.rank
    rank_coinv = coinvariants(lattice).free_rank
    r = rank_m * preset.d + rank_coinv
    s = rank_m - rank_coinv
    return ClosedForm(r=r, s=s, m=r + s, mu_delta=mu_invariants(preset))


def local_descriptors(preset: LocalFieldPreset) -> tuple[ProPModule, RingDescriptors]:
    closed = closed_form_invariants(preset)
    torsion = pro_p_part(closed.mu_delta, preset.p)[1]
    n_ps = ProPModule(p=preset.p, free_rank=closed.r, torsion=torsion)
    return n_ps, ring_descriptors(n_ps, closed.s)


# Model-side checks


def nonzero_kappa(module: GModule, value_index: int) -> TwoCocycle | None:
    """A carry cocycle with values in a trivial Z summand, nonzero in H^2.

    The phase is a surjective character onto the largest cyclic quotient that
    has one; None when the group has no nontrivial cyclic quotient.
    """
    group = module.group
    value = [0] * module.ambient_rank
    value[value_index] = 1
    for n in range(group.order, 1, -1):
        for phase in group.characters(n):
            if set(phase) == set(range(n)):
                return carry_cocycle(module, phase, n, value)
    return None


class ModelInvariants(NamedTuple):
    invariant_rank: int
    invariant_torsion: list[int]
    coinvariant_rank: int
    e_ranks: dict[str, int]


def model_invariants(preset: LocalFieldPreset) -> ModelInvariants:
    """Ranks and torsion read off the finite model instead of the formulas"""
    gamma = local_field_model(preset)
    lattice = preset.lattice_module
    product = gamma.tensor(lattice)
    inv = invariants(product)
    coinv = coinvariants(product)
    kappas: dict[str, TwoCocycle] = {"kappa=0": TwoCocycle.zero(gamma)}
    carry = nonzero_kappa(gamma, 1 if preset.a else 0)
    if carry is not None:
        kappas["kappa=carry"] = carry
    e_ranks = {}
    for label, kappa in kappas.items():
        qdata = coinvariants_with_q(build_E(preset.group, gamma, kappa), lattice)
        e_ranks[label] = pro_p(qdata.em_tensor_m_coinv, preset.p).free_rank
    return ModelInvariants(
        invariant_rank=inv.free_rank,
        invariant_torsion=pro_p_part(inv, preset.p)[1],
        coinvariant_rank=coinv.free_rank,
        e_ranks=e_ranks,
    )

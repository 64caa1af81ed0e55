"""Finite extension groups A x_kappa G and the brute-force side of every identity.

Elements of the model are pairs (a, d) stored at index ``a_index * |G| + d``;
the product is (a, d)(b, e) = (a + d.b + kappa(d, e), de) and the section
d -> (0, d) has index d. Coefficient modules are finite GModules over the
model; cocycles are tables of Smith coordinates indexed by group elements.
"""

import itertools
import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from loguru import logger
from sympy import totient

from torusdef.ee import EModule, QData, build_E, coinvariants_with_q
from torusdef.errors import BudgetExceededError, ConfigError, InvariantViolation
from torusdef.gmod import FiniteGroup, GModule, TwoCocycle, invariants
from torusdef.intlin import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    apply,
    hom_into_finite,
    hstack,
    identity,
    kron,
    matmul,
    zeros,
)

DEFAULT_BUDGET = 10**6


class FiniteGroupModel(FiniteGroup):
    """The extension of G by a finite module A classified by kappa"""

    def __init__(self, delta: FiniteGroup, a_module: GModule, kappa: TwoCocycle) -> None:
        a = a_module.underlying
        elems = list(a.elements())
        index = {x: i for i, x in enumerate(elems)}
        o = delta.order
        act = [
            [index[a.reduce(a_module.act(d, a.lift(x)))] for x in elems]
            for d in delta.elements
        ]
        add = [[index[a.add(x, y)] for y in elems] for x in elems]
        kap = [[index[kappa.reduced(d, c)] for c in delta.elements] for d in delta.elements]
        size = len(elems) * o
        table = [[0] * size for _ in range(size)]
        for i, d, j, e in itertools.product(range(len(elems)), range(o), range(len(elems)), range(o)):
            table[i * o + d][j * o + e] = add[add[i][act[d][j]]][kap[d][e]] * o + delta.mul(d, e)
        super().__init__(table, name=f"({a.describe()}).{delta.name}")
        self.delta = delta
        self.a_module = a_module
        self.kappa = kappa
        self.a_elements = elems
        self._a_index = index
        self.projection = tuple(g % o for g in range(size))

    def section(self, d: int) -> int:
        return d

    def split(self, g: int) -> tuple[tuple[int, ...], int]:
        o = self.delta.order
        return self.a_elements[g // o], g % o

    def element(self, a: Sequence[int], d: int) -> int:
        return self._a_index[tuple(a)] * self.delta.order + d

    def a_generators(self) -> list[int]:
        """Images of the Smith generators of A"""
        a = self.a_module.underlying
        gens = []
        for i in range(len(a.orders)):
            unit = [0] * len(a.orders)
            unit[i] = 1
            gens.append(self.element(unit, 0))
        return gens

    def enumeration_generators(self) -> list[int]:
        return self.a_generators() + [self.section(d) for d in self.delta.generators]

    def order_census(self) -> dict[int, int]:
        census: dict[int, int] = {}
        for g in self.elements:
            k = self.element_order(g)
            census[k] = census.get(k, 0) + 1
        return dict(sorted(census.items()))


def build_extension(delta: FiniteGroup, a_module: GModule, kappa: TwoCocycle) -> FiniteGroupModel:
    if a_module.group is not delta or kappa.module is not a_module:
        raise ConfigError("kappa, A and the group do not belong together")
    if not a_module.underlying.is_finite:
        raise ConfigError(f"A = {a_module.underlying.describe()} must be finite")
    kappa.require_valid()
    model = FiniteGroupModel(delta, a_module, kappa)
    logger.debug(f"Built {model.name} of order {model.order}")
    return model


# Cocycles


@dataclass(frozen=True)
class CocycleTable:
    model: FiniteGroupModel
    coefficients: GModule
    values: tuple[tuple[int, ...], ...]

    def value(self, g: int) -> tuple[int, ...]:
        return self.values[g]

    def ambient(self, g: int) -> IntMatrix:
        return self.coefficients.underlying.lift(self.values[g])

    def is_cocycle(self) -> bool:
        t = self.coefficients.underlying
        if any(self.values[0]):
            return False
        for g, h in itertools.product(self.model.elements, repeat=2):
            moved = t.reduce(self.coefficients.act(g, self.ambient(h)))
            if t.add(self.values[g], moved) != self.values[self.model.mul(g, h)]:
                return False
        return True

    def __add__(self, other: "CocycleTable") -> "CocycleTable":
        t = self.coefficients.underlying
        vals = tuple(t.add(x, y) for x, y in zip(self.values, other.values, strict=True))
        return CocycleTable(self.model, self.coefficients, vals)

    def __sub__(self, other: "CocycleTable") -> "CocycleTable":
        t = self.coefficients.underlying
        vals = tuple(t.add(x, t.neg(y)) for x, y in zip(self.values, other.values, strict=True))
        return CocycleTable(self.model, self.coefficients, vals)


class _FiniteArithmetic:
    """Element tables of a finite module, elements numbered in Smith order"""

    def __init__(self, module: GModule) -> None:
        t = module.underlying
        self.group = t
        self.elements = list(t.elements())
        self.index = {x: i for i, x in enumerate(self.elements)}
        self.act = [
            [self.index[t.reduce(module.act(g, t.lift(x)))] for x in self.elements]
            for g in module.group.elements
        ]
        n = len(self.elements)
        self._add = (
            [[self.index[t.add(x, y)] for y in self.elements] for x in self.elements]
            if n <= 256
            else None
        )

    def add(self, i: int, j: int) -> int:
        if self._add is not None:
            return self._add[i][j]
        return self.index[self.group.add(self.elements[i], self.elements[j])]


def _cayley_edges(model: FiniteGroup, gens: Sequence[int]) -> list[tuple[int, int, int, bool]]:
    """Breadth-first edges (g, generator slot, g*s, first visit of g*s)"""
    seen = {0}
    queue = [0]
    edges = []
    while queue:
        g = queue.pop(0)
        for k, s in enumerate(gens):
            h = model.mul(g, s)
            first = h not in seen
            if first:
                seen.add(h)
                queue.append(h)
            edges.append((g, k, h, first))
    if len(seen) != model.order:
        raise InvariantViolation("Enumeration generators do not generate the group")
    return edges


def _z1_slice(
    model: FiniteGroupModel, module: GModule, gens: Sequence[int], leads: Sequence[int]
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Cocycles whose value on the first generator lies in ``leads``, keyed by candidate"""
    arith = _FiniteArithmetic(module)
    edges = _cayley_edges(model, gens)
    card = len(arith.elements)
    found: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    candidates: Iterator[tuple[int, ...]] = iter([()])
    if gens:
        rest = itertools.product(range(card), repeat=len(gens) - 1)
        candidates = ((lead, *tail) for lead, tail in itertools.product(leads, rest))
    for n_tried, cand in enumerate(candidates):
        if n_tried and n_tried % 50_000 == 0:
            logger.trace(f"enumerate_z1: {n_tried} candidates in this slice")
        phi = [0] * model.order
        ok = True
        for g, k, h, first in edges:
            val = arith.add(phi[g], arith.act[g][cand[k]])
            if first:
                phi[h] = val
            elif phi[h] != val:
                ok = False
                break
        if ok:
            found.append((cand, tuple(phi)))
    return found


def enumerate_z1(
    model: FiniteGroupModel, module: GModule, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> list[CocycleTable]:
    """All 1-cocycles, found by propagating generator values over the Cayley graph.

    With ``workers > 1`` the values on the first generator are split across
    processes; the result is ordered as in the serial run.
    """
    if module.group is not model:
        raise ConfigError("The coefficient module is not a module over the model")
    gens = model.enumeration_generators()
    card = module.underlying.cardinality
    required = card ** len(gens)
    if required > budget:
        raise BudgetExceededError("enumerate_z1", required, budget)
    if 2 * required > budget:
        logger.warning(f"enumerate_z1 uses {required} of a budget of {budget} candidates")
    slices = min(workers, card) if gens else 1
    if slices > 1:
        parts = [range(i, card, slices) for i in range(slices)]
        with ProcessPoolExecutor(max_workers=slices) as pool:
            chunks = pool.map(
                _z1_slice,
                [model] * slices,
                [module] * slices,
                [gens] * slices,
                parts,
            )
            hits = sorted(hit for chunk in chunks for hit in chunk)
    else:
        hits = _z1_slice(model, module, gens, range(card))
    elements = list(module.underlying.elements())
    found = [
        CocycleTable(model, module, tuple(elements[i] for i in phi)) for _, phi in hits
    ]
    logger.debug(f"|Z^1| = {len(found)} from {required} candidates on {slices} worker(s)")
    return found


def coboundary(model: FiniteGroupModel, module: GModule, x: Sequence[int]) -> CocycleTable:
    """g -> x - g.x"""
    t = module.underlying
    lifted = t.lift(x)
    values = tuple(t.reduce(lifted - module.act(g, lifted)) for g in model.elements)
    return CocycleTable(model, module, values)


def is_coboundary(table: CocycleTable) -> bool:
    t = table.coefficients.underlying
    return any(
        coboundary(table.model, table.coefficients, x).values == table.values
        for x in t.elements()
    )


def count_h1(model: FiniteGroupModel, module: GModule, z1_count: int) -> int:
    """|H^1| = |Z^1| / |B^1| with |B^1| = |T| / |T^G|"""
    b1 = module.underlying.cardinality // invariants(module).cardinality
    if z1_count % b1:
        raise InvariantViolation(f"|B^1| = {b1} does not divide |Z^1| = {z1_count}")
    return z1_count // b1


def conjugation_orbits(cocycles: Sequence[CocycleTable]) -> int:
    """Number of classes of ``cocycles`` modulo coboundaries"""
    if not cocycles:
        return 0
    model, module = cocycles[0].model, cocycles[0].coefficients
    shifts = {coboundary(model, module, x) for x in module.underlying.elements()}
    seen: set[tuple[tuple[int, ...], ...]] = set()
    orbits = 0
    for c in cocycles:
        if c.values in seen:
            continue
        orbits += 1
        seen.update((c + b).values for b in shifts)
    return orbits


# Unit groups and Hom modules


class UnitGroupRing:
    """The unit group of Z/n as an abstract group with exp and log tables"""

    def __init__(self, modulus: int) -> None:
        if modulus < 2:
            raise ConfigError(f"Coefficient ring Z/{modulus} must have modulus >= 2")
        units = [u for u in range(1, modulus) if math.gcd(u, modulus) == 1]
        gens: list[int] = []
        span: dict[int, tuple[int, ...]] = {1 % modulus: ()}
        columns: list[list[int]] = []
        for u in units:
            if u in span:
                continue
            e, x = 1, u
            while x not in span:
                x = x * u % modulus
                e += 1
            columns = [col + [0] for col in columns]
            columns.append([-c for c in span[x]] + [e])
            grown: dict[int, tuple[int, ...]] = {}
            for h, vec in span.items():
                y = h
                for t in range(e):
                    grown[y] = (*vec, t)
                    y = y * u % modulus
            gens.append(u)
            span = grown
        k = len(gens)
        rel = zeros(k, k)
        for j, col in enumerate(columns):
            rel[:, j] = col
        self.modulus = modulus
        self.generators = tuple(gens)
        self.units = FgAbGroup(rel, ambient_rank=k)
        self._exponents = span
        if len(units) != int(totient(modulus)) or self.units.cardinality != len(units):
            raise InvariantViolation(f"Unit group of Z/{modulus} has the wrong order")
        self._exp = {self.log(u): u for u in units}
        if len(self._exp) != len(units):
            raise InvariantViolation(f"Discrete log table of Z/{modulus} is not a bijection")

    def log(self, unit: int) -> tuple[int, ...]:
        return self.units.reduce(self._exponents[unit % self.modulus])

    def exp(self, coords: Sequence[int]) -> int:
        return self._exp[tuple(coords)]

    def __repr__(self) -> str:
        return f"UnitGroupRing(Z/{self.modulus}: {self.units.describe()})"


def hom_lattice_into(lattice: GModule, target: FgAbGroup) -> GModule:
    """Hom(M, V) for a trivial-action V, with (d.w)(m) = w(d^-1 m).

    An element w is stored as the blocks w(e_1), ..., w(e_n).
    """
    if not lattice.is_lattice:
        raise ConfigError("M must be a free Z-module")
    n, k = lattice.ambient_rank, target.ambient_rank
    group = lattice.group
    underlying = FgAbGroup(kron(identity(n), target.relations), ambient_rank=n * k)
    mats = [kron(lattice.action[group.inv(d)].T, identity(k)) for d in group.elements]
    return GModule(group, underlying, mats)


def hom_module(
    lattice: GModule, ring: UnitGroupRing, model: FiniteGroupModel | None = None
) -> GModule:
    """Hom(M, R^x), over the model through its projection when one is given"""
    base = hom_lattice_into(lattice, ring.units)
    return base if model is None else base.pullback(model, model.projection)


class InducedModule(GModule):
    """Functions G -> V with [g.f](c) = f(c pi(g)); f is stored blockwise by c.

    ``base`` is an optional G-module structure on V used by the star action
    [d*f](c) = d.f(d^-1 c).
    """

    def __init__(
        self, model: FiniteGroupModel, coefficients: FgAbGroup, base: GModule | None = None
    ) -> None:
        delta = model.delta
        o, k = delta.order, coefficients.ambient_rank
        underlying = FgAbGroup(kron(identity(o), coefficients.relations), ambient_rank=o * k)
        eye = identity(k)
        mats = []
        for g in model.elements:
            mat = zeros(o * k, o * k)
            for c in delta.elements:
                src = delta.mul(c, model.projection[g])
                mat[c * k : (c + 1) * k, src * k : (src + 1) * k] = eye
            mats.append(mat)
        super().__init__(model, underlying, mats)
        self.model = model
        self.coefficients = coefficients
        self.base = base

    @property
    def block_rank(self) -> int:
        return self.coefficients.ambient_rank

    def block(self, x: IntMatrix, c: int) -> IntMatrix:
        k = self.block_rank
        return x[c * k : (c + 1) * k]

    def star_matrix(self, d: int) -> IntMatrix:
        delta = self.model.delta
        k = self.block_rank
        w = self.base.action[d] if self.base is not None else identity(k)
        mat = zeros(delta.order * k, delta.order * k)
        for c in delta.elements:
            src = delta.mul(delta.inv(d), c)
            mat[c * k : (c + 1) * k, src * k : (src + 1) * k] = w
        return mat


# Shapiro section and its inverse


def _shapiro_vectors(phi: GroupHom, model: FiniteGroupModel) -> list[IntMatrix]:
    a = model.a_module.underlying
    if phi.source.ambient_rank != a.ambient_rank:
        raise ConfigError("phi must be defined on A")
    delta = model.delta
    k = phi.target.ambient_rank
    vectors = []
    for g in model.elements:
        vec = np.zeros(delta.order * k, dtype=object)
        for c in delta.elements:
            back = model.section(delta.mul(c, model.projection[g]))
            x = model.mul(model.mul(model.section(c), g), model.inv(back))
            a_coords, d = model.split(x)
            if d != 0:
                raise InvariantViolation("Coset representative product left A")
            vec[c * k : (c + 1) * k] = phi.apply(a.lift(a_coords))
        vectors.append(vec)
    return vectors


def _augmentation_vectors(alpha: GroupHom, model: FiniteGroupModel) -> list[IntMatrix]:
    """b_alpha(g)(c) = f(c pi(g)) - f(c) with f(c) = alpha(c - 1)"""
    delta = model.delta
    if alpha.source.ambient_rank != delta.order - 1:
        raise ConfigError("alpha must be defined on the augmentation ideal")
    k = alpha.target.ambient_rank
    f = {0: np.zeros(k, dtype=object)}
    for i, c in enumerate(delta.nonidentity):
        f[c] = np.asarray(alpha.matrix[:, i], dtype=object)
    vectors = []
    for g in model.elements:
        vec = np.zeros(delta.order * k, dtype=object)
        for c in delta.elements:
            vec[c * k : (c + 1) * k] = f[delta.mul(c, model.projection[g])] - f[c]
        vectors.append(vec)
    return vectors


def _table(model: FiniteGroupModel, module: InducedModule, vectors: Sequence[IntMatrix]) -> CocycleTable:
    t = module.underlying
    return CocycleTable(model, module, tuple(t.reduce(v) for v in vectors))


def shapiro_section(
    phi: GroupHom, model: FiniteGroupModel, induced: InducedModule | None = None
) -> CocycleTable:
    """Phi(g)(c) = phi(rep(c) g rep(c pi(g))^-1) on the induced module"""
    module = induced or InducedModule(model, phi.target)
    return _table(model, module, _shapiro_vectors(phi, model))


def cocycle_from_pair(
    phi: GroupHom,
    alpha: GroupHom,
    model: FiniteGroupModel,
    induced: InducedModule | None = None,
) -> CocycleTable:
    """Phi_phi + b_alpha"""
    if phi.target.ambient_rank != alpha.target.ambient_rank:
        raise ConfigError("phi and alpha must share their target")
    module = induced or InducedModule(model, phi.target)
    vectors = [
        x + y
        for x, y in zip(
            _shapiro_vectors(phi, model), _augmentation_vectors(alpha, model), strict=True
        )
    ]
    return _table(model, module, vectors)


def pair_from_cocycle(
    cocycle: CocycleTable, model: FiniteGroupModel
) -> tuple[GroupHom, GroupHom]:
    """phi(k) = [Psi(k)](1) on A and alpha(c - 1) = [(Psi - Phi_phi)(rep c)](1)"""
    module = cocycle.coefficients
    if not isinstance(module, InducedModule):
        raise ConfigError("Cocycle does not take values in an induced module")
    v = module.coefficients
    k = v.ambient_rank
    a = model.a_module.underlying
    n_a = a.ambient_rank
    phi_mat = zeros(k, n_a)
    for i in range(n_a):
        unit = np.zeros(n_a, dtype=object)
        unit[i] = 1
        g = model.element(a.reduce(unit), 0)
        phi_mat[:, i] = module.block(cocycle.ambient(g), 0)
    phi = GroupHom(a, v, phi_mat)
    base = _shapiro_vectors(phi, model)
    ne = model.delta.nonidentity
    alpha_mat = zeros(k, len(ne))
    for i, c in enumerate(ne):
        g = model.section(c)
        alpha_mat[:, i] = module.block(cocycle.ambient(g) - base[g], 0)
    alpha = GroupHom(FgAbGroup.free(len(ne)), v, alpha_mat)
    return phi, alpha


def delta_act_on_cocycle(d: int, cocycle: CocycleTable) -> CocycleTable:
    """[d*Psi](g)(c) = d.([Psi(g)](d^-1 c))"""
    module = cocycle.coefficients
    if not isinstance(module, InducedModule):
        raise ConfigError("Cocycle does not take values in an induced module")
    star = module.star_matrix(d)
    vectors = [apply(star, cocycle.ambient(g)) for g in cocycle.model.elements]
    return _table(cocycle.model, module, vectors)


def delta_act_on_pair(
    d: int,
    phi: GroupHom,
    alpha: GroupHom,
    emodule: EModule,
    base: GModule | None = None,
) -> tuple[GroupHom, GroupHom]:
    """d*(phi, alpha) = w_d o (phi, alpha) o (d^-1 acting on E)"""
    k = phi.target.ambient_rank
    chi = hstack([phi.matrix, alpha.matrix], rows=k)
    w = base.action[d] if base is not None else identity(k)
    moved = matmul(matmul(w, chi), emodule.module.action[emodule.delta.inv(d)])
    n_a = emodule.a_rank
    return (
        GroupHom(phi.source, phi.target, moved[:, :n_a]),
        GroupHom(alpha.source, alpha.target, moved[:, n_a:]),
    )


# Bridge to the induced module and the coinvariant side


class CocycleBridge:
    """Z^1(model, W) <-> Z^1(model, Ind W)^G via theta(w)(c) = c.w"""

    def __init__(self, model: FiniteGroupModel, base: GModule) -> None:
        if base.group is not model.delta:
            raise ConfigError("W must be a module over the quotient group")
        self.model = model
        self.base = base
        self.module = base.pullback(model, model.projection)
        self.induced = InducedModule(model, base.underlying, base=base)

    def forward(self, cocycle: CocycleTable) -> CocycleTable:
        delta = self.model.delta
        k = self.base.ambient_rank
        vectors = []
        for g in self.model.elements:
            w = cocycle.ambient(g)
            vec = np.zeros(delta.order * k, dtype=object)
            for c in delta.elements:
                vec[c * k : (c + 1) * k] = self.base.act(c, w)
            vectors.append(vec)
        return _table(self.model, self.induced, vectors)

    def backward(self, cocycle: CocycleTable) -> CocycleTable:
        w = self.base.underlying
        values = tuple(
            w.reduce(self.induced.block(cocycle.ambient(g), 0)) for g in self.model.elements
        )
        return CocycleTable(self.model, self.module, values)

    def is_invariant(self, cocycle: CocycleTable) -> bool:
        return all(
            delta_act_on_cocycle(d, cocycle).values == cocycle.values
            for d in self.model.delta.elements
        )


def z1_invariants_bridge(
    model: FiniteGroupModel, lattice: GModule, coefficients: FgAbGroup
) -> CocycleBridge:
    return CocycleBridge(model, hom_lattice_into(lattice, coefficients))


class CocycleCorrespondence:
    """Z^1(model, Hom(M, V)) <-> Hom((E (x) M)_G, V), explicitly in both directions"""

    def __init__(self, model: FiniteGroupModel, lattice: GModule, coefficients: FgAbGroup) -> None:
        self.model = model
        self.lattice = lattice
        self.coefficients = coefficients
        self.bridge = z1_invariants_bridge(model, lattice, coefficients)
        self.emodule = build_E(model.delta, model.a_module, model.kappa)
        self.qdata: QData = coinvariants_with_q(self.emodule, lattice)

    @property
    def module(self) -> GModule:
        """Hom(M, V) as a module over the model"""
        return self.bridge.module

    def _layout(self) -> tuple[int, int, int]:
        return self.lattice.ambient_rank, self.coefficients.ambient_rank, self.emodule.ambient_rank

    def to_coinvariant_hom(self, cocycle: CocycleTable) -> GroupHom:
        n_m, k, n_e = self._layout()
        phi, alpha = pair_from_cocycle(self.bridge.forward(cocycle), self.model)
        chi = hstack([phi.matrix, alpha.matrix], rows=n_m * k)
        mat = zeros(k, n_e * n_m)
        for j, i in itertools.product(range(n_e), range(n_m)):
            mat[:, j * n_m + i] = chi[i * k : (i + 1) * k, j]
        try:
            return GroupHom(self.qdata.em_tensor_m_coinv, self.coefficients, mat)
        except ValueError as e:
            raise InvariantViolation(f"Cocycle does not descend to the coinvariants: {e}") from e

    def from_coinvariant_hom(self, hom: GroupHom) -> CocycleTable:
        n_m, k, n_e = self._layout()
        chi = zeros(n_m * k, n_e)
        for j, i in itertools.product(range(n_e), range(n_m)):
            chi[i * k : (i + 1) * k, j] = hom.matrix[:, j * n_m + i]
        w = self.bridge.base.underlying
        n_a = self.emodule.a_rank
        phi = GroupHom(self.model.a_module.underlying, w, chi[:, :n_a])
        alpha = GroupHom(FgAbGroup.free(n_e - n_a), w, chi[:, n_a:])
        lifted = cocycle_from_pair(phi, alpha, self.model, self.bridge.induced)
        return self.bridge.backward(lifted)

    def coinvariant_homs(self) -> tuple[int, Iterator[GroupHom]]:
        return hom_into_finite(self.qdata.em_tensor_m_coinv, self.coefficients)

    def factors_through_q(self, hom: GroupHom) -> bool:
        """Whether hom = (hom o split) o q, i.e. hom comes from Hom(I_G M, V)"""
        q, split = self.qdata.q, self.qdata.split
        through = hom.compose(split).compose(q)
        diff = GroupHom(hom.source, hom.target, hom.matrix - through.matrix, check=False)
        return diff.is_zero_map()


# Representations


@dataclass(frozen=True)
class Representation:
    """gamma -> (w, pi(gamma)) in W x| G, with W a module over the model"""

    model: FiniteGroupModel
    module: GModule
    images: tuple[tuple[tuple[int, ...], int], ...]

    def multiply(
        self, x: tuple[tuple[int, ...], int], y: tuple[tuple[int, ...], int]
    ) -> tuple[tuple[int, ...], int]:
        w = self.module.underlying
        moved = w.reduce(self.module.act(self.model.section(x[1]), w.lift(y[0])))
        return w.add(x[0], moved), self.model.delta.mul(x[1], y[1])

    def is_homomorphism(self) -> bool:
        return all(
            self.multiply(self.images[g], self.images[h]) == self.images[self.model.mul(g, h)]
            for g, h in itertools.product(self.model.elements, repeat=2)
        )

    def lies_over_projection(self) -> bool:
        return all(self.images[g][1] == self.model.projection[g] for g in self.model.elements)

    def cocycle(self) -> CocycleTable:
        """rho rho_0^-1"""
        return CocycleTable(self.model, self.module, tuple(w for w, _ in self.images))


def rep_from_cocycle(cocycle: CocycleTable) -> Representation:
    """gamma -> Phi(gamma) rho_0(gamma) with rho_0 the canonical section through pi"""
    if not cocycle.is_cocycle():
        raise ConfigError("Table is not a 1-cocycle")
    model = cocycle.model
    images = tuple((cocycle.values[g], model.projection[g]) for g in model.elements)
    return Representation(model, cocycle.coefficients, images)


def conjugate_rep(rho: Representation, x: Sequence[int]) -> Representation:
    """(x, 1) rho (x, 1)^-1, computed in W x| G"""
    w = rho.module.underlying
    e = rho.model.delta.identity
    x_red = w.reduce(w.lift(x))
    left, right = (x_red, e), (w.neg(x_red), e)
    images = tuple(rho.multiply(rho.multiply(left, img), right) for img in rho.images)
    return Representation(rho.model, rho.module, images)


def pseudochar_of_rep(rho: Representation, correspondence: CocycleCorrespondence) -> GroupHom:
    """The character of H_1 = ker q attached to rho"""
    hom = correspondence.to_coinvariant_hom(rho.cocycle())
    return hom.compose(correspondence.qdata.h1_inclusion)

"""Finite groups, modules over them, and their low-degree (co)homology.

Homology and cohomology come from the normalized bar complex, truncated at the
degree needed: chains in degree k are copies of N indexed by k-tuples of
non-identity elements.
"""

import itertools
import random
from collections.abc import Sequence
from functools import cached_property
from typing import Any, Literal, NamedTuple

import numpy as np
from loguru import logger
from pydantic import BaseModel

from torusdef.errors import CocycleError, ConfigError
from torusdef.intlin import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    Subquotient,
    apply,
    as_matrix,
    as_vector,
    block_diag,
    cokernel,
    hstack,
    identity,
    kron,
    matmul,
    subquotient,
    tensor,
    vstack,
    zeros,
)


class FiniteGroup:
    """Finite group given by its multiplication table; element 0 is the identity"""

    def __init__(self, table: Sequence[Sequence[int]], name: str | None = None) -> None:
        rows = [tuple(int(x) for x in row) for row in table]
        n = len(rows)
        if n == 0:
            raise ConfigError("A group needs at least one element")
        if any(len(row) != n for row in rows):
            raise ConfigError("Multiplication table must be square")
        if any(not 0 <= x < n for row in rows for x in row):
            raise ConfigError("Multiplication table entries must be element indices")
        if rows[0] != tuple(range(n)) or any(row[0] != i for i, row in enumerate(rows)):
            raise ConfigError("Element 0 must be the identity")
        for a, b, c in itertools.product(range(n), repeat=3):
            if rows[rows[a][b]][c] != rows[a][rows[b][c]]:
                raise ConfigError(f"Table is not associative at ({a}, {b}, {c})")
        inverse = []
        for a in range(n):
            inv = [b for b in range(n) if rows[a][b] == 0]
            if len(inv) != 1 or rows[inv[0]][a] != 0:
                raise ConfigError(f"Element {a} has no two-sided inverse")
            inverse.append(inv[0])

        self.order = n
        self.table = tuple(rows)
        self.inverse = tuple(inverse)
        self.name = name or f"group of order {n}"

    identity = 0

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        if n < 1:
            raise ConfigError(f"Cyclic group order must be positive, got {n}")
        table = [[(a + b) % n for b in range(n)] for a in range(n)]
        return cls(table, name=f"Z/{n}" if n > 1 else "1")

    @classmethod
    def klein4(cls) -> "FiniteGroup":
        return cls([[a ^ b for b in range(4)] for a in range(4)], name="Z/2 x Z/2")

    @classmethod
    def symmetric3(cls) -> "FiniteGroup":
        perms = list(itertools.permutations(range(3)))
        index = {p: i for i, p in enumerate(perms)}
        table = [
            [index[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms
        ]
        return cls(table, name="S3")

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls.cyclic(1)

    @classmethod
    def from_spec(cls, spec: str) -> "FiniteGroup":
        """Named family: "cyclic n", "klein4", "s3" or "trivial" """
        words = spec.strip().lower().split()
        match words:
            case ["cyclic", n] if n.isdigit():
                return cls.cyclic(int(n))
            case ["klein4"]:
                return cls.klein4()
            case ["s3"]:
                return cls.symmetric3()
            case ["trivial"]:
                return cls.trivial()
        raise ConfigError(
            f"Unknown group '{spec}'. Use 'cyclic n', 'klein4', 's3' or 'trivial'"
        )

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    @property
    def elements(self) -> range:
        return range(self.order)

    @property
    def nonidentity(self) -> list[int]:
        return list(range(1, self.order))

    def closure(self, gens: Sequence[int]) -> set[int]:
        seen = {0}
        frontier = [0]
        while frontier:
            g = frontier.pop()
            for s in gens:
                h = self.table[g][s]
                if h not in seen:
                    seen.add(h)
                    frontier.append(h)
        return seen

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """Greedy generating set: scan elements, keep those outside the current span"""
        gens: list[int] = []
        span = {0}
        for g in self.elements:
            if g not in span:
                gens.append(g)
                span = self.closure(gens)
        return tuple(gens)

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.table[x][g]
            k += 1
        return k

    def characters(self, n: int) -> list[tuple[int, ...]]:
        """All homomorphisms into Z/n, as tuples of residues per element"""
        gens = self.generators
        found = []
        for imgs in itertools.product(range(n), repeat=len(gens)):
            phase: dict[int, int] = {0: 0}
            queue = [0]
            ok = True
            while queue and ok:
                g = queue.pop(0)
                for s, val in zip(gens, imgs, strict=True):
                    h = self.table[g][s]
                    want = (phase[g] + val) % n
                    if h not in phase:
                        phase[h] = want
                        queue.append(h)
                    elif phase[h] != want:
                        ok = False
                        break
            if ok:
                found.append(tuple(phase[g] for g in self.elements))
        return found

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name})"


class GModule:
    """A finitely generated abelian group with a left action by automorphisms.

    ``action[g]`` is an integer matrix on the ambient generators; it must
    preserve the relation lattice and compose like the group.
    """

    def __init__(
        self,
        group: FiniteGroup,
        underlying: FgAbGroup,
        action: Sequence[Any],
        *,
        check: bool = True,
    ) -> None:
        n = underlying.ambient_rank
        if len(action) != group.order:
            raise ConfigError(
                f"Need one action matrix per element ({group.order}), got {len(action)}"
            )
        mats = []
        for g, a in enumerate(action):
            try:
                mats.append(as_matrix(a, rows=n, cols=n))
            except ValueError as e:
                raise ConfigError(f"Action matrix of element {g}: {e}") from e
        self.group = group
        self.underlying = underlying
        self.action = tuple(mats)
        if check:
            self._validate()

    def _validate(self) -> None:
        u = self.underlying
        for g, a in enumerate(self.action):
            if not u.contains_columns(matmul(a, u.relations)):
                raise ConfigError(f"Action of element {g} does not preserve the relations")
        if not u.contains_columns(self.action[0] - identity(u.ambient_rank)):
            raise ConfigError("The identity element does not act trivially")
        for g, h in itertools.product(self.group.elements, repeat=2):
            diff = matmul(self.action[g], self.action[h]) - self.action[self.group.mul(g, h)]
            if not u.contains_columns(diff):
                raise ConfigError(f"Action is not multiplicative at ({g}, {h})")

    @classmethod
    def trivial(cls, group: FiniteGroup, underlying: FgAbGroup) -> "GModule":
        n = underlying.ambient_rank
        return cls(group, underlying, [identity(n)] * group.order, check=False)

    @classmethod
    def lattice(cls, group: FiniteGroup, action: Sequence[Any]) -> "GModule":
        n = as_matrix(action[0]).shape[0] if action else 0
        return cls(group, FgAbGroup.free(n), action)

    @classmethod
    def sign(cls, group: FiniteGroup, character: Sequence[int]) -> "GModule":
        """Z with g acting by (-1)^character[g]"""
        return cls.lattice(group, [[[(-1) ** (c % 2)]] for c in character])

    @property
    def rank(self) -> int:
        return self.underlying.free_rank

    @property
    def ambient_rank(self) -> int:
        return self.underlying.ambient_rank

    @property
    def is_lattice(self) -> bool:
        """Whether the ambient generators form a Z-basis"""
        return not any(self.underlying.relations.reshape(-1))

    def matrix(self, g: int) -> IntMatrix:
        return self.action[g]

    def act(self, g: int, x: Any) -> IntMatrix:
        return apply(self.action[g], x)

    def is_trivial_action(self) -> bool:
        eye = identity(self.ambient_rank)
        return all(self.underlying.contains_columns(a - eye) for a in self.action)

    def tensor(self, other: "GModule") -> "GModule":
        """Tensor product over Z with the diagonal action"""
        if other.group is not self.group:
            raise ValueError("Modules live over different groups")
        mats = [kron(a, b) for a, b in zip(self.action, other.action, strict=True)]
        return GModule(
            self.group, tensor(self.underlying, other.underlying), mats, check=False
        )

    def direct_sum(self, other: "GModule") -> "GModule":
        if other.group is not self.group:
            raise ValueError("Modules live over different groups")
        mats = [block_diag([a, b]) for a, b in zip(self.action, other.action, strict=True)]
        underlying = FgAbGroup.direct_sum([self.underlying, other.underlying])
        return GModule(self.group, underlying, mats, check=False)

    def pullback(self, group: FiniteGroup, projection: Sequence[int]) -> "GModule":
        """The same group viewed as a module over ``group`` through ``projection``"""
        return GModule(group, self.underlying, [self.action[projection[g]] for g in group.elements])

    def conjugate(self, p: IntMatrix, p_inv: IntMatrix) -> "GModule":
        """Change of basis x -> p x on a lattice"""
        if not self.is_lattice:
            raise ValueError("Change of basis is only defined for lattices")
        mats = [matmul(matmul(p, a), p_inv) for a in self.action]
        return GModule(self.group, self.underlying, mats)

    def __repr__(self) -> str:
        return f"GModule({self.underlying.describe()} over {self.group.name})"


def group_ring_module(group: FiniteGroup) -> GModule:
    """Z[group] with left translation on the basis e_c"""
    n = group.order
    mats = []
    for d in group.elements:
        a = zeros(n, n)
        for c in group.elements:
            a[group.mul(d, c), c] = 1
        mats.append(a)
    return GModule(group, FgAbGroup.free(n), mats, check=False)


def augmentation_action(group: FiniteGroup, d: int) -> IntMatrix:
    """Matrix of d on the basis f_c = c - 1 (c != 1): d f_c = f_dc - f_d"""
    pos = {c: i for i, c in enumerate(group.nonidentity)}
    a = zeros(len(pos), len(pos))
    for c, i in pos.items():
        dc = group.mul(d, c)
        if dc != 0:
            a[pos[dc], i] += 1
        if d != 0:
            a[pos[d], i] -= 1
    return a


def augmentation_ideal(group: FiniteGroup) -> GModule:
    mats = [augmentation_action(group, d) for d in group.elements]
    return GModule(group, FgAbGroup.free(group.order - 1), mats, check=False)


# Invariants and coinvariants


def _power(group: FgAbGroup, copies: int) -> FgAbGroup:
    n = group.ambient_rank
    return FgAbGroup(kron(identity(copies), group.relations), ambient_rank=n * copies)


def _difference_stack(module: GModule) -> GroupHom:
    """N -> N^(|G|-1), x -> ((g - 1) x)_g over non-identity g"""
    n = module.ambient_rank
    ne = module.group.nonidentity
    eye = identity(n)
    mat = vstack([module.action[g] - eye for g in ne], cols=n)
    return GroupHom(module.underlying, _power(module.underlying, len(ne)), mat, check=False)


def _difference_row(module: GModule) -> GroupHom:
    """N^(|G|-1) -> N, (x_g) -> sum (g - 1) x_g"""
    n = module.ambient_rank
    ne = module.group.nonidentity
    eye = identity(n)
    mat = hstack([module.action[g] - eye for g in ne], rows=n)
    return GroupHom(_power(module.underlying, len(ne)), module.underlying, mat, check=False)


def norm_map(module: GModule) -> GroupHom:
    mat = sum((a for a in module.action), zeros(module.ambient_rank, module.ambient_rank))
    return GroupHom(module.underlying, module.underlying, mat, check=False)


def invariants_subquotient(module: GModule) -> Subquotient:
    return subquotient(_difference_stack(module))


def invariants(module: GModule) -> FgAbGroup:
    return invariants_subquotient(module).group


def coinvariants(module: GModule) -> FgAbGroup:
    return cokernel(_difference_row(module))


# Bar complexes


class _Tuples:
    """Index of k-tuples of non-identity elements in mixed radix"""

    def __init__(self, group: FiniteGroup) -> None:
        self.group = group
        self.ne = group.nonidentity
        self.pos = {g: i for i, g in enumerate(self.ne)}
        self.base = len(self.ne)

    def all(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.product(self.ne, repeat=k))

    def index(self, t: Sequence[int]) -> int | None:
        idx = 0
        for g in t:
            if g == 0:
                return None
            idx = idx * self.base + self.pos[g]
        return idx

    def count(self, k: int) -> int:
        return int(self.base**k)


def _chain_group(module: GModule, tuples: _Tuples, k: int) -> FgAbGroup:
    return _power(module.underlying, tuples.count(k))


def _bar_boundary(module: GModule, tuples: _Tuples, k: int) -> GroupHom:
    """d_k: C_k -> C_{k-1} on m (x) [g1|...|gk], with m.g = g^-1 m"""
    group = module.group
    n = module.ambient_rank
    eye = identity(n)
    mat = zeros(n * tuples.count(k - 1), n * tuples.count(k))

    def put(face: Sequence[int], col: int, block: IntMatrix) -> None:
        row = tuples.index(face)
        if row is not None:
            mat[row * n : (row + 1) * n, col * n : (col + 1) * n] += block

    for col, gs in enumerate(tuples.all(k)):
        put(gs[1:], col, module.action[group.inv(gs[0])])
        for i in range(k - 1):
            merged = (*gs[:i], group.mul(gs[i], gs[i + 1]), *gs[i + 2 :])
            put(merged, col, (-1) ** (i + 1) * eye)
        put(gs[:-1], col, (-1) ** k * eye)
    return GroupHom(
        _chain_group(module, tuples, k), _chain_group(module, tuples, k - 1), mat, check=False
    )


def _bar_coboundary(module: GModule, tuples: _Tuples, k: int) -> GroupHom:
    """delta^k: C^k -> C^{k+1} on normalized cochains"""
    group = module.group
    n = module.ambient_rank
    eye = identity(n)
    mat = zeros(n * tuples.count(k + 1), n * tuples.count(k))

    def put(row: int, face: Sequence[int], block: IntMatrix) -> None:
        col = tuples.index(face)
        if col is not None:
            mat[row * n : (row + 1) * n, col * n : (col + 1) * n] += block

    for row, gs in enumerate(tuples.all(k + 1)):
        put(row, gs[1:], module.action[gs[0]])
        for i in range(k):
            merged = (*gs[:i], group.mul(gs[i], gs[i + 1]), *gs[i + 2 :])
            put(row, merged, (-1) ** (i + 1) * eye)
        put(row, gs[:-1], (-1) ** (k + 1) * eye)
    return GroupHom(
        _chain_group(module, tuples, k), _chain_group(module, tuples, k + 1), mat, check=False
    )


def _zero_into(group: FgAbGroup) -> GroupHom:
    return GroupHom(FgAbGroup.trivial(), group, zeros(group.ambient_rank, 0), check=False)


def _zero_from(group: FgAbGroup) -> GroupHom:
    return GroupHom(group, FgAbGroup.trivial(), zeros(0, group.ambient_rank), check=False)


def _check_degree(degree: int) -> None:
    if degree not in (0, 1, 2):
        raise ValueError(f"Only degrees 0, 1 and 2 are supported, got {degree}")


def _check_group(group: FiniteGroup, module: GModule) -> None:
    if module.group is not group:
        raise ValueError(f"{module!r} is not a module over {group!r}")


def homology_subquotient(group: FiniteGroup, module: GModule, degree: int) -> Subquotient:
    _check_degree(degree)
    _check_group(group, module)
    tuples = _Tuples(group)
    out = (
        _bar_boundary(module, tuples, degree)
        if degree > 0
        else _zero_from(_chain_group(module, tuples, 0))
    )
    return subquotient(out, _bar_boundary(module, tuples, degree + 1))


def homology(group: FiniteGroup, module: GModule, degree: int) -> FgAbGroup:
    """H_degree(group, module) from the normalized bar complex"""
    result = homology_subquotient(group, module, degree).group
    logger.debug(f"H_{degree}({group.name}, {module.underlying.describe()}) = {result.describe()}")
    return result


def cohomology_subquotient(group: FiniteGroup, module: GModule, degree: int) -> Subquotient:
    _check_degree(degree)
    _check_group(group, module)
    tuples = _Tuples(group)
    incoming = (
        _bar_coboundary(module, tuples, degree - 1)
        if degree > 0
        else _zero_into(_chain_group(module, tuples, 0))
    )
    return subquotient(_bar_coboundary(module, tuples, degree), incoming)


def cohomology(group: FiniteGroup, module: GModule, degree: int) -> FgAbGroup:
    result = cohomology_subquotient(group, module, degree).group
    logger.debug(f"H^{degree}({group.name}, {module.underlying.describe()}) = {result.describe()}")
    return result


def tate(group: FiniteGroup, module: GModule, degree: int) -> FgAbGroup:
    """Tate cohomology in degrees -2..2"""
    _check_group(group, module)
    match degree:
        case 0:
            return subquotient(_difference_stack(module), norm_map(module)).group
        case -1:
            return subquotient(norm_map(module), _difference_row(module)).group
        case -2:
            return homology(group, module, 1)
        case 1 | 2:
            return cohomology(group, module, degree)
    raise ValueError(f"Tate degree must lie in -2..2, got {degree}")


class NormSequence(NamedTuple):
    """0 -> H^-1 -> N_G -> N^G -> H^0 -> 0, induced by the norm"""

    tate_minus_one: FgAbGroup
    coinvariants: FgAbGroup
    invariants: FgAbGroup
    tate_zero: FgAbGroup


def norm_sequence(module: GModule) -> NormSequence:
    group = module.group
    return NormSequence(
        tate(group, module, -1), coinvariants(module), invariants(module), tate(group, module, 0)
    )


# 2-cocycles


class CocycleViolation(BaseModel):
    kind: Literal["normalization", "identity"]
    elements: tuple[int, ...]

    def __str__(self) -> str:
        if self.kind == "normalization":
            d, c = self.elements
            return f"kappa({d}, {c}) must vanish: the table is not normalized"
        d, c, e = self.elements
        return f"cocycle identity fails at (d, c, e) = ({d}, {c}, {e})"


class TwoCocycle:
    """Table kappa: G x G -> A of ambient coordinate vectors"""

    def __init__(self, module: GModule, values: Any) -> None:
        o, n = module.group.order, module.ambient_rank
        arr = np.asarray(values, dtype=object)
        if arr.size == 0 and n == 0:
            arr = np.zeros((o, o, 0), dtype=object)
        if arr.shape != (o, o, n):
            raise ConfigError(f"kappa must have shape ({o}, {o}, {n}), got {arr.shape}")
        self.module = module
        self.values = np.asarray(np.frompyfunc(int, 1, 1)(arr), dtype=object).reshape(o, o, n)
        self.values.flags.writeable = False

    @classmethod
    def zero(cls, module: GModule) -> "TwoCocycle":
        o = module.group.order
        return cls(module, np.zeros((o, o, module.ambient_rank), dtype=object))

    @property
    def group(self) -> FiniteGroup:
        return self.module.group

    def value(self, d: int, c: int) -> IntMatrix:
        return self.values[d, c]

    def reduced(self, d: int, c: int) -> tuple[int, ...]:
        return self.module.underlying.reduce(self.values[d, c])

    def require_valid(self) -> None:
        violation = validate_2cocycle(self)
        if violation is not None:
            raise CocycleError(str(violation), violation.elements)

    def coboundary_shift(self, f: Sequence[Any]) -> "TwoCocycle":
        """kappa + delta f for a normalized 1-cochain f: G -> A"""
        group = self.group
        vals = np.array(self.values, dtype=object, copy=True)
        for d, c in itertools.product(group.elements, repeat=2):
            vals[d, c] = (
                vals[d, c]
                + self.module.act(d, f[c])
                - as_vector(f[group.mul(d, c)])
                + as_vector(f[d])
            )
        return TwoCocycle(self.module, vals)


def validate_2cocycle(kappa: TwoCocycle) -> CocycleViolation | None:
    """First failure of normalization or of the cocycle identity, if any"""
    group, module = kappa.group, kappa.module
    a = module.underlying
    for c in group.elements:
        if not a.is_zero(kappa.value(0, c)):
            return CocycleViolation(kind="normalization", elements=(0, c))
        if not a.is_zero(kappa.value(c, 0)):
            return CocycleViolation(kind="normalization", elements=(c, 0))
    for d, c, e in itertools.product(group.elements, repeat=3):
        total = (
            module.act(d, kappa.value(c, e))
            - kappa.value(group.mul(d, c), e)
            + kappa.value(d, group.mul(c, e))
            - kappa.value(d, c)
        )
        if not a.is_zero(total):
            return CocycleViolation(kind="identity", elements=(d, c, e))
    return None


def cocycle_class_is_trivial(kappa: TwoCocycle) -> bool:
    """Whether kappa is a coboundary, i.e. the extension it defines splits"""
    kappa.require_valid()
    group, module = kappa.group, kappa.module
    tuples = _Tuples(group)
    cochain = np.concatenate(
        [kappa.value(d, c) for d, c in tuples.all(2)] or [np.zeros(0, dtype=object)]
    )
    classes = cohomology_subquotient(group, module, 2)
    return not any(classes.classify(cochain))


def carry_cocycle(
    module: GModule, phase: Sequence[int], modulus: int, value: Any
) -> TwoCocycle:
    """kappa(d, c) = floor((phase[d] + phase[c]) / modulus) * value.

    ``phase`` is a homomorphism to Z/modulus given by residues in [0, modulus)
    and ``value`` must be fixed by the action.
    """
    group = module.group
    v = as_vector(value, module.ambient_rank)
    for g in group.elements:
        if not module.underlying.is_zero(module.act(g, v) - v):
            raise ConfigError(f"Carry value is not fixed by element {g}")
    for a, b in itertools.product(group.elements, repeat=2):
        if (phase[a] + phase[b]) % modulus != phase[group.mul(a, b)] % modulus:
            raise ConfigError("Carry phase is not a homomorphism")
    vals = np.zeros((group.order, group.order, module.ambient_rank), dtype=object)
    for d, c in itertools.product(group.elements, repeat=2):
        vals[d, c] = ((phase[d] % modulus + phase[c] % modulus) // modulus) * v
    return TwoCocycle(module, vals)


# Random modules


def random_unimodular(n: int, rng: random.Random, steps: int | None = None) -> tuple[IntMatrix, IntMatrix]:
    """A random unimodular matrix and its inverse, built from elementary moves"""
    p, p_inv = identity(n), identity(n)
    if n < 2:
        return p, p_inv
    for _ in range(steps if steps is not None else 3 * n):
        i, j = rng.sample(range(n), 2)
        k = rng.choice((-2, -1, 1, 2))
        p[i] += k * p[j]
        p_inv[:, j] -= k * p_inv[:, i]
    return p, p_inv


def _lattice_blocks(group: FiniteGroup) -> list[GModule]:
    blocks = [GModule.lattice(group, [[[1]]] * group.order)]
    blocks += [GModule.sign(group, ch) for ch in group.characters(2) if any(ch)]
    blocks.append(augmentation_ideal(group))
    blocks.append(group_ring_module(group))
    return blocks


def random_lattice(group: FiniteGroup, max_rank: int, rng: random.Random) -> GModule:
    """Sum of trivial, sign, augmentation and regular blocks in a random basis"""
    target = rng.randint(1, max_rank)
    blocks = [b for b in _lattice_blocks(group) if 0 < b.rank <= target]
    chosen: list[GModule] = []
    rank = 0
    while rank < target:
        fitting = [b for b in blocks if rank + b.rank <= target]
        block = rng.choice(fitting)
        chosen.append(block)
        rank += block.rank
    module = chosen[0]
    for block in chosen[1:]:
        module = module.direct_sum(block)
    p, p_inv = random_unimodular(module.ambient_rank, rng)
    return module.conjugate(p, p_inv)


def random_module(group: FiniteGroup, max_rank: int, rng: random.Random) -> GModule:
    """A random lattice plus a cyclic torsion summand acted on by a sign"""
    lattice = random_lattice(group, max_rank, rng)
    order = rng.choice((2, 3, 4, 6))
    signs = rng.choice(group.characters(2))
    torsion = GModule(
        group,
        FgAbGroup.from_invariants([order]),
        [[[(-1) ** s]] for s in signs],
    )
    return lattice.direct_sum(torsion)

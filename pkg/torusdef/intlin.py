"""Exact integer linear algebra and finitely generated abelian groups.

Matrices are numpy arrays of dtype ``object`` holding Python ints, so every
operation is exact. A finitely generated abelian group is presented as the
cokernel of a relation matrix whose columns are relations in Z^n; elements are
ambient integer vectors and their canonical form is the coordinate tuple in
the Smith basis (torsion slots reduced, free slots unreduced).
"""

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any, NamedTuple, TypeAlias

import numpy as np
import numpy.typing as npt
from loguru import logger
from sympy import isprime, multiplicity

IntMatrix: TypeAlias = npt.NDArray[np.object_]

_to_int = np.frompyfunc(int, 1, 1)


def zeros(rows: int, cols: int) -> IntMatrix:
    return np.zeros((rows, cols), dtype=object)


def identity(n: int) -> IntMatrix:
    out = zeros(n, n)
    np.fill_diagonal(out, 1)
    return out


def as_matrix(data: Any, rows: int | None = None, cols: int | None = None) -> IntMatrix:
    """Coerce nested integer data into a 2-D object matrix of Python ints"""
    arr = np.asarray(data, dtype=object)
    if arr.size == 0:
        r = rows if rows is not None else (arr.shape[0] if arr.ndim >= 1 else 0)
        c = cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return zeros(r, c)
    if arr.ndim != 2:
        raise ValueError(f"Expected a 2-D integer matrix, got shape {arr.shape}")
    if (rows is not None and arr.shape[0] != rows) or (
        cols is not None and arr.shape[1] != cols
    ):
        raise ValueError(
            f"Matrix has shape {arr.shape}, expected ({rows}, {cols})"
        )
    return np.asarray(_to_int(arr), dtype=object)


def as_vector(data: Any, length: int | None = None) -> IntMatrix:
    arr = np.asarray(data, dtype=object).reshape(-1)
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"Vector has length {arr.shape[0]}, expected {length}")
    if arr.size == 0:
        return np.zeros(0, dtype=object)
    return np.asarray(_to_int(arr), dtype=object)


def matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"Cannot multiply {a.shape} by {b.shape}")
    if 0 in (a.shape[0], a.shape[1], b.shape[1]):
        return zeros(a.shape[0], b.shape[1])
    return np.asarray(a.dot(b), dtype=object)


def apply(a: IntMatrix, x: Any) -> IntMatrix:
    """Matrix times vector, defined for empty shapes"""
    vec = as_vector(x, a.shape[1])
    if 0 in a.shape:
        return np.zeros(a.shape[0], dtype=object)
    return np.asarray(a.dot(vec), dtype=object)


def hstack(mats: Sequence[IntMatrix], rows: int) -> IntMatrix:
    parts = [m for m in mats if m.shape[1] > 0]
    if not parts:
        return zeros(rows, 0)
    return np.asarray(np.hstack(parts), dtype=object)


def vstack(mats: Sequence[IntMatrix], cols: int) -> IntMatrix:
    parts = [m for m in mats if m.shape[0] > 0]
    if not parts:
        return zeros(0, cols)
    return np.asarray(np.vstack(parts), dtype=object)


def kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    m, n = a.shape
    p, q = b.shape
    if 0 in (m, n, p, q):
        return zeros(m * p, n * q)
    out = np.multiply.outer(a, b).transpose(0, 2, 1, 3).reshape(m * p, n * q)
    return np.asarray(out, dtype=object)


def block_diag(mats: Sequence[IntMatrix]) -> IntMatrix:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = zeros(rows, cols)
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def _frozen(arr: IntMatrix) -> IntMatrix:
    arr.flags.writeable = False
    return arr


# Smith normal form


class SmithForm(NamedTuple):
    u: IntMatrix
    d: IntMatrix
    v: IntMatrix


def _smallest_entry(block: IntMatrix) -> tuple[int, int] | None:
    rows, cols = np.nonzero(block)
    if rows.size == 0:
        return None
    mags = [abs(block[i, j]) for i, j in zip(rows, cols, strict=True)]
    k = min(range(len(mags)), key=mags.__getitem__)
    return int(rows[k]), int(cols[k])


def _smith(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]:
    """Return U, D, V, U^-1 with U @ a @ V = D in Smith normal form"""
    d = np.array(a, dtype=object, copy=True)
    m, n = d.shape
    u, u_inv, v = identity(m), identity(m), identity(n)

    def swap_rows(i: int, j: int) -> None:
        if i != j:
            d[[i, j]] = d[[j, i]]
            u[[i, j]] = u[[j, i]]
            u_inv[:, [i, j]] = u_inv[:, [j, i]]

    def swap_cols(i: int, j: int) -> None:
        if i != j:
            d[:, [i, j]] = d[:, [j, i]]
            v[:, [i, j]] = v[:, [j, i]]

    def add_row(dst: int, src: int, k: int) -> None:
        d[dst] += k * d[src]
        u[dst] += k * u[src]
        u_inv[:, src] -= k * u_inv[:, dst]

    def add_col(dst: int, src: int, k: int) -> None:
        d[:, dst] += k * d[:, src]
        v[:, dst] += k * v[:, src]

    t = 0
    while t < min(m, n):
        found = _smallest_entry(d[t:, t:])
        if found is None:
            break
        swap_rows(t, t + found[0])
        swap_cols(t, t + found[1])
        while True:
            pivot = d[t, t]
            for i in range(t + 1, m):
                if d[i, t] != 0:
                    add_row(i, t, -(d[i, t] // pivot))
            for j in range(t + 1, n):
                if d[t, j] != 0:
                    add_col(j, t, -(d[t, j] // pivot))
            leftovers = [(abs(d[i, t]), i, -1) for i in range(t + 1, m) if d[i, t] != 0]
            leftovers += [(abs(d[t, j]), -1, j) for j in range(t + 1, n) if d[t, j] != 0]
            if leftovers:
                _, i, j = min(leftovers)
                if i >= 0:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            rest = d[t + 1 :, t + 1 :] % pivot
            bad_rows, _ = np.nonzero(rest)
            if bad_rows.size == 0:
                break
            add_row(t, t + 1 + int(bad_rows[0]), 1)
        if d[t, t] < 0:
            d[t] = -d[t]
            u[t] = -u[t]
            u_inv[:, t] = -u_inv[:, t]
        t += 1
    return u, d, v, u_inv


def smith_normal_form(a: Any) -> SmithForm:
    """Factor ``a`` as U @ a @ V = D with U, V unimodular and D diagonal.

    Pivots are chosen by minimal absolute value; the nonzero diagonal entries
    are positive and form a divisibility chain.
    """
    mat = as_matrix(a)
    u, d, v, _ = _smith(mat)
    return SmithForm(u, d, v)


# Lattices


class Echelon(NamedTuple):
    matrix: IntMatrix
    transform: IntMatrix | None
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def column_echelon(a: IntMatrix, *, track: bool = True) -> Echelon:
    """Column-style echelon form a @ V = E.

    The first ``rank`` columns of E are independent with strictly increasing
    pivot rows; the remaining columns are zero.
    """
    e = np.array(a, dtype=object, copy=True)
    m, n = e.shape
    v = identity(n) if track else None
    pivots: list[int] = []
    col = 0
    for row in range(m):
        if col == n:
            break
        while True:
            live = [j for j in range(col, n) if e[row, j] != 0]
            if not live:
                break
            j0 = min(live, key=lambda j: abs(e[row, j]))
            if j0 != col:
                e[:, [col, j0]] = e[:, [j0, col]]
                if v is not None:
                    v[:, [col, j0]] = v[:, [j0, col]]
            if col + 1 == n:
                break
            ks = e[row, col + 1 :] // e[row, col]
            e[:, col + 1 :] -= np.multiply.outer(e[:, col], ks)
            if v is not None:
                v[:, col + 1 :] -= np.multiply.outer(v[:, col], ks)
            if not any(e[row, col + 1 :]):
                break
        if e[row, col] != 0:
            if e[row, col] < 0:
                e[:, col] = -e[:, col]
                if v is not None:
                    v[:, col] = -v[:, col]
            pivots.append(row)
            col += 1
    return Echelon(e, v, tuple(pivots))


def integer_kernel(a: IntMatrix) -> IntMatrix:
    """Basis (as columns) of {x in Z^n : a @ x = 0}"""
    ech = column_echelon(a)
    assert ech.transform is not None
    return ech.transform[:, ech.rank :]


def lattice_basis(a: IntMatrix) -> IntMatrix:
    """Basis (as columns) of the lattice spanned by the columns of ``a``"""
    ech = column_echelon(a, track=False)
    return ech.matrix[:, : ech.rank]


def solve_integer(b: IntMatrix, x: IntMatrix) -> IntMatrix | None:
    """Integer Z with b @ Z = x, or None when some column has no solution"""
    if b.shape[0] != x.shape[0]:
        raise ValueError(f"Cannot solve {b.shape} against {x.shape}")
    ech = column_echelon(b)
    assert ech.transform is not None
    e = ech.matrix
    w = zeros(ech.rank, x.shape[1])
    residual = np.array(x, dtype=object, copy=True)
    for idx, row in enumerate(ech.pivots):
        coeffs = residual[row, :]
        if any(coeffs % e[row, idx]):
            return None
        w[idx, :] = coeffs // e[row, idx]
        residual -= np.multiply.outer(e[:, idx], w[idx, :])
    if residual.size and any(residual.reshape(-1)):
        return None
    return matmul(ech.transform[:, : ech.rank], w)


# Groups


class _Structure(NamedTuple):
    snf: SmithForm
    orders: tuple[int, ...]
    proj: IntMatrix
    lift: IntMatrix


class FgAbGroup:
    """Z^n modulo the column lattice of a relation matrix.

    The Smith data is computed on first use and cached; chain groups of bar
    complexes are only ever consumed through their relation matrices.
    """

    def __init__(self, relations: Any, ambient_rank: int | None = None) -> None:
        self._relations = _frozen(as_matrix(relations, rows=ambient_rank))

    @cached_property
    def _structure(self) -> _Structure:
        rel = self._relations
        n = rel.shape[0]
        u, d, v, u_inv = _smith(rel)
        diag = [d[i, i] for i in range(min(d.shape))]
        rank = sum(1 for x in diag if x != 0)
        slots = [i for i in range(n) if i >= rank or diag[i] != 1]
        orders = tuple(int(diag[i]) if i < rank else 0 for i in slots)

        proj = u[slots, :] if slots else zeros(0, n)
        for row, order in enumerate(orders):
            if order:
                proj[row] = proj[row] % order
        lift = u_inv[:, slots] if slots else zeros(n, 0)
        logger.trace(f"Smith form of a {rel.shape} presentation has orders {orders}")
        return _Structure(
            SmithForm(_frozen(u), _frozen(d), _frozen(v)),
            orders,
            _frozen(np.asarray(proj, dtype=object)),
            _frozen(lift),
        )

    @property
    def _orders(self) -> tuple[int, ...]:
        return self._structure.orders

    @property
    def _proj(self) -> IntMatrix:
        return self._structure.proj

    @property
    def _lift(self) -> IntMatrix:
        return self._structure.lift

    @classmethod
    def free(cls, n: int) -> "FgAbGroup":
        return cls(zeros(n, 0), ambient_rank=n)

    @classmethod
    def trivial(cls) -> "FgAbGroup":
        return cls.free(0)

    @classmethod
    def from_invariants(cls, factors: Sequence[int]) -> "FgAbGroup":
        """Cyclic sum of Z/f over ``factors``; a factor 0 stands for Z"""
        n = len(factors)
        cols = [i for i, f in enumerate(factors) if f != 0]
        rel = zeros(n, len(cols))
        for c, i in enumerate(cols):
            rel[i, c] = factors[i]
        return cls(rel, ambient_rank=n)

    @classmethod
    def direct_sum(cls, groups: Sequence["FgAbGroup"]) -> "FgAbGroup":
        rel = block_diag([g.relations for g in groups])
        return cls(rel, ambient_rank=sum(g.ambient_rank for g in groups))

    @property
    def ambient_rank(self) -> int:
        return int(self._relations.shape[0])

    @property
    def relations(self) -> IntMatrix:
        return self._relations

    @property
    def snf(self) -> SmithForm:
        return self._structure.snf

    @property
    def orders(self) -> tuple[int, ...]:
        """Order of each Smith slot, torsion ascending then 0 for each free slot"""
        return self._orders

    @property
    def invariant_factors(self) -> list[int]:
        return [o for o in self._orders if o]

    @property
    def free_rank(self) -> int:
        return sum(1 for o in self._orders if o == 0)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def is_trivial(self) -> bool:
        return not self._orders

    @property
    def cardinality(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self.describe()} is infinite")
        return math.prod(self._orders)

    @property
    def exponent(self) -> int:
        if not self.is_finite:
            return 0
        return math.lcm(*self._orders) if self._orders else 1

    @property
    def generators(self) -> IntMatrix:
        """Ambient lifts of the Smith generators, one per column"""
        return self._lift

    @property
    def coordinates(self) -> IntMatrix:
        """Matrix sending ambient vectors to (unreduced) Smith coordinates"""
        return self._proj

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        return self.free_rank, tuple(self.invariant_factors)

    def is_isomorphic(self, other: "FgAbGroup") -> bool:
        return self.invariants() == other.invariants()

    def reduce(self, x: Any) -> tuple[int, ...]:
        y = apply(self._proj, x)
        return tuple(
            int(c % o) if o else int(c) for c, o in zip(y, self._orders, strict=True)
        )

    def lift(self, coords: Sequence[int]) -> IntMatrix:
        return apply(self._lift, coords)

    def is_zero(self, x: Any) -> bool:
        return not any(self.reduce(x))

    def contains_columns(self, mat: IntMatrix) -> bool:
        """Whether every column of ``mat`` lies in the relation lattice"""
        y = matmul(self._proj, mat)
        for row, order in enumerate(self._orders):
            vals = y[row, :] % order if order else y[row, :]
            if any(vals):
                return False
        return True

    def add(self, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
        """Sum of two elements given in Smith coordinates"""
        return tuple(
            (a + b) % o if o else a + b
            for a, b, o in zip(x, y, self._orders, strict=True)
        )

    def neg(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple((-a) % o if o else -a for a, o in zip(x, self._orders, strict=True))

    def scale(self, k: int, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(
            (k * a) % o if o else k * a for a, o in zip(x, self._orders, strict=True)
        )

    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self._orders)

    def elements(self) -> Iterator[tuple[int, ...]]:
        """All elements in lexicographic order of Smith coordinates"""
        if not self.is_finite:
            raise ValueError(f"Cannot enumerate the infinite group {self.describe()}")
        return itertools.product(*(range(o) for o in self._orders))

    def describe(self) -> str:
        parts = [f"Z/{o}" for o in self.invariant_factors]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " x ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FgAbGroup({self.describe()})"


def group_from_relations(n: int, relations: Any) -> FgAbGroup:
    rel = as_matrix(relations)
    if rel.size and rel.shape[0] != n:
        raise ValueError(f"Relation matrix has {rel.shape[0]} rows, expected {n}")
    return FgAbGroup(rel if rel.size else zeros(n, 0), ambient_rank=n)


class GroupHom:
    """Homomorphism given by an integer matrix on ambient generators"""

    def __init__(
        self, source: FgAbGroup, target: FgAbGroup, matrix: Any, *, check: bool = True
    ) -> None:
        mat = as_matrix(matrix, rows=target.ambient_rank, cols=source.ambient_rank)
        if check and not target.contains_columns(matmul(mat, source.relations)):
            raise ValueError(
                f"Matrix does not induce a homomorphism "
                f"{source.describe()} -> {target.describe()}"
            )
        self.source = source
        self.target = target
        self.matrix = _frozen(mat)

    def apply(self, x: Any) -> IntMatrix:
        """Image of an ambient source vector, as an ambient target vector"""
        return apply(self.matrix, x)

    def __call__(self, x: Any) -> tuple[int, ...]:
        return self.target.reduce(self.apply(x))

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self after inner"""
        return GroupHom(
            inner.source, self.target, matmul(self.matrix, inner.matrix), check=False
        )

    def generator_images(self) -> tuple[tuple[int, ...], ...]:
        gens = self.source.generators
        return tuple(self(gens[:, i]) for i in range(gens.shape[1]))

    def is_zero_map(self) -> bool:
        return self.target.contains_columns(self.matrix)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupHom):
            return NotImplemented
        return (
            self.source.invariants() == other.source.invariants()
            and self.target.invariants() == other.target.invariants()
            and self.generator_images() == other.generator_images()
        )

    def __hash__(self) -> int:
        return hash(self.generator_images())


@dataclass(frozen=True, eq=False)
class Subquotient:
    """ker(outgoing) / im(incoming) with a lattice basis of the kernel"""

    group: FgAbGroup
    basis: IntMatrix
    ambient: FgAbGroup

    def classify(self, x: Any) -> tuple[int, ...]:
        col = as_vector(x, self.basis.shape[0]).reshape(-1, 1)
        z = solve_integer(self.basis, col)
        if z is None:
            raise ValueError("Element does not lie in the kernel")
        return self.group.reduce(z[:, 0])

    def inclusion(self) -> GroupHom:
        return GroupHom(self.group, self.ambient, self.basis, check=False)


def subquotient(outgoing: GroupHom, incoming: GroupHom | None = None) -> Subquotient:
    src, tgt = outgoing.source, outgoing.target
    n = src.ambient_rank
    stacked = hstack([outgoing.matrix, tgt.relations], rows=tgt.ambient_rank)
    preimage = integer_kernel(stacked)[:n, :]
    basis = lattice_basis(preimage)
    rel = solve_integer(basis, src.relations)
    if rel is None:
        raise ValueError("Source relations escape the kernel lattice")
    parts = [rel]
    if incoming is not None:
        if incoming.target.ambient_rank != n:
            raise ValueError("Incoming map does not land in the source group")
        imgs = solve_integer(basis, incoming.matrix)
        if imgs is None:
            raise ValueError("Incoming map does not land in the kernel")
        parts.append(imgs)
    b = basis.shape[1]
    group = FgAbGroup(hstack(parts, rows=b), ambient_rank=b)
    return Subquotient(group, _frozen(basis), src)


def kernel(h: GroupHom) -> FgAbGroup:
    return subquotient(h).group


def image(h: GroupHom) -> FgAbGroup:
    basis = lattice_basis(h.matrix)
    b = basis.shape[1]
    stacked = hstack([basis, h.target.relations], rows=h.target.ambient_rank)
    rel = integer_kernel(stacked)[:b, :]
    return FgAbGroup(rel, ambient_rank=b)


def cokernel(h: GroupHom) -> FgAbGroup:
    rows = h.target.ambient_rank
    return FgAbGroup(hstack([h.target.relations, h.matrix], rows=rows), ambient_rank=rows)


def tensor(g: FgAbGroup, h: FgAbGroup) -> FgAbGroup:
    """G (x) H on the ambient basis e_i (x) f_j, indexed i * n_H + j"""
    ng, nh = g.ambient_rank, h.ambient_rank
    rel = hstack(
        [kron(g.relations, identity(nh)), kron(identity(ng), h.relations)],
        rows=ng * nh,
    )
    return FgAbGroup(rel, ambient_rank=ng * nh)


def _torsion_count(order: int, target: FgAbGroup) -> int:
    if order == 0:
        return target.cardinality
    return math.prod(math.gcd(order, e) for e in target.orders)


def hom_from_images(
    source: FgAbGroup, target: FgAbGroup, images: Sequence[Sequence[int]]
) -> GroupHom:
    """Homomorphism sending the i-th Smith generator of source to images[i]"""
    cols = zeros(len(target.orders), len(images))
    for i, img in enumerate(images):
        cols[:, i] = as_vector(img, len(target.orders))
    mat = matmul(matmul(target.generators, cols), source.coordinates)
    return GroupHom(source, target, mat)


def hom_into_finite(
    source: FgAbGroup, target: FgAbGroup
) -> tuple[int, Iterator[GroupHom]]:
    """Count and enumerate Hom(source, target) for a finite target"""
    if not target.is_finite:
        raise ValueError(f"Target {target.describe()} is not finite")
    card = math.prod(_torsion_count(o, target) for o in source.orders)
    elements = list(target.elements())
    choices = [
        [t for t in elements if o == 0 or not any(target.scale(o, t))]
        for o in source.orders
    ]
    logger.debug(
        f"Hom({source.describe()}, {target.describe()}) has {card} elements"
    )

    def enumerate_homs() -> Iterator[GroupHom]:
        for imgs in itertools.product(*choices):
            yield hom_from_images(source, target, imgs)

    return card, enumerate_homs()


def pro_p_part(group: FgAbGroup, p: int) -> tuple[int, list[int]]:
    """Free rank and p-primary invariant factors of the pro-p completion"""
    if not isprime(p):
        raise ValueError(f"{p} is not a prime")
    torsion = [int(p ** multiplicity(p, d)) for d in group.invariant_factors if d % p == 0]
    return group.free_rank, torsion

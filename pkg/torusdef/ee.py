"""The twisted extension module E = A (+) I and the coinvariants of E (x) M.

E carries the action d*(a, sum n_c (c - 1)) = (d.a + sum n_c kappa(d, c),
sum n_c (dc - d)). The coinvariants (E (x) M)_G surject onto the lattice I_G M
through q([(a, c - 1) (x) m]) = c^-1 m - m, and H_1 of the extension group with
coefficients in M is computed as the kernel of q.
"""

from loguru import logger
from pydantic import BaseModel

from torusdef.errors import ConfigError, InvariantViolation
from torusdef.gmod import (
    FiniteGroup,
    GModule,
    TwoCocycle,
    augmentation_action,
    coinvariants,
)
from torusdef.intlin import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    block_diag,
    cokernel,
    hstack,
    identity,
    lattice_basis,
    matmul,
    solve_integer,
    subquotient,
    zeros,
)


def _twisted_matrices(delta: FiniteGroup, a_part: GModule, kappa: TwoCocycle) -> list[IntMatrix]:
    n_a = a_part.ambient_rank
    ne = delta.nonidentity
    mats = []
    for d in delta.elements:
        top = hstack(
            [a_part.action[d], _kappa_columns(kappa, d, ne, n_a)], rows=n_a
        )
        mat = block_diag([a_part.action[d], augmentation_action(delta, d)])
        mat[:n_a, :] = top
        mats.append(mat)
    return mats


def _kappa_columns(kappa: TwoCocycle, d: int, ne: list[int], n_a: int) -> IntMatrix:
    cols = zeros(n_a, len(ne))
    for i, c in enumerate(ne):
        cols[:, i] = kappa.value(d, c)
    return cols


def _underlying(delta: FiniteGroup, a_part: GModule) -> FgAbGroup:
    r = delta.order - 1
    rel = block_diag([a_part.underlying.relations, zeros(r, 0)])
    return FgAbGroup(rel, ambient_rank=a_part.ambient_rank + r)


class EModule:
    """A (+) I_G with the kappa-twisted action; built through ``build_E``"""

    def __init__(self, delta: FiniteGroup, a_part: GModule, kappa: TwoCocycle) -> None:
        if a_part.group is not delta or kappa.module is not a_part:
            raise ConfigError("kappa, A and the group do not belong together")
        self.delta = delta
        self.a_part = a_part
        self.kappa = kappa
        self.module = GModule(
            delta, _underlying(delta, a_part), _twisted_matrices(delta, a_part, kappa)
        )

    @property
    def underlying(self) -> FgAbGroup:
        return self.module.underlying

    @property
    def a_rank(self) -> int:
        return self.a_part.ambient_rank

    @property
    def ambient_rank(self) -> int:
        return self.module.ambient_rank

    def inclusion(self) -> GroupHom:
        """A -> E"""
        mat = zeros(self.ambient_rank, self.a_rank)
        mat[: self.a_rank, :] = identity(self.a_rank)
        return GroupHom(self.a_part.underlying, self.underlying, mat)

    def projection(self) -> GroupHom:
        """E -> I_G"""
        r = self.ambient_rank - self.a_rank
        mat = zeros(r, self.ambient_rank)
        mat[:, self.a_rank :] = identity(r)
        return GroupHom(self.underlying, FgAbGroup.free(r), mat)

    def extension_is_equivariant(self) -> bool:
        """Whether A -> E -> I_G are maps of modules"""
        inc, proj = self.inclusion().matrix, self.projection().matrix
        for d in self.delta.elements:
            e = self.module.action[d]
            if not self.underlying.contains_columns(
                matmul(e, inc) - matmul(inc, self.a_part.action[d])
            ):
                return False
            drift = matmul(proj, e) - matmul(augmentation_action(self.delta, d), proj)
            if any(drift.reshape(-1)):
                return False
        return True


def twisted_action_is_valid(delta: FiniteGroup, a_part: GModule, kappa: TwoCocycle) -> bool:
    """Check the action axioms of the twisted action without validating kappa first"""
    try:
        GModule(delta, _underlying(delta, a_part), _twisted_matrices(delta, a_part, kappa))
    except ConfigError:
        return False
    return True


def build_E(delta: FiniteGroup, a_part: GModule, kappa: TwoCocycle) -> EModule:  # noqa: N802
    kappa.require_valid()
    try:
        emodule = EModule(delta, a_part, kappa)
    except ConfigError as e:
        raise InvariantViolation(f"Twisted action fails for a valid kappa: {e}") from e
    logger.debug(f"E = {emodule.underlying.describe()} over {delta.name}")
    return emodule


class QData:
    """(E (x) M)_G, the surjection q onto I_G M, its kernel H_1 and a splitting"""

    def __init__(
        self,
        emodule: EModule,
        lattice: GModule,
        tensor_module: GModule,
        coinvariants: FgAbGroup,
        q: GroupHom,
        augmentation_basis: IntMatrix,
        h1_inclusion: GroupHom,
        split: GroupHom,
    ) -> None:
        self.emodule = emodule
        self.lattice = lattice
        self.tensor_module = tensor_module
        self.em_tensor_m_coinv = coinvariants
        self.q = q
        self.augmentation_basis = augmentation_basis
        self.h1_inclusion = h1_inclusion
        self.split = split

    @property
    def h1(self) -> FgAbGroup:
        return self.h1_inclusion.source

    @property
    def laurent_rank(self) -> int:
        return int(self.augmentation_basis.shape[1])


def _augmentation_lattice(lattice: GModule) -> IntMatrix:
    """Basis of I_G M inside M"""
    n = lattice.ambient_rank
    eye = identity(n)
    diffs = hstack([lattice.action[d] - eye for d in lattice.group.nonidentity], rows=n)
    return lattice_basis(diffs)


def coinvariants_with_q(emodule: EModule, lattice: GModule) -> QData:
    if lattice.group is not emodule.delta:
        raise ConfigError("The lattice lives over a different group")
    if not lattice.is_lattice:
        raise ConfigError("M must be a free Z-module")
    delta = emodule.delta
    n_m = lattice.ambient_rank
    n_e = emodule.ambient_rank
    tensor_module = emodule.module.tensor(lattice)
    coinv = coinvariants(tensor_module)

    basis = _augmentation_lattice(lattice)
    s = basis.shape[1]
    images = zeros(n_m, n_e * n_m)
    eye = identity(n_m)
    for j, c in enumerate(delta.nonidentity, start=emodule.a_rank):
        block = lattice.action[delta.inv(c)] - eye
        images[:, j * n_m : (j + 1) * n_m] = block
    q_mat = solve_integer(basis, images)
    if q_mat is None:
        raise InvariantViolation("q does not land in I_G M")
    target = FgAbGroup.free(s)
    try:
        q = GroupHom(coinv, target, q_mat)
    except ValueError as e:
        raise InvariantViolation(f"q is not defined on the coinvariants: {e}") from e
    if not cokernel(q).is_trivial:
        raise InvariantViolation("q is not surjective onto I_G M")

    h1_inclusion = subquotient(q).inclusion()
    split_mat = solve_integer(q_mat, identity(s))
    if split_mat is None:
        raise InvariantViolation("q has no integral section")
    split = GroupHom(target, coinv, split_mat)
    h1 = h1_inclusion.source
    if coinv.invariants() != (h1.free_rank + s, tuple(h1.invariant_factors)):
        raise InvariantViolation(
            f"(E(x)M)_G = {coinv.describe()} is not H_1 = {h1.describe()} plus Z^{s}"
        )
    logger.debug(
        f"(E(x)M)_G = {coinv.describe()}, H_1 = {h1.describe()}, rank I_G M = {s}"
    )
    return QData(emodule, lattice, tensor_module, coinv, q, basis, h1_inclusion, split)


class GroupAlgebraDescriptor(BaseModel):
    """Z[(E (x) M)_G] = Z[H_1][t_1^+-1, ..., t_s^+-1]"""

    base: str
    base_invariants: tuple[int, tuple[int, ...]]
    h1: str
    h1_invariants: tuple[int, tuple[int, ...]]
    laurent_rank: int
    lattice_rank: int
    coinvariant_rank: int

    def render(self) -> str:
        core = "Z" if self.h1 == "0" else f"Z[{self.h1}]"
        if self.laurent_rank == 0:
            return "Z" if self.base == "0" else f"Z[{self.base}]"
        ts = ",".join(f"t{i}^±1" for i in range(1, self.laurent_rank + 1))
        return f"{core}[{ts}]"


def representing_algebra(qdata: QData) -> GroupAlgebraDescriptor:
    lattice = qdata.lattice
    coinv_rank = coinvariants(lattice).free_rank
    s = qdata.laurent_rank
    if s != lattice.rank - coinv_rank:
        raise InvariantViolation(
            f"rank I_G M = {s} but rank M - rank M_G = {lattice.rank - coinv_rank}"
        )
    h1 = qdata.h1
    return GroupAlgebraDescriptor(
        base=qdata.em_tensor_m_coinv.describe(),
        base_invariants=qdata.em_tensor_m_coinv.invariants(),
        h1=h1.describe(),
        h1_invariants=h1.invariants(),
        laurent_rank=s,
        lattice_rank=lattice.rank,
        coinvariant_rank=coinv_rank,
    )

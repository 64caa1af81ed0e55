"""Exhaustive checks on small finite models, fanned out over worker processes.

Each grid point is a plain record; ``evaluate`` rebuilds its objects from the
record so points can be shipped to workers, and results come back in the
order the points were generated.
"""

import itertools
import math
import random
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from sympy import Matrix

from torusdef.defring import (
    LatticeSpec,
    LocalFieldPreset,
    closed_form_invariants,
    components,
    model_invariants,
)
from torusdef.ee import build_E
from torusdef.errors import BudgetExceededError
from torusdef.extmodel import (
    DEFAULT_BUDGET,
    CocycleCorrespondence,
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
    is_coboundary,
    pair_from_cocycle,
    pseudochar_of_rep,
    rep_from_cocycle,
    shapiro_section,
)
from torusdef.gmod import (
    FiniteGroup,
    GModule,
    TwoCocycle,
    augmentation_ideal,
    carry_cocycle,
    group_ring_module,
    homology,
    norm_sequence,
    random_lattice,
    random_module,
    random_unimodular,
    tate,
)
from torusdef.intlin import (
    FgAbGroup,
    IntMatrix,
    as_matrix,
    hom_into_finite,
    identity,
    matmul,
    smith_normal_form,
)

Kind = Literal["representability", "shapiro", "rank", "tate", "components", "substrate"]
Detail = int | str | list[int]


class GridPoint(BaseModel):
    kind: Kind
    label: str
    params: dict[str, Any] = Field(default_factory=dict)


class GridResult(BaseModel):
    kind: Kind
    label: str
    ok: bool
    details: dict[str, Detail] = Field(default_factory=dict)
    failures: list[str] = Field(default_factory=list)


# Models


def _group(name: str) -> FiniteGroup:
    return FiniteGroup.from_spec(name)


def _z2_rotation() -> list[list[list[int]]]:
    m = [[0, 1], [1, 1]]
    m2 = [[1, 1], [1, 2]]
    return [[[1, 0], [0, 1]], m, m2]


def build_grid_model(name: str) -> FiniteGroupModel:
    """Named extension models of the grid; ``G|A kappa``"""
    group_name, a_name = name.split("|")
    delta = _group(group_name)
    trivial2 = [[[1]]] * delta.order
    match a_name:
        case "0":
            a = GModule(delta, FgAbGroup.trivial(), [identity(0)] * delta.order)
            kappa = TwoCocycle.zero(a)
        case "Z/2 carry" | "Z/4 carry":
            n = 2 if a_name.startswith("Z/2") else 4
            a = GModule(delta, FgAbGroup.from_invariants([n]), trivial2)
            phase = next(ch for ch in delta.characters(2) if any(ch))
            kappa = carry_cocycle(a, phase, 2, [1])
        case "Z/4 sign kappa=2":
            phase = next(ch for ch in delta.characters(2) if any(ch))
            a = GModule(delta, FgAbGroup.from_invariants([4]), [[[(-1) ** s]] for s in phase])
            kappa = carry_cocycle(a, phase, 2, [2])
        case "Z/2^2 swap":
            a = GModule(
                delta, FgAbGroup.from_invariants([2, 2]), [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
            )
            kappa = carry_cocycle(a, (0, 1), 2, [1, 1])
        case "Z/2^2 rotation":
            a = GModule(delta, FgAbGroup.from_invariants([2, 2]), _z2_rotation())
            kappa = TwoCocycle.zero(a)
        case _:
            raise ValueError(f"Unknown grid model {name!r}")
    return build_extension(delta, a, kappa)


GRID_MODELS = {
    "cyclic 2": ["0", "Z/2 carry", "Z/4 carry", "Z/4 sign kappa=2", "Z/2^2 swap"],
    "cyclic 3": ["0", "Z/2^2 rotation"],
    "klein4": ["0", "Z/2 carry"],
}


def build_grid_lattice(group: FiniteGroup, name: str) -> GModule:
    match name:
        case "trivial":
            return GModule.lattice(group, [[[1]]] * group.order)
        case "sign":
            phase = next(ch for ch in group.characters(2) if any(ch))
            return GModule.sign(group, phase)
        case "regular":
            return group_ring_module(group)
        case "augmentation":
            return augmentation_ideal(group)
    raise ValueError(f"Unknown grid lattice {name!r}")


GRID_LATTICES = {
    "cyclic 2": ["trivial", "sign", "regular"],
    "cyclic 3": ["trivial", "augmentation"],
    "klein4": ["trivial", "sign"],
}


# Point evaluation


def _check(result: GridResult, ok: bool, message: str) -> None:
    if not ok:
        result.ok = False
        result.failures.append(message)


def _representability(point: GridPoint) -> GridResult:
    params = point.params
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    model = build_grid_model(params["model"])
    lattice = build_grid_lattice(model.delta, params["lattice"])
    ring = UnitGroupRing(params["modulus"])
    corr = CocycleCorrespondence(model, lattice, ring.units)
    module = corr.module
    qdata = corr.qdata

    z1 = enumerate_z1(model, module, params["budget"])
    n_homs, _ = hom_into_finite(qdata.em_tensor_m_coinv, ring.units)
    result.details |= {"z1": len(z1), "homs": n_homs}
    _check(result, len(z1) == n_homs, f"|Z^1| = {len(z1)} but |Hom| = {n_homs}")

    bar_h1 = homology(model, lattice.pullback(model, model.projection), 1)
    result.details["h1"] = qdata.h1.describe()
    _check(
        result,
        bar_h1.invariants() == qdata.h1.invariants(),
        f"ker q = {qdata.h1.describe()} but bar H_1 = {bar_h1.describe()}",
    )

    # Bridge image of B^1 lies in Hom(I_G M, V) and the bridge is injective on it
    boundaries = {coboundary(model, module, x) for x in module.underlying.elements()}
    images = [corr.to_coinvariant_hom(b) for b in boundaries]
    _check(result, all(corr.factors_through_q(h) for h in images), "B^1 escapes Hom(I_G M, V)")
    _check(result, len(set(images)) == len(boundaries), "B^1 does not inject")
    result.details["b1"] = len(boundaries)

    h1 = count_h1(model, module, len(z1))
    orbits = conjugation_orbits(z1)
    result.details |= {"h1_classes": h1, "orbits": orbits}
    _check(result, h1 == orbits, f"{orbits} conjugation orbits but |H^1| = {h1}")

    gens = [tuple(int(i == j) for j in range(len(module.underlying.orders)))
            for i in range(len(module.underlying.orders))]
    characters = set()
    for cocycle in z1:
        rho = rep_from_cocycle(cocycle)
        _check(result, rho.is_homomorphism(), "rep_from_cocycle is not a homomorphism")
        char = pseudochar_of_rep(rho, corr)
        characters.add(char)
        for x in gens:
            if pseudochar_of_rep(conjugate_rep(rho, x), corr) != char:
                _check(result, False, "pseudocharacter changes under conjugation")
                break
    result.details["characters"] = len(characters)
    return result


def _shapiro(point: GridPoint) -> GridResult:
    params = point.params
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    model = build_grid_model(params["model"])
    v = FgAbGroup.from_invariants([params["modulus"]])
    induced = InducedModule(model, v)
    a = model.a_module.underlying
    o = model.delta.order
    emodule = build_E(model.delta, model.a_module, model.kappa)

    n_phi, phis = hom_into_finite(a, v)
    n_alpha, alphas = hom_into_finite(FgAbGroup.free(o - 1), v)
    phis, alphas = list(phis), list(alphas)

    for phi in phis:
        section = shapiro_section(phi, model, induced)
        _check(result, section.is_cocycle(), "Shapiro section is not a cocycle")
        for coords in a.elements():
            k = model.element(coords, 0)
            got = v.reduce(induced.block(section.ambient(k), 0))
            _check(result, got == phi(a.lift(coords)), "Shapiro section misses phi on A")

    z1 = enumerate_z1(model, induced, params["budget"])
    from_pairs = {}
    for phi, alpha in itertools.product(phis, alphas):
        cocycle = cocycle_from_pair(phi, alpha, model, induced)
        from_pairs[cocycle.values] = (phi, alpha)
        back = pair_from_cocycle(cocycle, model)
        _check(result, back == (phi, alpha), "pair_from_cocycle does not invert")
        for d in model.delta.elements:
            moved = delta_act_on_pair(d, phi, alpha, emodule)
            lhs = delta_act_on_cocycle(d, cocycle)
            rhs = cocycle_from_pair(*moved, model, induced)
            _check(result, lhs.values == rhs.values, f"G-equivariance fails at d = {d}")
    enumerated = {c.values for c in z1}
    result.details |= {"z1": len(z1), "pairs": n_phi * n_alpha}
    _check(result, len(from_pairs) == n_phi * n_alpha, "cocycle_from_pair is not injective")
    _check(result, set(from_pairs) == enumerated, "cocycle_from_pair misses cocycles")

    h1 = count_h1(model, induced, len(z1))
    result.details["h1"] = h1
    _check(result, h1 == n_phi, f"|H^1(Ind V)| = {h1} but |Hom(A, V)| = {n_phi}")
    for cocycle in z1:
        phi, _ = pair_from_cocycle(cocycle, model)
        _check(
            result,
            is_coboundary(cocycle - shapiro_section(phi, model, induced)),
            "Lifting a class again moves it by more than a coboundary",
        )
    return result


def _rank(point: GridPoint) -> GridResult:
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    preset = LocalFieldPreset.model_validate(point.params["preset"])
    closed = closed_form_invariants(preset)
    model = model_invariants(preset)
    torsion = closed.mu_delta.invariant_factors
    result.details |= {
        "r": closed.r,
        "s": closed.s,
        "m": closed.m,
        "mu_delta": torsion,
        "model_rank": model.invariant_rank,
        "model_torsion": model.invariant_torsion,
    }
    _check(result, model.invariant_rank == closed.r, f"invariant rank {model.invariant_rank} != r = {closed.r}")
    _check(result, model.invariant_torsion == torsion, f"torsion {model.invariant_torsion} != {torsion}")
    _check(
        result,
        model.coinvariant_rank == model.invariant_rank,
        "coinvariant and invariant ranks differ",
    )
    for label, rank in model.e_ranks.items():
        result.details[label] = rank
        _check(result, rank == closed.m, f"{label}: rank {rank} != m = {closed.m}")
    return result


TATE_GROUPS = ["cyclic 2", "cyclic 3", "klein4", "cyclic 4", "cyclic 5", "s3", "cyclic 6"]


def _tate(point: GridPoint) -> GridResult:
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    group = _group(point.params["group"])
    rng = random.Random(point.params["seed"])
    module = random_module(group, 3, rng)
    result.details["module"] = module.underlying.describe()
    for degree in range(-2, 3):
        h = tate(group, module, degree)
        result.details[f"H^{degree}"] = h.describe()
        _check(result, h.is_finite, f"Tate group in degree {degree} is infinite")
        if h.is_finite:
            _check(result, group.order % h.exponent == 0, f"|G| does not kill H^{degree}")
    seq = norm_sequence(module)
    _check(
        result,
        seq.coinvariants.free_rank == seq.invariants.free_rank,
        f"rank N_G = {seq.coinvariants.free_rank} but rank N^G = {seq.invariants.free_rank}",
    )
    return result


def _components(point: GridPoint) -> GridResult:
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    mu = point.params["mu"]
    torsor = components(mu)
    result.details["count"] = torsor.count
    _check(result, torsor.count == math.prod(mu), "component count differs from |mu|")
    _check(result, torsor.is_faithful(), "X(mu) does not act faithfully")
    _check(result, torsor.is_transitive(), "X(mu) does not act transitively")
    return result


def _random_matrix(rows: int, cols: int, rng: random.Random) -> IntMatrix:
    return as_matrix([[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)])


def _substrate(point: GridPoint) -> GridResult:
    result = GridResult(kind=point.kind, label=point.label, ok=True)
    rng = random.Random(point.params["seed"])
    for _ in range(point.params["count"]):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        a = _random_matrix(rows, cols, rng)
        u, d, v = smith_normal_form(a)
        _check(result, not any((matmul(matmul(u, a), v) - d).reshape(-1)), "U A V != D")
        diag = [d[i, i] for i in range(min(rows, cols))]
        off = np.array(d, dtype=object, copy=True)
        for i in range(len(diag)):
            off[i, i] = 0
        _check(result, not any(off.reshape(-1)), "D is not diagonal")
        nonzero = [x for x in diag if x]
        _check(
            result,
            all(x > 0 for x in nonzero)
            and all(b % a_ == 0 for a_, b in itertools.pairwise(nonzero)),
            "diagonal is not a divisibility chain",
        )
        _check(result, abs(Matrix(u.tolist()).det()) == 1, "U is not unimodular")
        _check(result, abs(Matrix(v.tolist()).det()) == 1, "V is not unimodular")
        p, _ = random_unimodular(rows, rng)
        q, _ = random_unimodular(cols, rng)
        moved = matmul(matmul(p, a), q)
        _check(
            result,
            FgAbGroup(a).invariants() == FgAbGroup(moved).invariants(),
            "invariants depend on the presentation",
        )
    result.details["matrices"] = point.params["count"]
    return result


EVALUATORS: dict[Kind, Callable[[GridPoint], GridResult]] = {
    "representability": _representability,
    "shapiro": _shapiro,
    "rank": _rank,
    "tate": _tate,
    "components": _components,
    "substrate": _substrate,
}


def evaluate(point: GridPoint) -> GridResult:
    try:
        return EVALUATORS[point.kind](point)
    except BudgetExceededError as e:
        return GridResult(
            kind=point.kind, label=point.label, ok=False, failures=[f"budget exceeded: {e}"]
        )


# Grid construction


def _chi_choices(group: FiniteGroup, p: int, a: int) -> list[list[int]]:
    """All characters of a cyclic group into (Z/p^a)^x, as values per element"""
    if a == 0:
        return [[1] * group.order]
    n = p**a
    units = [u for u in range(1, n) if math.gcd(u, n) == 1]
    return [
        [pow(u, k, n) for k in group.elements]
        for u in units
        if pow(u, group.order, n) == 1
    ]


def _lattice_spec(module: GModule) -> LatticeSpec:
    return LatticeSpec(
        rank=module.ambient_rank,
        action=[[[int(x) for x in row] for row in mat] for mat in module.action],
    )


def rank_points(seed: int) -> list[GridPoint]:
    rng = random.Random(seed)
    points = []
    for p, d, group_name, a in itertools.product(
        (2, 3), (1, 2), ("trivial", "cyclic 2", "cyclic 3"), (0, 1, 2)
    ):
        group = _group(group_name)
        chi = rng.choice(_chi_choices(group, p, a))
        lattice = random_lattice(group, 3, rng)
        preset = {
            "p": p,
            "d": d,
            "delta": group_name,
            "a": a,
            "chi_cyc": chi,
            "lattice": _lattice_spec(lattice).model_dump(),
        }
        label = f"p={p} d={d} {group.name} a={a} rank M={lattice.rank}"
        points.append(GridPoint(kind="rank", label=label, params={"preset": preset}))
    return points


def grid_points(grid: Literal["small", "full"], budget: int, seed: int) -> list[GridPoint]:
    moduli = (3, 5) if grid == "small" else (3, 5, 4, 8)
    points = []
    for group_name, models in GRID_MODELS.items():
        for model, lattice, n in itertools.product(models, GRID_LATTICES[group_name], moduli):
            name = f"{group_name}|{model}"
            points.append(
                GridPoint(
                    kind="representability",
                    label=f"{name} M={lattice} R=Z/{n}",
                    params={"model": name, "lattice": lattice, "modulus": n, "budget": budget},
                )
            )
    for group_name, models in GRID_MODELS.items():
        sizes = (2,) if group_name == "klein4" or grid == "small" else (2, 4)
        for model, n in itertools.product(models, sizes):
            name = f"{group_name}|{model}"
            points.append(
                GridPoint(
                    kind="shapiro",
                    label=f"{name} V=Z/{n}",
                    params={"model": name, "modulus": n, "budget": budget},
                )
            )
    points += rank_points(seed)
    for i in range(20):
        group_name = TATE_GROUPS[i % len(TATE_GROUPS)]
        points.append(
            GridPoint(
                kind="tate",
                label=f"{group_name} #{i}",
                params={"group": group_name, "seed": f"{seed}-tate-{i}"},
            )
        )
    for mu in ([], [2], [3], [2, 4]):
        points.append(GridPoint(kind="components", label=f"mu={mu}", params={"mu": mu}))
    for i in range(4):
        points.append(
            GridPoint(
                kind="substrate",
                label=f"SNF batch {i}",
                params={"seed": f"{seed}-snf-{i}", "count": 50},
            )
        )
    return points


def run_grid(
    grid: Literal["small", "full"] = "small",
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    workers: int = 1,
    points: Sequence[GridPoint] | None = None,
) -> list[GridResult]:
    todo = list(points) if points is not None else grid_points(grid, budget, seed)
    logger.info(f"Evaluating {len(todo)} grid points on {workers} worker(s)")
    if workers <= 1:
        return [evaluate(p) for p in todo]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate, todo))

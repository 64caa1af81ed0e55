import pytest

from torusdef.errors import ConfigError
from torusdef.tools.verify import (
    GRID_LATTICES,
    GRID_MODELS,
    GridPoint,
    build_grid_lattice,
    build_grid_model,
    evaluate,
    grid_points,
    rank_points,
    run_grid,
)


def _point(kind: str, **params: object) -> GridPoint:
    return GridPoint(kind=kind, label=f"{kind} test", params=params)  # type: ignore[arg-type]


def test_grid_models_build() -> None:
    orders = {
        "cyclic 2|0": 2,
        "cyclic 2|Z/4 carry": 8,
        "cyclic 2|Z/2^2 swap": 8,
        "cyclic 3|Z/2^2 rotation": 12,
        "klein4|Z/2 carry": 8,
    }
    for name, order in orders.items():
        assert build_grid_model(name).order == order


def test_unknown_grid_names() -> None:
    with pytest.raises(ValueError, match="Unknown grid model"):
        build_grid_model("cyclic 2|Z/9")
    with pytest.raises(ConfigError):
        build_grid_model("dihedral 4|0")
    model = build_grid_model("cyclic 2|0")
    with pytest.raises(ValueError, match="Unknown grid lattice"):
        build_grid_lattice(model.delta, "twisted")


def test_every_grid_lattice_builds() -> None:
    for group_name, names in GRID_LATTICES.items():
        delta = build_grid_model(f"{group_name}|0").delta
        for name in names:
            assert build_grid_lattice(delta, name).is_lattice
    assert set(GRID_LATTICES) == set(GRID_MODELS)


def test_representability_point() -> None:
    result = evaluate(
        _point(
            "representability",
            model="cyclic 2|Z/4 carry",
            lattice="sign",
            modulus=5,
            budget=10**6,
        )
    )
    assert result.ok, result.failures
    assert result.details["z1"] == result.details["homs"]
    assert result.details["h1_classes"] == result.details["orbits"]


def test_shapiro_point() -> None:
    result = evaluate(_point("shapiro", model="cyclic 2|Z/2 carry", modulus=2, budget=10**6))
    assert result.ok, result.failures
    assert result.details["z1"] == result.details["pairs"]


def test_budget_is_reported_not_raised() -> None:
    result = evaluate(
        _point(
            "representability",
            model="cyclic 2|Z/4 carry",
            lattice="trivial",
            modulus=5,
            budget=1,
        )
    )
    assert not result.ok
    assert result.failures[0].startswith("budget exceeded")


def test_tate_and_substrate_points() -> None:
    points = [
        _point("tate", group="s3", seed="t-0"),
        _point("substrate", seed="s-0", count=10),
        _point("components", mu=[2, 4]),
    ]
    results = run_grid(points=points)
    assert [r.kind for r in results] == ["tate", "substrate", "components"]
    assert all(r.ok for r in results), [r.failures for r in results]


def test_rank_points_are_reproducible() -> None:
    first = rank_points(11)
    assert len(first) == 36
    assert [p.params for p in first] == [p.params for p in rank_points(11)]
    results = run_grid(points=first[:6])
    assert all(r.ok for r in results), [r.failures for r in results if not r.ok]


def test_grid_sizes() -> None:
    small = grid_points("small", 10**6, 0)
    full = grid_points("full", 10**6, 0)
    assert len(full) > len(small)
    kinds = {p.kind for p in small}
    assert kinds == {"representability", "shapiro", "rank", "tate", "components", "substrate"}


def test_parallel_run_matches_serial() -> None:
    points = [_point("components", mu=mu) for mu in ([], [2], [3])]
    serial = run_grid(points=points, workers=1)
    parallel = run_grid(points=points, workers=2)
    assert [r.model_dump() for r in serial] == [r.model_dump() for r in parallel]

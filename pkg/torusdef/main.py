from pathlib import Path
from typing import Any, Literal, NoReturn

import typer
from loguru import logger
from pydantic import BaseModel, Field
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from torusdef import __version__
from torusdef.config import (
    AbstractConfig,
    ComponentsConfig,
    Config,
    LocalConfig,
    VerifyConfig,
    list_presets,
    load_config,
    load_preset,
)
from torusdef.defring import (
    ComponentTorsor,
    RingDescriptor,
    RingDescriptors,
    abstract_descriptors,
    closed_form_invariants,
    components,
    local_descriptors,
    local_field_model,
    model_invariants,
)
from torusdef.ee import build_E, coinvariants_with_q, representing_algebra
from torusdef.errors import BudgetExceededError, ConfigError, TorusdefError
from torusdef.extmodel import (
    CocycleCorrespondence,
    UnitGroupRing,
    build_extension,
    conjugation_orbits,
    count_h1,
    enumerate_z1,
    pseudochar_of_rep,
    rep_from_cocycle,
)
from torusdef.gmod import TwoCocycle, cocycle_class_is_trivial
from torusdef.intlin import hom_into_finite
from torusdef.tools.verify import GridResult, run_grid

# Remove default logger and set production level
logger.remove()
logger.add(
    lambda msg: print(msg, end=""),
    level="WARNING",
    format="<level>{message}</level>",
)

REPORT_SCHEMA = "1"

app = typer.Typer()
console = Console()

# CLI Arguments
CONFIG_OPT = typer.Option(
    None,
    "--config",
    help="Path to a YAML or JSON config",
    exists=True,
    dir_okay=False,
    file_okay=True,
)

PRESET_OPT = typer.Option(
    None,
    "--preset",
    help="Name of a bundled preset (see `torusdef presets`)",
)

OUT_OPT = typer.Option(
    None,
    "--out",
    help="Write the JSON report here",
    dir_okay=False,
    file_okay=True,
)

ORACLE_OPT = typer.Option(
    False,
    "--oracle",
    help="Enumerate cocycles for every coefficient modulus in the config",
)

GRID_OPT = typer.Option("small", "--grid", help="Grid size: small or full")

BUDGET_OPT = typer.Option(10**6, "--budget", help="Candidate tuples allowed per enumeration")

SEED_OPT = typer.Option(0, "--seed", help="Seed for the randomized grid points")

WORKERS_OPT = typer.Option(
    None,
    "--workers",
    help="Worker processes (default: TORUSDEF_WORKERS or 1)",
)

MU_OPT = typer.Option(..., "--mu", help="Comma-separated torsion orders, e.g. 2,4")

BASEPOINT_OPT = typer.Option(
    False,
    "--basepoint",
    help="Mark the trivial character as basepoint (split extensions)",
)

LOG_LEVEL_OPT = typer.Option("WARNING", "--log-level", help="Log level")

Provenance = Literal["model", "theorem", "oracle"]
Value = int | str | list[int] | list[list[int]]


class Quantity(BaseModel):
    name: str
    value: Value
    provenance: Provenance


class OracleTally(BaseModel):
    modulus: int
    units: str
    z1: int
    homs: int
    h1_classes: int
    orbits: int
    characters: int
    agree: bool


class Report(BaseModel):
    schema_version: str = REPORT_SCHEMA
    version: str = __version__
    mode: str
    seed: int | None = None
    inputs: dict[str, Any] = Field(default_factory=dict)
    headlines: list[str] = Field(default_factory=list)
    quantities: list[Quantity] = Field(default_factory=list)
    descriptors: list[RingDescriptor] = Field(default_factory=list)
    relations: list[str] = Field(default_factory=list)
    components: ComponentTorsor | None = None
    oracle: list[OracleTally] = Field(default_factory=list)
    grid: list[GridResult] = Field(default_factory=list)
    status: Literal["ok", "budget_exceeded", "verification_failed"] = "ok"
    failures: list[str] = Field(default_factory=list)

    def add(self, name: str, value: Value, provenance: Provenance) -> None:
        self.quantities.append(Quantity(name=name, value=value, provenance=provenance))

    def fail(self, message: str) -> None:
        if self.status == "ok":
            self.status = "verification_failed"
        self.failures.append(message)

    def add_descriptors(self, descs: RingDescriptors) -> None:
        self.descriptors = list(descs)
        self.relations = descs.relations()
        self.headlines.append(descs.headline())


def _matrix(mat: Any) -> list[list[int]]:
    return [[int(x) for x in row] for row in mat]


def _run_oracle(config: AbstractConfig, report: Report) -> None:
    inputs = config.inputs
    model = build_extension(inputs.delta, inputs.a_module, inputs.kappa)
    for n in config.coefficient_moduli:
        ring = UnitGroupRing(n)
        corr = CocycleCorrespondence(model, inputs.lattice, ring.units)
        try:
            z1 = enumerate_z1(model, corr.module, config.budget, config.worker_count())
        except BudgetExceededError as e:
            report.status = "budget_exceeded"
            report.failures.append(str(e))
            return
        homs, _ = hom_into_finite(corr.qdata.em_tensor_m_coinv, ring.units)
        h1 = count_h1(model, corr.module, len(z1))
        orbits = conjugation_orbits(z1)
        chars = {pseudochar_of_rep(rep_from_cocycle(c), corr) for c in z1}
        tally = OracleTally(
            modulus=n,
            units=ring.units.describe(),
            z1=len(z1),
            homs=homs,
            h1_classes=h1,
            orbits=orbits,
            characters=len(chars),
            agree=len(z1) == homs and h1 == orbits,
        )
        report.oracle.append(tally)
        if not tally.agree:
            report.fail(f"R = Z/{n}: |Z^1| = {len(z1)}, |Hom| = {homs}, orbits {orbits}, |H^1| {h1}")


def _run_abstract(config: AbstractConfig, oracle: bool) -> Report:
    report = Report(
        mode="abstract", inputs=config.model_dump(mode="json", exclude={"mode", "workers"})
    )
    inputs = config.inputs
    qdata = coinvariants_with_q(build_E(inputs.delta, inputs.a_module, inputs.kappa), inputs.lattice)
    algebra = representing_algebra(qdata)
    coinv = qdata.em_tensor_m_coinv
    report.headlines.append(
        f"(E⊗M)_Δ ≅ {coinv.describe()}; s={qdata.laurent_rank}; "
        f"Z[(E⊗M)_Δ] = {algebra.render()}"
    )
    report.add("(E⊗M)_Δ", coinv.describe(), "model")
    report.add("(E⊗M)_Δ invariant factors", coinv.invariant_factors, "model")
    report.add("H_1", qdata.h1.describe(), "model")
    report.add("s", qdata.laurent_rank, "model")
    report.add("q", _matrix(qdata.q.matrix), "model")
    report.add("splitting", _matrix(qdata.split.matrix), "model")
    n_ps, descs = abstract_descriptors(qdata, config.p)
    report.add("N_ps", n_ps.describe(), "model")
    report.add("r", n_ps.free_rank, "model")
    report.add("m", n_ps.free_rank + qdata.laurent_rank, "model")
    report.add_descriptors(descs)
    split = cocycle_class_is_trivial(inputs.kappa)
    report.add("[κ] in H²(Δ, A)", "0" if split else "nonzero", "model")
    report.components = components(n_ps.torsion, canonical_basepoint=split)
    if oracle:
        _run_oracle(config, report)
    return report


def _run_local(config: LocalConfig) -> Report:
    report = Report(mode="local", inputs=config.model_dump(mode="json", exclude={"mode"}))
    closed = closed_form_invariants(config)
    n_ps, descs = local_descriptors(config)
    report.add("r", closed.r, "theorem")
    report.add("s", closed.s, "theorem")
    report.add("m", closed.m, "theorem")
    report.add("μ^Δ", closed.mu_delta.describe(), "theorem")
    report.add("N_ps", n_ps.describe(), "theorem")
    report.add_descriptors(descs)
    report.headlines.append(
        f"r={closed.r}, s={closed.s}, m={closed.m}, μ^Δ={closed.mu_delta.describe()}"
    )
    # the local rings are read off the split model G^0 x| G
    split = cocycle_class_is_trivial(TwoCocycle.zero(local_field_model(config)))
    report.add("[κ] in H²(Δ, A)", "0" if split else "nonzero", "model")
    report.components = components(n_ps.torsion, canonical_basepoint=split)

    model = model_invariants(config)
    report.add("rank (Γ⊗M)^Δ", model.invariant_rank, "model")
    report.add("torsion (Γ⊗M)^Δ", model.invariant_torsion, "model")
    report.add("rank (Γ⊗M)_Δ", model.coinvariant_rank, "model")
    if model.invariant_rank != closed.r:
        report.fail(f"rank (Γ⊗M)^Δ = {model.invariant_rank} but r = {closed.r}")
    if model.invariant_torsion != n_ps.torsion:
        report.fail(f"torsion {model.invariant_torsion} but μ^Δ = {n_ps.torsion}")
    if model.coinvariant_rank != model.invariant_rank:
        report.fail("invariants and coinvariants of Γ⊗M have different ranks")
    for label, rank in model.e_ranks.items():
        report.add(f"rank (E⊗M)_Δ, {label}", rank, "model")
        if rank != closed.m:
            report.fail(f"{label}: rank (E⊗M)_Δ = {rank} but m = {closed.m}")
    return report


def _run_verify(config: VerifyConfig) -> Report:
    report = Report(
        mode="verify", seed=config.seed, inputs=config.model_dump(mode="json", exclude={"mode", "workers"})
    )
    report.grid = run_grid(config.grid, config.budget, config.seed, config.worker_count())
    passed = sum(r.ok for r in report.grid)
    report.headlines.append(f"{passed}/{len(report.grid)} grid points agree")
    for result in report.grid:
        for failure in result.failures:
            if failure.startswith("budget exceeded") and report.status == "ok":
                report.status = "budget_exceeded"
            report.fail(f"{result.label}: {failure}")
    return report


def _run_components(config: ComponentsConfig) -> Report:
    report = Report(mode="components", inputs=config.model_dump(mode="json", exclude={"mode"}))
    torsor = components(config.mu, canonical_basepoint=config.basepoint)
    report.components = torsor
    report.headlines.append(f"{torsor.count} components; {torsor.roots_of_unity}")
    return report


def run(config: Config, oracle: bool | None = None) -> Report:
    """Compute the report for a validated config"""
    match config:
        case AbstractConfig():
            want = bool(config.coefficient_moduli) if oracle is None else oracle
            if want and not config.coefficient_moduli:
                raise ConfigError("--oracle needs coefficient_moduli in the config")
            return _run_abstract(config, want)
        case LocalConfig():
            return _run_local(config)
        case VerifyConfig():
            return _run_verify(config)
        case ComponentsConfig():
            return _run_components(config)
    raise ConfigError(f"Unknown mode {config!r}")


# Rendering


def render(report: Report) -> None:
    for line in report.headlines:
        console.print(f"[bold]{escape(line)}[/bold]")
    if report.quantities:
        table = Table("quantity", "value", "provenance")
        for q in report.quantities:
            table.add_row(escape(q.name), escape(str(q.value)), q.provenance)
        console.print(table)
    if report.descriptors:
        table = Table("ring", "descriptor", "dim", "components")
        for d in report.descriptors:
            table.add_row(
                d.name, escape(d.render()), str(d.relative_dimension), str(d.component_count)
            )
        console.print(table)
        for rel in report.relations:
            console.print(escape(rel))
        console.print(report.descriptors[0].base_note)
    if report.components is not None and report.mode == "components":
        torsor = report.components
        table = Table("character", *[str(label) for label in torsor.labels])
        for chi, row in zip(torsor.characters, torsor.action, strict=True):
            table.add_row(str(chi), *[str(torsor.labels[i]) for i in row])
        console.print(table)
        if torsor.basepoint is not None:
            console.print(f"basepoint: {torsor.labels[torsor.basepoint]}")
    if report.oracle:
        table = Table("R", "R^x", "|Z^1|", "|Hom|", "|H^1|", "orbits", "agree")
        for t in report.oracle:
            table.add_row(
                f"Z/{t.modulus}", t.units, str(t.z1), str(t.homs),
                str(t.h1_classes), str(t.orbits), "yes" if t.agree else "[red]no[/red]",
            )
        console.print(table)
    if report.grid:
        table = Table("kind", "point", "ok")
        for r in report.grid:
            table.add_row(r.kind, escape(r.label), "ok" if r.ok else "[red]FAIL[/red]")
        console.print(table)
    for failure in report.failures:
        console.print(f"[red]{escape(failure)}[/red]")


def _emit(report: Report, out: Path | None) -> None:
    render(report)
    if out is not None:
        out.write_text(report.model_dump_json(indent=2) + "\n")
        console.print(f"Report written to {out}")
    if report.status != "ok":
        raise typer.Exit(3)


def _exit_code(e: Exception) -> int:
    if isinstance(e, TorusdefError):
        return e.exit_code
    if isinstance(e, ValueError):
        return 2
    return 4


def _fail(e: Exception) -> NoReturn:
    console.print(f"[red]Error: {escape(str(e))}[/red]")
    raise typer.Exit(_exit_code(e)) from e


def _resolve(config_path: Path | None, preset: str | None, mode: str) -> Config:
    if (config_path is None) == (preset is None):
        raise ConfigError("Give exactly one of --config and --preset")
    config = load_config(config_path) if config_path is not None else load_preset(str(preset))
    if config.mode != mode:
        raise ConfigError(f"Config has mode '{config.mode}', expected '{mode}'")
    return config


@app.callback()
def main(log_level: str = LOG_LEVEL_OPT) -> None:
    """Exact deformation-ring invariants for generalised tori"""
    logger.remove()
    logger.add(
        lambda msg: print(msg, end=""),
        level=log_level.upper(),
        format="<level>{message}</level>",
    )


@app.command()
def abstract(
    config: Path | None = CONFIG_OPT,
    preset: str | None = PRESET_OPT,
    out: Path | None = OUT_OPT,
    oracle: bool = ORACLE_OPT,
    workers: int | None = WORKERS_OPT,
) -> None:
    """(E⊗M)_Δ, H_1 and ring descriptors for an explicit extension"""
    try:
        cfg = _resolve(config, preset, "abstract")
        if workers is not None and isinstance(cfg, AbstractConfig):
            cfg = cfg.model_copy(update={"workers": workers})
        _emit(run(cfg, oracle=True if oracle else None), out)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e)


@app.command()
def local(
    config: Path | None = CONFIG_OPT,
    preset: str | None = PRESET_OPT,
    out: Path | None = OUT_OPT,
) -> None:
    """Closed-form ranks and descriptors for a local-field preset"""
    try:
        _emit(run(_resolve(config, preset, "local")), out)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e)


@app.command()
def verify(
    grid: str = GRID_OPT,
    budget: int = BUDGET_OPT,
    seed: int = SEED_OPT,
    workers: int | None = WORKERS_OPT,
    out: Path | None = OUT_OPT,
) -> None:
    """Run the exhaustive verification grid"""
    try:
        if grid not in ("small", "full"):
            raise ConfigError(f"--grid must be 'small' or 'full', got '{grid}'")
        cfg = VerifyConfig.model_validate(
            {"mode": "verify", "grid": grid, "budget": budget, "seed": seed, "workers": workers}
        )
        cfg.check()
        _emit(run(cfg), out)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e)


@app.command(name="components")
def components_cmd(
    mu: str = MU_OPT,
    out: Path | None = OUT_OPT,
    basepoint: bool = BASEPOINT_OPT,
) -> None:
    """Irreducible components as a torsor under the character group of mu"""
    try:
        try:
            orders = [int(x) for x in mu.split(",") if x.strip()]
        except ValueError as e:
            raise ConfigError(f"--mu must be comma-separated integers, got '{mu}'") from e
        cfg = ComponentsConfig(mode="components", mu=orders, basepoint=basepoint)
        _emit(run(cfg), out)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e)


@app.command()
def presets() -> None:
    """List the bundled presets"""
    table = Table("preset", "mode")
    for name, mode in list_presets().items():
        table.add_row(name, mode)
    console.print(table)


if __name__ == "__main__":
    app()

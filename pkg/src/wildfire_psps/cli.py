"""Command-line front end: ``wildfire-psps``.

Exit codes: 0 success, 1 a ``verify`` check failed, 2 configuration error,
3 data error, 4 solver failure.
"""

from __future__ import annotations

import datetime as dt
import logging
import sys
from pathlib import Path

import click

from . import study
from .config import StudyConfig, defaults_yaml, load_config
from .errors import ConfigError, DataError, PspsError, SolverError
from .metrics import MetricKind

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3, 4

logger = logging.getLogger("wildfire_psps")


def _parse_days(values: tuple[str, ...]) -> list[dt.date] | None:
    """``--days`` accepts ISO dates, comma lists and ``start..end`` ranges."""
    out: set[dt.date] = set()
    for raw in values:
        for part in filter(None, (p.strip() for p in raw.split(","))):
            try:
                if ".." in part:
                    a, b = (dt.date.fromisoformat(x) for x in part.split("..", 1))
                    if b < a:
                        raise ValueError
                    out.update(a + dt.timedelta(n) for n in range((b - a).days + 1))
                else:
                    out.add(dt.date.fromisoformat(part))
            except ValueError:
                raise ConfigError(f"--days: cannot parse {part!r}") from None
    return sorted(out) or None


def _parse_metrics(raw: str | None) -> list[MetricKind] | None:
    if not raw:
        return None
    try:
        return [MetricKind(m.strip().upper()) for m in raw.split(",") if m.strip()]
    except ValueError:
        raise ConfigError(f"--metrics: unknown metric in {raw!r}") from None


def _load(path: str, **overrides) -> StudyConfig:
    cfg = load_config(path)
    return cfg.with_overrides(**overrides)


def _report_incomplete(result: study.StageResult) -> None:
    for day, metric, why in result.incomplete_days:
        click.echo(f"incomplete: {day.isoformat()} {metric.value}: {why}", err=True)


config_option = click.option(
    "-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Study configuration (YAML)."
)
days_option = click.option("--days", multiple=True, help="Restrict to dates: 2020-10-26, a,b or start..end.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="More log output.")
def cli(verbose: int) -> None:
    """Wildfire risk metrics and power shutoff planning."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@config_option
@click.option("--metrics", help="Comma-separated subset of MA,ME,CU,HRMA,HRME,HRCU.")
def risk(config_path: str, metrics: str | None) -> None:
    """Line risk table for the study range."""
    cfg = _load(config_path)
    chosen = _parse_metrics(metrics)
    if chosen:
        cfg = cfg.with_overrides(metrics=tuple(chosen))
    for p in study.run_risk(cfg, chosen).paths:
        click.echo(str(p))


@cli.group()
def plan() -> None:
    """De-energization plans."""


@plan.command("threshold")
@config_option
@days_option
def plan_threshold(config_path: str, days: tuple[str, ...]) -> None:
    """Percentile threshold plans and their 24-hour dispatch."""
    cfg = _load(config_path)
    for p in study.run_threshold(cfg, _parse_days(days)).paths:
        click.echo(str(p))


@plan.command("ops")
@config_option
@days_option
@click.option("--mip-gap", type=click.FloatRange(min=0), help="Relative MIP gap.")
@click.option("--time-limit-s", type=click.FloatRange(min=0, min_open=True), help="Solver time limit per day and metric.")
@click.option("--epsilon-switch", type=click.FloatRange(min=0, min_open=True), help="Objective weight per switched-off line.")
@click.option("--export-lp", type=click.Path(file_okay=False), help="Directory for LP-format model dumps.")
def plan_ops(config_path, days, mip_gap, time_limit_s, epsilon_switch, export_lp) -> None:
    """Optimal shutoff plans under the threshold plans' risk budgets."""
    cfg = _load(config_path, mip_gap=mip_gap, time_limit_s=time_limit_s, epsilon_switch=epsilon_switch)
    result = study.run_ops(cfg, _parse_days(days), Path(export_lp) if export_lp else None)
    for p in result.paths:
        click.echo(str(p))
    _report_incomplete(result)


@cli.command()
@config_option
def compare(config_path: str) -> None:
    """Comparison report: shed totals, unique lines, similarity."""
    for p in study.run_compare(_load(config_path)).paths:
        click.echo(str(p))


@cli.group()
def verify() -> None:
    """Check the planners and kernels against reference implementations."""


def _finish(rep) -> None:
    click.echo(rep.summary())
    for line in rep.failures[:20]:
        click.echo(f"  {line}", err=True)
    if not rep.ok:
        sys.exit(EXIT_CHECK)


@verify.command("ops")
@click.option("--count", default=25, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--max-buses", default=10, show_default=True, type=click.IntRange(min=3))
@click.option("--max-switchable", default=12, show_default=True, type=click.IntRange(min=0))
@click.option("--tol", default=1e-6, show_default=True, type=float)
def verify_ops(count, seed, max_buses, max_switchable, tol) -> None:
    """MILP objective vs exhaustive enumeration on random networks."""
    from .verify import check_ops_oracle

    _finish(check_ops_oracle(count, seed, max_buses, max_switchable, tol))


@verify.command("metrics")
@click.option("--count", default=100_000, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
def verify_metrics(count, seed) -> None:
    """Order and scale properties of the metrics on fuzzed pixel vectors."""
    from .verify import check_metric_properties

    _finish(check_metric_properties(count, seed))


@verify.command("trace")
@click.option("--count", default=1000, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
def verify_trace(count, seed) -> None:
    """Line rasterization vs dense point sampling."""
    from .verify import check_supercover

    _finish(check_supercover(count, seed))


@verify.command("plans")
@config_option
def verify_plans(config_path) -> None:
    """Recheck OPS risk budgets and decision-hour shed from the stage files."""
    from .verify import check_study_plans

    _finish(check_study_plans(_load(config_path)))


@cli.group("config")
def config_group() -> None:
    """Configuration helpers."""


@config_group.command("print-defaults")
def print_defaults() -> None:
    """Print the default configuration."""
    click.echo(defaults_yaml(), nl=False)


@config_group.command("validate")
@config_option
def validate(config_path: str) -> None:
    """Validate a configuration file and the paths it names."""
    cfg = load_config(config_path)
    click.echo(f"ok: {len(cfg.study.days())} study days, metrics {','.join(m.value for m in cfg.metrics)}")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Target directory.")
def synth(out_dir: str) -> None:
    """Write the synthetic 14-bus study (network, rasters, demand, config)."""
    from .synth import generate

    click.echo(str(generate(out_dir)))


def main(argv: list[str] | None = None) -> int:
    """Entry point; maps library errors onto exit codes."""
    try:
        cli.main(args=argv, prog_name="wildfire-psps", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_CHECK
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except SolverError as exc:
        click.echo(f"solver error: {exc}", err=True)
        return EXIT_SOLVER
    except PspsError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line client around the engine, pipeline, and service.

Subcommands mirror the artifact lifecycle: abduce a scenario into a
bundle, train its probability table, infer under a condition or explicit
observations, evaluate datasets, compare abduction variants, and serve
the HTTP API. Outputs are canonical JSON documents on stdout unless a
path is given; errors exit nonzero with the message on stderr. An
unknown verdict is a result, not an error.
"""

from __future__ import annotations

from pathlib import Path

import click

from .bundle import (
    ScenarioBundle,
    Provenance,
    bundle_to_json,
    estimate_to_json,
    load_bundle,
    load_bundles,
    parse_scenario,
    table_to_json,
)
from .config import AppConfig
from .engine import PreferenceOverride, infer
from .errors import BirdError
from .evalharness import ingest, run_decision_sweep, run_decisions, run_pairwise
from .factors import PartialObservation, canonical_json, sample_assignments
from .pipeline import (
    AbductionConfig,
    abduce as run_abduction,
    classify_and_prune,
    elicit_targets,
    entail,
)
from .pool import EstimatorKind
from .sessions import SessionStore
from .trainer import TrainingConfig, train as run_training

ESTIMATORS = {
    "trained": EstimatorKind.TRAINED,
    "fixed": EstimatorKind.FIXED_INIT,
    "half": EstimatorKind.HALF_ASSUMPTION,
    "one-over-n": EstimatorKind.ONE_OVER_N,
}


def _fail(error: BirdError) -> "click.ClickException":
    exc = click.ClickException(str(error))
    exc.exit_code = 1
    return exc


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _parse_override(raw: str) -> tuple[str, str, float]:
    try:
        pair, p = raw.rsplit(":", 1)
        factor_id, value_id = pair.split("=", 1)
        return factor_id, value_id, float(p)
    except ValueError:
        raise click.BadParameter(
            f"override must look like factor=value:probability, got {raw!r}"
        )


def _parse_observation(raw: str) -> tuple[str, str]:
    try:
        factor_id, value_id = raw.split("=", 1)
        return factor_id, value_id
    except ValueError:
        raise click.BadParameter(f"observation must look like factor=value, got {raw!r}")


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON config file selecting provider, fixtures, cache, bundles.",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None):
    """Probability-table decision making over abduced factors."""
    try:
        ctx.obj = AppConfig.from_file(config_path) if config_path else AppConfig()
    except BirdError as exc:
        raise _fail(exc)


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--direct", is_flag=True, help="Single-stage factor generation.")
@click.option("--sentences", type=int, default=10, show_default=True)
@click.pass_obj
def abduce(config: AppConfig, scenario_file: str, output: str | None, direct: bool, sentences: int):
    """Generate, classify, and prune factors for a scenario."""
    try:
        provider = config.require_provider()
        scenario = parse_scenario(Path(scenario_file).read_text(encoding="utf-8"))
        draft = run_abduction(
            provider,
            scenario,
            AbductionConfig(sentences_per_outcome=sentences, direct=direct),
        )
        space, verdicts = classify_and_prune(provider, scenario, draft.space)
        bundle = ScenarioBundle(
            scenario=scenario,
            space=space,
            verdicts=verdicts,
            provenance=Provenance(provider_id=provider.provider_id),
        )
    except BirdError as exc:
        raise _fail(exc)
    _emit(canonical_json(bundle_to_json(bundle)), output)


@main.command()
@click.argument("bundle_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--bundle-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the bundle with the trained table embedded.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=128, show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--learning-rate", type=float, default=1e-2, show_default=True)
@click.option("--batch-size", type=int, default=4, show_default=True)
@click.option("--alpha", type=float, default=10.0, show_default=True)
@click.option("--margin", type=float, default=0.0, show_default=True)
@click.pass_obj
def train(
    config: AppConfig,
    bundle_file: str,
    output: str | None,
    bundle_out: str | None,
    seed: int,
    samples: int,
    epochs: int,
    learning_rate: float,
    batch_size: int,
    alpha: float,
    margin: float,
):
    """Learn the per-value probability table for an abduced bundle."""
    try:
        provider = config.require_provider()
        bundle = load_bundle(bundle_file)
        training = TrainingConfig(
            learning_rate=learning_rate,
            epochs=epochs,
            batch_size=batch_size,
            margin=margin,
            alpha=alpha,
            sample_count=samples,
            seed=seed,
        )
        assignments = sample_assignments(bundle.space, training.sample_count, seed)
        targets = elicit_targets(provider, bundle.scenario, bundle.space, assignments)
        result = run_training(bundle.space, targets, training)
        table_doc = table_to_json(
            bundle.scenario.id,
            bundle.space,
            result.table,
            result.loss_trace,
            result.config,
        )
        if bundle_out:
            trained = ScenarioBundle(
                scenario=bundle.scenario,
                space=bundle.space,
                verdicts=bundle.verdicts,
                table=result.table,
                loss_trace=result.loss_trace,
                train_config=result.config,
                provenance=Provenance(
                    provider_id=provider.provider_id, seed=seed
                ),
            )
            Path(bundle_out).write_text(
                canonical_json(bundle_to_json(trained)), encoding="utf-8"
            )
    except BirdError as exc:
        raise _fail(exc)
    _emit(canonical_json(table_doc), output)


@main.command(name="infer")
@click.argument("bundle_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--condition", default=None, help="Condition text to entail onto factors.")
@click.option("--observe", multiple=True, metavar="FACTOR=VALUE",
              help="Observe a factor value directly (repeatable).")
@click.option("--estimator", type=click.Choice(sorted(ESTIMATORS)), default="trained",
              show_default=True)
@click.option("--override", "overrides", multiple=True, metavar="FACTOR=VALUE:P",
              help="Replace a table entry before inference (repeatable).")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def infer_cmd(
    config: AppConfig,
    bundle_file: str,
    condition: str | None,
    observe: tuple[str, ...],
    estimator: str,
    overrides: tuple[str, ...],
    output: str | None,
):
    """Estimate the outcome probabilities under a condition or observations."""
    try:
        bundle = load_bundle(bundle_file)
        table = bundle.require_table()
        obs = PartialObservation.empty()
        if condition:
            provider = config.require_provider()
            obs = entail(
                provider, bundle.scenario, condition, bundle.space, config.entailment
            )
        for raw in observe:
            factor_id, value_id = _parse_observation(raw)
            obs = obs.observe(factor_id, value_id)
        obs.validate(bundle.space)
        preference = PreferenceOverride(
            values={
                (factor_id, value_id): p
                for factor_id, value_id, p in map(_parse_override, overrides)
            }
        )
        estimate = infer(
            bundle.space, table, obs, ESTIMATORS[estimator], preference
        )
    except BirdError as exc:
        raise _fail(exc)
    _emit(canonical_json(estimate_to_json(estimate, bundle.space)), output)


@main.group()
def evaluate():
    """Score datasets against trained bundles."""


def _entail_fn(config: AppConfig):
    provider = config.require_provider()
    entailment = config.entailment

    def entail_fn(bundle: ScenarioBundle, condition: str) -> PartialObservation:
        return entail(provider, bundle.scenario, condition, bundle.space, entailment)

    return entail_fn


@evaluate.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.argument("bundle_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--estimator", type=click.Choice(sorted(ESTIMATORS)), default="trained",
              show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@click.pass_obj
def pairwise(config: AppConfig, dataset: str, bundle_files: tuple[str, ...],
             estimator: str, as_json: bool):
    """Pairwise preference scoring with per-category and micro F1."""
    try:
        records = ingest(dataset, "pairwise")
        bundles = load_bundles(bundle_files)
        report = run_pairwise(
            records, bundles, ESTIMATORS[estimator], _entail_fn(config)
        )
    except BirdError as exc:
        raise _fail(exc)
    click.echo(canonical_json(report.to_json()) if as_json else report.format_table())


@evaluate.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.argument("bundle_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--estimator", type=click.Choice(sorted(ESTIMATORS)), default="trained",
              show_default=True)
@click.option("--sweep", is_flag=True, help="Report every estimator side by side.")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@click.pass_obj
def decisions(config: AppConfig, dataset: str, bundle_files: tuple[str, ...],
              estimator: str, sweep: bool, as_json: bool):
    """Hard-label decision accuracy with the unknown rate."""
    try:
        records = ingest(dataset, "decisions")
        bundles = load_bundles(bundle_files)
        entail_fn = _entail_fn(config)
        if sweep:
            reports = run_decision_sweep(
                records, bundles, list(ESTIMATORS.values()), entail_fn
            )
            if as_json:
                click.echo(
                    canonical_json(
                        {kind.value: rep.to_json() for kind, rep in reports.items()}
                    )
                )
            else:
                for kind, rep in reports.items():
                    click.echo(f"[{kind.value}]")
                    click.echo(rep.format_table())
            return
        report = run_decisions(records, bundles, ESTIMATORS[estimator], entail_fn)
    except BirdError as exc:
        raise _fail(exc)
    click.echo(canonical_json(report.to_json()) if as_json else report.format_table())


@main.group()
def ablate():
    """Compare pipeline variants."""


@ablate.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sentences", type=int, default=10, show_default=True)
@click.pass_obj
def factors(config: AppConfig, scenario_file: str, sentences: int):
    """Two-stage versus direct factor generation, side by side."""
    try:
        provider = config.require_provider()
        scenario = parse_scenario(Path(scenario_file).read_text(encoding="utf-8"))
        for label, direct in (("two-stage", False), ("direct", True)):
            draft = run_abduction(
                provider,
                scenario,
                AbductionConfig(sentences_per_outcome=sentences, direct=direct),
            )
            click.echo(f"[{label}] {len(draft.space.factors)} factors")
            for factor in draft.space.factors:
                values = "; ".join(v.text for v in factor.values)
                click.echo(f"  {factor.name}: {values}")
    except BirdError as exc:
        raise _fail(exc)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(config: AppConfig, port: int, host: str):
    """Run the HTTP decision service over the configured bundles."""
    import uvicorn

    from .service import create_app

    try:
        bundles = load_bundles(config.bundle_paths)
        if not bundles:
            raise click.ClickException("config lists no bundle_paths to serve")
        store = SessionStore(bundles, config.session_log)
        app = create_app(
            bundles,
            store=store,
            provider=config.build_provider(),
            entailment=config.entailment,
            question_seed=config.question_seed,
        )
    except BirdError as exc:
        raise _fail(exc)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()

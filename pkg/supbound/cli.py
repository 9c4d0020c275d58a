import pathlib
import sys

import click

from supbound.actions.core import EXIT_USAGE, CommandOutput, OutputFormat
from supbound.services.action_runner import execute_action
from supbound.services.encoder import ScriptFormat
from supbound.services.reports import CriterionKind, PiMode

KINDS = [k.value for k in CriterionKind]
PI_MODES = [m.value for m in PiMode]
SCRIPT_FORMATS = [f.value for f in ScriptFormat]
PATH = click.Path(dir_okay=False, path_type=pathlib.Path)


def common_options(func):
    func = click.option("--seed", type=int, default=None, help="Seed for sampling plans and random terms")(func)
    func = click.option("--json", "json_output", is_flag=True, help="Print one JSON object instead of text")(func)
    return func


def criterion_options(func):
    func = click.option("--relax-nullary", default=None, help="Allow nullary constructors a value up to this bound")(func)
    func = click.option("--pi-mode", type=click.Choice(PI_MODES), default=None, help="Strictness of PI rules")(func)
    func = click.option("--kind", type=click.Choice(KINDS), default=None, help="Interpretation criterion")(func)
    return func


def _run(action_id: str, json_output: bool, seed, **options) -> int:
    config_data = {k: v for k, v in options.items() if v is not None}
    config_data["output_format"] = (OutputFormat.JSON if json_output else OutputFormat.TEXT).value
    if seed is not None:
        config_data["seed"] = seed
    outcome = execute_action(action_id, config_data)
    if json_output:
        envelope = CommandOutput(command=action_id, exit_code=outcome.exit_code, result=outcome.result)
        click.echo(envelope.render(), nl=False)
    elif outcome.text:
        click.echo(outcome.text, nl=False)
    if outcome.diagnostic:
        click.echo(outcome.diagnostic, err=True)
    return outcome.exit_code


@click.group()
def cli():
    """Sup-interpretations of constructor term rewriting systems."""


@cli.command()
@click.argument("trs_path", type=PATH)
@common_options
def check(trs_path, json_output, seed):
    """Signature, orthogonality and size of a TRS."""
    return _run("check", json_output, seed, trs_path=trs_path)


@cli.command()
@click.argument("trs_path", type=PATH)
@common_options
def dp(trs_path, json_output, seed):
    """List the dependency pairs."""
    return _run("dp", json_output, seed, trs_path=trs_path)


@cli.command()
@click.argument("trs_path", type=PATH)
@click.option("--assignment", "assignment_path", type=PATH, required=True, help="Assignment file")
@criterion_options
@click.option("--delta", default=None, help="Margin of 2b rules")
@click.option("--epsilon", default=None, help="Margin of 2a subterm constraints")
@click.option("--approximate", is_flag=True, default=None, help="Tolerance checks for irrational coefficients")
@common_options
def verify(trs_path, assignment_path, kind, pi_mode, relax_nullary, delta, epsilon, approximate, json_output, seed):
    """Check an assignment against a criterion."""
    return _run(
        "verify", json_output, seed,
        trs_path=trs_path, assignment_path=assignment_path, kind=kind, pi_mode=pi_mode,
        relax_nullary=relax_nullary, delta=delta, epsilon=epsilon, approximate=approximate,
    )


@cli.command()
@click.argument("trs_path", type=PATH)
@criterion_options
@click.option("--domain", default=None, help="nat or rat:<d>")
@click.option("--max-branches", type=int, default=None, help="Branches per defined symbol")
@click.option("--coeff-bound", type=int, default=None, help="Largest coefficient numerator")
@click.option("--linear-exact", "linear", is_flag=True, default=None, help="Affine templates with exact constants")
@click.option("--slope-bound", type=int, default=None, help="Slope grid bound of --linear-exact")
@click.option("--timeout", type=float, default=None, help="Time budget in seconds")
@click.option("-o", "--output", "output_path", type=PATH, default=None, help="Write the assignment here")
@common_options
def synth(trs_path, kind, pi_mode, relax_nullary, domain, max_branches, coeff_bound, linear, slope_bound,
          timeout, output_path, json_output, seed):
    """Search for an assignment satisfying a criterion."""
    return _run(
        "synth", json_output, seed,
        trs_path=trs_path, kind=kind, pi_mode=pi_mode, relax_nullary=relax_nullary, domain=domain,
        max_branches=max_branches, coeff_bound=coeff_bound, linear=linear, slope_bound=slope_bound,
        timeout=timeout, output_path=output_path,
    )


@cli.command()
@click.argument("trs_path", type=PATH)
@criterion_options
@click.option("-k", "k", type=int, default=None, help="Branches per template")
@click.option("-d", "d", type=int, default=None, help="Template degree")
@click.option("--format", "script_format", type=click.Choice(SCRIPT_FORMATS), default=None, help="Script syntax")
@click.option("-o", "--output", "output_path", type=PATH, default=None, help="Write the SMT-LIB script here")
@common_options
def encode(trs_path, kind, pi_mode, relax_nullary, k, d, script_format, output_path, json_output, seed):
    """Export the existence question as an SMT-LIB script."""
    return _run(
        "encode", json_output, seed,
        trs_path=trs_path, kind=kind, pi_mode=pi_mode, relax_nullary=relax_nullary, k=k, d=d,
        script_format=script_format, output_path=output_path,
    )


@cli.command(name="check-model")
@click.argument("trs_path", type=PATH)
@click.argument("model_path", type=PATH)
@criterion_options
@click.option("-k", "k", type=int, default=None, help="Branches per template")
@click.option("-d", "d", type=int, default=None, help="Template degree")
@common_options
def check_model(trs_path, model_path, kind, pi_mode, relax_nullary, k, d, json_output, seed):
    """Verify a solver model of an encoding."""
    return _run(
        "check-model", json_output, seed,
        trs_path=trs_path, model_path=model_path, kind=kind, pi_mode=pi_mode, relax_nullary=relax_nullary,
        k=k, d=d,
    )


@cli.command()
@click.argument("trs_path", type=PATH)
@click.option("--max-size", type=int, default=None, help="Largest basic term size")
@click.option("--budget", type=int, default=None, help="State budget per derivation")
@common_options
def rc(trs_path, max_size, budget, json_output, seed):
    """Measure runtime complexity on basic terms."""
    return _run("rc", json_output, seed, trs_path=trs_path, max_size=max_size, budget=budget)


@cli.command()
@click.argument("trs_path", type=PATH)
@click.option("--rc", "rc", default=None, help="linear:c, poly:c,e or measured")
@click.option("--max-size", type=int, default=None, help="Measured table size")
@click.option("--budget", type=int, default=None, help="State budget per derivation")
@click.option("--at", "at", default=None, help='Evaluate at a point, e.g. "f:2"')
@click.option("--check-size", type=int, default=None, help="Empirically check basic terms up to this size")
@common_options
def bound(trs_path, rc, max_size, budget, at, check_size, json_output, seed):
    """Sup-interpretation built from a runtime complexity bound."""
    return _run(
        "bound", json_output, seed,
        trs_path=trs_path, rc=rc, max_size=max_size, budget=budget, at=at, check_size=check_size,
    )


@cli.command(name="eval")
@click.argument("trs_path", type=PATH)
@click.argument("term")
@click.option("--max-steps", type=int, default=None, help="Rewrite step budget")
@common_options
def eval_command(trs_path, term, max_steps, json_output, seed):
    """Normalize a term leftmost-innermost."""
    return _run("eval", json_output, seed, trs_path=trs_path, term=term, max_steps=max_steps)


@cli.command()
@common_options
def schema(json_output, seed):
    """JSON Schema of the --json output."""
    return _run("schema", json_output, seed)


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="supbound", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())

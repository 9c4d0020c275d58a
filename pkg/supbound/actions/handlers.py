import json
import logging

from supbound.services.activity_logger import activity_logger, log_action_activity
from supbound.services.assignments import load_assignment
from supbound.services.deppairs import dependency_pairs
from supbound.services.encoder import check_model, emit_smtlib, encode, parse_model
from supbound.services.errors import ArityMismatch, ConfigurationValidationError
from supbound.services.rc_bridge import (
    ConstructorTerms,
    RcFunction,
    construct_si_from_rc,
    enumerate_basic_terms,
    measure_rc,
)
from supbound.services.reports import Overall, VerificationReport
from supbound.services.rewriting import BudgetExceeded, NormalForm, check_orthogonality, normalize
from supbound.services.sampling import SamplingPlan
from supbound.services.synthesizer import SynthesisStatus, synthesize, synthesize_linear_template
from supbound.services.terms import Trs
from supbound.services.trs_parser import parse_term, parse_trs
from supbound.services.utils import jsonable, read_text, write_text
from supbound.services.verifier import Criterion, empirical_si_check, verify
from .configurations import (
    BoundConfig,
    CheckConfig,
    CheckModelConfig,
    DpConfig,
    EncodeConfig,
    EvalConfig,
    RcConfig,
    SchemaConfig,
    SynthConfig,
    VerifyConfig,
)
from .core import (
    EXIT_INCONCLUSIVE,
    EXIT_NEGATIVE,
    EXIT_OK,
    ActionResult,
    CommandOutput,
)

logger = logging.getLogger(__name__)

EXIT_BY_OVERALL = {
    Overall.VALID: EXIT_OK,
    Overall.INVALID: EXIT_NEGATIVE,
    Overall.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}

EXIT_BY_SYNTHESIS = {
    SynthesisStatus.FOUND: EXIT_OK,
    SynthesisStatus.EXHAUSTED: EXIT_NEGATIVE,
    SynthesisStatus.TIMED_OUT: EXIT_INCONCLUSIVE,
}


def _load_trs(path) -> Trs:
    trs = parse_trs(read_text(path))
    logger.debug(f"Loaded {path}: {len(trs.rules)} rule(s), {len(trs.signature)} symbol(s)")
    return trs


def _plan(action_config) -> SamplingPlan:
    return SamplingPlan(seed=action_config.seed)


def _render_report(report: VerificationReport) -> str:
    title = report.kind.value.upper()
    if report.pi_mode is not None:
        title += f" ({report.pi_mode.value})"
    lines = [f"{title}: {report.overall.value}"]
    for c in report.constraints:
        line = f"  [{c.verdict.value}] {c.category.value} {c.subject}: {c.description}"
        if c.witness:
            line += "  at " + ", ".join(f"{k}={v}" for k, v in sorted(c.witness.items()))
        lines.append(line)
    lines.extend(f"note: {n}" for n in report.notes)
    if not report.certifying:
        lines.append("note: approximate mode, this report is not a certificate")
    return "\n".join(lines) + "\n"


@activity_logger()
def action_check(action_config: CheckConfig):
    trs = _load_trs(action_config.trs_path)
    report = check_orthogonality(trs)
    result = {
        "signature": [{"name": s.name, "arity": s.arity, "kind": s.kind.value} for s in trs.signature],
        "rules": len(trs.rules),
        "trs_size": trs.size(),
        "left_linear": report.left_linear,
        "non_left_linear_rules": report.non_left_linear_rules,
        "overlaps": [o.dict() for o in report.overlaps],
        "orthogonal": report.orthogonal,
    }
    lines = [
        "constructors: " + " ".join(str(s) for s in trs.constructors),
        "defined: " + " ".join(str(s) for s in trs.defined),
        f"rules: {len(trs.rules)}",
        f"trs size: {trs.size()}",
        f"left-linear: {'yes' if report.left_linear else 'no, rules ' + str(report.non_left_linear_rules)}",
    ]
    lines.extend(f"overlap: rule {o.rule_i} at {o.position} with rule {o.rule_j}" for o in report.overlaps)
    lines.append(f"orthogonal: {'yes' if report.orthogonal else 'no'}")
    return ActionResult(
        exit_code=EXIT_OK if report.orthogonal else EXIT_NEGATIVE,
        result=result,
        text="\n".join(lines) + "\n",
    )


@activity_logger()
def action_dp(action_config: DpConfig):
    trs = _load_trs(action_config.trs_path)
    pairs = dependency_pairs(trs)
    return ActionResult(
        result={"pairs": [p.to_dict() for p in pairs]},
        text="".join(f"{p}    (rule {p.origin})\n" for p in pairs),
    )


@activity_logger()
def action_verify(action_config: VerifyConfig):
    trs = _load_trs(action_config.trs_path)
    assignment = load_assignment(read_text(action_config.assignment_path), trs)
    if assignment.approximate and not action_config.approximate:
        logger.warning("Approximate coefficients checked exactly; pass --approximate for a tolerance check")
    criterion = Criterion(
        kind=action_config.kind,
        pi_mode=action_config.strictness,
        delta=action_config.delta,
        epsilon=action_config.epsilon,
        relax_nullary=action_config.relax_nullary,
        approximate=action_config.approximate,
    )
    report = verify(trs, assignment, criterion, plan=_plan(action_config))
    return ActionResult(
        exit_code=EXIT_BY_OVERALL[report.overall],
        result=jsonable(report.dict()),
        text=_render_report(report),
    )


@activity_logger()
def action_synth(action_config: SynthConfig):
    trs = _load_trs(action_config.trs_path)
    plan = _plan(action_config)
    if action_config.linear:
        outcome = synthesize_linear_template(
            trs,
            action_config.kind,
            nullary_relax=action_config.relax_nullary,
            slope_bound=action_config.slope_bound,
            time_budget=action_config.timeout,
            plan=plan,
        )
    else:
        outcome = synthesize(trs, action_config.synthesis_config(), plan=plan)
    log_action_activity(
        action_id="synth",
        title=f"Synthesis {outcome.status.value} after {outcome.candidates_tried} candidate(s)",
        level="INFO",
        data={"status": outcome.status.value, "candidates_tried": outcome.candidates_tried},
    )

    result = jsonable(outcome.summary(trs))
    if outcome.found:
        text = outcome.assignment.render(trs)
        if action_config.output_path:
            write_text(action_config.output_path, text)
            result["output"] = str(action_config.output_path)
            text = f"wrote {action_config.output_path}\n"
    else:
        lines = [f"{outcome.status.value}: {outcome.candidates_tried} candidate(s) tried"]
        lines.extend(f"note: {n}" for n in outcome.notes)
        text = "\n".join(lines) + "\n"
    return ActionResult(exit_code=EXIT_BY_SYNTHESIS[outcome.status], result=result, text=text)


@activity_logger()
def action_encode(action_config: EncodeConfig):
    trs = _load_trs(action_config.trs_path)
    doc = encode(
        trs,
        action_config.kind,
        k=action_config.k,
        d=action_config.d,
        pi_mode=action_config.strictness,
        relax_nullary=action_config.relax_nullary,
    )
    script = emit_smtlib(doc, action_config.script_format)
    result = {
        "unknowns": len(doc.unknowns),
        "constraints": [c.name for c in doc.constraints],
        "side_conditions": len(doc.side_conditions),
    }
    if action_config.output_path:
        write_text(action_config.output_path, script)
        result["output"] = str(action_config.output_path)
        return ActionResult(result=result, text=f"wrote {action_config.output_path}\n")
    result["smtlib"] = script
    return ActionResult(result=result, text=script)


@activity_logger()
def action_check_model(action_config: CheckModelConfig):
    trs = _load_trs(action_config.trs_path)
    doc = encode(
        trs,
        action_config.kind,
        k=action_config.k,
        d=action_config.d,
        pi_mode=action_config.strictness,
        relax_nullary=action_config.relax_nullary,
    )
    model = parse_model(read_text(action_config.model_path))
    report = check_model(trs, doc, model, plan=_plan(action_config))
    return ActionResult(
        exit_code=EXIT_BY_OVERALL[report.overall],
        result=jsonable(report.dict()),
        text=_render_report(report),
    )


@activity_logger()
def action_rc(action_config: RcConfig):
    trs = _load_trs(action_config.trs_path)
    report = measure_rc(trs, action_config.max_size, budget=action_config.budget, seed=action_config.seed)
    lines = ["size  terms  longest  rc  witness"]
    for e in report.entries:
        rc = "undefined" if e.rc is None else str(e.rc)
        lines.append(f"{e.size:>4}  {e.terms:>5}  {e.size_max:>7}  {rc}  {e.witness or '-'}")
    if report.approximate:
        lines.append(f"note: sizes above {min(e.size for e in report.entries if not e.exhaustive)} are sampled")
    undefined = any(e.rc is None for e in report.entries)
    return ActionResult(
        exit_code=EXIT_INCONCLUSIVE if undefined else EXIT_OK,
        result=jsonable(report.dict()),
        text="\n".join(lines) + "\n",
    )


@activity_logger()
def action_bound(action_config: BoundConfig):
    trs = _load_trs(action_config.trs_path)
    at = action_config.at_arguments() if action_config.at else None
    if action_config.rc == "measured":
        needed = max(action_config.max_size, action_config.check_size or 0, int(sum(at[1])) + 1 if at else 0)
        report = measure_rc(trs, int(needed), budget=action_config.budget, seed=action_config.seed)
        rc = RcFunction.from_report(report)
    else:
        rc = RcFunction.parse(action_config.rc)
    theta = construct_si_from_rc(trs, rc)
    text = theta.render()
    result = {"rc": jsonable(rc.dict()), "trs_size": theta.trs_size, "interpretation": text}
    exit_code = EXIT_OK

    if at is not None:
        name, args = at
        symbol = trs.symbol(name)
        if symbol is None:
            raise ConfigurationValidationError(f"'{name}' is not in the signature")
        if symbol.arity != len(args):
            raise ArityMismatch(symbol.arity, len(args), what=f"symbol '{name}'")
        value = theta.apply(symbol, args)
        rendered = ", ".join(str(a) for a in args)
        result["at"] = {"symbol": name, "arguments": [str(a) for a in args], "value": str(value)}
        text += f"{name}({rendered}) = {value}\n"

    if action_config.check_size:
        factory = ConstructorTerms(trs.constructors)
        samples = [
            t for n in range(1, action_config.check_size + 1) for t in enumerate_basic_terms(trs, n, factory)
        ]
        check = empirical_si_check(trs, theta, samples, budget=action_config.budget)
        result["empirical"] = check.dict()
        text += f"empirical check on {check.checked} basic term(s): {'passed' if check.passed else 'FAILED'}\n"
        for v in check.violations:
            text += f"  {v.check} fails for {v.term}: {v.lhs} < {v.rhs}\n"
        if not check.passed:
            exit_code = EXIT_NEGATIVE
    return ActionResult(exit_code=exit_code, result=result, text=text)


@activity_logger()
def action_eval(action_config: EvalConfig):
    trs = _load_trs(action_config.trs_path)
    term = parse_term(action_config.term, trs)
    outcome = normalize(trs, term, max_steps=action_config.max_steps)
    if isinstance(outcome, BudgetExceeded):
        return ActionResult(
            exit_code=EXIT_INCONCLUSIVE,
            result={"outcome": "budget_exceeded", "steps": outcome.steps},
            text=f"budget exceeded after {outcome.steps} steps, no normal form\n",
        )
    steps = f"{outcome.steps} step{'' if outcome.steps == 1 else 's'}"
    if isinstance(outcome, NormalForm):
        return ActionResult(
            result={"outcome": "normal_form", "term": str(outcome.term), "steps": outcome.steps},
            text=f"{outcome.term}, {steps}\n",
        )
    return ActionResult(
        exit_code=EXIT_NEGATIVE,
        result={"outcome": "stuck", "term": str(outcome.term), "steps": outcome.steps},
        text=f"stuck at {outcome.term} (not a value), {steps}\n",
    )


@activity_logger()
def action_schema(action_config: SchemaConfig):
    schema = CommandOutput.schema()
    return ActionResult(result=schema, text=json.dumps(schema, indent=2, sort_keys=True) + "\n")

import pathlib
import re
from fractions import Fraction
from typing import Optional

import pydantic

from supbound import settings
from supbound.services.encoder import ScriptFormat
from supbound.services.rc_bridge import RcFunction
from supbound.services.reports import CriterionKind, PiMode
from supbound.services.synthesizer import Domain, SynthesisConfig
from supbound.services.utils import Rational
from .core import ActionConfiguration

_DOMAIN = re.compile(r"^(nat|rat)(:(\d+))?$")
_AT = re.compile(r"^\s*([A-Za-z0-9_][A-Za-z0-9_']*)\s*(:\s*(\d+(\s*,\s*\d+)*))?\s*$")


class TrsActionConfiguration(ActionConfiguration):
    trs_path: pathlib.Path


class CheckConfig(TrsActionConfiguration):
    pass


class DpConfig(TrsActionConfiguration):
    pass


class EvalConfig(TrsActionConfiguration):
    term: str
    max_steps: pydantic.PositiveInt = settings.NORMALIZE_MAX_STEPS


class CriterionOptions(TrsActionConfiguration):
    kind: CriterionKind = CriterionKind.QI
    pi_mode: Optional[PiMode] = None
    relax_nullary: Optional[Rational] = None

    @pydantic.validator("pi_mode")
    def pi_mode_needs_pi(cls, v, values):
        if v is not None and values.get("kind") != CriterionKind.PI:
            raise ValueError("pi-mode applies to kind pi only")
        return v

    @property
    def strictness(self) -> PiMode:
        return self.pi_mode or PiMode.NAT_STRICT

    @pydantic.validator("relax_nullary")
    def relax_nonnegative(cls, v):
        if v is not None and v < 0:
            raise ValueError("relax-nullary must be nonnegative")
        return v


class VerifyConfig(CriterionOptions):
    assignment_path: pathlib.Path
    delta: Rational = settings.PI_DELTA
    epsilon: Rational = settings.PI_EPSILON
    approximate: bool = False

    @pydantic.validator("delta", "epsilon")
    def positive_margin(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v


class SynthConfig(CriterionOptions):
    domain: str = Domain.NATURALS.value
    max_branches: pydantic.PositiveInt = 1
    coeff_bound: pydantic.PositiveInt = 1
    linear: bool = False
    slope_bound: pydantic.PositiveInt = settings.LINEAR_SLOPE_BOUND
    timeout: pydantic.PositiveFloat = settings.SYNTH_TIME_BUDGET
    output_path: Optional[pathlib.Path] = None

    @pydantic.validator("kind")
    def qi_or_dpi(cls, v):
        if v == CriterionKind.PI:
            raise ValueError("synthesis supports qi and dpi only")
        return v

    @pydantic.validator("domain")
    def domain_syntax(cls, v):
        match = _DOMAIN.match(v.strip())
        if not match:
            raise ValueError("expected nat or rat:<d>")
        if match.group(3) is not None and int(match.group(3)) < 1:
            raise ValueError("rat:<d> needs d >= 1")
        return v.strip()

    def synthesis_config(self) -> SynthesisConfig:
        """``rat:<d>`` bounds numerators and denominators by d, overriding ``coeff_bound``."""
        match = _DOMAIN.match(self.domain)
        bound = int(match.group(3)) if match.group(3) else self.coeff_bound
        return SynthesisConfig(
            kind=self.kind,
            domain=Domain(match.group(1)),
            max_branches=self.max_branches,
            coeff_bound=bound,
            nullary_relax=self.relax_nullary,
            time_budget=self.timeout,
        )


class TemplateOptions(CriterionOptions):
    k: int = 1
    d: int = 1

    @pydantic.validator("k")
    def branches_in_range(cls, v):
        if not 1 <= v <= settings.ENCODER_MAX_K:
            raise ValueError(f"k must lie in [1, {settings.ENCODER_MAX_K}]")
        return v

    @pydantic.validator("d")
    def degree_in_range(cls, v):
        if not 1 <= v <= settings.ENCODER_MAX_D:
            raise ValueError(f"d must lie in [1, {settings.ENCODER_MAX_D}]")
        return v


class EncodeConfig(TemplateOptions):
    script_format: ScriptFormat = ScriptFormat.SMT2
    output_path: Optional[pathlib.Path] = None


class CheckModelConfig(TemplateOptions):
    model_path: pathlib.Path


class RcConfig(TrsActionConfiguration):
    max_size: pydantic.PositiveInt = 8
    budget: Optional[pydantic.PositiveInt] = None


class BoundConfig(RcConfig):
    rc: str = "measured"
    at: Optional[str] = None
    check_size: Optional[pydantic.PositiveInt] = None

    @pydantic.validator("rc")
    def rc_descriptor(cls, v):
        v = v.strip()
        if v != "measured":
            RcFunction.parse(v)
        return v

    @pydantic.validator("at")
    def at_syntax(cls, v):
        if v is not None and not _AT.match(v):
            raise ValueError('expected "f:2" or "f:1,3"')
        return v

    def at_arguments(self):
        """Symbol name and natural arguments of ``--at``."""
        match = _AT.match(self.at)
        args = [Fraction(int(a)) for a in match.group(3).split(",")] if match.group(3) else []
        return match.group(1), args


class SchemaConfig(ActionConfiguration):
    pass

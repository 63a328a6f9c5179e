"""Request and response models for the HTTP service.

All payloads carry ``"schema": "v1"``.  State, channel, descriptor and
record shapes mirror the on-disk JSON formats, so configs, record files and
reports round-trip through the API unchanged.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StateSpec(BaseModel):
    """Explicit Gaussian state: {"n", "l", "m", "S", "ordering"}."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1)
    l: list[float]
    m: list[float]
    S: list[list[float]]
    ordering: Literal["pq-blocks"] = "pq-blocks"


class StateMake(BaseModel):
    """Named state constructor: vacuum(n), thermal(t) or coherent(x, y)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["vacuum", "thermal", "coherent"]
    n: Optional[int] = Field(default=None, ge=1)
    t: Optional[list[float]] = None
    x: Optional[list[float]] = None
    y: Optional[list[float]] = None

    @model_validator(mode="after")
    def _check_fields(self):
        if self.kind == "vacuum" and self.n is None:
            raise ValueError("vacuum requires 'n'")
        if self.kind == "thermal" and self.t is None:
            raise ValueError("thermal requires 't'")
        if self.kind == "coherent" and (self.x is None or self.y is None):
            raise ValueError("coherent requires 'x' and 'y'")
        return self


class BackendSpec(BaseModel):
    """Measurement backend: exact expectations or a finite-ensemble model."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["exact", "noisy"] = "exact"
    M: Optional[float] = Field(default=None, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_m(self):
        if self.kind == "noisy" and self.M is None:
            raise ValueError("noisy backend requires an ensemble size 'M'")
        return self


class DescriptorModel(BaseModel):
    kind: Literal["identity", "Gp", "Gq", "Gsp1", "Gsp2"]
    modes: list[int] = Field(default_factory=list)
    x: Optional[float] = None
    alpha: Optional[float] = None
    U: Optional[Literal["H", "K"]] = None
    x1: Optional[float] = None
    x2: Optional[float] = None

    @model_validator(mode="after")
    def _check_params(self):
        if self.kind == "Gsp1" and (self.x is None or self.alpha is None):
            raise ValueError("Gsp1 descriptors require 'x' and 'alpha'")
        if self.kind == "Gsp2" and (self.U is None or self.x1 is None or self.x2 is None):
            raise ValueError("Gsp2 descriptors require 'U', 'x1' and 'x2'")
        return self


class RecordModel(BaseModel):
    descriptor: DescriptorModel
    value: float
    ensemble_size: Optional[int] = None


class ChannelSpec(BaseModel):
    """Explicit channel: {"n", "A", "B"}."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1)
    A: list[list[float]]
    B: list[list[float]]


class ChannelMake(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["identity", "attenuator", "random"]
    n: int = Field(ge=1)
    eta: Optional[float] = Field(default=None, gt=0, le=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_fields(self):
        if self.kind == "attenuator" and self.eta is None:
            raise ValueError("attenuator requires 'eta'")
        return self


class ScriptOp(BaseModel):
    model_config = ConfigDict(extra="forbid")

    op: Literal["displace", "squeeze", "rotate", "beamsplitter"]
    mode: int = Field(default=1, ge=1, le=2)
    re: float = 0.0
    im: float = 0.0
    r: float = 0.0
    phi: float = 0.0
    theta: float = 0.0


class ScriptInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["vacuum", "thermal"] = "vacuum"
    t: Optional[list[float]] = None

    @model_validator(mode="after")
    def _check_t(self):
        if self.kind == "thermal" and self.t is None:
            raise ValueError("thermal input requires 't'")
        return self


class _StateCarrier(BaseModel):
    """Mixin handling the state-or-make choice shared by two requests."""

    state: Optional[StateSpec] = None
    make: Optional[StateMake] = None


class PgfRequest(_StateCarrier):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal["v1"] = Field(default="v1", alias="schema")
    xs: list[float] = Field(
        default_factory=lambda: [round(0.1 * k, 10) for k in range(10)]
    )
    kmax: int = Field(default=20, ge=0)
    divisibility_order: int = Field(default=12, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _exactly_one_state(self):
        if (self.state is None) == (self.make is None):
            raise ValueError("provide exactly one of 'state' or 'make'")
        return self


class StateTomographyRequest(_StateCarrier):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal["v1"] = Field(default="v1", alias="schema")
    records: Optional[list[RecordModel]] = None
    backend: BackendSpec = Field(default_factory=BackendSpec)
    project: bool = False

    @model_validator(mode="after")
    def _state_or_records(self):
        has_state = self.state is not None or self.make is not None
        if self.state is not None and self.make is not None:
            raise ValueError("provide at most one of 'state' or 'make'")
        if not has_state and self.records is None:
            raise ValueError("provide a true state (simulation) or 'records' (replay)")
        return self


class ChannelTomographyRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal["v1"] = Field(default="v1", alias="schema")
    channel: Optional[ChannelSpec] = None
    make: Optional[ChannelMake] = None
    probe_records: Optional[list[list[RecordModel]]] = None
    backend: BackendSpec = Field(default_factory=BackendSpec)

    @model_validator(mode="after")
    def _channel_or_records(self):
        if self.channel is not None and self.make is not None:
            raise ValueError("provide at most one of 'channel' or 'make'")
        if self.channel is None and self.make is None and self.probe_records is None:
            raise ValueError("provide a channel (simulation) or 'probe_records' (replay)")
        return self


class OracleCompareRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal["v1"] = Field(default="v1", alias="schema")
    modes: Literal[1, 2] = 1
    input: ScriptInput = Field(default_factory=ScriptInput)
    script: list[ScriptOp] = Field(default_factory=list)
    dim: Optional[int] = Field(default=None, ge=4)
    xs: list[float] = Field(
        default_factory=lambda: [round(0.1 * k, 10) for k in range(10)]
    )
    tol: float = Field(default=1e-6, gt=0)
    seed: int = 0


class ReportMeta(BaseModel):
    schema_version: Literal["v1"] = Field(default="v1", serialization_alias="schema")
    command: str
    version: str
    seed: int
    rng: str = "PCG64"
    config_sha256: str


class DivisibilitySection(BaseModel):
    divisible_up_to_order: bool
    levy_coeffs: list[float]


class PgfReport(ReportMeta):
    inputs: dict
    x: list[float]
    G: list[float]
    mean: float
    var: float
    p0: float
    pmf: list[float]
    divisibility: DivisibilitySection


class StateErrors(BaseModel):
    l: float
    m: float
    S: float
    max: float


class StateTomographyReport(ReportMeta):
    inputs: dict
    n: int
    measurement_count: int
    plan: list[DescriptorModel]
    records: list[RecordModel]
    estimate: StateSpec
    valid: bool
    residuals: dict[str, float]
    errors: Optional[StateErrors] = None
    #: Model noise scale per record, sqrt(Var(N')/M); noisy simulation only.
    record_sigmas: Optional[list[float]] = None
    projected: Optional[StateSpec] = None


class ChannelErrors(BaseModel):
    A: float
    B: float
    max: float


class ChannelTomographyReport(ReportMeta):
    inputs: dict
    n: int
    measurement_count: int
    A_hat: list[list[float]]
    B_hat: list[list[float]]
    per_row_residuals: list[float]
    constraint_margin: float
    errors: Optional[ChannelErrors] = None


class OracleCompareReport(ReportMeta):
    inputs: dict
    modes: int
    dim: int
    kmax: int
    tol: float
    max_pmf_discrepancy: Optional[float] = None
    pgf_points: list[float] = Field(default_factory=list)
    pgf_discrepancies: list[float] = Field(default_factory=list)
    max_pgf_discrepancy: Optional[float] = None
    passed: bool
    failure_cause: Optional[str] = None

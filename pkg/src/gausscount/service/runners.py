"""Command implementations shared by the HTTP endpoints.

Each runner is a pure function of its validated request model; reports
embed a sha256 of the normalised request, so equal configs always yield
byte-identical reports.
"""

import hashlib
import json
import math

import numpy as np

from .. import __version__
from ..channels import (
    GaussianChannel,
    apply,
    attenuator,
    channel_constraint_margin,
    channel_from_dict,
    identity_channel,
    random_channel,
    reconstruct_channel,
    solve_channel,
)
from ..counting import (
    infinite_divisibility_check,
    mean_N,
    pmf,
    prob_zero,
    total_pgf,
    var_N,
)
from ..errors import TruncationRiskError
from ..fock import number_distribution, pgf_oracle, run_script_fock, run_script_gaussian
from ..states import (
    Displacement,
    GaussianState,
    coherent,
    state_from_dict,
    state_to_dict,
    thermal,
    vacuum,
)
from ..tomography import (
    ExactBackend,
    MeasurementRecord,
    NoisyBackend,
    measure,
    plan_state_tomography,
    reconstruct_state,
    transformed_state,
)
from . import schemas


def config_hash(request) -> str:
    payload = request.model_dump(mode="json", by_alias=True)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _inputs_echo(request) -> dict:
    return request.model_dump(mode="json", by_alias=True, exclude_none=True)


def _build_state(spec, make) -> GaussianState:
    if spec is not None:
        return state_from_dict(spec.model_dump())
    if make.kind == "vacuum":
        return vacuum(make.n)
    if make.kind == "thermal":
        return thermal(make.t)
    return coherent(Displacement(np.asarray(make.x), np.asarray(make.y)))


def _build_channel(spec, make) -> GaussianChannel:
    if spec is not None:
        return channel_from_dict(spec.model_dump())
    if make.kind == "identity":
        return identity_channel(make.n)
    if make.kind == "attenuator":
        return attenuator(make.eta, make.n)
    return random_channel(make.n, np.random.default_rng(make.seed))


def _build_backend(spec: schemas.BackendSpec):
    if spec.kind == "exact":
        return ExactBackend()
    size = math.inf if spec.M is None else spec.M
    return NoisyBackend(M=size, seed=spec.seed)


def _core_records(models):
    return [MeasurementRecord.from_dict(m.model_dump(exclude_none=True)) for m in models]


def _record_models(records):
    return [schemas.RecordModel.model_validate(r.to_dict()) for r in records]


def run_pgf(req: schemas.PgfRequest) -> schemas.PgfReport:
    rho = _build_state(req.state, req.make)
    grid = [float(x) for x in req.xs]
    values = [total_pgf(rho, x) for x in grid]
    probs = pmf(rho, req.kmax)
    report = infinite_divisibility_check(rho, req.divisibility_order)
    return schemas.PgfReport(
        command="pgf",
        version=__version__,
        seed=req.seed,
        config_sha256=config_hash(req),
        inputs=_inputs_echo(req),
        x=grid,
        G=values,
        mean=mean_N(rho),
        var=var_N(rho),
        p0=prob_zero(rho),
        pmf=probs.tolist(),
        divisibility=schemas.DivisibilitySection(
            divisible_up_to_order=report.divisible_up_to_order,
            levy_coeffs=report.levy_coeffs.tolist(),
        ),
    )


def _state_errors(estimate: GaussianState, truth: GaussianState) -> schemas.StateErrors:
    err_l = float(np.max(np.abs(estimate.l - truth.l)))
    err_m = float(np.max(np.abs(estimate.m - truth.m)))
    err_s = float(np.max(np.abs(estimate.S - truth.S)))
    return schemas.StateErrors(l=err_l, m=err_m, S=err_s, max=max(err_l, err_m, err_s))


def run_state_tomography(req: schemas.StateTomographyRequest) -> schemas.StateTomographyReport:
    truth = None
    if req.state is not None or req.make is not None:
        truth = _build_state(req.state, req.make)
    sigmas = None
    if req.records is not None:
        records = _core_records(req.records)
        plan_items = [r.descriptor for r in records]
    else:
        plan = plan_state_tomography(truth.n)
        backend = _build_backend(req.backend)
        records = measure(truth, plan, backend)
        plan_items = list(plan.items)
        if isinstance(backend, NoisyBackend) and math.isfinite(backend.M):
            sigmas = [
                float(np.sqrt(var_N(transformed_state(truth, d)) / backend.M))
                for d in plan_items
            ]
    result = reconstruct_state(records, project=req.project)
    report = schemas.StateTomographyReport(
        command="tomo-state",
        version=__version__,
        seed=req.backend.seed,
        config_sha256=config_hash(req),
        inputs=_inputs_echo(req),
        n=result.state.n,
        measurement_count=len(records),
        plan=[schemas.DescriptorModel.model_validate(d.to_dict()) for d in plan_items],
        records=_record_models(records),
        estimate=schemas.StateSpec.model_validate(state_to_dict(result.state)),
        valid=result.valid,
        residuals=result.residuals,
        errors=_state_errors(result.state, truth) if truth is not None else None,
        record_sigmas=sigmas,
        projected=(
            schemas.StateSpec.model_validate(state_to_dict(result.projected))
            if result.projected is not None
            else None
        ),
    )
    return report


def run_channel_tomography(req: schemas.ChannelTomographyRequest) -> schemas.ChannelTomographyReport:
    truth = None
    if req.channel is not None or req.make is not None:
        truth = _build_channel(req.channel, req.make)
    if req.probe_records is not None:
        groups = [_core_records(group) for group in req.probe_records]
        n = len(groups) // 2
        estimate = solve_channel(groups, n)
    else:
        n = truth.n
        estimate = reconstruct_channel(
            lambda state: apply(truth, state), n, _build_backend(req.backend)
        )
    errors = None
    if truth is not None:
        err_a = float(np.max(np.abs(estimate.A_hat - truth.A)))
        err_b = float(np.max(np.abs(estimate.B_hat - truth.B)))
        errors = schemas.ChannelErrors(A=err_a, B=err_b, max=max(err_a, err_b))
    return schemas.ChannelTomographyReport(
        command="tomo-channel",
        version=__version__,
        seed=req.backend.seed,
        config_sha256=config_hash(req),
        inputs=_inputs_echo(req),
        n=n,
        measurement_count=estimate.measurement_count,
        A_hat=estimate.A_hat.tolist(),
        B_hat=estimate.B_hat.tolist(),
        per_row_residuals=estimate.per_row_residuals.tolist(),
        constraint_margin=channel_constraint_margin(estimate.A_hat, estimate.B_hat),
        errors=errors,
    )


def run_oracle_compare(req: schemas.OracleCompareRequest) -> schemas.OracleCompareReport:
    dim = req.dim if req.dim is not None else (64 if req.modes == 1 else 32)
    ops = [op.model_dump() for op in req.script]
    input_spec = req.input.model_dump(exclude_none=True)
    analytic = run_script_gaussian(req.modes, input_spec, ops)
    meta = dict(
        command="oracle-compare",
        version=__version__,
        seed=req.seed,
        config_sha256=config_hash(req),
        inputs=_inputs_echo(req),
        modes=req.modes,
        dim=dim,
        tol=req.tol,
    )
    try:
        oracle_state = run_script_fock(req.modes, input_spec, ops, dim)
        dist = number_distribution(oracle_state)
    except TruncationRiskError as exc:
        return schemas.OracleCompareReport(
            **meta, kmax=0, passed=False, failure_cause=f"truncation-risk: {exc}"
        )
    kmax = dist.size - 1
    probs = pmf(analytic, kmax)
    max_pmf = float(np.max(np.abs(probs - dist)))
    grid = [float(x) for x in req.xs]
    pgf_diffs = [abs(total_pgf(analytic, x) - pgf_oracle(oracle_state, x)) for x in grid]
    max_pgf = max(pgf_diffs) if pgf_diffs else 0.0
    passed = max_pmf <= req.tol and max_pgf <= req.tol
    failure_cause = None
    if not passed:
        failure_cause = (
            f"max pmf discrepancy {max_pmf:.3e}, max pgf discrepancy {max_pgf:.3e} "
            f"exceed tol {req.tol:.1e}"
        )
    return schemas.OracleCompareReport(
        **meta,
        kmax=kmax,
        max_pmf_discrepancy=max_pmf,
        pgf_points=grid,
        pgf_discrepancies=pgf_diffs,
        max_pgf_discrepancy=max_pgf,
        passed=passed,
        failure_cause=failure_cause,
    )

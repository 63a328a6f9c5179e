"""HTTP front end: one POST endpoint per command.

Semantic validation failures (bad covariances, invalid channels, missing
records) map to 400 with a structured body; malformed payloads get the
usual 422 with field paths.
"""

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import IncompleteRecordsError
from . import runners, schemas

app = FastAPI(title="gausscount", version=__version__)


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc: ValueError):
    detail = {"error": str(exc), "type": type(exc).__name__}
    if isinstance(exc, IncompleteRecordsError):
        detail["missing"] = [d.to_dict() for d in exc.missing]
    return JSONResponse(status_code=400, content=detail)


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/v1/pgf", response_model=schemas.PgfReport, response_model_exclude_none=True)
def pgf_endpoint(request: schemas.PgfRequest) -> schemas.PgfReport:
    return runners.run_pgf(request)


@app.post(
    "/v1/tomography/state",
    response_model=schemas.StateTomographyReport,
    response_model_exclude_none=True,
)
def state_tomography_endpoint(
    request: schemas.StateTomographyRequest,
) -> schemas.StateTomographyReport:
    return runners.run_state_tomography(request)


@app.post(
    "/v1/tomography/channel",
    response_model=schemas.ChannelTomographyReport,
    response_model_exclude_none=True,
)
def channel_tomography_endpoint(
    request: schemas.ChannelTomographyRequest,
) -> schemas.ChannelTomographyReport:
    return runners.run_channel_tomography(request)


@app.post(
    "/v1/oracle-compare",
    response_model=schemas.OracleCompareReport,
    response_model_exclude_none=True,
)
def oracle_compare_endpoint(
    request: schemas.OracleCompareRequest,
) -> schemas.OracleCompareReport:
    return runners.run_oracle_compare(request)

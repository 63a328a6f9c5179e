"""Gaussian channels (A, B) and their tomography from coherent probes.

A channel maps means by A^T and covariances by S -> A^T S A + B/2, subject
to B >= 0 and B + i(A^T J A - J) >= 0.  Probing with the 2n coherent states
of unit mean along each phase-space axis exposes A row by row, and a single
full state tomography exposes (A^T A + B)/2, which closes the system.  The
whole procedure consumes 6n^2 + 3n - 1 expectation values.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidChannelError
from .states import Displacement, GaussianState, coherent
from .symplectic import make_form, random_symplectic
from .tomography import (
    measure,
    plan_means_only,
    plan_state_tomography,
    reconstruct_state,
    solve_means,
)

CHANNEL_TOL = -1e-9


def channel_constraint_margin(A: np.ndarray, B: np.ndarray) -> float:
    """Minimum eigenvalue of the Hermitian matrix B + i(A^T J A - J)."""
    n = A.shape[0] // 2
    form = make_form(n)
    herm = B.astype(complex) + 1j * (A.T @ form @ A - form)
    return float(np.linalg.eigvalsh(herm)[0])


def validate_channel(A: np.ndarray, B: np.ndarray) -> bool:
    """True iff B is (near) PSD and the channel positivity constraint holds."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix shapes {A.shape}, {B.shape}")
    if np.max(np.abs(B - B.T)) > 1e-12 * max(1.0, np.max(np.abs(B))):
        return False
    if np.linalg.eigvalsh(B)[0] < CHANNEL_TOL:
        return False
    return channel_constraint_margin(A, B) >= CHANNEL_TOL


@dataclass(frozen=True)
class GaussianChannel:
    """Immutable channel; construction enforces the positivity constraint."""

    n: int
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).copy()
        B = np.asarray(self.B, dtype=float).copy()
        shape = (2 * self.n, 2 * self.n)
        if A.shape != shape or B.shape != shape:
            raise DimensionError(f"channel matrices {A.shape}, {B.shape} for n={self.n}")
        if not validate_channel(A, B):
            raise InvalidChannelError(
                f"constraint margin {channel_constraint_margin(A, B):.3e} below {CHANNEL_TOL}"
            )
        B = 0.5 * (B + B.T)
        for arr in (A, B):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


def identity_channel(n: int) -> GaussianChannel:
    return GaussianChannel(n, np.eye(2 * n), np.zeros((2 * n, 2 * n)))


def attenuator(eta: float, n: int) -> GaussianChannel:
    """Pure-loss channel of transmissivity eta in (0, 1]."""
    if not 0 < eta <= 1:
        raise ValueError(f"transmissivity must be in (0, 1], got {eta}")
    return GaussianChannel(n, np.sqrt(eta) * np.eye(2 * n), (1 - eta) * np.eye(2 * n))


def apply(channel: GaussianChannel, rho: GaussianState) -> GaussianState:
    """Channel output: mu -> A^T mu, S -> A^T S A + B/2."""
    if channel.n != rho.n:
        raise DimensionError(f"channel on {channel.n} modes, state on {rho.n}")
    mu = channel.A.T @ rho.mean_vector()
    S = channel.A.T @ rho.S @ channel.A + 0.5 * channel.B
    return GaussianState(rho.n, mu[: rho.n], -mu[rho.n :], S, require_valid=False)


def compose(first: GaussianChannel, then: GaussianChannel) -> GaussianChannel:
    """The single channel equal to applying ``first`` and then ``then``."""
    if first.n != then.n:
        raise DimensionError("cannot compose channels on different mode counts")
    return GaussianChannel(
        first.n,
        first.A @ then.A,
        then.A.T @ first.B @ then.A + then.B,
    )


def probe_states(n: int) -> list:
    """The 2n coherent probes: unit momentum mean along each axis, then
    unit position mean along each axis."""
    probes = []
    for j in range(n):
        y = np.zeros(n)
        y[j] = 1.0 / np.sqrt(2.0)
        probes.append(coherent(Displacement(np.zeros(n), y)))
    for j in range(n):
        x = np.zeros(n)
        x[j] = 1.0 / np.sqrt(2.0)
        probes.append(coherent(Displacement(x, np.zeros(n))))
    return probes


@dataclass(frozen=True)
class ChannelEstimate:
    A_hat: np.ndarray
    B_hat: np.ndarray
    measurement_count: int
    per_row_residuals: np.ndarray  # asymmetry diagnostic of the raw B fit


def measure_channel_probes(black_box, n: int, backend) -> list:
    """Per-probe measurement records for an unknown channel.

    ``black_box`` maps an input GaussianState to the channel output.  The
    first probe's output gets the full state-tomography plan; every other
    probe only needs the 2n+1 mean measurements.
    """
    probes = probe_states(n)
    out0 = black_box(probes[0])
    if out0.n != n:
        raise DimensionError(f"black box returned a {out0.n}-mode state, expected {n}")
    groups = [measure(out0, plan_state_tomography(n), backend)]
    means_plan = plan_means_only(n)
    for probe in probes[1:]:
        groups.append(measure(black_box(probe), means_plan, backend))
    return groups


def solve_channel(probe_records, n: int) -> ChannelEstimate:
    """Assemble (A, B) from the per-probe record groups.

    The first group reconstructs the full first-probe output, whose
    covariance is (A^T A + B)/2 and whose mean is the first row of A.
    Each remaining group pins one further row; the second probe family
    has mean vector (0; -e_j), so those rows enter with a sign flip.
    """
    if len(probe_records) != 2 * n:
        raise DimensionError(
            f"need one record group per probe (2n = {2 * n}), got {len(probe_records)}"
        )
    recon = reconstruct_state(probe_records[0])
    gram_plus = 2.0 * recon.state.S  # = A^T A + B
    rows = np.zeros((2 * n, 2 * n))
    rows[0] = recon.state.mean_vector()
    count = len(probe_records[0])
    for idx in range(1, 2 * n):
        count += len(probe_records[idx])
        l, m, _ = solve_means(probe_records[idx])
        mu = np.concatenate([l, -m])
        rows[idx] = mu if idx < n else -mu
    b_raw = gram_plus - rows.T @ rows
    per_row = np.max(np.abs(b_raw - b_raw.T), axis=1)
    return ChannelEstimate(
        A_hat=rows,
        B_hat=0.5 * (b_raw + b_raw.T),
        measurement_count=count,
        per_row_residuals=per_row,
    )


def reconstruct_channel(black_box, n: int, backend) -> ChannelEstimate:
    """Measure all 2n probe outputs and solve for the channel matrices.

    Consumes n(2n+3) + (2n-1)(2n+1) = 6n^2 + 3n - 1 expectation values.
    """
    return solve_channel(measure_channel_probes(black_box, n, backend), n)


def random_channel(n: int, rng: np.random.Generator) -> GaussianChannel:
    """Random valid channel: scaled symplectic A with an isotropic B that
    lifts the constraint by margin 0.1."""
    scales = rng.uniform(0.5, 1.5, size=2 * n)
    A = random_symplectic(n, rng) @ np.diag(scales)
    margin = channel_constraint_margin(A, np.zeros((2 * n, 2 * n)))
    B = (max(0.0, -margin) + 0.1) * np.eye(2 * n)
    return GaussianChannel(n, A, B)


def channel_to_dict(channel: GaussianChannel) -> dict:
    return {"n": channel.n, "A": channel.A.tolist(), "B": channel.B.tolist()}


def channel_from_dict(data: dict) -> GaussianChannel:
    return GaussianChannel(
        int(data["n"]),
        np.asarray(data["A"], dtype=float),
        np.asarray(data["B"], dtype=float),
    )

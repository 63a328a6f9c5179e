"""State reconstruction from number-operator expectation values.

The measurement schedule conjugates the total count by a fixed gate set:
two one-mode displacements, one-mode rotated-squeeze gates at stretches
sqrt(2) and sqrt(3), and four two-mode gates per mode pair.  An n-mode
state needs exactly n(2n+3) expectation values, one per unknown
parameter, and the resulting linear systems are square with constant,
provably invertible coefficient matrices.

All solver coefficients are derived from the gate matrices themselves and
asserted once against hard-coded reference values, so a transcription
slip in either place cannot pass silently.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import schur

from .counting import mean_N, var_N
from .errors import IncompleteRecordsError
from .states import Displacement, GaussianState, conjugate, displace, validity_margin
from .symplectic import (
    UNITARY_LABELS,
    embed,
    gram_interleaved,
    make_form,
    rotation_squeeze,
    tau,
    two_mode_gate_matrix,
)

SQRT2 = float(np.sqrt(2.0))
SQRT3 = float(np.sqrt(3.0))
TILT = float(np.pi / 4.0)

#: Validity tolerance for reconstructed covariances (looser than the state
#: constructor's: estimates carry solver round-off on top of backend noise).
RECONSTRUCTION_VALIDITY_TOL = -1e-6


@dataclass(frozen=True)
class GateDescriptor:
    """One measurement setting: which gate, on which wires, with which knobs."""

    kind: str                      # identity | Gp | Gq | Gsp1 | Gsp2
    modes: tuple = ()
    x: Optional[float] = None      # Gsp1 stretch
    alpha: Optional[float] = None  # Gsp1 rotation angle
    u_label: Optional[str] = None  # Gsp2 unitary, "H" or "K"
    x1: Optional[float] = None
    x2: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "modes": list(self.modes)}
        if self.kind == "Gsp1":
            out["x"] = self.x
            out["alpha"] = self.alpha
        elif self.kind == "Gsp2":
            out["U"] = self.u_label
            out["x1"] = self.x1
            out["x2"] = self.x2
        return out

    @staticmethod
    def from_dict(data: dict) -> "GateDescriptor":
        kind = data["kind"]
        modes = tuple(int(j) for j in data.get("modes", []))
        if kind == "Gsp1":
            return GateDescriptor(kind, modes, x=float(data["x"]), alpha=float(data["alpha"]))
        if kind == "Gsp2":
            return GateDescriptor(
                kind, modes, u_label=str(data["U"]),
                x1=float(data["x1"]), x2=float(data["x2"]),
            )
        if kind in ("identity", "Gp", "Gq"):
            return GateDescriptor(kind, modes)
        raise ValueError(f"unknown descriptor kind {kind!r}")


def identity_descriptor() -> GateDescriptor:
    return GateDescriptor("identity")


def gp(j: int) -> GateDescriptor:
    return GateDescriptor("Gp", (j,))


def gq(j: int) -> GateDescriptor:
    return GateDescriptor("Gq", (j,))


def gsp1(j: int, x: float, alpha: float) -> GateDescriptor:
    return GateDescriptor("Gsp1", (j,), x=x, alpha=alpha)


def gsp2(i: int, j: int, u_label: str, x1: float, x2: float) -> GateDescriptor:
    return GateDescriptor("Gsp2", (i, j), u_label=u_label, x1=x1, x2=x2)


@dataclass(frozen=True)
class MeasurementPlan:
    n: int
    items: tuple

    def __len__(self) -> int:
        return len(self.items)


def plan_state_tomography(n: int) -> MeasurementPlan:
    """Ordered schedule of the n(2n+3) settings for full state tomography.

    The last mode drops the sqrt(3) stretch: its quadrature variances are
    recovered from the trace identity instead, keeping the schedule at
    3n - 1 one-mode symplectic settings.
    """
    if n < 1:
        raise ValueError(f"mode count must be >= 1, got {n}")
    items = [identity_descriptor()]
    for j in range(1, n + 1):
        items.append(gp(j))
        items.append(gq(j))
    for j in range(1, n + 1):
        items.append(gsp1(j, SQRT2, 0.0))
        if j < n:
            items.append(gsp1(j, SQRT3, 0.0))
        items.append(gsp1(j, SQRT2, TILT))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for label in ("H", "K"):
                for x2 in (2.0, 3.0):
                    items.append(gsp2(i, j, label, 1.0, x2))
    return MeasurementPlan(n=n, items=tuple(items))


def plan_means_only(n: int) -> MeasurementPlan:
    """The 2n+1 settings that determine the mean vectors alone."""
    items = [identity_descriptor()]
    for j in range(1, n + 1):
        items.append(gp(j))
        items.append(gq(j))
    return MeasurementPlan(n=n, items=tuple(items))


@dataclass(frozen=True)
class MeasurementRecord:
    descriptor: GateDescriptor
    value: float
    ensemble_size: Optional[int] = None  # None means exact

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor.to_dict(),
            "value": self.value,
            "ensemble_size": self.ensemble_size,
        }

    @staticmethod
    def from_dict(data: dict) -> "MeasurementRecord":
        return MeasurementRecord(
            descriptor=GateDescriptor.from_dict(data["descriptor"]),
            value=float(data["value"]),
            ensemble_size=data.get("ensemble_size"),
        )


def records_to_jsonl(records) -> str:
    return "".join(json.dumps(rec.to_dict(), sort_keys=True) + "\n" for rec in records)


def records_from_jsonl(text: str):
    return [
        MeasurementRecord.from_dict(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]


@dataclass(frozen=True)
class ExactBackend:
    """Analytic expectation values; ensemble size is effectively infinite."""


@dataclass(frozen=True)
class NoisyBackend:
    """Finite-ensemble model: Gaussian error with variance Var(N')/M.

    The perturbation applies the central limit to M independent counts of
    the conjugated observable; M = math.inf reproduces the exact backend.
    Deterministic for a fixed seed (PCG64 stream, one draw per setting in
    plan order).
    """

    M: float
    seed: int = 0

    def __post_init__(self):
        if not (self.M > 0):
            raise ValueError(f"ensemble size must be positive, got {self.M}")


def descriptor_gate(desc: GateDescriptor, n: int):
    """The displacement or symplectic matrix realising a descriptor."""
    if desc.kind == "identity":
        return None
    if desc.kind in ("Gp", "Gq"):
        (j,) = desc.modes
        x = np.zeros(n)
        y = np.zeros(n)
        if desc.kind == "Gp":
            y[j - 1] = 1.0 / SQRT2
        else:
            x[j - 1] = 1.0 / SQRT2
        return Displacement(x, y)
    if desc.kind == "Gsp1":
        (j,) = desc.modes
        return embed(tau(rotation_squeeze(desc.x, desc.alpha)), [j], n)
    if desc.kind == "Gsp2":
        i, j = desc.modes
        gate = two_mode_gate_matrix(UNITARY_LABELS[desc.u_label], desc.x1, desc.x2)
        return embed(tau(gate), [i, j], n)
    raise ValueError(f"unknown descriptor kind {desc.kind!r}")


def transformed_state(rho: GaussianState, desc: GateDescriptor) -> GaussianState:
    gate = descriptor_gate(desc, rho.n)
    if gate is None:
        return rho
    if isinstance(gate, Displacement):
        return displace(rho, gate)
    return conjugate(rho, gate)


def displaced_expectation(rho: GaussianState, u: Displacement) -> float:
    """Expected count after conjugation by the displacement of amplitude u."""
    return mean_N(displace(rho, u))


def displacement_mean_shift(rho: GaussianState, u: Displacement) -> float:
    """Closed form for displaced_expectation(rho, u) - mean_N(rho)."""
    return float(u.x @ u.x + u.y @ u.y + SQRT2 * (u.y @ rho.l + u.x @ rho.m))


def conjugated_expectation(rho: GaussianState, L: np.ndarray) -> float:
    """Expected count after conjugation by the unitary lift of L."""
    return mean_N(conjugate(rho, L))


def conjugation_mean_shift(rho: GaussianState, L: np.ndarray) -> float:
    """Closed form for conjugated_expectation(rho, L) - mean_N(rho).

    (Tr S (L^{-1} L^{-T} - I) + mu^T (L^{-1} L^{-T} - I) mu) / 2.
    """
    n2 = 2 * rho.n
    form = make_form(rho.n)
    inv = -form @ L.T @ form
    shifted = inv @ inv.T - np.eye(n2)
    mu = rho.mean_vector()
    return float(0.5 * (np.trace(rho.S @ shifted) + mu @ shifted @ mu))


def measure(rho: GaussianState, plan: MeasurementPlan, backend) -> list:
    """Produce one record per plan item, exact or ensemble-perturbed."""
    if plan.n != rho.n:
        raise ValueError(f"plan for {plan.n} modes applied to a {rho.n}-mode state")
    noisy = isinstance(backend, NoisyBackend)
    rng = np.random.default_rng(backend.seed) if noisy else None
    records = []
    for desc in plan.items:
        state = transformed_state(rho, desc)
        value = mean_N(state)
        size = None
        if noisy:
            if math.isfinite(backend.M):
                value += rng.normal() * np.sqrt(var_N(state) / backend.M)
                size = int(backend.M)
            else:
                rng.normal()  # keep the stream aligned across ensemble sizes
        records.append(MeasurementRecord(desc, float(value), size))
    return records


def _record_map(records) -> dict:
    return {rec.descriptor: rec.value for rec in records}


def _require(values: dict, descriptors):
    missing = [d for d in descriptors if d not in values]
    if missing:
        raise IncompleteRecordsError(missing)


def _infer_n(values: dict) -> int:
    modes = [d.modes[0] for d in values if d.kind == "Gp"]
    if not modes:
        raise IncompleteRecordsError([gp(1)])
    return max(modes)


def solve_means(records):
    """Mean vectors and baseline count from the identity/Gp/Gq records.

    The one-mode displacements have squared amplitude 1/2, so each shifted
    expectation exceeds the baseline by exactly 1/2 plus the mean being
    probed; subtracting 1/2 inverts the relation.
    """
    values = _record_map(records)
    n = _infer_n(values)
    needed = [identity_descriptor()] + [gp(j) for j in range(1, n + 1)] + [
        gq(j) for j in range(1, n + 1)
    ]
    _require(values, needed)
    base = values[identity_descriptor()]
    l = np.array([values[gp(j)] - base - 0.5 for j in range(1, n + 1)])
    m = np.array([values[gq(j)] - base - 0.5 for j in range(1, n + 1)])
    return l, m, base


def solve_trace(records, l, m) -> float:
    """Tr S = 2<N> - |l|^2 - |m|^2 + n."""
    values = _record_map(records)
    _require(values, [identity_descriptor()])
    n = len(l)
    return float(2.0 * values[identity_descriptor()] - l @ l - m @ m + n)


def _gsp1_row(x: float, alpha: float):
    """Coefficient row of the one-mode variance equation for gate (x, alpha).

    With G the gate's Gram matrix, the setting satisfies
        (G11-1) s_pp + (G22-1) s_qq + 2 G12 s_pq
            = 2 (shifted - baseline) - [(G11-1) l^2 + (G22-1) m^2 - 2 G12 l m].
    Returns ((G11-1, G22-1, 2 G12), mean-term evaluator).
    """
    gate = rotation_squeeze(x, alpha)
    gram = gate.T @ gate
    return np.array([gram[0, 0] - 1.0, gram[1, 1] - 1.0, 2.0 * gram[0, 1]])


def _gsp1_rhs(row, delta, lj, mj):
    return 2.0 * delta - (row[0] * lj**2 + row[1] * mj**2 - row[2] * lj * mj)


def _gsp2_system():
    """Rows and Gram marginals for the four two-mode settings.

    Returns [(label, x2, gram_interleaved, coeff_row)] where the
    coefficient row applies to (g11, g12, g21, g22) of the cross block.
    """
    out = []
    for label in ("H", "K"):
        for x2 in (2.0, 3.0):
            gate = two_mode_gate_matrix(UNITARY_LABELS[label], 1.0, x2)
            gram = gram_interleaved(gate)
            cross = gram[2:4, 0:2]
            row = np.array([cross[0, 0], cross[1, 0], cross[0, 1], cross[1, 1]])
            out.append((label, x2, gram, row))
    return out


def _verify_protocol_coefficients():
    # One-time guard: the derived solver coefficients must equal the
    # hard-coded protocol values; a drift in either gate construction or
    # these constants fails loudly at import.
    row_a = _gsp1_row(SQRT2, 0.0)
    row_b = _gsp1_row(SQRT3, 0.0)
    row_t = _gsp1_row(SQRT2, TILT)
    assert np.allclose(row_a, [1.0, -0.5, 0.0], atol=1e-12)
    assert np.allclose(row_b, [2.0, -2.0 / 3.0, 0.0], atol=1e-12)
    assert np.allclose(row_t, [0.25, 0.25, 1.5], atol=1e-12)
    expected = {
        ("H", 2.0): [0.5, 0.0, 0.0, -0.25],
        ("H", 3.0): [1.0, 0.0, 0.0, -1.0 / 3.0],
        ("K", 2.0): [0.0, -0.5, -0.25, 0.0],
        ("K", 3.0): [0.0, -1.0, -1.0 / 3.0, 0.0],
    }
    for label, x2, _, row in _gsp2_system():
        assert np.allclose(row, expected[(label, x2)], atol=1e-12), (label, x2, row)


_verify_protocol_coefficients()


def solve_diagonal_blocks(records, l, m, trace_S):
    """Per-mode 2x2 covariance blocks from the one-mode symplectic settings.

    Modes below n solve a 2x2 system from the sqrt(2) and sqrt(3)
    stretches; the last mode replaces the sqrt(3) equation with the trace
    remainder.  The tilted setting then isolates the cross entry.
    """
    values = _record_map(records)
    n = len(l)
    _require(values, [identity_descriptor()])
    base = values[identity_descriptor()]
    row_a = _gsp1_row(SQRT2, 0.0)
    row_b = _gsp1_row(SQRT3, 0.0)
    row_t = _gsp1_row(SQRT2, TILT)
    blocks = {}
    residuals = {}
    for j in range(1, n + 1):
        needed = [gsp1(j, SQRT2, 0.0), gsp1(j, SQRT2, TILT)]
        if j < n:
            needed.insert(1, gsp1(j, SQRT3, 0.0))
        _require(values, needed)
        lj, mj = l[j - 1], m[j - 1]
        rhs_a = _gsp1_rhs(row_a, values[gsp1(j, SQRT2, 0.0)] - base, lj, mj)
        if j < n:
            rhs_b = _gsp1_rhs(row_b, values[gsp1(j, SQRT3, 0.0)] - base, lj, mj)
            mat = np.array([row_a[:2], row_b[:2]])
            rhs = np.array([rhs_a, rhs_b])
        else:
            remainder = trace_S - sum(np.trace(blocks[i]) for i in range(1, n))
            mat = np.array([row_a[:2], [1.0, 1.0]])
            rhs = np.array([rhs_a, remainder])
        spp, sqq = np.linalg.solve(mat, rhs)
        rhs_t = _gsp1_rhs(row_t, values[gsp1(j, SQRT2, TILT)] - base, lj, mj)
        spq = (rhs_t - row_t[0] * spp - row_t[1] * sqq) / row_t[2]
        blocks[j] = np.array([[spp, spq], [spq, sqq]])
        residuals[f"diag[{j}]"] = float(np.max(np.abs(mat @ [spp, sqq] - rhs)))
    return blocks, residuals


def solve_offdiagonal_blocks(records, l, m, diag_blocks):
    """Cross-covariance blocks of every mode pair from the two-mode settings.

    Each setting pins one linear functional Tr(S_ij B) of the unknown
    block after the known marginal and mean contributions are removed;
    the four functionals form an invertible 4x4 system.
    """
    values = _record_map(records)
    n = len(l)
    _require(values, [identity_descriptor()])
    base = values[identity_descriptor()]
    system = _gsp2_system()
    eye4 = np.eye(4)
    blocks = {}
    residuals = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            needed = [gsp2(i, j, lab, 1.0, x2) for lab in ("H", "K") for x2 in (2.0, 3.0)]
            _require(values, needed)
            mu4 = np.array([l[i - 1], -m[i - 1], l[j - 1], -m[j - 1]])
            s_ii, s_jj = diag_blocks[i], diag_blocks[j]
            mat = np.zeros((4, 4))
            rhs = np.zeros(4)
            for row_idx, (label, x2, gram, row) in enumerate(system):
                delta = values[gsp2(i, j, label, 1.0, x2)] - base
                known = 0.5 * (
                    np.trace(s_ii @ (gram[0:2, 0:2] - np.eye(2)))
                    + np.trace(s_jj @ (gram[2:4, 2:4] - np.eye(2)))
                )
                mean_term = 0.5 * mu4 @ ((gram - eye4) @ mu4)
                mat[row_idx] = row
                rhs[row_idx] = delta - known - mean_term
            g = np.linalg.solve(mat, rhs)
            blocks[(i, j)] = np.array([[g[0], g[1]], [g[2], g[3]]])
            residuals[f"offdiag[{i},{j}]"] = float(np.max(np.abs(mat @ g - rhs)))
    return blocks, residuals


@dataclass(frozen=True)
class ReconstructionResult:
    state: GaussianState
    valid: bool
    residuals: dict = field(default_factory=dict)
    projected: Optional[GaussianState] = None


def reconstruct_state(records, project: bool = False) -> ReconstructionResult:
    """Compose the four solves into a full (l, m, S) estimate.

    The raw estimate is always returned, flagged by whether its
    uncertainty margin clears ``RECONSTRUCTION_VALIDITY_TOL``.  With
    ``project=True`` a covariance with its symplectic spectrum clipped up
    to 1/2 is attached alongside; nothing is projected silently.
    """
    l, m, _ = solve_means(records)
    n = len(l)
    trace_S = solve_trace(records, l, m)
    diag_blocks, diag_res = solve_diagonal_blocks(records, l, m, trace_S)
    S = np.zeros((2 * n, 2 * n))
    for j in range(1, n + 1):
        block = diag_blocks[j]
        S[j - 1, j - 1] = block[0, 0]
        S[j - 1, n + j - 1] = block[0, 1]
        S[n + j - 1, j - 1] = block[0, 1]
        S[n + j - 1, n + j - 1] = block[1, 1]
    residuals = dict(diag_res)
    if n > 1:
        off_blocks, off_res = solve_offdiagonal_blocks(records, l, m, diag_blocks)
        residuals.update(off_res)
        for (i, j), g in off_blocks.items():
            S[i - 1, j - 1] = g[0, 0]
            S[i - 1, n + j - 1] = g[0, 1]
            S[n + i - 1, j - 1] = g[1, 0]
            S[n + i - 1, n + j - 1] = g[1, 1]
            S[j - 1, i - 1] = g[0, 0]
            S[n + j - 1, i - 1] = g[0, 1]
            S[j - 1, n + i - 1] = g[1, 0]
            S[n + j - 1, n + i - 1] = g[1, 1]
    S = 0.5 * (S + S.T)
    margin = validity_margin(S)
    state = GaussianState(n, l, m, S, require_valid=False)
    projected = None
    if project:
        projected = GaussianState(
            n, l, m, clip_to_physical(S), require_valid=False
        )
    return ReconstructionResult(
        state=state,
        valid=bool(margin >= RECONSTRUCTION_VALIDITY_TOL),
        residuals=residuals,
        projected=projected,
    )


def symplectic_spectrum(S: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a symmetric matrix, descending.

    Diagnostic only: the non-symmetric eigensolve behind it can be off by
    ~1e-7 near degeneracies.  Decide physicality with
    :func:`gausscount.states.validity_margin`, which is backward stable.
    """
    n = S.shape[0] // 2
    ev = np.linalg.eigvals(make_form(n) @ S)
    nus = np.sort(np.abs(ev.imag))[::-1]
    return nus[: 2 * n : 2][: n] if nus.size else nus


def clip_to_physical(S: np.ndarray) -> np.ndarray:
    """Clip the symplectic spectrum of S up to 1/2.

    Uses the normal form S = M D M^T with D carrying each symplectic
    eigenvalue twice; eigenvalues below 1/2 are raised to 1/2 and the
    matrix is reassembled.  Directions in which S itself is not positive
    are lifted to a tiny positive floor first, and round-off left over
    from the normal-form chain is absorbed by a final isotropic lift, so
    the result always satisfies the uncertainty constraint.
    """
    S = 0.5 * (S + S.T)
    n = S.shape[0] // 2
    evals, evecs = np.linalg.eigh(S)
    evals = np.clip(evals, 1e-10, None)
    root = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    inv_root = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.T
    anti = inv_root @ make_form(n) @ inv_root
    anti = 0.5 * (anti - anti.T)
    t_mat, q_mat = schur(anti, output="real")
    kappas = np.zeros(n)
    for b in range(n):
        kappa = t_mat[2 * b, 2 * b + 1]
        if kappa > 0:  # normalise block to [[0, -k], [k, 0]]
            q_mat[:, 2 * b + 1] *= -1.0
            kappa = -kappa
        kappas[b] = -kappa
    nus = 1.0 / kappas
    scale = np.repeat(np.sqrt(kappas), 2)
    basis = root @ q_mat @ np.diag(scale)
    clipped = np.repeat(np.maximum(nus, 0.5), 2)
    out = basis @ np.diag(clipped) @ basis.T
    out = 0.5 * (out + out.T)
    margin = validity_margin(out)
    if margin < 0.0:
        # adding c to every diagonal entry raises the margin by exactly 2c
        out = out + (0.5 * -margin + 1e-12) * np.eye(2 * n)
    return out

"""Brute-force ground truth in a truncated number basis.

States on one or two modes are built by applying the literal gate unitaries
(displacement, squeeze, rotation, beamsplitter) to a truncated density
matrix, and counting distributions are read off the diagonal.  Each gate
constructor is paired with the exact symplectic matrix or displacement it
realises on the Gaussian side; the pairing is pinned by the calibration
tests, not by convention folklore.

Truncation guards are hard errors: silent edge leakage is the main way a
brute-force oracle can falsely agree with a closed form.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, TruncationRiskError
from .states import Displacement, GaussianState, conjugate, displace, thermal, vacuum
from .symplectic import embed

#: Hard cap on the mean occupation a gate may inject, as a fraction of dim.
GUARD_FRACTION = 0.1

#: Basis states with total occupation at or beyond this fraction of the
#: maximum count as "edge" for leakage checks.
EDGE_FRACTION = 0.9

EDGE_MASS_TOL = 1e-6


def ladder(dim: int) -> np.ndarray:
    """Truncated annihilation operator, a|k> = sqrt(k)|k-1>."""
    if dim < 2:
        raise DimensionError(f"need dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def weyl_operator(u: complex, dim: int) -> np.ndarray:
    """Displacement unitary exp(u a^dag - conj(u) a)."""
    if abs(u) ** 2 > GUARD_FRACTION * dim:
        raise TruncationRiskError(
            f"|u|^2 = {abs(u)**2:.3f} exceeds dim/10 = {GUARD_FRACTION * dim:.1f}"
        )
    a = ladder(dim)
    return expm(u * a.conj().T - np.conj(u) * a)


def squeeze_operator(z: complex, dim: int) -> np.ndarray:
    """Squeeze unitary exp((conj(z) a^2 - z a^dag^2) / 2)."""
    if np.sinh(abs(z)) ** 2 > GUARD_FRACTION * dim:
        raise TruncationRiskError(
            f"sinh(|z|)^2 = {np.sinh(abs(z))**2:.3f} exceeds dim/10"
        )
    a = ladder(dim)
    return expm(0.5 * (np.conj(z) * a @ a - z * a.conj().T @ a.conj().T))


def rotation_operator(theta: float, dim: int) -> np.ndarray:
    """Phase rotation exp(-i theta a^dag a); diagonal, hence exact."""
    return np.diag(np.exp(-1j * theta * np.arange(dim)))


def beamsplitter_operator(theta: float, phi: float, dim: int) -> np.ndarray:
    """Two-mode unitary exp(theta (e^{i phi} a1^dag a2 - e^{-i phi} a1 a2^dag)).

    The generator conserves the total count, so it is exponentiated
    block-by-block over the total-occupation subspaces; the result equals
    the exponential of the truncated generator and is exactly unitary.
    """
    dim2 = dim * dim
    out = np.zeros((dim2, dim2), dtype=complex)
    up = theta * np.exp(1j * phi)
    for total in range(2 * dim - 1):
        k1s = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        idx = k1s * dim + (total - k1s)
        block = np.zeros((k1s.size, k1s.size), dtype=complex)
        for pos, k1 in enumerate(k1s):
            k2 = total - k1
            if pos + 1 < k1s.size:  # |k1,k2> -> |k1+1,k2-1>
                amp = up * np.sqrt((k1 + 1) * k2)
                block[pos + 1, pos] += amp
                block[pos, pos + 1] += -np.conj(amp)
        out[np.ix_(idx, idx)] = expm(block)
    return out


@dataclass(frozen=True)
class FockState:
    """Density matrix on a truncated 1- or 2-mode number basis.

    Two-mode basis order is |k1> x |k2>, row-major.
    """

    modes: int
    dim: int
    rho: np.ndarray

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise DimensionError(f"oracle supports 1 or 2 modes, got {self.modes}")
        size = self.dim**self.modes
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (size, size):
            raise DimensionError(f"density of shape {rho.shape}, expected {size}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"density trace {tr!r} differs from 1")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)


def vacuum_fock(modes: int, dim: int) -> FockState:
    size = dim**modes
    rho = np.zeros((size, size), dtype=complex)
    rho[0, 0] = 1.0
    return FockState(modes, dim, rho)


def thermal_fock(t: float, dim: int) -> FockState:
    """One-mode thermal state, geometric weights renormalised on the basis."""
    if t <= 0:
        raise ValueError(f"thermal parameter must be positive, got {t}")
    weights = (1.0 - np.exp(-t)) * np.exp(-t * np.arange(dim))
    weights = weights / weights.sum()
    return FockState(1, dim, np.diag(weights).astype(complex))


def product_state(state1: FockState, state2: FockState) -> FockState:
    if state1.modes != 1 or state2.modes != 1 or state1.dim != state2.dim:
        raise DimensionError("product_state combines two one-mode states of equal dim")
    return FockState(2, state1.dim, np.kron(state1.rho, state2.rho))


def apply_unitary(state: FockState, unitary: np.ndarray) -> FockState:
    return FockState(state.modes, state.dim, unitary @ state.rho @ unitary.conj().T)


def embed_one_mode(unitary: np.ndarray, mode: int, dim: int) -> np.ndarray:
    """Lift a one-mode operator onto mode 1 or 2 of a two-mode space."""
    eye = np.eye(dim, dtype=complex)
    if mode == 1:
        return np.kron(unitary, eye)
    if mode == 2:
        return np.kron(eye, unitary)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def total_counts(modes: int, dim: int) -> np.ndarray:
    """Total occupation of each basis state, in basis order."""
    ks = np.arange(dim)
    if modes == 1:
        return ks
    return (ks[:, None] + ks[None, :]).reshape(-1)


def _check_mode_edges(diag: np.ndarray, modes: int, dim: int, context: str):
    # Per-mode occupation mass near the single-mode cutoff.  The total-count
    # check alone misses damage done before a beamsplitter spreads it.
    edge = int(np.floor(EDGE_FRACTION * (dim - 1)))
    if modes == 1:
        margins = [diag[edge:].sum()]
    else:
        grid = diag.reshape(dim, dim)
        margins = [grid[edge:, :].sum(), grid[:, edge:].sum()]
    worst = max(margins)
    if worst > EDGE_MASS_TOL:
        raise TruncationRiskError(
            f"{worst:.2e} probability mass at a per-mode truncation edge {context}"
        )


def number_distribution(state: FockState) -> np.ndarray:
    """P(N = k) for the total count, from the density diagonal.

    Raises :class:`TruncationRiskError` when more than ``EDGE_MASS_TOL``
    of the mass sits in the top decile of total occupation.
    """
    diag = np.real(np.diag(state.rho))
    totals = total_counts(state.modes, state.dim)
    kmax = totals.max()
    dist = np.zeros(kmax + 1)
    np.add.at(dist, totals, diag)
    edge = int(np.floor(EDGE_FRACTION * kmax))
    edge_mass = dist[edge:].sum()
    if edge_mass > EDGE_MASS_TOL:
        raise TruncationRiskError(
            f"{edge_mass:.2e} probability mass at the truncation edge"
        )
    return dist


def pgf_oracle(state: FockState, x: float) -> float:
    """Direct evaluation of E[x^N] from the number distribution."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"pgf argument must be in [0, 1], got {x}")
    dist = number_distribution(state)
    return float(dist @ x ** np.arange(dist.size))


def quadrature_operators(modes: int, dim: int):
    """Per-mode momentum and position operators p = -i(a - a^dag)/sqrt(2),
    q = (a + a^dag)/sqrt(2)."""
    a = ladder(dim)
    if modes == 1:
        ops = [a]
    else:
        ops = [embed_one_mode(a, 1, dim), embed_one_mode(a, 2, dim)]
    ps = [-1j * (op - op.conj().T) / np.sqrt(2.0) for op in ops]
    qs = [(op + op.conj().T) / np.sqrt(2.0) for op in ops]
    return ps, qs


def fock_mean_cov(state: FockState):
    """Means (l, m) and covariance S of (p, -q) computed by brute force.

    Quadratic in the basis size; intended for the modest dims used in
    calibration tests.
    """
    ps, qs = quadrature_operators(state.modes, state.dim)
    obs = ps + [-q for q in qs]
    rho = state.rho
    mu = np.array([np.einsum("ij,ji->", rho, op).real for op in obs])
    k = len(obs)
    S = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            sym = 0.5 * (obs[i] @ obs[j] + obs[j] @ obs[i])
            S[i, j] = S[j, i] = np.einsum("ij,ji->", rho, sym).real - mu[i] * mu[j]
    n = state.modes
    return mu[:n], -mu[n:], S


# ---------------------------------------------------------------------------
# Symplectic twins of the gate constructors.  These are the matrices whose
# state action (via states.conjugate / states.displace) reproduces the
# corresponding truncated unitary exactly; see the calibration tests.

def rotation_symplectic(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeeze_symplectic(r: float, phi: float) -> np.ndarray:
    ch, sh = np.cosh(r), np.sinh(r)
    return np.array(
        [
            [ch - np.cos(phi) * sh, -np.sin(phi) * sh],
            [-np.sin(phi) * sh, ch + np.cos(phi) * sh],
        ]
    )


def beamsplitter_symplectic(theta: float, phi: float) -> np.ndarray:
    mixer = np.array(
        [
            [np.cos(theta), np.exp(1j * phi) * np.sin(theta)],
            [-np.exp(-1j * phi) * np.sin(theta), np.cos(theta)],
        ]
    )
    return np.block([[mixer.real, -mixer.imag], [mixer.imag, mixer.real]])


# ---------------------------------------------------------------------------
# Gate scripts: the same sequence drives both the Fock and the Gaussian side.

def _check_op(op: dict, modes: int):
    kind = op.get("op")
    if kind in ("displace", "squeeze", "rotate"):
        mode = int(op.get("mode", 1))
        if not 1 <= mode <= modes:
            raise ValueError(f"script op {op} addresses mode {mode} of {modes}")
    elif kind == "beamsplitter":
        if modes != 2:
            raise ValueError("beamsplitter requires a two-mode script")
    else:
        raise ValueError(f"unknown script op {kind!r}")


def _initial_gaussian(modes: int, input_spec: dict) -> GaussianState:
    kind = input_spec.get("kind", "vacuum")
    if kind == "vacuum":
        return vacuum(modes)
    if kind == "thermal":
        t = np.atleast_1d(np.asarray(input_spec["t"], dtype=float))
        if t.shape != (modes,):
            raise DimensionError(f"need one thermal parameter per mode, got {t}")
        return thermal(t)
    raise ValueError(f"unknown script input {kind!r}")


def run_script_gaussian(modes: int, input_spec: dict, ops) -> GaussianState:
    """Track a gate script analytically on the (l, m, S) parameters."""
    state = _initial_gaussian(modes, input_spec)
    for op in ops:
        _check_op(op, modes)
        kind = op["op"]
        if kind == "displace":
            x = np.zeros(modes)
            y = np.zeros(modes)
            x[int(op.get("mode", 1)) - 1] = float(op.get("re", 0.0))
            y[int(op.get("mode", 1)) - 1] = float(op.get("im", 0.0))
            state = displace(state, Displacement(x, y))
        elif kind == "squeeze":
            gate = squeeze_symplectic(float(op.get("r", 0.0)), float(op.get("phi", 0.0)))
            state = conjugate(state, embed(gate, [int(op.get("mode", 1))], modes))
        elif kind == "rotate":
            gate = rotation_symplectic(float(op.get("theta", 0.0)))
            state = conjugate(state, embed(gate, [int(op.get("mode", 1))], modes))
        elif kind == "beamsplitter":
            gate = beamsplitter_symplectic(float(op.get("theta", 0.0)), float(op.get("phi", 0.0)))
            state = conjugate(state, gate)
    return state


def _script_unitary(op: dict, modes: int, dim: int) -> np.ndarray:
    kind = op["op"]
    if kind == "displace":
        u = complex(float(op.get("re", 0.0)), float(op.get("im", 0.0)))
        gate = weyl_operator(u, dim)
    elif kind == "squeeze":
        z = float(op.get("r", 0.0)) * np.exp(1j * float(op.get("phi", 0.0)))
        gate = squeeze_operator(z, dim)
    elif kind == "rotate":
        gate = rotation_operator(float(op.get("theta", 0.0)), dim)
    elif kind == "beamsplitter":
        return beamsplitter_operator(float(op.get("theta", 0.0)), float(op.get("phi", 0.0)), dim)
    else:
        raise ValueError(f"unknown script op {kind!r}")
    if modes == 2:
        return embed_one_mode(gate, int(op.get("mode", 1)), dim)
    return gate


def run_script_fock(modes: int, input_spec: dict, ops, dim: int) -> FockState:
    """Run a gate script on the truncated basis.

    A pure (vacuum) input is evolved as a vector, so two-mode scripts cost
    matrix-vector products; thermal inputs fall back to density conjugation.
    Every intermediate state must keep its per-mode occupation away from
    the cutoff, or the run aborts with a truncation error.
    """
    kind = input_spec.get("kind", "vacuum")
    if kind == "vacuum":
        size = dim**modes
        psi = np.zeros(size, dtype=complex)
        psi[0] = 1.0
        for step, op in enumerate(ops):
            _check_op(op, modes)
            psi = _script_unitary(op, modes, dim) @ psi
            _check_mode_edges(np.abs(psi) ** 2, modes, dim, f"after script op {step}")
        return FockState(modes, dim, np.outer(psi, psi.conj()))
    state = _initial_gaussian_fock(modes, input_spec, dim)
    for step, op in enumerate(ops):
        _check_op(op, modes)
        state = apply_unitary(state, _script_unitary(op, modes, dim))
        _check_mode_edges(
            np.real(np.diag(state.rho)), modes, dim, f"after script op {step}"
        )
    return state


def _initial_gaussian_fock(modes: int, input_spec: dict, dim: int) -> FockState:
    kind = input_spec.get("kind", "vacuum")
    if kind == "vacuum":
        return vacuum_fock(modes, dim)
    if kind == "thermal":
        t = np.atleast_1d(np.asarray(input_spec["t"], dtype=float))
        if t.shape != (modes,):
            raise DimensionError(f"need one thermal parameter per mode, got {t}")
        parts = [thermal_fock(float(tj), dim) for tj in t]
        return parts[0] if modes == 1 else product_state(parts[0], parts[1])
    raise ValueError(f"unknown script input {kind!r}")

"""The Gaussian state data model and its exact transformation rules.

A state is parameterised by the momentum means l, the position means m and
the 2n x 2n covariance matrix S of the vector (p_1..p_n, -q_1..-q_n), in
block ordering.  The recurring mean vector is mu = (l; -m).  Validity means
the uncertainty constraint 2S + iJ >= 0.

Displacement by u = x + i*y shifts (l, m) by (sqrt(2) y, sqrt(2) x) and
leaves S alone.  Conjugation by the unitary lift of a symplectic matrix L
maps mu to (L^{-1})^T mu and S to (L^{-1})^T S L^{-1}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidCovarianceError
from .symplectic import make_form, random_symplectic, symplectic_inverse

#: Most negative admissible eigenvalue of the Hermitian matrix 2S + iJ.
VALIDITY_TOL = -1e-9

PURITY_TOL = 1e-6


@dataclass(frozen=True)
class Displacement:
    """Complex displacement amplitude u = x + i*y, one entry per mode."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.shape != y.shape or x.ndim != 1:
            raise DimensionError(f"displacement parts {x.shape} vs {y.shape}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("displacement entries must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]


def validity_margin(S: np.ndarray) -> float:
    """Minimum eigenvalue of the Hermitian matrix 2S + iJ."""
    n = S.shape[0] // 2
    herm = 2.0 * S.astype(complex) + 1j * make_form(n)
    return float(np.linalg.eigvalsh(herm)[0])


@dataclass(frozen=True)
class GaussianState:
    """Immutable n-mode Gaussian state (l, m; S).

    The covariance matrix is symmetrised on construction and all arrays
    are frozen, so states are safe to share.  Construction rejects
    covariances whose uncertainty margin falls below ``VALIDITY_TOL``
    unless ``require_valid=False`` (used by estimators that must report
    raw, possibly unphysical, fits).
    """

    n: int
    l: np.ndarray
    m: np.ndarray
    S: np.ndarray
    require_valid: bool = field(default=True, repr=False)

    def __post_init__(self):
        l = np.atleast_1d(np.asarray(self.l, dtype=float)).copy()
        m = np.atleast_1d(np.asarray(self.m, dtype=float)).copy()
        S = np.asarray(self.S, dtype=float).copy()
        if l.shape != (self.n,) or m.shape != (self.n,):
            raise DimensionError(
                f"mean vectors of shape {l.shape}, {m.shape} for n={self.n}"
            )
        if S.shape != (2 * self.n, 2 * self.n):
            raise DimensionError(f"covariance of shape {S.shape} for n={self.n}")
        if np.max(np.abs(S - S.T)) > 1e-12 * max(1.0, np.max(np.abs(S))):
            raise InvalidCovarianceError("covariance matrix is not symmetric")
        S = 0.5 * (S + S.T)
        if self.require_valid:
            margin = validity_margin(S)
            if margin < VALIDITY_TOL:
                raise InvalidCovarianceError(
                    f"2S + iJ has minimum eigenvalue {margin:.3e} < {VALIDITY_TOL}"
                )
        for arr in (l, m, S):
            arr.setflags(write=False)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "S", S)

    def mean_vector(self) -> np.ndarray:
        """The 2n mean vector mu = (l; -m)."""
        return np.concatenate([self.l, -self.m])


def new_state(l, m, S, require_valid: bool = True) -> GaussianState:
    """Validated state from raw mean vectors and covariance matrix."""
    l = np.atleast_1d(np.asarray(l, dtype=float))
    return GaussianState(n=l.shape[0], l=l, m=m, S=S, require_valid=require_valid)


def vacuum(n: int) -> GaussianState:
    """The n-mode vacuum: zero means, S = I/2."""
    return GaussianState(n, np.zeros(n), np.zeros(n), 0.5 * np.eye(2 * n))


def coherent(u: Displacement) -> GaussianState:
    """Coherent state with amplitude u: (sqrt(2) Im u, sqrt(2) Re u; I/2)."""
    n = u.n
    return GaussianState(n, np.sqrt(2.0) * u.y, np.sqrt(2.0) * u.x, 0.5 * np.eye(2 * n))


def thermal(t) -> GaussianState:
    """Product thermal state with inverse temperatures t_j > 0.

    Mode j carries the scalar covariance (1 + e^{-t_j}) / (2 (1 - e^{-t_j}))
    on both of its quadratures.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError(f"thermal parameters must be positive, got {t}")
    n = t.shape[0]
    nu = 0.5 * (1.0 + np.exp(-t)) / (1.0 - np.exp(-t))
    S = np.diag(np.concatenate([nu, nu]))
    return GaussianState(n, np.zeros(n), np.zeros(n), S)


def displace(rho: GaussianState, u: Displacement) -> GaussianState:
    """Conjugate by the displacement unitary of amplitude u."""
    if u.n != rho.n:
        raise DimensionError(f"displacement on {u.n} modes for state of {rho.n}")
    return GaussianState(
        rho.n,
        rho.l + np.sqrt(2.0) * u.y,
        rho.m + np.sqrt(2.0) * u.x,
        rho.S,
        require_valid=False,
    )


def conjugate(rho: GaussianState, L: np.ndarray) -> GaussianState:
    """Conjugate by the unitary lift of the symplectic matrix L."""
    L = np.asarray(L, dtype=float)
    if L.shape != (2 * rho.n, 2 * rho.n):
        raise DimensionError(f"gate of shape {L.shape} for state of {rho.n} modes")
    inv = symplectic_inverse(L)
    mu = inv.T @ rho.mean_vector()
    S = inv.T @ rho.S @ inv
    return GaussianState(rho.n, mu[: rho.n], -mu[rho.n :], S, require_valid=False)


def overlap(rho1: GaussianState, rho2: GaussianState) -> float:
    """Trace of the product of two Gaussian states.

    exp(-delta^T (S+T)^{-1} delta / 2) / sqrt(det(S+T)) with
    delta = (l1-l2; -(m1-m2)).
    """
    if rho1.n != rho2.n:
        raise DimensionError(f"states on {rho1.n} and {rho2.n} modes")
    total = rho1.S + rho2.S
    delta = rho1.mean_vector() - rho2.mean_vector()
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise InvalidCovarianceError("S + T is not positive definite")
    quad = delta @ np.linalg.solve(total, delta)
    return float(np.exp(-0.5 * quad - 0.5 * logdet))


def fourier_transform(rho: GaussianState, x, y) -> complex:
    """Quantum Fourier transform of the state evaluated at u = x + i*y."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (rho.n,) or y.shape != (rho.n,):
        raise DimensionError(f"evaluation point of shape {x.shape}, {y.shape}")
    v = np.concatenate([x, y])
    phase = -1j * np.sqrt(2.0) * (rho.l @ x - rho.m @ y)
    return complex(np.exp(phase - v @ rho.S @ v))


def purity_check(rho: GaussianState) -> bool:
    """True iff the state is pure: det(2S) = 1 within ``PURITY_TOL``."""
    return bool(abs(np.linalg.det(2.0 * rho.S) - 1.0) <= PURITY_TOL)


def random_state(n: int, rng: np.random.Generator, mean_scale: float = 1.0,
                 pure: bool = False) -> GaussianState:
    """Random valid state: thermal covariances conjugated by a random gate.

    Symplectic eigenvalues are drawn from [1/2, 1.2] (exactly 1/2 when
    ``pure``), so every sample satisfies the uncertainty constraint with
    the thermal margin to spare.
    """
    L = random_symplectic(n, rng)
    nu = np.full(n, 0.5) if pure else rng.uniform(0.5, 1.2, size=n)
    D = np.diag(np.concatenate([nu, nu]))
    inv = symplectic_inverse(L)
    S = inv.T @ D @ inv
    l = mean_scale * rng.normal(size=n)
    m = mean_scale * rng.normal(size=n)
    return GaussianState(n, l, m, S)


def state_to_dict(rho: GaussianState) -> dict:
    """JSON-ready dictionary: {"n", "l", "m", "S", "ordering"}."""
    return {
        "n": rho.n,
        "l": rho.l.tolist(),
        "m": rho.m.tolist(),
        "S": rho.S.tolist(),
        "ordering": "pq-blocks",
    }


def state_from_dict(data: dict, require_valid: bool = True) -> GaussianState:
    """Inverse of :func:`state_to_dict`; rejects unknown orderings."""
    ordering = data.get("ordering", "pq-blocks")
    if ordering != "pq-blocks":
        raise ValueError(f"unsupported ordering {ordering!r}")
    return GaussianState(
        int(data["n"]),
        np.asarray(data["l"], dtype=float),
        np.asarray(data["m"], dtype=float),
        np.asarray(data["S"], dtype=float),
        require_valid=require_valid,
    )

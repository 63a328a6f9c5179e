"""Real symplectic matrices and the fixed gate set built from them.

Every matrix in this package uses the block quadrature ordering
(x_1 .. x_n, y_1 .. y_n): mode j owns rows j and n+j.  Two-mode
constructions that are more natural in the interleaved ordering
(x_1, y_1, x_2, y_2) are permuted to block ordering at construction
time, so downstream code never has to juggle two conventions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidUnitaryError

SYMPLECTIC_TOL = 1e-10


def make_form(n: int) -> np.ndarray:
    """Antisymmetric form J = [[0, -I], [I, 0]] on n modes."""
    if n < 1:
        raise DimensionError(f"mode count must be >= 1, got {n}")
    z = np.zeros((n, n))
    eye = np.eye(n)
    return np.block([[z, -eye], [eye, z]])


def is_symplectic(matrix: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """True iff M^T J M = J entrywise within ``tol``."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] % 2 != 0:
        raise DimensionError(f"symplectic matrices have even size, got {matrix.shape[0]}")
    form = make_form(matrix.shape[0] // 2)
    return bool(np.max(np.abs(matrix.T @ form @ matrix - form)) <= tol)


def symplectic_inverse(matrix: np.ndarray) -> np.ndarray:
    """Inverse of a symplectic matrix, computed exactly as -J M^T J."""
    form = make_form(matrix.shape[0] // 2)
    return -form @ matrix.T @ form


def tau(matrix: np.ndarray) -> np.ndarray:
    """Inverse-transpose map (M^{-1})^T; an involution on the symplectic group."""
    return symplectic_inverse(matrix).T


def rotation_squeeze(x: float, alpha: float) -> np.ndarray:
    """One-mode gate matrix: rotation by alpha conjugating diag(x, 1/x).

    Returns R(alpha) diag(x, 1/x) R(-alpha) with R the counterclockwise
    2x2 rotation.  Symmetric and symplectic for every x > 0.
    """
    if x <= 0:
        raise ValueError(f"stretch factor must be positive, got {x}")
    c, s = np.cos(alpha), np.sin(alpha)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([x, 1.0 / x]) @ rot.T


@dataclass(frozen=True)
class TwoModeUnitary:
    """2x2 unitary [[a, b], [-conj(b), conj(a)]] split into real parts.

    a = a1 + i*a2 and b = b1 + i*b2 must satisfy |a|^2 + |b|^2 = 1.
    """

    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        norm = self.a1**2 + self.a2**2 + self.b1**2 + self.b2**2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidUnitaryError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")


_INV_SQRT2 = 1.0 / np.sqrt(2.0)

#: The two unitaries used by the pair-mode measurement schedule.
U_H = TwoModeUnitary(_INV_SQRT2, 0.0, _INV_SQRT2, 0.0)
U_K = TwoModeUnitary(0.0, _INV_SQRT2, _INV_SQRT2, 0.0)

UNITARY_LABELS = {"H": U_H, "K": U_K}


def _interleave_to_block(n: int) -> np.ndarray:
    # P @ v_interleaved = v_block
    perm = np.zeros((2 * n, 2 * n))
    for j in range(n):
        perm[j, 2 * j] = 1.0
        perm[n + j, 2 * j + 1] = 1.0
    return perm


_P4 = _interleave_to_block(2)


def _ortho_interleaved(u: TwoModeUnitary) -> np.ndarray:
    a1, a2, b1, b2 = u.a1, u.a2, u.b1, u.b2
    return np.array(
        [
            [a1, -a2, b1, -b2],
            [a2, a1, b2, b1],
            [-b1, -b2, a1, a2],
            [b2, -b1, -a2, a1],
        ]
    )


def unitary_to_orthosymplectic(u: TwoModeUnitary) -> np.ndarray:
    """Realise a 2x2 unitary as a real orthogonal symplectic 4x4 matrix.

    The action of a + i*b on (x1 + i*y1, x2 + i*y2) as a real-linear map,
    permuted to block ordering.  Orthogonal and symplectic.
    """
    return _P4 @ _ortho_interleaved(u) @ _P4.T


def two_mode_gate_matrix(u: TwoModeUnitary, x1: float, x2: float) -> np.ndarray:
    """Two-mode gate matrix O diag(sqrt(x1), 1/sqrt(x1), sqrt(x2), 1/sqrt(x2)) O^T.

    The stretches carry square roots so that the Gram matrix L^T L = L^2
    equals O diag(x1, 1/x1, x2, 1/x2) O^T, whose off-diagonal mode block
    is the closed form returned by :func:`offdiag_block`.  Symmetric and
    symplectic; block ordering.
    """
    if x1 <= 0 or x2 <= 0:
        raise ValueError(f"stretch factors must be positive, got {x1}, {x2}")
    ortho = _ortho_interleaved(u)
    r1, r2 = np.sqrt(x1), np.sqrt(x2)
    interleaved = ortho @ np.diag([r1, 1.0 / r1, r2, 1.0 / r2]) @ ortho.T
    return _P4 @ interleaved @ _P4.T


def offdiag_block(u: TwoModeUnitary, x1: float, x2: float) -> np.ndarray:
    """Closed form of the cross-mode block of the two-mode gate's Gram matrix.

    Interleaved pair coordinates: rows (x2-wire, y2-wire), columns
    (x1-wire, y1-wire).  Matches the block extracted from
    ``two_mode_gate_matrix(u, x1, x2)`` squared.
    """
    if x1 <= 0 or x2 <= 0:
        raise ValueError(f"stretch factors must be positive, got {x1}, {x2}")
    a1, a2, b1, b2 = u.a1, u.a2, u.b1, u.b2
    return np.array(
        [
            [
                -b1 * a1 * (x1 - x2) + b2 * a2 * (1 / x1 - 1 / x2),
                -b1 * a2 * (x1 - 1 / x2) - b2 * a1 * (1 / x1 - x2),
            ],
            [
                b2 * a1 * (x1 - 1 / x2) + b1 * a2 * (1 / x1 - x2),
                b2 * a2 * (x1 - x2) - b1 * a1 * (1 / x1 - 1 / x2),
            ],
        ]
    )


def gram_interleaved(gate_block_ordered: np.ndarray) -> np.ndarray:
    """Gram matrix L^T L of a two-mode gate, in interleaved ordering."""
    gram = gate_block_ordered.T @ gate_block_ordered
    return _P4.T @ gram @ _P4


def embed(gate: np.ndarray, modes, n: int) -> np.ndarray:
    """Place a 1- or 2-mode gate on the listed wires of an n-mode system.

    ``modes`` uses 1-based wire indices; the k-th listed mode receives the
    gate's k-th mode.  Identity on every unlisted wire.
    """
    gate = np.asarray(gate, dtype=float)
    modes = list(modes)
    k = gate.shape[0] // 2
    if gate.shape != (2 * k, 2 * k) or len(modes) != k:
        raise DimensionError(
            f"gate of shape {gate.shape} cannot act on modes {modes}"
        )
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate mode indices in {modes}")
    if any(j < 1 or j > n for j in modes):
        raise ValueError(f"mode indices {modes} out of range 1..{n}")
    out = np.eye(2 * n)
    idx = [j - 1 for j in modes] + [n + j - 1 for j in modes]
    out[np.ix_(idx, idx)] = gate
    return out


def random_symplectic(n: int, rng: np.random.Generator, depth: int = 4,
                      max_log_stretch: float = 0.35) -> np.ndarray:
    """Random symplectic matrix as a product of one- and two-mode gates.

    Stretches stay within exp(+-max_log_stretch) so products remain
    well conditioned.
    """
    out = np.eye(2 * n)
    for _ in range(depth):
        j = int(rng.integers(1, n + 1))
        one = rotation_squeeze(
            float(np.exp(rng.uniform(-max_log_stretch, max_log_stretch))),
            float(rng.uniform(0.0, 2 * np.pi)),
        )
        out = out @ embed(one, [j], n)
        if n >= 2:
            i, j2 = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
            vec = rng.normal(size=4)
            vec /= np.linalg.norm(vec)
            u = TwoModeUnitary(*vec)
            two = two_mode_gate_matrix(
                u,
                float(np.exp(rng.uniform(-max_log_stretch, max_log_stretch))),
                float(np.exp(rng.uniform(-max_log_stretch, max_log_stretch))),
            )
            out = out @ embed(two, [int(i), int(j2)], n)
    return out

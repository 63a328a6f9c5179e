"""Closed-form particle-counting statistics of Gaussian states.

With S = sum_j lambda_j b_j b_j^T and tau_j = b_j . (l; -m), the generating
function of the total count N factorises over the 2n eigendirections,

    G(x) = prod_j sqrt((1-a_j)/(1-a_j x))
           * exp(-tau_j^2 (1-x)(1-a_j) / (2 (1-a_j x))),

where a_j = (lambda_j - 1/2)/(lambda_j + 1/2) always lies in (-1, 1).
Everything in this module is a function of that spectral data.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SpectralPairingError
from .states import GaussianState, purity_check

#: Tolerance for matching reciprocal eigenvalue pairs of a pure covariance.
PAIRING_TOL = 1e-8

#: Coefficients above this floor count as nonnegative in divisibility checks.
DIVISIBILITY_TOL = -1e-8


@dataclass(frozen=True)
class NumberPGF:
    """Spectral data of a state, sufficient to evaluate its counting pgf."""

    lambdas: np.ndarray  # eigenvalues of S, descending
    taus: np.ndarray     # mean-vector coefficients in the eigenbasis
    alphas: np.ndarray   # (lambda - 1/2) / (lambda + 1/2)


def spectral_data(rho: GaussianState) -> NumberPGF:
    """Eigendecomposition of S with mean coefficients, descending order."""
    lambdas, vecs = np.linalg.eigh(rho.S)
    order = np.argsort(lambdas)[::-1]
    lambdas = lambdas[order]
    taus = (vecs.T @ rho.mean_vector())[order]
    alphas = (lambdas - 0.5) / (lambdas + 0.5)
    return NumberPGF(lambdas=lambdas, taus=taus, alphas=alphas)


def _pgf_value(data: NumberPGF, z):
    """Evaluate the factorised pgf at a real or complex point z.

    Valid for |z| < 1/max|a_j|; each factor keeps the principal branch
    because Re(1 - a_j z) > 0 there.
    """
    a = data.alphas
    t2 = data.taus**2
    denom = 1.0 - a * z
    root = np.sqrt((1.0 - a) / denom)
    expo = -0.5 * t2 * (1.0 - z) * (1.0 - a) / denom
    return np.prod(root) * np.exp(np.sum(expo))


def total_pgf(rho: GaussianState, x: float) -> float:
    """Generating function of the total count at x in [0, 1].

    x = 1 returns exactly 1 (normalisation), avoiding the removable 0/0
    in the closed form.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"pgf argument must be in [0, 1], got {x}")
    if x == 1.0:
        return 1.0
    return float(np.real(_pgf_value(spectral_data(rho), x)))


def joint_pgf(rho: GaussianState, xs) -> float:
    """Joint generating function E[x_1^{N_1} ... x_n^{N_n}] at 0 < x_j < 1.

    Direct evaluation of the Gaussian overlap form: with the diagonal
    matrix D carrying (1+x_j)/(2(1-x_j)) on both quadratures of mode j,

        exp(-mu^T (S+D)^{-1} mu / 2) / (prod_j (1-x_j) sqrt(det(S+D))).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.shape != (rho.n,):
        raise ValueError(f"need one argument per mode, got shape {xs.shape}")
    if np.any(xs <= 0.0) or np.any(xs >= 1.0):
        raise ValueError(f"joint pgf arguments must lie in (0, 1), got {xs}")
    d = 0.5 * (1.0 + xs) / (1.0 - xs)
    total = rho.S + np.diag(np.concatenate([d, d]))  # positive definite: d > 1/2
    mu = rho.mean_vector()
    _, logdet = np.linalg.slogdet(total)
    quad = mu @ np.linalg.solve(total, mu)
    return float(np.exp(-0.5 * quad - 0.5 * logdet - np.sum(np.log(1.0 - xs))))


def prob_zero(rho: GaussianState) -> float:
    """Probability of counting zero particles.

    The x -> 0 limit of the pgf: prod_j (1-a_j)^{1/2} exp(-tau_j^2 (1-a_j)/2).
    """
    return total_pgf(rho, 0.0)


def mean_N(rho: GaussianState) -> float:
    """Expected total count: (Tr S - n + |l|^2 + |m|^2) / 2."""
    return float(0.5 * (np.trace(rho.S) - rho.n + rho.l @ rho.l + rho.m @ rho.m))


def var_N(rho: GaussianState) -> float:
    """Variance of the total count: Tr(S - 1/2)(S + 1/2)/2 + mu^T S mu."""
    n2 = 2 * rho.n
    shifted = rho.S - 0.5 * np.eye(n2)
    mu = rho.mean_vector()
    return float(0.5 * np.trace(shifted @ (rho.S + 0.5 * np.eye(n2))) + mu @ rho.S @ mu)


@dataclass(frozen=True)
class PureFactorization:
    """Three-factor split of a pure state's counting pgf.

    The covariance spectrum pairs into (c_j/2, 1/(2 c_j)) with c_j > 1 plus
    residual 1/2 entries.  Factor one collects the even-support squeezing
    contributions, factor two the mean components along the paired
    directions, factor three is a plain Poisson pgf.
    """

    k: int
    cs: np.ndarray
    betas: np.ndarray
    gammas: np.ndarray
    deltas: np.ndarray
    poisson_mean: float

    def g1(self, x: float) -> float:
        b2 = self.betas**2
        return float(np.prod(np.sqrt((1.0 - b2) / (1.0 - b2 * x**2))))

    def g2(self, x: float) -> float:
        b = self.betas
        num = b * (self.gammas - self.deltas) * (x**2 - 1.0) + (
            self.gammas * (1.0 - b) + self.deltas * (1.0 + b)
        ) * (x - 1.0)
        return float(np.exp(0.5 * np.sum(num / (1.0 - b**2 * x**2))))

    def g3(self, x: float) -> float:
        return float(np.exp(self.poisson_mean * (x - 1.0)))


def pure_factorization(rho: GaussianState) -> PureFactorization:
    """Pair the spectrum of a pure state and split its pgf into three factors."""
    if not purity_check(rho):
        raise ValueError("pure factorization requires a pure state")
    data = spectral_data(rho)
    lambdas, taus = data.lambdas, data.taus
    used = np.zeros(lambdas.shape[0], dtype=bool)
    cs, betas, gammas, deltas = [], [], [], []
    poisson = 0.0
    for j in range(lambdas.shape[0]):
        if used[j]:
            continue
        lam = lambdas[j]
        if lam > 0.5 + PAIRING_TOL:
            used[j] = True
            partner_val = 1.0 / (4.0 * lam)  # = 1/(2c) for lam = c/2
            candidates = np.nonzero(
                ~used & (np.abs(lambdas - partner_val) <= PAIRING_TOL)
            )[0]
            if candidates.size == 0:
                raise SpectralPairingError(
                    f"eigenvalue {lam!r} has no reciprocal partner near {partner_val!r}"
                )
            p = candidates[0]
            used[p] = True
            c = 2.0 * lam
            beta = (c - 1.0) / (c + 1.0)
            cs.append(c)
            betas.append(beta)
            gammas.append(taus[j] ** 2 * (1.0 - beta))
            deltas.append(taus[p] ** 2 * (1.0 + beta))
        elif lam >= 0.5 - PAIRING_TOL:
            used[j] = True
            poisson += 0.5 * taus[j] ** 2
        else:
            raise SpectralPairingError(
                f"eigenvalue {lam!r} below 1/2 was not claimed by any pair"
            )
    return PureFactorization(
        k=len(cs),
        cs=np.asarray(cs),
        betas=np.asarray(betas),
        gammas=np.asarray(gammas),
        deltas=np.asarray(deltas),
        poisson_mean=poisson,
    )


def pmf(rho: GaussianState, kmax: int) -> np.ndarray:
    """Counting probabilities P(N = 0..kmax) by circle sampling of the pgf.

    Samples the analytic continuation of the pgf on |z| = r with
    M = 8 (kmax+1) points and inverts the discrete Fourier transform.
    The radius stays below the pole midpoint (1 + 1/max|a_j|)/2 and never
    below 0.9; for deep extractions it grows toward 1 so the 1/r^k
    unfolding amplifies roundoff by at most ~1e4 at k = kmax.  M is even,
    which keeps the parity of even-support states exact.
    """
    if kmax < 0:
        raise ValueError(f"kmax must be nonnegative, got {kmax}")
    data = spectral_data(rho)
    max_alpha = float(np.max(np.abs(data.alphas))) if data.alphas.size else 0.0
    radius = max(0.9, 10.0 ** (-4.0 / (kmax + 1)))
    if max_alpha > 0.0:
        radius = min(radius, 0.5 * (1.0 + 1.0 / max_alpha))
    m_samples = 8 * (kmax + 1)
    nodes = radius * np.exp(2j * np.pi * np.arange(m_samples) / m_samples)
    values = np.array([_pgf_value(data, z) for z in nodes])
    coeffs = np.fft.fft(values) / m_samples  # fft sign matches 1/M sum G w^{-mk}
    probs = np.real(coeffs[: kmax + 1]) / radius ** np.arange(kmax + 1)
    if np.min(probs) < -1e-9:
        raise ArithmeticError(
            f"pmf extraction produced entry {np.min(probs):.3e} below -1e-9"
        )
    return np.clip(probs, 0.0, None)


@dataclass(frozen=True)
class DivisibilityReport:
    """Finite-order compound-Poisson diagnostics of the counting law."""

    divisible_up_to_order: bool
    levy_coeffs: np.ndarray


def infinite_divisibility_check(rho: GaussianState, order: int) -> DivisibilityReport:
    """Taylor coefficients of log G about 0, orders 1..order.

    Factor-wise expansion in closed form: the square-root factor of
    direction j contributes a_j^k / (2k) at order k, the exponential
    factor contributes tau_j^2 (1-a_j)^2 a_j^{k-1} / 2.  A law on the
    nonnegative integers is infinitely divisible iff all of these are
    nonnegative, so the check is exact at every finite order.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    data = spectral_data(rho)
    a = data.alphas
    t2 = data.taus**2
    ks = np.arange(1, order + 1)
    powers = a[:, None] ** ks[None, :]            # a_j^k
    lower = a[:, None] ** (ks[None, :] - 1)       # a_j^{k-1}
    coeffs = np.sum(powers / (2.0 * ks[None, :]), axis=0)
    coeffs = coeffs + 0.5 * np.sum(t2[:, None] * (1.0 - a[:, None]) ** 2 * lower, axis=0)
    return DivisibilityReport(
        divisible_up_to_order=bool(np.all(coeffs >= DIVISIBILITY_TOL)),
        levy_coeffs=coeffs,
    )

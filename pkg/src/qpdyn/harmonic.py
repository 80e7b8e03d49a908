"""Harmonic least squares for the periodic part and eigenbasis projection
of the chaotic residual.

The complex design matrix F has columns (2 - delta_{j,1}) exp(i w_j t_n);
the fit Re(F A) = Y is solved through the equivalent real design with one
constant column plus a cosine/sine pair per nonzero frequency.  The stored
coefficient matrix folds the (2 - delta) factor in, so the periodic
function is plainly g(t) = Re sum_j A[j] exp(i w_j t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernel import KernelBasis
from .spectral import FrequencySet

_RANK_RCOND = 1e-10


class HarmonicError(ValueError):
    pass


@dataclass
class HarmonicModel:
    """Complex m x k coefficient matrix over a frequency set.

    Row j multiplies exp(i omega_j t); row 1 (frequency 0) is real.
    ``residual_norm`` is the per-channel RMS of the fit residual.
    """

    A: np.ndarray
    freqs: FrequencySet
    residual_norm: np.ndarray

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]


@dataclass
class ChaoticCoefficients:
    """Eigenbasis coefficients of the nonperiodic residual (L x k)."""

    E: np.ndarray

    @property
    def L(self) -> int:
        return self.E.shape[0]

    @property
    def k(self) -> int:
        return self.E.shape[1]


def build_fourier_matrix(freqs: FrequencySet, times: np.ndarray) -> np.ndarray:
    """Complex design matrix F[n, j] = (2 - delta_{j,1}) exp(i omega_j t_n).

    ``times`` are physical timestamps (typically n*dt); the frequencies are
    already per unit time, so the product omega*t is a plain phase.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise HarmonicError("times must be a 1-D vector")
    if np.any(np.diff(times) <= 0):
        raise HarmonicError("times must be strictly increasing")
    factors = np.full(freqs.m, 2.0)
    factors[0] = 1.0
    return factors[None, :] * np.exp(1j * np.outer(times, freqs.omegas))


def _real_design(F: np.ndarray) -> tuple[np.ndarray, list]:
    """Expand the complex design into constant/cosine/sine columns.

    A sine column that vanishes on every sample (the folding frequency,
    where exp(i w t) is real throughout) carries no information and is
    dropped; the column map records what was kept.
    """
    n, m = F.shape
    cols = [np.real(F[:, 0])]
    colmap = [(0, "const")]
    for j in range(1, m):
        cols.append(np.real(F[:, j]))
        colmap.append((j, "cos"))
        sine = -np.imag(F[:, j])
        if np.linalg.norm(sine) > 1e-9 * np.sqrt(n):
            cols.append(sine)
            colmap.append((j, "sin"))
    return np.column_stack(cols), colmap


def fit_periodic(Y: np.ndarray, F: np.ndarray, freqs: FrequencySet) -> HarmonicModel:
    """Least-squares fit of Re(F A) to Y, one solve per channel batchwise.

    Uses QR-based least squares; a rank-deficient design raises
    :class:`HarmonicError` naming the closest frequency pair.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] != F.shape[0]:
        raise HarmonicError(
            f"{Y.shape[0]} target rows for {F.shape[0]} design rows"
        )
    m = F.shape[1]
    if Y.shape[0] < 2 * m - 1:
        raise HarmonicError(
            f"need at least 2m-1={2 * m - 1} samples to fit {m} frequencies"
        )
    design, colmap = _real_design(F)
    coef, _, rank, _ = scipy.linalg.lstsq(
        design, Y, cond=_RANK_RCOND, lapack_driver="gelsy"
    )
    if rank < len(colmap):
        gaps = np.diff(freqs.omegas)
        j = int(np.argmin(gaps)) if gaps.size else 0
        raise HarmonicError(
            "rank-deficient harmonic design (duplicate or near-duplicate "
            f"frequencies {freqs.omegas[j]:.6g} and {freqs.omegas[j + 1]:.6g})"
        )
    # fold the real solution back into complex rows, with the factor
    # (2 - delta) absorbed so that g(t) = Re sum A exp(i w t) directly
    A = np.zeros((m, Y.shape[1]), dtype=complex)
    for c, (j, kind) in enumerate(colmap):
        if kind == "const":
            A[j] += coef[c]
        elif kind == "cos":
            A[j] += 2.0 * coef[c]
        else:
            A[j] += 2.0j * coef[c]
    residual = Y - design @ coef
    residual_norm = np.sqrt(np.mean(residual**2, axis=0))
    return HarmonicModel(A=A, freqs=freqs, residual_norm=residual_norm)


def eval_gper(harmonic: HarmonicModel, t) -> np.ndarray:
    """Periodic component at time(s) t: Re sum_j A[j] exp(i omega_j t).

    Scalar t gives a length-k vector; a vector of times gives (len(t), k).
    """
    t_arr = np.asarray(t, dtype=float)
    phases = np.exp(1j * np.outer(np.atleast_1d(t_arr), harmonic.freqs.omegas))
    out = np.real(phases @ harmonic.A)
    return out[0] if t_arr.ndim == 0 else out


def gper_samples(harmonic: HarmonicModel, times: np.ndarray) -> np.ndarray:
    """Periodic component sampled on a time grid, shape (n, k)."""
    return np.atleast_2d(eval_gper(harmonic, np.asarray(times, dtype=float)))


def chaotic_coefficients(
    Y: np.ndarray,
    harmonic: HarmonicModel,
    basis: KernelBasis,
    F: np.ndarray,
) -> tuple[ChaoticCoefficients, np.ndarray]:
    """Project the nonperiodic residual onto the eigenbasis.

    Y_non = Y - Re(F Ahat) with Ahat the solve-form coefficients (the
    stored A has the column factors folded in, so they are divided out
    here); E[l] = (1/n) phi_l . Y_non, the orthogonal projection under the
    empirical inner product.  When Y has fewer rows than the basis
    (one-step-ahead pairing drops the last state), the leading rows of phi
    are used.  Returns (coefficients, Y_non).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = Y.shape[0]
    if n > basis.n:
        raise HarmonicError(f"{n} residual rows exceed basis size {basis.n}")
    if F.shape[0] != n:
        raise HarmonicError(f"{n} target rows for {F.shape[0]} design rows")
    factors = np.full(harmonic.m, 2.0)
    factors[0] = 1.0
    y_non = Y - np.real(F @ (harmonic.A / factors[:, None]))
    phi = basis.phis[:n]
    E = (phi.T @ y_non) / n
    return ChaoticCoefficients(E=E), y_non

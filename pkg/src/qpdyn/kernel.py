"""Gaussian kernel matrix, bistochastic normalization, truncated singular basis.

The basis is computed from the asymmetric normalized kernel by SVD: with
ktilde the normalized matrix, the operator psi -> (1/N') ktilde psi (all
inner products carry the empirical 1/N' weight) has singular values
sigma_1 = 1 >= sigma_2 >= ..., left vectors phi_l and right vectors
gamma_l.  The reported eigenvalues are lambda_l = sigma_l^2, which are the
eigenvalues of the symmetric product operator without ever materializing
it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.spatial.distance import cdist

from .ingest import EmbeddedSeries

# columns with lambda below LAMBDA_FLOOR * lambda_1 are dropped: they get
# divided by later (Nystrom weights) and carry no reliable information
LAMBDA_FLOOR = 1e-10

_SIGN_EPS = 1e-12
_DENSE_SVD_MAX = 1500  # full LAPACK SVD below this size, Lanczos above


class KernelError(ValueError):
    """Raised for degenerate kernel input."""


@dataclass
class KernelMatrix:
    """Symmetric Gaussian affinity matrix with unit diagonal.

    ``entries`` is dense ndarray or CSR; in sparse storage every kept entry
    is >= ``prune_threshold``.  ``Q`` records the delay count of the states
    the matrix was built from.
    """

    entries: Union[np.ndarray, scipy.sparse.csr_matrix]
    epsilon: float
    prune_threshold: float = 0.0
    Q: int = 0

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def is_sparse(self) -> bool:
        return scipy.sparse.issparse(self.entries)

    def dense(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else self.entries


@dataclass
class NormalizedKernel:
    """Bistochastic normalization of a kernel matrix.

    d_i = (1/N') sum_j K_ij        (right degrees)
    q_j = (1/N') sum_i K_ij / d_i  (left degrees, mean(q) = 1)
    ktilde_ij = K_ij / (d_i sqrt(q_j))
    """

    d: np.ndarray
    q: np.ndarray
    ktilde: Union[np.ndarray, scipy.sparse.csr_matrix]
    epsilon: float = 0.0
    Q: int = 0

    @property
    def n(self) -> int:
        return self.ktilde.shape[0]

    @property
    def is_sparse(self) -> bool:
        return scipy.sparse.issparse(self.ktilde)


@dataclass
class KernelBasis:
    """Truncated singular basis of the normalized kernel operator.

    Columns of ``phis``/``gammas`` are orthonormal under the empirical
    inner product <u, v> = (1/N') sum u_n v_n.  lambda_1 = 1, phi_1 is
    constant and gamma_1 = sqrt(q).
    """

    lambdas: np.ndarray
    phis: np.ndarray
    gammas: np.ndarray
    d: np.ndarray
    q: np.ndarray
    epsilon: float
    Q: int

    @property
    def n(self) -> int:
        return self.phis.shape[0]

    @property
    def L(self) -> int:
        return self.phis.shape[1]

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(self.lambdas)


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of a and rows of b."""
    return cdist(np.atleast_2d(a), np.atleast_2d(b), "sqeuclidean")


def median_squared_distance(states: np.ndarray, max_points: int = 2000) -> float:
    """Median pairwise squared distance, subsampled for large sets.

    Useful as a data-driven bandwidth scale when no explicit epsilon is
    given.  Deterministic: subsampling uses an even stride, not RNG.
    """
    states = np.atleast_2d(states)
    n = states.shape[0]
    if n > max_points:
        idx = np.linspace(0, n - 1, max_points).astype(int)
        states = states[idx]
    d2 = pairwise_sq_dists(states, states)
    off = d2[np.triu_indices_from(d2, k=1)]
    med = float(np.median(off))
    if med <= 0:
        raise KernelError("all states identical: cannot pick a bandwidth")
    return med


def gaussian_kernel_matrix(
    emb: EmbeddedSeries,
    epsilon: float,
    tau: float = 0.0,
    storage: str = "dense",
    block: int = 1024,
) -> KernelMatrix:
    """Gaussian affinities exp(-||x_i - x_j||^2 / epsilon) between states.

    ``storage="sparse"`` assembles a CSR matrix block by block, dropping
    entries below ``tau``; dense storage keeps everything and records tau
    only.  The diagonal is always 1.
    """
    if not epsilon > 0:
        raise KernelError(f"epsilon must be positive, got {epsilon}")
    if not 0 <= tau < 1:
        raise KernelError(f"prune threshold must lie in [0, 1), got {tau}")
    x = emb.states
    if not np.all(np.isfinite(x)):
        raise KernelError("non-finite state coordinates")
    n = x.shape[0]
    if storage == "dense":
        k = np.exp(-pairwise_sq_dists(x, x) / epsilon)
        np.fill_diagonal(k, 1.0)
        return KernelMatrix(entries=k, epsilon=epsilon, prune_threshold=tau, Q=emb.Q)
    if storage != "sparse":
        raise KernelError(f"unknown storage {storage!r}")
    parts = []
    for start in range(0, n, block):
        rows = np.exp(-pairwise_sq_dists(x[start : start + block], x) / epsilon)
        d = np.arange(start, min(start + block, n))
        rows[d - start, d] = 1.0
        rows[rows < tau] = 0.0
        parts.append(scipy.sparse.csr_matrix(rows))
    entries = scipy.sparse.vstack(parts, format="csr")
    entries.eliminate_zeros()
    return KernelMatrix(entries=entries, epsilon=epsilon, prune_threshold=tau, Q=emb.Q)


def bistochastic_normalize(km: KernelMatrix) -> NormalizedKernel:
    """Compute degree vectors and the degree-normalized kernel.

    Raises :class:`KernelError` naming the first empty row if pruning
    isolated a state; the caller should raise epsilon or lower tau.
    """
    k = km.entries
    n = km.n
    ones = np.ones(n)
    if km.is_sparse:
        rowsum = np.asarray(k @ ones).ravel()
    else:
        rowsum = k @ ones
    if np.any(rowsum <= 0):
        row = int(np.argmin(rowsum > 0))
        raise KernelError(
            f"state {row} has zero kernel row sum (isolated under pruning); "
            "increase epsilon or lower the prune threshold"
        )
    d = rowsum / n
    if km.is_sparse:
        q = np.asarray(k.T @ (1.0 / d)).ravel() / n
        inv_d = scipy.sparse.diags(1.0 / d)
        inv_sq = scipy.sparse.diags(1.0 / np.sqrt(q))
        ktilde = (inv_d @ k @ inv_sq).tocsr()
    else:
        q = (k.T @ (1.0 / d)) / n
        ktilde = k / d[:, None] / np.sqrt(q)[None, :]
    return NormalizedKernel(d=d, q=q, ktilde=ktilde, epsilon=km.epsilon, Q=km.Q)


def _fix_signs(phis: np.ndarray, gammas: np.ndarray) -> None:
    """Make the first significant entry of each phi column positive (in place)."""
    for l in range(phis.shape[1]):
        col = phis[:, l]
        sig = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if sig.size and col[sig[0]] < 0:
            phis[:, l] = -col
            gammas[:, l] = -gammas[:, l]


def kernel_eigenbasis(nk: NormalizedKernel, L: int) -> KernelBasis:
    """Top-L singular triples of psi -> (1/N') ktilde psi.

    Euclidean SVD vectors are rescaled by sqrt(N') so the returned columns
    are orthonormal under the empirical inner product.  Requesting more
    triples than the numerical rank truncates with a warning; columns with
    lambda below ``LAMBDA_FLOOR * lambda_1`` are dropped.
    """
    n = nk.n
    if not 1 <= L <= n:
        raise KernelError(f"need 1 <= L <= N'={n}, got L={L}")
    op = nk.ktilde / n
    if not nk.is_sparse and (n <= _DENSE_SVD_MAX or L >= n - 1):
        u, s, vt = scipy.linalg.svd(np.asarray(op), full_matrices=False)
        u, s, vt = u[:, :L], s[:L], vt[:L]
    else:
        # Lanczos with a fixed start vector keeps runs bit-reproducible
        v0 = np.full(n, 1.0 / np.sqrt(n))
        k_req = min(L, n - 1)
        if k_req < L:
            warnings.warn(
                f"L={L} reduced to {k_req}: iterative SVD needs L < N'",
                RuntimeWarning,
            )
        u, s, vt = scipy.sparse.linalg.svds(op, k=k_req, v0=v0, which="LM")
        order = np.argsort(s)[::-1]
        u, s, vt = u[:, order], s[order], vt[order]
    lambdas = s**2
    keep = lambdas >= LAMBDA_FLOOR * lambdas[0]
    if not np.all(keep):
        warnings.warn(
            f"requested {len(lambdas)} eigenpairs but numerical rank is "
            f"{int(keep.sum())}; truncating",
            RuntimeWarning,
        )
    lambdas = lambdas[keep]
    # C-contiguity keeps matmul summation order identical across the
    # in-memory and persisted paths (bitwise round-trip contract)
    phis = np.ascontiguousarray(u[:, keep]) * np.sqrt(n)
    gammas = np.ascontiguousarray(vt[keep].T) * np.sqrt(n)
    _fix_signs(phis, gammas)
    return KernelBasis(
        lambdas=lambdas,
        phis=phis,
        gammas=gammas,
        d=nk.d,
        q=nk.q,
        epsilon=nk.epsilon,
        Q=nk.Q,
    )

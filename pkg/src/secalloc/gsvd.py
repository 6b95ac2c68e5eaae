"""Generalized singular value decomposition of the pair (H, Z) and the
substitution chain that turns the matrix secrecy objective into independent
scalar subchannels.

Construction: SVD the stacked matrix [H; Z] to split it into an orthonormal
column block times a full-row-rank factor, then apply the cosine-sine
decomposition to the partitioned orthonormal block.  This produces

    H = U * LambdaH * [Phi* T, 0] * W*
    Z = V * LambdaZ * [Phi* T, 0] * W*

with U, V, Phi, W unitary, T upper triangular and invertible, and diagonal
nonnegative LambdaH, LambdaZ satisfying LambdaH^T LambdaH + LambdaZ^T
LambdaZ = I.  Columns are ordered by descending LambdaH entry, so the
subchannels that can carry positive secrecy come first.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionError, DegenerateInputError, InputError


@dataclass
class GsvdFactors:
    """Factors of the joint decomposition of (H, Z).

    k is the rank of the stacked matrix [H; Z]; r is the number of nonzero
    diagonal entries of LambdaH.  lambda_h is N_D x k, lambda_z is N_E x k,
    both with at most one nonzero per column and per-column squared entries
    summing to one.
    """

    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    lambda_h: np.ndarray = field(repr=False)
    lambda_z: np.ndarray = field(repr=False)
    k: int
    r: int

    @property
    def middle(self) -> np.ndarray:
        """The k x N_S factor [Phi* T, 0] shared by both identities."""
        k = self.k
        n_s = self.W.shape[0]
        out = np.zeros((k, n_s), dtype=np.complex128)
        out[:, :k] = self.Phi.conj().T @ self.T
        return out

    def reconstruct_h(self) -> np.ndarray:
        return self.U @ self.lambda_h @ self.middle @ self.W.conj().T

    def reconstruct_z(self) -> np.ndarray:
        return self.V @ self.lambda_z @ self.middle @ self.W.conj().T

    def diag_pairs(self):
        """Per-column (lambda_h_i, lambda_z_i) values, descending lambda_h."""
        return self.lambda_h.sum(axis=0), self.lambda_z.sum(axis=0)


def _cs_decompose(Q1: np.ndarray, Q2: np.ndarray):
    """Cosine-sine decomposition of a tall block [Q1; Q2] with orthonormal
    columns: Q1 = U C Y*, Q2 = V S Y* with C, S diagonal nonnegative and
    C^T C + S^T S = I, cosines descending.

    Returns (U, V, Y, cvals, svals, s_rows) where s_rows[i] is the row of
    the sine entry for column i (-1 when the sine is zero).  Cosine entries
    sit on the main diagonal.
    """
    n_d, k = Q1.shape
    n_e = Q2.shape[0]

    U, cv, Yh = np.linalg.svd(Q1, full_matrices=True)
    cvals = np.zeros(k)
    cvals[: cv.shape[0]] = np.clip(cv, 0.0, 1.0)
    Y = Yh.conj().T

    # Columns of Q2 Y are orthogonal with norms sqrt(1 - c_i^2), ascending.
    # QR in reversed column order keeps the orthonormalization away from the
    # numerically zero columns; the R factor is diagonal up to round-off.
    E = Q2 @ Y
    Vfull, Rrev = np.linalg.qr(E[:, ::-1], mode="complete")
    d = np.diag(Rrev)

    svals = np.zeros(k)
    s_rows = np.full(k, -1, dtype=int)
    placed = {}
    anchor = max(0, k - n_e)
    for i in range(k):
        j = k - 1 - i
        if j >= min(n_e, k):
            continue
        mag = abs(d[j])
        if mag <= 1e-13:
            continue
        slot = i - anchor
        if slot < 0:
            raise DecompositionError("sine placement underflow")
        svals[i] = mag
        s_rows[i] = slot
        placed[slot] = j
        Vfull[:, j] = Vfull[:, j] * (d[j] / mag)

    perm = np.full(n_e, -1, dtype=int)
    used = set(placed.values())
    if len(used) != len(placed):
        raise DecompositionError("sine support rows collide")
    leftovers = iter(j for j in range(n_e) if j not in used)
    for slot in range(n_e):
        perm[slot] = placed.get(slot, -1)
        if perm[slot] < 0:
            perm[slot] = next(leftovers)
    V = Vfull[:, perm]
    return U, V, Y, cvals, svals, s_rows


def gsvd_decompose(H: np.ndarray, Z: np.ndarray, rank_tol=None) -> GsvdFactors:
    """Joint decomposition of H (N_D x N_S) and Z (N_E x N_S).

    rank_tol is the absolute singular-value threshold used to determine the
    rank k of the stacked matrix; it defaults to 1e-10 times the largest
    stacked singular value, which keeps the behavior scale-free.  r counts
    the LambdaH entries exceeding the same relative threshold.

    Raises DegenerateInputError when both matrices are numerically zero.
    """
    H = np.asarray(H, dtype=np.complex128)
    Z = np.asarray(Z, dtype=np.complex128)
    if H.ndim != 2 or Z.ndim != 2:
        raise InputError("H and Z must be 2-D matrices")
    if H.shape[1] != Z.shape[1]:
        raise InputError(
            f"H and Z must have the same column count, got {H.shape[1]} and {Z.shape[1]}"
        )
    n_d, n_s = H.shape
    n_e = Z.shape[0]
    if n_s < 1 or n_d < 1 or n_e < 1:
        raise InputError("empty matrix dimension")

    stacked = np.vstack([H, Z])
    ys, sv, xh = np.linalg.svd(stacked, full_matrices=False)
    smax = sv[0] if sv.size else 0.0
    if smax <= 0.0:
        raise DegenerateInputError("both H and Z are numerically zero")
    if rank_tol is None:
        rank_tol = 1e-10 * smax
    rank_tol = float(rank_tol)
    if not rank_tol > 0:
        raise InputError(f"rank_tol must be positive, got {rank_tol}")
    k = int(np.sum(sv > rank_tol))
    if k == 0:
        raise DegenerateInputError(
            f"stacked matrix has no singular value above rank_tol={rank_tol:.3e}"
        )

    G = sv[:k, None] * xh[:k, :]  # k x N_S, full row rank
    U, V, Y, cvals, svals, _ = _cs_decompose(ys[:n_d, :k], ys[n_d:, :k])

    lambda_h = np.zeros((n_d, k))
    for i in range(min(n_d, k)):
        lambda_h[i, i] = cvals[i]
    lambda_z = np.zeros((n_e, k))
    anchor = max(0, k - n_e)
    for i in range(k):
        if svals[i] > 0.0:
            lambda_z[i - anchor, i] = svals[i]

    # Split Y* G into [M, 0] W* with M invertible, via QR of its adjoint;
    # then M = Phi* T with Phi unitary and T upper triangular.
    B = Y.conj().T @ G  # k x N_S
    W, Rb = np.linalg.qr(B.conj().T, mode="complete")
    M = Rb[:k, :k].conj().T
    Qm, T = np.linalg.qr(M)
    Phi = Qm.conj().T

    r = int(np.sum(cvals > rank_tol / smax))
    return GsvdFactors(
        U=U, V=V, Phi=Phi, T=T, W=W, lambda_h=lambda_h, lambda_z=lambda_z, k=k, r=r
    )


@dataclass
class SubchannelSet:
    """The l scalar wiretap subchannels carrying positive secrecy.

    Per subchannel: a_i and b_i are the squared destination and eavesdropper
    gains over N0, and c_i is the squared norm of column i of (Phi* T)^-1,
    so that trace(Q) = sum_i c_i q_i for any diagonal subchannel allocation.
    W and (Phi* T)^-1 are retained for reassembling the full covariance.
    """

    l: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    W: np.ndarray = field(repr=False)
    phi_t_inv: np.ndarray = field(repr=False)
    k: int = 0
    r: int = 0
    n0: float = 1.0

    @property
    def n_s(self):
        return self.W.shape[0]


def extract_subchannels(f: GsvdFactors, n0: float) -> SubchannelSet:
    """Keep the subchannels with lambda_h > lambda_z (relative margin 1e-12)
    and compute their (a_i, b_i, c_i) coefficients.

    Equal gains are treated as non-positive-rate and discarded.  The output
    is ordered by descending a_i / b_i (inherited from the factor ordering).
    """
    n0 = float(n0)
    if not np.isfinite(n0) or n0 <= 0:
        raise InputError(f"N0 must be positive, got {n0}")
    tdiag = np.abs(np.diag(f.T))
    if f.k > 0 and (not np.all(np.isfinite(tdiag)) or tdiag.min() == 0.0):
        raise DecompositionError("middle factor T is singular")

    lh, lz = f.diag_pairs()
    keep = lh > lz * (1.0 + 1e-12)
    l = int(np.sum(keep))
    if not np.all(keep[:l]):
        raise DecompositionError("subchannel ordering violated: kept set is not a prefix")

    M = f.Phi.conj().T @ f.T
    phi_t_inv = np.linalg.inv(M)
    a = lh[:l] ** 2 / n0
    b = lz[:l] ** 2 / n0
    c = np.sum(np.abs(phi_t_inv[:, :l]) ** 2, axis=0)
    return SubchannelSet(
        l=l, a=a, b=b, c=c, W=f.W, phi_t_inv=phi_t_inv, k=f.k, r=f.r, n0=n0
    )


def reassemble_covariance(s: SubchannelSet, q, n_s: int) -> np.ndarray:
    """Rebuild the full N_S x N_S transmit covariance from subchannel powers.

    Embeds diag(q) through the inverse substitution chain and conjugates by
    W.  trace of the result equals sum_i c_i q_i up to round-off.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != s.l:
        raise InputError(f"q must have length l={s.l}, got shape {q.shape}")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise InputError("q entries must be finite and nonnegative")
    if int(n_s) != s.n_s:
        raise InputError(f"N_S={n_s} does not match the decomposition ({s.n_s})")

    cols = s.phi_t_inv[:, : s.l]
    Q2 = (cols * q) @ cols.conj().T
    Q1 = np.zeros((s.n_s, s.n_s), dtype=np.complex128)
    Q1[: s.k, : s.k] = Q2
    Q = s.W @ Q1 @ s.W.conj().T
    return 0.5 * (Q + Q.conj().T)


def reconstruction_report(f: GsvdFactors, H: np.ndarray, Z: np.ndarray) -> dict:
    """Relative Frobenius residuals of both factorization identities plus
    the diagonal normalization defect.  Used by tests and the gsvd-check
    CLI command."""
    H = np.asarray(H, dtype=np.complex128)
    Z = np.asarray(Z, dtype=np.complex128)
    scale = max(np.linalg.norm(np.vstack([H, Z])), 1e-300)
    res_h = np.linalg.norm(f.reconstruct_h() - H) / scale
    res_z = np.linalg.norm(f.reconstruct_z() - Z) / scale
    norm_defect = np.abs(
        f.lambda_h.T @ f.lambda_h + f.lambda_z.T @ f.lambda_z - np.eye(f.k)
    ).max()
    unitary_defect = max(
        np.abs(M.conj().T @ M - np.eye(M.shape[1])).max()
        for M in (f.U, f.V, f.Phi, f.W)
    )
    return {
        "res_h": float(res_h),
        "res_z": float(res_z),
        "norm_defect": float(norm_defect),
        "unitary_defect": float(unitary_defect),
        "k": f.k,
        "r": f.r,
    }

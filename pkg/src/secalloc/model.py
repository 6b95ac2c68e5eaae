"""Channel model, deterministic eavesdropper surrogate, and rate evaluation.

The transmitter knows the destination channel matrix H exactly but only the
per-entry variance of each eavesdropper channel.  Moving the expectation of
the eavesdropper log-det rate inside the determinant (valid by concavity of
log det) yields a deterministic upper bound on every eavesdropper's rate;
the binding bound belongs to the eavesdropper maximizing N_E * sigma2, and
that one collapses to a scaled identity matrix Z.  Everything downstream of
this module works on the deterministic pair (H, Z).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

LOG2E = float(np.log2(np.e))

#: Name of the counter-based bit generator used for every Monte-Carlo draw.
#: Philox is counter-based, so results are reproducible bit-for-bit for a
#: given seed regardless of how draws are chunked.
RNG_NAME = "philox"


def make_rng(seed):
    """Seedable counter-based generator used for all Monte-Carlo sampling."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class Eavesdropper:
    """Statistical description of one eavesdropper: antenna count and
    per-entry channel variance."""

    n_antennas: int
    sigma2: float

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise InputError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        self.n_antennas = int(self.n_antennas)
        self.sigma2 = float(self.sigma2)
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise InputError(f"sigma2 must be positive and finite, got {self.sigma2}")


@dataclass
class ChannelInstance:
    """Problem input: destination channel, eavesdropper statistics, noise
    power and total transmit power budget."""

    H: np.ndarray
    eavesdroppers: list
    n0: float
    p0: float

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=np.complex128)
        if self.H.ndim != 2 or self.H.shape[0] < 1 or self.H.shape[1] < 1:
            raise InputError(f"H must be a 2-D matrix, got shape {self.H.shape}")
        if not np.all(np.isfinite(self.H.view(np.float64))):
            raise InputError("H contains non-finite entries")
        if len(self.eavesdroppers) < 1:
            raise InputError("at least one eavesdropper is required")
        self.eavesdroppers = [
            e if isinstance(e, Eavesdropper) else Eavesdropper(*e) for e in self.eavesdroppers
        ]
        self.n0 = float(self.n0)
        self.p0 = float(self.p0)
        if not np.isfinite(self.n0) or self.n0 <= 0:
            raise InputError(f"N0 must be positive, got {self.n0}")
        if not np.isfinite(self.p0) or self.p0 <= 0:
            raise InputError(f"P0 must be positive, got {self.p0}")

    @property
    def n_d(self):
        return self.H.shape[0]

    @property
    def n_s(self):
        return self.H.shape[1]


@dataclass
class EquivalentEavesdropper:
    """The single deterministic eavesdropper that dominates the bound.

    gain2 equals N_E * sigma2 of the dominating eavesdropper and Z is
    sqrt(gain2) times the N_S x N_S identity.
    """

    j0: int
    gain2: float
    Z: np.ndarray = field(repr=False)


def worst_eavesdropper(inst: ChannelInstance) -> EquivalentEavesdropper:
    """Collapse all statistical eavesdroppers into the dominating one.

    Returns the index j0 maximizing N_Ej * sigma2_Ej (ties broken by lowest
    index), the product itself, and the equivalent matrix sqrt(gain2) * I.
    """
    gains = np.array([e.n_antennas * e.sigma2 for e in inst.eavesdroppers])
    j0 = int(np.argmax(gains))
    gain2 = float(gains[j0])
    Z = np.sqrt(gain2) * np.eye(inst.n_s, dtype=np.complex128)
    return EquivalentEavesdropper(j0=j0, gain2=gain2, Z=Z)


def log2det_identity_plus(A: np.ndarray) -> float:
    """log2 det(I + A) for Hermitian PSD A.

    Cholesky of (I + A) is used for stability; if it fails (input PSD only
    to within round-off) the eigenvalues of A are summed instead, with tiny
    negative eigenvalues clipped to zero.
    """
    A = np.asarray(A)
    n = A.shape[0]
    M = np.eye(n) + 0.5 * (A + A.conj().T)
    try:
        L = np.linalg.cholesky(M)
        return float(2.0 * np.sum(np.log2(np.real(np.diag(L)))))
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        return float(np.sum(np.log2(1.0 + np.maximum(w, 0.0))))


def _check_covariance_dims(inst: ChannelInstance, Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.complex128)
    if Q.shape != (inst.n_s, inst.n_s):
        raise InputError(
            f"Q has shape {Q.shape}, expected ({inst.n_s}, {inst.n_s}) to match H"
        )
    return Q


def gaussian_rate_destination(inst: ChannelInstance, Q: np.ndarray) -> float:
    """Destination information rate log2 det(I + H Q H* / N0) in bits per
    channel use."""
    Q = _check_covariance_dims(inst, Q)
    A = inst.H @ Q @ inst.H.conj().T / inst.n0
    return max(log2det_identity_plus(A), 0.0)


def surrogate_secrecy_objective(
    inst: ChannelInstance, eq: EquivalentEavesdropper, Q: np.ndarray
) -> float:
    """Deterministic secrecy objective: destination rate minus the
    worst-case eavesdropper bound log2 det(I + gain2 Q / N0).

    Can be negative for a poorly chosen Q.
    """
    Q = _check_covariance_dims(inst, Q)
    bound = log2det_identity_plus(eq.gain2 * Q / inst.n0)
    return gaussian_rate_destination(inst, Q) - bound


def _psd_factor(Q: np.ndarray) -> np.ndarray:
    """Factor L with Q = L L* for Hermitian PSD Q (eigendecomposition based,
    tolerant of exact singularity)."""
    w, U = np.linalg.eigh(0.5 * (Q + Q.conj().T))
    w = np.maximum(w, 0.0)
    keep = w > 0
    return U[:, keep] * np.sqrt(w[keep])


def jensen_gap_montecarlo(
    inst: ChannelInstance,
    eq: EquivalentEavesdropper,
    Q: np.ndarray,
    n_samples: int,
    seed: int,
):
    """Monte-Carlo estimate of the ergodic eavesdropper rate versus the
    deterministic bound it is replaced with.

    Draws n_samples channel matrices with i.i.d. CN(0, sigma2) entries for
    the dominating eavesdropper, averages log2 det(I + Z Q Z* / N0), and
    returns (mc_mean, mc_stderr, bound) where bound is
    log2 det(I + gain2 Q / N0).  Deterministic for a fixed seed.
    """
    if n_samples < 1000:
        raise InputError(f"n_samples must be >= 1000, got {n_samples}")
    Q = _check_covariance_dims(inst, Q)
    ev = inst.eavesdroppers[eq.j0]
    bound = log2det_identity_plus(eq.gain2 * Q / inst.n0)

    L = _psd_factor(Q / inst.n0)
    if L.shape[1] == 0:  # Q = 0: every sample rate is exactly zero
        return 0.0, 0.0, bound

    rng = make_rng(seed)
    n_e = ev.n_antennas
    scale = np.sqrt(ev.sigma2 / 2.0)
    vals = np.empty(n_samples)
    chunk = max(1, min(n_samples, 1 << 15))
    eye = np.eye(n_e)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        Zs = scale * (
            rng.standard_normal((m, n_e, inst.n_s))
            + 1j * rng.standard_normal((m, n_e, inst.n_s))
        )
        B = Zs @ L
        G = eye + B @ np.conj(np.swapaxes(B, 1, 2))
        sign, logabs = np.linalg.slogdet(G)
        vals[done : done + m] = logabs / np.log(2.0)
        done += m

    mc_mean = float(np.mean(vals))
    mc_stderr = float(np.std(vals, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return mc_mean, mc_stderr, bound


def validate_covariance(Q: np.ndarray, p0=None) -> None:
    """Check the transmit covariance contract: Hermitian to 1e-12 relative,
    PSD to -1e-10 * trace, and trace(Q) <= P0 * (1 + 1e-9) when p0 is given.

    Raises InputError on violation.
    """
    Q = np.asarray(Q, dtype=np.complex128)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InputError(f"covariance must be square, got shape {Q.shape}")
    scale = max(np.abs(Q).max(), 1e-300)
    herm_err = np.abs(Q - Q.conj().T).max() / scale
    if herm_err > 1e-12:
        raise InputError(f"covariance not Hermitian: relative asymmetry {herm_err:.3e}")
    tr = float(np.real(np.trace(Q)))
    wmin = float(np.linalg.eigvalsh(0.5 * (Q + Q.conj().T)).min())
    if wmin < -1e-10 * max(tr, 0.0) - 1e-300:
        raise InputError(f"covariance not PSD: min eigenvalue {wmin:.3e}, trace {tr:.3e}")
    if p0 is not None and tr > p0 * (1.0 + 1e-9):
        raise InputError(f"trace {tr:.12g} exceeds budget {p0:.12g}")

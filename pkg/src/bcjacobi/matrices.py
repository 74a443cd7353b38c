"""Small matrices over R, C and H, singular spectra, samplers and the kernel ``d``.

Quaternionic matrices are stored as a pair of complex matrices ``(A1, A2)``
with ``A = A1 + A2 j``; entrywise ``a + b i + c j + d k = (a + b i) + (c + d i) j``.
All routines are vectorized over leading batch axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeEigenvalue, NonConvergence, RejectionBudgetExceeded, SpectrumOutOfRange
from .roots import FIELD_NAMES

RNG_NAME = "numpy.random.PCG64"
SPECTRUM_SLACK = 1e-10
EIGEN_SLACK = 1e-12


def make_rng(seed_or_rng=None) -> np.random.Generator:
    """Generator from an int seed (PCG64), or pass a Generator through."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(seed_or_rng))


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child streams derived deterministically from ``rng``."""
    return [np.random.Generator(bg) for bg in rng.bit_generator.spawn(n)]


# --- scalars --------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    """``a + b i + c j + d k``."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def __add__(self, other):
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other):
        return Quaternion(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def conj(self):
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def __abs__(self):
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    @property
    def complex_pair(self) -> tuple[complex, complex]:
        return complex(self.a, self.b), complex(self.c, self.d)

    @classmethod
    def from_complex_pair(cls, z1, z2):
        return cls(z1.real, z1.imag, z2.real, z2.imag)


# --- matrices -------------------------------------------------------------


def _conj_t(a):
    return np.conj(np.swapaxes(a, -1, -2))


@dataclass(frozen=True)
class MatrixF:
    """Batch of ``q x q`` matrices over R, C or H.

    ``data`` has shape ``(..., q, q)`` (real or complex) for R and C and
    ``(..., 2, q, q)`` complex for H, holding ``A1`` and ``A2``.
    """

    field: str
    data: np.ndarray

    def __post_init__(self):
        if self.field not in ("R", "C", "H"):
            raise ValueError(f"unknown field {self.field!r}")
        if self.field == "H" and (self.data.ndim < 3 or self.data.shape[-3] != 2):
            raise ValueError("quaternionic data must have shape (..., 2, q, q)")

    @property
    def q(self) -> int:
        return self.data.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.data.shape[:-3] if self.field == "H" else self.data.shape[:-2]

    def __len__(self):
        return self.batch_shape[0]

    def __getitem__(self, idx):
        if not self.batch_shape:
            raise IndexError("unbatched matrix")
        return MatrixF(self.field, self.data[idx])

    @classmethod
    def identity(cls, q: int, field: str) -> "MatrixF":
        return cls.from_complex(np.eye(q), field)

    @classmethod
    def from_complex(cls, a, field: str) -> "MatrixF":
        """Embed a real/complex array; for H it becomes ``A1`` with ``A2 = 0``."""
        a = np.asarray(a)
        if field == "R":
            return cls("R", np.real(a).astype(float))
        if field == "C":
            return cls("C", a.astype(complex))
        return cls("H", np.stack([a.astype(complex), np.zeros_like(a, dtype=complex)], axis=-3))

    @classmethod
    def from_quaternions(cls, rows) -> "MatrixF":
        """Build an H-matrix from nested lists of :class:`Quaternion`."""
        a1 = np.array([[e.complex_pair[0] for e in row] for row in rows])
        a2 = np.array([[e.complex_pair[1] for e in row] for row in rows])
        return cls("H", np.stack([a1, a2]))

    def to_quaternions(self):
        if self.field != "H" or self.batch_shape:
            raise ValueError("single quaternionic matrix required")
        a1, a2 = self.data
        return [[Quaternion.from_complex_pair(a1[i, k], a2[i, k]) for k in range(self.q)] for i in range(self.q)]

    def adjoint(self) -> "MatrixF":
        if self.field == "H":
            a1, a2 = self.data[..., 0, :, :], self.data[..., 1, :, :]
            return MatrixF("H", np.stack([_conj_t(a1), -np.swapaxes(a2, -1, -2)], axis=-3))
        return MatrixF(self.field, _conj_t(self.data))

    def __matmul__(self, other: "MatrixF") -> "MatrixF":
        self._same_field(other)
        if self.field == "H":
            a1, a2 = self.data[..., 0, :, :], self.data[..., 1, :, :]
            b1, b2 = other.data[..., 0, :, :], other.data[..., 1, :, :]
            c1 = a1 @ b1 - a2 @ np.conj(b2)
            c2 = a1 @ b2 + a2 @ np.conj(b1)
            return MatrixF("H", np.stack([c1, c2], axis=-3))
        return MatrixF(self.field, self.data @ other.data)

    def __add__(self, other):
        self._same_field(other)
        return MatrixF(self.field, self.data + other.data)

    def __sub__(self, other):
        self._same_field(other)
        return MatrixF(self.field, self.data - other.data)

    def __neg__(self):
        return MatrixF(self.field, -self.data)

    def scale(self, left=None, right=None) -> "MatrixF":
        """``diag(left) @ A @ diag(right)`` for real vectors (broadcast over batch)."""
        out = self.data
        extra = (None,) if self.field == "H" else ()
        if left is not None:
            left = np.asarray(left, dtype=float)
            out = out * left[(Ellipsis,) + extra + (slice(None), None)]
        if right is not None:
            right = np.asarray(right, dtype=float)
            out = out * right[(Ellipsis,) + extra + (None, slice(None))]
        return MatrixF(self.field, out)

    def as_complex(self) -> np.ndarray:
        """The complex matrix itself for R/C, ``chi(A)`` of size ``2q`` for H."""
        if self.field == "H":
            return chi_embedding(self)
        return self.data

    def _same_field(self, other):
        if self.field != other.field:
            raise ValueError(f"field mismatch: {self.field} vs {other.field}")


def chi_embedding(a: MatrixF) -> np.ndarray:
    """``chi_A = [[A1, A2], [-conj(A2), conj(A1)]]``, a ``2q x 2q`` complex matrix."""
    if a.field != "H":
        raise ValueError("chi_embedding needs a quaternionic matrix")
    a1, a2 = a.data[..., 0, :, :], a.data[..., 1, :, :]
    top = np.concatenate([a1, a2], axis=-1)
    bottom = np.concatenate([-np.conj(a2), np.conj(a1)], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def from_chi(x: np.ndarray) -> MatrixF:
    """Inverse of :func:`chi_embedding` (reads the top block row)."""
    q = x.shape[-1] // 2
    return MatrixF("H", np.stack([x[..., :q, :q], x[..., :q, q:]], axis=-3))


# --- singular values ------------------------------------------------------


def jacobi_singular_values(x, tol: float = 1e-14, max_sweeps: int = 50) -> np.ndarray:
    """Singular values of a batch of square matrices by one-sided Jacobi rotations.

    Columns are rotated pairwise until mutually orthogonal (relative
    off-diagonal of ``X* X`` below ``tol``); the singular values are then the
    column norms.  Returned in nonincreasing order along the last axis.

    Raises
    ------
    NonConvergence
        If ``max_sweeps`` sweeps do not reach ``tol``.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    batch = x.shape[:-2]
    # rows of ``ut`` are the columns being orthogonalized
    ut = np.array(np.swapaxes(x, -1, -2), dtype=complex if np.iscomplexobj(x) else float).reshape((-1, n, n))
    if n > 1:
        for _ in range(max_sweeps):
            worst = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    worst = max(worst, _rotate_pair(ut, i, j, tol))
            if worst <= tol:
                break
        else:
            raise NonConvergence(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    sv = np.sqrt(_sq_norms(ut))
    sv = -np.sort(-sv, axis=-1)
    return sv.reshape(batch + (n,))


def _sq_norms(a):
    if np.iscomplexobj(a):
        return np.einsum("...k,...k->...", a.real, a.real) + np.einsum("...k,...k->...", a.imag, a.imag)
    return np.einsum("...k,...k->...", a, a)


def _rotate_pair(ut, i, j, tol):
    ui, uj = ut[:, i], ut[:, j]
    a = _sq_norms(ui)
    b = _sq_norms(uj)
    c = np.einsum("bk,bk->b", np.conj(ui), uj)
    absc = np.abs(c)
    denom = np.sqrt(a * b)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(denom > 0, absc / denom, 0.0)
    worst = float(rel.max(initial=0.0))
    idx = np.flatnonzero(rel > tol)
    if idx.size == 0:
        return worst
    a, b, c, absc = a[idx], b[idx], c[idx], absc[idx]
    zeta = (b - a) / (2 * absc)
    t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    cs = 1 / np.sqrt(1 + t * t)
    sn = cs * t
    phase = np.conj(c / absc)
    uii = ui[idx]
    ujp = uj[idx] * phase[:, None]
    ut[idx, i] = cs[:, None] * uii - sn[:, None] * ujp
    ut[idx, j] = sn[:, None] * uii + cs[:, None] * ujp
    return worst


def spec_s(a, tol: float = 1e-14, max_sweeps: int = 50) -> np.ndarray:
    """Singular spectrum ``sigma_1 >= ... >= sigma_q >= 0``.

    For quaternionic matrices the spectrum of ``chi_A`` lists every value
    twice; every second entry is kept.
    """
    if isinstance(a, MatrixF):
        if a.field == "H":
            return jacobi_singular_values(chi_embedding(a), tol, max_sweeps)[..., ::2]
        a = a.data
    return jacobi_singular_values(a, tol, max_sweeps)


# --- determinants ---------------------------------------------------------


def log_delta(a: MatrixF) -> np.ndarray:
    """``log Delta(A)`` for Hermitian positive semidefinite ``A`` (``-inf`` when singular).

    ``Delta`` is the ordinary determinant over R and C and
    ``det_C(chi_A)^{1/2}`` over H.

    Raises
    ------
    NegativeEigenvalue
        If an eigenvalue is below ``-1e-12``.
    """
    h = a.as_complex()
    h = (h + _conj_t(h)) / 2
    eig = np.linalg.eigvalsh(h)
    if np.any(eig < -EIGEN_SLACK):
        raise NegativeEigenvalue(f"eigenvalue {eig.min():.3e} of a matrix expected to be PSD")
    eig = np.clip(eig, 0.0, None)
    with np.errstate(divide="ignore"):
        out = np.sum(np.log(eig), axis=-1)
    return out / 2 if a.field == "H" else out


def delta_det(a: MatrixF, exponent: float = 1.0):
    """``Delta(A)^exponent`` for Hermitian positive semidefinite ``A``."""
    ld = log_delta(a)
    if exponent == 0:
        out = np.ones_like(ld)
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(exponent * ld)
    return float(out) if np.ndim(out) == 0 else out


def log_delta_ball(w: MatrixF, sv=None) -> np.ndarray:
    """``log Delta(I - w* w) = sum log(1 - sigma_i^2)`` from the singular values of ``w``."""
    sv = spec_s(w) if sv is None else sv
    with np.errstate(divide="ignore"):
        return np.sum(np.log1p(-sv) + np.log1p(sv), axis=-1)


# --- the kernel d ---------------------------------------------------------


def kernel_matrix(x, y, v: MatrixF, w: MatrixF) -> MatrixF:
    """``-sin(x) w sin(y) + cos(x) v cos(y)`` with diagonal ``sin``/``cos`` factors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return v.scale(np.cos(x), np.cos(y)) - w.scale(np.sin(x), np.sin(y))


def kernel_d(x, y, v: MatrixF, w: MatrixF) -> np.ndarray:
    """``arccos(spec_s(-sin(x) w sin(y) + cos(x) v cos(y)))``, sorted into the alcove.

    ``x`` and ``y`` broadcast against the batch of ``v`` and ``w``.

    Raises
    ------
    SpectrumOutOfRange
        If a singular value exceeds ``1 + 1e-10``.
    """
    sv = spec_s(kernel_matrix(x, y, v, w))
    if np.any(sv > 1 + SPECTRUM_SLACK):
        raise SpectrumOutOfRange(f"singular value {sv.max()!r} exceeds 1")
    # spectrum is nonincreasing and arccos is decreasing
    return np.arccos(np.clip(sv, 0.0, 1.0))[..., ::-1]


# --- samplers -------------------------------------------------------------


def _field_of(profile) -> str:
    return FIELD_NAMES[profile.d]


def _quaternion_gram_schmidt(g1, g2):
    """Orthonormalize the columns of ``G1 + G2 j`` (right H-module, batched)."""
    q = g1.shape[-1]
    q1 = np.array(g1, dtype=complex)
    q2 = np.array(g2, dtype=complex)
    for k in range(q):
        for l in range(k):
            u1, u2 = q1[..., :, l], q2[..., :, l]
            v1, v2 = q1[..., :, k], q2[..., :, k]
            # s = <u, v> = sum conj(u_r) v_r
            s1 = np.sum(np.conj(u1) * v1 + u2 * np.conj(v2), axis=-1)
            s2 = np.sum(np.conj(u1) * v2 - u2 * np.conj(v1), axis=-1)
            # v <- v - u s
            q1[..., :, k] = v1 - (u1 * s1[..., None] - u2 * np.conj(s2)[..., None])
            q2[..., :, k] = v2 - (u1 * s2[..., None] + u2 * np.conj(s1)[..., None])
        nrm = np.sqrt(np.sum(np.abs(q1[..., :, k]) ** 2 + np.abs(q2[..., :, k]) ** 2, axis=-1))
        q1[..., :, k] /= nrm[..., None]
        q2[..., :, k] /= nrm[..., None]
    return q1, q2


def sample_haar_unitary(profile, rng, size: int | None = None) -> MatrixF:
    """Haar-distributed element of ``SO(q)``, ``U(q)`` or ``Sp(q)`` (``d = 1, 2, 4``).

    QR of a Gaussian matrix with the phases of the triangular diagonal moved
    back into ``Q``; over R one column is negated when ``det Q = -1``.
    """
    rng = make_rng(rng)
    q = profile.q
    n = 1 if size is None else size
    field = _field_of(profile)
    if field == "H":
        g = rng.standard_normal((n, 4, q, q))
        q1, q2 = _quaternion_gram_schmidt(g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3])
        out = MatrixF("H", np.stack([q1, q2], axis=1))
    else:
        if field == "R":
            g = rng.standard_normal((n, q, q))
        else:
            g = rng.standard_normal((n, q, q)) + 1j * rng.standard_normal((n, q, q))
        qm, r = np.linalg.qr(g)
        diag = np.diagonal(r, axis1=-2, axis2=-1)
        qm = qm * (diag / np.abs(diag))[:, None, :]
        if field == "R":
            flip = np.linalg.det(qm) < 0
            qm[flip, :, 0] *= -1
        out = MatrixF(field, qm)
    return out if size is not None else out[0]


def _ball_candidates(field: str, q: int, k: int, rng) -> np.ndarray:
    if field == "R":
        return rng.uniform(-1, 1, (k, q, q))
    if field == "C":
        z = rng.uniform(-1, 1, (k, 2, q, q))
        return z[:, 0] + 1j * z[:, 1]
    z = rng.uniform(-1, 1, (k, 4, q, q))
    return np.stack([z[:, 0] + 1j * z[:, 1], z[:, 2] + 1j * z[:, 3]], axis=1)


@dataclass(frozen=True)
class BallSample:
    """Accepted ball points plus the number of cube draws that produced them."""

    w: MatrixF
    n_draws: int
    log_delta: np.ndarray

    @property
    def acceptance_rate(self) -> float:
        return len(self.w) / self.n_draws


def sample_ball(
    profile,
    n: int,
    rng,
    acceptance_floor: float = 1e-4,
    chunk: int = 1 << 18,
) -> BallSample:
    """``n`` uniform samples on ``{w : w* w < I}`` by rejection from the cube ``[-1, 1]^{d q^2}``.

    Raises
    ------
    RejectionBudgetExceeded
        If the observed acceptance rate is below ``acceptance_floor``.
    """
    rng = make_rng(rng)
    field = _field_of(profile)
    q = profile.q
    parts, logs = [], []
    have = draws = 0
    rate = None
    while have < n:
        need = n - have
        k = chunk if rate is None else int(min(chunk, max(256, 1.2 * need / max(rate, 1e-12))))
        cand = _ball_candidates(field, q, k, rng)
        mat = MatrixF(field, cand)
        # a column of norm >= 1 already forces sigma_1 >= 1
        if field == "H":
            colmax = np.max(np.sum(np.abs(cand) ** 2, axis=(-3, -2)), axis=-1)
        else:
            colmax = np.max(np.sum(np.abs(cand) ** 2, axis=-2), axis=-1)
        keep = np.flatnonzero(colmax < 1)
        # cheap LAPACK screen; the Jacobi spectrum below decides
        gram = chi_embedding(mat[keep]) if field == "H" else mat[keep].data
        top = np.linalg.eigvalsh(_conj_t(gram) @ gram)[:, -1]
        keep = keep[top < 1 + 1e-9]
        sv = spec_s(mat[keep])
        inside = sv[:, 0] < 1
        keep, sv = keep[inside], sv[inside]
        if rate is None:
            rate = len(keep) / k
            if rate < acceptance_floor:
                raise RejectionBudgetExceeded(
                    f"acceptance rate {rate:.2e} below floor {acceptance_floor:.2e} for q={q}, field {field}"
                )
        if len(keep) >= need:
            draws += int(keep[need - 1]) + 1
            keep, sv = keep[:need], sv[:need]
        else:
            draws += k
        parts.append(cand[keep])
        logs.append(log_delta_ball(None, sv))
        have += len(keep)
    data = np.concatenate(parts) if parts else _ball_candidates(field, q, 0, rng)
    return BallSample(MatrixF(field, data), draws, np.concatenate(logs) if logs else np.zeros(0))


def sample_ball_uniform(profile, rng, size: int | None = None, acceptance_floor: float = 1e-4) -> MatrixF:
    """Uniform sample(s) on the matrix ball ``B_q`` (Lebesgue measure)."""
    res = sample_ball(profile, 1 if size is None else size, rng, acceptance_floor)
    return res.w if size is not None else res.w[0]


def ball_cube_volume(profile) -> float:
    return 2.0 ** (profile.d * profile.q**2)


def estimate_kappa(profile, n_samples: int, rng) -> tuple[float, float]:
    """Monte Carlo ``kappa_mu = int_{B_q} Delta(I - w* w)^{mu - gamma} dw``.

    Every cube draw contributes ``2^{d q^2} 1_B(w) Delta^{mu - gamma}``; the
    estimate is their mean over all draws, so the ball volume estimate from
    the rejection rate is built in.  Returns ``(estimate, std_error)``.
    """
    res = sample_ball(profile, n_samples, rng)
    s = profile.mu - profile.gamma
    vals = np.exp(s * res.log_delta) if s != 0 else np.ones(len(res.log_delta))
    cube = ball_cube_volume(profile)
    n = res.n_draws
    mean = cube * vals.sum() / n
    second = cube**2 * np.sum(vals**2) / n
    var = max(second - mean**2, 0.0) * n / max(n - 1, 1)
    return float(mean), float(math.sqrt(var / n))

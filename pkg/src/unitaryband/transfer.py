"""Transfer matrices of the eigenvalue equation and coefficient propagation.

A generalized eigenvector ``U psi = exp(i lam) psi`` is determined by two
consecutive coefficients.  Writing ``d(k) = (c_{2k}, c_{2k+1})`` the
equation becomes ``d(k) = T(k) d(k-1)`` with a 2x2 matrix ``T(k)`` of
unit-modulus determinant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import apply_monodromy
from .errors import DegenerateCouplingError, SpanTooShortError
from .models import CouplingPair, PhaseModel, wrap_angle

__all__ = [
    "CoefficientTrack", "EtaPair", "Transfer2", "eta", "etas", "propagate", "residual",
    "transfer_general", "transfer_matrices", "transfer_reduced", "reduced_matrices",
]


@dataclass(frozen=True, eq=False)
class Transfer2:
    """A transfer matrix together with the phase of its determinant."""

    entries: np.ndarray = field(repr=False)
    det_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=complex).reshape(2, 2))
        object.__setattr__(self, "det_phase", wrap_angle(self.det_phase))

    @property
    def det(self) -> complex:
        return complex(np.exp(1j * self.det_phase))

    def det_defect(self) -> float:
        """``|det(entries) - exp(i det_phase)|``."""
        return float(abs(np.linalg.det(self.entries) - self.det))

    def inverse(self) -> "Transfer2":
        """Closed-form inverse using the known determinant."""
        return Transfer2(_inverse_2x2(self.entries, self.det_phase), -self.det_phase)

    def __matmul__(self, other):
        if isinstance(other, Transfer2):
            return Transfer2(self.entries @ other.entries, self.det_phase + other.det_phase)
        return self.entries @ other


@dataclass(frozen=True)
class EtaPair:
    """The two angles ``(eta_{2k}, eta_{2k-1})`` that fix a reduced transfer matrix."""

    eta_even: float
    eta_odd: float

    def __post_init__(self):
        object.__setattr__(self, "eta_even", wrap_angle(float(self.eta_even)))
        object.__setattr__(self, "eta_odd", wrap_angle(float(self.eta_odd)))


def _require_t(t):
    if np.any(np.asarray(t) <= 0.0):
        raise DegenerateCouplingError("transfer matrices need t > 0")


def _inverse_2x2(m, det_phase):
    m = np.asarray(m)
    inv = np.empty_like(m)
    inv[..., 0, 0] = m[..., 1, 1]
    inv[..., 0, 1] = -m[..., 0, 1]
    inv[..., 1, 0] = -m[..., 1, 0]
    inv[..., 1, 1] = m[..., 0, 0]
    return inv * np.exp(-1j * np.asarray(det_phase))[..., None, None]


def etas(sites, lam, model: PhaseModel) -> np.ndarray:
    """Vectorised ``eta_k = theta_k + theta_{k-1} + alpha_k - alpha_{k-1} + lam`` mod 2*pi."""
    k = np.atleast_1d(np.asarray(sites, dtype=np.int64))
    th, al, _ = model.phases(np.concatenate((k, k - 1)))
    n = k.size
    return wrap_angle(th[:n] + th[n:] + al[:n] - al[n:] + lam)


def eta(k: int, lam: float, model: PhaseModel) -> float:
    """``eta_k(lam)`` for a single site."""
    return float(etas([k], lam, model)[0])


def reduced_matrices(eta_even, eta_odd, t) -> np.ndarray:
    """Vectorised reduced transfer matrices ``T(eta_even, eta_odd)``."""
    _require_t(t)
    t = np.asarray(t, float)
    r = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    ee = np.exp(1j * np.asarray(eta_even, float))
    eo = np.exp(-1j * np.asarray(eta_odd, float))
    ee, eo = np.broadcast_arrays(ee, eo)
    q = r / t
    out = np.empty(ee.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -eo
    out[..., 0, 1] = 1j * q * (eo - 1.0)
    out[..., 1, 0] = 1j * q * (ee * eo - eo)
    out[..., 1, 1] = -ee / t ** 2 + q * q * (ee * eo + 1.0 - eo)
    return out


def transfer_reduced(etas_: EtaPair, coupling: CouplingPair) -> Transfer2:
    """Reduced transfer matrix, the form taken in the gauge ``gamma_k = (-1)**(k+1) alpha_k``.

    Its determinant is ``exp(i (eta_even - eta_odd))``.

    Raises
    ------
    DegenerateCouplingError
        If ``t = 0``.
    """
    m = reduced_matrices(etas_.eta_even, etas_.eta_odd, coupling.t)
    return Transfer2(m, etas_.eta_even - etas_.eta_odd)


def _general_stack(ks, lam, model):
    """Full-form transfer matrices and determinant phases for pair indices ``ks``."""
    model.require_constant_coupling()
    t = model.t
    _require_t(t)
    r = np.sqrt(max(0.0, 1.0 - t * t))
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    sites = np.concatenate((2 * ks - 2, 2 * ks - 1, 2 * ks))
    th, al, ga = model.phases(sites)
    n = ks.size
    th2, th1, th0 = th[:n], th[n:2 * n], th[2 * n:]      # sites 2k-2, 2k-1, 2k
    al2, al1, al0 = al[:n], al[n:2 * n], al[2 * n:]
    ga2, ga1, ga0 = ga[:n], ga[n:2 * n], ga[2 * n:]
    q = r / t
    e = np.exp
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = -e(-1j * (lam + ga1 + ga2 + th1 + th2))
    out[:, 0, 1] = 1j * q * (e(-1j * (lam + ga1 - al2 + th1 + th2)) - e(-1j * (ga1 - al1)))
    out[:, 1, 0] = 1j * q * (e(-1j * (th2 - th0 + ga0 + ga1 + ga2 + al1))
                             - e(-1j * (lam + th2 + th1 + ga0 + ga1 + ga2 + al0)))
    out[:, 1, 1] = (-e(1j * (lam + th0 + th1 - ga0 - ga1)) / t ** 2
                    + q * q * e(-1j * (ga0 + ga1)) * (e(1j * (th0 - th2 + al2 - al1))
                                                     + e(-1j * (al0 - al1)))
                    - q * q * e(-1j * (lam + th2 + th1 + ga0 + ga1 + al0 - al2)))
    det_phase = -(th2 - th0 + ga0 + 2.0 * ga1 + ga2)
    return out, det_phase


def transfer_general(k: int, lam: float, model: PhaseModel) -> Transfer2:
    """Transfer matrix ``T(k)`` with the full ``theta, alpha, gamma`` dependence.

    Raises
    ------
    DegenerateCouplingError
        If ``t = 0`` or the model has a site-dependent coupling.
    """
    m, ph = _general_stack([k], lam, model)
    return Transfer2(m[0], ph[0])


def transfer_matrices(ks, lam, model: PhaseModel, form: str = "general"):
    """Stack of transfer matrices for pair indices ``ks``.

    Parameters
    ----------
    ks : array_like of int
    lam : float
    model : PhaseModel
    form : {"general", "reduced"}
        ``"general"`` uses the model's own ``gamma``; ``"reduced"`` uses the
        eta-parametrised form, which equals the general form in the gauge
        ``gamma_k = (-1)**(k+1) alpha_k``.

    Returns
    -------
    mats : ndarray, shape (n, 2, 2)
    det_phase : ndarray, shape (n,)
    """
    if form == "general":
        return _general_stack(ks, lam, model)
    if form != "reduced":
        raise ValueError("form must be 'general' or 'reduced'")
    model.require_constant_coupling()
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if ks.size == 0:
        return np.empty((0, 2, 2), dtype=complex), np.empty(0)
    lo, hi = 2 * int(ks.min()) - 2, 2 * int(ks.max())
    if hi - lo < 8 * ks.size:
        # one pass over the contiguous site range 2*min(k)-2 .. 2*max(k)
        th, al, _ = model.phases(np.arange(lo, hi + 1))
        eta_run = th[1:] + th[:-1] + al[1:] - al[:-1] + lam     # eta at sites lo+1 ...
        ee = eta_run[2 * ks - lo - 1]
        eo = eta_run[2 * ks - 1 - lo - 1]
    else:
        # scattered indices: only sites 2k-2, 2k-1, 2k are needed
        n = ks.size
        th, al, _ = model.phases(np.concatenate((2 * ks - 2, 2 * ks - 1, 2 * ks)))
        ee = th[2 * n:] + th[n:2 * n] + al[2 * n:] - al[n:2 * n] + lam
        eo = th[n:2 * n] + th[:n] + al[n:2 * n] - al[:n] + lam
    return reduced_matrices(ee, eo, model.t), ee - eo


def _condition(mats) -> np.ndarray:
    """Spectral condition numbers of 2x2 matrices with unit-modulus determinant."""
    f2 = np.sum(np.abs(mats) ** 2, axis=(-2, -1))
    return 0.5 * (f2 + np.sqrt(np.maximum(f2 * f2 - 4.0, 0.0)))


@dataclass(frozen=True, eq=False)
class CoefficientTrack:
    """Coefficient pairs ``d(k) = (c_{2k}, c_{2k+1})`` of a generalized eigenvector.

    The true pair is ``pairs[i] * exp(log_scale[i])`` for ``k = ks[i]``; the
    split keeps magnitudes representable over long ranges.

    Attributes
    ----------
    ks : ndarray of int
        Consecutive pair indices.
    pairs : ndarray, shape (n, 2)
    log_scale : ndarray, shape (n,)
    lam : float
    form : str
        Transfer-matrix form used to build the track.
    max_condition : float
        Largest condition number of the transfer matrices used.
    """

    ks: np.ndarray
    pairs: np.ndarray
    log_scale: np.ndarray
    lam: float
    form: str = "general"
    max_condition: float = 1.0

    @property
    def ill_conditioned(self) -> bool:
        return self.max_condition > 1e8

    def log_norms(self) -> np.ndarray:
        """``log |d(k)|`` for every pair."""
        return np.log(np.linalg.norm(self.pairs, axis=1)) + self.log_scale

    def pair(self, k: int) -> np.ndarray:
        i = int(k - self.ks[0])
        return self.pairs[i] * np.exp(self.log_scale[i])

    def sites(self) -> np.ndarray:
        return np.stack((2 * self.ks, 2 * self.ks + 1), axis=1).ravel()

    def rows(self):
        for k, p, s in zip(self.ks, self.pairs, self.log_scale):
            yield int(k), p[0], p[1], float(s)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "re_c2k", "im_c2k", "re_c2k1", "im_c2k1", "log_scale"])
            for k, a, b, s in self.rows():
                w.writerow([k, repr(a.real), repr(a.imag), repr(b.real), repr(b.imag), repr(s)])

    def recurrence_defect(self, model: PhaseModel) -> float:
        """Largest relative deviation from ``d(k) = T(k) d(k-1)`` along the track."""
        mats, _ = transfer_matrices(self.ks[1:], self.lam, model, self.form)
        prev = self.pairs[:-1] * np.exp(self.log_scale[:-1] - self.log_scale[1:])[:, None]
        pred = np.einsum("nij,nj->ni", mats, prev)
        scale = np.maximum(np.linalg.norm(self.pairs[1:], axis=1), np.linalg.norm(prev, axis=1))
        return float(np.max(np.linalg.norm(pred - self.pairs[1:], axis=1) / scale))


def propagate(c0, c1, lam, model: PhaseModel, k_range, *, anchor: int = 0,
              renorm_every: int = 16, form: str = "general") -> CoefficientTrack:
    """Propagate a coefficient pair through the transfer cocycle.

    Parameters
    ----------
    c0, c1 : complex
        The pair ``d(anchor) = (c_{2 anchor}, c_{2 anchor + 1})``.
    lam : float
        Spectral angle; the eigenvalue is ``exp(i lam)``.
    model : PhaseModel
    k_range : (int, int)
        Inclusive range ``(k_lo, k_hi)`` of pair indices; must contain ``anchor``.
    anchor : int
    renorm_every : int
        The running vector is rescaled to unit norm every this many steps
        (and whenever its norm leaves ``[1e-100, 1e100]``); the logarithm of
        the scale is stored alongside.
    form : {"general", "reduced"}

    Returns
    -------
    CoefficientTrack
    """
    if c0 == 0 and c1 == 0:
        raise ValueError("initial pair must be non-zero")
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if not k_lo <= anchor <= k_hi:
        raise ValueError("k_range must contain the anchor")
    n = k_hi - k_lo + 1
    pairs = np.zeros((n, 2), dtype=complex)
    log_scale = np.zeros(n)
    ia = anchor - k_lo
    pairs[ia] = (c0, c1)
    max_cond = 1.0

    def run(mats, idx_seq, start_vec):
        nonlocal max_cond
        v = np.array(start_vec, dtype=complex)
        s = 0.0
        for step, (m, i) in enumerate(zip(mats, idx_seq), start=1):
            v = m @ v
            nv = np.hypot(abs(v[0]), abs(v[1]))
            if step % renorm_every == 0 or not 1e-100 < nv < 1e100:
                v = v / nv
                s += np.log(nv)
            pairs[i] = v
            log_scale[i] = s

    if k_hi > anchor:
        ks = np.arange(anchor + 1, k_hi + 1)
        mats, _ = transfer_matrices(ks, lam, model, form)
        max_cond = max(max_cond, float(np.max(_condition(mats))))
        run(mats, ks - k_lo, pairs[ia])
    if k_lo < anchor:
        # d(k-1) = T(k)^{-1} d(k), walking down from the anchor
        ks = np.arange(anchor, k_lo, -1)
        mats, ph = transfer_matrices(ks, lam, model, form)
        max_cond = max(max_cond, float(np.max(_condition(mats))))
        run(_inverse_2x2(mats, ph), ks - 1 - k_lo, pairs[ia])
    return CoefficientTrack(np.arange(k_lo, k_hi + 1), pairs, log_scale, float(lam), form, max_cond)


def residual(track: CoefficientTrack, model: PhaseModel) -> float:
    """Largest interior residual ``|(U psi - e^{i lam} psi)_n|`` of a track.

    The track is cut into runs sharing one log-scale.  Each run, padded by
    one neighbouring pair on each side rescaled to the run's scale, is fed
    through :func:`apply_monodromy`; trusted rows of the run are compared
    with ``exp(i lam) psi``.  Each row's deviation is divided by the largest
    coefficient modulus that the row reads, so the measure is local and
    insensitive to the overall growth of the track.  Rows at the ends of the
    track are never trusted.

    Raises
    ------
    SpanTooShortError
        If the track has fewer than 4 pairs.
    """
    n = track.ks.size
    if n < 4:
        raise SpanTooShortError("residual needs a track of at least 4 pairs")
    if track.form == "reduced":
        model = model.with_gauge("reduced")
    z = np.exp(1j * track.lam)
    ls = track.log_scale
    cuts = np.flatnonzero(np.diff(ls) != 0) + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [n]))
    worst = 0.0
    for s, e in zip(starts, stops):
        lo, hi = max(s - 1, 0), min(e + 1, n)
        block = track.pairs[lo:hi] * np.exp(ls[lo:hi] - ls[s])[:, None]
        psi = block.ravel()
        res = apply_monodromy(psi, model, start=2 * int(track.ks[lo]))
        own = np.zeros(psi.size, dtype=bool)
        own[2 * (s - lo):2 * (e - lo)] = True
        use = own & res.trusted
        if not np.any(use):
            continue
        dev = np.abs(res.values - z * psi)
        # each row is compared with the largest coefficient it reads
        mag = np.abs(np.concatenate((psi, [0.0, 0.0, 0.0])))
        idx = np.arange(psi.size)
        lo_col = np.where(idx % 2 == 0, idx - 2, idx - 1)
        cols = np.clip(lo_col[:, None] + np.arange(4), 0, None)
        denom = np.max(mag[cols], axis=1)
        worst = max(worst, float(np.max(dev[use] / denom[use])))
    return worst

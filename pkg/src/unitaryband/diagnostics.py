"""Finite-size spectral evidence.

Truncated spectra, eigenvector localization, bulk spectrum comparisons,
minimal solution growth and an empirical check of phase independence.
Everything here is evidence computed on finite windows; none of it decides
a spectral type on its own.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .arcs import TWO_PI, ArcSet, circle_gap, hausdorff_points
from .core import BandWindow, build_windowed_unitary
from .errors import BudgetExceededError, WrongVariantError
from .halfline import halfline_window
from .models import PhaseModel, RandomPhases
from .transfer import _inverse_2x2, transfer_matrices

__all__ = [
    "IndependenceTable", "LocalizationProfile", "SpectralCloud", "edge_mask",
    "empirical_independence", "essential_spectrum_compare", "growth_scan",
    "localization_profile", "multiset_distance", "truncated_spectrum",
]

DENSE_BUDGET = 4096


@dataclass(frozen=True, eq=False)
class SpectralCloud:
    """Eigenvalue angles of a window, sorted in ``[0, 2*pi)``.

    ``vectors[:, j]`` (optional) is the unit eigenvector of ``angles[j]``.
    """

    angles: np.ndarray = field(repr=False)
    vectors: np.ndarray | None = field(default=None, repr=False)
    start: int = 0
    stop: int = 0
    edge: str = "identity"
    model: dict | None = None
    modulus_defect: float = 0.0

    @property
    def size(self) -> int:
        return int(self.angles.size)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "angle"])
            for i, a in enumerate(self.angles):
                w.writerow([i, repr(float(a))])


def _window(model_or_window, sites, offset, halfline):
    if isinstance(model_or_window, BandWindow):
        return model_or_window
    if sites > DENSE_BUDGET:
        raise BudgetExceededError(f"{sites} sites exceed the dense budget of {DENSE_BUDGET}")
    if halfline:
        return halfline_window(model_or_window, sites)
    if sites % 2:
        raise ValueError("full-line windows need an even number of sites")
    return build_windowed_unitary(model_or_window, sites // 2, offset)


def truncated_spectrum(model, sites: int, with_vectors: bool = False, *, offset=None,
                       halfline: bool = False) -> SpectralCloud:
    """Dense eigensolve of a finite window.

    With vectors a complex Schur form is used, so the returned vectors are
    orthonormal even inside clusters of nearly equal eigenvalues.

    Parameters
    ----------
    model : PhaseModel or BandWindow
    sites : int
        Window size, at most 4096.
    with_vectors : bool
        Keep the (orthonormal Schur) eigenvectors.
    offset : int, optional
        First site of a full-line window; defaults to ``-sites // 2`` rounded
        to an even site, which centres the window on the origin.
    halfline : bool
        Use the half-line window on sites ``1 .. sites`` instead.

    Raises
    ------
    BudgetExceededError
        If ``sites > 4096``.
    """
    if offset is None:
        offset = -2 * (sites // 4)
    win = _window(model, int(sites), int(offset), halfline)
    if with_vectors:
        tri, z = schur(win.matrix, output="complex")
        ev = np.diag(tri)
    else:
        ev, z = np.linalg.eigvals(win.matrix), None
    ang = np.mod(np.angle(ev), TWO_PI)
    order = np.argsort(ang, kind="stable")
    meta = model.to_dict() if isinstance(model, PhaseModel) else None
    return SpectralCloud(ang[order], z[:, order] if with_vectors else None, win.start, win.stop,
                         win.edge, meta, float(np.max(np.abs(np.abs(ev) - 1.0))))


def multiset_distance(a, b) -> float:
    """Largest circular gap between two equal-size angle multisets, matched in sorted order.

    Cyclic shifts by one position are tried to absorb the wrap at ``0 = 2*pi``.
    """
    a = np.sort(np.mod(np.asarray(a, float), TWO_PI))
    b = np.sort(np.mod(np.asarray(b, float), TWO_PI))
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    return float(min(np.max(circle_gap(a, np.roll(b, s))) for s in (-2, -1, 0, 1, 2)))


def edge_mask(vectors, fraction: float = 0.05, mass: float = 0.1) -> np.ndarray:
    """True for eigenvectors carrying more than ``mass`` of their weight in the outer ``fraction`` of sites.

    The outer sites are split evenly between the two ends of the window, so
    an evenly spread vector carries ``fraction`` of its weight there.
    """
    w = np.abs(vectors) ** 2
    n = w.shape[0]
    m = max(1, int(math.ceil(fraction * n / 2)))
    outer = w[:m].sum(axis=0) + w[n - m:].sum(axis=0)
    return outer / w.sum(axis=0) > mass


@dataclass(frozen=True, eq=False)
class LocalizationProfile:
    """Per-eigenvector localization statistics.

    Attributes
    ----------
    angles : ndarray
    decay_rate : ndarray
        Least-squares exponential decay rate of ``|psi_n|`` away from its
        peak, per transfer step (two sites).
    participation : ndarray
        ``(sum |psi|^2)^2 / sum |psi|^4``, between 1 and the window size.
    peak : ndarray of int
        Site index (within the window) of the largest component.
    bulk : ndarray of bool
        Eigenvectors kept after edge trimming.
    """

    angles: np.ndarray = field(repr=False)
    decay_rate: np.ndarray = field(repr=False)
    participation: np.ndarray = field(repr=False)
    peak: np.ndarray = field(repr=False)
    bulk: np.ndarray = field(repr=False)
    vectors: np.ndarray | None = field(default=None, repr=False)

    def median_rate(self) -> float:
        return float(np.median(self.decay_rate[self.bulk]))

    def positive_fraction(self) -> float:
        return float(np.mean(self.decay_rate[self.bulk] > 0))

    def median_vector_index(self) -> int:
        """Index of the bulk eigenvector whose decay rate is the median."""
        idx = np.flatnonzero(self.bulk)
        rates = self.decay_rate[idx]
        return int(idx[np.argsort(rates)[len(rates) // 2]])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["angle", "decay_rate", "participation", "peak", "bulk"])
            for row in zip(self.angles, self.decay_rate, self.participation, self.peak, self.bulk):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])),
                            int(row[3]), int(row[4])])


def localization_profile(cloud: SpectralCloud, *, floor: float = 1e-12, trim_fraction=0.05,
                         trim_mass=0.1) -> LocalizationProfile:
    """Decay rates and participation ratios of the eigenvectors of a cloud.

    For each eigenvector the model ``log|psi_n| = c - kappa |n - n_peak|`` is
    fitted by least squares over the sites with ``|psi_n| > floor * max|psi|``
    (smaller entries are rounding noise).  The reported rate is ``2 kappa``,
    i.e. per transfer step, so it is comparable with a Lyapunov exponent.
    """
    if cloud.vectors is None:
        raise ValueError("the cloud carries no eigenvectors; use with_vectors=True")
    v = cloud.vectors
    n = v.shape[0]
    mod = np.abs(v)
    w = mod ** 2
    part = w.sum(axis=0) ** 2 / (w ** 2).sum(axis=0)
    peak = np.argmax(mod, axis=0)
    sites = np.arange(n)
    rates = np.empty(v.shape[1])
    for j in range(v.shape[1]):
        col = mod[:, j]
        keep = col > floor * col[peak[j]]
        d = np.abs(sites[keep] - peak[j]).astype(float)
        y = np.log(col[keep])
        if d.size < 3 or np.ptp(d) == 0:
            rates[j] = 0.0
            continue
        slope = np.polyfit(d, y, 1)[0]
        rates[j] = -2.0 * slope
    bulk = ~edge_mask(v, trim_fraction, trim_mass)
    return LocalizationProfile(cloud.angles, rates, part, peak, bulk, v)


@dataclass(frozen=True)
class CompareResult:
    """Hausdorff distance between the trimmed clouds of two windows."""

    distance: float
    kept_a: int
    kept_b: int


def _trimmed(model, sites, offset, halfline, trim_fraction, trim_mass):
    cloud = truncated_spectrum(model, sites, True, offset=offset, halfline=halfline)
    keep = ~edge_mask(cloud.vectors, trim_fraction, trim_mass)
    return cloud.angles[keep]


def essential_spectrum_compare(model_a, model_b, sites: int, *, offset=None,
                               halfline=(False, False), trim_fraction: float = 0.05,
                               trim_mass: float = 0.1, sites_b=None) -> CompareResult:
    """Compare the bulk spectra of two windows in Hausdorff distance on the circle.

    Eigenpairs whose vectors carry more than ``trim_mass`` of their weight in
    the outer ``trim_fraction`` of sites are discarded first; they are
    artefacts of the cut.

    Parameters
    ----------
    model_a, model_b : PhaseModel or BandWindow
    sites : int
    halfline : (bool, bool)
        Use the half-line window for either model.
    sites_b : int, optional
        Window size for ``model_b`` (defaults to ``sites``).
    """
    a = _trimmed(model_a, sites, offset, halfline[0], trim_fraction, trim_mass)
    b = _trimmed(model_b, sites if sites_b is None else sites_b, offset, halfline[1],
                 trim_fraction, trim_mass)
    return CompareResult(hausdorff_points(a, b), int(a.size), int(b.size))


def _log_product(mats):
    """Product ``mats[-1] @ ... @ mats[0]`` as ``(M, log_scale)`` with ``|M|`` of order one."""
    m = np.eye(2, dtype=complex)
    s = 0.0
    for i, t in enumerate(mats, start=1):
        m = t @ m
        if i % 8 == 0:
            nrm = np.abs(m).max()
            m /= nrm
            s += math.log(nrm)
    nrm = np.abs(m).max()
    return m / nrm, s + math.log(nrm)


def _min_growth(forward, backward):
    """Minimal two-sided growth over the candidate directions, in log units."""
    (ma, sa), (mb, sb) = forward, backward
    sig_a = np.linalg.svd(ma, compute_uv=False)[0]
    sig_b = np.linalg.svd(mb, compute_uv=False)[0]
    floor_a = -(math.log(sig_a) + sa)     # |det| = 1 so sigma_min = 1 / sigma_max
    floor_b = -(math.log(sig_b) + sb)

    def grow(m, s, floor, v):
        return max(math.log(max(np.linalg.norm(m @ v), 1e-300)) + s, floor)

    best = math.inf
    for m in (ma, mb):
        _, _, vh = np.linalg.svd(m)
        top = vh[0].conj()
        perp = np.array([-np.conj(top[1]), np.conj(top[0])])
        g = max(grow(ma, sa, floor_a, perp), grow(mb, sb, floor_b, perp))
        best = min(best, g)
    return best


def growth_scan(lambda_grid, model: PhaseModel, span: int = 1000, *,
                form: str = "reduced") -> np.ndarray:
    """Growth exponent of the slowest-growing solution at each angle.

    For every ``lam`` the forward product over ``span`` transfer steps and
    the backward product over ``span`` inverse steps are formed.  The
    directions least expanded by each product (from their singular vectors)
    are the candidates; the exponent is the smaller of their two-sided
    growth ``max(log|Phi(n) v|, log|Phi(-n) v|) / span``.  Inside a band of
    a periodic model it is close to zero; in a gap it equals
    ``ln|E1| / N``; for random phases it approaches the Lyapunov exponent.

    Returns
    -------
    ndarray
        One exponent per angle, in nats per transfer step.
    """
    grid = np.atleast_1d(np.asarray(lambda_grid, float))
    fwd_k = np.arange(1, span + 1)
    bwd_k = -np.arange(0, span)
    out = np.empty(grid.size)
    for i, lam in enumerate(grid):
        fm, _ = transfer_matrices(fwd_k, lam, model, form)
        bm, bp = transfer_matrices(bwd_k, lam, model, form)
        out[i] = _min_growth(_log_product(fm), _log_product(_inverse_2x2(bm, bp))) / span
    return out


@dataclass(frozen=True, eq=False)
class IndependenceTable:
    """Empirical characteristic functions of the ``eta`` pairs.

    Attributes
    ----------
    samples : int
    harmonics : list of tuple
        Nonzero harmonic vectors tested for the pair ``delta_k`` (length 2)
        and for the double pair ``(delta_k, delta_{k+1})`` (length 4).
    single : dict
        ``harmonic -> (joint, product of marginals)`` for ``delta_k``.
    double : dict
        Same for ``(delta_k, delta_{k+1})`` against the product of the two
        single-pair functions.
    """

    samples: int
    max_harmonic: int
    single: dict = field(repr=False)
    double: dict = field(repr=False)

    @property
    def bound(self) -> float:
        return 4.0 / math.sqrt(self.samples)

    @property
    def factorization_residual(self) -> float:
        vals = [abs(j - p) for j, p in itertools.chain(self.single.values(), self.double.values())]
        return float(max(vals))

    @property
    def uniformity_residual(self) -> float:
        """Largest ``|Phi(n)|`` over nonzero harmonics (zero for uniform phases)."""
        return float(max(abs(j) for j, _ in itertools.chain(self.single.values(),
                                                            self.double.values())))

    @property
    def factorizes(self) -> bool:
        return self.factorization_residual < self.bound

    def to_json(self, path=None) -> str:
        def enc(d):
            return [{"n": list(k), "joint": [v[0].real, v[0].imag],
                     "product": [v[1].real, v[1].imag]} for k, v in d.items()]
        doc = {"samples": self.samples, "max_harmonic": self.max_harmonic,
               "bound": self.bound, "factorization_residual": self.factorization_residual,
               "uniformity_residual": self.uniformity_residual,
               "single": enc(self.single), "double": enc(self.double)}
        text = json.dumps(doc, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def empirical_independence(model: RandomPhases, samples: int = 100_000,
                           max_harmonic: int = 2, *, start: int = 1) -> IndependenceTable:
    """Estimate characteristic functions of ``delta_k = (eta_{2k}, eta_{2k-1})``.

    Uses ``k = start .. start + samples - 1`` at ``lam = 0``.  For each
    nonzero harmonic ``n`` with entries in ``[-H, H]`` the joint estimate
    ``mean exp(i n . delta_k)`` is compared with the product of its one
    dimensional marginals, and the four-dimensional estimate for
    ``(delta_k, delta_{k+1})`` with the product of the two pair estimates.
    Under independence the differences are of order ``samples**-0.5``.

    Raises
    ------
    WrongVariantError
        If the model is not a random model.
    """
    if not isinstance(model, RandomPhases):
        raise WrongVariantError("independence check needs a random phase model")
    ks = np.arange(start, start + samples + 1)
    lo = 2 * int(ks[0]) - 2
    th, al, _ = model.phases(np.arange(lo, 2 * int(ks[-1]) + 1))
    run = th[1:] + th[:-1] + al[1:] - al[:-1]
    ee = run[2 * ks - lo - 1]
    eo = run[2 * ks - lo - 2]
    H = int(max_harmonic)
    rng = range(-H, H + 1)
    ex = {h: np.exp(1j * h * ee) for h in rng}
    eo_ = {h: np.exp(1j * h * eo) for h in rng}

    def phi2(n1, n2, sl=slice(0, samples)):
        return complex(np.mean(ex[n1][sl] * eo_[n2][sl]))

    single = {}
    for n1, n2 in itertools.product(rng, rng):
        if n1 == 0 and n2 == 0:
            continue
        single[(n1, n2)] = (phi2(n1, n2), phi2(n1, 0) * phi2(0, n2))
    a = slice(0, samples)
    b = slice(1, samples + 1)
    double = {}
    for n in itertools.product(rng, repeat=4):
        if not any(n) or not any(n[:2]) or not any(n[2:]):
            continue
        joint = complex(np.mean(ex[n[0]][a] * eo_[n[1]][a] * ex[n[2]][b] * eo_[n[3]][b]))
        double[n] = (joint, phi2(n[0], n[1], a) * phi2(n[2], n[3], b))
    return IndependenceTable(int(samples), H, single, double)

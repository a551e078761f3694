"""Half-line operator, period matrix, Floquet discriminant and boundary eigenvalues.

The half-line operator lives on sites ``1, 2, ...``.  Its even factor acts
on site 1 alone by ``exp(-i theta_0)`` and carries the scattering blocks on
``(2, 3), (4, 5), ...``; its odd factor carries ``(1, 2), (3, 4), ...``.

For a model that is periodic beyond pair index ``k0`` the product
``R(lam) = T(k0 + N) ... T(k0 + 1)`` over one pair period decides the
spectrum: ``exp(i lam)`` lies in the band set exactly when the larger
eigenvalue modulus ``|E1(lam)|`` equals one.  In a gap a boundary value
``a(lam)`` parallel to the decaying eigenvector ``v2`` of ``R`` gives an
eigenvalue of the half-line operator.

All transfer matrices here are the reduced ones, i.e. the model is read in
the gauge ``gamma_k = (-1)**(k+1) alpha_k``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .arcs import TWO_PI, ArcSet
from .core import BandWindow, _block_diagonal
from .errors import BranchPointError, DegenerateCouplingError, WindowTooSmallError
from .models import PhaseModel
from .transfer import Transfer2, reduced_matrices

__all__ = [
    "BoundaryData", "DiscriminantProfile", "EigenReport", "PeriodData", "boundary_data",
    "discriminant_profile", "eigenvalue_function", "find_eigenvalues", "halfline_window",
    "period_matrix", "settled_index",
]

_BRANCH_GAP = 1e-6      # ||E1| - |E2|| below this counts as a branch (band) point
_EDGE_EXCLUSION = 1e-4  # roots closer than this to a band edge are not searched


def halfline_window(model: PhaseModel, sites: int) -> BandWindow:
    """Dense window of the half-line operator on sites ``1 .. sites``.

    The first row and column follow the half-line boundary; the far edge is
    closed with a 1x1 identity entry where a block would dangle, as in
    :func:`~unitaryband.core.build_windowed_unitary`.

    Raises
    ------
    WindowTooSmallError
        If ``sites < 4``.
    """
    if sites < 4:
        raise WindowTooSmallError(f"half-line window needs at least 4 sites, got {sites}")
    th0 = model.phases([0])[0][0]
    u_e = _block_diagonal(model, 1, int(sites), 0, left_fill=np.exp(-1j * th0))
    u_o = _block_diagonal(model, 1, int(sites), 1)
    return BandWindow(1, int(sites), u_o @ u_e, "halfline")


def settled_index(model: PhaseModel) -> int:
    """Smallest admissible ``k0``: beyond it no local defect enters a transfer matrix."""
    if not model.defects:
        return 1
    last = max(d[0] for d in model.defects)
    return max(1, last // 2 + 1)


def _require_periodic(model: PhaseModel):
    n = model.pair_period
    if n is None:
        raise ValueError(f"model of variant {model.variant!r} is not periodic")
    model.require_constant_coupling()
    if not 0.0 < model.t:
        raise DegenerateCouplingError("period matrix needs t > 0")
    return n


def _eta_base(model: PhaseModel, ks):
    """``eta`` at ``lam = 0`` for the even and odd sites of pair indices ``ks``."""
    ks = np.asarray(ks, dtype=np.int64)
    lo = 2 * int(ks.min()) - 2
    th, al, _ = model.phases(np.arange(lo, 2 * int(ks.max()) + 1))
    run = th[1:] + th[:-1] + al[1:] - al[:-1]
    return run[2 * ks - lo - 1], run[2 * ks - lo - 2]


def _products(model: PhaseModel, ks, lams) -> np.ndarray:
    """Ordered products ``T(ks[-1]) ... T(ks[0])`` for every angle in ``lams``."""
    lams = np.atleast_1d(np.asarray(lams, float))
    out = np.broadcast_to(np.eye(2, dtype=complex), lams.shape + (2, 2)).copy()
    if len(ks) == 0:
        return out
    ee, eo = _eta_base(model, ks)
    mats = reduced_matrices(ee[None, :] + lams[:, None], eo[None, :] + lams[:, None], model.t)
    for j in range(len(ks)):
        out = mats[:, j] @ out
    return out


def _period_ks(model, k0, extra_factor):
    n = _require_periodic(model)
    k0 = int(k0)
    stop = k0 + n + (1 if extra_factor else 0)
    return np.arange(k0 + 1, stop + 1)


def _eig2(r):
    """Eigen-decomposition of stacks of 2x2 matrices sorted by modulus.

    Returns ``E1, E2, v2`` with ``|E1| >= |E2|`` and ``v2`` the unit
    eigenvector of ``E2`` whose largest component is real positive.
    """
    tr = r[..., 0, 0] + r[..., 1, 1]
    det = r[..., 0, 0] * r[..., 1, 1] - r[..., 0, 1] * r[..., 1, 0]
    s = np.sqrt(tr * tr - 4.0 * det)
    ea, eb = 0.5 * (tr + s), 0.5 * (tr - s)
    big = np.where(np.abs(ea) >= np.abs(eb), ea, eb)
    e1 = big
    e2 = det / big
    # (R - E2) v = 0: two candidate null vectors, keep the better conditioned one
    c1 = np.stack((r[..., 0, 1], e2 - r[..., 0, 0]), axis=-1)
    c2 = np.stack((e2 - r[..., 1, 1], r[..., 1, 0]), axis=-1)
    n1 = np.linalg.norm(c1, axis=-1)
    n2 = np.linalg.norm(c2, axis=-1)
    v = np.where((n1 >= n2)[..., None], c1, c2)
    nv = np.maximum(n1, n2)
    degenerate = nv == 0
    v = np.where(degenerate[..., None], np.array([1.0, 0.0], complex), v)
    v = v / np.where(degenerate, 1.0, nv)[..., None]
    piv = np.take_along_axis(v, np.argmax(np.abs(v), axis=-1)[..., None], axis=-1)
    v = v * (np.abs(piv) / piv)
    return e1, e2, v, tr * tr - 4.0 * det


@dataclass(frozen=True, eq=False)
class PeriodData:
    """The period matrix at one angle and its eigen-data.

    Attributes
    ----------
    lam : float
    R : Transfer2
    E1, E2 : complex
        Eigenvalues with ``|E1| >= |E2|``.
    v2 : ndarray
        Unit eigenvector of ``E2``, largest component real positive.
    near_branch : bool
        ``||E1| - |E2|| < 1e-6``; true inside bands and at band edges, where
        no decaying direction exists.
    branch_distance : float
        ``|(tr R)^2 - 4 det R|``, which vanishes at the branch points.
    """

    lam: float
    R: Transfer2
    E1: complex
    E2: complex
    v2: np.ndarray = field(repr=False)
    near_branch: bool
    branch_distance: float

    @property
    def abs_e1(self) -> float:
        return float(abs(self.E1))


def period_matrix(lam: float, model: PhaseModel, k0: int = 1, *,
                  extra_factor: bool = False) -> PeriodData:
    """Product of the transfer matrices over one pair period after ``k0``.

    Parameters
    ----------
    lam : float
    model : PhaseModel
        Must be periodic beyond ``k0`` (local defects before are allowed).
    k0 : int
    extra_factor : bool
        Multiply ``N + 1`` factors ``T(k0 + N + 1) ... T(k0 + 1)`` instead of
        ``N``.  Only for comparison; the spectrum is defined by the ``N``
        factor product.

    Raises
    ------
    DegenerateCouplingError
        If ``t = 0`` or the coupling is site dependent.
    """
    ks = _period_ks(model, k0, extra_factor)
    r = _products(model, ks, [lam])[0]
    e1, e2, v2, disc = _eig2(r)
    ee, eo = _eta_base(model, ks)
    det_phase = float(np.sum(ee - eo))
    near = abs(abs(e1) - abs(e2)) < _BRANCH_GAP
    return PeriodData(float(lam), Transfer2(r, det_phase), complex(e1), complex(e2), v2,
                      bool(near), float(abs(disc)))


@dataclass(frozen=True, eq=False)
class DiscriminantProfile:
    """``|E1|`` on a grid plus the band set it defines.

    Attributes
    ----------
    grid : ndarray
    abs_e1 : ndarray
    det_defect : ndarray
        ``||E1 E2| - 1|`` per grid point.
    bands : ArcSet
        ``{lam : |E1(lam)| <= 1 + tol}`` with edges refined by bisection.
    gaps : tuple of (lo, hi)
        Complementary open intervals (``hi`` may exceed ``2*pi``).
    max_jump : float
        Largest change of ``|E1|`` between neighbouring grid points.
    """

    grid: np.ndarray = field(repr=False)
    abs_e1: np.ndarray = field(repr=False)
    det_defect: np.ndarray = field(repr=False)
    bands: ArcSet
    gaps: tuple
    max_jump: float
    tol: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "abs_E1", "det_defect"])
            for row in zip(self.grid, self.abs_e1, self.det_defect):
                w.writerow([repr(float(v)) for v in row])


def _abs_e1(model, ks, lams):
    r = _products(model, ks, lams)
    e1, e2, _, _ = _eig2(r)
    return np.abs(e1), np.abs(np.abs(e1 * e2) - 1.0)


def discriminant_profile(model: PhaseModel, k0: int | None = None, grid=None, *, n: int = 1024,
                         tol: float = 1e-9, edge_tol: float = 1e-13) -> DiscriminantProfile:
    """Sample ``|E1|`` and extract bands and gaps.

    Parameters
    ----------
    model : PhaseModel
    k0 : int, optional
        First pair index of the period; defaults to :func:`settled_index`,
        the first period free of defects.
    grid : array_like, optional
        Increasing angles in ``[0, 2*pi)``; defaults to ``n`` equispaced points.
    tol : float
        A point is in a gap when ``|E1| > 1 + tol``.
    edge_tol : float
        Bisection width for the band edges.  Near an edge ``|E1| - 1`` grows
        like the square root of the distance, so the edge found for the
        threshold ``1 + tol`` is off by about ``tol**2``.
    """
    if k0 is None:
        k0 = settled_index(model)
    ks = _period_ks(model, k0, False)
    grid = (np.linspace(0.0, TWO_PI, n, endpoint=False) if grid is None
            else np.asarray(grid, float))
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    a1, dd = _abs_e1(model, ks, grid)
    in_gap = a1 > 1.0 + tol

    def gap_at(x):
        return _abs_e1(model, ks, [x])[0][0] > 1.0 + tol

    def edge(a, b, gap_a):
        while b - a > edge_tol:
            mid = 0.5 * (a + b)
            if gap_at(mid) == gap_a:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    # walk once around the circle, closing the grid periodically
    ext = np.append(grid, grid[0] + TWO_PI)
    flags = np.append(in_gap, in_gap[0])
    if not np.any(in_gap):
        bands, gaps = ArcSet.full(), ()
    elif np.all(in_gap):
        bands, gaps = ArcSet(), ((0.0, TWO_PI),)
    else:
        edges = []   # (angle, entering_gap)
        for i in range(grid.size):
            if flags[i] != flags[i + 1]:
                edges.append((edge(ext[i], ext[i + 1], bool(flags[i])), not flags[i]))
        # rotate so the list starts with a gap entry
        while not edges[0][1]:
            edges.append(edges.pop(0))
        gaps, band_iv = [], []
        for j in range(0, len(edges), 2):
            lo = edges[j][0]
            hi = edges[j + 1][0]
            nxt = edges[(j + 2) % len(edges)][0]
            gaps.append((lo, hi if hi > lo else hi + TWO_PI))
            band_iv.append((hi, nxt if nxt >= hi else nxt + TWO_PI))
        bands = ArcSet.from_intervals(band_iv, merge_tol=0.0)
        gaps = tuple(gaps)
    jumps = np.abs(np.diff(np.append(a1, a1[0])))
    return DiscriminantProfile(grid, a1, dd, bands, tuple(gaps), float(jumps.max()), tol)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Boundary objects of the half-line problem at one angle.

    With ``c_1 = 1`` the first pair ``d(1) = (c_2, c_3)`` of a generalized
    eigenvector equals ``T_tilde @ b``, where ``T_tilde`` is the inverse of
    ``T_tilde_inv``.

    Notes
    -----
    ``|det T_tilde_inv| = t**2`` (its determinant is
    ``-t**2 exp(-i phi) exp(i lam)`` with
    ``phi = theta_1 + theta_2 + alpha_2 - alpha_1``), not one.
    """

    lam: float
    T_tilde_inv: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def det(self) -> complex:
        m = self.T_tilde_inv
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def first_pair(self) -> np.ndarray:
        return np.linalg.solve(self.T_tilde_inv, self.b)


def boundary_data(lam: float, model: PhaseModel) -> BoundaryData:
    """``T_tilde^{-1}`` and ``b(lam)`` from the phases at sites 0, 1, 2."""
    model.require_constant_coupling()
    t, r = model.t, model.coupling.r
    if t <= 0.0:
        raise DegenerateCouplingError("boundary data need t > 0")
    th, al, _ = model.phases([0, 1, 2])
    z = np.exp(1j * lam)
    phi = th[1] + th[2] + al[2] - al[1]
    tinv = (np.exp(-1j * phi) * np.array([[1j * r * t, -t * t], [r * r, 1j * t * r]])
            - z * np.array([[0.0, 0.0], [1.0, 0.0]]))
    b = z * np.array([1.0, 0.0]) - np.exp(-1j * (th[0] + th[1] + al[1])) * np.array([r, 1j * t])
    return BoundaryData(float(lam), tinv, b)


def _boundary_values(model, k0, lams):
    """``a(lam) = T(k0) ... T(2) d(1)`` for each angle, as unit vectors."""
    lams = np.atleast_1d(np.asarray(lams, float))
    d1 = np.stack([boundary_data(l, model).first_pair() for l in lams])
    prod = _products(model, np.arange(2, int(k0) + 1), lams)
    a = np.einsum("nij,nj->ni", prod, d1)
    return a / np.linalg.norm(a, axis=1)[:, None]


def _f_values(model, k0, lams):
    """Normalized ``det(v2; a)``, plus ``|E1|`` and the branch flags."""
    ks = _period_ks(model, k0, False)
    r = _products(model, ks, lams)
    e1, e2, v2, _ = _eig2(r)
    a = _boundary_values(model, k0, lams)
    f = v2[:, 0] * a[:, 1] - v2[:, 1] * a[:, 0]
    near = np.abs(np.abs(e1) - np.abs(e2)) < _BRANCH_GAP
    return f, np.abs(e1), near


def eigenvalue_function(lam: float, model: PhaseModel, k0: int = 1, *,
                        check: bool = True) -> complex:
    """``det(v2(lam); a(lam))`` with both columns normalized to unit length.

    ``exp(i lam)`` is an eigenvalue of the half-line operator exactly when
    this vanishes for ``lam`` in a gap.  The scale-free normalization makes
    the value the sine of the angle between the two directions.

    Parameters
    ----------
    lam : float
    model : PhaseModel
        Periodic beyond ``k0``.
    k0 : int
        At least 1; ``a`` is the pair ``d(k0)``.
    check : bool
        Refuse evaluation where the period matrix has no well separated
        decaying direction.

    Raises
    ------
    BranchPointError
        With ``check=True``, if ``||E1| - |E2|| < 1e-6`` at ``lam``.
    """
    k0 = max(1, int(k0))
    f, _, near = _f_values(model, k0, [lam])
    if check and near[0]:
        raise BranchPointError(f"no decaying direction at lam={lam} (band or branch point)")
    return complex(f[0])


def _golden(fun, a, b, tol):
    """Golden-section minimisation of ``fun`` on ``[a, b]`` down to width ``tol``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


@dataclass(frozen=True, eq=False)
class EigenReport:
    """Result of :func:`find_eigenvalues`.

    Attributes
    ----------
    eigenvalues : tuple of float
        Accepted angles ``lam*``.
    residuals : tuple of float
        ``|det(v2; a)|`` at each accepted angle.
    gap_index : tuple of int
        Which entry of ``gaps`` holds each eigenvalue.
    abs_e1 : tuple of float
        ``|E1|`` at each eigenvalue.
    decay : tuple of float
        Measured decay rate (per pair step) of the validating track.
    stencil_residual : tuple of float
        Relative operator residual of the validating track.
    bands : ArcSet
    gaps : tuple of (lo, hi)
    branch_points : tuple of float
        Angles where ``(tr R)^2 - 4 det R`` nearly vanishes.
    rejected : tuple of (float, float)
        Local minima that did not reach the residual threshold.
    """

    eigenvalues: tuple
    residuals: tuple
    gap_index: tuple
    abs_e1: tuple
    decay: tuple
    stencil_residual: tuple
    bands: ArcSet
    gaps: tuple
    branch_points: tuple
    rejected: tuple = ()
    k0: int = 1

    def __len__(self):
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "k0": self.k0,
            "bands": self.bands.to_dict(),
            "gaps": [{"lo": lo, "hi": hi} for lo, hi in self.gaps],
            "eigenvalues": [
                {"lambda": l, "residual": r, "gap": g, "abs_E1": e, "decay_rate": d,
                 "stencil_residual": s}
                for l, r, g, e, d, s in zip(self.eigenvalues, self.residuals, self.gap_index,
                                            self.abs_e1, self.decay, self.stencil_residual)],
            "branch_points": list(self.branch_points),
            "rejected_minima": [{"lambda": l, "value": v} for l, v in self.rejected],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _validate_root(model, k0, lam, abs_e1):
    """Build the boundary solution at ``lam`` and measure its decay and stencil residual."""
    n = model.pair_period
    rate = math.log(abs_e1) / n
    steps = int(min(20 * n, max(2 * n, math.ceil(12.0 / max(rate, 1e-12)))))
    k_end = k0 + steps
    gauged = model.with_gauge("reduced")
    d1 = boundary_data(lam, model).first_pair()
    ks = np.arange(2, k_end + 1)
    ee, eo = _eta_base(model, ks)
    mats = reduced_matrices(ee + lam, eo + lam, model.t)
    pairs = [d1]
    for m in mats:
        pairs.append(m @ pairs[-1])
    pairs = np.array(pairs)                       # d(1) .. d(k_end)
    psi = np.concatenate(([1.0 + 0j], pairs.ravel()))   # sites 1 .. 2 k_end + 1
    win = halfline_window(gauged, psi.size)
    res = win.matrix @ psi - np.exp(1j * lam) * psi
    interior = np.abs(res[:-3]) / np.max(np.abs(psi))
    ln = np.log(np.linalg.norm(pairs, axis=1))
    j0 = k0 - 1
    decay = float(-(ln[-1] - ln[j0]) / (len(ln) - 1 - j0))
    return decay, float(interior.max()), rate


def find_eigenvalues(model: PhaseModel, k0: int | None = None, resolution: int = 400,
                     tol: float = 1e-10, *, profile: DiscriminantProfile | None = None,
                     accept: float = 1e-8) -> EigenReport:
    """Locate the eigenvalues of the half-line operator inside the gaps.

    Each gap, shrunk by ``1e-4`` at both band edges, is scanned with
    ``resolution`` points.  Local minima of ``|det(v2; a)|`` are refined by
    golden section to width ``tol`` and then polished by a few Newton steps
    on the complex function.  Minima with value below ``accept`` are kept
    and validated by propagating the boundary solution: the track must decay
    and satisfy the operator stencil.

    Parameters
    ----------
    model : PhaseModel
        Periodic beyond ``k0``.
    k0 : int, optional
        Defaults to :func:`settled_index` of the model.
    resolution : int
        Scan points per gap.
    tol : float
        Golden-section bracket width.
    profile : DiscriminantProfile, optional
        Reuse a precomputed band/gap split.
    accept : float
        Residual threshold for roots.
    """
    k0 = settled_index(model) if k0 is None else max(1, int(k0))
    if profile is None:
        profile = discriminant_profile(model, k0)

    def absf(x):
        return float(abs(_f_values(model, k0, [x])[0][0]))

    found, rejected = [], []
    for gi, (lo, hi) in enumerate(profile.gaps):
        a, b = lo + _EDGE_EXCLUSION, hi - _EDGE_EXCLUSION
        if b <= a:
            continue
        xs = np.linspace(a, b, max(int(resolution), 3))
        f, _, near = _f_values(model, k0, xs)
        v = np.where(near, np.inf, np.abs(f))
        for i in range(xs.size):
            left = v[i - 1] if i > 0 else np.inf
            right = v[i + 1] if i + 1 < xs.size else np.inf
            if not (v[i] <= left and v[i] < right) or not np.isfinite(v[i]):
                continue
            x = _golden(absf, xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)], tol)
            # Newton polish on the complex function along the real axis
            for _ in range(4):
                h = 1e-7
                f0 = _f_values(model, k0, [x])[0][0]
                df = (_f_values(model, k0, [x + h])[0][0] - _f_values(model, k0, [x - h])[0][0]) / (2 * h)
                if df == 0:
                    break
                step = float(np.real(f0 / df))
                x_new = x - step
                if not a <= x_new <= b or absf(x_new) >= abs(f0):
                    break
                x = x_new
            val = absf(x)
            if val < accept:
                found.append((x % TWO_PI, val, gi))
            else:
                rejected.append((float(x % TWO_PI), val))
    eig, res, gidx, e1s, decays, sres = [], [], [], [], [], []
    for x, val, gi in sorted(found):
        pd = period_matrix(x, model, k0)
        decay, stencil, _ = _validate_root(model, k0, x, pd.abs_e1)
        eig.append(float(x))
        res.append(float(val))
        gidx.append(gi)
        e1s.append(pd.abs_e1)
        decays.append(decay)
        sres.append(stencil)
    return EigenReport(tuple(eig), tuple(res), tuple(gidx), tuple(e1s), tuple(decays),
                       tuple(sres), profile.bands, profile.gaps,
                       tuple(_branch_points(model, k0, profile)), tuple(rejected), k0)


def _branch_points(model, k0, profile, thresh=1e-6):
    """Near-zeros of ``(tr R)^2 - 4 det R``, refined around the band edges."""
    ks = _period_ks(model, k0, False)

    def disc(x):
        r = _products(model, ks, [x])[0]
        return float(abs((r[0, 0] + r[1, 1]) ** 2 - 4 * np.linalg.det(r)))

    pts = []
    for lo, hi in profile.gaps:
        for e in (lo, hi):
            res = minimize_scalar(disc, bounds=(e - 1e-3, e + 1e-3), method="bounded",
                                  options={"xatol": 1e-13})
            if res.fun < thresh:
                pts.append(float(res.x % TWO_PI))
    return sorted(set(np.round(pts, 12)))

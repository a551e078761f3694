"""Lyapunov exponents of the transfer cocycle and the certificates behind their positivity.

The estimator pushes a unit vector through the cocycle, renormalising after
every step, and averages the logarithms of the renormalisation factors.
Error bars come from batch means.  Many runs (values of ``lam`` or of a
model parameter) are advanced together as one vectorised system.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateCouplingError, SpanTooShortError
from .models import AlmostPeriodicPhases, CouplingPair, PhaseModel, RandomPhases, wrap_angle
from .realify import tau_matrix
from .transfer import (CoefficientTrack, _inverse_2x2, reduced_matrices,
                       transfer_matrices)

__all__ = [
    "Certificate", "GammaProfile", "LyapunovEstimate", "NoncompactWitness",
    "approximant_difference", "cocycle_exponents", "estimate_gamma", "gamma_profile",
    "gordon_ratio", "herman_average", "herman_bound", "herman_circle_mean",
    "irreducibility_certificate", "noncompact_witness", "pi_pi_transfer",
]

_CHUNK = 4096


@dataclass(frozen=True)
class LyapunovEstimate:
    """Top Lyapunov exponent estimate in nats per transfer step."""

    gamma_hat: float
    stderr: float
    steps: int
    lam: float
    seed: int | None = None
    batches: int = 20

    def __post_init__(self):
        if not math.isfinite(self.gamma_hat) or self.stderr < 0:
            raise ValueError("invalid estimate")

    @property
    def lower(self) -> float:
        """``gamma_hat - 3 * stderr``."""
        return self.gamma_hat - 3.0 * self.stderr


@dataclass(frozen=True)
class GammaProfile:
    """Lyapunov estimates on a grid of spectral angles."""

    grid: np.ndarray
    estimates: tuple

    def __post_init__(self):
        g = np.asarray(self.grid, float)
        if g.size and (np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] >= 2 * np.pi):
            raise ValueError("grid must be strictly increasing in [0, 2*pi)")
        object.__setattr__(self, "grid", g)

    @property
    def gamma_hat(self) -> np.ndarray:
        return np.array([e.gamma_hat for e in self.estimates])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([e.stderr for e in self.estimates])

    def min_lower(self) -> float:
        """Smallest ``gamma_hat - 3 stderr`` over the grid (``inf`` when empty)."""
        return float(np.min(self.gamma_hat - 3 * self.stderr)) if self.estimates else math.inf

    def min_gamma(self) -> float:
        return float(np.min(self.gamma_hat)) if self.estimates else math.inf

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "gamma_hat", "stderr", "steps"])
            for lam, e in zip(self.grid, self.estimates):
                w.writerow([repr(float(lam)), repr(e.gamma_hat), repr(e.stderr), e.steps])


def _require_open(coupling: CouplingPair):
    if not 0.0 < coupling.t < 1.0:
        raise DegenerateCouplingError(f"need 0 < t < 1, got t={coupling.t}")


def cocycle_exponents(chunks, steps: int, batches: int = 20, v0=None):
    """Growth exponents of several cocycles advanced in lockstep.

    Parameters
    ----------
    chunks : iterable of ndarray
        Successive matrix blocks of shape ``(L, c, d, d)``; their ``c``
        values must add up to ``steps``.
    steps : int
    batches : int
        Number of equal batches for the batch-means error bar.
    v0 : ndarray, optional
        Initial vectors ``(L, d)``; defaults to a fixed generic unit vector.

    Returns
    -------
    gamma : ndarray, shape (L,)
    stderr : ndarray, shape (L,)
    """
    if steps < batches:
        raise ValueError("need at least one step per batch")
    sums = None
    v = None
    done = 0
    size = steps // batches
    for block in chunks:
        L, c, d, _ = block.shape
        if v is None:
            if v0 is None:
                base = np.exp(1j * np.arange(d)) / np.sqrt(d) * (1 + 0.1 * np.arange(d))
                v0 = np.broadcast_to(base / np.linalg.norm(base), (L, d))
            v = np.array(v0, dtype=block.dtype if np.iscomplexobj(block) else complex)
            sums = np.zeros((L, batches))
        logs = np.empty((L, c))
        if d == 2:
            # explicit components: several times faster than einsum for 2x2
            a, b = block[:, :, 0, 0], block[:, :, 0, 1]
            cc, dd = block[:, :, 1, 0], block[:, :, 1, 1]
            x, y = v[:, 0].copy(), v[:, 1].copy()
            for i in range(c):
                x, y = a[:, i] * x + b[:, i] * y, cc[:, i] * x + dd[:, i] * y
                nrm = np.sqrt(x.real ** 2 + x.imag ** 2 + y.real ** 2 + y.imag ** 2)
                logs[:, i] = nrm
                x /= nrm
                y /= nrm
            logs = np.log(logs)
            v = np.stack((x, y), axis=1)
        else:
            for i in range(c):
                v = np.einsum("lij,lj->li", block[:, i], v)
                nrm = np.sqrt(np.sum(np.abs(v) ** 2, axis=1))
                logs[:, i] = np.log(nrm)
                v = v / nrm[:, None]
        which = np.minimum((done + np.arange(c)) // size, batches - 1)
        for b in np.unique(which):
            sums[:, b] += logs[:, which == b].sum(axis=1)
        done += c
    if done != steps:
        raise ValueError("chunks do not cover the requested number of steps")
    counts = np.full(batches, size, float)
    counts[-1] = steps - size * (batches - 1)
    means = sums / counts
    gamma = sums.sum(axis=1) / steps
    stderr = means.std(axis=1, ddof=1) / np.sqrt(batches)
    return gamma, stderr


def _matrix_chunks(models, lams, steps, form, direction, representation):
    """Yield ``(L, c, d, d)`` transfer-matrix blocks for lockstep runs."""
    for lo in range(0, steps, _CHUNK):
        n = min(_CHUNK, steps - lo)
        if direction == "forward":
            ks = np.arange(lo + 1, lo + n + 1)
        else:
            ks = -np.arange(lo, lo + n)       # T(-k+1)^{-1} for k = lo+1 ...
        block = []
        for model, lam in zip(models, lams):
            mats, ph = transfer_matrices(ks, lam, model, form)
            if direction == "backward":
                mats = _inverse_2x2(mats, ph)
            block.append(mats)
        block = np.stack(block)
        if representation == "tau":
            block = tau_matrix(block).astype(complex)
        yield block


def _run(models, lams, steps, batches, form, direction, representation):
    for m in models:
        _require_open(m.coupling)
        m.require_constant_coupling()
    if steps < 1000:
        raise ValueError("steps must be at least 1000")
    chunks = _matrix_chunks(models, lams, steps, form, direction, representation)
    return cocycle_exponents(chunks, steps, batches)


def estimate_gamma(lam: float, model: PhaseModel, steps: int = 100_000, seed=None, *,
                   batches: int = 20, form: str = "reduced", direction: str = "forward",
                   representation: str = "complex") -> LyapunovEstimate:
    """Estimate the top Lyapunov exponent at spectral angle ``lam``.

    Parameters
    ----------
    lam : float
    model : PhaseModel
        Needs a constant coupling with ``0 < t < 1``.
    steps : int
        Number of transfer steps, at least 1000.
    seed : int or tuple, optional
        For random models, the phases are drawn from the sub-stream
        ``model.reseeded(seed)``; ignored for deterministic models.
    batches : int
        Batches for the batch-means standard error (at least 20 by default).
    form : {"reduced", "general"}
        Transfer-matrix form.  ``"general"`` keeps the model's own gauge.
    direction : {"forward", "backward"}
        ``"backward"`` uses the inverse cocycle ``T(-k+1)^{-1}`` towards
        negative indices.
    representation : {"complex", "tau"}
        Run on the 2x2 complex matrices or on their real 4x4 images.

    Returns
    -------
    LyapunovEstimate

    Raises
    ------
    DegenerateCouplingError
        If ``t`` is 0 or 1, or the coupling is site dependent.
    """
    if seed is not None and isinstance(model, RandomPhases):
        model = model.reseeded(seed)
    g, s = _run([model], [lam], steps, batches, form, direction, representation)
    return LyapunovEstimate(float(g[0]), float(s[0]), int(steps), float(lam),
                            None if seed is None else _seed_repr(seed), batches)


def _seed_repr(seed):
    return seed if isinstance(seed, int) else json.dumps(list(np.atleast_1d(seed).tolist()))


def gamma_profile(grid, model: PhaseModel, steps: int = 100_000, seed: int = 0, *,
                  batches: int = 20, form: str = "reduced", chunk_runs: int = 64) -> GammaProfile:
    """Lyapunov estimates on a grid of angles.

    Random models get an independent phase stream per grid point, derived
    from ``(seed, index)``; the estimates are therefore independent and
    reproducible.
    """
    grid = np.asarray(grid, float)
    if grid.size == 0:
        return GammaProfile(grid, ())
    models = [model.reseeded((seed, i)) if isinstance(model, RandomPhases) else model
              for i in range(grid.size)]
    est = []
    for lo in range(0, grid.size, chunk_runs):
        sl = slice(lo, lo + chunk_runs)
        g, s = _run(models[sl], grid[sl], steps, batches, form, "forward", "complex")
        est.extend(LyapunovEstimate(float(a), float(b), int(steps), float(l),
                                    _seed_repr((seed, i)), batches)
                   for a, b, l, i in zip(g, s, grid[sl], range(lo, lo + g.size)))
    return GammaProfile(grid, tuple(est))


def herman_bound(coupling: CouplingPair) -> float:
    """Lower bound ``ln(1/t**2)`` on the exponent of the almost periodic model."""
    _require_open(coupling)
    return float(-2.0 * math.log(coupling.t))


def herman_average(model: AlmostPeriodicPhases, n_theta: int = 64, lam: float = 0.0,
                   steps: int = 100_000, seed: int = 0, *, batches: int = 20):
    """Mean exponent over ``n_theta`` random offsets ``theta0``.

    Returns
    -------
    mean : float
    estimates : ndarray
        The individual exponents.
    """
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0, 2 * np.pi, n_theta)
    models = [AlmostPeriodicPhases(t=model.t, beta=model.beta, theta0=th, alpha0=model.alpha0)
              for th in thetas]
    g, _ = _run(models, [lam] * n_theta, steps, batches, "reduced", "forward", "complex")
    return float(np.mean(g)), g


def herman_circle_mean(model: AlmostPeriodicPhases, steps: int, lam: float = 0.0,
                       n_theta: int = 256) -> float:
    """Average of ``(1/n) ln ||T(n) ... T(1)||`` over a uniform grid of ``theta0``.

    The cocycle is a trigonometric polynomial in ``theta0`` whose analytic
    extension has the value ``t**(-2n)`` (in norm) at the centre of the disc,
    so by subharmonicity this circle mean is at least ``ln(1/t**2)`` for
    every ``n``, not only asymptotically.
    """
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = []
    for th in thetas:
        m = AlmostPeriodicPhases(t=model.t, beta=model.beta, theta0=th, alpha0=model.alpha0)
        mats, _ = transfer_matrices(np.arange(1, steps + 1), lam, m, "reduced")
        prod = np.eye(2, dtype=complex)
        log_s = 0.0
        for mat in mats:
            prod = mat @ prod
            s = np.abs(prod).max()
            prod /= s
            log_s += np.log(s)
        vals.append((log_s + np.log(np.linalg.norm(prod, 2))) / steps)
    return float(np.mean(vals))


def pi_pi_transfer(coupling: CouplingPair) -> np.ndarray:
    """Reduced transfer matrix at ``eta_even = eta_odd = pi``."""
    return reduced_matrices(np.pi, np.pi, coupling.t)


@dataclass(frozen=True)
class NoncompactWitness:
    """Closed-form and eigensolved spectrum of the ``(pi, pi)`` transfer matrix image."""

    closed_form: tuple
    tau_eigenvalues: tuple
    deviation: float

    @property
    def values(self) -> tuple:
        return self.closed_form


def noncompact_witness(coupling: CouplingPair) -> NoncompactWitness:
    """Eigenvalues ``(r-1)**2/t**2`` and ``(r+1)**2/t**2`` of an element of the cocycle group.

    The larger one exceeds 1, so powers of this matrix are unbounded.  The
    closed form is compared with an eigensolve of the real 4x4 image, where
    each value appears twice.

    Raises
    ------
    DegenerateCouplingError
        Unless ``0 < t < 1``.
    """
    _require_open(coupling)
    r, t = coupling.r, coupling.t
    lo, hi = (r - 1) ** 2 / t ** 2, (r + 1) ** 2 / t ** 2
    ev = np.sort(np.linalg.eigvals(tau_matrix(pi_pi_transfer(coupling))).real)
    expected = np.array([lo, lo, hi, hi])
    dev = float(np.max(np.abs(ev - expected) / np.maximum(1.0, expected)))
    if dev > 1e-10 or not hi > 1.0:
        raise RuntimeError(f"closed form and eigensolve disagree by {dev:.3g}")
    return NoncompactWitness((lo, hi), tuple(float(x) for x in ev), dev)


@dataclass(frozen=True)
class Certificate:
    """Outcome of :func:`irreducibility_certificate`.

    Attributes
    ----------
    t : float
    stated_relations : dict
        Deviation of every relation as stated, keyed by a short name.
    corrected_relations : dict
        Deviations of relations that replace stated ones which do not hold.
    structure_checks : dict
        Deviations of the matrix identities (``M2 = -(M0 + I)``, the
        Fourier expansions, eigenvalues of ``M0``, orthogonality of the u's).
    invariant_spans : list
        Candidate spans of u-vectors that are invariant (empty when the
        exhaustive search succeeds).
    algebra_dimension : int
        Dimension of the real algebra generated by ``I, M0, M1, N1``; 8 means
        the full image of the complex 2x2 matrices, which acts irreducibly.
    tol : float
    """

    t: float
    stated_relations: dict
    corrected_relations: dict
    structure_checks: dict
    invariant_spans: list
    algebra_dimension: int
    tol: float = 1e-11

    @property
    def stated_ok(self) -> bool:
        return all(v < self.tol for v in self.stated_relations.values())

    @property
    def failed_stated(self) -> list:
        return sorted(k for k, v in self.stated_relations.items() if not v < self.tol)

    @property
    def corrected_ok(self) -> bool:
        return all(v < self.tol for v in self.corrected_relations.values())

    @property
    def structure_ok(self) -> bool:
        return all(v < self.tol for v in self.structure_checks.values())

    @property
    def no_invariant_span(self) -> bool:
        return not self.invariant_spans

    @property
    def irreducible(self) -> bool:
        """Irreducibility established by the spans search and the algebra dimension."""
        return self.structure_ok and self.no_invariant_span and self.algebra_dimension == 8

    @property
    def passed(self) -> bool:
        """All stated relations hold and no candidate span is invariant."""
        return self.stated_ok and self.structure_ok and self.no_invariant_span

    def to_json(self, path=None) -> str:
        doc = asdict(self)
        doc.update(stated_ok=self.stated_ok, corrected_ok=self.corrected_ok,
                   irreducible=self.irreducible, passed=self.passed)
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _certificate_matrices(coupling):
    r, t = coupling.r, coupling.t
    q, s = r / t, r * r / (t * t)
    w = (r * r + 1) / (t * t)
    M0 = np.array([[0, 0, 0, -q], [0, 0, q, 0], [0, q, 2 * s, 0], [-q, 0, 0, 2 * s]])
    M1 = np.array([[0, 1, q, 0], [-1, 0, 0, q], [-q, 0, 0, -1], [0, -q, 1, 0]])
    M2 = -(M0 + np.eye(4))
    N1 = np.array([[0, 1, q, 0], [-1, 0, 0, q], [-q, 0, 0, w], [0, -q, -w, 0]])
    u = {1: np.array([1, 0, 0, -(r + 1) / t]),
         2: np.array([0, (1 - r) / t, 1, 0]),
         3: np.array([1, 0, 0, (1 - r) / t]),
         4: np.array([0, -(r + 1) / t, 1, 0])}
    return M0, M1, M2, N1, u


def _fourier_coefficients(fn, n=16):
    """Coefficients ``c0, sin, cos`` (and higher) of a matrix-valued trig polynomial."""
    th = 2 * np.pi * np.arange(n) / n
    vals = np.stack([fn(x) for x in th])
    c0 = vals.mean(axis=0)
    s1 = 2 * np.einsum("n,nij->ij", np.sin(th), vals) / n
    c1 = 2 * np.einsum("n,nij->ij", np.cos(th), vals) / n
    return c0, s1, c1, th, vals


def _algebra_dimension(gens, tol=1e-9):
    """Dimension of the real algebra generated by ``gens`` and the identity."""
    basis = np.eye(4).reshape(1, 16) / 2.0    # vec(I), unit norm
    while True:
        mats = [b.reshape(4, 4) for b in basis]
        cand = np.array([m.ravel() for m in mats] + [(m @ g).ravel() for m in mats for g in gens])
        _, sv, vt = np.linalg.svd(cand, full_matrices=False)
        rank = int(np.sum(sv > tol * sv[0]))
        if rank == basis.shape[0]:
            return rank
        basis = vt[:rank]


def irreducibility_certificate(coupling: CouplingPair, tol: float = 1e-11) -> Certificate:
    """Evidence that the real images of the transfer matrices have no common invariant subspace.

    The check uses the Fourier coefficients ``M0, M1, M2`` of the image of
    ``T(theta, theta)`` and the ``sin`` coefficient ``N1`` of the image of
    ``T(-theta, theta)`` (reduced matrices with ``eta_odd = theta``), together
    with the eigenvectors ``u1..u4`` of ``M0``.

    Steps
    -----
    1. Rebuild ``M0, M1, M2, N1`` from their closed forms and compare with
       the Fourier coefficients of the transfer matrices.
    2. Check the eigenvalues ``r(r +- 1)/t**2`` of ``M0`` on the u's and the
       stated actions of ``M1`` and ``N1`` on the u's.
    3. Search all spans of one or two u-vectors for invariance under
       ``M0, M1, N1``.
    4. Compute the dimension of the generated algebra (8 settles
       irreducibility without relying on the eigenvector basis).

    Raises
    ------
    DegenerateCouplingError
        Unless ``0 < t < 1``; at ``t = 1`` the matrix ``M0`` vanishes.
    """
    _require_open(coupling)
    r, t = coupling.r, coupling.t
    M0, M1, M2, N1, u = _certificate_matrices(coupling)

    def img(eta_even, eta_odd):
        return tau_matrix(reduced_matrices(eta_even, eta_odd, t))

    struct = {}
    c0, s1, c1, th, vals = _fourier_coefficients(lambda x: img(x, x))
    recon = np.stack([M0 + np.sin(x) * M1 + np.cos(x) * M2 for x in th])
    struct["expansion_theta_theta"] = float(np.max(np.abs(recon - vals)))
    struct["M2_equals_minus_M0_minus_I"] = float(np.max(np.abs(c1 + M0 + np.eye(4))))
    _, n_s1, _, _, _ = _fourier_coefficients(lambda x: img(-x, x))
    struct["N1_sin_coefficient"] = float(np.max(np.abs(n_s1 - N1)))
    mu_plus, mu_minus = r * (r + 1) / t ** 2, r * (r - 1) / t ** 2
    for i, mu in ((1, mu_plus), (2, mu_plus), (3, mu_minus), (4, mu_minus)):
        struct[f"M0_u{i}_eigen"] = float(np.max(np.abs(M0 @ u[i] - mu * u[i])))
    gram = np.array([[u[i] @ u[j] for j in range(1, 5)] for i in range(1, 5)])
    struct["u_orthogonal"] = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))

    a = (1 + r) / (t * (1 - r))
    b = (1 - r) / (t * (1 + r))
    stated_rhs = {
        "M1u1": (M1, 1, u[4] / t), "M1u2": (M1, 2, u[3] / t),
        "M1u3": (M1, 3, -u[2] / t), "M1u4": (M1, 4, -u[1] / t),
        "N1u1": (N1, 1, -a * u[2]), "N1u2": (N1, 2, u[1] / t),
        "N1u3": (N1, 3, b * u[2]), "N1u4": (N1, 4, -u[3] / t),
    }
    stated = {k: float(np.max(np.abs(m @ u[i] - rhs))) for k, (m, i, rhs) in stated_rhs.items()}
    corrected = {}
    if stated["N1u3"] >= tol:
        corrected["N1u3"] = float(np.max(np.abs(N1 @ u[3] - b * u[4])))

    spans = []
    U = np.column_stack([u[i] / np.linalg.norm(u[i]) for i in range(1, 5)])
    for size in (1, 2):
        for combo in itertools.combinations(range(4), size):
            basis = U[:, combo]
            proj = basis @ basis.T
            leak = max(np.max(np.abs((np.eye(4) - proj) @ m @ basis)) for m in (M0, M1, N1))
            if leak < 1e-9:
                spans.append([f"u{i + 1}" for i in combo])
    dim = _algebra_dimension([M0, M1, N1])
    return Certificate(float(t), stated, corrected, struct, spans, dim, tol)


def gordon_ratio(track: CoefficientTrack, q: int) -> float:
    """Finite-window proxy for ``limsup |d(k)|**2 / |d(0)|**2``.

    Returns the largest ``|d(k)|**2 / |d(0)|**2`` over ``q <= |k| <= 2q``
    within the track.  For a ``q``-periodic cocycle with unimodular
    determinant this is at least ``1/4`` for every starting vector, so a
    smaller value is compatible with a decaying eigenvector.

    Raises
    ------
    SpanTooShortError
        If the track does not reach ``k = -q`` and ``k = 2q``.
    """
    q = int(q)
    if q < 1:
        raise ValueError("q must be positive")
    ks = track.ks
    if ks[0] > -q or ks[-1] < 2 * q or not (ks[0] <= 0 <= ks[-1]):
        raise SpanTooShortError(f"track must cover k in [-{q}, {2 * q}]")
    ln = track.log_norms()
    ref = ln[-ks[0]]
    window = (np.abs(ks) >= q) & (np.abs(ks) <= 2 * q)
    return float(np.exp(2.0 * (np.max(ln[window]) - ref)))


def approximant_difference(model: AlmostPeriodicPhases, p: int, q: int, lam: float,
                           k_max: int) -> float:
    """``max_{|k| <= k_max} ||T(k) - T_q(k)||`` against the rational approximant ``p/q``.

    The approximant keeps ``theta0`` and replaces ``beta`` by ``p/q``.
    """
    approx = AlmostPeriodicPhases(t=model.t, beta=p / q, theta0=model.theta0, alpha0=model.alpha0)
    ks = np.arange(-k_max, k_max + 1)
    a, _ = transfer_matrices(ks, lam, model, "reduced")
    b, _ = transfer_matrices(ks, lam, approx, "reduced")
    return float(np.max(np.linalg.norm(a - b, ord=2, axis=(1, 2))))

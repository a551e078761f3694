"""Phase and coupling models for the scattering chain.

A model is an immutable recipe that returns the phases ``(theta_k, alpha_k,
gamma_k)`` and the transmission amplitude ``t_k`` at any set of lattice
sites ``k``.  Nothing is cached or generated sequentially: random phases come
from a counter-based generator keyed by the seed, so site ``k`` can be read
without touching sites ``0..k-1``.

Variants
--------
RandomPhases
    i.i.d. phases, uniform on the torus unless a distribution hook is given.
PeriodicPhases
    ``theta_k = theta[k mod N]`` and ``alpha_k = a*k + pi[k mod N]``.
TwoValuedPhases
    Period two special case with its own closed-form band spectrum.
AlmostPeriodicPhases
    ``theta_k = 2*pi*beta*k + theta0`` with constant ``alpha``.
ExplicitPhases
    Finite lists plus an extension rule outside the listed sites.
EvenExtension
    Mirror image ``k -> |k|`` of another model.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import ClassVar, Mapping

import numpy as np

from .errors import ConfigError, DegenerateCouplingError, WrongVariantError

TWO_PI = 2.0 * np.pi

#: Added to every site index before it is used as a Philox counter, so that
#: negative sites map to distinct non-negative counters.
_COUNTER_OFFSET = 1 << 63

_GAUGES = ("native", "zero", "reduced")


def wrap_angle(x):
    """Reduce angles to ``[0, 2*pi)``.

    Works on scalars and arrays.  Values that round up to exactly ``2*pi``
    are mapped to ``0``.
    """
    y = np.mod(x, TWO_PI)
    if np.ndim(y) == 0:
        return 0.0 if y >= TWO_PI else float(y)
    y[y >= TWO_PI] = 0.0
    return y


def circular_distance(a, b):
    """Shortest distance between angles on the unit circle."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi)
    if np.ndim(d) == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class CouplingPair:
    """Transmission and reflection amplitudes with ``r**2 + t**2 = 1``.

    Use :meth:`from_t` to build one from ``t`` alone.
    """

    t: float
    r: float

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0 and 0.0 <= self.r <= 1.0):
            raise ValueError(f"t and r must lie in [0, 1], got t={self.t}, r={self.r}")
        if abs(self.r ** 2 + self.t ** 2 - 1.0) > 1e-14:
            raise ValueError("r**2 + t**2 must equal 1 within 1e-14")

    @classmethod
    def from_t(cls, t: float) -> "CouplingPair":
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {t}")
        return cls(t=t, r=math.sqrt(max(0.0, 1.0 - t * t)))

    def require_interior(self, *, allow_one=False):
        """Raise :class:`DegenerateCouplingError` unless ``0 < t < 1``.

        With ``allow_one=True`` the value ``t = 1`` is accepted as well.
        """
        if self.t <= 0.0 or (self.t >= 1.0 and not allow_one):
            bound = "(0, 1]" if allow_one else "(0, 1)"
            raise DegenerateCouplingError(f"coupling t={self.t} outside {bound}")


@dataclass(frozen=True)
class PhaseTriple:
    """Phases ``(theta, alpha, gamma)`` of one scattering block, reduced mod 2*pi."""

    theta: float
    alpha: float
    gamma: float

    def __post_init__(self):
        for name in ("theta", "alpha", "gamma"):
            object.__setattr__(self, name, wrap_angle(float(getattr(self, name))))


@dataclass(frozen=True)
class TProfile:
    """Site-dependent transmission amplitude on top of a constant ``t``.

    ``kind="power"`` gives ``t_k = t - c/|k|**p`` for ``k != 0`` (clipped to
    ``[0, 1]``).  ``kind="subsequence"`` keeps ``t_k = t`` except on the sites
    ``|k| = round(j**p)``, ``j >= 1``, where ``t_k = t * j**(-c)``; this drives
    ``t_k`` to zero along a sparse subsequence.
    """

    kind: str
    c: float
    p: float

    def __post_init__(self):
        if self.kind not in ("power", "subsequence"):
            raise ValueError(f"unknown t-profile kind {self.kind!r}")
        if self.kind == "subsequence" and self.p <= 1.0:
            raise ValueError("subsequence spacing exponent p must exceed 1")

    def apply(self, t: float, sites: np.ndarray) -> np.ndarray:
        k = np.abs(np.asarray(sites, dtype=np.int64))
        out = np.full(k.shape, float(t))
        if self.kind == "power":
            nz = k > 0
            out[nz] = t - self.c / k[nz].astype(float) ** self.p
        else:
            j = np.rint(k.astype(float) ** (1.0 / self.p))
            hit = (k > 0) & (np.rint(j ** self.p) == k) & (j >= 1)
            out[hit] = t * j[hit] ** (-self.c)
        return np.clip(out, 0.0, 1.0)


def _as_sites(sites) -> np.ndarray:
    return np.atleast_1d(np.asarray(sites, dtype=np.int64))


@dataclass(frozen=True, kw_only=True)
class PhaseModel:
    """Common base of all phase models.

    Parameters
    ----------
    t : float
        Constant transmission amplitude in ``[0, 1]``.
    t_profile : TProfile, optional
        Site-dependent modification of ``t``.  Transfer-matrix code refuses
        models with a profile.
    defects : tuple of (site, theta, alpha, gamma)
        Local overrides applied after the variant's own rule.
    gauge : {"native", "zero", "reduced"}
        How ``gamma`` is produced.  ``"zero"`` sets it to zero and
        ``"reduced"`` uses ``gamma_k = (-1)**(k+1) * alpha_k``.  Spectra do
        not depend on this choice.
    """

    variant: ClassVar[str] = "base"

    t: float
    t_profile: TProfile | None = None
    defects: tuple = ()
    gauge: str = "native"

    def __post_init__(self):
        CouplingPair.from_t(self.t)
        if self.gauge not in _GAUGES:
            raise ValueError(f"gauge must be one of {_GAUGES}, got {self.gauge!r}")
        object.__setattr__(
            self, "defects",
            tuple((int(d[0]), float(d[1]), float(d[2]), float(d[3])) for d in self.defects),
        )

    # -- phase access -------------------------------------------------------
    def _raw(self, k: np.ndarray):
        raise NotImplementedError

    def phases(self, sites):
        """Return ``(theta, alpha, gamma)`` arrays at the given sites, in ``[0, 2*pi)``."""
        k = _as_sites(sites)
        theta, alpha, gamma = (np.array(x, dtype=float) for x in self._raw(k))
        for site, th, al, ga in self.defects:
            hit = k == site
            theta[hit], alpha[hit], gamma[hit] = th, al, ga
        if self.gauge == "zero":
            gamma = np.zeros_like(theta)
        elif self.gauge == "reduced":
            sign = np.where(k % 2 == 1, 1.0, -1.0)
            gamma = sign * alpha
        return wrap_angle(theta), wrap_angle(alpha), wrap_angle(gamma)

    def phase_triple(self, site: int) -> PhaseTriple:
        th, al, ga = self.phases([site])
        return PhaseTriple(th[0], al[0], ga[0])

    def t_at(self, sites) -> np.ndarray:
        """Transmission amplitudes ``t_k`` at the given sites."""
        k = _as_sites(sites)
        if self.t_profile is None:
            return np.full(k.shape, float(self.t))
        return self.t_profile.apply(self.t, k)

    @property
    def coupling(self) -> CouplingPair:
        return CouplingPair.from_t(self.t)

    @property
    def constant_coupling(self) -> bool:
        return self.t_profile is None

    def require_constant_coupling(self):
        if self.t_profile is not None:
            raise DegenerateCouplingError(
                "transfer matrices need a constant coupling; this model has a t-profile")

    @property
    def period(self) -> int | None:
        """Site period of the model (``None`` when not periodic)."""
        return None

    @property
    def pair_period(self) -> int | None:
        """Number of transfer steps after which the cocycle repeats."""
        n = self.period
        if n is None:
            return None
        return n // math.gcd(n, 2)

    # -- derived models -----------------------------------------------------
    def with_gauge(self, gauge: str) -> "PhaseModel":
        return dataclasses.replace(self, gauge=gauge)

    def with_t(self, t: float) -> "PhaseModel":
        return dataclasses.replace(self, t=float(t))

    def with_defects(self, defects) -> "PhaseModel":
        return dataclasses.replace(self, defects=tuple(self.defects) + tuple(defects))

    # -- serialization ------------------------------------------------------
    def _variant_fields(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        doc = {"variant": self.variant, "t": float(self.t)}
        doc.update(self._variant_fields())
        if self.t_profile is not None:
            doc["t_profile"] = dataclasses.asdict(self.t_profile)
        if self.defects:
            doc["defects"] = [list(d) for d in self.defects]
        if self.gauge != "native":
            doc["gauge"] = self.gauge
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def from_dict(doc: Mapping) -> "PhaseModel":
        return model_from_dict(doc)

    @staticmethod
    def from_json(text: str) -> "PhaseModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, line=exc.lineno) from exc
        return model_from_dict(doc)


def _uniform_from_raw(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to doubles in ``[0, 1)`` using the top 53 bits."""
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True, kw_only=True)
class RandomPhases(PhaseModel):
    """i.i.d. random phases from a counter-based generator.

    Site ``k`` owns one Philox block of four 64-bit words, used for
    ``theta_k``, ``alpha_k``, ``gamma_k`` and a spare.  The block depends on
    ``(seed, k)`` only, so any window can be generated independently.

    Parameters
    ----------
    seed : int
        Non-negative generator key.
    distribution : dict, optional
        ``{"kind": "uniform"}`` (default, the i.i.d. uniform case covered by
        the localization theory), ``{"kind": "atoms", "atoms": [...],
        "weights": [...]}`` for a finite mixture of point masses, or
        ``{"kind": "arc", "center": c, "width": w}`` for a uniform draw on an
        arc.  The last two are experimental hooks applied to ``theta`` and
        ``alpha``; ``gamma`` is always uniform.
    """

    variant: ClassVar[str] = "random"

    seed: int
    distribution: dict | None = None

    def __post_init__(self):
        super().__post_init__()
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))
        dist = self.distribution
        if dist is not None:
            kind = dist.get("kind")
            if kind not in ("uniform", "atoms", "arc"):
                raise ValueError(f"unknown distribution kind {kind!r}")
            if kind == "atoms":
                w = np.asarray(dist.get("weights", np.ones(len(dist["atoms"]))), float)
                if len(w) != len(dist["atoms"]) or np.any(w < 0) or w.sum() <= 0:
                    raise ValueError("atoms and weights must match and weights be non-negative")

    def __hash__(self):
        return hash((self.variant, self.t, self.seed, json.dumps(self.distribution, sort_keys=True),
                     self.defects, self.gauge, self.t_profile))

    @property
    def is_uniform(self) -> bool:
        return self.distribution is None or self.distribution.get("kind") == "uniform"

    def _uniforms(self, k: np.ndarray) -> np.ndarray:
        """Uniform ``(n, 4)`` block for each site in ``k``."""
        if k.size == 0:
            return np.empty((0, 4))
        if k.size > 1 and np.all(np.diff(k) == 1):
            bg = np.random.Philox(key=self.seed, counter=int(k[0]) + _COUNTER_OFFSET)
            return _uniform_from_raw(bg.random_raw(4 * k.size).reshape(k.size, 4))
        ks, inverse = np.unique(k, return_inverse=True)
        # runs of consecutive sites are generated with one generator each
        breaks = np.flatnonzero(np.diff(ks) != 1) + 1
        starts = np.concatenate(([0], breaks))
        stops = np.concatenate((breaks, [ks.size]))
        uniq = np.empty((ks.size, 4))
        for s, e in zip(starts, stops):
            bg = np.random.Philox(key=self.seed, counter=int(ks[s]) + _COUNTER_OFFSET)
            raw = bg.random_raw(4 * (e - s)).reshape(e - s, 4)
            uniq[s:e] = _uniform_from_raw(raw)
        return uniq[inverse.reshape(-1)]

    def _transform(self, u: np.ndarray) -> np.ndarray:
        dist = self.distribution
        if dist is None or dist["kind"] == "uniform":
            return TWO_PI * u
        if dist["kind"] == "arc":
            return float(dist.get("center", 0.0)) + float(dist["width"]) * (u - 0.5)
        atoms = np.asarray(dist["atoms"], float)
        w = np.asarray(dist.get("weights", np.ones(atoms.size)), float)
        cdf = np.cumsum(w) / w.sum()
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), atoms.size - 1)
        return atoms[idx]

    def _raw(self, k):
        u = self._uniforms(k)
        return self._transform(u[:, 0]), self._transform(u[:, 1]), TWO_PI * u[:, 2]

    def reseeded(self, stream) -> "RandomPhases":
        """Independent model for sub-stream ``stream`` (an int or tuple of ints)."""
        entropy = [self.seed] + list(np.atleast_1d(stream).astype(int))
        key = int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
        return dataclasses.replace(self, seed=key)

    def _variant_fields(self):
        doc = {"seed": self.seed}
        if self.distribution is not None:
            doc["distribution"] = self.distribution
        return doc


def _angle_tuple(values) -> tuple:
    return tuple(wrap_angle(float(v)) for v in values)


@dataclass(frozen=True, kw_only=True)
class PeriodicPhases(PhaseModel):
    """Periodic phases with an optional linear slope in ``alpha``.

    ``theta_k = theta[k mod N]``, ``alpha_k = a*k + pi[k mod N]`` and
    ``gamma_k = gamma[k mod N]`` (zero unless given).
    """

    variant: ClassVar[str] = "periodic"

    theta: tuple
    pi: tuple
    a: float = 0.0
    gamma: tuple | None = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "theta", _angle_tuple(self.theta))
        object.__setattr__(self, "pi", _angle_tuple(self.pi))
        object.__setattr__(self, "a", float(self.a))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _angle_tuple(self.gamma))
        n = len(self.theta)
        if n < 2:
            raise ValueError("periodic phase lists need length N >= 2")
        if len(self.pi) != n or (self.gamma is not None and len(self.gamma) != n):
            raise ValueError("theta, pi (and gamma) lists must share the same length N")

    @property
    def N(self) -> int:
        return len(self.theta)

    @property
    def period(self):
        return self.N

    def _raw(self, k):
        idx = np.mod(k, self.N)
        theta = np.asarray(self.theta)[idx]
        alpha = self.a * k.astype(float) + np.asarray(self.pi)[idx]
        gamma = np.zeros(k.shape) if self.gamma is None else np.asarray(self.gamma)[idx]
        return theta, alpha, gamma

    def _variant_fields(self):
        doc = {"N": self.N, "theta": list(self.theta), "pi": list(self.pi), "a": self.a}
        if self.gamma is not None:
            doc["gamma"] = list(self.gamma)
        return doc


@dataclass(frozen=True, kw_only=True)
class TwoValuedPhases(PhaseModel):
    """Period-two phases ``(theta_e, theta_o)``, ``(alpha_e, alpha_o)`` plus slope ``a``.

    The band spectrum is known in closed form in terms of
    ``delta = alpha_e - alpha_o`` and ``theta_sum = theta_e + theta_o``.
    """

    variant: ClassVar[str] = "two_valued"

    theta_e: float
    theta_o: float
    alpha_e: float
    alpha_o: float
    a: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        for name in ("theta_e", "theta_o", "alpha_e", "alpha_o"):
            object.__setattr__(self, name, wrap_angle(float(getattr(self, name))))
        object.__setattr__(self, "a", float(self.a))

    @classmethod
    def from_invariants(cls, delta, theta_sum, a=0.0, *, t, **kw) -> "TwoValuedPhases":
        """Build a representative model with the given ``delta`` and ``theta_sum``."""
        return cls(t=t, theta_e=theta_sum, theta_o=0.0, alpha_e=delta, alpha_o=0.0, a=a, **kw)

    @property
    def delta(self) -> float:
        return wrap_angle(self.alpha_e - self.alpha_o)

    @property
    def theta_sum(self) -> float:
        return wrap_angle(self.theta_e + self.theta_o)

    @property
    def period(self):
        return 2

    def as_periodic(self) -> PeriodicPhases:
        return PeriodicPhases(t=self.t, theta=(self.theta_e, self.theta_o),
                              pi=(self.alpha_e, self.alpha_o), a=self.a,
                              t_profile=self.t_profile, defects=self.defects, gauge=self.gauge)

    @property
    def theta(self):
        return (self.theta_e, self.theta_o)

    @property
    def pi(self):
        return (self.alpha_e, self.alpha_o)

    @property
    def gamma(self):
        return None

    @property
    def N(self):
        return 2

    def _raw(self, k):
        even = (k % 2) == 0
        theta = np.where(even, self.theta_e, self.theta_o)
        alpha = self.a * k.astype(float) + np.where(even, self.alpha_e, self.alpha_o)
        return theta, alpha, np.zeros(k.shape)

    def _variant_fields(self):
        return {"N": 2, "theta": [self.theta_e, self.theta_o],
                "pi": [self.alpha_e, self.alpha_o], "a": self.a}


@dataclass(frozen=True, kw_only=True)
class AlmostPeriodicPhases(PhaseModel):
    """Quasi-periodic phases ``theta_k = 2*pi*beta*k + theta0``, ``alpha_k = alpha0``."""

    variant: ClassVar[str] = "almost_periodic"

    beta: float
    theta0: float = 0.0
    alpha0: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < float(self.beta) < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "theta0", wrap_angle(float(self.theta0)))
        object.__setattr__(self, "alpha0", wrap_angle(float(self.alpha0)))

    def _raw(self, k):
        # reduce beta*k mod 1 in float before scaling, to keep precision for large k
        frac = np.mod(self.beta * k.astype(float), 1.0)
        theta = TWO_PI * frac + self.theta0
        return theta, np.full(k.shape, self.alpha0), np.zeros(k.shape)

    def _variant_fields(self):
        doc = {"beta": self.beta, "theta0": self.theta0}
        if self.alpha0:
            doc["alpha0"] = self.alpha0
        return doc


@dataclass(frozen=True, kw_only=True)
class ExplicitPhases(PhaseModel):
    """Phases given as finite lists starting at site ``start``.

    Outside the listed sites the lists are repeated (``extension="periodic"``)
    or the phases are zero (``extension="zero"``).
    """

    variant: ClassVar[str] = "explicit"

    theta: tuple
    alpha: tuple
    gamma: tuple | None = None
    start: int = 0
    extension: str = "periodic"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "theta", _angle_tuple(self.theta))
        object.__setattr__(self, "alpha", _angle_tuple(self.alpha))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _angle_tuple(self.gamma))
        n = len(self.theta)
        if n == 0 or len(self.alpha) != n or (self.gamma is not None and len(self.gamma) != n):
            raise ValueError("explicit lists must be non-empty and of equal length")
        if self.extension not in ("periodic", "zero"):
            raise ValueError("extension must be 'periodic' or 'zero'")
        object.__setattr__(self, "start", int(self.start))

    @property
    def period(self):
        return len(self.theta) if self.extension == "periodic" else None

    def _raw(self, k):
        n = len(self.theta)
        rel = k - self.start
        idx = np.mod(rel, n)
        gam = np.zeros(n) if self.gamma is None else np.asarray(self.gamma)
        theta = np.asarray(self.theta)[idx]
        alpha = np.asarray(self.alpha)[idx]
        gamma = gam[idx]
        if self.extension == "zero":
            outside = (rel < 0) | (rel >= n)
            theta, alpha, gamma = (np.where(outside, 0.0, x) for x in (theta, alpha, gamma))
        return theta, alpha, gamma

    def _variant_fields(self):
        doc = {"theta": list(self.theta), "alpha": list(self.alpha), "start": self.start,
               "extension": self.extension}
        if self.gamma is not None:
            doc["gamma"] = list(self.gamma)
        return doc


@dataclass(frozen=True, kw_only=True)
class EvenExtension(PhaseModel):
    """Mirror model: phases and coupling at site ``k`` are those of ``base`` at ``|k|``.

    The ``t`` field is ignored in favour of ``base``; it is kept only so the
    common fields exist.
    """

    variant: ClassVar[str] = "even"

    base: PhaseModel
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.base.t))
        object.__setattr__(self, "t_profile", self.base.t_profile)
        super().__post_init__()

    def _raw(self, k):
        return self.base.phases(np.abs(k))

    def t_at(self, sites):
        return self.base.t_at(np.abs(_as_sites(sites)))

    def _variant_fields(self):
        return {"base": self.base.to_dict()}

    def to_dict(self):
        doc = {"variant": self.variant, "base": self.base.to_dict()}
        if self.defects:
            doc["defects"] = [list(d) for d in self.defects]
        if self.gauge != "native":
            doc["gauge"] = self.gauge
        return doc


_VARIANTS = {cls.variant: cls for cls in
             (RandomPhases, PeriodicPhases, TwoValuedPhases, AlmostPeriodicPhases,
              ExplicitPhases, EvenExtension)}


def _need(doc, key, prefix):
    if key not in doc:
        raise ConfigError("missing required field", field=prefix + key)
    return doc[key]


def model_from_dict(doc: Mapping, _prefix: str = "") -> PhaseModel:
    """Build a :class:`PhaseModel` from its JSON document.

    Raises
    ------
    ConfigError
        With the dotted field path for missing or invalid entries.
    """
    if not isinstance(doc, Mapping):
        raise ConfigError("model document must be a JSON object", field=_prefix.rstrip(".") or None)
    variant = _need(doc, "variant", _prefix)
    if variant not in _VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {sorted(_VARIANTS)}",
                          field=_prefix + "variant")
    common = {}
    if "t_profile" in doc:
        tp = doc["t_profile"]
        try:
            common["t_profile"] = TProfile(kind=tp["kind"], c=float(tp["c"]), p=float(tp["p"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid t_profile: {exc}", field=_prefix + "t_profile") from exc
    if "defects" in doc:
        common["defects"] = tuple(tuple(d) for d in doc["defects"])
    if "gauge" in doc:
        common["gauge"] = doc["gauge"]
    try:
        if variant == "even":
            base = model_from_dict(_need(doc, "base", _prefix), _prefix + "base.")
            common.pop("t_profile", None)
            return EvenExtension(base=base, **common)
        t = float(_need(doc, "t", _prefix))
        if variant == "random":
            return RandomPhases(t=t, seed=int(_need(doc, "seed", _prefix)),
                                distribution=doc.get("distribution"), **common)
        if variant == "periodic":
            theta = _need(doc, "theta", _prefix)
            if "N" in doc and int(doc["N"]) != len(theta):
                raise ConfigError("N does not match the length of theta", field=_prefix + "N")
            return PeriodicPhases(t=t, theta=theta, pi=_need(doc, "pi", _prefix),
                                  a=float(doc.get("a", 0.0)), gamma=doc.get("gamma"), **common)
        if variant == "two_valued":
            theta = _need(doc, "theta", _prefix)
            pi = _need(doc, "pi", _prefix)
            if len(theta) != 2 or len(pi) != 2:
                raise ConfigError("two_valued needs theta and pi of length 2", field=_prefix + "theta")
            return TwoValuedPhases(t=t, theta_e=theta[0], theta_o=theta[1], alpha_e=pi[0],
                                   alpha_o=pi[1], a=float(doc.get("a", 0.0)), **common)
        if variant == "almost_periodic":
            return AlmostPeriodicPhases(t=t, beta=float(_need(doc, "beta", _prefix)),
                                        theta0=float(doc.get("theta0", 0.0)),
                                        alpha0=float(doc.get("alpha0", 0.0)), **common)
        return ExplicitPhases(t=t, theta=_need(doc, "theta", _prefix),
                              alpha=_need(doc, "alpha", _prefix), gamma=doc.get("gamma"),
                              start=int(doc.get("start", 0)),
                              extension=doc.get("extension", "periodic"), **common)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=_prefix.rstrip(".") or "model") from exc


def require_variant(model: PhaseModel, *classes):
    """Raise :class:`WrongVariantError` unless ``model`` is one of ``classes``."""
    if not isinstance(model, classes):
        names = ", ".join(c.variant for c in classes)
        raise WrongVariantError(f"expected a model of variant {names}, got {model.variant!r}")
    return model

"""Gauge (Carathéodory) metric, the 4/K sandwich, and Schwarz-type bounds.

The gauge metric F_C pulls a tangent back to the origin with a normalizing
automorphism and measures it with the domain's Minkowski gauge.  For the
matrix domains the pullback at the base point is V -> P^{1/2} V Q^{1/2}, so
F_C^2 is the top eigenvalue of M = P V Q V*; on the Lie ball it has a closed
form in the two invariants (r, s).  Both reduce to the plain gauge at 0.

Against any invariant metric F with curvature pinched in [-K1, -K2] the
gauge satisfies the two-sided bound

    (4/K1) F_C^2  <=  F^2  <=  (4/K2) F_C^2,

and holomorphic maps obey F_2(f(Z); df V) <= sqrt(K1/K2) F_1(Z;V); this
module samples both statements and generates the map corpus used to probe
the latter.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, NumericError, StructureError
from . import automorphisms as am
from . import domains
from . import numkernel
from .curvature import curvature_bounds, lie_representative
from .domains import DomainSpec
from .metrics import MetricSpec, _lie_ball_matrix, eval2_many

BISECTION_STEPS = 60
PROBE_COUNT = 200
RESCALE_CAP = 20
CORPUS_RHO = 0.8


@dataclass(frozen=True)
class PoincareDisc:
    k1: float  # the disc is rescaled to constant curvature -k1

    def __post_init__(self):
        if not self.k1 > 0.0:
            raise StructureError(f"curvature level must be positive, got {self.k1}")


@dataclass(frozen=True)
class SandwichReport:
    passed: bool
    worst_lower: float   # min over samples of (F^2 - (4/K1) F_C^2) / F^2
    worst_upper: float   # min over samples of ((4/K2) F_C^2 - F^2) / F^2
    eq_lower: float      # relative residual at the K1 extremizer
    eq_upper: float      # relative residual at the K2 extremizer
    witness: Optional[tuple]


@dataclass(frozen=True)
class SchwarzReport:
    bound: float         # sqrt(K1/K2)
    min_margin: float    # min of bound*F1 - f*F2
    min_margin_rel: float
    sup_ratio: float     # max of (f*F2)/F1 over the samples
    violation: bool
    witness: Optional[tuple]


# ---------------------------------------------------------------------------
# gauge metric


def caratheodory_many(spec: DomainSpec, zs, vs) -> np.ndarray:
    """F_C(Z;V) over stacks of interior points and tangents (unchecked)."""
    zs = np.asarray(zs, dtype=np.complex128)
    vs = np.asarray(vs, dtype=np.complex128)
    if spec.kind == "IV":
        m, delta = _lie_ball_matrix(zs)
        r = np.einsum("...i,...ij,...j->...", vs, m, np.conj(vs)).real / delta**2
        p2 = np.abs(np.sum(vs * vs, axis=-1)) ** 2
        s = np.divide(delta**2 * p2, (r * delta**2) ** 2,
                      out=np.zeros_like(r), where=r > 0.0)
        s = np.clip(s, 0.0, 1.0)
        return np.sqrt(r * (1.0 + np.sqrt(1.0 - s)))
    flat_z = zs.reshape((-1,) + spec.ambient_shape)
    flat_v = vs.reshape((-1,) + spec.ambient_shape)
    out = np.empty(flat_z.shape[0])
    zc = np.conj(np.swapaxes(flat_z, -1, -2))
    mdim, ndim = spec.ambient_shape
    ps = np.linalg.inv(np.eye(mdim) - flat_z @ zc)
    qs = np.linalg.inv(np.eye(ndim) - zc @ flat_z)
    for i in range(flat_z.shape[0]):
        w = numkernel.pd_sqrt(ps[i]) @ flat_v[i] @ numkernel.pd_sqrt(qs[i])
        sv = numkernel.singular_values(w)
        out[i] = sv[0]
    return out.reshape(zs.shape[: zs.ndim - 2])


def caratheodory(spec: DomainSpec, z, v) -> float:
    """Carathéodory (= Kobayashi) metric of the domain at (Z; V)."""
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if not domains.contains(spec, z):
        raise DomainError(f"base point is not interior to {spec}")
    return float(caratheodory_many(spec, z[None], v[None])[0])


def bisection_gauge(spec: DomainSpec, w, steps: int = BISECTION_STEPS) -> float:
    """Gauge by bisecting the ray boundary crossing; oracle for closed forms."""
    w = np.asarray(w, dtype=np.complex128)
    if float(np.max(np.abs(w))) == 0.0:
        return 0.0
    # gauge(w) <= sqrt(2)*frobenius on every type, so w/hi is interior
    hi = 2.0 * float(np.linalg.norm(w)) + 1e-9
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if domains.contains(spec, w / mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# sandwich


def _profile_tangent(spec: DomainSpec, profile) -> np.ndarray:
    """Embed a singular-value (or [s]) profile as a concrete origin tangent."""
    profile = np.asarray(profile, dtype=float)
    if spec.kind == "IV":
        reps = lie_representative(profile[0])
        if spec.dims[0] > 2:
            reps = np.concatenate([reps, np.zeros(spec.dims[0] - 2)])
        return reps
    out = np.zeros(spec.ambient_shape, dtype=np.complex128)
    if spec.kind == "III":
        for i, d in enumerate(profile):
            out[2 * i, 2 * i + 1] = d
            out[2 * i + 1, 2 * i] = -d
    else:
        for i, d in enumerate(profile):
            out[i, i] = d
    return out


def verify_sandwich(metric: MetricSpec, k1: float, k2: float,
                    n_samples: int = 10_000, seed: int = 0,
                    slack: float = 1e-8) -> SandwichReport:
    """Sample the two-sided gauge bound and probe tightness at extremizers."""
    spec = metric.domain
    rng = np.random.default_rng(seed)
    zs = np.stack(
        [domains.sample_point(spec, seed=int(rng.integers(2**63)))
         for _ in range(n_samples)]
    )
    vs = np.stack(
        [domains.sample_tangent(spec, seed=int(rng.integers(2**63)))
         for _ in range(n_samples)]
    )
    f2 = eval2_many(metric, zs, vs)
    fc2 = caratheodory_many(spec, zs, vs) ** 2
    lower = (f2 - (4.0 / k1) * fc2) / f2
    upper = ((4.0 / k2) * fc2 - f2) / f2
    worst_lower = float(np.min(lower))
    worst_upper = float(np.min(upper))
    witness = None
    if worst_lower < -slack:
        i = int(np.argmin(lower))
        witness = ("lower", zs[i], vs[i], float(f2[i]), float(fc2[i]))
    elif worst_upper < -slack:
        i = int(np.argmin(upper))
        witness = ("upper", zs[i], vs[i], float(f2[i]), float(fc2[i]))

    report = curvature_bounds(metric, pair_draws=0)
    origin = np.zeros(spec.ambient_shape, dtype=np.complex128)
    v_min = _profile_tangent(spec, report.argmin_profile)
    v_max = _profile_tangent(spec, report.argmax_profile)
    f2_min = eval2_many(metric, origin, v_min)
    f2_max = eval2_many(metric, origin, v_max)
    g_min = domains.minkowski_gauge(spec, v_min) ** 2
    g_max = domains.minkowski_gauge(spec, v_max) ** 2
    eq_lower = float(abs(f2_min - (4.0 / k1) * g_min) / f2_min)
    eq_upper = float(abs(f2_max - (4.0 / k2) * g_max) / f2_max)
    passed = (worst_lower >= -slack and worst_upper >= -slack
              and eq_lower <= 1e-4 and eq_upper <= 1e-4)
    return SandwichReport(passed, worst_lower, worst_upper,
                          eq_lower, eq_upper, witness)


# ---------------------------------------------------------------------------
# Poincaré disc scaled to curvature -K1


def poincare_eval(p: PoincareDisc, z: complex, v: complex) -> float:
    """(2/sqrt(K1)) |v| / (1 - |z|^2)."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z):.6f} is not inside the unit disc")
    return 2.0 / np.sqrt(p.k1) * abs(complex(v)) / (1.0 - abs(z) ** 2)


def poincare_curvature_fd(p: PoincareDisc, z: complex, step: float = 1e-3) -> float:
    """Gaussian curvature of the disc metric by a 5-point log-Laplacian."""
    lam = lambda w: np.log(poincare_eval(p, w, 1.0))
    z = complex(z)
    h = step
    lap = (lam(z + h) + lam(z - h) + lam(z + 1j * h) + lam(z - 1j * h)
           - 4.0 * lam(z)) / h**2
    return float(-lap / poincare_eval(p, z, 1.0) ** 2)


# ---------------------------------------------------------------------------
# holomorphic map corpus


def _rescaled(body, factor: float):
    if isinstance(body, am.ScalarSlice):
        return am.ScalarSlice(body.entry, factor * body.w1)
    if isinstance(body, am.ConstantMap):
        return am.ConstantMap(factor * body.w0)
    if isinstance(body, am.SandwichScale):
        return am.SandwichScale(factor * body.left, body.right)
    if isinstance(body, am.VectorLinear):
        return am.VectorLinear(factor * body.alpha, body.d)
    if isinstance(body, am.MatrixPolynomial):
        return am.MatrixPolynomial(
            tuple((d, factor * c) for d, c in body.coeffs)
        )
    return None


def _unit_gauge_tangent(spec: DomainSpec, seed: int) -> np.ndarray:
    w = domains.sample_tangent(spec, seed=seed)
    return w / domains.minkowski_gauge(spec, w)


def _pad_compatible(source: DomainSpec, target: DomainSpec) -> bool:
    if source.kind == "IV" or target.kind == "IV":
        return False
    sm, sn = source.ambient_shape
    tm, tn = target.ambient_shape
    if sm > tm or sn > tn:
        return False
    if target.kind == "I":
        return True  # any matrix class includes into the rectangle
    # symmetric/skew targets need the same symmetry from the source
    return source.kind == target.kind


def _corpus_kinds(source: DomainSpec, target: DomainSpec):
    kinds = ["constant", "slice"]
    if source == target:
        kinds += ["auto", "chain"]
        if source.kind == "IV":
            kinds += ["contract"]
        else:
            kinds += ["contract", "poly"]
    if source != target and _pad_compatible(source, target):
        kinds += ["pad", "pad_contract"]
    return kinds


def _contraction_body(spec: DomainSpec, rng) -> object:
    rho = CORPUS_RHO * float(rng.uniform(0.5, 1.0))
    if spec.kind == "IV":
        theta = float(rng.uniform(0.0, 2 * np.pi))
        d = am._haar_orthogonal(spec.dims[0], rng)
        return am.VectorLinear(rho * np.exp(1j * theta), d)
    mdim, ndim = spec.ambient_shape
    if spec.kind == "I":
        return am.SandwichScale(
            rho * am._haar_unitary(mdim, rng), am._haar_unitary(ndim, rng)
        )
    a = np.sqrt(rho) * am._haar_unitary(mdim, rng)
    return am.SandwichScale(a, a.T)  # A Z A' keeps the symmetry class


def _polynomial_body(spec: DomainSpec, rng) -> object:
    degrees = (1, 3) if spec.kind == "III" else (1, 2, 3)
    coeffs = []
    for d in degrees:
        if rng.uniform() < 0.7:
            c = 0.2 * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
            coeffs.append((d, complex(c)))
    if not coeffs:
        coeffs = [(1, 0.5 + 0.0j)]
    return am.MatrixPolynomial(tuple(coeffs))


def generate_maps(source: DomainSpec, target: DomainSpec, seed: int = 0,
                  count: int = 50):
    """Corpus of holomorphic maps source -> target, probe-checked for range."""
    rng = np.random.default_rng(seed)
    probes = np.stack(
        [domains.sample_point(source, seed=int(rng.integers(2**63)))
         for _ in range(PROBE_COUNT)]
    )

    def admitted(m: am.HoloMap):
        body = m.body
        for _ in range(RESCALE_CAP + 1):
            candidate = am.HoloMap(source, target, body)
            images = am.apply(candidate, probes)
            if all(domains.contains(target, img) for img in images):
                return candidate
            body = _rescaled(body, 0.5)
            if body is None:
                return None
        return None

    maps = []
    if source == target:
        maps.append(am.identity_map(source))
    kinds = _corpus_kinds(source, target)
    ki = 0
    attempts = 0
    while len(maps) < count and attempts < 20 * count:
        attempts += 1
        kind = kinds[ki % len(kinds)]
        ki += 1
        s = int(rng.integers(2**63))
        if kind == "constant":
            cand = am.HoloMap(
                source, target, am.ConstantMap(domains.sample_point(target, seed=s))
            )
        elif kind == "slice":
            if source.kind == "IV":
                entry = (int(rng.integers(source.dims[0])),)
            else:
                sm, sn = source.ambient_shape
                entry = (int(rng.integers(sm)), int(rng.integers(sn)))
            w1 = CORPUS_RHO * _unit_gauge_tangent(target, s)
            cand = am.HoloMap(source, target, am.ScalarSlice(entry, w1))
        elif kind == "auto":
            cand = am.random_automorphism(source, seed=s)
        elif kind == "chain":
            inner = am.random_automorphism(source, seed=s)
            outer = am.HoloMap(source, target, _contraction_body(source, rng))
            cand = am.compose(outer, inner)
        elif kind == "contract":
            cand = am.HoloMap(source, target, _contraction_body(source, rng))
        elif kind == "poly":
            cand = am.HoloMap(source, target, _polynomial_body(source, rng))
        elif kind == "pad":
            cand = am.HoloMap(source, target, am.PadEmbed())
        else:  # pad_contract
            pad = am.HoloMap(source, target, am.PadEmbed())
            outer = am.HoloMap(target, target, _contraction_body(target, rng))
            cand = am.compose(outer, pad)
        ok = admitted(cand)
        if ok is not None:
            maps.append(ok)
    if len(maps) < count:
        raise NumericError(
            f"could not assemble {count} admissible maps for {source}->{target}"
        )
    return maps[:count]


# ---------------------------------------------------------------------------
# the Schwarz inequality harness


def schwarz_check(f: am.HoloMap, metric1: MetricSpec, metric2: MetricSpec,
                  k1: float, k2: float, n_samples: int = 100,
                  seed: int = 0) -> SchwarzReport:
    """Margins of sqrt(K1/K2) * F1 - f*F2 over sampled (Z;V)."""
    if f.source != metric1.domain or f.target != metric2.domain:
        raise StructureError("map endpoints do not match the metric domains")
    bound = float(np.sqrt(k1 / k2))
    rng = np.random.default_rng(seed)
    spec = metric1.domain
    zs = np.stack(
        [domains.sample_point(spec, seed=int(rng.integers(2**63)))
         for _ in range(n_samples)]
    )
    vs = np.stack(
        [domains.sample_tangent(spec, seed=int(rng.integers(2**63)))
         for _ in range(n_samples)]
    )
    f1 = np.sqrt(eval2_many(metric1, zs, vs))
    imgs = am.apply(f, zs)
    dvs = am.differential(f, zs, vs)
    f2 = np.sqrt(np.maximum(eval2_many(metric2, imgs, dvs), 0.0))
    margins = bound * f1 - f2
    rel = margins / f1
    i = int(np.argmin(rel))
    min_rel = float(rel[i])
    violation = min_rel < -1e-8
    witness = (zs[i], vs[i], float(f1[i]), float(f2[i])) if violation else None
    return SchwarzReport(
        bound=bound,
        min_margin=float(np.min(margins)),
        min_margin_rel=min_rel,
        sup_ratio=float(np.max(f2 / f1)),
        violation=violation,
        witness=witness,
    )

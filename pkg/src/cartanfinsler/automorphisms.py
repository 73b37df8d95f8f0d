"""Holomorphic automorphisms of the classical domains, plus corpus map bodies.

Every map is a HoloMap(source, target, body).  Bodies are small frozen
dataclasses; apply/differential dispatch on the body type.  All formulas are
written so that the point (and tangent) arguments may carry leading batch
axes — matrix bodies accept (..., m, n) stacks, vector bodies (..., N).

The normalizing automorphism of a matrix domain at Z0 is
    Z  |->  A (Z - Z0) (I - Z0* Z)^{-1} D^{-1},
with A, D the Hermitian positive roots of (I - Z0 Z0*)^{-1} and
(I - Z0* Z0)^{-1}; for the symmetric/skew domains D = conj(A).  The Lie-ball
version goes through the real 2xN matrix X0 and the auxiliary map
u(z) = ((1+zz')/2, (1-zz')/(2i)).
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, StructureError
from . import domains
from .domains import DomainSpec
from . import numkernel

COND_LIMIT = 1e-12  # min-eigenvalue cutoff for (I - Z0 Z0*) near the boundary
NEWTON_CAP = 50
NEWTON_TOL = 1e-12


# ---------------------------------------------------------------------------
# map bodies


@dataclass(frozen=True)
class MatrixMobius:
    """A (Z - Z0) (I - Z0* Z)^{-1} D^{-1} on the matrix domains."""
    z0: np.ndarray
    a: np.ndarray
    d_inv: np.ndarray


@dataclass(frozen=True)
class MatrixMobiusInverse:
    """Closed-form inverse: W |-> (A + W D Z0*)^{-1} (W D + A Z0)."""
    z0: np.ndarray
    a: np.ndarray
    d: np.ndarray


@dataclass(frozen=True)
class LieBallMobius:
    """Lie-ball normalizing map through X0 and the quadric embedding."""
    z0: np.ndarray
    x0: np.ndarray
    a: np.ndarray  # 2x2 real PD
    d: np.ndarray  # NxN real PD


@dataclass(frozen=True)
class SandwichScale:
    """Z |-> left @ Z @ right (isotropy rotations, contractions, congruences)."""
    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class VectorLinear:
    """z |-> alpha * z @ d on the Lie ball (isotropy when |alpha| = 1)."""
    alpha: complex
    d: np.ndarray


@dataclass(frozen=True)
class MapChain:
    """Composition; maps applied right to left (last entry acts first)."""
    maps: tuple


@dataclass(frozen=True)
class ConstantMap:
    w0: np.ndarray


@dataclass(frozen=True)
class ScalarSlice:
    """Z |-> Z[entry] * w1: a disc-through-w1 slice of the target."""
    entry: tuple
    w1: np.ndarray


@dataclass(frozen=True)
class PadEmbed:
    """Zero-pad a matrix point into a larger (or reinterpreted) matrix domain."""


@dataclass(frozen=True)
class MatrixPolynomial:
    """Z |-> sum_d coeffs[d] Z^d on a square matrix domain (degrees >= 1)."""
    coeffs: tuple  # ((degree, complex coefficient), ...)


@dataclass(frozen=True)
class NewtonInverse:
    """Inverse of a Lie-ball automorphism by damped Newton iteration."""
    inner: "HoloMap"
    z_init: np.ndarray


@dataclass(frozen=True)
class HoloMap:
    source: DomainSpec
    target: DomainSpec
    body: object

    def __call__(self, z):
        return apply(self, z)


# ---------------------------------------------------------------------------
# constructors


def _haar_unitary(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def _haar_orthogonal(n, rng):
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diagonal(r))


def _inv_gram_root(gram):
    """Hermitian PD root of gram^{-1}, with a boundary conditioning guard."""
    w, u = numkernel.hermitian_eigs(gram)
    if w[-1] <= COND_LIMIT * max(1.0, w[0]):
        raise NumericError(
            f"base point too close to the boundary: min eigenvalue {w[-1]:.3e}"
        )
    return (u / np.sqrt(w)) @ u.conj().T


def _x0_matrix(z0):
    """Real 2xN parameter matrix of the Lie-ball normalizing map."""
    a = z0 @ z0
    denom = 1.0 - abs(a) ** 2
    if denom <= COND_LIMIT:
        raise NumericError("base point too close to the Lie-ball boundary")
    row1 = (np.conj(a) - 1.0) * z0 + (a - 1.0) * np.conj(z0)
    row2 = 1j * (a + 1.0) * np.conj(z0) - 1j * (np.conj(a) + 1.0) * z0
    x0 = (-1.0 / denom) * np.stack([row1, row2])
    return x0.real


def identity_map(spec: DomainSpec) -> HoloMap:
    if spec.kind == "IV":
        body = VectorLinear(1.0 + 0.0j, np.eye(spec.dims[0]))
    else:
        m, n = spec.ambient_shape
        body = SandwichScale(np.eye(m), np.eye(n))
    return HoloMap(spec, spec, body)


def normalizing_automorphism(spec: DomainSpec, z0) -> HoloMap:
    """The automorphism sending the interior point z0 to the origin."""
    z0 = np.asarray(z0, dtype=np.complex128)
    if not domains.contains(spec, z0):
        raise DomainError(f"base point is not interior to {spec}")
    if spec.kind == "IV":
        x0 = _x0_matrix(z0)
        a = _inv_gram_root(np.eye(2) - x0 @ x0.T).real
        d = _inv_gram_root(np.eye(z0.size) - x0.T @ x0).real
        return HoloMap(spec, spec, LieBallMobius(z0, x0, a, d))
    m, n = spec.ambient_shape
    a = _inv_gram_root(np.eye(m) - z0 @ z0.conj().T)
    if spec.kind == "I":
        d = _inv_gram_root(np.eye(n) - z0.conj().T @ z0)
    else:
        d = np.conj(a)
    return HoloMap(spec, spec, MatrixMobius(z0, a, np.linalg.inv(d)))


def isotropy_element(spec: DomainSpec, seed: int) -> HoloMap:
    """A random origin-fixing automorphism (Haar rotation data)."""
    rng = np.random.default_rng(seed)
    if spec.kind == "IV":
        theta = rng.uniform(0.0, 2.0 * np.pi)
        d = _haar_orthogonal(spec.dims[0], rng)
        return HoloMap(spec, spec, VectorLinear(np.exp(1j * theta), d))
    if spec.kind == "I":
        m, n = spec.dims
        a = _haar_unitary(m, rng)
        d = _haar_unitary(n, rng)
        return HoloMap(spec, spec, SandwichScale(a, d.conj().T))
    a = _haar_unitary(spec.dims[0], rng)
    return HoloMap(spec, spec, SandwichScale(a, a.T))


def random_automorphism(spec: DomainSpec, seed: int) -> HoloMap:
    """Isotropy composed with a normalizing map at a random interior point."""
    rng = np.random.default_rng(seed)
    z0 = domains.sample_point(spec, int(rng.integers(2**63)))
    iso = isotropy_element(spec, int(rng.integers(2**63)))
    return compose(iso, normalizing_automorphism(spec, z0))


def compose(*maps) -> HoloMap:
    """Function composition: compose(f, g) applies g first, then f."""
    if len(maps) == 1 and isinstance(maps[0], (list, tuple)):
        maps = tuple(maps[0])
    if not maps:
        raise StructureError("cannot compose an empty list of maps")
    for f, g in zip(maps[:-1], maps[1:]):
        if f.source != g.target:
            raise StructureError(
                f"composition mismatch: {g.target} feeds into {f.source}"
            )
    flat = []
    for f in maps:
        if isinstance(f.body, MapChain):
            flat.extend(f.body.maps)
        else:
            flat.append(f)
    return HoloMap(maps[-1].source, maps[0].target, MapChain(tuple(flat)))


# ---------------------------------------------------------------------------
# evaluation


def _mobius_core(body: MatrixMobius, z):
    z0s = body.z0.conj().T
    n = body.z0.shape[1]
    s = np.linalg.inv(np.eye(n) - z0s @ z)
    return s


def apply(m: HoloMap, z):
    """Evaluate the map at a point (or a stack of points)."""
    z = np.asarray(z, dtype=np.complex128)
    b = m.body
    try:
        if isinstance(b, MatrixMobius):
            s = _mobius_core(b, z)
            return b.a @ (z - b.z0) @ s @ b.d_inv
        if isinstance(b, MatrixMobiusInverse):
            z0s = b.z0.conj().T
            wd = z @ b.d
            return np.linalg.solve(b.a + wd @ z0s, wd + b.a @ b.z0)
        if isinstance(b, LieBallMobius):
            a = np.sum(z * z, axis=-1)
            u = np.stack([(1.0 + a) / 2.0, (1.0 - a) / 2.0j], axis=-1)
            ae = b.a @ np.array([1.0, 1.0j])
            beta = (u - z @ b.x0.T) @ ae
            num = (z - u @ b.x0) @ b.d
            return num / beta[..., None]
        if isinstance(b, SandwichScale):
            return b.left @ z @ b.right
        if isinstance(b, VectorLinear):
            return b.alpha * (z @ b.d)
        if isinstance(b, MapChain):
            out = z
            for f in reversed(b.maps):
                out = apply(f, out)
            return out
        if isinstance(b, ConstantMap):
            batch = z.shape[: z.ndim - len(m.source.ambient_shape)]
            return np.broadcast_to(b.w0, batch + b.w0.shape).copy()
        if isinstance(b, ScalarSlice):
            c = z[(...,) + b.entry]
            return c[(...,) + (None,) * b.w1.ndim] * b.w1
        if isinstance(b, PadEmbed):
            mt, nt = m.target.ambient_shape
            out = np.zeros(z.shape[:-2] + (mt, nt), dtype=np.complex128)
            out[..., : z.shape[-2], : z.shape[-1]] = z
            return out
        if isinstance(b, MatrixPolynomial):
            out = np.zeros_like(z)
            power = z
            last = 1
            for deg, coeff in sorted(b.coeffs):
                for _ in range(deg - last):
                    power = power @ z
                last = deg
                out = out + coeff * power
            return out
        if isinstance(b, NewtonInverse):
            return _newton_apply(b, z)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular intermediate inverse: {exc}") from exc
    raise StructureError(f"unknown map body {type(b).__name__}")


def differential(m: HoloMap, z, v):
    """Push a tangent vector forward through the map at z (analytic)."""
    z = np.asarray(z, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    b = m.body
    try:
        if isinstance(b, MatrixMobius):
            s = _mobius_core(b, z)
            z0s = b.z0.conj().T
            inner = v + (z - b.z0) @ s @ z0s @ v
            return b.a @ inner @ s @ b.d_inv
        if isinstance(b, MatrixMobiusInverse):
            z0s = b.z0.conj().T
            wd = z @ b.d
            lhs = b.a + wd @ z0s
            out = np.linalg.solve(lhs, wd + b.a @ b.z0)  # = apply(m, z)
            n = b.z0.shape[1]
            return np.linalg.solve(lhs, v @ b.d @ (np.eye(n) - z0s @ out))
        if isinstance(b, LieBallMobius):
            a = np.sum(z * z, axis=-1)
            da = 2.0 * np.sum(z * v, axis=-1)
            u = np.stack([(1.0 + a) / 2.0, (1.0 - a) / 2.0j], axis=-1)
            du = np.stack([da / 2.0, -da / 2.0j], axis=-1)
            ae = b.a @ np.array([1.0, 1.0j])
            beta = (u - z @ b.x0.T) @ ae
            dbeta = (du - v @ b.x0.T) @ ae
            num = (z - u @ b.x0) @ b.d
            dnum = (v - du @ b.x0) @ b.d
            return (dnum * beta[..., None] - num * dbeta[..., None]) / (beta**2)[..., None]
        if isinstance(b, SandwichScale):
            return b.left @ v @ b.right
        if isinstance(b, VectorLinear):
            return b.alpha * (v @ b.d)
        if isinstance(b, MapChain):
            zc, vc = z, v
            for f in reversed(b.maps):
                vc = differential(f, zc, vc)
                zc = apply(f, zc)
            return vc
        if isinstance(b, ConstantMap):
            batch = z.shape[: z.ndim - len(m.source.ambient_shape)]
            return np.zeros(batch + b.w0.shape, dtype=np.complex128)
        if isinstance(b, ScalarSlice):
            c = v[(...,) + b.entry]
            return c[(...,) + (None,) * b.w1.ndim] * b.w1
        if isinstance(b, PadEmbed):
            mt, nt = m.target.ambient_shape
            out = np.zeros(v.shape[:-2] + (mt, nt), dtype=np.complex128)
            out[..., : v.shape[-2], : v.shape[-1]] = v
            return out
        if isinstance(b, MatrixPolynomial):
            out = np.zeros_like(v)
            for deg, coeff in b.coeffs:
                # d(Z^deg)[V] = sum_{j} Z^j V Z^{deg-1-j}
                for j in range(deg):
                    term = v
                    for _ in range(j):
                        term = z @ term
                    for _ in range(deg - 1 - j):
                        term = term @ z
                    out = out + coeff * term
            return out
        if isinstance(b, NewtonInverse):
            return _newton_differential(b, z, v)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular intermediate inverse: {exc}") from exc
    raise StructureError(f"unknown map body {type(b).__name__}")


def invert(m: HoloMap) -> HoloMap:
    """Inverse automorphism; structural error for non-invertible bodies."""
    b = m.body
    if isinstance(b, MatrixMobius):
        return HoloMap(m.target, m.source,
                       MatrixMobiusInverse(b.z0, b.a, np.linalg.inv(b.d_inv)))
    if isinstance(b, MatrixMobiusInverse):
        return HoloMap(m.target, m.source,
                       MatrixMobius(b.z0, b.a, np.linalg.inv(b.d)))
    if isinstance(b, LieBallMobius):
        return HoloMap(m.target, m.source, NewtonInverse(m, b.z0))
    if isinstance(b, NewtonInverse):
        return b.inner
    if isinstance(b, SandwichScale):
        try:
            left = np.linalg.inv(b.left)
            right = np.linalg.inv(b.right)
        except np.linalg.LinAlgError as exc:
            raise StructureError(f"non-invertible linear map: {exc}") from exc
        return HoloMap(m.target, m.source, SandwichScale(left, right))
    if isinstance(b, VectorLinear):
        if abs(b.alpha) < 1e-300:
            raise StructureError("non-invertible vector scaling")
        return HoloMap(m.target, m.source, VectorLinear(1.0 / b.alpha, b.d.T))
    if isinstance(b, MapChain):
        return compose([invert(f) for f in reversed(b.maps)])
    raise StructureError(f"map body {type(b).__name__} is not invertible")


# ---------------------------------------------------------------------------
# Newton inverse for the Lie ball


def _newton_apply_single(b: NewtonInverse, w):
    spec = b.inner.source
    n = spec.dims[0]
    z = b.z_init.copy()
    eye = np.eye(n)
    res = apply(b.inner, z) - w
    norm = np.linalg.norm(res)
    target = NEWTON_TOL * (1.0 + np.linalg.norm(w))
    for _ in range(NEWTON_CAP):
        if norm <= target:
            return z
        jac = np.stack([differential(b.inner, z, eye[k]) for k in range(n)], axis=1)
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        for _ in range(25):
            z_new = z + lam * step
            if domains.contains(spec, z_new):
                res_new = apply(b.inner, z_new) - w
                if np.linalg.norm(res_new) < norm:
                    break
            lam *= 0.5
        else:
            raise NumericError("Newton inversion stalled (damping exhausted)")
        z, res, norm = z_new, res_new, np.linalg.norm(res_new)
    if norm <= target:
        return z
    raise NumericError(f"Newton inversion did not converge: residual {norm:.3e}")


def _newton_apply(b: NewtonInverse, w):
    if w.ndim == 1:
        return _newton_apply_single(b, w)
    flat = w.reshape(-1, w.shape[-1])
    out = np.stack([_newton_apply_single(b, row) for row in flat])
    return out.reshape(w.shape)


def _newton_differential(b: NewtonInverse, w, v):
    def single(wr, vr):
        z = _newton_apply_single(b, wr)
        n = z.size
        eye = np.eye(n)
        jac = np.stack([differential(b.inner, z, eye[k]) for k in range(n)], axis=1)
        return np.linalg.solve(jac, vr)

    if w.ndim == 1:
        return single(w, v)
    flatw = w.reshape(-1, w.shape[-1])
    flatv = np.broadcast_to(v, w.shape).reshape(-1, w.shape[-1])
    out = np.stack([single(a_, b_) for a_, b_ in zip(flatw, flatv)])
    return out.reshape(w.shape)

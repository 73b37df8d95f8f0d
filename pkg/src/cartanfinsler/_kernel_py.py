"""Pure-numpy eigensolver backend: batched cyclic Jacobi for Hermitian matrices.

Same algorithm as the compiled twin in ``_kernel.pyx``. Here the rotation for
a fixed pivot (p, q) is applied to every matrix in the batch at once with
numpy, which is what keeps this fallback usable on the 1e5-sample
verification suites.
"""
import numpy as np


def jacobi_eigh(a, max_sweeps=100, tol=1e-14, want_vectors=True):
    """Diagonalize a batch of Hermitian matrices by cyclic Jacobi rotations.

    Args:
        a: array (batch, n, n), complex, Hermitian (not checked here).
        max_sweeps: full (p, q) sweeps before giving up.
        tol: per-matrix stop threshold, off-diagonal Frobenius <= tol * ||A||_F.
        want_vectors: accumulate eigenvectors (skipped for eigenvalue scans).

    Returns:
        (w, u, ok): w (batch, n) descending eigenvalues; u (batch, n, n)
        unitary with a = u diag(w) u^H (identity-shaped if not requested);
        ok False when some matrix missed the threshold within max_sweeps.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (batch, n, n) array")
    nb, n, _ = a.shape
    if want_vectors:
        u = np.zeros((nb, n, n), dtype=np.complex128)
        u[:, range(n), range(n)] = 1.0
    else:
        u = None

    if n == 1 or nb == 0:
        w = a[:, range(n), range(n)].real.copy()
        if u is None:
            u = np.broadcast_to(np.eye(n, dtype=np.complex128), (nb, n, n)).copy()
        return w, u, True

    fro = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = tol * fro
    ok = False
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= thresh):
            ok = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q].copy()
                absb = np.abs(apq)
                active = absb > 1e-300
                if not np.any(active):
                    continue
                app = a[:, p, p].real.copy()
                aqq = a[:, q, q].real.copy()
                # angle of the |a_pq|-reduced real 2x2 problem (smaller root);
                # hypot keeps sqrt(1 + tau^2) finite for huge tau
                tau = np.divide(aqq - app, 2.0 * absb,
                                out=np.zeros(nb), where=active)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                phase = np.divide(apq, absb,
                                  out=np.ones(nb, dtype=np.complex128), where=active)
                s = (t * c) * phase
                c = np.where(active, c, 1.0)
                s = np.where(active, s, 0.0)
                sc = np.conj(s)
                # A <- J^H A J with J = I except J[pp]=c, J[pq]=s, J[qp]=-conj(s)
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = colp * c[:, None] - colq * sc[:, None]
                a[:, :, q] = colp * s[:, None] + colq * c[:, None]
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = rowp * c[:, None] - rowq * s[:, None]
                a[:, q, :] = rowp * sc[:, None] + rowq * c[:, None]
                # exact 2x2 block update kills rotation round-off residue
                tb = np.where(active, t * absb, 0.0)
                a[:, p, p] = app - tb
                a[:, q, q] = aqq + tb
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                if want_vectors:
                    ucolp = u[:, :, p].copy()
                    ucolq = u[:, :, q].copy()
                    u[:, :, p] = ucolp * c[:, None] - ucolq * sc[:, None]
                    u[:, :, q] = ucolp * s[:, None] + ucolq * c[:, None]

    w = a[:, range(n), range(n)].real.copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if want_vectors:
        u = np.take_along_axis(u, order[:, None, :], axis=2)
    else:
        u = np.broadcast_to(np.eye(n, dtype=np.complex128), (nb, n, n)).copy()
    return w, u, ok

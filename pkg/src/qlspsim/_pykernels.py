"""Pure-Python (numpy) implementations of the hot kernels.

The compiled module ``_kernels`` exposes the same four functions with the same
signatures. This module is used when the extension is not built, or when
``QLSPSIM_PURE_PYTHON=1`` is set.

The Jacobi kernels here use a round-robin ordering so that every rotation in a
round touches a disjoint pair of indices; one round is then a handful of
vectorised numpy operations instead of n/2 separate rotations.
"""
import numpy as np

_EPS = np.finfo(float).eps


def _round_robin(n):
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        top = players[: m // 2]
        bot = players[m // 2 :][::-1]
        pairs = [(min(a, b), max(a, b)) for a, b in zip(top, bot) if a < n and b < n]
        p = np.array([a for a, _ in pairs], dtype=np.intp)
        q = np.array([b for _, b in pairs], dtype=np.intp)
        rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _rotation(a, d, b, active):
    """Parameters (c, s, e^{-i phase}) of the rotation zeroing b in [[a, b], [b*, d]]."""
    mag = np.abs(b)
    safe = np.where(active, mag, 1.0)
    theta = (d - a) / (2.0 * safe)
    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    ph = np.where(active, np.conj(b) / safe, 1.0)
    c = np.where(active, c, 1.0)
    s = np.where(active, s, 0.0)
    return c, s, ph


def jacobi_eigh(a, tol, max_sweeps):
    a = np.array(a, dtype=np.complex128, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n < 2:
        return a.diagonal().real.copy(), v, 0
    floor = _EPS * max(np.linalg.norm(a), 1e-300) * 1e-2
    rounds = _round_robin(n)
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            app = a[p, p].real
            aqq = a[q, q].real
            apq = a[p, q]
            mag = np.abs(apq)
            active = (mag > tol * np.sqrt(np.abs(app * aqq))) & (mag > floor)
            if not active.any():
                continue
            rotated = True
            c, s, ph = _rotation(app, aqq, apq, active)
            # columns: A J, with J = [[c, s], [-s ph, c ph]]
            cp = a[:, p].copy()
            cq = a[:, q]
            a[:, p] = c * cp - s * ph * cq
            a[:, q] = s * cp + c * ph * cq
            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = c * vp - s * ph * vq
            v[:, q] = s * vp + c * ph * vq
            # rows: J^dagger A
            rp = a[p, :].copy()
            rq = a[q, :]
            a[p, :] = c[:, None] * rp - (s * np.conj(ph))[:, None] * rq
            a[q, :] = s[:, None] * rp + (c * np.conj(ph))[:, None] * rq
            a[p, q] = np.where(active, 0.0, a[p, q])
            a[q, p] = np.where(active, 0.0, a[q, p])
        if not rotated:
            return a.diagonal().real.copy(), v, sweep
    return None, None, max_sweeps


def jacobi_svd(m, tol, max_sweeps):
    """One-sided (Hestenes) Jacobi: returns G = M V with orthogonal columns, and V."""
    g = np.array(m, dtype=np.complex128, order="F", copy=True)
    ncol = g.shape[1]
    v = np.eye(ncol, dtype=np.complex128)
    if ncol < 2:
        return g, v, 0
    floor = (_EPS * max(np.linalg.norm(g), 1e-300)) ** 2 * 1e-2
    rounds = _round_robin(ncol)
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            gp = g[:, p]
            gq = g[:, q]
            alpha = np.einsum("ij,ij->j", gp.conj(), gp).real
            beta = np.einsum("ij,ij->j", gq.conj(), gq).real
            gamma = np.einsum("ij,ij->j", gp.conj(), gq)
            mag = np.abs(gamma)
            active = (mag > tol * np.sqrt(alpha * beta)) & (mag > floor)
            if not active.any():
                continue
            rotated = True
            c, s, ph = _rotation(alpha, beta, gamma, active)
            g[:, p] = c * gp - s * ph * gq
            g[:, q] = s * gp + c * ph * gq
            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = c * vp - s * ph * vq
            v[:, q] = s * vp + c * ph * vq
        if not rotated:
            return np.ascontiguousarray(g), v, sweep
    return None, None, max_sweeps


def _wx_step_row(l0, l1, e, cth, isth):
    # row vector times diag(e, 1/e) times W_x
    a = l0 * e
    b = l1 * np.conj(e)
    return a * cth + b * isth, a * isth + b * cth


def qsp_response(phases, x):
    """<0| e^{i p_0 Z} W(x) e^{i p_1 Z} ... W(x) e^{i p_d Z} |0> for each x."""
    phases = np.asarray(phases, dtype=float)
    x = np.asarray(x, dtype=float)
    cth = x.astype(np.complex128)
    isth = 1j * np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    l0 = np.ones_like(cth)
    l1 = np.zeros_like(cth)
    d = len(phases) - 1
    for j in range(d):
        l0, l1 = _wx_step_row(l0, l1, np.exp(1j * phases[j]), cth, isth)
    return l0 * np.exp(1j * phases[d])


def qsp_gradient(phases, x):
    """Response and the derivative of its real part with respect to every phase.

    Returns ``(P, D)`` with ``P`` of shape (M,) and ``D`` of shape (M, d+1).
    """
    phases = np.asarray(phases, dtype=float)
    x = np.asarray(x, dtype=float)
    d = len(phases) - 1
    cth = x.astype(np.complex128)
    isth = 1j * np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    e = np.exp(1j * phases)
    M = len(x)
    left = np.empty((d + 1, 2, M), dtype=np.complex128)
    l0 = np.ones(M, dtype=np.complex128)
    l1 = np.zeros(M, dtype=np.complex128)
    for j in range(d + 1):
        left[j, 0] = l0
        left[j, 1] = l1
        if j < d:
            l0, l1 = _wx_step_row(l0, l1, e[j], cth, isth)
    P = l0 * e[d]
    D = np.empty((M, d + 1))
    r0 = np.ones(M, dtype=np.complex128)
    r1 = np.zeros(M, dtype=np.complex128)
    for j in range(d, -1, -1):
        # d/dphi_j of l_j diag(e, 1/e) r_j is l_j diag(i e, -i/e) r_j
        D[:, j] = np.real(1j * (left[j, 0] * e[j] * r0 - left[j, 1] * np.conj(e[j]) * r1))
        if j > 0:
            a = e[j] * r0
            b = np.conj(e[j]) * r1
            r0, r1 = cth * a + isth * b, isth * a + cth * b
    return P, D

"""Numpy fallback for the first-order solver kernel.

Mirrors bgame._fastkernel exactly (same signatures, same arithmetic) so the
two are interchangeable; parity is pinned by tests. The objective is the
log of a smoothed worst-case perceived loss over an explicit path table:

    F(z) = LSE_g[ logw_g + tau * LSE_{j in g}( -g_j(z) / tau ) ]
    g_j(z) = const_j + sum_{k on path j} (s_k z_k + d_k) ** alpha

Groups are critical assets (softmin over their paths) or single paths in
the mixed-attacker mode, where tau cancels algebraically. tau = 0 gives the
exact hard maximum with an argmax subgradient.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_GRAD_FLOOR = 1e-12


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection of v onto {z >= 0, sum z = total}."""
    n = v.shape[0]
    if total <= 0.0:
        return np.zeros(n)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0
    rho = int(np.nonzero(cond)[0][-1]) + 1
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _segments(pe_off: np.ndarray) -> np.ndarray:
    counts = np.diff(pe_off)
    return np.repeat(np.arange(len(counts)), counts)


def objective_grad(
    z: np.ndarray,
    alpha: float,
    svec: np.ndarray,
    dvec: np.ndarray,
    pe_idx: np.ndarray,
    pe_off: np.ndarray,
    p_const: np.ndarray,
    group_of_path: np.ndarray,
    group_logw: np.ndarray,
    tau: float,
) -> tuple[float, np.ndarray]:
    """Smoothed log-loss and its gradient at z. tau = 0 -> hard max."""
    n_groups = group_logw.shape[0]
    t = svec * z + dvec
    h = t**alpha
    entry_path = _segments(pe_off)
    gj = p_const + np.bincount(
        entry_path, weights=h[pe_idx], minlength=p_const.shape[0]
    )
    neg = -gj
    mx = np.full(n_groups, -np.inf)
    np.maximum.at(mx, group_of_path, neg)
    if tau > 0.0:
        expo = np.exp((neg - mx[group_of_path]) / tau)
        sums = np.bincount(group_of_path, weights=expo, minlength=n_groups)
        a = np.where(np.isfinite(mx), mx + tau * np.log(sums, where=sums > 0), -np.inf)
    else:
        a = mx
    vals = group_logw + a
    top = float(np.max(vals))
    if top == -np.inf:
        return -np.inf, np.zeros_like(z)
    f = top + float(np.log(np.sum(np.exp(vals - top))))

    # path weights omega_j = P(group) * P(path | group)
    gshare = np.exp(vals - f)
    if tau > 0.0:
        rho = np.exp((neg - a[group_of_path]) / tau)
    else:
        # subgradient: all the mass on the first argmax path of each group
        rho = np.zeros(len(gj))
        hit = neg == mx[group_of_path]
        first = np.zeros(n_groups, dtype=np.int64) - 1
        idxs = np.nonzero(hit)[0]
        for j in idxs[::-1]:
            first[group_of_path[j]] = j
        rho[first[first >= 0]] = 1.0
    omega = gshare[group_of_path] * rho

    hp = alpha * svec * np.maximum(t, _GRAD_FLOOR) ** (alpha - 1.0)
    mu = np.bincount(pe_idx, weights=omega[entry_path], minlength=z.shape[0])
    return f, -mu * hp


def fista_stage(
    z0: np.ndarray,
    total: float,
    alpha: float,
    svec: np.ndarray,
    dvec: np.ndarray,
    pe_idx: np.ndarray,
    pe_off: np.ndarray,
    p_const: np.ndarray,
    group_of_path: np.ndarray,
    group_logw: np.ndarray,
    tau: float,
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, float, int, float]:
    """Projected FISTA with backtracking on the smoothed objective.

    Returns (z, objective, iterations, residual) where the residual is the
    infinity norm of z - proj(z - grad), a fixed-point gap of the unit-step
    projected gradient map.
    """

    def fg(z):
        return objective_grad(
            z, alpha, svec, dvec, pe_idx, pe_off, p_const,
            group_of_path, group_logw, tau,
        )

    z = project_simplex(np.asarray(z0, dtype=float), total)
    fz, gz = fg(z)
    if not np.isfinite(fz):
        return z, fz, 0, 0.0
    y = z.copy()
    fy, gy = fz, gz
    lip = max(1.0, float(np.linalg.norm(gz)))
    tmom = 1.0
    resid = np.inf
    it = 0
    while it < max_iter:
        it += 1
        while True:
            cand = project_simplex(y - gy / lip, total)
            diff = cand - y
            fc, _ = fg(cand)
            quad = fy + float(gy @ diff) + 0.5 * lip * float(diff @ diff)
            if fc <= quad + 1e-15 or lip > 1e18:
                break
            lip *= 2.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tmom * tmom))
        momentum = (tmom - 1.0) / t_next
        z_prev = z
        z = cand
        if fc > fz:  # function restart
            y = z.copy()
            tmom = 1.0
        else:
            y = z + momentum * (z - z_prev)
            tmom = t_next
        fz = min(fz, fc)
        fy, gy = fg(y)
        fz_z, gz = fg(z)
        step = project_simplex(z - gz, total)
        resid = float(np.max(np.abs(z - step)))
        lip = max(lip * 0.7, 1e-6)
        if resid <= tol:
            break
    f_final, _ = fg(z)
    return z, f_final, it, resid

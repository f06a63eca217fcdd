# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled first-order solver kernel.

Same contract and arithmetic as bgame._purekernel (the numpy fallback);
see that module for the objective definition. Selected automatically at
import when the extension built; BGAME_PURE=1 forces the fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log, pow, sqrt
from libc.stdlib cimport free, malloc, qsort

BACKEND = "cython"

cdef double GRAD_FLOOR = 1e-12


cdef int _cmp_desc(const void *a, const void *b) noexcept nogil:
    cdef double x = (<const double *> a)[0]
    cdef double y = (<const double *> b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef void _project(double[::1] v, double total, double[::1] out, double[::1] scratch) noexcept:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, rho
    cdef double css, theta, val
    if total <= 0.0:
        for i in range(n):
            out[i] = 0.0
        return
    for i in range(n):
        scratch[i] = v[i]
    qsort(&scratch[0], n, sizeof(double), _cmp_desc)
    css = 0.0
    theta = 0.0
    rho = 0
    cdef double running = 0.0
    for i in range(n):
        running += scratch[i]
        val = scratch[i] - (running - total) / (i + 1)
        if val > 0.0:
            rho = i + 1
            css = running
    theta = (css - total) / rho
    for i in range(n):
        val = v[i] - theta
        out[i] = val if val > 0.0 else 0.0


def project_simplex(v, double total):
    """Euclidean projection of v onto {z >= 0, sum z = total}."""
    arr = np.ascontiguousarray(v, dtype=np.float64)
    out = np.empty_like(arr)
    scratch = np.empty_like(arr)
    _project(arr, total, out, scratch)
    return out


cdef double _eval(
    double[::1] z, double alpha, double[::1] svec, double[::1] dvec,
    int[::1] pe_idx, int[::1] pe_off, double[::1] p_const,
    int[::1] group_of_path, double[::1] group_logw, double tau,
    double[::1] grad,
    # scratch:
    double[::1] h, double[::1] hp, double[::1] gj, double[::1] mx,
    double[::1] ga, double[::1] sums, double[::1] omega, int[::1] first,
) noexcept:
    """Objective value; gradient written into ``grad``. Returns F."""
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t n_paths = p_const.shape[0]
    cdef Py_ssize_t n_groups = group_logw.shape[0]
    cdef Py_ssize_t i, j, g, k
    cdef double t, acc, top, f, neg, rho, gs

    for i in range(n):
        t = svec[i] * z[i] + dvec[i]
        h[i] = pow(t, alpha)
        if t < GRAD_FLOOR:
            t = GRAD_FLOOR
        hp[i] = alpha * svec[i] * pow(t, alpha - 1.0)
        grad[i] = 0.0

    for j in range(n_paths):
        acc = p_const[j]
        for k in range(pe_off[j], pe_off[j + 1]):
            acc += h[pe_idx[k]]
        gj[j] = acc

    for g in range(n_groups):
        mx[g] = -INFINITY
        sums[g] = 0.0
        first[g] = -1
    for j in range(n_paths):
        g = group_of_path[j]
        if -gj[j] > mx[g]:
            mx[g] = -gj[j]
    if tau > 0.0:
        for j in range(n_paths):
            g = group_of_path[j]
            sums[g] += exp((-gj[j] - mx[g]) / tau)
        for g in range(n_groups):
            if mx[g] > -INFINITY:
                ga[g] = mx[g] + tau * log(sums[g])
            else:
                ga[g] = -INFINITY
    else:
        for j in range(n_paths):
            g = group_of_path[j]
            if -gj[j] == mx[g] and first[g] < 0:
                first[g] = <int> j
        for g in range(n_groups):
            ga[g] = mx[g]

    top = -INFINITY
    for g in range(n_groups):
        if group_logw[g] + ga[g] > top:
            top = group_logw[g] + ga[g]
    if top == -INFINITY:
        return -INFINITY
    acc = 0.0
    for g in range(n_groups):
        if group_logw[g] + ga[g] > -INFINITY:
            acc += exp(group_logw[g] + ga[g] - top)
    f = top + log(acc)

    # omega_j = exp(logw_g + a_g - F) * exp((-g_j - a_g)/tau)
    if tau > 0.0:
        for j in range(n_paths):
            g = group_of_path[j]
            omega[j] = exp(group_logw[g] + ga[g] - f) * exp((-gj[j] - ga[g]) / tau)
    else:
        for j in range(n_paths):
            omega[j] = 0.0
        for g in range(n_groups):
            if first[g] >= 0:
                omega[first[g]] = exp(group_logw[g] + ga[g] - f)

    for j in range(n_paths):
        if omega[j] == 0.0:
            continue
        for k in range(pe_off[j], pe_off[j + 1]):
            i = pe_idx[k]
            grad[i] -= omega[j] * hp[i]
    return f


def objective_grad(
    z, double alpha, svec, dvec, pe_idx, pe_off, p_const,
    group_of_path, group_logw, double tau,
):
    """Smoothed log-loss and gradient at z; mirrors the numpy fallback."""
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(svec, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(dvec, dtype=np.float64)
    cdef int[::1] pei = np.ascontiguousarray(pe_idx, dtype=np.int32)
    cdef int[::1] peo = np.ascontiguousarray(pe_off, dtype=np.int32)
    cdef double[::1] pc = np.ascontiguousarray(p_const, dtype=np.float64)
    cdef int[::1] gop = np.ascontiguousarray(group_of_path, dtype=np.int32)
    cdef double[::1] glw = np.ascontiguousarray(group_logw, dtype=np.float64)
    n = zv.shape[0]
    n_paths = pc.shape[0]
    n_groups = glw.shape[0]
    grad = np.zeros(n)
    h = np.empty(n); hp = np.empty(n)
    gj = np.empty(n_paths); omega = np.empty(n_paths)
    mx = np.empty(n_groups); ga = np.empty(n_groups); sums = np.empty(n_groups)
    first = np.empty(n_groups, dtype=np.int32)
    cdef double f = _eval(zv, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
                          grad, h, hp, gj, mx, ga, sums, omega, first)
    return f, grad


def fista_stage(
    z0, double total, double alpha, svec, dvec, pe_idx, pe_off, p_const,
    group_of_path, group_logw, double tau, int max_iter, double tol,
):
    """Projected FISTA with backtracking; see the numpy twin for details."""
    cdef double[::1] sv = np.ascontiguousarray(svec, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(dvec, dtype=np.float64)
    cdef int[::1] pei = np.ascontiguousarray(pe_idx, dtype=np.int32)
    cdef int[::1] peo = np.ascontiguousarray(pe_off, dtype=np.int32)
    cdef double[::1] pc = np.ascontiguousarray(p_const, dtype=np.float64)
    cdef int[::1] gop = np.ascontiguousarray(group_of_path, dtype=np.int32)
    cdef double[::1] glw = np.ascontiguousarray(group_logw, dtype=np.float64)

    cdef Py_ssize_t n = len(z0)
    cdef Py_ssize_t n_paths = pc.shape[0]
    cdef Py_ssize_t n_groups = glw.shape[0]

    z_arr = np.empty(n); y_arr = np.empty(n); zp_arr = np.empty(n)
    cand_arr = np.empty(n); g_y = np.zeros(n); g_z = np.zeros(n)
    step_arr = np.empty(n); scratch = np.empty(n); tmp = np.empty(n)
    h = np.empty(n); hp = np.empty(n)
    gj = np.empty(n_paths); omega = np.empty(n_paths)
    mx = np.empty(max(n_groups, 1)); ga = np.empty(max(n_groups, 1))
    sums = np.empty(max(n_groups, 1))
    first = np.empty(max(n_groups, 1), dtype=np.int32)

    cdef double[::1] z = z_arr, y = y_arr, zp = zp_arr, cand = cand_arr
    cdef double[::1] gy = g_y, gz = g_z, stepv = step_arr, scr = scratch
    cdef double[::1] tv = tmp
    cdef double[::1] hv = h, hpv = hp, gjv = gj, ov = omega
    cdef double[::1] mxv = mx, gav = ga, sumv = sums
    cdef int[::1] fv = first

    cdef double[::1] z0v = np.ascontiguousarray(z0, dtype=np.float64)
    _project(z0v, total, z, scr)

    cdef double fz, fy, fc, quad, lip, tmom, t_next, momentum, resid, dot, nrm
    cdef Py_ssize_t i, it
    cdef bint accepted

    fz = _eval(z, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
               gz, hv, hpv, gjv, mxv, gav, sumv, ov, fv)
    if fz == -INFINITY or fz != fz:
        return z_arr, fz, 0, 0.0
    for i in range(n):
        y[i] = z[i]
        gy[i] = gz[i]
    fy = fz
    nrm = 0.0
    for i in range(n):
        nrm += gz[i] * gz[i]
    lip = sqrt(nrm)
    if lip < 1.0:
        lip = 1.0
    tmom = 1.0
    resid = INFINITY
    it = 0
    while it < max_iter:
        it += 1
        while True:
            for i in range(n):
                tv[i] = y[i] - gy[i] / lip
            _project(tv, total, cand, scr)
            fc = _eval(cand, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
                       gz, hv, hpv, gjv, mxv, gav, sumv, ov, fv)
            quad = fy
            dot = 0.0
            for i in range(n):
                dot += gy[i] * (cand[i] - y[i])
            quad += dot
            dot = 0.0
            for i in range(n):
                dot += (cand[i] - y[i]) * (cand[i] - y[i])
            quad += 0.5 * lip * dot
            if fc <= quad + 1e-15 or lip > 1e18:
                break
            lip *= 2.0
        t_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * tmom * tmom))
        momentum = (tmom - 1.0) / t_next
        for i in range(n):
            zp[i] = z[i]
            z[i] = cand[i]
        if fc > fz:
            for i in range(n):
                y[i] = z[i]
            tmom = 1.0
        else:
            for i in range(n):
                y[i] = z[i] + momentum * (z[i] - zp[i])
            tmom = t_next
        if fc < fz:
            fz = fc
        fy = _eval(y, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
                   gy, hv, hpv, gjv, mxv, gav, sumv, ov, fv)
        _eval(z, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
              gz, hv, hpv, gjv, mxv, gav, sumv, ov, fv)
        for i in range(n):
            tv[i] = z[i] - gz[i]
        _project(tv, total, stepv, scr)
        resid = 0.0
        for i in range(n):
            dot = z[i] - stepv[i]
            if dot < 0.0:
                dot = -dot
            if dot > resid:
                resid = dot
        lip *= 0.7
        if lip < 1e-6:
            lip = 1e-6
        if resid <= tol:
            break
    fz = _eval(z, alpha, sv, dv, pei, peo, pc, gop, glw, tau,
               gz, hv, hpv, gjv, mxv, gav, sumv, ov, fv)
    return z_arr.copy(), fz, int(it), resid

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; signatures mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport copysign, fabs, fmax, INFINITY, isfinite

cnp.import_array()

cdef enum:
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3
    FIXED = 4


def soft_threshold(x, double tau):
    xa = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty_like(xa)
    cdef double[::1] xv = xa
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double v, m
    # branch-free: random signs would otherwise defeat the branch predictor
    for i in range(n):
        v = xv[i]
        m = fmax(fabs(v) - tau, 0.0)
        ov[i] = copysign(m, v) if m > 0.0 else 0.0
    return out.reshape(np.shape(x))


def ftran_etas(double[::1] v, long[::1] rows, double[::1] piv, long[::1] starts,
               long[::1] idx, double[::1] vals, long count):
    cdef long k, p, r
    cdef double vr
    for k in range(count):
        r = rows[k]
        vr = v[r]
        if vr == 0.0:
            continue
        for p in range(starts[k], starts[k + 1]):
            v[idx[p]] += vals[p] * vr
        v[r] = piv[k] * vr
    return np.asarray(v)


def btran_etas(double[::1] v, long[::1] rows, double[::1] piv, long[::1] starts,
               long[::1] idx, double[::1] vals, long count):
    cdef long k, p, r
    cdef double acc
    for k in range(count - 1, -1, -1):
        r = rows[k]
        acc = piv[k] * v[r]
        for p in range(starts[k], starts[k + 1]):
            acc += vals[p] * v[idx[p]]
        v[r] = acc
    return np.asarray(v)


def price(double[::1] d, signed char[::1] vstat, double tol, bint bland):
    cdef Py_ssize_t j, n = d.shape[0]
    cdef Py_ssize_t best = -1
    cdef double bestval = 0.0, dj, a
    cdef signed char s
    for j in range(n):
        s = vstat[j]
        dj = d[j]
        if s == AT_LOWER:
            if dj >= -tol:
                continue
        elif s == AT_UPPER:
            if dj <= tol:
                continue
        elif s == FREE:
            if fabs(dj) <= tol:
                continue
        else:
            continue
        if bland:
            return j
        a = fabs(dj)
        if a > bestval:
            bestval = a
            best = j
    return best


def ratio_test(double[::1] delta, double[::1] xb, double[::1] lob, double[::1] hib,
               bint phase1, double tol_piv, double tol_harris, double tol_feas):
    cdef Py_ssize_t i, n = xb.shape[0]
    cdef double theta_max = INFINITY, rel, dl, x
    # pass 1: relaxed bound on the step
    for i in range(n):
        dl = delta[i]
        if -tol_piv <= dl <= tol_piv:
            continue
        x = xb[i]
        if phase1 and x < lob[i] - tol_feas:
            if dl > 0:
                rel = (lob[i] - x + tol_harris) / dl
            else:
                continue
        elif phase1 and x > hib[i] + tol_feas:
            if dl < 0:
                rel = (x - hib[i] + tol_harris) / (-dl)
            else:
                continue
        elif dl < 0:
            if not isfinite(lob[i]):
                continue
            rel = (x - lob[i] + tol_harris) / (-dl)
        else:
            if not isfinite(hib[i]):
                continue
            rel = (hib[i] - x + tol_harris) / dl
        if rel < theta_max:
            theta_max = rel
    if not isfinite(theta_max):
        return -1, np.inf, False
    # pass 2: largest pivot among rows whose exact ratio fits under the bound
    cdef Py_ssize_t best = -1
    cdef double bestpiv = -1.0, ex, bestex = 0.0
    cdef bint up, bestup = False
    for i in range(n):
        dl = delta[i]
        if -tol_piv <= dl <= tol_piv:
            continue
        x = xb[i]
        if phase1 and x < lob[i] - tol_feas:
            if dl > 0:
                ex = (lob[i] - x) / dl
                up = False
            else:
                continue
        elif phase1 and x > hib[i] + tol_feas:
            if dl < 0:
                ex = (x - hib[i]) / (-dl)
                up = True
            else:
                continue
        elif dl < 0:
            if not isfinite(lob[i]):
                continue
            ex = (x - lob[i]) / (-dl)
            up = False
        else:
            if not isfinite(hib[i]):
                continue
            ex = (hib[i] - x) / dl
            up = True
        if ex <= theta_max and fabs(dl) > bestpiv:
            bestpiv = fabs(dl)
            best = i
            bestex = ex
            bestup = up
    return best, (bestex if bestex > 0.0 else 0.0), bestup


def lasso_cd(double[::1, :] phi, double[::1] y, double lam, double[::1] theta,
             double[::1] col_sq, long max_sweeps, double tol):
    cdef Py_ssize_t n = phi.shape[0], m = phi.shape[1], i, j
    cdef double[::1] resid = np.empty(n)
    cdef double thr = 0.5 * n * lam, change = INFINITY, rho, old, new, step
    cdef long sweeps = 0
    for i in range(n):
        resid[i] = y[i]
    for j in range(m):
        if theta[j] != 0.0:
            for i in range(n):
                resid[i] -= phi[i, j] * theta[j]
    while sweeps < max_sweeps:
        sweeps += 1
        change = 0.0
        for j in range(m):
            if col_sq[j] == 0.0:
                continue
            old = theta[j]
            rho = col_sq[j] * old
            for i in range(n):
                rho += phi[i, j] * resid[i]
            if rho > thr:
                new = (rho - thr) / col_sq[j]
            elif rho < -thr:
                new = (rho + thr) / col_sq[j]
            else:
                new = 0.0
            if new != old:
                step = new - old
                for i in range(n):
                    resid[i] -= phi[i, j] * step
                theta[j] = new
                if fabs(step) > change:
                    change = fabs(step)
        if change <= tol:
            break
    return sweeps, change

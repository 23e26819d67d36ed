"""Pure-numpy implementations of the hot kernels.

Every function here has a twin of the same name and signature in
``_ckernels.pyx``; the two are checked against each other in the test suite.
"""

import numpy as np

# variable status codes shared with the simplex driver
BASIC = 0
AT_LOWER = 1
AT_UPPER = 2
FREE = 3
FIXED = 4


def soft_threshold(x, tau):
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def ftran_etas(v, rows, piv, starts, idx, vals, count):
    """Apply ``count`` product-form etas to ``v`` in place (oldest first).

    Eta ``k`` pivots on row ``rows[k]`` with diagonal ``piv[k]``; its
    off-diagonal entries live in ``idx/vals[starts[k]:starts[k+1]]``.
    """
    for k in range(count):
        r = rows[k]
        vr = v[r]
        if vr == 0.0:
            continue
        s, e = starts[k], starts[k + 1]
        v[idx[s:e]] += vals[s:e] * vr
        v[r] = piv[k] * vr
    return v


def btran_etas(v, rows, piv, starts, idx, vals, count):
    """Apply transposed etas to ``v`` in place (newest first)."""
    for k in range(count - 1, -1, -1):
        s, e = starts[k], starts[k + 1]
        r = rows[k]
        v[r] = piv[k] * v[r] + np.dot(vals[s:e], v[idx[s:e]])
    return v


def price(d, vstat, tol, bland):
    """Pick the entering column for a minimisation, or -1 at optimality."""
    elig = ((vstat == AT_LOWER) & (d < -tol)) | ((vstat == AT_UPPER) & (d > tol)) | (
        (vstat == FREE) & (np.abs(d) > tol)
    )
    cand = np.flatnonzero(elig)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[0])
    return int(cand[np.argmax(np.abs(d[cand]))])


def ratio_test(delta, xb, lob, hib, phase1, tol_piv, tol_harris, tol_feas):
    """Two-pass Harris ratio test over the basic variables.

    ``delta`` is the rate of change of each basic value per unit step.  In
    phase 1 an infeasible basic variable blocks only at the bound it is
    currently violating.  Returns ``(row, step, leaves_at_upper)`` with
    ``row = -1`` when nothing blocks.
    """
    dec = delta < -tol_piv
    inc = delta > tol_piv
    if phase1:
        below = xb < lob - tol_feas
        above = xb > hib + tol_feas
    else:
        below = np.zeros(xb.shape, dtype=bool)
        above = below
    feas = ~(below | above)

    # decreasing: feasible vars block at lower, too-high vars block at upper
    dec_lo = dec & feas & np.isfinite(lob)
    dec_hi = dec & above
    # increasing: feasible vars block at upper, too-low vars block at lower
    inc_hi = inc & feas & np.isfinite(hib)
    inc_lo = inc & below

    n = xb.shape[0]
    exact = np.full(n, np.inf)
    relaxed = np.full(n, np.inf)
    to_upper = np.zeros(n, dtype=bool)
    if dec_lo.any():
        num = xb[dec_lo] - lob[dec_lo]
        den = -delta[dec_lo]
        exact[dec_lo] = num / den
        relaxed[dec_lo] = (num + tol_harris) / den
    if dec_hi.any():
        num = xb[dec_hi] - hib[dec_hi]
        den = -delta[dec_hi]
        exact[dec_hi] = num / den
        relaxed[dec_hi] = (num + tol_harris) / den
        to_upper[dec_hi] = True
    if inc_hi.any():
        num = hib[inc_hi] - xb[inc_hi]
        exact[inc_hi] = num / delta[inc_hi]
        relaxed[inc_hi] = (num + tol_harris) / delta[inc_hi]
        to_upper[inc_hi] = True
    if inc_lo.any():
        num = lob[inc_lo] - xb[inc_lo]
        exact[inc_lo] = num / delta[inc_lo]
        relaxed[inc_lo] = (num + tol_harris) / delta[inc_lo]

    theta_max = relaxed.min() if n else np.inf
    if not np.isfinite(theta_max):
        return -1, np.inf, False
    cand = np.flatnonzero(exact <= theta_max)
    r = int(cand[np.argmax(np.abs(delta[cand]))])
    return r, max(float(exact[r]), 0.0), bool(to_upper[r])


def lasso_cd(phi, y, lam, theta, col_sq, max_sweeps, tol):
    """Cyclic coordinate descent for (1/n)||phi theta - y||^2 + lam ||theta||_1.

    ``theta`` is updated in place.  Returns ``(sweeps, last_max_change)``.
    """
    n, m = phi.shape
    resid = y - phi @ theta
    thr = 0.5 * n * lam
    change = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        change = 0.0
        for j in range(m):
            if col_sq[j] == 0.0:
                continue
            col = phi[:, j]
            old = theta[j]
            rho = col @ resid + col_sq[j] * old
            if rho > thr:
                new = (rho - thr) / col_sq[j]
            elif rho < -thr:
                new = (rho + thr) / col_sq[j]
            else:
                new = 0.0
            if new != old:
                resid -= col * (new - old)
                theta[j] = new
                change = max(change, abs(new - old))
        if change <= tol:
            break
    return sweeps, change

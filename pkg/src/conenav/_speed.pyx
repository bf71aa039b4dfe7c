# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in ``conenav._kernels``.

Semantics must match the numpy fallbacks exactly (same comparisons, same
tie-breaking); equivalence is enforced by tests.
"""

from libc.math cimport sqrt, sin, cos, asin, acos, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _dot(double[::1] a, double[::1] b, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i] * b[i]
    return s


cdef double _seg_point_dist(double* a, double* b, double* p, Py_ssize_t n) nogil:
    cdef double denom = 0.0, t = 0.0, d = 0.0, e, q
    cdef Py_ssize_t i
    for i in range(n):
        e = b[i] - a[i]
        denom += e * e
        t += (p[i] - a[i]) * e
    if denom == 0.0:
        for i in range(n):
            e = p[i] - a[i]
            d += e * e
        return sqrt(d)
    t /= denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    for i in range(n):
        q = p[i] - (a[i] + t * (b[i] - a[i]))
        d += q * q
    return sqrt(d)


def scan_disc_world(double[::1] x, double[:, ::1] centers, double[::1] radii,
                    double r0, double[::1] thetas, double R):
    """Ranges to the nearest obstacle/workspace boundary per scan angle (2-D)."""
    cdef Py_ssize_t ns = thetas.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(ns, dtype=np.float64)
    cdef double[::1] rhos = out
    cdef Py_ssize_t i, k
    cdef double dx, dy, b, c, disc, t, t2, best, ocx, ocy
    with nogil:
        for i in range(ns):
            dx = cos(thetas[i])
            dy = sin(thetas[i])
            best = R
            # workspace circle from inside
            b = x[0] * dx + x[1] * dy
            c = x[0] * x[0] + x[1] * x[1] - r0 * r0
            disc = b * b - c
            if disc >= 0.0:
                t = -b + sqrt(disc)
                if 0.0 <= t < best:
                    best = t
            for k in range(m):
                ocx = x[0] - centers[k, 0]
                ocy = x[1] - centers[k, 1]
                b = ocx * dx + ocy * dy
                c = ocx * ocx + ocy * ocy - radii[k] * radii[k]
                disc = b * b - c
                if disc < 0.0:
                    continue
                t = -b - sqrt(disc)
                if t < 0.0:
                    t = -b + sqrt(disc)
                if 0.0 <= t < best:
                    best = t
            rhos[i] = best
    return out


cdef int _control(double* x, double* xd, double[:, ::1] centers, double[::1] radii,
                  double gamma, int max_depth, double* u, double* scratch,
                  unsigned char* used, Py_ssize_t n, Py_ssize_t m) nogil:
    """Writes the command into u; returns 0 visible, 1 projected, -1 depth error."""
    cdef Py_ssize_t i, k, j, best
    cdef double dist, best_key, d, theta, nu, cb, beta, s, proj
    for i in range(n):
        u[i] = gamma * (xd[i] - x[i])
    # first blocker: closest to the destination, ties to the lower index
    best = -1
    best_key = INFINITY
    for k in range(m):
        used[k] = 0
        if _seg_point_dist(x, xd, &centers[k, 0], n) <= radii[k]:
            d = 0.0
            for i in range(n):
                s = xd[i] - centers[k, i]
                d += s * s
            dist = sqrt(d) - radii[k]
            if dist < 0.0:
                dist = 0.0
            if dist < best_key:
                best_key = dist
                best = k
    if best < 0:
        return 0
    k = best
    cdef int depth = 0
    cdef Py_ssize_t prev
    while True:
        if depth >= max_depth:
            return -1
        d = 0.0
        nu = 0.0
        cb = 0.0
        for i in range(n):
            scratch[i] = centers[k, i] - x[i]      # cone axis
            d += scratch[i] * scratch[i]
            nu += u[i] * u[i]
            cb += u[i] * scratch[i]
        d = sqrt(d)
        nu = sqrt(nu)
        theta = radii[k] / d
        if theta > 1.0:
            theta = 1.0
        theta = asin(theta)
        cb /= (nu * d)
        if cb > 1.0:
            cb = 1.0
        elif cb < -1.0:
            cb = -1.0
        beta = acos(cb)
        if beta > theta:
            beta = theta
        s = nu * sin(theta - beta) / sin(theta) / d
        for i in range(n):
            u[i] -= s * scratch[i]
        used[k] = 1
        depth += 1
        nu = 0.0
        proj = 0.0
        for i in range(n):
            nu += u[i] * u[i]
            proj += scratch[i] * u[i]
        if nu == 0.0:
            return 1
        proj /= nu  # (axis . u) / |u|^2
        for i in range(n):
            scratch[i] = x[i] + proj * u[i]        # tangency point c_hat
        # next blocker along [x, c_hat]: closest to obstacle k
        prev = k
        best = -1
        best_key = INFINITY
        for j in range(m):
            if used[j]:
                continue
            if _seg_point_dist(x, scratch, &centers[j, 0], n) <= radii[j]:
                d = 0.0
                for i in range(n):
                    s = centers[prev, i] - centers[j, i]
                    d += s * s
                dist = sqrt(d) - radii[prev] - radii[j]
                if dist < 0.0:
                    dist = 0.0
                if dist < best_key:
                    best_key = dist
                    best = j
        if best < 0:
            return 1
        k = best


def control_disc_world(double[::1] x, double[::1] x_d, double[:, ::1] centers,
                       double[::1] radii, double gamma, int max_depth,
                       double[::1] u_out):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used = np.empty(max(m, 1), dtype=np.uint8)
    cdef double[::1] sv = scratch
    cdef unsigned char[::1] uv = used
    cdef int mode
    with nogil:
        mode = _control(&x[0], &x_d[0], centers, radii, gamma, max_depth,
                        &u_out[0], &sv[0], &uv[0], n, m)
    return mode


def simulate_disc_world(double[::1] x0, double[::1] x_d, double[:, ::1] centers,
                        double[::1] radii, double r0, double gamma, double h,
                        long max_steps, double e_c, double tol_eq,
                        long stall_limit, int max_depth):
    """Fixed-step RK4 of the closed loop; returns (positions, status)."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] traj = np.empty((max_steps + 1, n), dtype=np.float64)
    cdef double[:, ::1] tv = traj
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(7 * n, dtype=np.float64)
    cdef double[::1] wv = work
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used = np.empty(max(m, 1), dtype=np.uint8)
    cdef unsigned char[::1] uv = used
    cdef double* xcur = &wv[0]
    cdef double* k1 = &wv[n]
    cdef double* k2 = &wv[2 * n]
    cdef double* k3 = &wv[3 * n]
    cdef double* k4 = &wv[4 * n]
    cdef double* stage = &wv[5 * n]
    cdef double* scratch = &wv[6 * n]
    cdef Py_ssize_t i, k
    cdef long step, stall = 0, nrec = 1
    cdef int status = 2, mode
    cdef double dist, clearance, safety_tol = -1e-6 * r0, s
    for i in range(n):
        xcur[i] = x0[i]
        tv[0, i] = x0[i]
    with nogil:
        for step in range(max_steps):
            dist = 0.0
            for i in range(n):
                s = xcur[i] - x_d[i]
                dist += s * s
            if sqrt(dist) <= e_c:
                status = 0
                break
            mode = _control(xcur, &x_d[0], centers, radii, gamma, max_depth,
                            k1, scratch, &uv[0], n, m)
            if mode < 0:
                status = -1
                break
            dist = 0.0
            for i in range(n):
                dist += k1[i] * k1[i]
            if sqrt(dist) <= tol_eq:
                stall += 1
                if stall >= stall_limit:
                    status = 1
                    break
            else:
                stall = 0
            for i in range(n):
                stage[i] = xcur[i] + 0.5 * h * k1[i]
            mode = _control(stage, &x_d[0], centers, radii, gamma, max_depth,
                            k2, scratch, &uv[0], n, m)
            if mode < 0:
                status = -1
                break
            for i in range(n):
                stage[i] = xcur[i] + 0.5 * h * k2[i]
            mode = _control(stage, &x_d[0], centers, radii, gamma, max_depth,
                            k3, scratch, &uv[0], n, m)
            if mode < 0:
                status = -1
                break
            for i in range(n):
                stage[i] = xcur[i] + h * k3[i]
            mode = _control(stage, &x_d[0], centers, radii, gamma, max_depth,
                            k4, scratch, &uv[0], n, m)
            if mode < 0:
                status = -1
                break
            for i in range(n):
                xcur[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                tv[nrec, i] = xcur[i]
            nrec += 1
            # clearance monitor
            dist = 0.0
            for i in range(n):
                dist += xcur[i] * xcur[i]
            clearance = r0 - sqrt(dist)
            for k in range(m):
                dist = 0.0
                for i in range(n):
                    s = xcur[i] - centers[k, i]
                    dist += s * s
                dist = sqrt(dist) - radii[k]
                if dist < clearance:
                    clearance = dist
            if clearance < safety_tol:
                status = 3
                break
    return traj[:nrec].copy(), status

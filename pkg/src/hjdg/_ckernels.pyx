# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled explicit-step kernels for one and two space dimensions.

Both kernels advance the interior cells by one forward-Euler step of
``u_t + |grad u|^p / lam - div(A grad u) = f`` with the Godunov upwind
Hamiltonian and face-averaged diffusion, copy the Dirichlet ring from
``bnd`` and return the largest upwind gradient magnitude of the *output*
(``nan`` if the output is not finite).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, fmax, fmin, isfinite

cnp.import_array()


cdef inline double _gmax_1d(const double[::1] u, double h) nogil:
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double dm, dp, g2, gmax = 0.0
    for i in range(1, n - 1):
        dm = fmax((u[i] - u[i - 1]) / h, 0.0)
        dp = fmin((u[i + 1] - u[i]) / h, 0.0)
        g2 = dm * dm + dp * dp
        if g2 > gmax:
            gmax = g2
    return sqrt(gmax)


def max_upwind_gradient_1d(const double[::1] u, double h):
    return _gmax_1d(u, h)


def step_1d(const double[::1] u, const double[::1] bnd, const double[::1] axx, const double[::1] f,
            double h, double dt, double p, double inv_lam):
    cdef Py_ssize_t i, n = u.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double dm, dp, g2, ham, div, half_p = 0.5 * p, ih = 1.0 / h
    cdef bint finite = True
    with nogil:
        for i in range(1, n - 1):
            dm = (u[i] - u[i - 1]) * ih
            dp = (u[i + 1] - u[i]) * ih
            g2 = fmax(dm, 0.0) ** 2 + fmin(dp, 0.0) ** 2
            ham = inv_lam * pow(g2, half_p)
            div = (axx[i] * dp - axx[i - 1] * dm) * ih
            out[i] = u[i] + dt * (f[i] - ham + div)
            if not isfinite(out[i]):
                finite = False
        out[0] = bnd[0]
        out[n - 1] = bnd[n - 1]
        g2 = _gmax_1d(out, h)
    return out_arr, (g2 if finite else float("nan"))


cdef inline double _gmax_2d(const double[:, ::1] u, double h) nogil:
    cdef Py_ssize_t i, j, nx = u.shape[0], ny = u.shape[1]
    cdef double g2, gmax = 0.0, ih = 1.0 / h
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            g2 = (fmax((u[i, j] - u[i - 1, j]) * ih, 0.0) ** 2
                  + fmin((u[i + 1, j] - u[i, j]) * ih, 0.0) ** 2
                  + fmax((u[i, j] - u[i, j - 1]) * ih, 0.0) ** 2
                  + fmin((u[i, j + 1] - u[i, j]) * ih, 0.0) ** 2)
            if g2 > gmax:
                gmax = g2
    return sqrt(gmax)


def max_upwind_gradient_2d(const double[:, ::1] u, double h):
    return _gmax_2d(u, h)


cdef inline double _xflux(const double[:, ::1] u, const double[:, ::1] axx, const double[:, ::1] axy,
                          Py_ssize_t i, Py_ssize_t j, double ih) nogil:
    # flux through the face between (i, j) and (i + 1, j)
    return (axx[i, j] * (u[i + 1, j] - u[i, j]) * ih
            + axy[i, j] * (u[i, j + 1] - u[i, j - 1] + u[i + 1, j + 1] - u[i + 1, j - 1]) * 0.25 * ih)


cdef inline double _yflux(const double[:, ::1] u, const double[:, ::1] ayy, const double[:, ::1] ayx,
                          Py_ssize_t i, Py_ssize_t j, double ih) nogil:
    # flux through the face between (i, j) and (i, j + 1)
    return (ayy[i, j] * (u[i, j + 1] - u[i, j]) * ih
            + ayx[i, j] * (u[i + 1, j] - u[i - 1, j] + u[i + 1, j + 1] - u[i - 1, j + 1]) * 0.25 * ih)


def step_2d(const double[:, ::1] u, const double[:, ::1] bnd,
            const double[:, ::1] axx, const double[:, ::1] axy, const double[:, ::1] ayx, const double[:, ::1] ayy,
            const double[:, ::1] f, double h, double dt, double p, double inv_lam):
    cdef Py_ssize_t i, j, nx = u.shape[0], ny = u.shape[1]
    out_arr = np.array(bnd, copy=True)
    cdef double[:, ::1] out = out_arr
    cdef double g2, ham, div, half_p = 0.5 * p, ih = 1.0 / h
    cdef bint finite = True
    with nogil:
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                g2 = (fmax((u[i, j] - u[i - 1, j]) * ih, 0.0) ** 2
                      + fmin((u[i + 1, j] - u[i, j]) * ih, 0.0) ** 2
                      + fmax((u[i, j] - u[i, j - 1]) * ih, 0.0) ** 2
                      + fmin((u[i, j + 1] - u[i, j]) * ih, 0.0) ** 2)
                ham = inv_lam * pow(g2, half_p)
                div = (_xflux(u, axx, axy, i, j, ih) - _xflux(u, axx, axy, i - 1, j, ih)
                       + _yflux(u, ayy, ayx, i, j, ih) - _yflux(u, ayy, ayx, i, j - 1, ih)) * ih
                out[i, j] = u[i, j] + dt * (f[i, j] - ham + div)
                if not isfinite(out[i, j]):
                    finite = False
        g2 = _gmax_2d(out, h)
    return out_arr, (g2 if finite else float("nan"))

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-Euler stepper for Lotka-Volterra drift.

Mirrors ``kolmo.sde._lvkernel_py.advance`` exactly; see that module for the
argument contract.
"""
from libc.math cimport exp, isnan, INFINITY


def advance(double[::1] logx, const double[::1] m, const double[:, ::1] A,
            const double[::1] half_var, const double[:, ::1] dE, double dt,
            Py_ssize_t k0, Py_ssize_t stride, double[:, ::1] store, Py_ssize_t pos,
            Py_ssize_t acc_start, Py_ssize_t acc_len, double[:, :, ::1] acc):
    cdef Py_ssize_t n = logx.shape[0]
    cdef Py_ssize_t nsteps = dE.shape[0]
    cdef Py_ssize_t nb = acc.shape[0]
    cdef Py_ssize_t s, i, j, k, b
    cdef Py_ssize_t done = nsteps
    cdef bint bad
    cdef double v, d
    cdef double x[64]
    cdef double drift[64]
    cdef double xnew[64]
    if n > 64:
        raise ValueError("compiled kernel supports at most 64 species")
    with nogil:
        for s in range(nsteps):
            k = k0 + s
            if k % stride == 0:
                for i in range(n):
                    store[pos, i] = logx[i]
                pos += 1
            for j in range(n):
                x[j] = exp(logx[j])
            for i in range(n):
                d = 0.0
                for j in range(n):
                    d = d + A[i, j] * x[j]
                d = (m[i] - half_var[i]) + d
                drift[i] = d
            if k >= acc_start:
                b = ((k - acc_start) * nb) // acc_len
                for i in range(n):
                    acc[b, 0, i] += x[i]
                    acc[b, 1, i] += drift[i]
            bad = False
            for i in range(n):
                v = logx[i] + drift[i] * dt + dE[s, i]
                if isnan(v) or v == INFINITY:
                    bad = True
                    break
                xnew[i] = v
            if bad:
                done = s
                break
            for i in range(n):
                logx[i] = xnew[i]
    return done, pos

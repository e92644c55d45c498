# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernel: batched gain-concentrated matched-filter power.

For a batch of (tau, r) hypotheses and one path's slow-time samples, returns
|phi(tau, r)^H y|^2 / P per hypothesis. This inner loop dominates grid-search
estimation, hence the compiled lane.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def batch_power(
    cnp.float64_t[::1] tau,
    cnp.float64_t[::1] r,
    cnp.complex128_t[::1] y,
    cnp.float64_t[::1] carriers,
    cnp.float64_t[::1] doppler_slope,
    cnp.float64_t[::1] out,
):
    """Accumulate |sum_p conj(phi_p) y_p|^2 / P into ``out`` per hypothesis.

    doppler_slope holds f_p * t_p / c; conj(phi_p) advances the phase by
    +2*pi*(f_p*tau - doppler_slope_p*r).
    """
    cdef Py_ssize_t n = tau.shape[0]
    cdef Py_ssize_t p = y.shape[0]
    cdef Py_ssize_t i, j
    cdef double two_pi = 6.283185307179586476925287
    cdef double acc_re, acc_im, ph, cp, sp, yre, yim
    for i in range(n):
        acc_re = 0.0
        acc_im = 0.0
        for j in range(p):
            ph = two_pi * (carriers[j] * tau[i] - doppler_slope[j] * r[i])
            cp = cos(ph)
            sp = sin(ph)
            yre = y[j].real
            yim = y[j].imag
            acc_re += cp * yre - sp * yim
            acc_im += cp * yim + sp * yre
        out[i] += (acc_re * acc_re + acc_im * acc_im) / p

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled OD aggregation kernel.

Walks every origin-destination cell pair once and accumulates boarding,
alighting, flux, and transfer fields per travel direction. This is the
reference statement of the routing rule; ``_agg_numpy`` reproduces it with
vectorized reductions. Direction codes: E=0, W=1, N=2, S=3.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF D_E = 0
DEF D_W = 1
DEF D_N = 2
DEF D_S = 3


def accumulate_od(double[:, :, :, ::1] density, double delta):
    """Aggregate ``density[xo, yo, xd, yd]`` (pas/(km^4 hr)) on cells of
    size ``delta``. Returns ``(bo, al, fl, tr)``, each shaped (4, n, n).
    """
    cdef Py_ssize_t n = density.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] bo_a = np.zeros((4, n, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] al_a = np.zeros((4, n, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] fl_a = np.zeros((4, n, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] tr_a = np.zeros((4, n, n))
    cdef double[:, :, ::1] bo = bo_a
    cdef double[:, :, ::1] al = al_a
    cdef double[:, :, ::1] fl = fl_a
    cdef double[:, :, ::1] tr = tr_a

    cdef double d2 = delta * delta
    cdef double d3 = d2 * delta
    cdef Py_ssize_t xo, yo, xd, yd, x, y
    cdef Py_ssize_t hdir, vdir
    cdef double lam, w_cell, w_flux

    for xo in range(n):
        for yo in range(n):
            for xd in range(n):
                for yd in range(n):
                    lam = density[xo, yo, xd, yd]
                    if lam == 0.0:
                        continue
                    if xo == xd and yo == yd:
                        continue  # intra-cell trips never enter the network
                    hdir = D_E if xd > xo else D_W
                    vdir = D_N if yd > yo else D_S

                    if yo == yd:
                        # single horizontal leg, full weight, no transfer
                        w_cell = lam * d2
                        w_flux = lam * d3
                        bo[hdir, xo, yo] += w_cell
                        al[hdir, xd, yo] += w_cell
                        if xd > xo:
                            for x in range(xo, xd):
                                fl[D_E, x, yo] += w_flux
                        else:
                            for x in range(xd + 1, xo + 1):
                                fl[D_W, x, yo] += w_flux
                        continue
                    if xo == xd:
                        # single vertical leg
                        w_cell = lam * d2
                        w_flux = lam * d3
                        bo[vdir, xo, yo] += w_cell
                        al[vdir, xo, yd] += w_cell
                        if yd > yo:
                            for y in range(yo, yd):
                                fl[D_N, xo, y] += w_flux
                        else:
                            for y in range(yd + 1, yo + 1):
                                fl[D_S, xo, y] += w_flux
                        continue

                    # L-shaped trip: half the demand goes horizontal-first,
                    # half vertical-first, each with one transfer.
                    w_cell = 0.5 * lam * d2
                    w_flux = 0.5 * lam * d3

                    # horizontal-first: ride row yo, transfer at (xd, yo)
                    bo[hdir, xo, yo] += w_cell
                    if xd > xo:
                        for x in range(xo, xd):
                            fl[D_E, x, yo] += w_flux
                    else:
                        for x in range(xd + 1, xo + 1):
                            fl[D_W, x, yo] += w_flux
                    tr[vdir, xd, yo] += w_cell
                    if yd > yo:
                        for y in range(yo, yd):
                            fl[D_N, xd, y] += w_flux
                    else:
                        for y in range(yd + 1, yo + 1):
                            fl[D_S, xd, y] += w_flux
                    al[vdir, xd, yd] += w_cell

                    # vertical-first: ride column xo, transfer at (xo, yd)
                    bo[vdir, xo, yo] += w_cell
                    if yd > yo:
                        for y in range(yo, yd):
                            fl[D_N, xo, y] += w_flux
                    else:
                        for y in range(yd + 1, yo + 1):
                            fl[D_S, xo, y] += w_flux
                    tr[hdir, xo, yd] += w_cell
                    if xd > xo:
                        for x in range(xo, xd):
                            fl[D_E, x, yd] += w_flux
                    else:
                        for x in range(xd + 1, xo + 1):
                            fl[D_W, x, yd] += w_flux
                    al[hdir, xd, yd] += w_cell

    return bo_a, al_a, fl_a, tr_a

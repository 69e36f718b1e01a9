# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled assembly kernels; contract identical to _pykernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64

DEF DMAX = 3
DEF MMAX = 64    # max faces per cell


def cell_triplets(int d, long nc,
                  i64[::1] cf_off, i64[::1] cf_faces, f64[::1] cf_sign,
                  f64[::1] face_measure, f64[::1] face_size,
                  f64[:, ::1] face_normal, f64[:, ::1] face_centroid,
                  f64[::1] cell_measure, f64[:, ::1] cell_centroid):
    cdef long nblock = 0, c, m
    for c in range(nc):
        m = cf_off[c + 1] - cf_off[c]
        nblock += ((m + 1) * d) ** 2

    rows_arr = np.empty(nblock, dtype=np.int64)
    cols_arr = np.empty(nblock, dtype=np.int64)
    base_arr = np.empty(nblock, dtype=np.float64)
    sym_arr = np.empty(nblock, dtype=np.float64)
    div_arr = np.empty(nblock, dtype=np.float64)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef f64[::1] base = base_arr
    cdef f64[::1] symv = sym_arr
    cdef f64[::1] divv = div_arr

    cdef f64 S[DMAX][MMAX + 1]
    cdef f64 P[MMAX][MMAX + 1]
    cdef f64 stab[MMAX + 1][MMAX + 1]
    cdef f64 StS[MMAX + 1][MMAX + 1]
    cdef i64 ids[MMAX + 1]

    cdef long pos = 0, lo, hi, k, g, f, i, j, a, b, N
    cdef long row_dof, col_dof
    cdef f64 T, s, coefg, q, w, acc, base_ab, stab_ab

    for c in range(nc):
        lo = cf_off[c]
        hi = cf_off[c + 1]
        m = hi - lo
        if m > MMAX:
            raise ValueError("cell has more faces than the compiled kernel supports")
        N = m + 1
        T = cell_measure[c]

        # gradient map S and face-value rows P
        for i in range(d):
            S[i][0] = 0.0
        for k in range(m):
            f = cf_faces[lo + k]
            s = cf_sign[lo + k]
            coefg = face_measure[f] / T
            for i in range(d):
                S[i][k + 1] = coefg * s * face_normal[f, i]
                S[i][0] -= S[i][k + 1]
        for k in range(m):
            f = cf_faces[lo + k]
            P[k][0] = 1.0
            for g in range(m):
                q = 0.0
                for i in range(d):
                    q += (face_centroid[f, i] - cell_centroid[c, i]) \
                        * cf_sign[lo + g] * face_normal[cf_faces[lo + g], i]
                P[k][g + 1] = q * face_measure[cf_faces[lo + g]] / T
                P[k][0] -= P[k][g + 1]

        # stabilisation: sum_F (|F|/size_F) delta_F[a] delta_F[b]
        for a in range(N):
            for b in range(N):
                stab[a][b] = 0.0
        for k in range(m):
            f = cf_faces[lo + k]
            w = face_measure[f] / face_size[f]
            for a in range(N):
                for b in range(N):
                    stab[a][b] += w * (P[k][a] - (1.0 if a == k + 1 else 0.0)) \
                        * (P[k][b] - (1.0 if b == k + 1 else 0.0))
        for a in range(N):
            for b in range(N):
                acc = 0.0
                for i in range(d):
                    acc += S[i][a] * S[i][b]
                StS[a][b] = acc

        ids[0] = c
        for k in range(m):
            ids[k + 1] = nc + cf_faces[lo + k]

        for a in range(N):
            for i in range(d):
                row_dof = ids[a] * d + i
                for b in range(N):
                    base_ab = 0.5 * T * StS[a][b]
                    stab_ab = stab[a][b]
                    for j in range(d):
                        col_dof = ids[b] * d + j
                        rows[pos] = row_dof
                        cols[pos] = col_dof
                        if i == j:
                            base[pos] = base_ab + stab_ab
                        else:
                            base[pos] = 0.0
                        symv[pos] = 0.5 * T * S[j][a] * S[i][b]
                        divv[pos] = T * S[i][a] * S[j][b]
                        pos += 1
    return rows_arr, cols_arr, base_arr, sym_arr, div_arr


def face_triplets(int d, long nc, long nf,
                  i64[::1] cf_off, i64[::1] cf_faces, f64[::1] cf_sign,
                  f64[::1] face_measure, f64[::1] face_size,
                  f64[:, ::1] face_normal, f64[:, ::1] face_centroid,
                  f64[:, :, ::1] face_moment, i64[:, ::1] face_cells,
                  f64[::1] cell_measure, f64[:, ::1] cell_centroid):
    cdef long nblock = 0, f, c, ntot, side
    for f in range(nf):
        ntot = 0
        for side in range(2):
            c = face_cells[f, side]
            if c >= 0:
                ntot += cf_off[c + 1] - cf_off[c] + 1
        nblock += d * ntot * ntot

    rows_arr = np.empty(nblock, dtype=np.int64)
    cols_arr = np.empty(nblock, dtype=np.int64)
    vals_arr = np.empty(nblock, dtype=np.float64)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef f64[::1] vals = vals_arr

    cdef f64 alpha[2 * (MMAX + 1)]
    cdef f64 gamma[DMAX][2 * (MMAX + 1)]
    cdef i64 ids[2 * (MMAX + 1)]
    cdef f64 mg[DMAX]

    cdef long pos = 0, lo, hi, m, k, g, i, j, a, b, off
    cdef f64 sgn, T, coefg, q, Kab, inv_size

    for f in range(nf):
        ntot = 0
        for side in range(2):
            c = face_cells[f, side]
            if c < 0:
                continue
            sgn = 1.0 if side == 0 else -1.0
            lo = cf_off[c]
            hi = cf_off[c + 1]
            m = hi - lo
            if m > MMAX:
                raise ValueError("cell has more faces than the compiled kernel supports")
            T = cell_measure[c]
            off = ntot
            ids[off] = c
            for i in range(d):
                gamma[i][off] = 0.0
            alpha[off] = sgn
            for k in range(m):
                g = cf_faces[lo + k]
                coefg = face_measure[g] / T
                ids[off + k + 1] = nc + g
                for i in range(d):
                    gamma[i][off + k + 1] = sgn * coefg * cf_sign[lo + k] * face_normal[g, i]
                    gamma[i][off] -= gamma[i][off + k + 1]
                q = 0.0
                for i in range(d):
                    q += (face_centroid[f, i] - cell_centroid[c, i]) \
                        * cf_sign[lo + k] * face_normal[g, i]
                alpha[off + k + 1] = sgn * coefg * q
                alpha[off] -= alpha[off + k + 1]
            ntot += m + 1

        inv_size = 1.0 / face_size[f]
        for a in range(ntot):
            for i in range(d):
                mg[i] = 0.0
                for j in range(d):
                    mg[i] += face_moment[f, i, j] * gamma[j][a]
            for b in range(ntot):
                Kab = face_measure[f] * alpha[a] * alpha[b]
                for i in range(d):
                    Kab += gamma[i][b] * mg[i]
                Kab *= inv_size
                for i in range(d):
                    rows[pos] = ids[a] * d + i
                    cols[pos] = ids[b] * d + i
                    vals[pos] = Kab
                    pos += 1
    return rows_arr, cols_arr, vals_arr

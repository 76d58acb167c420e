# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled iterative decode kernel; mirrors _decode_py.decode_frame exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def decode_frame(codes_in, y_in):
    """Iterative decode over a complete observation.

    Same contract as the pure kernel: returns
    ``(report_rao, contained, viable_trace, decoded_trace)``.
    """
    codes_arr = np.ascontiguousarray(codes_in, dtype=np.int16)
    y_arr = np.ascontiguousarray(y_in, dtype=np.uint8)
    if codes_arr.ndim != 2 or y_arr.ndim != 2:
        raise ValueError("codes and y must be 2-D")
    cdef Py_ssize_t T = codes_arr.shape[0]
    cdef Py_ssize_t L = codes_arr.shape[1]
    cdef Py_ssize_t M = y_arr.shape[1]
    if y_arr.shape[0] != L:
        raise ValueError("observation row count does not match codes")

    cdef const short[:, ::1] codes = codes_arr
    cdef const unsigned char[:, ::1] y = y_arr

    report_arr = np.zeros(T, dtype=np.int32)
    contained_arr = np.zeros(T, dtype=np.uint8)
    viable_arr = np.ones(T, dtype=np.uint8)
    cover_arr = np.zeros(L * M, dtype=np.int32)
    handled_arr = np.zeros(L * M, dtype=np.uint8)
    viable_trace_arr = np.zeros(L, dtype=np.int32)
    decoded_trace_arr = np.zeros(L, dtype=np.int32)

    cdef int[::1] report = report_arr
    cdef unsigned char[::1] contained = contained_arr
    cdef unsigned char[::1] viable = viable_arr
    cdef int[::1] cover = cover_arr
    cdef unsigned char[::1] handled = handled_arr
    cdef int[::1] viable_trace = viable_trace_arr
    cdef int[::1] decoded_trace = decoded_trace_arr

    cdef Py_ssize_t c, r, p, i, cell, k
    cdef long total = 0
    cdef short q

    # owner CSR: cell -> candidate ids activating it
    starts_arr = np.zeros(L * M + 1, dtype=np.int64)
    cdef long[::1] starts = starts_arr
    for c in range(T):
        for r in range(L):
            q = codes[c, r]
            if q >= 0:
                starts[r * M + q + 1] += 1
                total += 1
    for cell in range(L * M):
        starts[cell + 1] += starts[cell]
    owners_arr = np.empty(total, dtype=np.int32)
    cursor_arr = np.asarray(starts_arr[:-1]).copy()
    cdef int[::1] owners = owners_arr
    cdef long[::1] cursor = cursor_arr
    for c in range(T):
        for r in range(L):
            q = codes[c, r]
            if q >= 0:
                cell = r * M + q
                owners[cursor[cell]] = <int> c
                cursor[cell] += 1
                cover[cell] += 1

    cdef long n_viable = T
    cdef long n_decoded = 0
    cdef int owner

    for i in range(L):
        # prune candidates whose row-i cell is absent from the observation
        for c in range(T):
            if viable[c]:
                q = codes[c, i]
                if q >= 0 and y[i, q] == 0:
                    viable[c] = 0
                    n_viable -= 1
                    for r in range(L):
                        q = codes[c, r]
                        if q >= 0:
                            cover[r * M + q] -= 1
        # report uniquely covered active cells of the received prefix
        for r in range(i + 1):
            for p in range(M):
                cell = r * M + p
                if y[r, p] != 0 and cover[cell] == 1 and handled[cell] == 0:
                    for k in range(starts[cell], starts[cell + 1]):
                        owner = owners[k]
                        if viable[owner]:
                            if report[owner] == 0:
                                report[owner] = <int> (i + 1)
                                n_decoded += 1
                            break
                    handled[cell] = 1
        viable_trace[i] = <int> n_viable
        decoded_trace[i] = <int> n_decoded

    # the end-of-frame flush belongs to RAO L: fold it into the last record
    for c in range(T):
        contained[c] = viable[c]
        if viable[c] and report[c] == 0:
            report[c] = <int> L
            n_decoded += 1
    if L > 0:
        decoded_trace[L - 1] = <int> n_decoded

    return report_arr, contained_arr, viable_trace_arr, decoded_trace_arr

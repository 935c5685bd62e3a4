"""Numba kernel for the embedded waiting-time recursion.

Processes pre-drawn chunks of (gap, service, patience) triples, carrying the
recursion state, per-batch statistics and an event heap of pending customer
exits used to integrate the queue-length step function exactly between
events.  Error codes: 0 ok, 1 nonfinite state, 2 exit-heap overflow.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# fstate slots
F_VPREV = 0   # offered waiting time right after the previous arrival
F_TPREV = 1   # epoch of the previous arrival
F_TLAST = 2   # queue-integration cursor
F_WIN_T0 = 3  # start of the measurement window

# istate slots
I_HEAPSIZE = 0
I_QNOW = 1
I_AB_TOTAL = 2
I_NSAMPLES = 3
I_INTEGRATING = 4
I_CURBATCH = 5


@njit(cache=True, nogil=True)
def _heap_push(heap, size, val):
    i = size
    heap[i] = val
    while i > 0:
        p = (i - 1) // 2
        if heap[p] <= heap[i]:
            break
        heap[p], heap[i] = heap[i], heap[p]
        i = p
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(heap, size):
    root = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        small = left
        right = left + 1
        if right < size and heap[right] < heap[left]:
            small = right
        if heap[i] <= heap[small]:
            break
        heap[i], heap[small] = heap[small], heap[i]
        i = small
    return root, size


@njit(cache=True, nogil=True)
def sim_chunk(
    gaps,
    servs,
    pats,
    start_index,
    horizon,
    burn_in,
    sqrt_n,
    orders,
    fstate,
    istate,
    heap,
    batch_sums,
    batch_counts,
    batch_ab,
    batch_qint,
    batch_qdur,
    samples,
    stride,
):
    nbatches = batch_counts.shape[0]
    n_orders = orders.shape[0]
    span = horizon - burn_in
    v_prev = fstate[F_VPREV]
    t_prev = fstate[F_TPREV]
    t_last = fstate[F_TLAST]
    heap_size = istate[I_HEAPSIZE]
    q_now = istate[I_QNOW]
    ab_total = istate[I_AB_TOTAL]
    written = istate[I_NSAMPLES]
    integrating = istate[I_INTEGRATING]
    cur_batch = istate[I_CURBATCH]

    for j in range(gaps.shape[0]):
        gi = start_index + j
        g = gaps[j]
        t = t_prev + g
        w = v_prev - g
        if w < 0.0:
            w = 0.0
        d = pats[j]
        ab = w >= d
        if ab:
            v_after = w
            exit_time = t + d
            ab_total += 1
        else:
            v_after = w + servs[j]
            exit_time = t + w + servs[j]
        if not np.isfinite(v_after):
            return 1

        # drain exits that occurred before this arrival
        while heap_size > 0 and heap[0] <= t:
            tau, heap_size = _heap_pop(heap, heap_size)
            if integrating == 1:
                dt_seg = tau - t_last
                batch_qint[cur_batch] += q_now * dt_seg
                batch_qdur[cur_batch] += dt_seg
                t_last = tau
            q_now -= 1

        post = gi >= burn_in
        if post and integrating == 0:
            integrating = 1
            t_last = t
            fstate[F_WIN_T0] = t
        if integrating == 1:
            dt_seg = t - t_last
            batch_qint[cur_batch] += q_now * dt_seg
            batch_qdur[cur_batch] += dt_seg
            t_last = t
        q_now += 1
        if heap_size >= heap.shape[0]:
            return 2
        heap_size = _heap_push(heap, heap_size, exit_time)

        if post:
            idx = gi - burn_in
            k = idx * nbatches // span
            cur_batch = k
            batch_counts[k] += 1
            if ab:
                batch_ab[k] += 1
            x = sqrt_n * w
            for o in range(n_orders):
                m = orders[o]
                if m == 1.0:
                    batch_sums[k, o] += x
                elif m == 2.0:
                    batch_sums[k, o] += x * x
                else:
                    batch_sums[k, o] += x**m
            if idx % stride == 0:
                samples[written] = x
                written += 1

        v_prev = v_after
        t_prev = t

    fstate[F_VPREV] = v_prev
    fstate[F_TPREV] = t_prev
    fstate[F_TLAST] = t_last
    istate[I_HEAPSIZE] = heap_size
    istate[I_QNOW] = q_now
    istate[I_AB_TOTAL] = ab_total
    istate[I_NSAMPLES] = written
    istate[I_INTEGRATING] = integrating
    istate[I_CURBATCH] = cur_batch
    return 0

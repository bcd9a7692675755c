"""Event-loop kernel for the multi-service queueing simulator.

This module is written in Cython "pure Python" mode: the same source runs
under the plain interpreter and, when compiled (see setup.py), as a C
extension that shadows it.  Both modes execute the identical algorithm and
produce bit-identical results; the compiled kernel is simply faster.

Model
-----
Each service is an M/M/c (or M/D/c) station: one shared FCFS queue over a
pool of interchangeable replicas.  A request realizes its call tree at
arrival (depth-first, edges in declared order, fractional multiplicities as
Bernoulli draws) into a flat span sequence; spans execute sequentially, the
replica is held only for the local service time, and end-to-end latency is
the sum of all waits and service times.  Requests that exceed the timeout
are abandoned at the client (recorded, user released) while their remaining
tree keeps executing as orphaned work; a span that meets a full queue drops
the whole request immediately.

Determinism
-----------
One splitmix64 stream per engine (documented, fixed across versions) feeds
every draw in event order.  The event queue orders by (time, insertion
sequence); the compiled and interpreted paths use different priority-queue
implementations with the identical ordering contract.
"""

import cython

from array import array
from collections import deque
from heapq import heappush, heappop

from cython.cimports.libc.math import log as _clog

MASK64 = 0xFFFFFFFFFFFFFFFF
INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

RNG_NAME = "splitmix64"  # fixed across versions; do not change

# event kinds
K_COMPLETE = 0   # a = service idx, b = request id
K_STARTUP = 1    # a = service idx, b = startup id
K_TIMEOUT = 2    # a = request id
K_THINK = 3      # closed-loop think phase ended
K_OPEN = 4       # a = open-loop generation
K_INJECT = 5     # a = request id (externally scheduled arrival)
K_SCALE = 6      # a = service idx, b = target

# request outcomes
OUT_PENDING = 0
OUT_SUCCESS = 1
OUT_TIMEOUT = 2
OUT_DROPPED = 3

MODE_CLOSED = 0
MODE_OPEN = 1


@cython.cclass
class Station:
    """Mutable state of one service's replica pool and queue."""

    mu: cython.double
    det: cython.bint
    cpu_factor: cython.double
    ready_idle: cython.longlong
    busy: cython.longlong
    retire_pending: cython.longlong
    qcap: cython.longlong
    min_r: cython.longlong
    max_r: cython.longlong
    base_mem_mb: cython.double
    per_util_mem_mb: cython.double
    busy_cs: cython.double
    area_n: cython.double
    last_t: cython.double
    c200: cython.longlong
    c408: cython.longlong
    c503: cython.longlong
    wait_sum: cython.double
    serv_sum: cython.double
    spans_started: cython.longlong
    spans_completed: cython.longlong
    queue: object      # deque of request ids
    pending: object    # list of (ready_time, startup_id), oldest first
    cancelled: object  # set of cancelled startup ids
    hist: object       # per-bucket (non-cumulative) observation counts
    edges: object      # list of (child_idx, whole_calls, extra_call_prob)

    def __init__(self, mu, det, cpu_factor, init_r, min_r, max_r, qcap,
                 base_mem_mb, per_util_mem_mb, n_buckets):
        self.mu = mu
        self.det = 1 if det else 0
        self.cpu_factor = cpu_factor
        self.ready_idle = init_r
        self.busy = 0
        self.retire_pending = 0
        self.qcap = qcap
        self.min_r = min_r
        self.max_r = max_r
        self.base_mem_mb = base_mem_mb
        self.per_util_mem_mb = per_util_mem_mb
        self.busy_cs = 0.0
        self.area_n = 0.0
        self.last_t = 0.0
        self.c200 = 0
        self.c408 = 0
        self.c503 = 0
        self.wait_sum = 0.0
        self.serv_sum = 0.0
        self.spans_started = 0
        self.spans_completed = 0
        self.queue = deque()
        self.pending = []
        self.cancelled = set()
        self.hist = [0] * (n_buckets + 1)
        self.edges = []


@cython.cclass
class Engine:
    """Deterministic discrete-event engine over a set of stations."""

    clock: cython.double
    entry: cython.longlong
    timeout_s: cython.double
    startup_delay: cython.double
    rng_s: cython.ulonglong
    stations: object          # list[Station]
    n_svc: cython.longlong
    bounds: cython.double[:]  # histogram bounds, milliseconds, ascending
    nb: cython.longlong

    # typed binary heap (compiled mode)
    typed_heap: cython.bint
    heap_t: cython.double[:]
    heap_s: cython.longlong[:]
    heap_k: cython.longlong[:]
    heap_a: cython.longlong[:]
    heap_b: cython.longlong[:]
    hn: cython.Py_ssize_t
    hcap: cython.Py_ssize_t
    pyheap: object            # interpreted mode: list of (t, seq, k, a, b)
    eseq: cython.longlong

    # popped event (valid after _pop_top)
    cur_t: cython.double
    cur_k: cython.longlong
    cur_a: cython.longlong
    cur_b: cython.longlong

    # request state, indexed by request id
    r_arrival: object
    r_completion: object
    r_latms: object
    r_outcome: object
    r_seq: object
    r_pos: object
    r_spanarr: object
    r_user: object
    n_req: cython.longlong

    injected: cython.longlong
    n_success: cython.longlong
    n_timeout: cython.longlong
    n_dropped: cython.longlong

    # user driver
    mode: cython.longlong
    think_s: cython.double
    rate_per_user: cython.double
    live_thinkers: cython.longlong
    awaiting: cython.longlong
    await_retire: cython.longlong
    think_cancel: cython.longlong
    open_gen: cython.longlong
    open_rate: cython.double

    next_sid: cython.longlong
    new_done: object  # request ids finalized since the last drain

    def __init__(self, svc_params, svc_edges, entry, timeout_s, startup_delay_s,
                 bounds_ms, seed):
        self.clock = 0.0
        self.entry = entry
        self.timeout_s = timeout_s
        self.startup_delay = startup_delay_s
        self.rng_s = seed & MASK64
        self.nb = len(bounds_ms)
        self.bounds = array("d", [float(b) for b in bounds_ms])
        self.stations = []
        for p in svc_params:
            (mu, det, cpu_factor, init_r, min_r, max_r, qcap,
             base_mem, per_util_mem) = p
            self.stations.append(Station(mu, det, cpu_factor, init_r, min_r,
                                         max_r, qcap, base_mem, per_util_mem,
                                         self.nb))
        self.n_svc = len(self.stations)
        for i in range(self.n_svc):
            st: Station = cython.cast(Station, self.stations[i])
            st.edges = [(int(c), int(w), float(f)) for (c, w, f) in svc_edges[i]]

        self.typed_heap = cython.compiled
        self.hcap = 1024
        self.hn = 0
        self.heap_t = array("d", bytes(8 * self.hcap))
        self.heap_s = array("q", bytes(8 * self.hcap))
        self.heap_k = array("q", bytes(8 * self.hcap))
        self.heap_a = array("q", bytes(8 * self.hcap))
        self.heap_b = array("q", bytes(8 * self.hcap))
        self.pyheap = []
        self.eseq = 0
        self.cur_t = 0.0
        self.cur_k = 0
        self.cur_a = 0
        self.cur_b = 0

        self.r_arrival = []
        self.r_completion = []
        self.r_latms = []
        self.r_outcome = []
        self.r_seq = []
        self.r_pos = []
        self.r_spanarr = []
        self.r_user = []
        self.n_req = 0
        self.injected = 0
        self.n_success = 0
        self.n_timeout = 0
        self.n_dropped = 0

        self.mode = MODE_CLOSED
        self.think_s = 1.0
        self.rate_per_user = 1.0
        self.live_thinkers = 0
        self.awaiting = 0
        self.await_retire = 0
        self.think_cancel = 0
        self.open_gen = 0
        self.open_rate = 0.0

        self.next_sid = 0
        self.new_done = []

    # ------------------------------------------------------------------ RNG

    @cython.cfunc
    def _next_u64(self) -> cython.ulonglong:
        self.rng_s = (self.rng_s + 0x9E3779B97F4A7C15) & MASK64
        z: cython.ulonglong = self.rng_s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    @cython.cfunc
    def _rand(self) -> cython.double:
        # uniform in [0, 1) with 53 random bits
        return (self._next_u64() >> 11) * INV_2_53

    @cython.cfunc
    def _exp(self, rate: cython.double) -> cython.double:
        # inverse-CDF draw; 1-u is in (0, 1] so the log is finite
        return -_clog(1.0 - self._rand()) / rate

    # ------------------------------------------------------------ event heap

    @cython.cfunc
    def _grow_heap(self):
        cap: cython.Py_ssize_t = self.hcap * 2
        nt = array("d", bytes(8 * cap))
        ns = array("q", bytes(8 * cap))
        nk = array("q", bytes(8 * cap))
        na = array("q", bytes(8 * cap))
        nbv = array("q", bytes(8 * cap))
        vt: cython.double[:] = nt
        vs: cython.longlong[:] = ns
        vk: cython.longlong[:] = nk
        va: cython.longlong[:] = na
        vb: cython.longlong[:] = nbv
        i: cython.Py_ssize_t
        for i in range(self.hn):
            vt[i] = self.heap_t[i]
            vs[i] = self.heap_s[i]
            vk[i] = self.heap_k[i]
            va[i] = self.heap_a[i]
            vb[i] = self.heap_b[i]
        self.heap_t = nt
        self.heap_s = ns
        self.heap_k = nk
        self.heap_a = na
        self.heap_b = nbv
        self.hcap = cap

    @cython.cfunc
    @cython.boundscheck(False)
    def _push(self, t: cython.double, kind: cython.longlong,
              a: cython.longlong, b: cython.longlong):
        s: cython.longlong = self.eseq
        self.eseq = s + 1
        if not self.typed_heap:
            heappush(self.pyheap, (t, s, kind, a, b))
            return
        if self.hn >= self.hcap:
            self._grow_heap()
        i: cython.Py_ssize_t = self.hn
        self.hn = i + 1
        p: cython.Py_ssize_t
        pt: cython.double
        ps: cython.longlong
        while i > 0:
            p = (i - 1) >> 1
            pt = self.heap_t[p]
            ps = self.heap_s[p]
            if pt < t or (pt == t and ps < s):
                break
            self.heap_t[i] = pt
            self.heap_s[i] = ps
            self.heap_k[i] = self.heap_k[p]
            self.heap_a[i] = self.heap_a[p]
            self.heap_b[i] = self.heap_b[p]
            i = p
        self.heap_t[i] = t
        self.heap_s[i] = s
        self.heap_k[i] = kind
        self.heap_a[i] = a
        self.heap_b[i] = b

    @cython.cfunc
    @cython.boundscheck(False)
    def _pop_top(self):
        if not self.typed_heap:
            ev = heappop(self.pyheap)
            self.cur_t = ev[0]
            self.cur_k = ev[2]
            self.cur_a = ev[3]
            self.cur_b = ev[4]
            return
        self.cur_t = self.heap_t[0]
        self.cur_k = self.heap_k[0]
        self.cur_a = self.heap_a[0]
        self.cur_b = self.heap_b[0]
        n: cython.Py_ssize_t = self.hn - 1
        self.hn = n
        if n <= 0:
            return
        t: cython.double = self.heap_t[n]
        s: cython.longlong = self.heap_s[n]
        k: cython.longlong = self.heap_k[n]
        a: cython.longlong = self.heap_a[n]
        b: cython.longlong = self.heap_b[n]
        i: cython.Py_ssize_t = 0
        c: cython.Py_ssize_t
        r: cython.Py_ssize_t
        ct: cython.double
        cs: cython.longlong
        while True:
            c = 2 * i + 1
            if c >= n:
                break
            r = c + 1
            if r < n and (self.heap_t[r] < self.heap_t[c]
                          or (self.heap_t[r] == self.heap_t[c]
                              and self.heap_s[r] < self.heap_s[c])):
                c = r
            ct = self.heap_t[c]
            cs = self.heap_s[c]
            if t < ct or (t == ct and s < cs):
                break
            self.heap_t[i] = ct
            self.heap_s[i] = cs
            self.heap_k[i] = self.heap_k[c]
            self.heap_a[i] = self.heap_a[c]
            self.heap_b[i] = self.heap_b[c]
            i = c
        self.heap_t[i] = t
        self.heap_s[i] = s
        self.heap_k[i] = k
        self.heap_a[i] = a
        self.heap_b[i] = b

    @cython.cfunc
    def _heap_empty(self) -> cython.bint:
        if self.typed_heap:
            return self.hn == 0
        return len(self.pyheap) == 0

    @cython.cfunc
    def _top_time(self) -> cython.double:
        if self.typed_heap:
            return self.heap_t[0]
        return self.pyheap[0][0]

    # ------------------------------------------------------------- stations

    @cython.cfunc
    def _upd_areas(self, st: Station, t: cython.double):
        dt: cython.double = t - st.last_t
        if dt > 0.0:
            st.busy_cs += st.busy * st.cpu_factor * dt
            st.area_n += (st.busy + len(st.queue)) * dt
            st.last_t = t

    @cython.cfunc
    @cython.boundscheck(False)
    def _observe(self, st: Station, d_ms: cython.double):
        # histogram observation: first bucket whose bound >= d_ms, else +Inf
        i: cython.longlong = 0
        while i < self.nb:
            if d_ms <= self.bounds[i]:
                break
            i += 1
        st.hist[i] += 1

    @cython.cfunc
    def _start_service(self, st: Station, svc: cython.longlong,
                       req: cython.longlong, t: cython.double):
        # caller has already accounted for where the replica came from
        st.busy += 1
        st.spans_started += 1
        st.wait_sum += t - self.r_spanarr[req]
        dur: cython.double
        if st.det:
            dur = 1.0 / st.mu
        else:
            dur = self._exp(st.mu)
        st.serv_sum += dur
        self._push(t + dur, K_COMPLETE, svc, req)

    @cython.cfunc
    def _arrive(self, svc: cython.longlong, req: cython.longlong, t: cython.double):
        st: Station = cython.cast(Station, self.stations[svc])
        self._upd_areas(st, t)
        if st.ready_idle > 0:
            st.ready_idle -= 1
            self._start_service(st, svc, req, t)
        elif len(st.queue) < st.qcap:
            st.queue.append(req)
        else:
            # drop: the whole request fails immediately
            st.c503 += 1
            st.hist[self.nb] += 1  # duration unknowable: +Inf bucket
            if self.r_outcome[req] == OUT_PENDING:
                self.r_outcome[req] = OUT_DROPPED
                self.r_completion[req] = t
                self.n_dropped += 1
                if svc != self.entry:
                    est: Station = cython.cast(Station, self.stations[self.entry])
                    est.c503 += 1
                    est.hist[self.nb] += 1
                self.new_done.append(req)
                self._release_user(req, t)
            # abandoned (timed-out) trees die silently at the dropping station

    @cython.cfunc
    def _release_user(self, req: cython.longlong, t: cython.double):
        if self.r_user[req]:
            self.awaiting -= 1
            if self.await_retire > 0:
                self.await_retire -= 1
            else:
                self._spawn_thinker(t)

    @cython.cfunc
    def _spawn_thinker(self, t: cython.double):
        self.live_thinkers += 1
        self._push(t + self._exp(1.0 / self.think_s), K_THINK, 0, 0)

    @cython.ccall
    def alloc_request(self, arrival_t: cython.double, from_user: cython.longlong) -> cython.longlong:
        rid: cython.longlong = self.n_req
        self.n_req = rid + 1
        self.injected += 1
        self.r_arrival.append(arrival_t)
        self.r_completion.append(-1.0)
        self.r_latms.append(-1.0)
        self.r_outcome.append(OUT_PENDING)
        self.r_seq.append(None)
        self.r_pos.append(0)
        self.r_spanarr.append(arrival_t)
        self.r_user.append(from_user)
        return rid

    @cython.cfunc
    def _expand_tree(self, svc: cython.longlong, out: list):
        st: Station = cython.cast(Station, self.stations[svc])
        child: cython.longlong
        whole: cython.longlong
        n: cython.longlong
        frac: cython.double
        for (child, whole, frac) in st.edges:
            n = whole
            if frac > 0.0 and self._rand() < frac:
                n += 1
            for _ in range(n):
                out.append(child)
                self._expand_tree(child, out)

    @cython.cfunc
    def _begin(self, req: cython.longlong, t: cython.double):
        seq = [self.entry]
        self._expand_tree(self.entry, seq)
        self.r_seq[req] = seq
        self.r_spanarr[req] = t
        self._push(t + self.timeout_s, K_TIMEOUT, req, 0)
        self._arrive(self.entry, req, t)

    @cython.cfunc
    def _finalize_success(self, req: cython.longlong, t: cython.double):
        if self.r_outcome[req] != OUT_PENDING:
            return  # orphaned tree finished after abandonment
        self.r_outcome[req] = OUT_SUCCESS
        self.r_completion[req] = t
        lat: cython.double = (t - self.r_arrival[req]) * 1000.0
        self.r_latms[req] = lat
        self.n_success += 1
        est: Station = cython.cast(Station, self.stations[self.entry])
        est.c200 += 1
        self._observe(est, lat)
        self.new_done.append(req)
        self._release_user(req, t)

    # ------------------------------------------------------------- dispatch

    @cython.cfunc
    def _on_complete(self, svc: cython.longlong, req: cython.longlong, t: cython.double):
        st: Station = cython.cast(Station, self.stations[svc])
        self._upd_areas(st, t)
        st.busy -= 1
        st.spans_completed += 1
        if st.retire_pending > 0:
            st.retire_pending -= 1  # replica drains away
        elif st.queue:
            nxt: cython.longlong = st.queue.popleft()
            self._start_service(st, svc, nxt, t)
        else:
            st.ready_idle += 1

        pos: cython.longlong = self.r_pos[req]
        if pos > 0:
            # internal span: record its local wait+service duration
            st.c200 += 1
            self._observe(st, (t - self.r_spanarr[req]) * 1000.0)
        pos += 1
        self.r_pos[req] = pos
        seq: list = self.r_seq[req]
        if pos < len(seq):
            self.r_spanarr[req] = t
            self._arrive(seq[pos], req, t)
        else:
            self._finalize_success(req, t)

    @cython.cfunc
    def _on_startup(self, svc: cython.longlong, sid: cython.longlong, t: cython.double):
        st: Station = cython.cast(Station, self.stations[svc])
        if sid in st.cancelled:
            st.cancelled.discard(sid)
            return
        i: cython.Py_ssize_t
        for i in range(len(st.pending)):
            if st.pending[i][1] == sid:
                del st.pending[i]
                break
        self._upd_areas(st, t)
        if st.queue:
            nxt: cython.longlong = st.queue.popleft()
            self._start_service(st, svc, nxt, t)
        else:
            st.ready_idle += 1

    @cython.cfunc
    def _on_timeout(self, req: cython.longlong, t: cython.double):
        if self.r_outcome[req] != OUT_PENDING:
            return
        self.r_outcome[req] = OUT_TIMEOUT
        self.r_completion[req] = t
        lat: cython.double = self.timeout_s * 1000.0
        self.r_latms[req] = lat
        self.n_timeout += 1
        est: Station = cython.cast(Station, self.stations[self.entry])
        est.c408 += 1
        self._observe(est, lat)
        self.new_done.append(req)
        self._release_user(req, t)
        # the in-flight tree keeps executing as orphaned work

    @cython.cfunc
    def _on_think(self, t: cython.double):
        if self.think_cancel > 0:
            self.think_cancel -= 1
            return
        self.live_thinkers -= 1
        self.awaiting += 1
        req: cython.longlong = self.alloc_request(t, 1)
        self._begin(req, t)

    @cython.cfunc
    def _on_open(self, gen: cython.longlong, t: cython.double):
        if gen != self.open_gen:
            return  # stale arrival stream
        req: cython.longlong = self.alloc_request(t, 0)
        self._begin(req, t)
        if self.open_rate > 0.0:
            self._push(t + self._exp(self.open_rate), K_OPEN, self.open_gen, 0)

    # --------------------------------------------------------------- public

    @cython.ccall
    def advance(self, t: cython.double) -> list:
        """Process every event with time <= t; return newly finalized ids."""
        k: cython.longlong
        while not self._heap_empty() and self._top_time() <= t:
            self._pop_top()
            self.clock = self.cur_t
            k = self.cur_k
            if k == K_COMPLETE:
                self._on_complete(self.cur_a, self.cur_b, self.cur_t)
            elif k == K_THINK:
                self._on_think(self.cur_t)
            elif k == K_TIMEOUT:
                self._on_timeout(self.cur_a, self.cur_t)
            elif k == K_OPEN:
                self._on_open(self.cur_a, self.cur_t)
            elif k == K_STARTUP:
                self._on_startup(self.cur_a, self.cur_b, self.cur_t)
            elif k == K_INJECT:
                self._begin(self.cur_a, self.cur_t)
            elif k == K_SCALE:
                self.scale_now(self.cur_a, self.cur_b)
        self.clock = t
        out = self.new_done
        self.new_done = []
        return out

    @cython.ccall
    def schedule_inject(self, arrival_t: cython.double) -> cython.longlong:
        rid: cython.longlong = self.alloc_request(arrival_t, 0)
        self._push(arrival_t, K_INJECT, rid, 0)
        return rid

    @cython.ccall
    def scale_now(self, svc: cython.longlong, target: cython.longlong) -> cython.longlong:
        """Apply a replica-count set-point at the current clock; returns it clamped."""
        st: Station = cython.cast(Station, self.stations[svc])
        tgt: cython.longlong = target
        if tgt < st.min_r:
            tgt = st.min_r
        elif tgt > st.max_r:
            tgt = st.max_r
        live: cython.longlong = (st.ready_idle + st.busy - st.retire_pending
                                 + len(st.pending))
        d: cython.longlong = tgt - live
        u: cython.longlong
        if d > 0:
            # recover draining replicas first, then boot new ones
            u = st.retire_pending if st.retire_pending < d else d
            st.retire_pending -= u
            d -= u
            rt: cython.double = self.clock + self.startup_delay
            for _ in range(d):
                st.pending.append((rt, self.next_sid))
                self._push(rt, K_STARTUP, svc, self.next_sid)
                self.next_sid += 1
        elif d < 0:
            need: cython.longlong = -d
            # cancel the newest boots first, then idle replicas, then drain busy ones
            while need > 0 and st.pending:
                st.cancelled.add(st.pending.pop()[1])
                need -= 1
            if need > 0:
                u = st.ready_idle if st.ready_idle < need else need
                st.ready_idle -= u
                need -= u
            if need > 0:
                st.retire_pending += need
        return tgt

    @cython.ccall
    def schedule_scale(self, svc: cython.longlong, target: cython.longlong,
                       at_t: cython.double) -> cython.longlong:
        """Clamped target applied when the clock reaches at_t."""
        st: Station = cython.cast(Station, self.stations[svc])
        tgt: cython.longlong = target
        if tgt < st.min_r:
            tgt = st.min_r
        elif tgt > st.max_r:
            tgt = st.max_r
        self._push(at_t, K_SCALE, svc, tgt)
        return tgt

    @cython.ccall
    def set_closed_model(self, think_s: cython.double):
        self.mode = MODE_CLOSED
        self.think_s = think_s

    @cython.ccall
    def set_open_model(self, rate_per_user: cython.double):
        self.mode = MODE_OPEN
        self.rate_per_user = rate_per_user

    @cython.ccall
    def set_user_target(self, n: cython.longlong):
        """Track a trace step: spawn or retire users at the current clock."""
        if self.mode == MODE_OPEN:
            self.open_gen += 1
            self.open_rate = n * self.rate_per_user
            if self.open_rate > 0.0:
                self._push(self.clock + self._exp(self.open_rate), K_OPEN,
                           self.open_gen, 0)
            return
        cur: cython.longlong = self.live_thinkers + self.awaiting - self.await_retire
        d: cython.longlong = n - cur
        if d > 0:
            for _ in range(d):
                self._spawn_thinker(self.clock)
        elif d < 0:
            need: cython.longlong = -d
            c: cython.longlong = self.live_thinkers if self.live_thinkers < need else need
            self.think_cancel += c
            self.live_thinkers -= c
            need -= c
            self.await_retire += need

    @cython.ccall
    def active_users(self) -> cython.longlong:
        if self.mode == MODE_OPEN:
            return 0
        return self.live_thinkers + self.awaiting - self.await_retire

    # ------------------------------------------------------------ accessors

    @cython.ccall
    def clock_s(self) -> cython.double:
        return self.clock

    @cython.ccall
    def counts(self, i: cython.longlong) -> tuple:
        """(ready, busy, queued, pending, retiring) for service i."""
        st: Station = cython.cast(Station, self.stations[i])
        return (st.ready_idle + st.busy, st.busy, len(st.queue),
                len(st.pending), st.retire_pending)

    @cython.ccall
    def counters(self, i: cython.longlong) -> tuple:
        st: Station = cython.cast(Station, self.stations[i])
        return (st.c200, st.c408, st.c503)

    @cython.ccall
    def hist_cumulative(self, i: cython.longlong) -> list:
        st: Station = cython.cast(Station, self.stations[i])
        out = []
        running = 0
        for v in st.hist:
            running += v
            out.append(running)
        return out

    @cython.ccall
    def busy_core_seconds(self, i: cython.longlong) -> cython.double:
        st: Station = cython.cast(Station, self.stations[i])
        return st.busy_cs + st.busy * st.cpu_factor * (self.clock - st.last_t)

    @cython.ccall
    def cpu_rate_cores(self, i: cython.longlong) -> cython.double:
        st: Station = cython.cast(Station, self.stations[i])
        return st.busy * st.cpu_factor

    @cython.ccall
    def memory_bytes(self, i: cython.longlong) -> cython.longlong:
        """Whole bytes so that node-level sums stay exact in 64-bit floats."""
        st: Station = cython.cast(Station, self.stations[i])
        ready: cython.longlong = st.ready_idle + st.busy
        if ready == 0:
            return 0
        util: cython.double = st.busy / cython.cast(cython.double, ready)
        mb: cython.double = ready * (st.base_mem_mb + util * st.per_util_mem_mb)
        return cython.cast(cython.longlong, round(mb * 1048576.0))

    @cython.ccall
    def area_in_system(self, i: cython.longlong) -> cython.double:
        st: Station = cython.cast(Station, self.stations[i])
        return st.area_n + (st.busy + len(st.queue)) * (self.clock - st.last_t)

    @cython.ccall
    def span_stats(self, i: cython.longlong) -> tuple:
        """(started, completed, wait_sum_s, service_sum_s) for service i."""
        st: Station = cython.cast(Station, self.stations[i])
        return (st.spans_started, st.spans_completed, st.wait_sum, st.serv_sum)

    @cython.ccall
    def totals(self) -> tuple:
        """(injected, success, timeout, dropped, in_flight)."""
        inflight: cython.longlong = (self.injected - self.n_success
                                     - self.n_timeout - self.n_dropped)
        return (self.injected, self.n_success, self.n_timeout, self.n_dropped,
                inflight)

    @cython.ccall
    def n_requests(self) -> cython.longlong:
        return self.n_req

    @cython.ccall
    def record_of(self, rid: cython.longlong) -> tuple:
        """(arrival_s, completion_s, latency_ms, outcome) — sentinels are -1.0."""
        return (self.r_arrival[rid], self.r_completion[rid],
                self.r_latms[rid], self.r_outcome[rid])

    @cython.ccall
    def rng_draws(self, n: cython.longlong) -> list:
        """Consume and return n uniform [0,1) draws (test/benchmark probe)."""
        return [self._rand() for _ in range(n)]


KERNEL_COMPILED: bool = bool(cython.compiled)

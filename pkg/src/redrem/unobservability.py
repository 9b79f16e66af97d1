"""Unobservability propagation over a completed run, and the exact
on-demand check.

Masks justified by a real controlling side input hold for any single-pin
fault (the side input is upstream of the fault, so its value cannot be
disturbed).  A stem whose out-edges are all marked is assumed fully
unobservable without a check; that assumption is exact only as long as no
mask on the chain can depend on the stem's own value, which is guaranteed
when every completed stem on the chain was unassigned in the run.  Stems
that were assigned (or that inherit from one) leave a taint bit behind,
and the removal search falls back to the exact check for tainted
candidates.  The baseline mode instead verifies every stem at completion
time and stops the propagation when the verification fails.

A vertex driving a primary output carries one virtual, never-maskable
observation edge, so it is never reported fully unobservable.
"""

from __future__ import annotations

from .netlist import Circuit, CONTROLLING, CONTROLLED
from .implication import RunState, MASTER_NULL, MASTER_ALL, MASTER_ALL_STEM


class ObsState:
    """Per-run unobservable-edge counters, visited marks, and the taint
    bits for stem assumptions that passed through assigned vertices."""

    def __init__(self, n: int):
        self.epoch = 0
        self.cnt = [[0] * n, [0] * n]
        self.cep = [[-1] * n, [-1] * n]
        # bit 0: completion tainted; bit 1: tainted mark arrived on an edge
        self.tnt = [[0] * n, [0] * n]
        self.tep = [[-1] * n, [-1] * n]
        self.vis = [-1] * n
        self.vepoch = 0

    def ensure(self, n: int):
        for arr in (*self.cnt, *self.tnt):
            if len(arr) < n:
                arr.extend([0] * (n - len(arr)))
        for arr in (*self.cep, *self.tep):
            if len(arr) < n:
                arr.extend([-1] * (n - len(arr)))
        if len(self.vis) < n:
            self.vis.extend([-1] * (n - len(self.vis)))

    def reset_counts(self):
        self.epoch += 1

    def reset_visited(self):
        self.vepoch += 1

    def count(self, i: int, vid: int) -> int:
        return self.cnt[i][vid] if self.cep[i][vid] == self.epoch else 0

    def bump(self, i: int, vid: int) -> int:
        if self.cep[i][vid] != self.epoch:
            self.cnt[i][vid] = 0
            self.cep[i][vid] = self.epoch
        self.cnt[i][vid] += 1
        return self.cnt[i][vid]

    def _tnt_bits(self, i, vid):
        return self.tnt[i][vid] if self.tep[i][vid] == self.epoch else 0

    def _set_tnt(self, i, vid, bit):
        cur = self._tnt_bits(i, vid)
        self.tnt[i][vid] = cur | bit
        self.tep[i][vid] = self.epoch

    def mark_completion_tainted(self, i, vid):
        self._set_tnt(i, vid, 1)

    def completion_tainted(self, i, vid) -> bool:
        return bool(self._tnt_bits(i, vid) & 1)

    def note_tainted_mark(self, i, vid):
        self._set_tnt(i, vid, 2)

    def has_tainted_mark(self, i, vid) -> bool:
        return bool(self._tnt_bits(i, vid) & 2)

    def visited(self, vid: int) -> bool:
        return self.vis[vid] == self.vepoch

    def mark_visited(self, vid: int):
        self.vis[vid] = self.vepoch


def output_drivers(circuit: Circuit) -> set[int]:
    return set(circuit.outputs.values())


_INIT, _CO, _CO_TAINTED, _PROP = 0, 1, 2, 3


def _drive(circuit: Circuit, rs: RunState, obs: ObsState, i: int, events,
           fire_mode: bool, counters, out_driven: set[int]) -> None:
    """Run the init/count/propagate cascade; events is a LIFO stack, so
    children are pushed reversed to reproduce the recursive call order."""
    verts = circuit.vertices
    epoch = obs.epoch
    vepoch = obs.vepoch
    vis = obs.vis
    cnt, cep = obs.cnt[i], obs.cep[i]
    tnt, tep = obs.tnt[i], obs.tep[i]
    val_ep = rs.vep[i]
    mas, mep = rs.mas[i], rs.mep[i]
    rs_epoch = rs.epoch
    stack = list(events)
    push = stack.append
    while stack:
        op, v = stack.pop()
        if op == _INIT:
            if vis[v] == vepoch:
                continue
            m = mas[v] if mep[v] == rs_epoch else MASTER_NULL
            if m == MASTER_NULL:
                # controlled output reached by backward justification only:
                # no controlling input is identified, so no input edge of v
                # is known to be masked
                continue
            vis[v] = vepoch
            for src in reversed(verts[v].fanins):
                if src != m:
                    push((_CO, src))
        elif op != _PROP:  # _CO or _CO_TAINTED
            if tep[v] != epoch:
                tnt[v] = 0
                tep[v] = epoch
            if op == _CO_TAINTED:
                tnt[v] |= 2
            if cep[v] != epoch:
                cnt[v] = 0
                cep[v] = epoch
            cnt[v] += 1
            vv = verts[v]
            full = len(vv.fanouts) + (1 if v in out_driven else 0)
            if cnt[v] == full:
                if fire_mode:
                    counters["unobservability_checks"] += 1
                    if not stem_unobservable(circuit, rs, obs, v, i, out_driven):
                        continue
                else:
                    # stem assumed unobservable with no check; remember
                    # when the assumption leans on the stem's own value
                    if val_ep[v] == rs_epoch or tnt[v] & 2:
                        tnt[v] |= 1
                if not (mep[v] == rs_epoch and mas[v] == MASTER_ALL):
                    mas[v] = MASTER_ALL_STEM
                    mep[v] = rs_epoch
                push((_PROP, v))
        else:  # _PROP
            if vis[v] == vepoch:
                # Already seeded: the non-master inputs were counted at
                # init time.  The master edge is not counted; doing so
                # would extend the stem assumption past the master with no
                # record of the dependency.
                continue
            vis[v] = vepoch
            taint = (not fire_mode) and tep[v] == epoch and tnt[v] & 1
            co = _CO_TAINTED if taint else _CO
            for src in reversed(verts[v].fanins):
                push((co, src))


def seed_unobservability(circuit: Circuit, rs: RunState, obs: ObsState,
                         queue, i: int, fire_mode: bool, counters,
                         out_driven: set[int] | None = None) -> None:
    """Start propagation at every queue vertex sitting at its controlled
    value (gates without controlled values never seed)."""
    if out_driven is None:
        out_driven = output_drivers(circuit)
    obs.reset_visited()
    verts = circuit.vertices
    events = []
    for v, j in queue:
        if v in verts and CONTROLLED[verts[v].kind] == j:
            events.append((_INIT, v))
    if events:
        # one LIFO drive keeps per-seed cascade order: each init is popped
        # and fully cascaded before the next one starts
        _drive(circuit, rs, obs, i, list(reversed(events)), fire_mode,
               counters, out_driven)


def candidate_needs_check(rs: RunState, obs: ObsState, v: int, u: int,
                          i: int) -> bool:
    """True when the edge (v,u) may only be removed after the exact check:
    either its source carries a value in run i, or the mask justifying it
    is a stem assumption that leaned on an assigned vertex."""
    if rs.value(i, v) is not None:
        return True
    return (rs.master(i, u) == MASTER_ALL_STEM
            and obs.completion_tainted(i, u))


def overapprox_init(circuit, rs, obs, v, i, fire_mode=False, counters=None,
                    out_driven=None):
    if out_driven is None:
        out_driven = output_drivers(circuit)
    _drive(circuit, rs, obs, i, [(_INIT, v)], fire_mode,
           counters or _null_counters(), out_driven)


def check_outputs(circuit, rs, obs, v, i, fire_mode=False, counters=None,
                  out_driven=None):
    if out_driven is None:
        out_driven = output_drivers(circuit)
    _drive(circuit, rs, obs, i, [(_CO, v)], fire_mode,
           counters or _null_counters(), out_driven)


def overapprox_propagate(circuit, rs, obs, v, i, fire_mode=False,
                         counters=None, out_driven=None):
    if out_driven is None:
        out_driven = output_drivers(circuit)
    _drive(circuit, rs, obs, i, [(_PROP, v)], fire_mode,
           counters or _null_counters(), out_driven)


def _null_counters():
    return {"unobservability_checks": 0}


def unobservability_rec(circuit: Circuit, rs: RunState, obs: ObsState,
                        v: int, i: int, seen: set,
                        out_driven: set[int] | None = None) -> bool:
    """Confirm that v's output cannot reach a primary output under the
    run-i values.  Every out-edge must be masked by a controlling side
    input outside the traversal, or lead to a vertex whose outputs are all
    marked unobservable and recursively confirm."""
    if out_driven is None:
        out_driven = output_drivers(circuit)
    verts = circuit.vertices
    if v in seen:
        return True
    if v in out_driven:
        return False
    seen.add(v)
    frames = [[verts[v].fanouts, 0]]
    while frames:
        frame = frames[-1]
        fanouts, idx = frame
        if idx == len(fanouts):
            frames.pop()
            continue
        frame[1] += 1
        u = fanouts[idx]
        uv = verts[u]
        c = CONTROLLING[uv.kind]
        if c is not None:
            masked = False
            for w in uv.fanins:
                if w not in seen and rs.value(i, w) == c:
                    masked = True
                    break
            if masked:
                continue
        if u in out_driven or obs.count(i, u) != len(uv.fanouts):
            return False
        if u not in seen:
            seen.add(u)
            frames.append([uv.fanouts, 0])
    return True


def stem_unobservable(circuit, rs, obs, v, i, out_driven=None) -> bool:
    """Baseline stem verification at propagation time (fresh visited set)."""
    return unobservability_rec(circuit, rs, obs, v, i, set(), out_driven)


def check_unobservability(circuit: Circuit, rs: RunState, obs: ObsState,
                          v: int, u: int, i: int,
                          out_driven: set[int] | None = None) -> bool:
    """Exact check that edge (v,u) is unobservable under the run-i values:
    either a side input of u carries a controlling value, or u's output is
    itself fully unobservable and confirmed by traversal."""
    if out_driven is None:
        out_driven = output_drivers(circuit)
    uv = circuit.vertices[u]
    c = CONTROLLING[uv.kind]
    if c is not None:
        for w in uv.fanins:
            if w != v and rs.value(i, w) == c:
                return True
    if u in out_driven or obs.count(i, u) != len(uv.fanouts):
        return False
    return unobservability_rec(circuit, rs, obs, u, i, set(), out_driven)

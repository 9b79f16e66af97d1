"""Ternary constant propagation, indirect-implication learning by
contraposition, and the region-based invalidation bookkeeping that keeps
the learned database consistent across removals.

A "run" assigns one vertex a value and derives every forced value from
it.  The values discovered by run i form the queue Q(i); each entry (u,j)
means u = j is a necessary consequence of the run's base assignment.
"""

from __future__ import annotations

from array import array
from collections import deque

from .netlist import Circuit, Kind, CONTROLLING, CONTROLLED, CONST_KINDS

MASTER_NULL = -1
MASTER_ALL = -2        # two or more controlling inputs: every pin masked
MASTER_ALL_STEM = -3   # every out-edge marked unobservable (stem assumption)


class Contradiction(Exception):
    """A forced value conflicts with an existing assignment."""


def deduce(kind: Kind, in_vals, out_val):
    """Single-gate forced values from a partial pin assignment.

    in_vals holds 0/1/None per pin, out_val the output (None if free).
    Returns (pos, value) pairs, pos -1 for the output; pairs whose target
    already holds the same value are omitted, conflicting ones are kept so
    the caller can detect the contradiction.
    """
    out = []

    def force(pos, val, cur):
        if cur != val:
            out.append((pos, val))

    c = CONTROLLING[kind]
    if c is not None:
        d = CONTROLLED[kind]
        nd = d ^ 1
        n_ctrl = 0
        unassigned = []
        for p, x in enumerate(in_vals):
            if x == c:
                n_ctrl += 1
            elif x is None:
                unassigned.append(p)
        if n_ctrl:
            force(-1, d, out_val)
        elif not unassigned:
            force(-1, nd, out_val)
        if out_val == nd:
            for p, x in enumerate(in_vals):
                force(p, c ^ 1, x)
        elif out_val == d and n_ctrl == 0 and len(unassigned) == 1:
            force(unassigned[0], c, None)
        return out

    if kind == Kind.NOT or kind == Kind.BUF:
        flip = 1 if kind == Kind.NOT else 0
        if in_vals[0] is not None:
            force(-1, in_vals[0] ^ flip, out_val)
        if out_val is not None:
            force(0, out_val ^ flip, in_vals[0])
        return out

    if kind == Kind.XOR or kind == Kind.XNOR:
        inv = 1 if kind == Kind.XNOR else 0
        parity = 0
        missing = None
        n_missing = 0
        for p, x in enumerate(in_vals):
            if x is None:
                missing = p
                n_missing += 1
            else:
                parity ^= x
        if n_missing == 0:
            force(-1, parity ^ inv, out_val)
        elif n_missing == 1 and out_val is not None:
            force(missing, out_val ^ parity ^ inv, None)
        return out

    if kind == Kind.CONST0:
        force(-1, 0, out_val)
    elif kind == Kind.CONST1:
        force(-1, 1, out_val)
    return out


class RunState:
    """Per-run scratch: ternary values, controlling-input masters, and the
    per-gate input counters that drive forcing, for both runs of the
    current base vertex.  Epoch counters stand in for whole-array resets."""

    def __init__(self, n: int):
        self.epoch = 0
        self.val = [[0] * n, [0] * n]
        self.vep = [[-1] * n, [-1] * n]
        self.mas = [[0] * n, [0] * n]
        self.mep = [[-1] * n, [-1] * n]
        # assigned-input count, controlling-input count, assigned parity
        self.na = [[0] * n, [0] * n]
        self.nc = [[0] * n, [0] * n]
        self.par = [[0] * n, [0] * n]
        self.cep = [[-1] * n, [-1] * n]

    def ensure(self, n: int):
        for arr in (*self.val, *self.mas, *self.na, *self.nc, *self.par):
            if len(arr) < n:
                arr.extend([0] * (n - len(arr)))
        for arr in (*self.vep, *self.mep, *self.cep):
            if len(arr) < n:
                arr.extend([-1] * (n - len(arr)))

    def reset(self):
        self.epoch += 1

    def value(self, i: int, vid: int):
        return self.val[i][vid] if self.vep[i][vid] == self.epoch else None

    def set_value(self, i: int, vid: int, b: int):
        self.val[i][vid] = b
        self.vep[i][vid] = self.epoch

    def master(self, i: int, vid: int) -> int:
        return self.mas[i][vid] if self.mep[i][vid] == self.epoch else MASTER_NULL

    def set_master(self, i: int, vid: int, m: int):
        self.mas[i][vid] = m
        self.mep[i][vid] = self.epoch

    def note_controlling(self, i: int, gate: int, src: int):
        cur = self.master(i, gate)
        if cur == MASTER_NULL:
            self.set_master(i, gate, src)
        elif cur != src and cur != MASTER_ALL:
            self.set_master(i, gate, MASTER_ALL)


class ImplicationStore:
    """Learned indirect implications plus per-vertex invalidation flags.

    A pair (t,k) stored under key (v,j) encodes (v=j) -> (t=k); it is
    applied during propagation only while invalid_implication(t) is off.
    Pair lists are packed int arrays to stay compact on large runs.
    """

    def __init__(self):
        self._lists: dict[int, array] = {}
        self._invalid: set[int] = set()

    def add(self, v: int, j: int, t: int, k: int) -> bool:
        key = v * 2 + j
        lst = self._lists.get(key)
        if lst is None:
            lst = self._lists[key] = array("l")
        lst.append(t * 2 + k)
        return True

    def get(self, v: int, j: int):
        return self._lists.get(v * 2 + j, ())

    def has_any(self, v: int) -> bool:
        return bool(self._lists.get(v * 2)) or bool(self._lists.get(v * 2 + 1))

    def clear_vertex(self, v: int) -> int:
        n = 0
        for key in (v * 2, v * 2 + 1):
            lst = self._lists.pop(key, None)
            if lst:
                n += len(lst)
        return n

    def mark_invalid(self, v: int) -> bool:
        if v in self._invalid:
            return False
        self._invalid.add(v)
        return True

    def is_invalid(self, v: int) -> bool:
        return v in self._invalid

    def entries(self):
        """Yield every stored implication as (v, j, t, k)."""
        for key in self._lists:
            v, j = divmod(key, 2)
            for packed in self._lists[key]:
                t, k = divmod(packed, 2)
                yield v, j, t, k


_K_AND, _K_NAND, _K_OR, _K_NOR = Kind.AND, Kind.NAND, Kind.OR, Kind.NOR
_K_NOT, _K_BUF, _K_XOR, _K_XNOR = Kind.NOT, Kind.BUF, Kind.XOR, Kind.XNOR
_K_INPUT, _K_C0, _K_C1 = Kind.INPUT, Kind.CONST0, Kind.CONST1
_CTRL = [CONTROLLING[k] for k in Kind]
_CTRLD = [CONTROLLED[k] for k in Kind]


def propagate_uncontrollability(circuit: Circuit, store: ImplicationStore,
                                rs: RunState, v_base: int, i: int,
                                use_indirect: bool = True):
    """Assign v_base := i and chase direct plus valid learned implications
    to a fixpoint, breadth-first in discovery order.

    Returns the run queue [(vid, value), ...] (first entry the base
    assignment), or None if the assignment contradicts itself.  Fills the
    controlling-input master pointers as a side effect.

    Per-gate forcing is driven by incremental counters (assigned inputs,
    controlling inputs, input parity) so each pin event costs O(1); full
    pin scans happen only when a forcing rule actually triggers.
    """
    verts = circuit.vertices
    epoch = rs.epoch
    val, vep = rs.val[i], rs.vep[i]
    na, nc, par, cep = rs.na[i], rs.nc[i], rs.par[i], rs.cep[i]
    mas, mep = rs.mas[i], rs.mep[i]
    queue: list[tuple[int, int]] = []
    work = deque()
    push = work.append

    def assign(vid, b):
        if vep[vid] == epoch:
            if val[vid] != b:
                raise Contradiction
            return
        val[vid] = b
        vep[vid] = epoch
        queue.append((vid, b))
        push(vid)

    def force_lone_input(gv, c):
        # exactly one input unassigned: it must carry the controlling value
        for s in gv.fanins:
            if vep[s] != epoch:
                assign(s, c)
                return

    def on_output(g, gval):
        """g's own output value just became known: backward rules."""
        gv = verts[g]
        k = gv.kind
        if k == _K_INPUT:
            return
        if k == _K_C0 or k == _K_C1:
            if gval != (1 if k == _K_C1 else 0):
                raise Contradiction
            return
        if k == _K_NOT or k == _K_BUF:
            assign(gv.fanins[0], gval ^ (1 if k == _K_NOT else 0))
            return
        arity = len(gv.fanins)
        if cep[g] != epoch:
            cep[g] = epoch
            na[g] = nc[g] = par[g] = 0
        if k == _K_XOR or k == _K_XNOR:
            if na[g] == arity - 1:
                want = gval ^ par[g] ^ (1 if k == _K_XNOR else 0)
                for s in gv.fanins:
                    if vep[s] != epoch:
                        assign(s, want)
                        return
            return
        c = _CTRL[k]
        d = _CTRLD[k]
        if gval == d ^ 1:
            # non-controlled output: every input at its non-controlling value
            ncv = c ^ 1
            for s in gv.fanins:
                assign(s, ncv)
        elif nc[g] == 0 and na[g] == arity - 1:
            force_lone_input(gv, c)

    def on_input(g, xv, x):
        """one input pin of g (sourced at x) was just assigned xv."""
        gv = verts[g]
        k = gv.kind
        if k == _K_NOT or k == _K_BUF:
            b = xv ^ (1 if k == _K_NOT else 0)
            if vep[g] != epoch or val[g] != b:
                assign(g, b)
            return
        arity = len(gv.fanins)
        if cep[g] != epoch:
            cep[g] = epoch
            na[g] = nc[g] = par[g] = 0
        na[g] += 1
        if k == _K_XOR or k == _K_XNOR:
            par[g] ^= xv
            if na[g] == arity:
                assign(g, par[g] ^ (1 if k == _K_XNOR else 0))
            elif na[g] == arity - 1 and vep[g] == epoch:
                want = val[g] ^ par[g] ^ (1 if k == _K_XNOR else 0)
                for s in gv.fanins:
                    if vep[s] != epoch:
                        assign(s, want)
                        return
            return
        c = _CTRL[k]
        d = _CTRLD[k]
        if xv == c:
            nc[g] += 1
            # master bookkeeping: the controlling predecessor, ALL if several
            if mep[g] != epoch:
                mas[g] = x
                mep[g] = epoch
            elif mas[g] != x and mas[g] != MASTER_ALL:
                mas[g] = MASTER_ALL
            if vep[g] != epoch or val[g] != d:
                assign(g, d)
        else:
            if na[g] == arity:
                assign(g, d if nc[g] else d ^ 1)
            elif vep[g] == epoch and val[g] == d and nc[g] == 0 \
                    and na[g] == arity - 1:
                force_lone_input(gv, c)

    lists = store._lists
    invalid = store._invalid
    try:
        assign(v_base, i)
        while work:
            x = work.popleft()
            xv = val[x]
            vx = verts[x]
            if vx.fanins or vx.kind in CONST_KINDS:
                on_output(x, xv)
            for g in vx.fanouts:
                on_input(g, xv, x)
            if use_indirect:
                lst = lists.get(x * 2 + xv)
                if lst:
                    for packed in lst:
                        t = packed >> 1
                        if t in verts and t not in invalid:
                            assign(t, packed & 1)
    except Contradiction:
        return None
    return queue


def learn_contrapositives(store: ImplicationStore, queue, v_base: int,
                          i: int) -> int:
    """Store (u = not j) -> (v_base = not i) for every (u, j) the run
    forced; returns the number of pairs added."""
    lists = store._lists
    packed = v_base * 2 + (i ^ 1)
    learned = 0
    for u, j in queue:
        if u == v_base:
            continue
        key = u * 2 + (j ^ 1)
        lst = lists.get(key)
        if lst is None:
            lst = lists[key] = array("l")
        lst.append(packed)
        learned += 1
    return learned


def update_implications(circuit: Circuit, store: ImplicationStore,
                        v_fed: int, v_base: int,
                        index_of: dict[int, int], by_index: list[int]):
    """Invalidate stored implications a removal at the line feeding v_fed
    can break.

    Replacing a line by a constant changes internal functions anywhere in
    the line's forward cone: implications sourced at a cone vertex are
    erased, implications targeting one are disabled via the per-vertex
    invalid flag.  Vertices indexed between the removal site and the
    current base vertex are flagged as well.  Call before the edit so the
    cone is the pre-edit one.

    Returns (pairs_cleared, vertices_newly_flagged)."""
    verts = circuit.vertices
    cleared = 0
    flagged = 0
    seen = {v_fed}
    stack = [v_fed]
    while stack:
        x = stack.pop()
        if x not in verts:
            continue
        cleared += store.clear_vertex(x)
        if store.mark_invalid(x):
            flagged += 1
        for y in verts[x].fanouts:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    iv = index_of[v_fed]
    ib = index_of[v_base]
    if iv < ib:
        for pos in range(iv + 1, ib):
            u = by_index[pos]
            if u in verts and store.mark_invalid(u):
                flagged += 1
    return cleared, flagged

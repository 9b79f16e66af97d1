"""Combinational circuit model: gates, fanout bookkeeping, structural edits.

The circuit is a DAG over vertices (primary inputs and gates).  Fan-in is
pin-ordered (duplicate sources allowed), fan-out holds one entry per
consuming pin.  Output names are tracked separately from vertex names so
edits can re-root an output onto a surviving vertex.
"""

from __future__ import annotations

from collections import deque
from enum import IntEnum
from heapq import heapify, heappush, heappop


class Kind(IntEnum):
    AND = 0
    NAND = 1
    OR = 2
    NOR = 3
    NOT = 4
    BUF = 5
    XOR = 6
    XNOR = 7
    INPUT = 8
    CONST0 = 9
    CONST1 = 10


# Input value that alone fixes the gate output (None: no such value).
CONTROLLING = {
    Kind.AND: 0, Kind.NAND: 0, Kind.OR: 1, Kind.NOR: 1,
    Kind.NOT: None, Kind.BUF: None, Kind.XOR: None, Kind.XNOR: None,
    Kind.INPUT: None, Kind.CONST0: None, Kind.CONST1: None,
}

# Output value produced by a controlling input.
CONTROLLED = {
    Kind.AND: 0, Kind.NAND: 1, Kind.OR: 1, Kind.NOR: 0,
    Kind.NOT: None, Kind.BUF: None, Kind.XOR: None, Kind.XNOR: None,
    Kind.INPUT: None, Kind.CONST0: None, Kind.CONST1: None,
}

MULTI_INPUT_KINDS = (Kind.AND, Kind.NAND, Kind.OR, Kind.NOR, Kind.XOR, Kind.XNOR)
CONST_KINDS = (Kind.CONST0, Kind.CONST1)


class NetlistError(Exception):
    pass


class CycleDetected(NetlistError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("combinational cycle through: " + ", ".join(self.names))


class ArityMismatch(NetlistError):
    def __init__(self, name, kind, arity):
        self.name = name
        super().__init__(f"{kind.name} gate '{name}' has {arity} input(s)")


class DuplicateName(NetlistError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"name '{name}' defined twice")


class EdgeAbsent(NetlistError):
    pass


class IsPrimaryInput(NetlistError):
    pass


class WouldCreateCycle(NetlistError):
    pass


class EmptyVictimList(NetlistError):
    pass


class Vertex:
    __slots__ = ("vid", "kind", "name", "fanins", "fanouts")

    def __init__(self, vid: int, kind: Kind, name: str):
        self.vid = vid
        self.kind = kind
        self.name = name
        self.fanins: list[int] = []    # source vids, pin order
        self.fanouts: list[int] = []   # sink vids, one entry per consuming pin

    def __repr__(self):
        return f"Vertex({self.vid}, {self.kind.name}, {self.name!r})"


class Circuit:
    """Mutable gate-level netlist with single-writer edit operations."""

    def __init__(self):
        self.vertices: dict[int, Vertex] = {}
        self.inputs: list[int] = []          # PI vids, declaration order
        self.outputs: dict[str, int] = {}    # output name -> driving vid
        self._name2vid: dict[str, int] = {}
        self._next = 0
        self._driver_set: set[int] | None = None

    def output_driver_set(self) -> set[int]:
        """Set of vids driving at least one primary output (cached)."""
        if self._driver_set is None:
            self._driver_set = set(self.outputs.values())
        return self._driver_set

    # -- construction ------------------------------------------------

    def _new_vertex(self, kind, name):
        if name is None:
            name = self.fresh_name("n")
        if name in self._name2vid:
            raise DuplicateName(name)
        v = Vertex(self._next, kind, name)
        self._next += 1
        self.vertices[v.vid] = v
        self._name2vid[name] = v.vid
        return v

    def add_input(self, name: str) -> int:
        v = self._new_vertex(Kind.INPUT, name)
        self.inputs.append(v.vid)
        return v.vid

    def add_gate(self, kind: Kind, fanins, name: str | None = None) -> int:
        v = self._new_vertex(kind, name)
        for src in fanins:
            v.fanins.append(src)
            self.vertices[src].fanouts.append(v.vid)
        return v.vid

    def add_const(self, value: int, name: str | None = None) -> int:
        v = self._new_vertex(Kind.CONST1 if value else Kind.CONST0, name)
        return v.vid

    def set_output(self, name: str, vid: int):
        self.outputs[name] = vid
        self._driver_set = None

    def fresh_name(self, prefix: str) -> str:
        n = self._next
        name = f"_{prefix}{n}"
        while name in self._name2vid:
            n += 1
            name = f"_{prefix}{n}"
        return name

    # -- queries -----------------------------------------------------

    def vertex(self, vid: int) -> Vertex:
        return self.vertices[vid]

    def alive(self, vid: int) -> bool:
        return vid in self.vertices

    def vid_of(self, name: str) -> int:
        return self._name2vid[name]

    def name_of(self, vid: int) -> str:
        return self.vertices[vid].name

    def input_names(self) -> list[str]:
        return [self.vertices[v].name for v in self.inputs]

    def gate_count(self) -> int:
        return sum(1 for v in self.vertices.values()
                   if v.kind not in (Kind.INPUT,) + CONST_KINDS)

    def output_names_of(self, vid: int) -> list[str]:
        return [n for n, d in self.outputs.items() if d == vid]

    def copy(self) -> "Circuit":
        c = Circuit()
        c._next = self._next
        for vid, v in self.vertices.items():
            w = Vertex(vid, v.kind, v.name)
            w.fanins = list(v.fanins)
            w.fanouts = list(v.fanouts)
            c.vertices[vid] = w
            c._name2vid[v.name] = vid
        c.inputs = list(self.inputs)
        c.outputs = dict(self.outputs)
        return c

    # -- removal primitives -------------------------------------------

    def _protected(self, v: Vertex) -> bool:
        # PIs define the interface and output drivers carry names; neither
        # may be swept even when fanout-free.
        if v.kind == Kind.INPUT:
            return True
        return v.vid in self.output_driver_set()

    def _delete(self, v: Vertex):
        del self.vertices[v.vid]
        del self._name2vid[v.name]

    def _sweep(self, seeds):
        """Remove fanout-free unnamed cones rooted at the seed vids."""
        work = deque(seeds)
        while work:
            vid = work.popleft()
            v = self.vertices.get(vid)
            if v is None or v.fanouts or self._protected(v):
                continue
            srcs = list(v.fanins)
            v.fanins.clear()
            self._delete(v)
            for s in srcs:
                sv = self.vertices.get(s)
                if sv is not None:
                    sv.fanouts.remove(vid)
                    work.append(s)

    def _cut_pin(self, u: Vertex, pin: int):
        src = u.fanins.pop(pin)
        sv = self.vertices.get(src)
        if sv is not None:
            sv.fanouts.remove(u.vid)
        return src

    def _become_const(self, u: Vertex, value: int, absorb_work):
        """Turn u into CONST(value); cut its inputs and queue one absorb
        event per consuming pin.  The consumer pins stay attached until
        their event is processed so every absorption sees a consistent
        gate."""
        if u.kind in CONST_KINDS:
            # already a constant: just drain any remaining consumers
            value = 1 if u.kind == Kind.CONST1 else 0
            for sink in u.fanouts:
                absorb_work.append((sink, u.vid, value))
            return
        orphans = []
        while u.fanins:
            orphans.append(self._cut_pin(u, len(u.fanins) - 1))
        u.kind = Kind.CONST1 if value else Kind.CONST0
        for sink in u.fanouts:
            absorb_work.append((sink, u.vid, value))
        self._sweep(orphans)

    def _absorb_constant(self, u: Vertex, value: int, absorb_work):
        """u just lost an input pin that carried a constant; simplify it."""
        k = u.kind
        if k in (Kind.AND, Kind.NAND, Kind.OR, Kind.NOR):
            if value == CONTROLLING[k]:
                self._become_const(u, CONTROLLED[k], absorb_work)
            elif len(u.fanins) == 1:
                u.kind = Kind.BUF if k in (Kind.AND, Kind.OR) else Kind.NOT
            elif not u.fanins:
                # every pin absorbed a non-controlling constant
                self._become_const(u, CONTROLLED[k] ^ 1, absorb_work)
        elif k == Kind.NOT:
            self._become_const(u, value ^ 1, absorb_work)
        elif k == Kind.BUF:
            self._become_const(u, value, absorb_work)
        elif k in (Kind.XOR, Kind.XNOR):
            if value == 1:
                u.kind = Kind.XNOR if k == Kind.XOR else Kind.XOR
            if len(u.fanins) == 1:
                u.kind = Kind.BUF if u.kind == Kind.XOR else Kind.NOT
            elif not u.fanins:
                self._become_const(u, 0 if u.kind == Kind.XOR else 1, absorb_work)
        else:
            raise NetlistError(f"constant fed into {k.name} vertex '{u.name}'")

    def _run_absorb(self, absorb_work):
        work = deque(absorb_work)
        touched_consts = []
        while work:
            sink_vid, const_vid, value = work.popleft()
            touched_consts.append(const_vid)
            sink = self.vertices.get(sink_vid)
            # a sink gone or already constant cut its own pins; event stale
            if sink is None or sink.kind in CONST_KINDS:
                continue
            if const_vid not in sink.fanins:
                continue
            sink.fanins.remove(const_vid)
            cv = self.vertices.get(const_vid)
            if cv is not None:
                cv.fanouts.remove(sink_vid)
            self._absorb_constant(sink, value, work)
        for cvid in touched_consts:
            self._sweep([cvid])

    # -- structural edit operations ------------------------------------

    def replace_edge_with_constant(self, v: int, u: int, value: int,
                                   pin: int | None = None):
        """Cut edge (v,u) and feed the constant into u's freed pin."""
        uv = self.vertices.get(u)
        if uv is None or v not in uv.fanins:
            raise EdgeAbsent(f"no edge ({v},{u})")
        if pin is None:
            pin = uv.fanins.index(v)
        elif uv.fanins[pin] != v:
            raise EdgeAbsent(f"pin {pin} of vertex {u} not fed by {v}")
        src = self._cut_pin(uv, pin)
        work: list = []
        self._absorb_constant(uv, value, work)
        self._run_absorb(work)
        self._sweep([src])

    def replace_vertex_with_constant(self, v: int, value: int):
        """Replace v by CONST(value); consumers absorb it, dead cones go."""
        vv = self.vertices[v]
        if vv.kind == Kind.INPUT:
            raise IsPrimaryInput(vv.name)
        work: list = []
        self._become_const(vv, value, work)
        self._run_absorb(work)
        self._sweep([v])

    def _reaches(self, starts, target: int, order: dict | None = None) -> bool:
        # order: any map consistent with topological order; forward search
        # can then skip vertices already past the target
        bound = order.get(target) if order else None
        seen = set(starts)
        work = list(starts)
        while work:
            x = work.pop()
            if x == target:
                return True
            if bound is not None:
                xo = order.get(x)
                if xo is not None and xo >= bound:
                    continue
            xv = self.vertices.get(x)
            if xv is None:
                continue
            for y in xv.fanouts:
                if y not in seen:
                    seen.add(y)
                    work.append(y)
        return False

    def find_inverter_of(self, vid: int) -> int | None:
        for sink in self.vertices[vid].fanouts:
            w = self.vertices[sink]
            if w.kind == Kind.NOT and w.fanins == [vid]:
                return sink
        return None

    def merge_vertices(self, survivor: int, victims, complemented: bool = False,
                       order: dict | None = None):
        """Re-root every victim's fanout (and output names) onto survivor,
        or onto NOT(survivor) for a complemented merge.

        Victims whose re-rooting would close a combinational cycle are left
        in place (order, when given, bounds that reachability test).
        Returns (merged_victims, created_inverter_vid_or_None).
        """
        victims = [w for w in victims if w != survivor]
        if not victims:
            raise EmptyVictimList("merge with no victims")
        target = survivor
        created = None
        if complemented:
            target = self.find_inverter_of(survivor)
            if target is None:
                target = self.add_gate(Kind.NOT, [survivor])
                created = target
            victims = [w for w in victims if w != target]
        merged = []
        for w in victims:
            wv = self.vertices.get(w)
            if wv is None:
                continue
            consumers = set(wv.fanouts)
            if consumers and self._reaches(consumers, target, order):
                continue  # would create a cycle; leave this victim alone
            for sink in list(wv.fanouts):
                sv = self.vertices[sink]
                sv.fanins[sv.fanins.index(w)] = target
                wv.fanouts.remove(sink)
                self.vertices[target].fanouts.append(sink)
            moved_output = False
            for oname, driver in self.outputs.items():
                if driver == w:
                    self.outputs[oname] = target
                    moved_output = True
            if moved_output:
                self._driver_set = None
            merged.append(w)
            self._sweep([w])
        if created is not None and not merged:
            # fresh inverter turned out useless
            self._sweep([created])
            created = None
        return merged, created


# -- validation and ordering ------------------------------------------


def validate(circuit: Circuit):
    """Check arity, adjacency consistency, and acyclicity; raise on the
    first violation found."""
    seen_names = set()
    for v in circuit.vertices.values():
        if v.name in seen_names:
            raise DuplicateName(v.name)
        seen_names.add(v.name)
        n = len(v.fanins)
        if v.kind in (Kind.NOT, Kind.BUF):
            if n != 1:
                raise ArityMismatch(v.name, v.kind, n)
        elif v.kind in (Kind.INPUT,) + CONST_KINDS:
            if n != 0:
                raise ArityMismatch(v.name, v.kind, n)
        elif n < 2:
            raise ArityMismatch(v.name, v.kind, n)
        for src in v.fanins:
            if src not in circuit.vertices:
                raise NetlistError(f"dangling fan-in {src} at '{v.name}'")
    order = topo_order(circuit)
    if len(order) != len(circuit.vertices):
        left = [v for v in circuit.vertices if v not in set(order)]
        raise CycleDetected(circuit.vertices[v].name for v in left)


def topo_order(circuit: Circuit) -> list[int]:
    """Forward topological order; ties broken by vertex creation order."""
    indeg = {vid: len(v.fanins) for vid, v in circuit.vertices.items()}
    ready = [vid for vid, d in indeg.items() if d == 0]
    heapify(ready)
    order = []
    while ready:
        vid = heappop(ready)
        order.append(vid)
        for sink in circuit.vertices[vid].fanouts:
            indeg[sink] -= 1
            if indeg[sink] == 0:
                heappush(ready, sink)
    return order


def topo_index(circuit: Circuit) -> dict[int, int]:
    return {vid: i for i, vid in enumerate(topo_order(circuit))}


def longest_paths(circuit: Circuit) -> dict[int, int]:
    """Longest path (in edges) from any input/constant to each vertex."""
    lp = {}
    for vid in topo_order(circuit):
        v = circuit.vertices[vid]
        lp[vid] = 1 + max((lp[s] for s in v.fanins), default=-1)
    return lp

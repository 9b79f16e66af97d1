"""Redundancy removal main loop.

Every vertex is taken as a base, assigned 0 and then 1, and each run's
forced values and unobservability marks are combined to find lines whose
stuck-at faults need conflicting values on the base vertex.  Confirmed
lines are replaced by constants; vertices forced to the same value in
both runs become constants; vertices tracking the base (or its
complement) in both runs are merged.  Any edit restarts the dual runs for
the same base vertex.

Improvement toggles (all on in "presented" mode, all off in "fire"):
  1  propagate unobservability past stems with no check, verify lazily
  2  skip single-input vertices as base
  3  learn indirect implications by contraposition, reuse in later runs
  4  identify and remove constant / duplicate / complemented vertices
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .netlist import Circuit, Kind, CONST_KINDS, topo_order
from .implication import (RunState, ImplicationStore, MASTER_NULL,
                          propagate_uncontrollability, learn_contrapositives,
                          update_implications)
from .unobservability import (ObsState, seed_unobservability,
                              check_unobservability, candidate_needs_check)
from . import oracle as _oracle

COUNTER_KEYS = (
    "unobservability_checks",
    "incorrect_detections",
    "implications_learned",
    "implications_cleared_R1",
    "vertices_flagged_R2",
    "runs_skipped_single_input",
)

ALL_IMPROVEMENTS = frozenset({1, 2, 3, 4})


class ConfigError(Exception):
    pass


class OracleDisagreement(Exception):
    """Self-check failure: an edit was not confirmed by the fault oracle."""


@dataclass
class RemovalConfig:
    mode: str = "presented"
    improvements: frozenset = ALL_IMPROVEMENTS
    passes: int = 1
    verify_with_oracle: bool = False
    oracle_bound: int = 16
    observer: object = None

    def __post_init__(self):
        if self.mode not in ("presented", "fire"):
            raise ConfigError(f"unknown mode '{self.mode}'")
        self.improvements = frozenset(self.improvements)
        if not self.improvements <= ALL_IMPROVEMENTS:
            raise ConfigError("improvement numbers are 1..4")
        if self.mode == "fire" and self.improvements:
            raise ConfigError("fire mode already disables all improvements")

    @classmethod
    def presented(cls, disabled=(), **kw):
        return cls(mode="presented",
                   improvements=ALL_IMPROVEMENTS - frozenset(disabled), **kw)

    @classmethod
    def fire_baseline(cls, **kw):
        return cls(mode="fire", improvements=frozenset(), **kw)


@dataclass
class RemovedEdge:
    line: str          # "src->sink"
    src: str
    sink: str
    stuck: int
    v_base: str
    run: int
    short_circuited: bool


@dataclass
class RemovalReport:
    removed_edges: list = field(default_factory=list)
    constants: list = field(default_factory=list)    # (name, value)
    merges: list = field(default_factory=list)       # (survivor, victim, pol)
    counters: dict = field(default_factory=lambda: {k: 0 for k in COUNTER_KEYS})
    events: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    def total_removed(self) -> int:
        return len(self.removed_edges) + len(self.constants) + len(self.merges)

    def machine_lines(self) -> list[str]:
        lines = []
        for kind, rec in self.events:
            if kind == "removed":
                lines.append(f"removed {rec.line} sa{rec.stuck} "
                             f"vbase={rec.v_base} run={rec.run}")
            elif kind == "const":
                lines.append(f"const {rec[0]}={rec[1]}")
            else:
                lines.append(f"merge {rec[0]}<-{rec[1]} pol={rec[2]}")
        for key in COUNTER_KEYS:
            lines.append(f"counter {key}={self.counters[key]}")
        return lines

    def text_summary(self, name: str = "-") -> str:
        total = self.total_removed()
        return (f"{name}: # red {total} (edges {len(self.removed_edges)}, "
                f"constants {len(self.constants)}, merged {len(self.merges)}), "
                f"{self.seconds:.2f} sec")


def counters_snapshot(report: RemovalReport) -> dict:
    return {k: report.counters[k] for k in COUNTER_KEYS}


def remove_redundancy(circuit: Circuit, config: RemovalConfig | None = None):
    """Run the removal loop over the circuit (edited in place).

    Returns (circuit, RemovalReport)."""
    if config is None:
        config = RemovalConfig()
    report = RemovalReport()
    t0 = time.perf_counter()
    for _ in range(max(1, config.passes)):
        _Session(circuit, config, report).run()
    report.seconds = time.perf_counter() - t0
    return circuit, report


class _Session:
    def __init__(self, circuit: Circuit, config: RemovalConfig,
                 report: RemovalReport):
        self.circuit = circuit
        self.config = config
        self.report = report
        self.imp = config.improvements
        order = topo_order(circuit)
        self.index_of = {vid: i for i, vid in enumerate(order)}
        self.by_index = list(order)
        self.worklist = list(order)
        self.rs = RunState(circuit._next)
        self.obs = ObsState(circuit._next)
        self.store = ImplicationStore()
        self.fire_obs = config.mode == "fire" or 1 not in self.imp
        self.edit_count = 0
        self.processed_at: dict[int, int] = {}
        self._lp_memo: dict[int, int] = {}
        self._lp_edit = -1

    def _lp_of(self, vid: int) -> int:
        """Longest path to the inputs, memoized per edit generation."""
        if self._lp_edit != self.edit_count:
            self._lp_memo = {}
            self._lp_edit = self.edit_count
        memo = self._lp_memo
        got = memo.get(vid)
        if got is not None:
            return got
        verts = self.circuit.vertices
        stack = [vid]
        while stack:
            x = stack[-1]
            fi = verts[x].fanins
            pending = [s for s in fi if s not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[x] = 1 + max((memo[s] for s in fi), default=-1)
            stack.pop()
        return memo[vid]

    # -- bookkeeping ---------------------------------------------------

    def _register_new(self, vid: int):
        self.index_of[vid] = len(self.by_index)
        self.by_index.append(vid)
        self.worklist.append(vid)

    def _notify(self, kind: str, before: Circuit | None, **details):
        obs = self.config.observer
        if obs is not None:
            details.update(kind=kind, before=before, circuit=self.circuit,
                           store=self.store)
            obs(details)

    def _snapshot(self):
        if self.config.observer is not None or self.config.verify_with_oracle:
            return self.circuit.copy()
        return None

    def _oracle_ok(self):
        return (self.config.verify_with_oracle
                and len(self.circuit.inputs) <= self.config.oracle_bound)

    def _update_implications(self, v_fed: int, v_base: int):
        cleared, flagged = update_implications(
            self.circuit, self.store, v_fed, v_base, self.index_of, self.by_index)
        self.report.counters["implications_cleared_R1"] += cleared
        self.report.counters["vertices_flagged_R2"] += flagged

    # -- main loop -------------------------------------------------------

    def run(self):
        circuit = self.circuit
        p = 0
        while p < len(self.worklist):
            vb = self.worklist[p]
            p += 1
            v = circuit.vertices.get(vb)
            if v is None or v.kind in CONST_KINDS:
                continue
            if 2 in self.imp and len(v.fanins) == 1:
                # a single-input vertex repeats its predecessor's analysis;
                # skipping is lossless only while the circuit is unchanged
                # since the predecessor was processed
                if self.processed_at.get(v.fanins[0]) == self.edit_count:
                    self.report.counters["runs_skipped_single_input"] += 1
                    self.processed_at[vb] = self.edit_count
                    continue
            self._process(vb)
            if vb in circuit.vertices:
                self.processed_at[vb] = self.edit_count

    def _process(self, vb: int):
        circuit = self.circuit
        while True:  # begin_loop: dual runs restart here after any edit
            self.rs.ensure(circuit._next)
            self.obs.ensure(circuit._next)
            self.rs.reset()
            self.obs.reset_counts()
            self.out_driven = circuit.output_driver_set()
            queues = []
            for i in (0, 1):
                q = propagate_uncontrollability(
                    circuit, self.store, self.rs, vb, i,
                    use_indirect=3 in self.imp)
                if q is None:
                    self._justification_failure(vb, i)
                    return
                queues.append(q)
                if 3 in self.imp:
                    self.report.counters["implications_learned"] += \
                        learn_contrapositives(self.store, q, vb, i)
            if 4 in self.imp:
                if self._eliminate(vb, queues):
                    if vb in circuit.vertices:
                        continue
                    return
            removed = False
            for i in (0, 1):
                seed_unobservability(circuit, self.rs, self.obs, queues[i], i,
                                     self.fire_obs, self.report.counters,
                                     self.out_driven)
                if self._search(vb, queues[1 - i], i):
                    removed = True
                    break
            if not removed:
                return
            if vb not in circuit.vertices:
                return

    # -- constant replacement ---------------------------------------------

    def _justification_failure(self, vb: int, i: int):
        """v_base cannot take value i, so it is the constant 1-i."""
        circuit = self.circuit
        value = i ^ 1
        v = circuit.vertices[vb]
        if v.kind == Kind.INPUT:
            # a free input can always take either value; reaching this
            # point would mean an unsound implication
            self.report.notes.append(
                f"justification failure on primary input {v.name}; skipped")
            return
        name = v.name
        before = self._snapshot()
        if self._oracle_ok():
            self._assert_undetectable(_oracle.Stem(vb), value, name)
        self._update_implications(vb, vb)
        circuit.replace_vertex_with_constant(vb, value)
        self.edit_count += 1
        rec = (name, value)
        self.report.constants.append(rec)
        self.report.events.append(("const", rec))
        self._notify("const", before, vertex=name, value=value,
                     reason="justification", v_base=name)

    def _eliminate(self, vb: int, queues) -> bool:
        edited = self._eliminate_constants(vb, queues)
        if vb not in self.circuit.vertices:
            return True
        return self._eliminate_duplicates(vb, queues) or edited

    def _eliminate_constants(self, vb: int, queues) -> bool:
        circuit = self.circuit
        rs = self.rs
        vb_name = circuit.vertices[vb].name
        both = [(v, j) for v, j in queues[0]
                if v != vb and rs.value(1, v) == j]
        edited = False
        for v, j in both:
            vert = circuit.vertices.get(v)
            if vert is None:
                continue
            if vert.kind == Kind.INPUT:
                self.report.notes.append(
                    f"primary input {vert.name} implied constant {j}; kept")
                continue
            name = vert.name
            before = self._snapshot()
            if self._oracle_ok():
                self._assert_undetectable(_oracle.Stem(v), j, name)
            self._update_implications(v, vb)
            circuit.replace_vertex_with_constant(v, j)
            self.edit_count += 1
            rec = (name, j)
            self.report.constants.append(rec)
            self.report.events.append(("const", rec))
            self._notify("const", before, vertex=name, value=j,
                         reason="intersection", v_base=vb_name)
            edited = True
        return edited

    # -- duplicate / complement merging -------------------------------------

    def _eliminate_duplicates(self, vb: int, queues) -> bool:
        circuit = self.circuit
        rs = self.rs
        same, compl = [], []
        for v, j0 in queues[0]:
            vert = circuit.vertices.get(v)
            if vert is None or vert.kind in CONST_KINDS:
                continue
            j1 = rs.value(1, v)
            if j1 is None or j1 == j0:
                continue
            (same if j0 == 0 else compl).append(v)
        if len(same) <= 1 and not compl:
            return False
        rank = lambda v: (self._lp_of(v), self.index_of[v])
        edited = False
        u = min(same, key=rank) if same else None
        if u is not None and len(same) > 1:
            edited |= self._merge(vb, u, [v for v in same if v != u], False)
        # merging the first class may sweep dead cones containing members
        # of the second
        compl = [v for v in compl if v in circuit.vertices]
        w = min(compl, key=rank) if compl else None
        if w is not None and len(compl) > 1:
            edited |= self._merge(vb, w, [v for v in compl if v != w], False)
        if u is not None and w is not None \
                and u in circuit.vertices and w in circuit.vertices:
            nearer, farther = sorted((u, w), key=rank)
            fv = circuit.vertices[farther]
            if not (fv.kind == Kind.NOT and fv.fanins == [nearer]):
                edited |= self._merge(vb, nearer, [farther], True)
        return edited

    def _merge(self, vb: int, survivor: int, victims, complemented: bool) -> bool:
        circuit = self.circuit
        victims = [v for v in victims if v in circuit.vertices]
        if not victims:
            return False
        names = {v: circuit.vertices[v].name for v in victims}
        surv_name = circuit.vertices[survivor].name
        vb_name = circuit.vertices[vb].name if vb in circuit.vertices else "?"
        before = self._snapshot()
        masks = None
        if self._oracle_ok():
            masks = _oracle.vertex_masks(circuit, self.config.oracle_bound)
            full = (1 << (1 << len(circuit.inputs))) - 1
        merged, created = circuit.merge_vertices(survivor, victims, complemented,
                                                 order=self.index_of)
        if merged:
            self.edit_count += 1
        if created is not None:
            self._register_new(created)
        skipped = [v for v in victims if v not in merged]
        for v in skipped:
            self.report.notes.append(
                f"merge of {names[v]} into {surv_name} skipped (would cycle)")
        if masks is not None:
            for v in merged:
                want = masks[survivor] if not complemented else full ^ masks[survivor]
                if masks[v] != want:
                    raise OracleDisagreement(
                        f"merge {surv_name}<-{names[v]} not equivalence-preserving")
        pol = "compl" if complemented else "same"
        for v in merged:
            rec = (surv_name, names[v], pol)
            self.report.merges.append(rec)
            self.report.events.append(("merge", rec))
        if merged:
            self._notify("merge", before, survivor=surv_name,
                         victims=[names[v] for v in merged], polarity=pol,
                         v_base=vb_name)
        return bool(merged)

    # -- redundant edge search ----------------------------------------------

    def _search(self, vb: int, q_other, i: int) -> bool:
        """Scan run-(1-i) assignments against run-i unobservability; remove
        the first confirmed redundant edge.  Returns True on removal."""
        circuit = self.circuit
        rs, obs = self.rs, self.obs
        counters = self.report.counters
        trust_overapprox = 1 in self.imp
        verts = circuit.vertices
        for v, j in q_other:
            if obs.count(i, v) == 0:
                continue
            for u in verts[v].fanouts:
                m = rs.master(i, u)
                if m == MASTER_NULL or m == v:
                    continue
                short = False
                if trust_overapprox:
                    if not candidate_needs_check(rs, obs, v, u, i):
                        # source never assigned this run and the mask does
                        # not lean on an assigned stem assumption: the
                        # overapproximation is exact for this line
                        short = True
                    else:
                        counters["unobservability_checks"] += 1
                        if not check_unobservability(circuit, rs, obs, v, u, i,
                                                     self.out_driven):
                            counters["incorrect_detections"] += 1
                            continue
                self._remove_edge(v, u, j, vb, i, short)
                return True
        return False

    def _remove_edge(self, v: int, u: int, j: int, vb: int, i: int,
                     short: bool):
        circuit = self.circuit
        src = circuit.vertices[v].name
        sink = circuit.vertices[u].name
        vb_name = circuit.vertices[vb].name
        pin = circuit.vertices[u].fanins.index(v)
        before = self._snapshot()
        if self._oracle_ok():
            vv = circuit.vertices[v]
            multi = len(vv.fanouts) > 1 or v in self.out_driven
            line = _oracle.Branch(v, u, pin) if multi else _oracle.Stem(v)
            self._assert_undetectable(line, j, f"{src}->{sink}")
        self._update_implications(u, vb)
        circuit.replace_edge_with_constant(v, u, j, pin)
        self.edit_count += 1
        rec = RemovedEdge(f"{src}->{sink}", src, sink, j, vb_name, i, short)
        self.report.removed_edges.append(rec)
        self.report.events.append(("removed", rec))
        self._notify("removed", before, src=src, sink=sink, src_vid=v,
                     sink_vid=u, pin=pin, stuck=j, v_base=vb_name, run=i,
                     short_circuited=short)

    def _assert_undetectable(self, line, stuck: int, what: str):
        if not _oracle.fault_undetectable(self.circuit, line, stuck,
                                          bound=self.config.oracle_bound):
            raise OracleDisagreement(
                f"stuck-at-{stuck} on {what} is detectable; removal unsound")

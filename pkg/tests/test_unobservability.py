import random

from conftest import corpus_circuit
from redrem.bench_io import parse_bench
from redrem.netlist import topo_order
from redrem.implication import (RunState, ImplicationStore, MASTER_ALL,
                                MASTER_ALL_STEM, MASTER_NULL,
                                propagate_uncontrollability)
from redrem.unobservability import (ObsState, seed_unobservability,
                                    overapprox_init, check_outputs,
                                    overapprox_propagate, check_unobservability,
                                    unobservability_rec, output_drivers,
                                    candidate_needs_check)
from redrem.oracle import line_observable_under, Stem, Branch, vertex_masks


def prepped(circuit, v_base, i, fire=False):
    rs = RunState(circuit._next)
    obs = ObsState(circuit._next)
    rs.reset()
    obs.reset_counts()
    store = ImplicationStore()
    counters = {"unobservability_checks": 0}
    q = propagate_uncontrollability(circuit, store, rs, v_base, i)
    assert q is not None
    seed_unobservability(circuit, rs, obs, q, i, fire, counters)
    return q, rs, obs, counters


def test_seed_controlled_and_counts_nonmaster(conflict_circuit):
    c = conflict_circuit
    a, b, g, f = (c.vid_of(x) for x in "abgf")
    q, rs, obs, _ = prepped(c, a, 0)
    # f = AND went to 0 under controlling a: its other input edge (g,f)
    # is masked, which completes g's only fanout and cascades to g's inputs
    assert obs.count(0, g) == 1
    assert obs.count(0, b) == 1
    assert obs.count(0, a) == 1  # the (a,g) branch, via g's completion
    assert rs.master(0, g) == MASTER_ALL_STEM
    # the edge from a into the AND stays exempt: a is the AND's master
    assert rs.master(0, f) == a


def test_noncontrolled_value_does_not_seed():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)")
    q, rs, obs, _ = prepped(c, c.vid_of("f"), 1)  # forces a=b=1, f=1
    assert obs.count(1, c.vid_of("a")) == 0
    assert obs.count(1, c.vid_of("b")) == 0


def test_xor_never_seeds():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = XOR(a, b)")
    q, rs, obs, _ = prepped(c, c.vid_of("f"), 0)
    assert obs.count(0, c.vid_of("a")) == 0
    assert obs.count(0, c.vid_of("b")) == 0


def test_init_master_exclusion_three_inputs():
    c = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(d)\nOUTPUT(f)\nf = AND(a, b, d)")
    a, b, d, f = (c.vid_of(x) for x in "abdf")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts(); obs.reset_visited()
    rs.set_value(0, a, 0)
    rs.set_value(0, f, 0)
    rs.note_controlling(0, f, a)
    overapprox_init(c, rs, obs, f, 0)
    assert obs.count(0, a) == 0
    assert obs.count(0, b) == 1
    assert obs.count(0, d) == 1
    # second call is a visited no-op
    overapprox_init(c, rs, obs, f, 0)
    assert obs.count(0, b) == 1


def test_init_without_identified_master_is_inert():
    # backward-justified controlled output: no input edge is known masked
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)")
    f = c.vid_of("f")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts(); obs.reset_visited()
    rs.set_value(0, f, 0)
    assert rs.master(0, f) == MASTER_NULL
    overapprox_init(c, rs, obs, f, 0)
    assert obs.count(0, c.vid_of("a")) == 0
    assert obs.count(0, c.vid_of("b")) == 0


def test_check_outputs_threshold_propagates():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\ng = AND(a, b)\nf = BUF(g)")
    g = c.vid_of("g")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts(); obs.reset_visited()
    check_outputs(c, rs, obs, g, 0)
    # g's single fanout saturated: assumed unobservable, inputs counted
    assert rs.master(0, g) == MASTER_ALL_STEM
    assert obs.count(0, c.vid_of("a")) == 1
    assert obs.count(0, c.vid_of("b")) == 1


def test_fire_mode_stem_check_blocks_false_stem(stem_circuit):
    # both branches of s are masked under s=0 but the stem is observable;
    # baseline mode verifies at the threshold and refuses to propagate
    c = stem_circuit
    s = c.vid_of("s")
    q, rs, obs, counters = prepped(c, s, 0, fire=True)
    assert line_observable_under(c, Stem(s), {"s": 0})  # ground truth
    assert obs.count(0, s) == 2  # both branch pins were marked
    assert rs.master(0, s) == MASTER_NULL  # but the stem was not assumed
    assert counters["unobservability_checks"] >= 1


def test_presented_mode_assumes_stem_with_taint(stem_circuit):
    c = stem_circuit
    s = c.vid_of("s")
    q, rs, obs, counters = prepped(c, s, 0, fire=False)
    assert rs.master(0, s) == MASTER_ALL_STEM
    assert counters["unobservability_checks"] == 0
    # the assumption leaned on the assigned stem itself: tainted
    assert obs.completion_tainted(0, s)


def test_propagate_visited_is_noop():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)")
    a, f = c.vid_of("a"), c.vid_of("f")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts(); obs.reset_visited()
    rs.set_value(0, a, 0)
    rs.set_value(0, f, 0)
    rs.note_controlling(0, f, a)
    overapprox_init(c, rs, obs, f, 0)   # marks f visited, counts b
    before = obs.count(0, a), obs.count(0, c.vid_of("b"))
    overapprox_propagate(c, rs, obs, f, 0)  # visited: nothing more counted
    assert (obs.count(0, a), obs.count(0, c.vid_of("b"))) == before


def test_propagate_unvisited_counts_all_inputs():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\ng = OR(a, b)\nf = BUF(g)")
    g = c.vid_of("g")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts(); obs.reset_visited()
    overapprox_propagate(c, rs, obs, g, 0)
    assert obs.count(0, c.vid_of("a")) == 1
    assert obs.count(0, c.vid_of("b")) == 1


def test_check_unobservability_masked_side_input():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)")
    a, b, f = (c.vid_of(x) for x in "abf")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts()
    rs.set_value(0, b, 0)
    assert check_unobservability(c, rs, obs, a, f, 0)


def test_check_unobservability_transparent_path():
    c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)")
    a, f = c.vid_of("a"), c.vid_of("f")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts()
    assert not check_unobservability(c, rs, obs, a, f, 0)


def test_check_rejects_stem_driving_edge():
    # same reconvergent shape, with the stem fed by an input so the edge
    # (w, s) is checkable: the traversal sees the masking side inputs are
    # inside the assumed region and refuses
    c = parse_bench("INPUT(w)\nOUTPUT(g)\ns = BUF(w)\nn = BUF(s)\ng = AND(s, n)")
    w, s = c.vid_of("w"), c.vid_of("s")
    q, rs, obs, _ = prepped(c, s, 0)
    assert obs.count(0, s) == 2
    assert not check_unobservability(c, rs, obs, w, s, 0)
    assert line_observable_under(c, Branch(w, s, 0), {"s": 0})


def test_rec_fully_masked_true():
    c = parse_bench("INPUT(v)\nINPUT(a)\nINPUT(b)\nOUTPUT(f)\nOUTPUT(h)\n"
                    "f = AND(v, a)\nh = AND(v, b)")
    v = c.vid_of("v")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts()
    rs.set_value(0, c.vid_of("a"), 0)
    rs.set_value(0, c.vid_of("b"), 0)
    assert unobservability_rec(c, rs, obs, v, 0, set())


def test_rec_escape_path_false():
    c = parse_bench("INPUT(v)\nINPUT(a)\nOUTPUT(f)\nOUTPUT(h)\n"
                    "f = AND(v, a)\nh = BUF(v)")
    v = c.vid_of("v")
    rs = RunState(c._next)
    obs = ObsState(c._next)
    rs.reset(); obs.reset_counts()
    rs.set_value(0, c.vid_of("a"), 0)
    assert not unobservability_rec(c, rs, obs, v, 0, set())


def test_rec_detects_self_justification(stem_circuit):
    c = stem_circuit
    s = c.vid_of("s")
    q, rs, obs, _ = prepped(c, s, 0)
    assert not unobservability_rec(c, rs, obs, s, 0, set())


def _flagged_lines(circuit, rs, obs, i, out_driven):
    """Edges the overapproximation treats as unobservable in run i."""
    lines = []
    for u, uv in circuit.vertices.items():
        m = rs.master(i, u)
        if m == MASTER_NULL:
            continue
        for pin, src in enumerate(uv.fanins):
            if src != m:
                lines.append((src, u, pin))
    return lines


def test_overapproximation_exact_for_untainted_unassigned_sources():
    # operational soundness of the no-check removal path, against the
    # exhaustive observability oracle
    checked = 0
    for k in range(40):
        c = corpus_circuit(k)
        if len(c.inputs) > 10:
            continue
        out_driven = output_drivers(c)
        order = topo_order(c)
        rng = random.Random(k)
        for vb in rng.sample(order, min(4, len(order))):
            for i in (0, 1):
                rs = RunState(c._next)
                obs = ObsState(c._next)
                rs.reset(); obs.reset_counts()
                q = propagate_uncontrollability(c, ImplicationStore(), rs, vb, i)
                if q is None:
                    continue
                seed_unobservability(c, rs, obs, q, i, False,
                                     {"unobservability_checks": 0}, out_driven)
                masks = vertex_masks(c)
                full = (1 << (1 << len(c.inputs))) - 1
                cond = masks[vb] if i else full ^ masks[vb]
                if cond == 0:
                    continue
                for src, u, pin in _flagged_lines(c, rs, obs, i, out_driven):
                    if candidate_needs_check(rs, obs, src, u, i):
                        continue
                    line = (Branch(src, u, pin)
                            if len(c.vertices[src].fanouts) > 1
                            or src in out_driven else Stem(src))
                    assert not line_observable_under(c, line, {vb: i}), \
                        (k, vb, i, src, u)
                    checked += 1
    assert checked > 50


def test_exact_check_never_passes_observable_line():
    tested = 0
    for k in range(30):
        c = corpus_circuit(k)
        if len(c.inputs) > 10:
            continue
        out_driven = output_drivers(c)
        order = topo_order(c)
        rng = random.Random(1000 + k)
        for vb in rng.sample(order, min(3, len(order))):
            for i in (0, 1):
                rs = RunState(c._next)
                obs = ObsState(c._next)
                rs.reset(); obs.reset_counts()
                q = propagate_uncontrollability(c, ImplicationStore(), rs, vb, i)
                if q is None:
                    continue
                seed_unobservability(c, rs, obs, q, i, False,
                                     {"unobservability_checks": 0}, out_driven)
                masks = vertex_masks(c)
                full = (1 << (1 << len(c.inputs))) - 1
                if (masks[vb] if i else full ^ masks[vb]) == 0:
                    continue
                for u, uv in list(c.vertices.items()):
                    for pin, src in enumerate(uv.fanins):
                        if check_unobservability(c, rs, obs, src, u, i,
                                                 out_driven):
                            line = (Branch(src, u, pin)
                                    if len(c.vertices[src].fanouts) > 1
                                    or src in out_driven else Stem(src))
                            assert not line_observable_under(c, line, {vb: i}), \
                                (k, vb, i, src, u)
                            tested += 1
    assert tested > 100

"""Desk-scale ground truth: exhaustive simulation, equivalence checking,
undetectable stuck-at fault enumeration, exact observability queries, and
a seeded random circuit generator.

All 2^n input vectors are simulated at once: each net's value over the
whole vector space is one big integer, bit v giving the net's value under
vector v (input k of vector v is bit (v >> k) & 1, inputs in declaration
order).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .netlist import Circuit, Kind, CONST_KINDS, topo_order

DEFAULT_BOUND = 16

# Inputs with these reserved names are treated as fixed constants when
# comparing circuits (the .bench writer uses them for constant outputs).
CONST_PSEUDO_INPUTS = {"vdd": 1, "gnd": 0}


class OracleError(Exception):
    pass


class LengthMismatch(OracleError):
    pass


class InterfaceMismatch(OracleError):
    pass


class TooManyInputs(OracleError):
    pass


class InconsistentAssignment(OracleError):
    pass


class Stem(NamedTuple):
    v: int


class Branch(NamedTuple):
    v: int
    u: int
    pin: int


@dataclass(frozen=True)
class FaultSite:
    line: Stem | Branch
    stuck: int


@dataclass
class TruthTable:
    n_inputs: int
    input_names: list[str]
    outputs: dict[str, int]   # output name -> 2^n-bit value mask


@lru_cache(maxsize=None)
def _var_mask(k: int, n: int) -> int:
    """Bit v is (v >> k) & 1, over all 2^n vector indices v."""
    half = 1 << k
    period = half << 1
    pattern = ((1 << half) - 1) << half
    reps = (1 << n) // period
    return pattern * (((1 << (period * reps)) - 1) // ((1 << period) - 1))


def _eval_masks(circuit: Circuit, env: dict[int, int], full: int,
                order=None) -> dict[int, int]:
    """Evaluate every vertex over the whole vector space; env maps input
    vids to their variable masks."""
    masks: dict[int, int] = {}
    verts = circuit.vertices
    for vid in (order if order is not None else topo_order(circuit)):
        v = verts[vid]
        k = v.kind
        if k == Kind.INPUT:
            masks[vid] = env[vid]
        elif k == Kind.CONST0:
            masks[vid] = 0
        elif k == Kind.CONST1:
            masks[vid] = full
        else:
            masks[vid] = _gate_mask(k, [masks[s] for s in v.fanins], full)
    return masks


def _gate_mask(kind: Kind, ins: list[int], full: int) -> int:
    if kind == Kind.AND or kind == Kind.NAND:
        m = full
        for x in ins:
            m &= x
        return m if kind == Kind.AND else full ^ m
    if kind == Kind.OR or kind == Kind.NOR:
        m = 0
        for x in ins:
            m |= x
        return m if kind == Kind.OR else full ^ m
    if kind == Kind.XOR or kind == Kind.XNOR:
        m = 0
        for x in ins:
            m ^= x
        return m if kind == Kind.XOR else full ^ m
    if kind == Kind.NOT:
        return full ^ ins[0]
    if kind == Kind.BUF:
        return ins[0]
    raise OracleError(f"cannot evaluate kind {kind}")


def _default_env(circuit: Circuit, bound: int):
    n = len(circuit.inputs)
    if n > bound:
        raise TooManyInputs(f"{n} inputs exceeds bound {bound}")
    full = (1 << (1 << n)) - 1
    env = {vid: _var_mask(k, n) for k, vid in enumerate(circuit.inputs)}
    return env, full, n


def vertex_masks(circuit: Circuit, bound: int = DEFAULT_BOUND) -> dict[int, int]:
    env, full, _ = _default_env(circuit, bound)
    return _eval_masks(circuit, env, full)


def truth_table(circuit: Circuit, bound: int = DEFAULT_BOUND) -> TruthTable:
    env, full, n = _default_env(circuit, bound)
    masks = _eval_masks(circuit, env, full)
    return TruthTable(n, circuit.input_names(),
                      {name: masks[vid] for name, vid in circuit.outputs.items()})


def simulate(circuit: Circuit, vector) -> list[int]:
    """Evaluate one input vector (bits in input declaration order); returns
    output bits in output declaration order."""
    if len(vector) != len(circuit.inputs):
        raise LengthMismatch(
            f"vector has {len(vector)} bits, circuit has {len(circuit.inputs)} inputs")
    vals: dict[int, int] = {}
    for vid, bit in zip(circuit.inputs, vector):
        vals[vid] = int(bit)
    for vid in topo_order(circuit):
        v = circuit.vertices[vid]
        if v.kind == Kind.INPUT:
            continue
        if v.kind == Kind.CONST0:
            vals[vid] = 0
        elif v.kind == Kind.CONST1:
            vals[vid] = 1
        else:
            vals[vid] = _gate_mask(v.kind, [vals[s] for s in v.fanins], 1)
    return [vals[vid] for vid in circuit.outputs.values()]


def equivalent(c1: Circuit, c2: Circuit, bound: int = DEFAULT_BOUND,
               const_inputs: dict[str, int] | None = None):
    """Exhaustively compare two circuits output-by-output (matched by name).

    Inputs named in const_inputs (default vdd/gnd) are pinned to their
    constant on either side and excluded from the compared interface.
    Returns (True, None) or (False, counterexample assignment dict).
    """
    if const_inputs is None:
        const_inputs = CONST_PSEUDO_INPUTS
    if set(c1.outputs) != set(c2.outputs):
        raise InterfaceMismatch("output name sets differ")
    free1 = [n for n in c1.input_names() if n not in const_inputs]
    free2 = [n for n in c2.input_names() if n not in const_inputs]
    if set(free1) != set(free2):
        raise InterfaceMismatch("input name sets differ")
    n = len(free1)
    if n > bound:
        raise TooManyInputs(f"{n} inputs exceeds bound {bound}")
    full = (1 << (1 << n)) - 1
    name_to_mask = {name: _var_mask(k, n) for k, name in enumerate(free1)}

    def masks_for(c):
        env = {}
        for vid in c.inputs:
            name = c.vertices[vid].name
            if name in const_inputs:
                env[vid] = full if const_inputs[name] else 0
            else:
                env[vid] = name_to_mask[name]
        return _eval_masks(c, env, full)

    m1 = masks_for(c1)
    m2 = masks_for(c2)
    for oname in c1.outputs:
        diff = m1[c1.outputs[oname]] ^ m2[c2.outputs[oname]]
        if diff:
            v = (diff & -diff).bit_length() - 1
            return False, {name: (v >> k) & 1 for k, name in enumerate(free1)}
    return True, None


# -- stuck-at faults ----------------------------------------------------


def fault_sites(circuit: Circuit) -> list[Stem | Branch]:
    """All fault lines: one stem per driven or observed net, plus one
    branch per pin of every net with more than one observer (fanout pins
    plus the output tap, if any)."""
    sites: list[Stem | Branch] = []
    out_driven = set(circuit.outputs.values())
    order = topo_order(circuit)
    for vid in order:
        v = circuit.vertices[vid]
        if v.fanouts or vid in out_driven:
            sites.append(Stem(vid))
    for vid in order:
        u = circuit.vertices[vid]
        for pin, src in enumerate(u.fanins):
            sv = circuit.vertices[src]
            if len(sv.fanouts) > 1 or src in out_driven:
                sites.append(Branch(src, vid, pin))
    return sites


def _faulty_outputs(circuit, masks, line, forced, full, order):
    """Output masks with the given line forced to the mask `forced`."""
    patched: dict[int, int] = {}
    verts = circuit.vertices
    if isinstance(line, Stem):
        patched[line.v] = forced
    for vid in order:
        v = verts[vid]
        if vid in patched or v.kind in (Kind.INPUT,) + CONST_KINDS:
            continue
        ins = None
        if isinstance(line, Branch) and vid == line.u:
            ins = [masks[s] for s in v.fanins]
            ins[line.pin] = forced
        elif any(s in patched for s in v.fanins):
            ins = [patched.get(s, masks[s]) for s in v.fanins]
        if ins is not None:
            m = _gate_mask(v.kind, ins, full)
            if m != masks[vid]:
                patched[vid] = m
    return {name: patched.get(vid, masks[vid])
            for name, vid in circuit.outputs.items()}


def fault_undetectable(circuit: Circuit, line, stuck: int,
                       masks=None, bound: int = DEFAULT_BOUND,
                       order=None) -> bool:
    """True iff no input vector exposes the stuck-at fault at a primary
    output."""
    if masks is None:
        masks = vertex_masks(circuit, bound)
    if order is None:
        order = topo_order(circuit)
    n = len(circuit.inputs)
    full = (1 << (1 << n)) - 1
    forced = full if stuck else 0
    good_line = masks[line.v]
    if (good_line if stuck == 0 else full ^ good_line) == 0:
        return True  # line never takes the opposite value
    faulty = _faulty_outputs(circuit, masks, line, forced, full, order)
    return all(faulty[name] == masks[vid] for name, vid in circuit.outputs.items())


def undetectable_faults(circuit: Circuit, bound: int = DEFAULT_BOUND) -> list[FaultSite]:
    masks = vertex_masks(circuit, bound)
    order = topo_order(circuit)
    found = []
    for line in fault_sites(circuit):
        for stuck in (0, 1):
            if fault_undetectable(circuit, line, stuck, masks, bound, order):
                found.append(FaultSite(line, stuck))
    return found


def has_undetectable_fault(circuit: Circuit, bound: int = DEFAULT_BOUND) -> bool:
    masks = vertex_masks(circuit, bound)
    order = topo_order(circuit)
    for line in fault_sites(circuit):
        for stuck in (0, 1):
            if fault_undetectable(circuit, line, stuck, masks, bound, order):
                return True
    return False


def line_observable_under(circuit: Circuit, line, assignment,
                          bound: int = DEFAULT_BOUND) -> bool:
    """Exact Boolean-difference observability test.

    True iff some completion of the partial assignment (vertex name or vid
    -> bit) makes toggling the line's value change a primary output.
    """
    masks = vertex_masks(circuit, bound)
    n = len(circuit.inputs)
    full = (1 << (1 << n)) - 1
    consistent = full
    for key, bit in assignment.items():
        vid = circuit.vid_of(key) if isinstance(key, str) else key
        m = masks[vid]
        consistent &= m if bit else (full ^ m)
    if consistent == 0:
        raise InconsistentAssignment("no input vector satisfies the assignment")
    order = topo_order(circuit)
    toggled = full ^ masks[line.v]
    faulty = _faulty_outputs(circuit, masks, line, toggled, full, order)
    diff = 0
    for name, vid in circuit.outputs.items():
        diff |= faulty[name] ^ masks[vid]
    return bool(diff & consistent)


# -- random circuits ----------------------------------------------------

DEFAULT_GATE_WEIGHTS = {
    Kind.AND: 6, Kind.OR: 6, Kind.NAND: 3, Kind.NOR: 3,
    Kind.XOR: 1, Kind.XNOR: 1, Kind.NOT: 2, Kind.BUF: 1,
}


def random_circuit(seed: int, n_inputs: int, n_gates: int,
                   weights: dict[Kind, int] | None = None) -> Circuit:
    """Deterministic-from-seed random DAG; sinks become primary outputs."""
    if n_inputs < 1:
        raise ValueError("need at least one input")
    rng = random.Random(seed)
    if weights is None:
        weights = DEFAULT_GATE_WEIGHTS
    kinds = list(weights)
    kw = [weights[k] for k in kinds]
    circuit = Circuit()
    pool = [circuit.add_input(f"x{i}") for i in range(n_inputs)]
    for g in range(n_gates):
        kind = rng.choices(kinds, kw)[0]
        if kind in (Kind.NOT, Kind.BUF):
            arity = 1
        else:
            arity = 2 if len(pool) < 3 or rng.random() < 0.8 else 3
        if arity > len(pool):
            arity = len(pool)
            if arity == 1:
                kind = rng.choice((Kind.NOT, Kind.BUF))
        # recency bias: half the picks come from the newest quarter of the
        # pool, which yields reconvergent fanout at modest sizes
        fanins = []
        while len(fanins) < arity:
            if rng.random() < 0.5 and len(pool) > 4:
                cand = pool[rng.randrange(3 * len(pool) // 4, len(pool))]
            else:
                cand = pool[rng.randrange(len(pool))]
            if cand not in fanins:
                fanins.append(cand)
        pool.append(circuit.add_gate(kind, fanins, f"n{g}"))
    for vid in pool:
        if not circuit.vertices[vid].fanouts:
            circuit.set_output(circuit.vertices[vid].name, vid)
    return circuit

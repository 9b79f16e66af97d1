"""ISCAS .bench netlist reader and writer.

Accepted lines: comments starting with '#', blanks, INPUT(name),
OUTPUT(name), and `name = KIND(op1, op2, ...)`.  Gate kinds are matched
case-insensitively; BUFF is an alias of BUF.  Operands may be declared
later in the file.  LF and CRLF both work.

Plain .bench has no constant literal, so the writer folds constants into
their consumers first; a constant that still drives an output is emitted
as a BUF of a reserved `vdd`/`gnd` pseudo-input documented in the header
comment.
"""

from __future__ import annotations

import re

from .netlist import Circuit, Kind, validate

_KINDS = {
    "AND": Kind.AND, "NAND": Kind.NAND, "OR": Kind.OR, "NOR": Kind.NOR,
    "XOR": Kind.XOR, "XNOR": Kind.XNOR, "NOT": Kind.NOT,
    "BUF": Kind.BUF, "BUFF": Kind.BUF,
}

_NAME = r"[A-Za-z0-9_.\[\]]+"
_IO_RE = re.compile(rf"^(INPUT|OUTPUT)\s*\(\s*({_NAME})\s*\)$", re.IGNORECASE)
_ASSIGN_RE = re.compile(rf"^({_NAME})\s*=\s*([A-Za-z]+)\s*\((.*)\)$")


class BenchError(Exception):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BenchSyntaxError(BenchError):
    pass


class UndeclaredOperand(BenchError):
    pass


class RedefinedName(BenchError):
    pass


class UnknownKind(BenchError):
    pass


def parse_bench(text: str) -> Circuit:
    """Parse .bench text into a validated Circuit."""
    inputs: list[tuple[str, int]] = []
    outputs: list[tuple[str, int]] = []
    assigns: list[tuple[str, Kind, list[str], int]] = []
    defined: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _IO_RE.match(line)
        if m:
            word, name = m.group(1).upper(), m.group(2)
            if word == "INPUT":
                if name in defined:
                    raise RedefinedName(f"'{name}' already defined", lineno)
                defined[name] = lineno
                inputs.append((name, lineno))
            else:
                outputs.append((name, lineno))
            continue
        m = _ASSIGN_RE.match(line)
        if m:
            name, kind_tok, ops = m.group(1), m.group(2), m.group(3)
            kind = _KINDS.get(kind_tok.upper())
            if kind is None:
                raise UnknownKind(f"unknown gate kind '{kind_tok}'", lineno)
            operands = [o.strip() for o in ops.split(",")] if ops.strip() else []
            for o in operands:
                if not re.fullmatch(_NAME, o):
                    raise BenchSyntaxError(f"bad operand '{o}'", lineno)
            if name in defined:
                raise RedefinedName(f"'{name}' already defined", lineno)
            defined[name] = lineno
            assigns.append((name, kind, operands, lineno))
            continue
        raise BenchSyntaxError(f"cannot parse '{line}'", lineno)

    circuit = Circuit()
    for name, _ in inputs:
        circuit.add_input(name)
    # Create gate vertices in declaration order, link operands afterwards
    # so forward references work.
    for name, kind, _, _ in assigns:
        circuit._new_vertex(kind, name)
    for name, kind, operands, lineno in assigns:
        v = circuit.vertices[circuit.vid_of(name)]
        for op in operands:
            try:
                src = circuit.vid_of(op)
            except KeyError:
                raise UndeclaredOperand(f"operand '{op}' never defined", lineno)
            v.fanins.append(src)
            circuit.vertices[src].fanouts.append(v.vid)
    for name, lineno in outputs:
        try:
            circuit.set_output(name, circuit.vid_of(name))
        except KeyError:
            raise UndeclaredOperand(f"output '{name}' never defined", lineno)
    validate(circuit)
    return circuit


_CONST_SOURCES = {1: "vdd", 0: "gnd"}


def write_bench(circuit: Circuit, header: str | None = None) -> str:
    """Serialize a circuit to .bench text.

    Constants are folded into consumers first.  Output names whose driver
    carries a different vertex name are emitted as BUF aliases.
    """
    from .netlist import topo_order, CONST_KINDS

    work = circuit.copy()
    # Fold constants feeding gates; only output-driving constants remain.
    for vid in list(work.vertices):
        v = work.vertices.get(vid)
        if v is not None and v.kind in CONST_KINDS and v.fanouts:
            work.replace_vertex_with_constant(vid, 1 if v.kind == Kind.CONST1 else 0)
    validate(work)

    const_pseudo: dict[int, str] = {}
    for v in work.vertices.values():
        if v.kind in CONST_KINDS:
            bit = 1 if v.kind == Kind.CONST1 else 0
            if bit not in const_pseudo:
                name = _CONST_SOURCES[bit]
                while name in work._name2vid:
                    name += "_"
                const_pseudo[bit] = name

    lines = []
    if header:
        for h in header.splitlines():
            lines.append(f"# {h}")
    if const_pseudo:
        lines.append("# reserved constant pseudo-inputs: "
                     + ", ".join(f"{n}={b}" for b, n in sorted(const_pseudo.items(),
                                                               reverse=True)))
    for vid in work.inputs:
        lines.append(f"INPUT({work.vertices[vid].name})")
    for bit in sorted(const_pseudo, reverse=True):
        lines.append(f"INPUT({const_pseudo[bit]})")
    for oname in work.outputs:
        lines.append(f"OUTPUT({oname})")
    lines.append("")

    for vid in topo_order(work):
        v = work.vertices[vid]
        if v.kind == Kind.INPUT:
            continue
        if v.kind in CONST_KINDS:
            bit = 1 if v.kind == Kind.CONST1 else 0
            lines.append(f"{v.name} = BUF({const_pseudo[bit]})")
            continue
        ops = ", ".join(work.vertices[s].name for s in v.fanins)
        lines.append(f"{v.name} = {v.kind.name}({ops})")
    # Aliases for output names not matching their driver's net name.
    for oname, vid in work.outputs.items():
        driver = work.vertices[vid].name
        if oname != driver:
            lines.append(f"{oname} = BUF({driver})")
    return "\n".join(lines) + "\n"

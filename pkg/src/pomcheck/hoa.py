"""HOA v1 import/export for the deterministic Rabin subset.

Import requires state-based acceptance with pairs Fin(2i) & Inf(2i+1) and a
deterministic transition structure; incomplete automata are either rejected
or completed with a fresh rejecting sink. Export emits the same subset so
built automata can be validated with external tools.
"""

from __future__ import annotations

import re

from .errors import HoaError, NotComplete, NotDeterministic, UnsupportedAcceptance
from .rabin import Dra


# ---------------------------------------------------------------------------
# label expressions over AP indices


class _LabelParser:
    def __init__(self, text: str):
        self.tokens = re.findall(r"\d+|[tf!&|()]", text.replace(" ", ""))
        if "".join(self.tokens) != text.replace(" ", ""):
            raise HoaError(f"bad label expression: {text!r}")
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        node = self.parse_or()
        if self.peek() is not None:
            raise HoaError(f"trailing tokens in label expression at {self.peek()!r}")
        return node

    def parse_or(self):
        parts = [self.parse_and()]
        while self.peek() == "|":
            self.take()
            parts.append(self.parse_and())
        return ("or", parts) if len(parts) > 1 else parts[0]

    def parse_and(self):
        parts = [self.parse_atom()]
        while self.peek() == "&":
            self.take()
            parts.append(self.parse_atom())
        return ("and", parts) if len(parts) > 1 else parts[0]

    def parse_atom(self):
        tok = self.take()
        if tok == "!":
            return ("not", self.parse_atom())
        if tok == "t":
            return ("true",)
        if tok == "f":
            return ("false",)
        if tok == "(":
            node = self.parse_or()
            if self.take() != ")":
                raise HoaError("unbalanced parenthesis in label expression")
            return node
        if tok is not None and tok.isdigit():
            return ("ap", int(tok))
        raise HoaError(f"bad token in label expression: {tok!r}")


def _eval_label(node, mask: int) -> bool:
    kind = node[0]
    if kind == "true":
        return True
    if kind == "false":
        return False
    if kind == "ap":
        return bool(mask >> node[1] & 1)
    if kind == "not":
        return not _eval_label(node[1], mask)
    if kind == "and":
        return all(_eval_label(c, mask) for c in node[1])
    if kind == "or":
        return any(_eval_label(c, mask) for c in node[1])
    raise HoaError(f"bad label node {node!r}")


# ---------------------------------------------------------------------------
# import

_ACC_PAIR = re.compile(r"^\(?\s*Fin\s*\(\s*(\d+)\s*\)\s*&\s*Inf\s*\(\s*(\d+)\s*\)\s*\)?$")


def _parse_acceptance(line: str) -> int:
    parts = line.split(None, 1)
    if not parts or not parts[0].isdigit():
        raise UnsupportedAcceptance(f"bad Acceptance header: {line!r}")
    num_sets = int(parts[0])
    rest = parts[1].strip() if len(parts) > 1 else ""
    if num_sets == 0:
        if rest not in ("f", ""):
            raise UnsupportedAcceptance(f"not a Rabin condition: {line!r}")
        return 0
    if num_sets % 2 != 0:
        raise UnsupportedAcceptance(f"odd number of acceptance sets: {line!r}")
    terms = [t.strip() for t in rest.split("|")]
    if len(terms) != num_sets // 2:
        raise UnsupportedAcceptance(f"not a Rabin pair condition: {line!r}")
    for i, term in enumerate(terms):
        m = _ACC_PAIR.match(term)
        if not m or int(m.group(1)) != 2 * i or int(m.group(2)) != 2 * i + 1:
            raise UnsupportedAcceptance(
                f"expected Fin({2 * i}) & Inf({2 * i + 1}), got {term!r}"
            )
    return num_sets // 2


def parse_hoa(text: str, complete_sink: bool = False) -> Dra:
    """Parse a deterministic state-acceptance Rabin automaton from HOA v1.

    With complete_sink=True, missing (state, letter) transitions are routed
    to a fresh rejecting sink instead of raising NotComplete.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("/*")]
    if not lines or not lines[0].replace(" ", "").startswith("HOA:v1"):
        raise HoaError("missing HOA: v1 header")

    num_states = None
    start = None
    aps: list[str] = []
    num_pairs = None
    body_at = None
    for i, ln in enumerate(lines[1:], start=1):
        if ln == "--BODY--":
            body_at = i
            break
        head, _, rest = ln.partition(":")
        head = head.strip()
        rest = rest.strip()
        if head == "States":
            num_states = int(rest)
        elif head == "Start":
            if start is not None:
                raise NotDeterministic("multiple Start states")
            if not rest.isdigit():
                raise NotDeterministic(f"nondeterministic start: {rest!r}")
            start = int(rest)
        elif head == "AP":
            parts = rest.split(None, 1)
            count = int(parts[0])
            names = re.findall(r'"([^"]*)"', parts[1] if len(parts) > 1 else "")
            if len(names) != count:
                raise HoaError(f"AP count mismatch: {ln!r}")
            aps = names
        elif head == "Acceptance":
            num_pairs = _parse_acceptance(rest)
        elif head == "acc-name":
            if not rest.startswith("Rabin"):
                raise UnsupportedAcceptance(f"acceptance {rest!r} is not Rabin")
        elif head == "Alias":
            raise HoaError("Alias headers are not supported")
        # name:, tool:, properties:, comments — ignored
    if body_at is None:
        raise HoaError("missing --BODY--")
    if num_states is None or start is None or num_pairs is None:
        raise HoaError("missing States, Start, or Acceptance header")

    width = 1 << len(aps)
    delta = [[-1] * width for _ in range(num_states)]
    acc_sets: list[set[int]] = [set() for _ in range(2 * num_pairs)]

    state = None
    for ln in lines[body_at + 1:]:
        if ln == "--END--":
            break
        if ln.startswith("State:"):
            rest = ln[len("State:"):].strip()
            rest = re.sub(r'"[^"]*"', "", rest)  # drop optional state name
            m = re.match(r"^(\d+)\s*(\{([\d\s]*)\})?\s*$", rest)
            if not m:
                raise HoaError(f"unsupported State line (state-based acceptance required): {ln!r}")
            state = int(m.group(1))
            if state >= num_states:
                raise HoaError(f"state index {state} out of range")
            if m.group(3):
                for x in m.group(3).split():
                    idx = int(x)
                    if idx >= 2 * num_pairs:
                        raise UnsupportedAcceptance(f"acceptance set {idx} out of range")
                    acc_sets[idx].add(state)
            continue
        m = re.match(r"^\[(.*)\]\s*(\d+)\s*(\{[\d\s]*\})?\s*$", ln)
        if not m:
            raise HoaError(f"unsupported body line (labeled edges required): {ln!r}")
        if m.group(3):
            raise UnsupportedAcceptance("edge-based acceptance is not supported")
        if state is None:
            raise HoaError("edge before any State line")
        expr = _LabelParser(m.group(1)).parse()
        dst = int(m.group(2))
        if dst >= num_states:
            raise HoaError(f"edge target {dst} out of range")
        for mask in range(width):
            if _eval_label(expr, mask):
                if delta[state][mask] != -1:
                    raise NotDeterministic(
                        f"state {state} has two transitions on letter {mask:0{len(aps)}b}"
                    )
                delta[state][mask] = dst

    missing = [(q, mask) for q in range(num_states) for mask in range(width) if delta[q][mask] == -1]
    if missing:
        if not complete_sink:
            q, mask = missing[0]
            raise NotComplete(
                f"state {q} has no transition on letter {mask:0{len(aps)}b}"
                " (use --complete-sink to add a rejecting sink)"
            )
        sink = num_states
        num_states += 1
        for row in delta:
            for mask in range(width):
                if row[mask] == -1:
                    row[mask] = sink
        delta.append([sink] * width)

    pairs = [
        (frozenset(acc_sets[2 * i]), frozenset(acc_sets[2 * i + 1]))
        for i in range(num_pairs)
    ]
    dra = Dra(
        propositions=tuple(aps),
        num_states=num_states,
        initial=start,
        delta=delta,
        acc_pairs=pairs,
        state_names=[f"q{i}" for i in range(num_states)],
    )
    dra.validate()
    return dra


# ---------------------------------------------------------------------------
# export


def _minterm_expr(mask: int, num_aps: int) -> str:
    if num_aps == 0:
        return "t"
    lits = [str(i) if mask >> i & 1 else f"!{i}" for i in range(num_aps)]
    return "&".join(lits)


def dra_to_hoa(dra: Dra, name: str | None = None) -> str:
    """Serialize to the HOA v1 subset accepted by parse_hoa."""
    k = len(dra.propositions)
    width = 1 << k
    r = len(dra.acc_pairs)
    out = ["HOA: v1"]
    if name:
        out.append(f'name: "{name}"')
    out.append(f"States: {dra.num_states}")
    out.append(f"Start: {dra.initial}")
    out.append(f"AP: {k} " + " ".join(f'"{p}"' for p in dra.propositions))
    out.append(f"acc-name: Rabin {r}")
    if r == 0:
        out.append("Acceptance: 0 f")
    else:
        cond = " | ".join(f"(Fin({2 * i}) & Inf({2 * i + 1}))" for i in range(r))
        out.append(f"Acceptance: {2 * r} {cond}")
    out.append("properties: trans-labels explicit-labels state-acc deterministic complete")
    out.append("--BODY--")
    for q in range(dra.num_states):
        sets = []
        for i, (li, ki) in enumerate(dra.acc_pairs):
            if q in li:
                sets.append(2 * i)
            if q in ki:
                sets.append(2 * i + 1)
        suffix = " {" + " ".join(str(x) for x in sets) + "}" if sets else ""
        out.append(f"State: {q}{suffix}")
        by_dest: dict[int, list[int]] = {}
        for mask in range(width):
            by_dest.setdefault(dra.delta[q][mask], []).append(mask)
        for dst in sorted(by_dest):
            masks = by_dest[dst]
            if len(masks) == width:
                expr = "t"
            else:
                expr = " | ".join(_minterm_expr(m, k) for m in masks)
            out.append(f"[{expr}] {dst}")
    out.append("--END--")
    return "\n".join(out) + "\n"


def dra_to_dot(dra: Dra) -> str:
    """Graphviz rendering with letters grouped per edge."""
    lines = ["digraph dra {", "  rankdir=LR;", '  init [shape=point, label=""];']
    for q in range(dra.num_states):
        marks = []
        for i, (li, ki) in enumerate(dra.acc_pairs):
            if q in li:
                marks.append(f"L{i}")
            if q in ki:
                marks.append(f"K{i}")
        suffix = " " + ",".join(marks) if marks else ""
        shape = "doublecircle" if marks and not suffix.startswith(" L") else "circle"
        label = dra.state_names[q] if q < len(dra.state_names) else str(q)
        lines.append(f'  {q} [shape={shape}, label="{q}: {label}{suffix}"];')
    lines.append(f"  init -> {dra.initial};")
    width = 1 << len(dra.propositions)
    for q in range(dra.num_states):
        by_dest: dict[int, list[str]] = {}
        for mask in range(width):
            letter = "{" + ",".join(
                p for i, p in enumerate(dra.propositions) if mask >> i & 1
            ) + "}"
            by_dest.setdefault(dra.delta[q][mask], []).append(letter)
        for dst in sorted(by_dest):
            label = " | ".join(by_dest[dst])
            lines.append(f'  {q} -> {dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Plain-text model file format.

One declaration per line, `#` starts a comment, indices are 0-based,
unlisted probabilities are zero:

    states: N            actions: N           observations: N
    discount: x          start: p0 p1 ... | uniform
    terminal: s1 s2 ...
    T: a : s : s' : p    O: a : s' : o : p
    label: s : prop1 prop2 ...
    R: a : s : r         (optional reward extension)

Floats are written with 17 significant digits so parse(write(m)) is an
exact round trip.
"""

from __future__ import annotations

import numpy as np

from .errors import DuplicateEntry, ModelSyntaxError
from .model import TabularPomdp, validate


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_model(model: TabularPomdp) -> str:
    out = []
    out.append(f"states: {model.num_states}")
    out.append(f"actions: {model.num_actions}")
    out.append(f"observations: {model.num_observations}")
    out.append(f"discount: {_fmt(model.discount)}")
    b0 = model.initial_belief
    if np.allclose(b0, 1.0 / model.num_states) and len(set(b0.tolist())) == 1:
        out.append("start: uniform")
    else:
        out.append("start: " + " ".join(_fmt(p) for p in b0))
    if model.terminal_states:
        out.append("terminal: " + " ".join(str(s) for s in sorted(model.terminal_states)))
    for (s, a) in sorted(model.transition, key=lambda sa: (sa[1], sa[0])):
        for s2, p in model.transition[(s, a)]:
            out.append(f"T: {a} : {s} : {s2} : {_fmt(p)}")
    obs = model.observation
    for a in range(model.num_actions):
        for s2 in range(model.num_states):
            for o in range(model.num_observations):
                p = obs[a, s2, o]
                if p != 0.0:
                    out.append(f"O: {a} : {s2} : {o} : {_fmt(p)}")
    for s in sorted(model.labels):
        out.append(f"label: {s} : " + " ".join(sorted(model.labels[s])))
    if model.reward is not None:
        for a in range(model.num_actions):
            for s in range(model.num_states):
                r = model.reward[s, a]
                if r != 0.0:
                    out.append(f"R: {a} : {s} : {_fmt(r)}")
    return "\n".join(out) + "\n"


def _split_decl(body: str, lineno: int, parts: int) -> list[str]:
    fields = [f.strip() for f in body.split(":")]
    if len(fields) != parts:
        raise ModelSyntaxError(lineno, f"expected {parts} ':'-separated fields, got {len(fields)}")
    return fields


def _int(text: str, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ModelSyntaxError(lineno, f"bad {what}: {text!r}") from None


def _float(text: str, lineno: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ModelSyntaxError(lineno, f"bad {what}: {text!r}") from None


def parse_model(text: str) -> TabularPomdp:
    """Parse the model file format; raises ModelSyntaxError with line numbers."""
    num_states = num_actions = num_observations = None
    discount = 1.0
    start_spec = None
    terminal: set[int] = set()
    t_entries: dict[tuple[int, int], list[tuple[int, float]]] = {}
    t_seen: set[tuple[int, int, int]] = set()
    o_entries: list[tuple[int, int, int, float]] = []
    o_seen: set[tuple[int, int, int]] = set()
    r_entries: list[tuple[int, int, float]] = []
    labels: dict[int, set[str]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ModelSyntaxError(lineno, f"missing ':' in {line!r}")
        head = head.strip()
        body = body.strip()
        if head == "states":
            num_states = _int(body, lineno, "state count")
        elif head == "actions":
            num_actions = _int(body, lineno, "action count")
        elif head == "observations":
            num_observations = _int(body, lineno, "observation count")
        elif head == "discount":
            discount = _float(body, lineno, "discount")
        elif head == "start":
            start_spec = (lineno, body)
        elif head == "terminal":
            terminal.update(_int(x, lineno, "terminal state") for x in body.split())
        elif head == "T":
            a_s, s_s, s2_s, p_s = _split_decl(body, lineno, 4)
            a = _int(a_s, lineno, "action")
            s = _int(s_s, lineno, "state")
            s2 = _int(s2_s, lineno, "successor")
            p = _float(p_s, lineno, "probability")
            if (a, s, s2) in t_seen:
                raise DuplicateEntry(lineno, f"duplicate T entry for (a={a}, s={s}, s'={s2})")
            t_seen.add((a, s, s2))
            t_entries.setdefault((s, a), []).append((s2, p))
        elif head == "O":
            a_s, s2_s, o_s, p_s = _split_decl(body, lineno, 4)
            a = _int(a_s, lineno, "action")
            s2 = _int(s2_s, lineno, "state")
            o = _int(o_s, lineno, "observation")
            p = _float(p_s, lineno, "probability")
            if (a, s2, o) in o_seen:
                raise DuplicateEntry(lineno, f"duplicate O entry for (a={a}, s'={s2}, o={o})")
            o_seen.add((a, s2, o))
            o_entries.append((a, s2, o, p))
        elif head == "R":
            a_s, s_s, r_s = _split_decl(body, lineno, 3)
            r_entries.append(
                (
                    _int(a_s, lineno, "action"),
                    _int(s_s, lineno, "state"),
                    _float(r_s, lineno, "reward"),
                )
            )
        elif head == "label":
            fields = [f.strip() for f in body.split(":")]
            if len(fields) != 2:
                raise ModelSyntaxError(lineno, "label needs `state : props`")
            s = _int(fields[0], lineno, "state")
            labels.setdefault(s, set()).update(fields[1].split())
        else:
            raise ModelSyntaxError(lineno, f"unknown declaration {head!r}")

    if num_states is None or num_actions is None or num_observations is None:
        raise ModelSyntaxError(0, "missing states:, actions:, or observations: header")

    if start_spec is None:
        initial = np.full(num_states, 1.0 / num_states)
    else:
        lineno, body = start_spec
        if body == "uniform":
            initial = np.full(num_states, 1.0 / num_states)
        else:
            vals = [_float(x, lineno, "start probability") for x in body.split()]
            if len(vals) != num_states:
                raise ModelSyntaxError(lineno, f"start vector has {len(vals)} entries, expected {num_states}")
            initial = np.array(vals)

    observation = np.zeros((num_actions, num_states, num_observations))
    for a, s2, o, p in o_entries:
        if not (0 <= a < num_actions and 0 <= s2 < num_states and 0 <= o < num_observations):
            raise ModelSyntaxError(0, f"O entry (a={a}, s'={s2}, o={o}) out of range")
        observation[a, s2, o] = p

    reward = None
    if r_entries:
        reward = np.zeros((num_states, num_actions))
        for a, s, r in r_entries:
            reward[s, a] = r

    return TabularPomdp(
        num_states=num_states,
        num_actions=num_actions,
        num_observations=num_observations,
        transition={k: tuple(v) for k, v in t_entries.items()},
        observation=observation,
        initial_belief=initial,
        discount=discount,
        labels={s: frozenset(ps) for s, ps in labels.items()},
        terminal_states=frozenset(terminal),
        reward=reward,
    )


def load_model(path: str) -> TabularPomdp:
    with open(path, encoding="utf-8") as fh:
        model = parse_model(fh.read())
    problems = validate(model)
    if problems:
        raise ModelSyntaxError(0, f"model fails validation: {problems[0]} (+{len(problems) - 1} more)" if len(problems) > 1 else f"model fails validation: {problems[0]}")
    return model

"""Deterministic Turing machines and their perturbed acceptance notions.

Configurations store the two half-tapes as finite words with the blank
tail trimmed: `left` holds the symbols before the head nearest-first,
`right` starts with the symbol under the head. Machines must be
deterministic, accepting and rejecting state sets must be disjoint and
absorbing (a transition leaving F stays in F, same for R), and the
literal do-nothing rule (q, a) -> (q, a, stay) is rejected outright so
every step changes the configuration.

Two perturbation models are implemented.

Space perturbation with window n: before each step, any tape symbol at
distance n+1 or more from the head may be replaced. Acceptance reduces
to reachability in a finite graph over truncated windows
(q, a_-n..a_-1, a_0..a_n); moving the head shifts the window and appends
a nondeterministically chosen symbol on the side the head moved toward.

Time perturbation with budget n: once strictly more than n steps have
run, the control state may spontaneously jump anywhere as long as the
machine has not yet decided. Acceptance collapses to a closed form:
accepted within n steps, or not yet decided within n steps (a jump can
then enter an accepting state, provided the machine has one).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional

from robustreach.errors import InputFormatError, ToolkitError

MOVE_LEFT = -1
MOVE_STAY = 0
MOVE_RIGHT = 1

_MOVES = (MOVE_LEFT, MOVE_STAY, MOVE_RIGHT)


class MachineError(ToolkitError):
    """Raised for ill-formed machines, configurations or windows."""


class MissingTransitionError(ToolkitError):
    """The machine halts without a decision: no rule for (state, symbol)."""


Rule = tuple[str, str, str, str, int]  # (state, read, next state, write, move)


@dataclass(frozen=True)
class TuringMachine:
    """A single-tape deterministic machine over a finite alphabet.

    `alphabet` lists the input symbols in declaration order (the order
    matters to the tape-digit encoding downstream); `blank` is a distinct
    tape-only symbol. `rules` is the transition table as a sorted tuple of
    (state, read, next, write, move) entries.
    """

    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    blank: str
    initial: str
    accepting: frozenset[str]
    rejecting: frozenset[str]
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        if len(set(self.states)) != len(self.states) or not self.states:
            raise MachineError("states must be a nonempty duplicate-free tuple")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise MachineError("alphabet symbols must be distinct")
        for sym in (*self.alphabet, self.blank):
            if len(sym) != 1:
                raise MachineError(f"symbols must be single characters: {sym!r}")
        if self.blank in self.alphabet:
            raise MachineError("blank must not appear in the input alphabet")
        state_set = set(self.states)
        if self.initial not in state_set:
            raise MachineError(f"initial state {self.initial!r} undeclared")
        for name, group in (("accepting", self.accepting), ("rejecting", self.rejecting)):
            if not group <= state_set:
                raise MachineError(f"{name} states must be declared states")
        if self.accepting & self.rejecting:
            raise MachineError("accepting and rejecting states must be disjoint")
        tape_syms = set(self.alphabet) | {self.blank}
        seen: set[tuple[str, str]] = set()
        for state, read, nxt, write, move in self.rules:
            if state not in state_set or nxt not in state_set:
                raise MachineError(f"rule uses undeclared state: {state} -> {nxt}")
            if read not in tape_syms or write not in tape_syms:
                raise MachineError(f"rule uses undeclared symbol: {read!r}/{write!r}")
            if move not in _MOVES:
                raise MachineError(f"bad move {move!r}")
            if (state, read) in seen:
                raise MachineError(f"nondeterministic rules for ({state}, {read})")
            seen.add((state, read))
            if state == nxt and read == write and move == MOVE_STAY:
                raise MachineError(
                    f"do-nothing rule ({state}, {read}) is not allowed"
                )
            if state in self.accepting and nxt not in self.accepting:
                raise MachineError("transitions from accepting states must stay accepting")
            if state in self.rejecting and nxt not in self.rejecting:
                raise MachineError("transitions from rejecting states must stay rejecting")

    @cached_property
    def transition(self) -> Mapping[tuple[str, str], tuple[str, str, int]]:
        return {
            (state, read): (nxt, write, move)
            for state, read, nxt, write, move in self.rules
        }

    @cached_property
    def tape_symbols(self) -> tuple[str, ...]:
        """Blank first, then the input alphabet in declaration order."""
        return (self.blank, *self.alphabet)

    def check_word(self, word: str) -> None:
        bad = [c for c in word if c not in self.alphabet]
        if bad:
            raise MachineError(f"word uses symbols outside the alphabet: {bad}")


def _trim(symbols: tuple[str, ...], blank: str) -> tuple[str, ...]:
    """Drop the blank suffix (the far-from-head end) of a half-tape word."""
    end = len(symbols)
    while end > 0 and symbols[end - 1] == blank:
        end -= 1
    return symbols[:end]


@dataclass(frozen=True)
class Configuration:
    """A machine configuration in canonical (blank-trimmed) form.

    left:  symbols before the head, nearest first (left[0] sits just left
           of the head); right: symbols from the head on (right[0] is
           under the head). Both words carry no trailing blanks, so equal
           configurations compare equal structurally.
    """

    state: str
    left: tuple[str, ...]
    right: tuple[str, ...]

    @classmethod
    def make(
        cls, machine: TuringMachine, state: str, left: Iterable[str], right: Iterable[str]
    ) -> "Configuration":
        return cls(
            state,
            _trim(tuple(left), machine.blank),
            _trim(tuple(right), machine.blank),
        )

    @classmethod
    def initial(cls, machine: TuringMachine, word: str) -> "Configuration":
        machine.check_word(word)
        return cls.make(machine, machine.initial, (), tuple(word))

    def head_symbol(self, machine: TuringMachine) -> str:
        return self.right[0] if self.right else machine.blank


def step(machine: TuringMachine, config: Configuration) -> Configuration:
    """One exact machine step; MissingTransitionError if no rule applies."""
    head = config.head_symbol(machine)
    rule = machine.transition.get((config.state, head))
    if rule is None:
        raise MissingTransitionError(
            f"no rule for state {config.state!r} reading {head!r}"
        )
    nxt, write, move = rule
    rest = config.right[1:] if config.right else ()
    if move == MOVE_STAY:
        left = config.left
        right = (write, *rest)
    elif move == MOVE_RIGHT:
        left = (write, *config.left)
        right = rest
    else:
        prev = config.left[0] if config.left else machine.blank
        left = config.left[1:]
        right = (prev, write, *rest)
    return Configuration.make(machine, nxt, left, right)


class Outcome(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    RUNNING = "running"
    STUCK = "stuck"  # halt without decision: no applicable rule


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    steps: int
    config: Configuration
    trace: tuple[Configuration, ...]


def run(
    machine: TuringMachine, word: str, max_steps: int, keep_trace: bool = False
) -> RunResult:
    """Run the machine for at most max_steps steps.

    The step count reported for a decision is the number of the step that
    first entered an accepting/rejecting state; a machine starting in one
    decides at step 0.
    """
    if max_steps < 0:
        raise MachineError(f"max_steps must be >= 0, got {max_steps}")
    config = Configuration.initial(machine, word)
    trace = [config]
    t = 0
    while True:
        if config.state in machine.accepting:
            return RunResult(Outcome.ACCEPT, t, config, _maybe(trace, keep_trace))
        if config.state in machine.rejecting:
            return RunResult(Outcome.REJECT, t, config, _maybe(trace, keep_trace))
        if t == max_steps:
            return RunResult(Outcome.RUNNING, t, config, _maybe(trace, keep_trace))
        try:
            config = step(machine, config)
        except MissingTransitionError:
            return RunResult(Outcome.STUCK, t, config, _maybe(trace, keep_trace))
        t += 1
        if keep_trace:
            trace.append(config)


def _maybe(trace: list[Configuration], keep: bool) -> tuple[Configuration, ...]:
    return tuple(trace) if keep else ()


@dataclass(frozen=True)
class Window:
    """Head-centred truncation of a configuration.

    left has exactly n symbols (nearest first), right exactly n+1 symbols
    starting with the one under the head. Unlike configurations, windows
    keep their blanks: the fixed width is the whole point.
    """

    state: str
    left: tuple[str, ...]
    right: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.left)


def truncate(machine: TuringMachine, config: Configuration, n: int) -> Window:
    """The window of radius n around the head, blank-padded as needed."""
    if n < 0:
        raise MachineError(f"window radius must be >= 0, got {n}")
    blank = machine.blank
    left = tuple(
        config.left[i] if i < len(config.left) else blank for i in range(n)
    )
    right = tuple(
        config.right[i] if i < len(config.right) else blank for i in range(n + 1)
    )
    return Window(config.state, left, right)


def window_successors(machine: TuringMachine, window: Window) -> frozenset[Window]:
    """One-step successors of a window in the space-perturbed graph.

    A stay move rewrites the head cell: exactly one successor. A head
    move shifts the window and the vacated far cell takes every symbol in
    turn, so there are exactly |alphabet| + 1 successors. A window whose
    (state, head symbol) has no rule has no successors.
    """
    n = window.n
    head = window.right[0]
    rule = machine.transition.get((window.state, head))
    if rule is None:
        return frozenset()
    nxt, write, move = rule
    if move == MOVE_STAY:
        return frozenset({Window(nxt, window.left, (write, *window.right[1:]))})
    fresh = machine.tape_symbols
    out = []
    if move == MOVE_RIGHT:
        if n == 0:
            # The written cell leaves the window at once; the new head cell
            # arrives from the perturbable zone.
            out = [Window(nxt, (), (s,)) for s in fresh]
        else:
            left = (write, *window.left[:-1])
            for s in fresh:
                out.append(Window(nxt, left, (*window.right[1:], s)))
    else:
        if n == 0:
            out = [Window(nxt, (), (s,)) for s in fresh]
        else:
            right = (window.left[0], write, *window.right[1:-1])
            for s in fresh:
                out.append(Window(nxt, (*window.left[1:], s), right))
    return frozenset(out)


def window_is_stuck(machine: TuringMachine, window: Window) -> bool:
    """True when the window's (state, head symbol) has no rule.

    Distinguishes the empty successor set of a halted-without-decision
    window from that of a decided one (whose emptiness callers usually
    arrange by not expanding it).
    """
    return machine.transition.get((window.state, window.right[0])) is None


class _PackedWindows:
    """Integer-packed window graph used by the BFS: fast hashing and shifts.

    A window is a triple (state index, left code, right code) where each
    half-tape word packs its symbols little-endian, nearest cell in the
    lowest bits. Behaviour is cross-checked against window_successors in
    the test suite.
    """

    def __init__(self, machine: TuringMachine, n: int):
        self.n = n
        syms = machine.tape_symbols
        self.bits = max(1, (len(syms) - 1).bit_length())
        self.code = {s: i for i, s in enumerate(syms)}
        self.ncodes = len(syms)
        self.state_idx = {q: i for i, q in enumerate(machine.states)}
        self.accept = {self.state_idx[q] for q in machine.accepting}
        self.reject = {self.state_idx[q] for q in machine.rejecting}
        self.head_mask = (1 << self.bits) - 1
        self.left_mask = (1 << (self.bits * n)) - 1
        self.rhigh = self.bits * n  # bit offset of the far-right cell
        self.table: dict[tuple[int, int], tuple[int, int, int]] = {}
        for (q, a), (q2, b, move) in machine.transition.items():
            self.table[(self.state_idx[q], self.code[a])] = (
                self.state_idx[q2],
                self.code[b],
                move,
            )

    def pack(self, window: Window) -> tuple[int, int, int]:
        left = 0
        for i, s in enumerate(window.left):
            left |= self.code[s] << (self.bits * i)
        right = 0
        for i, s in enumerate(window.right):
            right |= self.code[s] << (self.bits * i)
        return (self.state_idx[window.state], left, right)

    def successors(self, w: tuple[int, int, int]) -> list[tuple[int, int, int]]:
        q, left, right = w
        rule = self.table.get((q, right & self.head_mask))
        if rule is None:
            return []
        q2, b, move = rule
        if move == MOVE_STAY:
            return [(q2, left, (right & ~self.head_mask) | b)]
        n, bits = self.n, self.bits
        if n == 0:
            return [(q2, 0, s) for s in range(self.ncodes)]
        if move == MOVE_RIGHT:
            nleft = (b | (left << bits)) & self.left_mask
            base = right >> bits
            return [(q2, nleft, base | (s << self.rhigh)) for s in range(self.ncodes)]
        lead = left & self.head_mask
        nright = lead | (b << bits) | (((right >> bits) & (self.left_mask >> bits)) << (2 * bits))
        base_left = left >> bits
        top = bits * (n - 1)
        return [(q2, base_left | (s << top), nright) for s in range(self.ncodes)]


def accepts_space_perturbed(machine: TuringMachine, word: str, n: int) -> bool:
    """Reachability of an accepting window from the truncated start.

    True iff some n-space-perturbed run accepts the word, by breadth-first
    search over the finite window graph. Rejecting windows are not
    expanded: rejection is absorbing, so no accepting window lies beyond
    one.
    """
    if n < 1:
        raise MachineError(f"space perturbation needs window n >= 1, got {n}")
    packer = _PackedWindows(machine, n)
    start = packer.pack(truncate(machine, Configuration.initial(machine, word), n))
    if start[0] in packer.accept:
        return True
    seen = {start}
    queue = deque((start,))
    accept = packer.accept
    reject = packer.reject
    while queue:
        w = queue.popleft()
        if w[0] in reject:
            continue
        for nw in packer.successors(w):
            if nw in seen:
                continue
            if nw[0] in accept:
                return True
            seen.add(nw)
            queue.append(nw)
    return False


def space_perturbed_window_count(machine: TuringMachine, word: str, n: int) -> int:
    """Size of the reachable window set (diagnostics and test budgets)."""
    if n < 1:
        raise MachineError(f"space perturbation needs window n >= 1, got {n}")
    packer = _PackedWindows(machine, n)
    start = packer.pack(truncate(machine, Configuration.initial(machine, word), n))
    seen = {start}
    queue = deque((start,))
    while queue:
        w = queue.popleft()
        if w[0] in packer.reject or w[0] in packer.accept:
            continue
        for nw in packer.successors(w):
            if nw not in seen:
                seen.add(nw)
                queue.append(nw)
    return len(seen)


def accepts_time_perturbed(machine: TuringMachine, word: str, n: int) -> bool:
    """Closed form for time-perturbed acceptance with budget n.

    True iff the machine accepts within n steps, or has neither accepted
    nor rejected within n steps while an accepting state exists for a
    state jump to enter. Perturbations fire only strictly after step n,
    and never from a decided state. A halt without decision does not
    count as deciding, so jumps may still fire from it.
    """
    if n < 0:
        raise MachineError(f"time perturbation needs budget n >= 0, got {n}")
    result = run(machine, word, n)
    if result.outcome is Outcome.ACCEPT:
        return True
    if result.outcome is Outcome.REJECT:
        return False
    return bool(machine.accepting)

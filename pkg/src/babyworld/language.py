"""The instruction language: AST, grammar-directed random sampler, surface
text emitter, recursive-descent parser, and the closed-form sentence counter.

Sentences are built from four clause verbs (go to / pick up / open / put
next to) over object descriptors, optionally joined by "and" inside one of
the two sequencing forms ("..., then ..." / "... after you ...").  Two
structural restrictions apply: at most one sequencing connector per
sentence, and "and" may appear only inside a sequencing form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from babyworld.world import BALL, BOX, COLORS, DOOR, KEY

GOTO, PICKUP, OPEN_VERB, PUT_NEXT = "goto", "pickup", "open", "put_next"
VERBS = (GOTO, PICKUP, OPEN_VERB, PUT_NEXT)

DESCRIBABLE_KINDS = (DOOR, BALL, BOX, KEY)
NOT_DOOR_KINDS = (BALL, BOX, KEY)

LEFT, RIGHT, FRONT, BEHIND = "left", "right", "front", "behind"
LOCATIONS = (LEFT, RIGHT, FRONT, BEHIND)
_LOC_TEXT = {
    LEFT: "on your left",
    RIGHT: "on your right",
    FRONT: "in front of you",
    BEHIND: "behind you",
}

_VERB_TEXT = {GOTO: "go to", PICKUP: "pick up", OPEN_VERB: "open"}


class ParseError(ValueError):
    """Input does not belong to the language; carries a token position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at token {position})")
        self.position = position


class RestrictionError(ParseError):
    """Grammatical input that violates a structural restriction."""


@dataclass(frozen=True, slots=True)
class Descriptor:
    """An object reference: article, optional color, kind, optional location."""

    article: str
    color: str | None
    kind: str
    loc: str | None = None

    def __post_init__(self):
        assert self.article in ("the", "a")
        assert self.color is None or self.color in COLORS
        assert self.kind in DESCRIBABLE_KINDS
        assert self.loc is None or self.loc in LOCATIONS


@dataclass(frozen=True, slots=True)
class Clause:
    """One task: a verb applied to a target (plus an anchor for put-next)."""

    verb: str
    target: Descriptor
    anchor: Descriptor | None = None

    def __post_init__(self):
        assert self.verb in VERBS
        assert (self.anchor is not None) == (self.verb == PUT_NEXT)
        if self.verb in (PICKUP, PUT_NEXT):
            assert self.target.kind != DOOR, f"{self.verb} target may not be a door"
        if self.verb == OPEN_VERB:
            assert self.target.kind == DOOR, "open targets are always doors"


@dataclass(frozen=True, slots=True)
class AndNode:
    """Unordered pair of clauses; legal only inside a sequencing body."""

    first: Clause
    second: Clause


# A sequencing body is a bare clause or an "and" pair.
Body = Clause | AndNode


@dataclass(frozen=True, slots=True)
class ThenNode:
    """"<first>, then <second>": first must be completed before second."""

    first: Body
    second: Body


@dataclass(frozen=True, slots=True)
class AfterNode:
    """"<first> after you <second>": second must be completed before first."""

    first: Body
    second: Body


# A full instruction: at most one sequencing node, always at the root, and
# a connector-free sentence is exactly one clause.
Instruction = Clause | ThenNode | AfterNode


def clauses_of(instr: Instruction) -> list[Clause]:
    """All clauses of an instruction, in surface order."""
    if isinstance(instr, Clause):
        return [instr]
    if isinstance(instr, AndNode):
        return [instr.first, instr.second]
    return clauses_of(instr.first) + clauses_of(instr.second)


# --- surface text ----------------------------------------------------------

def descriptor_text(d: Descriptor) -> str:
    parts = [d.article]
    if d.color is not None:
        parts.append(d.color)
    parts.append(d.kind)
    if d.loc is not None:
        parts.append(_LOC_TEXT[d.loc])
    return " ".join(parts)


def clause_text(c: Clause) -> str:
    if c.verb == PUT_NEXT:
        return f"put {descriptor_text(c.target)} next to {descriptor_text(c.anchor)}"
    return f"{_VERB_TEXT[c.verb]} {descriptor_text(c.target)}"


def to_text(instr: Instruction) -> str:
    """The unique surface string of an instruction AST."""
    if isinstance(instr, Clause):
        return clause_text(instr)
    if isinstance(instr, AndNode):
        return f"{clause_text(instr.first)} and {clause_text(instr.second)}"
    if isinstance(instr, ThenNode):
        return f"{to_text(instr.first)}, then {to_text(instr.second)}"
    if isinstance(instr, AfterNode):
        return f"{to_text(instr.first)} after you {to_text(instr.second)}"
    raise TypeError(instr)


# --- parsing ---------------------------------------------------------------

class _Tokens:
    def __init__(self, text: str):
        self.toks = text.lower().replace(",", " , ").split()
        self.pos = 0

    def peek(self, offset=0):
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, word: str, what: str):
        if self.peek() != word:
            raise ParseError(f"expected {what!r}", self.pos)
        return self.take()

    def done(self):
        return self.pos >= len(self.toks)


def _parse_descriptor(t: _Tokens) -> Descriptor:
    if t.peek() not in ("the", "a"):
        raise ParseError("expected an article ('the' or 'a')", t.pos)
    article = t.take()
    color = t.take() if t.peek() in COLORS else None
    if t.peek() not in DESCRIBABLE_KINDS:
        raise ParseError("expected an object kind (door/ball/box/key)", t.pos)
    kind = t.take()
    loc = None
    if t.peek() == "on" and t.peek(1) == "your" and t.peek(2) in (LEFT, RIGHT):
        t.take(), t.take()
        loc = t.take()
    elif t.peek() == "in" and t.peek(1) == "front":
        t.take(), t.take()
        t.expect("of", "'in front of you'")
        t.expect("you", "'in front of you'")
        loc = FRONT
    elif t.peek() == "behind" and t.peek(1) == "you":
        t.take(), t.take()
        loc = BEHIND
    return Descriptor(article, color, kind, loc)


def _parse_clause(t: _Tokens) -> Clause:
    start = t.pos
    head = t.take()
    if head == "go":
        t.expect("to", "'go to'")
        return Clause(GOTO, _parse_descriptor(t))
    if head == "pick":
        t.expect("up", "'pick up'")
        d = _parse_descriptor(t)
        if d.kind == DOOR:
            raise ParseError("pick up target may not be a door", t.pos - 1)
        return Clause(PICKUP, d)
    if head == "open":
        d = _parse_descriptor(t)
        if d.kind != DOOR:
            raise ParseError("open target must be a door", t.pos - 1)
        return Clause(OPEN_VERB, d)
    if head == "put":
        d = _parse_descriptor(t)
        if d.kind == DOOR:
            raise ParseError("put target may not be a door", t.pos - 1)
        t.expect("next", "'next to'")
        t.expect("to", "'next to'")
        return Clause(PUT_NEXT, d, _parse_descriptor(t))
    raise ParseError("expected a verb (go to/pick up/open/put)", start)


def _parse_body(t: _Tokens) -> Body:
    first = _parse_clause(t)
    if t.peek() == "and":
        t.take()
        return AndNode(first, _parse_clause(t))
    return first


def _at_connector(t: _Tokens) -> bool:
    return t.peek() == "," or (t.peek() == "after" and t.peek(1) == "you")


def parse(text: str) -> Instruction:
    """Parse surface text back into an AST; inverse of to_text."""
    t = _Tokens(text)
    if t.done():
        raise ParseError("empty instruction", 0)
    first = _parse_body(t)
    instr: Instruction
    if t.peek() == ",":
        t.take()
        t.expect("then", "'then' after comma")
        instr = ThenNode(first, _parse_body(t))
    elif t.peek() == "after":
        t.take()
        t.expect("you", "'after you'")
        instr = AfterNode(first, _parse_body(t))
    else:
        if isinstance(first, AndNode):
            raise RestrictionError(
                "'and' may only appear inside a 'then' or 'after' form", t.pos)
        instr = first
    if _at_connector(t):
        raise RestrictionError(
            "no more than one 'then' or 'after' per instruction", t.pos)
    if t.peek() == "and":
        raise RestrictionError(
            "'and' joins at most two clauses per body", t.pos)
    if not t.done():
        raise ParseError(f"unexpected trailing input {t.peek()!r}", t.pos)
    return instr


# --- grammar-directed random sampling ---------------------------------------

@dataclass(frozen=True)
class GrammarShape:
    """The instruction subset a level permits."""

    verbs: tuple[str, ...] = VERBS
    allow_seq: bool = False
    allow_and: bool = False
    allow_loc: bool = False
    colors: tuple[str, ...] = COLORS
    allow_no_color: bool = True
    articles: tuple[str, ...] = ("the", "a")

    def __post_init__(self):
        assert self.verbs, "empty grammar shape: at least one verb required"
        assert all(v in VERBS for v in self.verbs)
        assert self.colors or self.allow_no_color


def sample_descriptor(rng: random.Random, shape: GrammarShape,
                      kinds: tuple[str, ...]) -> Descriptor:
    article = rng.choice(shape.articles)
    color_options = ([None] if shape.allow_no_color else []) + list(shape.colors)
    color = rng.choice(color_options)
    kind = rng.choice(kinds)
    loc = rng.choice([None, *LOCATIONS]) if shape.allow_loc else None
    return Descriptor(article, color, kind, loc)


def sample_clause(rng: random.Random, shape: GrammarShape) -> Clause:
    verb = rng.choice(shape.verbs)
    if verb == GOTO:
        return Clause(GOTO, sample_descriptor(rng, shape, DESCRIBABLE_KINDS))
    if verb == PICKUP:
        return Clause(PICKUP, sample_descriptor(rng, shape, NOT_DOOR_KINDS))
    if verb == OPEN_VERB:
        return Clause(OPEN_VERB, sample_descriptor(rng, shape, (DOOR,)))
    return Clause(PUT_NEXT, sample_descriptor(rng, shape, NOT_DOOR_KINDS),
                  sample_descriptor(rng, shape, DESCRIBABLE_KINDS))


def _sample_body(rng: random.Random, shape: GrammarShape) -> Body:
    if shape.allow_and and rng.random() < 0.5:
        return AndNode(sample_clause(rng, shape), sample_clause(rng, shape))
    return sample_clause(rng, shape)


def sample_instruction(rng: random.Random, shape: GrammarShape) -> Instruction:
    """Draw a random instruction, uniform over production alternatives."""
    if shape.allow_seq:
        form = rng.choice(["single", "then", "after"])
    else:
        form = "single"
    if form == "single":
        return sample_clause(rng, shape)
    if form == "then":
        return ThenNode(_sample_body(rng, shape), _sample_body(rng, shape))
    return AfterNode(_sample_body(rng, shape), _sample_body(rng, shape))


def shape_allows(shape: GrammarShape, instr: Instruction) -> bool:
    """Whether an instruction stays within a grammar subset."""
    if isinstance(instr, (ThenNode, AfterNode)):
        if not shape.allow_seq:
            return False
        bodies = [instr.first, instr.second]
    else:
        bodies = [instr]
    if any(isinstance(b, AndNode) for b in bodies) and not shape.allow_and:
        return False
    for clause in clauses_of(instr):
        if clause.verb not in shape.verbs:
            return False
        for d in (clause.target, clause.anchor):
            if d is None:
                continue
            if d.article not in shape.articles:
                return False
            if d.loc is not None and not shape.allow_loc:
                return False
            if d.color is None and not shape.allow_no_color:
                return False
            if d.color is not None and d.color not in shape.colors:
                return False
    return True


# --- cardinality ------------------------------------------------------------

def count_instructions(n_colors: int = len(COLORS), n_locs: int = len(LOCATIONS),
                       n_articles: int = 2, allow_connectors: bool = True) -> int:
    """Exact number of distinct instruction ASTs under the restrictions.

    Descriptors per kind: articles x (colors + no-color) x (locations +
    no-location). Clause count sums the four verb productions; a sentence
    is one clause, or two sequenced bodies each holding one or two clauses.
    """
    d = n_articles * (n_colors + 1) * (n_locs + 1)
    clauses = 4 * d + 3 * d + d + (3 * d) * (4 * d)
    if not allow_connectors:
        return clauses
    body = clauses + clauses * clauses
    return clauses + 2 * body * body

import random

import pytest

from babyworld.language import (
    BEHIND, DESCRIBABLE_KINDS, FRONT, GOTO, LEFT, NOT_DOOR_KINDS, OPEN_VERB,
    PICKUP, PUT_NEXT, AfterNode, AndNode, Clause, Descriptor, GrammarShape,
    ParseError, RestrictionError, ThenNode, clause_text, clauses_of,
    count_instructions, parse, sample_instruction, to_text,
)
from babyworld.world import DOOR


def test_parse_simple_goto():
    instr = parse("go to the red ball")
    assert instr == Clause(GOTO, Descriptor("the", "red", "ball"))


def test_parse_open_with_location():
    instr = parse("open the door on your left")
    assert instr == Clause(OPEN_VERB, Descriptor("the", None, "door", LEFT))
    assert to_text(instr) == "open the door on your left"


def test_parse_put_next():
    instr = parse("put a ball next to the blue door")
    assert instr == Clause(
        PUT_NEXT,
        Descriptor("a", None, "ball"),
        Descriptor("the", "blue", "door"),
    )


def test_parse_after_with_and_body():
    text = ("put a ball next to a purple door after you "
            "put a blue box next to a grey box and pick up the purple box")
    instr = parse(text)
    assert isinstance(instr, AfterNode)
    assert isinstance(instr.first, Clause)
    assert isinstance(instr.second, AndNode)
    assert to_text(instr) == text


def test_then_round_trip():
    instr = ThenNode(
        Clause(OPEN_VERB, Descriptor("the", "yellow", "door")),
        Clause(GOTO, Descriptor("the", None, "key", BEHIND)),
    )
    text = to_text(instr)
    assert text == "open the yellow door, then go to the key behind you"
    assert parse(text) == instr


def test_pickup_door_rejected():
    with pytest.raises(ParseError, match="door"):
        parse("pick up the blue door")


def test_open_non_door_rejected():
    with pytest.raises(ParseError):
        parse("open the red ball")


def test_two_connectors_rejected_distinctly():
    with pytest.raises(RestrictionError):
        parse("go to a box, then open a door, then pick up a key")
    with pytest.raises(RestrictionError):
        parse("go to a box after you open a door, then pick up a key")


def test_root_and_rejected():
    with pytest.raises(RestrictionError):
        parse("open the yellow door and go to the key behind you")


def test_three_clause_body_rejected():
    with pytest.raises(RestrictionError):
        parse("go to a box, then open a door and pick up a key and go to a ball")


def test_syntax_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse("go to red ball")  # missing article
    assert err.value.position == 2
    with pytest.raises(ParseError):
        parse("go to the red ball quickly")
    with pytest.raises(ParseError):
        parse("")


def test_front_behind_phrases():
    assert parse("go to the red ball in front of you").target.loc == FRONT
    assert parse("pick up a key behind you").target.loc == BEHIND


# --- sampling ---------------------------------------------------------------

def test_sampler_determinism():
    shape = GrammarShape(allow_seq=True, allow_and=True, allow_loc=True)
    a = [sample_instruction(random.Random(5), shape) for _ in range(20)]
    b = [sample_instruction(random.Random(5), shape) for _ in range(20)]
    assert a == b


def test_sampler_goto_only_shape():
    shape = GrammarShape(verbs=(GOTO,), allow_loc=False)
    rng = random.Random(0)
    for _ in range(50):
        instr = sample_instruction(rng, shape)
        assert isinstance(instr, Clause) and instr.verb == GOTO
        assert instr.target.loc is None


def test_sampler_open_only_shape_emits_door_sentences():
    shape = GrammarShape(verbs=(OPEN_VERB,), allow_loc=True)
    rng = random.Random(1)
    for _ in range(50):
        instr = sample_instruction(rng, shape)
        assert instr.verb == OPEN_VERB and instr.target.kind == DOOR
        parsed = parse(to_text(instr))
        assert parsed == instr


def test_empty_shape_is_contract_error():
    with pytest.raises(AssertionError):
        GrammarShape(verbs=())


def test_round_trip_property_over_random_samples():
    shapes = [
        GrammarShape(),
        GrammarShape(allow_seq=True),
        GrammarShape(allow_seq=True, allow_and=True, allow_loc=True),
        GrammarShape(verbs=(PICKUP, PUT_NEXT), allow_loc=True),
    ]
    rng = random.Random(42)
    for _ in range(400):
        instr = sample_instruction(rng, rng.choice(shapes))
        assert parse(to_text(instr)) == instr
        for clause in clauses_of(instr):
            assert clause.verb in (GOTO, PICKUP, OPEN_VERB, PUT_NEXT)


# --- cardinality -------------------------------------------------------------

def _enumerate_descriptors(kinds, colors, locs):
    for article in ("the", "a"):
        for color in [None, *colors]:
            for kind in kinds:
                for loc in [None, *locs]:
                    yield Descriptor(article, color, kind, loc)


def _enumerate_clauses(colors, locs):
    for d in _enumerate_descriptors(DESCRIBABLE_KINDS, colors, locs):
        yield Clause(GOTO, d)
    for d in _enumerate_descriptors(NOT_DOOR_KINDS, colors, locs):
        yield Clause(PICKUP, d)
    for d in _enumerate_descriptors((DOOR,), colors, locs):
        yield Clause(OPEN_VERB, d)
    for target in _enumerate_descriptors(NOT_DOOR_KINDS, colors, locs):
        for anchor in _enumerate_descriptors(DESCRIBABLE_KINDS, colors, locs):
            yield Clause(PUT_NEXT, target, anchor)


def test_clause_count_matches_full_enumeration():
    clauses = list(_enumerate_clauses(["red", "green", "blue", "purple",
                                       "yellow", "grey"],
                                      ["left", "right", "front", "behind"]))
    assert len(clauses) == 59360
    assert count_instructions(allow_connectors=False) == 59360
    # Distinct ASTs render to distinct surface strings.
    assert len({clause_text(c) for c in clauses}) == 59360


def test_small_grammar_total_matches_enumeration():
    colors, locs = ["red"], ["left"]
    clauses = list(_enumerate_clauses(colors, locs))
    bodies = len(clauses) + len(clauses) ** 2  # clause | clause and clause
    expected_total = len(clauses) + 2 * bodies * bodies
    assert count_instructions(n_colors=1, n_locs=1) == expected_total
    assert count_instructions(n_colors=1, n_locs=1,
                              allow_connectors=False) == len(clauses)


def test_small_grammar_bodies_enumerate_distinct():
    colors, locs = ["red"], []
    clauses = list(_enumerate_clauses(colors, locs))
    texts = {clause_text(c) for c in clauses}
    assert len(texts) == len(clauses)
    and_texts = {f"{a} and {b}" for a in texts for b in texts}
    assert len(and_texts) == len(clauses) ** 2
    assert count_instructions(n_colors=1, n_locs=0) == (
        len(clauses) + 2 * (len(clauses) + len(clauses) ** 2) ** 2)


def test_total_count_has_expected_magnitude():
    total = count_instructions()
    assert f"{total:.2e}" == "2.48e+19"
    assert f"{total:.3e}" == "2.483e+19"

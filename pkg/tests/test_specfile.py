import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_graph
from qglandscape import GraphSpec, dump_spec, parse_spec
from qglandscape.exceptions import EdgeTooShort, NegativePotential, SpecParseError
from qglandscape.potential import PotentialField, Sampled
from qglandscape.specfile import spec_hash

GOOD = """\
# two wells
[options]
shift = 0.5

[vertices]
a
b

[edges]
e a b 2.0   # inner
l b b 1.5

[potential]
e cosine 1 1 3.14159
l sampled 0 1 2 1
"""


def test_parse_example():
    spec = parse_spec(GOOD)
    assert spec.shift == 0.5
    assert spec.graph.m == 2 and spec.graph.edge("l").is_loop
    assert isinstance(spec.potential.on("l"), Sampled)
    assert spec.potential("l", 0.75) == pytest.approx(1.5)


def test_dump_parse_dump_is_byte_identical():
    once = dump_spec(parse_spec(GOOD))
    assert dump_spec(parse_spec(once)) == once


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_round_trip_random_graphs(seed, shift):
    g, V, _, _ = random_graph(seed)
    spec = GraphSpec(g, V, {"shift": shift})
    text = dump_spec(spec)
    back = parse_spec(text)
    assert dump_spec(back) == text
    assert back.graph == g
    assert spec_hash(back) == spec_hash(spec)
    for e in g.edges:
        assert back.potential.on(e.id) == V.on(e.id)


@pytest.mark.parametrize("text, line", [
    ("a\n", 1),
    ("[nodes]\na\n", 1),
    ("[vertices]\na\na\n", 3),
    ("[vertices]\na\n[edges]\ne a z 1\n", 4),
    ("[vertices]\na\n[edges]\ne a a one\n", 4),
    ("[vertices]\na\n[edges]\ne a a 1\n[potential]\nf constant 1\n", 6),
    ("[vertices]\na\n[edges]\ne a a 1\n[potential]\ne wave 1\n", 6),
    ("[vertices]\na\n[edges]\ne a a 1\n[potential]\ne constant 1\ne constant 2\n", 7),
    ("[options]\ncolour = red\n", 2),
    ("[options]\nd_max = x\n", 2),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(SpecParseError) as info:
        parse_spec(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_validation_errors_point_at_the_line():
    with pytest.raises(EdgeTooShort, match="line 5"):
        parse_spec("[vertices]\na\n\n[edges]\ne a a 0\n")
    with pytest.raises(NegativePotential, match="line 6"):
        parse_spec("[vertices]\na\n[edges]\ne a a 1\n[potential]\ne constant -1\n")


def test_missing_potential_means_zero():
    spec = parse_spec("[vertices]\na\n[edges]\ne a a 1\n")
    assert spec.potential("e", 0.3) == 0.0
    assert spec.potential == PotentialField({})

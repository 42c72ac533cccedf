from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from twistlab.complexes import ext_table, is_isomorphic, projective, shift
from twistlab.scenario import Context, ScenarioError, parse_scenario

SCEN = Path(__file__).resolve().parent.parent / "scenarios"
HEADER = "field QQ\ncy 2\ngraph A path 3\nalgebra zigzag\n"


def test_shipped_scenario_round_trip():
    sc = parse_scenario((SCEN / "a3_d2.twl").read_text())
    again = parse_scenario(sc.render())
    assert again == sc
    assert again.render() == sc.render()


def test_custom_graph_and_prime_field():
    text = """field GF(101)
cy 3
graph G {
  vertices a b
  edge a b degrees 1 2
}
algebra zigzag
object X = P(a) + P(b)[1]
expect ext P(a) P(a) = {0:1, 3:1}
"""
    sc = parse_scenario(text)
    assert parse_scenario(sc.render()) == sc
    ctx = Context(sc)
    assert ctx.algebra.field.characteristic == 101
    # P(a)->P(b)[1] is the degree-1 arrow; P(b)[1]->P(a)[3] is the degree-2 arrow
    assert dict(ext_table(ctx.object("X"), ctx.object("X"))) == {0: 3, 3: 3}


def test_evaluation(p3):
    ctx = Context(parse_scenario(HEADER + "object T = twist(P(1), P(1))\nobject Z = zero\n"))
    p1 = projective(ctx.algebra, "1")
    assert is_isomorphic(ctx.object("T"), shift(p1, -1)).isomorphic
    assert ctx.object("Z").is_zero


@pytest.mark.parametrize("text,line,col", [
    (HEADER + "object X = P(1) + Q\n", 5, 19),
    (HEADER + "object X = P(9)\n", 5, 14),
    (HEADER + "object X = cone(f)\n", 5, 17),
    (HEADER + "frob X\n", 5, 1),
    (HEADER + "object X = P(1)\nobject X = P(2)\n", 6, 8),
    ("field QQ\ncy 1\n", 2, 4),
    ("field GF(100)\n", 1, 10),
    (HEADER + "object X = P(1) P(2)\n", 5, 17),
])
def test_errors_are_positional(text, line, col):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert (info.value.line, info.value.col) == (line, col), str(info.value)
    assert str(info.value).startswith(f"{line}:{col}: ")


def test_map_degree_checked():
    text = HEADER + "map f: P(1) -> P(2) = a12\n"
    with pytest.raises((ScenarioError, ValueError)):
        Context(parse_scenario(text)).map("f")


atoms = st.sampled_from(["P(1)", "P(2)", "P(3)", "zero", "X0"])


def exprs(depth=2):
    if depth == 0:
        return atoms
    sub = exprs(depth - 1)
    return st.one_of(
        atoms,
        st.builds(lambda a, n: f"{a}[{n}]", sub, st.integers(-3, 3)),
        st.builds(lambda a, b: f"{a} + {b}", sub, sub),
        st.builds(lambda a, b: f"twist({a}, {b})", sub, sub),
        st.builds(lambda a, b: f"twist_inv({a}, {b})", sub, sub),
        st.builds(lambda a, s: f"scramble({a}, {s})", sub, st.integers(0, 99)),
        st.builds(lambda a: f"({a})", sub),
    )


@given(body=st.lists(exprs(), min_size=1, max_size=5))
def test_random_scenario_round_trip(body):
    lines = ["object X0 = P(1)"] + [f"object Y{i} = {e}" for i, e in enumerate(body)]
    lines.append("expect ext X0 Y0 = {0:1}")
    sc = parse_scenario(HEADER + "\n".join(lines) + "\n")
    assert parse_scenario(sc.render()) == sc

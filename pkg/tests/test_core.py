import pytest
from hypothesis import given, settings, strategies as st

from wordeq.benchgen import gen_problem, problem_seed
from wordeq.terms import (
    Eq, Formula, ParseError, SymbolTable, apply_substitution, check_witness,
    format_formula, is_linear, parse_problem, serialize_problem,
)


def build(text):
    return parse_problem(text)


def test_parse_basic():
    f = build("Variables {X}\nTerminals {a,b}\nEquation: X a = a X\n")
    assert len(f.equations) == 1
    eq = f.equations[0]
    x = f.table.lookup("X")
    a = f.table.lookup("a")
    assert eq.lhs == (x, a)
    assert eq.rhs == (a, x)
    assert f.table.variable_names == ("X",)
    assert f.table.letter_names == ("a", "b")


def test_parse_empty_equation():
    f = build("Variables {}\nTerminals {a}\nEquation: =\n")
    assert f.equations[0].lhs == ()
    assert f.equations[0].rhs == ()


def test_parse_empty_side():
    f = build("Variables {X}\nTerminals {a}\nEquation:  = a X\n")
    eq = f.equations[0]
    assert eq.lhs == ()
    assert eq.rhs == (f.table.lookup("a"), f.table.lookup("X"))


def test_parse_comments_skipped():
    f = build("# header\nVariables {X}\n# mid\nTerminals {a}\nEquation: X = a\n")
    assert len(f.equations) == 1


def test_parse_undeclared_symbol():
    with pytest.raises(ParseError) as exc:
        build("Variables {X}\nTerminals {a}\nEquation: X = b\n")
    assert "b" in str(exc.value)
    assert exc.value.line == 3


def test_parse_duplicate_declaration():
    with pytest.raises(ParseError):
        build("Variables {X,X}\nTerminals {a}\nEquation: X = a\n")
    with pytest.raises(ParseError):
        build("Variables {X}\nTerminals {a,X}\nEquation: X = a\n")


def test_parse_syntax_errors():
    with pytest.raises(ParseError):
        build("Variables {X}\nTerminals {a}\nEquation: X a\n")   # no separator
    with pytest.raises(ParseError):
        build("Variables {X}\nTerminals {a}\n")                  # no equations
    with pytest.raises(ParseError):
        build("Variables X\nTerminals {a}\nEquation: X = a\n")   # no braces


def test_serialize_canonical():
    text = "Variables {X,Y}\nTerminals {a,b}\nEquation: X a = a X\nEquation:  = a Y\n"
    assert serialize_problem(parse_problem(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_roundtrip_generated(seed):
    f = gen_problem("a1", problem_seed(7, seed))
    assert parse_problem(serialize_problem(f)) == f


def test_apply_substitution_example():
    # (Xb = bXX /\ X = a), {X -> a} -> (ab = baa /\ a = a)
    f = build("Variables {X}\nTerminals {a,b}\nEquation: X b = b X X\nEquation: X = a\n")
    x = f.table.lookup("X")
    a = f.table.lookup("a")
    b = f.table.lookup("b")
    g = apply_substitution(f, {x: (a,)})
    assert g.equations[0].lhs == (a, b)
    assert g.equations[0].rhs == (b, a, a)
    assert g.equations[1].lhs == (a,)
    assert g.equations[1].rhs == (a,)
    assert [e.token for e in g.equations] == [0, 1]


def test_apply_substitution_identity_and_epsilon():
    f = build("Variables {X,Y}\nTerminals {a}\nEquation: X Y = Y X\n")
    assert apply_substitution(f, {}) is f
    x = f.table.lookup("X")
    g = apply_substitution(f, {x: ()})
    y = f.table.lookup("Y")
    assert g.equations[0].lhs == (y,)
    assert g.equations[0].rhs == (y,)


def test_substitution_homomorphic():
    f = build("Variables {X,Y}\nTerminals {a,b}\nEquation: X a Y = Y b X\nEquation: X = Y\n")
    x, y, a = f.table.lookup("X"), f.table.lookup("Y"), f.table.lookup("a")
    sub = {x: (a, y), y: ()}
    g = apply_substitution(f, sub)
    for before, after in zip(f.equations, g.equations):
        from wordeq.terms import subst_word
        assert after.lhs == subst_word(before.lhs, sub)
        assert after.rhs == subst_word(before.rhs, sub)


def test_check_witness_basic():
    f = build("Variables {X}\nTerminals {a}\nEquation: X a = a X\n")
    x = f.table.lookup("X")
    assert check_witness(f, {x: ()}) is True


def test_check_witness_conflicting_conjuncts():
    f = build("Variables {X}\nTerminals {a,b}\nEquation: X = a\nEquation: X = b\n")
    x, a, b = f.table.lookup("X"), f.table.lookup("a"), f.table.lookup("b")
    for word in [(), (a,), (b,), (a, b)]:
        assert check_witness(f, {x: word}) is False


def test_check_witness_worked_example():
    # (XaX = Y /\ aaa = XaY) with {X -> a, Y -> aaa}: first conjunct holds
    # (aaa vs aaa), second fails (aaa vs a a aaa) -> False.
    f = build("Variables {X,Y}\nTerminals {a}\nEquation: X a X = Y\nEquation: a a a = X a Y\n")
    x, y, a = f.table.lookup("X"), f.table.lookup("Y"), f.table.lookup("a")
    assert check_witness(f, {x: (a,), y: (a, a, a)}) is False


def test_check_witness_errors():
    f = build("Variables {X,Y}\nTerminals {a}\nEquation: X = Y\n")
    x, y = f.table.lookup("X"), f.table.lookup("Y")
    with pytest.raises(ValueError):
        check_witness(f, {x: ()})          # Y unmapped
    with pytest.raises(ValueError):
        check_witness(f, {x: (y,), y: ()})  # maps to a word with variables


def test_check_witness_matches_naive():
    f = build("Variables {X,Y}\nTerminals {a,b}\nEquation: X a = a Y\n")
    x, y, a, b = (f.table.lookup(s) for s in "XYab")
    for wx in [(), (a,), (b,), (a, a)]:
        for wy in [(), (a,), (b,), (a, a)]:
            sub = {x: wx, y: wy}
            naive = all(
                tuple(t for s in eq.lhs for t in (sub[s] if s < 0 else (s,)))
                == tuple(t for s in eq.rhs for t in (sub[s] if s < 0 else (s,)))
                for eq in f.equations
            )
            assert check_witness(f, sub) == naive


def test_is_linear():
    f = build("Variables {X,Y}\nTerminals {a,b}\nEquation: X a Y = b\n"
              "Equation: X b = b X X\nEquation: =\n")
    assert is_linear(f.equations[0]) is True
    assert is_linear(f.equations[1]) is False
    assert is_linear(f.equations[2]) is True


def test_eq_precomputed_fields():
    table = SymbolTable()
    x = table.add_variable("X")
    a = table.add_letter("a")
    eq = Eq((x, a), (a, x), token=3)
    assert eq.length == 4
    assert eq.token == 3
    assert not eq.sides_equal
    assert not eq.trivially_unsat
    assert Eq((a,), (a,)).sides_equal
    assert Eq((a,), ()).trivially_unsat
    assert Eq((a,), (a, a)).trivially_unsat      # ground, unequal
    assert not Eq((x,), ()).trivially_unsat      # empty vs all-variable side

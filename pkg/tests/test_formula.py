import pytest
from hypothesis import given, strategies as st

from mathcontrast.errors import MergeError, ParseError
from mathcontrast.formula import (
    ALIGNED_ALPHABET_RE,
    Chain,
    align_variables,
    find_chains,
    merge_steps,
    parse_expression,
    to_text,
)


def _paren_balance(s: str) -> int:
    return s.count("(") - s.count(")")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_parse_letter_product_chain():
    node = parse_expression("A*(B+C+D)*B")
    # left-associative: (A * (B+C+D)) * B
    assert node.kind == "binary" and node.op == "*"
    assert node.children[1].text == "B"
    inner = node.children[0]
    assert inner.op == "*" and inner.children[0].text == "A"
    group = inner.children[1]
    assert group.op == "+" and group.children[1].text == "D"


def test_parse_single_number():
    node = parse_expression("42")
    assert node.kind == "number" and node.value() == 42.0


def test_parse_parenthesized_difference_times_number():
    node = parse_expression("(51.0-8.0)*130.0")
    assert node.op == "*"
    assert node.children[0].op == "-"
    assert node.children[1].value() == 130.0


def test_parse_strips_currency_and_thousands_separators():
    assert parse_expression("$5,590.0").value() == 5590.0
    node = parse_expression(r"\$23 - \$15")
    assert node.op == "-" and node.children[0].value() == 23.0


def test_parse_unary_minus():
    node = parse_expression("-5 + 3")
    assert node.op == "+" and node.children[0].kind == "neg"


@pytest.mark.parametrize(
    "bad", ["", "   ", "(1+2", "1+", "*3", "1 ? 2", "()", "1+2)"]
)
def test_parse_errors_carry_positions(bad):
    with pytest.raises(ParseError) as exc_info:
        parse_expression(bad)
    assert exc_info.value.position >= 0


def _exprs():
    atom = st.sampled_from(["42", "3.5", "x", "A", "130.0", "0.25", "price"])
    return st.recursive(
        atom,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from("+-*/"), inner).map("".join),
            inner.map(lambda s: f"({s})"),
            inner.map(lambda s: f"-{s}"),
        ),
        max_leaves=12,
    )


@given(_exprs())
def test_roundtrip_print_then_reparse(raw):
    tree = parse_expression(raw)
    assert parse_expression(to_text(tree)) == tree


# ---------------------------------------------------------------------------
# Alignment
# ---------------------------------------------------------------------------


def test_align_letter_product():
    assert align_variables("A*(B+C+D)*B").text == "@*(@+@+@)*@"


def test_align_placeholder_is_fixed_point():
    assert align_variables("@").text == "@"


def test_align_parenthesized_difference():
    got = align_variables("(51.0-8.0)*130.0")
    assert got.text == "(@-@)*@"
    assert got.token_count == 3
    assert got.origin == "(51.0-8.0)*130.0"


def test_align_accepts_parsed_node():
    assert align_variables(parse_expression("1+2*3")).text == "@+@*@"


@given(_exprs())
def test_align_idempotent(raw):
    once = align_variables(raw)
    assert align_variables(once.text).text == once.text


@given(_exprs())
def test_align_erases_all_content(raw):
    assert ALIGNED_ALPHABET_RE.match(align_variables(raw).text)


@given(_exprs())
def test_align_preserves_paren_balance(raw):
    assert _paren_balance(align_variables(raw).text) == _paren_balance(raw)


# ---------------------------------------------------------------------------
# Merging
# ---------------------------------------------------------------------------


def test_merge_single_step_reduces_to_alignment():
    assert merge_steps(["(51.0-8.0)*130.0"]).text == "(@-@)*@"


def test_merge_joins_steps_with_semicolon():
    merged = merge_steps(["32+42", "74-35"])
    assert merged.text == "@+@;@-@"
    assert merged.origin == "32+42;74-35"
    assert merged.token_count == 4


def test_merge_empty_list_fails():
    with pytest.raises(MergeError):
        merge_steps([])


def test_merge_drops_unparseable_steps(caplog):
    with caplog.at_level("WARNING"):
        merged = merge_steps(["32+42", "not ?? math", "74-35"])
    assert merged.text == "@+@;@-@"
    assert "1 unparseable" in caplog.text


def test_merge_all_unparseable_fails():
    with pytest.raises(MergeError):
        merge_steps(["??", "!!"])


def test_merged_text_realigns_to_itself():
    merged = merge_steps(["32+42", "74-35"])
    assert align_variables(merged.origin).text == merged.text


# ---------------------------------------------------------------------------
# Chains in prose
# ---------------------------------------------------------------------------


def test_chains_in_worked_solution():
    text = (
        "Leah had 32 chocolates and Leah's sister had 42. That means there "
        "were originally 32 + 42 = 74 chocolates. 35 have been eaten. So in "
        "total they still have 74 - 35 = 39 chocolates. The answer is 39."
    )
    assert find_chains(text) == [
        Chain("32 + 42", 74.0),
        Chain("74 - 35", 39.0),
    ]


def test_chain_key_value_mapping_keeps_right_side():
    assert find_chains("total = 32 + 42") == [Chain("32 + 42", None)]


def test_chain_full_equation_keeps_first_expression():
    assert find_chains("x = 74 - 35 = 39") == [Chain("74 - 35", 39.0)]


def test_chain_bare_expression_line():
    assert find_chains("(51.0 - 8.0) * 130.0") == [
        Chain("(51.0 - 8.0) * 130.0", None)
    ]


def test_chain_ignores_lone_numbers_and_prose():
    assert find_chains("In 1945, 100 people left. No math here.") == []


def test_chain_three_part_equation():
    chains = find_chains("So, there are 200 * (1 - 2/5) = 200 * (3/5) = 120 boys")
    assert chains == [Chain("200 * (1 - 2/5)", 120.0)]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaycert.errors import ExpressionSyntaxError
from delaycert.expr import Binary, Const, Unary, Var, evaluate, parse_expression, to_text

# (expression, sigma, value); values produced with Python's own evaluator
# (math module, '^' rewritten as '**') when the table was authored.
REFERENCE = [
    ('abs(1.65)', 0.331, 1.65),
    ('abs(abs(tanh(sigma)))', 0.523, 0.480012099874386),
    ('tanh((2.59)/(0.44))', 0.241, 0.9999845760306025),
    ('tanh(-(abs(1.9)))', 0.722, -0.9562374581277391),
    ('-(((sigma)+(sigma))^3)', 1.501, -27.054036007999994),
    ('abs(1.31)', -1.392, 1.31),
    ('abs((-(sigma))/((2.54)^3))', 0.788, 0.048086710346649034),
    ('2.22', 0.589, 2.22),
    ('(-(cos(sigma)))+(sin(0.82))', 1.667, 0.827201175069736),
    ('cos(((0.91)*(2.08))-(sigma))', 0.634, 0.3069591963258484),
    ('sigma', -0.949, -0.949),
    ('1.31', 0.439, 1.31),
    ('sigma', -1.56, -1.56),
    ('tanh(0.39)', 0.455, 0.3713602278765077),
    ('0.7', -1.406, 0.7),
    ('-(cos((sigma)^2))', -1.591, 0.819469441842584),
    ('exp(tanh((sigma)*(sigma)))', 0.785, 1.7306450283287562),
    ('-(sigma)', 0.166, -0.166),
    ('((exp(sigma))-(sigma))+((tanh(2.87))*(-(sigma)))', -0.12, 1.126151364719344),
    ('((2.74)+(cos(sigma)))^3', 1.556, 20.905869272162292),
    ('(sigma)/((sigma)+(sigma))', -1.415, 0.5),
    ('(-(abs(sigma)))+(((sigma)+(0.83))-(-(sigma)))', -1.756, -4.438),
    ('sigma', 1.04, 1.04),
    ('(((sigma)/(sigma))*((0.69)-(1.31)))^3', -0.736, -0.23832800000000012),
    ('(sigma)^2', 1.758, 3.090564),
    ('-(cos(2.86))', 1.54, 0.9606140808009522),
    ('sigma', -1.354, -1.354),
    ('(sin(1.16))/(sin(abs(sigma)))', 1.887, 0.9646266223292195),
    ('sigma', 1.624, 1.624),
    ('2.29', 1.398, 2.29),
    ('(((1.05)^2)-(abs(1.94)))+(sin((sigma)^3))', 1.707, -1.80349001607741),
    ('tanh((exp(0.69))*(cos(sigma)))', -0.918, 0.8369801176599231),
    ('(sigma)-(cos(2.47))', 0.626, 1.4088316566380654),
    ('(-(sigma))-(-(sigma))', 0.502, 0.0),
    ('(2.03)^0.5', 0.682, 1.4247806848775006),
    ('sin(0.64)', -0.217, 0.5971954413623921),
    ('((2.9)-(cos(0.34)))-(sigma)', -0.943, 2.900245334471654),
    ('sigma', -0.424, -0.424),
    ('(sigma)/((tanh(sigma))/((sigma)+(sigma)))', 1.192, 3.4188335409871784),
    ('(abs(sigma))/(((2.07)*(sigma))+(cos(sigma)))', 1.385, 0.4538484889989674),
    ('sigma', 0.959, 0.959),
    ('(((sigma)-(sigma))^3)^3', 0.606, 0.0),
    ('(1.5)*(exp(tanh(0.93)))', -0.135, 3.114470033957634),
    ('sigma', -0.753, -0.753),
    ('1.47', -0.164, 1.47),
    ('(exp((sigma)-(2.27)))*(sigma)', -0.882, -0.03772006028571886),
    ('1.16', 1.591, 1.16),
    ('abs(((1.31)*(0.45))+(-(sigma)))', 0.852, 0.26249999999999996),
    ('sin(sigma)', -1.694, -0.99242002286681),
    ('(abs(exp(0.82)))/(sin((sigma)^3))', 1.654, -2.311010535375437),
]


@pytest.mark.parametrize("text,sigma,value", REFERENCE)
def test_reference_table(text, sigma, value):
    got = float(evaluate(parse_expression(text), sigma=sigma))
    assert got == pytest.approx(value, rel=1e-14, abs=1e-15)


def test_goodwin_expression():
    tree = parse_expression("1/(1+abs(sigma)^3)")
    assert float(evaluate(tree, sigma=1.0)) == 0.5
    assert float(evaluate(parse_expression("sigma"), sigma=2.5)) == 2.5


def test_syntax_error_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("1+")
    assert info.value.offset == 2
    assert "offset 2" in str(info.value)


@pytest.mark.parametrize("text", ["", "(", "sigma sigma", "foo(1)", "1 2", "sin 1", "2*", "x"])
def test_rejects_malformed(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


def test_precedence_and_associativity():
    ev = lambda s: float(evaluate(parse_expression(s), sigma=0.0))
    assert ev("2^3^2") == 512.0
    assert ev("8/4/2") == 1.0
    assert ev("1-2-3") == -4.0
    assert ev("2+3*4") == 14.0
    assert ev("-2^2") == 4.0  # '-' binds to the base
    assert ev("1e-3*1000") == pytest.approx(1.0)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        evaluate(parse_expression("1/sigma"), sigma=0.0)


def test_vectorised_evaluation():
    s = np.linspace(-2, 2, 9)
    got = evaluate(parse_expression("tanh(sigma)*2"), sigma=s)
    assert np.allclose(got, 2 * np.tanh(s))


_leaf = st.one_of(
    st.floats(0, 10, allow_nan=False).map(lambda v: Const(round(v, 6))),
    st.just(Var("sigma")))


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from(["neg", "abs", "exp", "sin", "cos", "tanh"]), children)
        .map(lambda t: Unary(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children)
        .map(lambda t: Binary(*t)))


trees = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_print_parse_roundtrip(tree):
    text = to_text(tree)
    again = parse_expression(text)
    assert again == tree
    assert to_text(again) == text


@settings(max_examples=200, deadline=None)
@given(trees, st.floats(-3, 3))
def test_evaluation_total_or_zero_division(tree, sigma):
    with np.errstate(all="ignore"):
        try:
            val = evaluate(tree, sigma=sigma)
        except ZeroDivisionError:
            return
    assert np.ndim(val) == 0 or np.size(val) == 1
    assert not isinstance(val, str)
    assert math.isnan(float(val)) or isinstance(float(val), float)

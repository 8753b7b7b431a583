from eia import terms as T
from eia.model import ModelView, detect_counterexample

x, y = T.Var("x"), T.Var("y")


def test_detects_unfaithful_value():
    e = T.exp(x, y)
    m = ModelView({"x": 3, "y": 9}, {e: 20000})
    assert detect_counterexample([e], m) == [e]
    assert detect_counterexample([e], ModelView({"x": 3, "y": -9}, {e: 19683})) == []


def test_nested_applications_use_model_values():
    inner = T.exp(y, y)
    outer = T.exp(x, inner)
    # inner is wrong (2^2 = 4, model says 3); outer is faithful to the model's 3
    m = ModelView({"x": 2, "y": 2}, {inner: 3, outer: 8})
    assert detect_counterexample([inner, outer], m) == [inner]
    assert m.value(T.add(outer, 1)) == 9


def test_zero_and_sign_conventions():
    e = T.exp(x, y)
    assert detect_counterexample([e], ModelView({"x": 0, "y": 0}, {e: 1})) == []
    assert detect_counterexample([e], ModelView({"x": -2, "y": -3}, {e: -8})) == []
    assert detect_counterexample([e], ModelView({"x": -2, "y": -3}, {e: 8})) == [e]


def test_satisfies_with_uninterpreted_exp():
    e = T.exp(x, 2)
    m = ModelView({"x": 3}, {e: 10})
    assert m.satisfies(T.eq(e, 10))
    assert not T.eval_eia(T.eq(e, 10), {"x": 3})

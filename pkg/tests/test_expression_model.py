import math
import sys
import textwrap

import numpy as np
import pytest

from uqkit.expression import (
    ArityError,
    ExpressionSyntaxError,
    NonDifferentiableError,
    UnknownFunctionError,
    UnknownIdentifierError,
    parse_expression,
    symbolic_gradient,
    to_string,
)
from uqkit.flood import H_EXPRESSION, NAMES
from uqkit.model import Model, ModelEvaluationError, fd_gradient, fd_hessian
from uqkit.sample import Sample
from uqkit.wrapper import OutputAnchor, WrapperError, WrapperProtocol, run_wrapper

POINT = np.array([1335.0, 30.0, 50.167, 55.033])


def h_oracle(q, ks, zv, zm):
    # plain math module, independent of the parser
    return (q / (ks * 300.0 * math.sqrt((zm - zv) / 5000.0))) ** 0.6


# ---------------------------------------------------------------- parsing


def test_sum_and_product_examples():
    e = parse_expression("x0+x1+x2", ["x0", "x1", "x2"])
    assert e(1, 2, 3) == 6
    e = parse_expression("x0-x1*x2", ["x0", "x1", "x2"])
    assert e(1, 2, 3) == -5


def test_unary_minus_below_power():
    assert parse_expression("-2^2", [])() == -4
    assert parse_expression("2^3^2", [])() == 512
    assert parse_expression("(-2)^2", [])() == 4
    assert parse_expression("8/4/2", [])() == 1
    assert parse_expression("1-2-3", [])() == -4


def test_functions():
    e = parse_expression("max(x, 2) + min(x, 2) + abs(-x) + sqrt(4) + exp(0) + log(1) + tanh(0)", ["x"])
    assert e(5.0) == pytest.approx(5 + 2 + 5 + 2 + 1)


@pytest.mark.parametrize("text,exc", [
    ("x +", ExpressionSyntaxError),
    ("(x", ExpressionSyntaxError),
    ("y + 1", UnknownIdentifierError),
    ("foo(x)", UnknownFunctionError),
    ("sin(x, x)", ArityError),
    ("max(x)", ArityError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_expression(text, ["x"])


def test_syntax_error_has_position():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("x * * 2", ["x"])
    assert info.value.position is not None


def test_round_trip_on_random_points(rng):
    texts = [H_EXPRESSION, "-x0^2 + x1/(x2-x3)^3", "sin(x0)*cos(x1)-2^-x2", "max(x0, x1) - -x3", "(x0-x1)-(x2-x3)"]
    X = rng.uniform(1, 60, size=(100, 4))
    for text in texts:
        e = parse_expression(text, NAMES if text == H_EXPRESSION else ["x0", "x1", "x2", "x3"])
        again = parse_expression(to_string(e.ast), e.input_names)
        a, b = e.evaluate(X), again.evaluate(X)
        np.testing.assert_allclose(b, a, rtol=1e-12, equal_nan=True)


# ---------------------------------------------------------------- evaluation


def test_flood_height_value():
    m = Model.from_expressions(NAMES, [H_EXPRESSION], ["H"])
    assert m(POINT)[0] == pytest.approx(h_oracle(*POINT), rel=1e-12)
    assert h_oracle(*POINT) == pytest.approx(2.5485, abs=1e-4)


def test_zero_discharge_gives_zero_height():
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    assert m([0.0, 30.0, 50.0, 55.0])[0] == 0.0


def test_empty_batch():
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    out = m.evaluate(np.empty((0, 4)))
    assert isinstance(out, Sample) and out.shape == (0, 1)
    assert m.calls == 0


def test_counter_and_order(rng):
    m = Model.from_expressions(["a", "b"], ["a*b", "a-b"], threads=4)
    X = rng.random((257, 2))
    Y = m.evaluate(X)
    np.testing.assert_allclose(np.asarray(Y), np.column_stack([X[:, 0] * X[:, 1], X[:, 0] - X[:, 1]]))
    assert m.calls == 257


def test_concat_invariance(rng):
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    A = Sample(rng.uniform([500, 20, 49, 54], [2000, 40, 51, 56], (40, 4)), NAMES)
    B = Sample(rng.uniform([500, 20, 49, 54], [2000, 40, 51, 56], (17, 4)), NAMES)
    np.testing.assert_array_equal(np.asarray(m.evaluate(A.concat(B))),
                                  np.vstack([np.asarray(m.evaluate(A)), np.asarray(m.evaluate(B))]))


def test_threads_do_not_change_results(rng):
    X = rng.uniform([500, 20, 49, 54], [2000, 40, 51, 56], (1000, 4))
    one = Model.from_expressions(NAMES, [H_EXPRESSION]).evaluate(X)
    many = Model.from_expressions(NAMES, [H_EXPRESSION], threads=4).evaluate(X)
    np.testing.assert_array_equal(np.asarray(one), np.asarray(many))


def test_domain_error_reports_rows():
    m = Model.from_expressions(["x"], ["log(x)"])
    with pytest.raises(ModelEvaluationError) as info:
        m.evaluate(np.array([[1.0], [-1.0], [2.0], [-3.0]]))
    assert info.value.rows == [1, 3]


def test_native_callback_row_error():
    def f(x):
        if x[0] < 0:
            raise ValueError("negative")
        return x[0] ** 2

    m = Model.from_function(f, 1)
    with pytest.raises(ModelEvaluationError) as info:
        m.evaluate(np.array([[1.0], [2.0], [-1.0]]))
    assert info.value.rows == [2]


# ---------------------------------------------------------------- derivatives


def test_product_rule():
    e = parse_expression("x*sin(x)", ["x"])
    (d,) = symbolic_gradient(e)
    assert d(0.0) == 0.0
    for x in (0.3, 1.7, -2.2):
        assert d(x) == pytest.approx(math.sin(x) + x * math.cos(x), rel=1e-14)


def test_constant_derivative_is_zero():
    (d,) = symbolic_gradient(parse_expression("3.5", ["x"]))
    assert to_string(d.ast) in ("0", "0.0")


@pytest.mark.parametrize("text", ["abs(x)", "min(x, 1)", "max(x, 1)"])
def test_non_differentiable(text):
    with pytest.raises(NonDifferentiableError):
        symbolic_gradient(parse_expression(text, ["x"]))


def test_flood_dh_dq():
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    g = m.gradient(POINT)[0, 0]
    h = 1e-4 * POINT[0]
    oracle = (h_oracle(POINT[0] + h, *POINT[1:]) - h_oracle(POINT[0] - h, *POINT[1:])) / (2 * h)
    assert g == pytest.approx(oracle, rel=1e-7)
    assert g == pytest.approx(0.6 * h_oracle(*POINT) / POINT[0], rel=1e-12)
    assert g == pytest.approx(1.1454e-3, rel=1e-4)


def test_fd_square():
    m = Model.from_function(lambda x: x[0] ** 2, 1)
    assert fd_gradient(m, [3.0], 1e-5)[0, 0] == pytest.approx(6.0, abs=1e-8)


def test_fd_affine_exact():
    m = Model.from_function(lambda X: X @ np.array([2.0, -3.0, 0.5]) + 1.0, 3, vectorized=True)
    np.testing.assert_allclose(fd_gradient(m, [0.3, 1.2, -4.0]), [[2.0, -3.0, 0.5]], rtol=1e-9)
    np.testing.assert_allclose(fd_hessian(m, [0.3, 1.2, -4.0])[0], np.zeros((3, 3)), atol=1e-6)


def test_fd_hessian_bilinear():
    m = Model.from_function(lambda X: X[:, 0] * X[:, 1], 2, vectorized=True)
    for x in ([0.0, 0.0], [3.0, -7.0], [1e3, 2e-2]):
        np.testing.assert_allclose(fd_hessian(m, x)[0], [[0, 1], [1, 0]], atol=1e-6)


def test_fd_default_step():
    calls = []

    def f(X):
        calls.append(X.copy())
        return X[:, 0]

    m = Model.from_function(f, 1, vectorized=True)
    fd_gradient(m, [1000.0])
    np.testing.assert_allclose(np.sort(calls[0].ravel()), [1000.0 - 1e-2, 1000.0 + 1e-2])


def test_flood_fd_vs_symbolic():
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    np.testing.assert_allclose(fd_gradient(m, POINT), m.gradient(POINT), rtol=1e-6)


def test_flood_hessian_qq():
    m = Model.from_expressions(NAMES, [H_EXPRESSION])
    H = h_oracle(*POINT)
    expected = 0.6 * (0.6 - 1) * H / POINT[0] ** 2
    assert expected == pytest.approx(-3.43e-7, rel=2e-3)
    assert fd_hessian(m, POINT)[0, 0, 0] == pytest.approx(expected, rel=1e-4)
    assert m.hessian(POINT)[0, 0, 0] == pytest.approx(expected, rel=1e-12)


def _random_expression(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        return f"x{rng.integers(3)}" if rng.random() < 0.7 else f"{rng.uniform(0.5, 2):.3f}"
    kind = rng.integers(6)
    a = _random_expression(rng, depth - 1)
    if kind == 0:
        return f"({a} + {_random_expression(rng, depth - 1)})"
    if kind == 1:
        return f"({a} * {_random_expression(rng, depth - 1)})"
    if kind == 2:
        return f"({a} - {_random_expression(rng, depth - 1)})"
    if kind == 3:
        return f"sin({a})"
    if kind == 4:
        return f"exp(0.1*{a})"
    return f"sqrt(1 + ({a})^2)"


def test_symbolic_matches_fd_on_random_expressions():
    rng = np.random.default_rng(7)
    for _ in range(40):
        text = _random_expression(rng, 4)
        m = Model.from_expressions(["x0", "x1", "x2"], [text])
        for _ in range(5):
            x = rng.uniform(0.5, 2.0, 3)
            sym = m.gradient(x)[0]
            fd = fd_gradient(m, x)[0]
            scale = max(1.0, np.abs(sym).max())
            assert np.abs(sym - fd).max() <= 1e-5 * scale, text


# ---------------------------------------------------------------- wrapper


def test_template_substitution(tmp_path):
    tpl = tmp_path / "in.txt"
    tpl.write_text("Q=@Q@\nKs=@Ks@\n")
    proto = WrapperProtocol(tpl, ["Q", "Ks"], "true", [OutputAnchor(line=0)])
    text = proto.render([1000.0, 30.0])
    assert "Q=1000" in text and "Ks=30" in text
    assert proto.render([0.1, 1 / 3]).splitlines()[1] == "Ks=0.33333333333333331"


def test_missing_placeholder_rejected(tmp_path):
    tpl = tmp_path / "in.txt"
    tpl.write_text("Q=@Q@\n")
    with pytest.raises(ValueError):
        WrapperProtocol(tpl, ["Q", "Ks"], "true", [OutputAnchor(line=0)])


def test_echo_wrapper_is_identity(tmp_path):
    tpl = tmp_path / "in.txt"
    tpl.write_text("@a@ @b@\n")
    proto = WrapperProtocol(tpl, ["a", "b"], "cp in.txt output.txt",
                            [OutputAnchor(line=0, column=0), OutputAnchor(line=0, column=1)],
                            work_root=tmp_path / "runs")
    m = Model.from_wrapper(proto)
    X = np.array([[1.5, -2.25], [1e-300, 123456789.123]])
    np.testing.assert_array_equal(np.asarray(m.evaluate(X)), X)


def _flood_script(tmp_path):
    script = tmp_path / "flood.py"
    script.write_text(textwrap.dedent("""
        import math
        vals = {}
        for line in open("input.txt"):
            k, v = line.split("=")
            vals[k.strip()] = float(v)
        h = (vals["Q"] / (vals["Ks"] * 300.0 * math.sqrt((vals["Zm"] - vals["Zv"]) / 5000.0))) ** 0.6
        with open("output.txt", "w") as f:
            f.write("run ok\\n")
            f.write("H = %r\\n" % h)
    """))
    tpl = tmp_path / "input.txt"
    tpl.write_text("Q=@Q@\nKs=@Ks@\nZv=@Zv@\nZm=@Zm@\n")
    return script, tpl


def test_wrapper_matches_expression_backend(tmp_path, rng):
    script, tpl = _flood_script(tmp_path)
    proto = WrapperProtocol(tpl, NAMES, [sys.executable, str(script)],
                            [OutputAnchor(search="H =")], work_root=tmp_path / "runs")
    wrapped = Model.from_wrapper(proto, threads=2)
    expr = Model.from_expressions(NAMES, [H_EXPRESSION])
    X = rng.uniform([500, 20, 49, 54], [2000, 40, 51, 56], (6, 4))
    np.testing.assert_allclose(np.asarray(wrapped.evaluate(X)), np.asarray(expr.evaluate(X)), rtol=1e-12)
    assert wrapped.calls == 6
    # fresh directory per evaluation, removed on success
    assert not any((tmp_path / "runs").iterdir())


def test_wrapper_failure_keeps_directory(tmp_path):
    tpl = tmp_path / "in.txt"
    tpl.write_text("@a@\n")
    proto = WrapperProtocol(tpl, ["a"], "exit 3", [OutputAnchor(line=0)], work_root=tmp_path / "runs")
    with pytest.raises(WrapperError) as info:
        run_wrapper(proto, [1.0])
    assert info.value.workdir.exists()


def test_wrapper_anchor_not_found(tmp_path):
    tpl = tmp_path / "in.txt"
    tpl.write_text("@a@\n")
    proto = WrapperProtocol(tpl, ["a"], "cp in.txt output.txt", [OutputAnchor(search="missing")],
                            work_root=tmp_path / "runs")
    with pytest.raises(WrapperError):
        run_wrapper(proto, [1.0])
    m = Model.from_wrapper(proto)
    with pytest.raises(ModelEvaluationError) as info:
        m.evaluate([[1.0], [2.0]])
    assert info.value.rows == [0]

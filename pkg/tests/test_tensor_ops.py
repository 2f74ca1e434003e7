"""Primitive forward values, gradient correctness, and error contracts."""

import numpy as np
import pytest

from navgate.autodiff import (
    Tensor, apply_primitive, backward, concat, conv1d, layernorm, linear,
    matmul, mish, mse, no_grad, relu, reshape, slice_, softmax, transpose,
)
from navgate.errors import ShapeMismatchError, UnknownOpError

from helpers import fd_against_backward, random_tensor, scalarize


def conv1d_loop_oracle(x, w, b, stride=1, pad=0):
    """Brute-force sliding dot product, no vectorization."""
    B, Ci, L = x.shape
    Co, _, K = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    Lo = (L + 2 * pad - K) // stride + 1
    y = np.zeros((B, Co, Lo))
    for bi in range(B):
        for co in range(Co):
            for lo in range(Lo):
                acc = b[co]
                for ci in range(Ci):
                    for k in range(K):
                        acc += w[co, ci, k] * xp[bi, ci, lo * stride + k]
                y[bi, co, lo] = acc
    return y


# ---------------------------------------------------------------------------
# forward values
# ---------------------------------------------------------------------------

def test_matmul_identity():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    out = matmul(a, Tensor(np.eye(2)))
    assert np.array_equal(out.data, [[1.0, 2.0], [3.0, 4.0]])


def test_relu_definition():
    out = relu(Tensor([-1.0, 0.0, 2.0]))
    assert np.array_equal(out.data, [0.0, 0.0, 2.0])


def test_conv1d_hand_computed():
    x = Tensor(np.array([[[1.0, 2.0, 3.0, 4.0]]]))
    w = Tensor(np.array([[[1.0, 1.0]]]))
    b = Tensor(np.zeros(1))
    out = conv1d(x, w, b, stride=1, padding=0)
    assert np.array_equal(out.data, [[[3.0, 5.0, 7.0]]])


@pytest.mark.parametrize("stride,pad", [(1, 0), (1, 1), (2, 1), (3, 2)])
def test_conv1d_matches_loop_oracle(stride, pad):
    rng = np.random.default_rng(11)
    x = rng.standard_normal((3, 4, 9))
    w = rng.standard_normal((5, 4, 3))
    b = rng.standard_normal(5)
    got = conv1d(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=pad)
    want = conv1d_loop_oracle(x, w, b, stride=stride, pad=pad)
    assert np.allclose(got.data, want, atol=1e-12)


def test_zero_weight_conv_is_exact_zero():
    rng = np.random.default_rng(3)
    x = Tensor(rng.standard_normal((2, 6, 8)))
    w = Tensor(np.zeros((6, 6, 1)))
    b = Tensor(np.zeros(6))
    out = conv1d(x, w, b)
    assert np.all(out.data == 0.0)
    assert not np.any(np.signbit(out.data))  # +0.0 exactly, so y + out == y bitwise


def test_zero_weight_linear_is_exact_zero():
    rng = np.random.default_rng(4)
    x = Tensor(rng.standard_normal((7, 5)))
    out = linear(x, Tensor(np.zeros((5, 3))), Tensor(np.zeros(3)))
    assert np.all(out.data == 0.0)
    assert not np.any(np.signbit(out.data))


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(5)
    out = softmax(Tensor(rng.standard_normal((4, 6))))
    assert np.allclose(out.data.sum(axis=-1), 1.0)


def test_mish_known_values():
    x = Tensor(np.array([0.0, 1.0, -1.0]))
    want = x.data * np.tanh(np.log1p(np.exp(x.data)))
    assert np.allclose(mish(x).data, want, atol=1e-15)


def test_forward_determinism():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((3, 8))
    w = rng.standard_normal((8, 4))
    b = rng.standard_normal(4)
    a = linear(Tensor(x), Tensor(w), Tensor(b)).data
    b2 = linear(Tensor(x), Tensor(w), Tensor(b)).data
    assert a.tobytes() == b2.tobytes()


# ---------------------------------------------------------------------------
# gradients vs central finite differences (the per-primitive invariant)
# ---------------------------------------------------------------------------

CASES = {}


def case(name):
    def reg(fn):
        CASES[name] = fn
        return fn
    return reg


@case("add-broadcast")
def _build_add(rng):
    a, b = random_tensor(rng, (2, 3, 4)), random_tensor(rng, (3, 1))
    tgt = Tensor(rng.standard_normal((2, 3, 4)))
    return [a, b], lambda ts: scalarize(apply_primitive("add", ts), tgt)


@case("scalar-mul")
def _build_smul(rng):
    a = random_tensor(rng, (5, 2))
    tgt = Tensor(rng.standard_normal((5, 2)))
    return [a], lambda ts: scalarize(apply_primitive("scalar-mul", ts, {"scalar": -1.7}), tgt)


@case("element-mul-broadcast")
def _build_emul(rng):
    a, b = random_tensor(rng, (2, 4, 3)), random_tensor(rng, (4, 3))
    tgt = Tensor(rng.standard_normal((2, 4, 3)))
    return [a, b], lambda ts: scalarize(apply_primitive("element-mul", ts), tgt)


@case("matmul-batched")
def _build_matmul(rng):
    a, b = random_tensor(rng, (2, 3, 4, 5)), random_tensor(rng, (5, 6))
    tgt = Tensor(rng.standard_normal((2, 3, 4, 6)))
    return [a, b], lambda ts: scalarize(matmul(*ts), tgt)


@case("matmul-transposed")
def _build_matmul_t(rng):
    a, b = random_tensor(rng, (3, 4, 2)), random_tensor(rng, (3, 4, 6))
    tgt = Tensor(rng.standard_normal((3, 2, 6)))
    return [a, b], lambda ts: scalarize(matmul(ts[0], ts[1], transpose_a=True), tgt)


@case("conv1d-strided")
def _build_conv(rng):
    x, w, b = random_tensor(rng, (2, 3, 8)), random_tensor(rng, (4, 3, 3)), random_tensor(rng, (4,))
    tgt = Tensor(rng.standard_normal((2, 4, 4)))
    return [x, w, b], lambda ts: scalarize(conv1d(ts[0], ts[1], ts[2], stride=2, padding=1), tgt)


@case("linear")
def _build_linear(rng):
    x, w, b = random_tensor(rng, (2, 3, 5)), random_tensor(rng, (5, 4)), random_tensor(rng, (4,))
    tgt = Tensor(rng.standard_normal((2, 3, 4)))
    return [x, w, b], lambda ts: scalarize(linear(*ts), tgt)


@case("relu")
def _build_relu(rng):
    x = random_tensor(rng, (4, 4, 2, 3))
    tgt = Tensor(rng.standard_normal((4, 4, 2, 3)))
    return [x], lambda ts: scalarize(relu(ts[0]), tgt)


@case("mish")
def _build_mish(rng):
    x = random_tensor(rng, (3, 7))
    tgt = Tensor(rng.standard_normal((3, 7)))
    return [x], lambda ts: scalarize(mish(ts[0]), tgt)


@case("layernorm")
def _build_ln(rng):
    x = random_tensor(rng, (2, 5, 6))
    g = Tensor(rng.standard_normal(6) * 0.5 + 1.0, requires_grad=True)
    b = random_tensor(rng, (6,))
    tgt = Tensor(rng.standard_normal((2, 5, 6)))
    return [x, g, b], lambda ts: scalarize(layernorm(*ts), tgt)


@case("layernorm-axis1")
def _build_ln_axis(rng):
    x = random_tensor(rng, (2, 5, 6))
    g = Tensor(rng.standard_normal(5) * 0.5 + 1.0, requires_grad=True)
    b = random_tensor(rng, (5,))
    tgt = Tensor(rng.standard_normal((2, 5, 6)))
    return [x, g, b], lambda ts: scalarize(layernorm(*ts, axis=1), tgt)


@case("concat")
def _build_concat(rng):
    a, b, c = (random_tensor(rng, (2, k, 3)) for k in (1, 2, 3))
    tgt = Tensor(rng.standard_normal((2, 6, 3)))
    return [a, b, c], lambda ts: scalarize(concat(ts, axis=1), tgt)


@case("slice")
def _build_slice(rng):
    x = random_tensor(rng, (4, 6, 5))
    key = (slice(1, 3), slice(None), slice(0, 5, 2))
    tgt = Tensor(rng.standard_normal((2, 6, 3)))
    return [x], lambda ts: scalarize(slice_(ts[0], key), tgt)


@case("mse")
def _build_mse(rng):
    a, b = random_tensor(rng, (3, 4)), random_tensor(rng, (3, 4))
    return [a, b], lambda ts: mse(*ts)


@case("softmax")
def _build_softmax(rng):
    x = random_tensor(rng, (2, 3, 5))
    tgt = Tensor(rng.standard_normal((2, 3, 5)))
    return [x], lambda ts: scalarize(softmax(ts[0]), tgt)


@case("reshape")
def _build_reshape(rng):
    x = random_tensor(rng, (2, 3, 4))
    tgt = Tensor(rng.standard_normal((6, 4)))
    return [x], lambda ts: scalarize(reshape(ts[0], (6, 4)), tgt)


@case("transpose")
def _build_transpose(rng):
    x = random_tensor(rng, (2, 3, 4, 2))
    tgt = Tensor(rng.standard_normal((2, 4, 2, 3)))
    return [x], lambda ts: scalarize(transpose(ts[0], (0, 2, 3, 1)), tgt)


@pytest.mark.parametrize("name", sorted(CASES))
def test_primitive_gradients_match_finite_differences(name):
    rng = np.random.default_rng(hash(name) % 2**32)
    tensors, build = CASES[name](rng)
    assert fd_against_backward(build, tensors) < 1e-5


# ---------------------------------------------------------------------------
# error contracts
# ---------------------------------------------------------------------------

def test_unknown_op_tag():
    with pytest.raises(UnknownOpError):
        apply_primitive("gelu", [Tensor([1.0])])


@pytest.mark.parametrize("kind,tensors,attrs", [
    ("matmul", [Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2)))], None),
    ("add", [Tensor(np.ones((2, 3))), Tensor(np.ones((4,)))], None),
    ("mse", [Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2)))], None),
    ("linear", [Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))), Tensor(np.ones(2))], None),
    ("conv1d", [Tensor(np.ones((1, 2, 3))), Tensor(np.ones((1, 2, 5))), Tensor(np.ones(1))], None),
    ("concat", [Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2)))], {"axis": 0}),
])
def test_shape_mismatch_names_operands(kind, tensors, attrs):
    with pytest.raises(ShapeMismatchError) as err:
        apply_primitive(kind, tensors, attrs)
    assert kind.split("-")[0] in str(err.value)


def test_no_grad_builds_no_graph():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with no_grad():
        y = relu(x)
    assert y._backward is None and y._inputs == ()

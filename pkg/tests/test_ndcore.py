import numpy as np
import pytest

from tabbench import ndcore as nd
from tabbench.ndcore import Tensor


def param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def test_matmul_identity_extended():
    a = Tensor(np.array([[1.0, 0, 0], [0, 1, 0]]))
    b = Tensor(np.array([[1.0, 0], [0, 1], [0, 0]]))
    np.testing.assert_array_equal((a @ b).data, np.eye(2))


def test_softmax_symmetric_pair():
    np.testing.assert_array_equal(nd.softmax(Tensor([0.0, 0.0])).data, [0.5, 0.5])


def test_cosine_orthogonal():
    assert nd.cosine_similarity(Tensor([1.0, 0.0]), Tensor([0.0, 1.0])).item() == 0.0


def test_backward_sum():
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    x.sum().backward()
    np.testing.assert_array_equal(x.grad, [1, 1, 1])


def test_backward_square():
    x = Tensor([1.0, 2.0], requires_grad=True)
    (x * x).sum().backward()
    np.testing.assert_array_equal(x.grad, [2, 4])


def test_backward_twice_rejected():
    x = Tensor([1.0, 2.0], requires_grad=True)
    loss = (x * x).sum()
    loss.backward()
    with pytest.raises(nd.GraphError):
        loss.backward()


def test_backward_non_scalar_rejected():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(nd.GraphError):
        (x * 2.0).backward()


def test_non_finite_rejected():
    with pytest.raises(nd.NonFiniteError):
        Tensor([np.nan])
    with pytest.raises(nd.NonFiniteError):
        nd.log(Tensor([0.0, 1.0]))
    with pytest.raises(nd.NonFiniteError):
        nd.exp(Tensor([1000.0]))


def test_shape_mismatch():
    with pytest.raises(nd.ShapeError):
        Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))
    with pytest.raises(nd.ShapeError):
        Tensor(np.ones((2, 3))) + Tensor(np.ones((4,)))


def test_no_grad_records_nothing():
    x = Tensor([1.0], requires_grad=True)
    with nd.no_grad():
        y = x * 3.0
    assert y.is_leaf and not y.requires_grad


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(0)
    s = nd.softmax(Tensor(rng.normal(scale=30, size=(50, 7)))).data
    np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-12)


def test_cross_entropy_decreases_as_correct_logit_grows():
    vals = []
    for z in np.linspace(0, 20, 30):
        vals.append(nd.cross_entropy(Tensor([[z, 0.0, 0.0]]), np.array([0])).item())
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_cross_entropy_label_range():
    with pytest.raises(ValueError):
        nd.cross_entropy(Tensor(np.zeros((2, 2))), np.array([0, 2]))


def _mlp_loss_case(seed):
    rng = np.random.default_rng(seed)
    widths = [4, 6, 5, 5, 4, 3]
    mlp = nd.MLP(widths, rng)
    # random biases keep pre-activations off the ReLU kink at exactly 0
    for layer in mlp.layers:
        layer.bias.data = rng.normal(scale=0.1, size=layer.bias.shape)
    x = Tensor(rng.normal(size=(7, 4)))
    y = rng.integers(0, 3, size=7)
    return mlp, (lambda: nd.cross_entropy(mlp(x), y))


@pytest.mark.parametrize("seed", range(5))
def test_five_layer_mlp_matches_finite_differences(seed):
    mlp, fn = _mlp_loss_case(seed)
    assert nd.check_gradients(fn, mlp.parameters(), step=1e-5) < 1e-4


def weighted(rng, shape, op):
    w = Tensor(rng.normal(size=shape))
    return lambda *args: (op(*args) * w).sum()


PRIMITIVE_CASES = {
    "add_broadcast": lambda r: ([param(r, 3, 4), param(r, 4)], lambda a, b: (a + b).sum()),
    "sub": lambda r: ([param(r, 3, 4), param(r, 3, 1)], lambda a, b: ((a - b) * (a - b)).sum()),
    "mul": lambda r: ([param(r, 2, 3), param(r, 2, 3)], lambda a, b: (a * b).sum()),
    "div": lambda r: (
        [param(r, 2, 3), Tensor(r.uniform(1, 2, (2, 3)), requires_grad=True)],
        lambda a, b: (a / b).sum(),
    ),
    "matmul_batched": lambda r: ([param(r, 2, 3, 4), param(r, 4, 5)], lambda a, b: (a @ b).sum()),
    "relu": lambda r: ([param(r, 5, 3)], lambda a: (nd.relu(a) * a).sum()),
    "exp": lambda r: ([param(r, 3, 3)], lambda a: nd.exp(a).mean()),
    "log": lambda r: ([Tensor(r.uniform(0.5, 2, (3, 3)), requires_grad=True)], lambda a: nd.log(a).sum()),
    "sqrt": lambda r: ([Tensor(r.uniform(0.5, 2, (4,)), requires_grad=True)], lambda a: nd.sqrt(a).sum()),
    "pow": lambda r: ([Tensor(r.uniform(0.5, 2, (4,)), requires_grad=True)], lambda a: (a**1.5).sum()),
    "softmax": lambda r: ([param(r, 3, 5)], weighted(r, (3, 5), nd.softmax)),
    "log_softmax": lambda r: ([param(r, 3, 5)], weighted(r, (3, 5), nd.log_softmax)),
    "sum_axis": lambda r: ([param(r, 3, 4, 2)], lambda a: (nd.sum_(a, axis=1) ** 2).sum()),
    "mean_keepdims": lambda r: ([param(r, 3, 4)], lambda a: (a - a.mean(axis=0, keepdims=True)).__pow__(2).sum()),
    "l2_norm": lambda r: ([param(r, 4, 3)], lambda a: nd.l2_norm(a, axis=-1).sum()),
    "cosine": lambda r: ([param(r, 4, 3), param(r, 4, 3)], lambda a, b: nd.cosine_similarity(a, b).sum()),
    "pairwise_cosine": lambda r: ([param(r, 4, 3)], lambda a: (nd.pairwise_cosine(a) ** 2).sum()),
    "reshape_transpose": lambda r: (
        [param(r, 2, 3, 4)],
        weighted(r, (4, 6), lambda a: a.reshape(6, 4).transpose()),
    ),
    "concatenate": lambda r: (
        [param(r, 2, 3), param(r, 1, 3)],
        lambda a, b: (nd.concatenate([a, b], axis=0) ** 2).sum(),
    ),
    "slice": lambda r: ([param(r, 4, 5)], lambda a: (a[1:3, ::2] ** 2).sum() + a[np.array([0, 0, 3])].sum()),
    "mse": lambda r: ([param(r, 3, 2)], lambda a: nd.mse(a, Tensor(np.ones((3, 2))))),
    "cross_entropy": lambda r: ([param(r, 5, 3)], lambda a: nd.cross_entropy(a, np.array([0, 1, 2, 1, 0]))),
    "layer_norm": lambda r: (
        [param(r, 3, 4), param(r, 4), param(r, 4)],
        weighted(r, (3, 4), nd.layer_norm),
    ),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVE_CASES))
@pytest.mark.parametrize("seed", range(3))
def test_primitive_gradients(name, seed):
    rng = np.random.default_rng(seed)
    params, fn = PRIMITIVE_CASES[name](rng)
    assert nd.check_gradients(lambda: fn(*params), params) < 1e-4


def test_adam_zero_gradients_leave_params():
    p = Tensor([1.0, -2.0], requires_grad=True)
    opt = nd.Adam([p])
    p.grad = np.zeros(2)
    opt.step()
    np.testing.assert_array_equal(p.data, [1.0, -2.0])
    np.testing.assert_array_equal(opt.state.m[0], 0)
    assert opt.state.step == 1


def test_adam_first_step_is_lr():
    p = Tensor([0.5], requires_grad=True)
    opt = nd.Adam([p], lr=0.001)
    p.grad = np.array([1.0])
    opt.step()
    # m_hat = 1, v_hat = 1 -> delta = lr * 1 / (1 + 1e-8)
    np.testing.assert_allclose(p.data, [0.5 - 0.001 / (1 + 1e-8)], rtol=0, atol=1e-15)


def test_adam_constant_positive_gradient_decreases():
    p = Tensor([0.0], requires_grad=True)
    opt = nd.Adam([p])
    seen = []
    for _ in range(200):
        p.grad = np.array([0.3])
        opt.step()
        seen.append(p.data[0])
    assert all(a > b for a, b in zip(seen, seen[1:]))
    assert opt.state.step == 200


def test_adam_missing_gradient():
    p = Tensor([0.0], requires_grad=True)
    with pytest.raises(ValueError):
        nd.Adam([p]).step()


def test_state_dict_roundtrip():
    rng = np.random.default_rng(1)
    mlp = nd.MLP([3, 4, 2], rng)
    saved = mlp.state_dict()
    mlp.layers[0].weight.data = mlp.layers[0].weight.data + 1
    mlp.load_state_dict(saved)
    np.testing.assert_array_equal(mlp.layers[0].weight.data, saved["layers.0.weight"])


def test_determinism_same_seed():
    outs = []
    for _ in range(2):
        rng = np.random.default_rng(7)
        mlp = nd.MLP([5, 8, 3], rng)
        outs.append(mlp(Tensor(rng.normal(size=(4, 5)))).data)
    assert np.array_equal(outs[0], outs[1])

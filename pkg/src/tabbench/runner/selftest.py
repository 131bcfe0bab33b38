"""Oracle suites runnable without pytest: gradients, Wilcoxon enumeration, InfoNCE enumeration."""

from __future__ import annotations

import itertools
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .. import ndcore as nd
from ..contrastive import brute_force_info_nce, info_nce, pair_index
from ..contrastive.pairs import SCHEMES
from ..evalstat import signed_rank_exact_pvalue
from ..models import AttentionClassifier, AttentionStackSpec
from ..ndcore import Tensor


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    cases: int
    seconds: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.cases} cases, worst error {self.worst:.3g} (tol {self.tolerance:g}), {self.seconds:.1f}s"


def _shape(rng, ndim=2, lo=1, hi=5):
    return tuple(int(v) for v in rng.integers(lo, hi, size=ndim))


def _param(rng, shape, positive=False):
    data = rng.uniform(0.5, 2.0, shape) if positive else rng.normal(size=shape)
    return Tensor(data, requires_grad=True)


def _weighted(rng, out_shape):
    w = Tensor(rng.normal(size=out_shape))
    return lambda t: (t * w).sum()


def _primitive_case(name: str, rng: np.random.Generator):
    """(params, loss closure) for one primitive on random small shapes."""
    r, c = _shape(rng)
    if name == "add":
        a, b = _param(rng, (r, c)), _param(rng, (c,))
        w = _weighted(rng, (r, c))
        return [a, b], lambda: w(a + b)
    if name == "sub":
        a, b = _param(rng, (r, c)), _param(rng, (r, 1))
        w = _weighted(rng, (r, c))
        return [a, b], lambda: w(a - b)
    if name == "mul":
        a, b = _param(rng, (r, c)), _param(rng, (r, c))
        return [a, b], lambda: (a * b).sum()
    if name == "div":
        a, b = _param(rng, (r, c)), _param(rng, (r, c), positive=True)
        return [a, b], lambda: (a / b).sum()
    if name == "matmul":
        k = int(rng.integers(1, 5))
        a, b = _param(rng, (r, k)), _param(rng, (k, c))
        w = _weighted(rng, (r, c))
        return [a, b], lambda: w(a @ b)
    if name == "relu":
        a = _param(rng, (r, c))
        w = _weighted(rng, (r, c))
        return [a], lambda: w(nd.relu(a))
    if name == "exp":
        a = _param(rng, (r, c))
        return [a], lambda: nd.exp(a).mean()
    if name == "log":
        a = _param(rng, (r, c), positive=True)
        return [a], lambda: nd.log(a).sum()
    if name == "sqrt":
        a = _param(rng, (r, c), positive=True)
        return [a], lambda: nd.sqrt(a).sum()
    if name == "softmax":
        a = _param(rng, (r, c))
        w = _weighted(rng, (r, c))
        return [a], lambda: w(nd.softmax(a))
    if name == "log_softmax":
        a = _param(rng, (r, c))
        w = _weighted(rng, (r, c))
        return [a], lambda: w(nd.log_softmax(a))
    if name == "layer_norm":
        c = max(c, 2)
        a, g, b = _param(rng, (r, c)), _param(rng, (c,)), _param(rng, (c,))
        w = _weighted(rng, (r, c))
        return [a, g, b], lambda: w(nd.layer_norm(a, g, b))
    if name == "cross_entropy":
        c = max(c, 2)
        a = _param(rng, (r, c))
        y = rng.integers(0, c, size=r)
        return [a], lambda: nd.cross_entropy(a, y)
    if name == "mse":
        a, b = _param(rng, (r, c)), Tensor(rng.normal(size=(r, c)))
        return [a], lambda: nd.mse(a, b)
    if name == "cosine":
        c = max(c, 2)
        a = _param(rng, (r + 1, c))
        return [a], lambda: (nd.pairwise_cosine(a) ** 2).sum()
    if name == "reshape":
        a = _param(rng, (r, c))
        w = _weighted(rng, (c, r))
        return [a], lambda: w(a.reshape(c * r).reshape(c, r) * a.transpose())
    if name == "concat_slice":
        a, b = _param(rng, (r, c)), _param(rng, (1, c))
        return [a, b], lambda: (nd.concatenate([a, b], axis=0)[::2] ** 2).sum()
    raise ValueError(name)


PRIMITIVES = (
    "add", "sub", "mul", "div", "matmul", "relu", "exp", "log", "sqrt", "softmax", "log_softmax",
    "layer_norm", "cross_entropy", "mse", "cosine", "reshape", "concat_slice",
)


def _attention_case(rng: np.random.Generator, preset: str):
    n, d, C = int(rng.integers(2, 4)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
    spec = AttentionStackSpec.preset(preset, k=4, heads=2, blocks=2, ff_mult=2)
    model = AttentionClassifier(d, C, spec, rng)
    # nonzero biases and CLS keep ReLUs away from their kink
    for p in model.parameters():
        if not p.data.any():
            p.data = rng.normal(scale=0.1, size=p.shape)
    x = Tensor(rng.normal(size=(n, d)))
    y = rng.integers(0, C, size=n)
    return model.parameters(), lambda: nd.cross_entropy(model(x), y)


def gradient_suite(cases: int = 100, seed: int = 0, tol: float = 1e-4) -> SuiteResult:
    """Random primitives on random small shapes plus the full attention stack (both presets)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        params, fn = _primitive_case(PRIMITIVES[i % len(PRIMITIVES)], rng)
        worst = max(worst, nd.check_gradients(fn, params))
    for preset in ("ftt", "npt"):
        params, fn = _attention_case(rng, preset)
        worst = max(worst, nd.check_gradients(fn, params))
    return SuiteResult("gradients", worst < tol, worst, tol, cases + 2, time.perf_counter() - t0)


def _plain_ranks(a: np.ndarray) -> np.ndarray:
    """Average ranks by direct comparison counting (independent of evalstat.midranks)."""
    less = (a[None, :] < a[:, None]).sum(axis=1)
    equal = (a[None, :] == a[:, None]).sum(axis=1)
    return less + (equal + 1) / 2.0


def enumerate_signed_rank_pvalue(diffs) -> float:
    """Two-sided p over every one of the 2**n sign assignments of the non-zero differences."""
    d = np.asarray([x for x in diffs if x != 0], dtype=np.float64)
    n = len(d)
    if n == 0:
        return 1.0
    ranks = _plain_ranks(np.abs(d))
    observed = ranks[d > 0].sum()
    lower = upper = 0
    for signs in itertools.product((False, True), repeat=n):
        w = ranks[np.array(signs)].sum()
        lower += w <= observed + 1e-9
        upper += w >= observed - 1e-9
    return min(1.0, 2 * min(lower, upper) / 2**n)


def wilcoxon_suite(max_n: int = 12, per_n: int = 8, seed: int = 0, tol: float = 1e-12) -> SuiteResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, 0
    for n in range(1, max_n + 1):
        for trial in range(per_n):
            if trial % 2:
                d = rng.integers(-3, 4, size=n).astype(np.float64)  # ties and zeros
            else:
                d = rng.normal(size=n)
            worst = max(worst, abs(signed_rank_exact_pvalue(d) - enumerate_signed_rank_pvalue(d)))
            cases += 1
    return SuiteResult("wilcoxon", worst <= tol, worst, tol, cases, time.perf_counter() - t0)


def _cos(u, v) -> float:
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def enumerate_info_nce(first: np.ndarray, second: np.ndarray, scheme: str, tau: float) -> float:
    """Loss written out per sample from the scheme definitions, with no shared index arrays.

    ``first``/``second`` are the two view matrices (for scarf/proposed the
    first view is the clean sample).
    """
    n = len(first)
    e = lambda u, v: np.exp(_cos(u, v) / tau)  # noqa: E731
    terms = []
    if scheme == "simclr":
        views = list(first) + list(second)
        for a in range(2 * n):
            partner = (a + n) % (2 * n)
            den = sum(e(views[a], views[k]) for k in range(2 * n) if k != a)
            terms.append(-np.log(e(views[a], views[partner]) / den))
    else:
        for i in range(n):
            den = sum(e(first[i], second[j]) for j in range(n))
            if scheme == "proposed":
                den += sum(e(first[i], first[j]) + e(second[i], second[j]) for j in range(n) if j != i)
            terms.append(-np.log(e(first[i], second[i]) / den))
    return float(np.mean(terms))


def info_nce_suite(trials: int = 200, max_batch: int = 6, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(trials):
        scheme = SCHEMES[i % len(SCHEMES)]
        n = int(rng.integers(2, max_batch + 1))
        z = rng.normal(size=(2 * n, int(rng.integers(1, 6))))
        tau = float(rng.uniform(0.05, 3.0))
        idx = pair_index(n, scheme)
        got = info_nce(Tensor(z), idx, tau).item()
        worst = max(worst, abs(got - enumerate_info_nce(z[:n], z[n:], scheme, tau)), abs(got - brute_force_info_nce(z, idx, tau)))
    return SuiteResult("info_nce", worst <= tol, worst, tol, trials, time.perf_counter() - t0)


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "gradients": gradient_suite,
    "wilcoxon": wilcoxon_suite,
    "info_nce": info_nce_suite,
}


def run_selftest(names=None, echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name in names or SUITES:
        res = SUITES[name]()
        echo(res.line())
        ok &= res.passed
    return ok

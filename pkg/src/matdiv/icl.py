"""One-layer linear-attention model for in-context learning of linear systems.

The model, parameterized by two d x d weight matrices P and Q, predicts

    prediction = P (1/n sum_i y_i x_i^T) Q query

from n demonstration pairs (x_i, y_i = A x_i) of an unseen coefficient
matrix A.  :func:`train` fits (P, Q) to a pre-generated set of prompts by
minibatch SGD on the mean squared prediction error, with exact analytic
gradients.  :func:`evaluate` measures error as a function of the inference
prompt length and fits the log-log decay slope.

Task sources: anywhere a ``dist`` is accepted, either a
:class:`~matdiv.operators.TaskDistribution` or a fixed square matrix (a
singleton task family) may be passed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceError, DomainError
from .linalg import as_matrix
from .matrixio import read_matrix, write_matrix
from .operators import TaskDistribution, _sample_task
from .rng import RngStream

MSE = "MSE"
SHIFTED_RELATIVE = "shifted-relative"
ERROR_KINDS = (MSE, SHIFTED_RELATIVE)

#: Loss trace recording cadence during training.
LOSS_RECORD_INTERVAL = 100

#: Below this mean error the log-log slope fit is reported as None.
SLOPE_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters.

    The learning rate decays from ``learning_rate`` to ``lr_final`` on a
    cosine schedule.  ``init_scale`` is the entrywise standard deviation of
    the Gaussian init (default 1/sqrt(d)).  When ``normalize_tasks`` is on,
    prompts are internally rescaled by an estimate of the family's largest
    spectral norm (or by ``task_scale`` if given); the returned weights are
    unaffected because the model is linear in the prompt moment, but SGD at
    the default learning rate only converges on O(1)-normed tasks.
    """

    learning_rate: float = 1e-2
    lr_final: float = 1e-4
    batch_size: int = 64
    steps: int = 20_000
    init_scale: float | None = None
    normalize_tasks: bool = True
    task_scale: float | None = None


@dataclass
class TransformerParams:
    P: np.ndarray
    Q: np.ndarray
    d: int
    seed: int
    steps: int
    learning_rate: float
    batch_size: int
    final_train_loss: float
    loss_history: tuple = field(default_factory=tuple, repr=False)


@dataclass(frozen=True)
class Prompt:
    xs: np.ndarray
    ys: np.ndarray
    query: np.ndarray
    target: np.ndarray
    task: np.ndarray


@dataclass(frozen=True)
class EvalReport:
    prompt_lengths: tuple
    errors: tuple
    error_kind: str
    fitted_slope: float | None
    task_count: int


def _task_dim(source) -> int:
    if isinstance(source, TaskDistribution):
        return source.d
    m = as_matrix(source, "task")
    if m.shape[0] != m.shape[1]:
        raise DomainError(f"a fixed task must be square, got {m.shape}")
    return m.shape[0]


def _draw_task(source, gen: np.random.Generator) -> np.ndarray:
    if isinstance(source, TaskDistribution):
        return _sample_task(source, gen)
    return np.asarray(source, dtype=float)


def tf_forward(params: TransformerParams, xs, ys, query) -> np.ndarray:
    """Model prediction for one prompt.

    ``xs`` and ``ys`` are n x d arrays of demonstration pairs (rows), and
    ``query`` is the unlabeled d-vector.  Computed as P (G (Q query)) with
    G the averaged outer-product moment of the prompt, so each extra query
    against an accumulated moment costs O(d**2).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    query = np.asarray(query, dtype=float)
    if xs.shape != ys.shape or xs.shape[0] < 1:
        raise DomainError("xs and ys must be equal-shape with at least one pair")
    d = params.P.shape[0]
    if xs.shape[1] != d or query.shape != (d,):
        raise DomainError(f"prompt vectors must have length {d}")
    moment = ys.T @ xs / xs.shape[0]
    return params.P @ (moment @ (params.Q @ query))


def empirical_risk(params: TransformerParams, prompts) -> float:
    """Mean squared prediction error over a batch of prompts."""
    if not prompts:
        raise DomainError("empirical_risk requires a nonempty batch")
    total = 0.0
    for pr in prompts:
        residual = tf_forward(params, pr.xs, pr.ys, pr.query) - pr.target
        total += float(residual @ residual)
    return total / len(prompts)


def sample_prompt(dist, n: int, rng: RngStream) -> Prompt:
    """Draw a task, n demonstration pairs, and one held-out query/target."""
    if n < 1:
        raise DomainError("prompt length n must be >= 1")
    gen = rng.generator()
    a = _draw_task(dist, gen)
    d = a.shape[0]
    xs = gen.standard_normal((n + 1, d))
    ys = xs @ a.T
    return Prompt(xs=xs[:n], ys=ys[:n], query=xs[n], target=ys[n], task=a)


def _generate_training_arrays(source, N, n, gen):
    d = _task_dim(source)
    moments = np.empty((N, d, d))
    queries = np.empty((N, d))
    targets = np.empty((N, d))
    for j in range(N):
        a = _draw_task(source, gen)
        xs = gen.standard_normal((n + 1, d))
        ys = xs @ a.T
        moments[j] = ys[:n].T @ xs[:n] / n
        queries[j] = xs[n]
        targets[j] = ys[n]
    return moments, queries, targets


def _estimate_task_scale(source, gen, pilots: int = 32) -> float:
    scale = max(float(np.linalg.norm(_draw_task(source, gen), 2)) for _ in range(pilots))
    return scale if scale > 0 else 1.0


def _batch_risk(P, Q, moments, queries, targets) -> float:
    qx = queries @ Q.T
    u = np.einsum("bij,bj->bi", moments, qx)
    r = u @ P.T - targets
    return float(np.mean(np.einsum("bi,bi->b", r, r)))


def batch_gradients(P, Q, moments, queries, targets):
    """Minibatch mean loss and its averaged gradients in (P, Q).

    Per example, with r = P G Q x - y: the P-gradient is 2 r (G Q x)^T and
    the Q-gradient is 2 G^T P^T r x^T.  This is the exact step direction
    used by :func:`train`.
    """
    b = moments.shape[0]
    qx = queries @ Q.T
    u = np.einsum("bij,bj->bi", moments, qx)
    r = u @ P.T - targets
    loss = float(np.mean(np.einsum("bi,bi->b", r, r)))
    grad_p = (2.0 / b) * (r.T @ u)
    w = np.einsum("bji,bj->bi", moments, r @ P)
    grad_q = (2.0 / b) * (w.T @ queries)
    return loss, grad_p, grad_q


def train(dist, N: int, n: int, hyper: TrainConfig | None = None, rng: RngStream = RngStream(0)) -> TransformerParams:
    """Fit (P, Q) by minibatch SGD on N pre-generated training prompts.

    Per-example loss is ||P G Q x - y||^2 with G the prompt moment; the
    analytic gradients are 2 r (G Q x)^T in P and 2 G^T P^T r x^T in Q with
    r the residual, averaged over the minibatch.  Raises
    :class:`~matdiv.errors.DivergenceError` naming the step if the loss
    stops being finite.  The loss trace (every ``LOSS_RECORD_INTERVAL``
    steps, in raw task units) is kept on the returned params.
    """
    hyper = hyper or TrainConfig()
    if hyper.batch_size < 1 or N < hyper.batch_size:
        raise DomainError("need N >= batch_size >= 1")
    if hyper.steps < 1:
        raise DomainError("steps must be >= 1")
    if n < 1:
        raise DomainError("training prompt length n must be >= 1")
    d = _task_dim(dist)
    gen = rng.generator()

    if hyper.task_scale is not None:
        scale = float(hyper.task_scale)
    elif hyper.normalize_tasks:
        scale = _estimate_task_scale(dist, gen)
    else:
        scale = 1.0
    moments, queries, targets = _generate_training_arrays(dist, N, n, gen)
    moments /= scale
    targets /= scale
    raw_units = scale * scale

    std = hyper.init_scale if hyper.init_scale is not None else 1.0 / math.sqrt(d)
    P = gen.normal(0.0, std, (d, d))
    Q = gen.normal(0.0, std, (d, d))

    probe = slice(0, min(512, N))
    lr0, lr1 = hyper.learning_rate, hyper.lr_final
    history = []
    for t in range(hyper.steps):
        lr = lr1 + 0.5 * (lr0 - lr1) * (1.0 + math.cos(math.pi * t / hyper.steps))
        idx = gen.integers(0, N, size=hyper.batch_size)
        loss, grad_p, grad_q = batch_gradients(P, Q, moments[idx], queries[idx], targets[idx])
        if not math.isfinite(loss):
            raise DivergenceError(t)
        P -= lr * grad_p
        Q -= lr * grad_q
        if t % LOSS_RECORD_INTERVAL == 0:
            history.append(raw_units * _batch_risk(P, Q, moments[probe], queries[probe], targets[probe]))

    final_loss = raw_units * _batch_risk(P, Q, moments, queries, targets)
    if not math.isfinite(final_loss):
        raise DivergenceError(hyper.steps)
    return TransformerParams(
        P=P,
        Q=Q,
        d=d,
        seed=rng.seed,
        steps=hyper.steps,
        learning_rate=lr0,
        batch_size=hyper.batch_size,
        final_train_loss=final_loss,
        loss_history=tuple(history),
    )


def analytic_gradients(params: TransformerParams, moment, query, target):
    """Per-example gradients of ||P G Q x - y||^2 in (P, Q); used by tests."""
    moment = as_matrix(moment, "moment")
    query = np.asarray(query, dtype=float)
    target = np.asarray(target, dtype=float)
    u = moment @ (params.Q @ query)
    r = params.P @ u - target
    grad_p = 2.0 * np.outer(r, u)
    grad_q = 2.0 * np.outer(moment.T @ (params.P.T @ r), query)
    return grad_p, grad_q


def evaluate(
    params: TransformerParams,
    test_dist,
    m_values,
    tasks: int,
    queries_per_task: int = 10,
    error_kind: str = MSE,
    rng: RngStream = RngStream(0),
) -> EvalReport:
    """Mean error over fresh tasks and prompts at each inference length.

    ``MSE`` is the plain mean squared error; ``shifted-relative`` divides
    by the mean squared target norm.  The log-log slope is fit by ordinary
    least squares, or reported as None when any mean error sits below
    ``SLOPE_FLOOR``.  Reproducible bit-for-bit for a fixed ``rng``.
    """
    m_values = [int(m) for m in m_values]
    if not m_values or any(m < 1 for m in m_values):
        raise DomainError("m_values must be nonempty positive integers")
    if any(b <= a for a, b in zip(m_values, m_values[1:])):
        raise DomainError("m_values must be strictly increasing")
    if tasks < 1 or queries_per_task < 1:
        raise DomainError("tasks and queries_per_task must be >= 1")
    if error_kind not in ERROR_KINDS:
        raise DomainError(f"error_kind must be one of {ERROR_KINDS}")
    d = _task_dim(test_dist)
    if d != params.d:
        raise DomainError(f"checkpoint is for d = {params.d} but the test family has d = {d}")
    gen = rng.generator()
    errors = []
    for m in m_values:
        sq_sum = 0.0
        ref_sum = 0.0
        for _ in range(tasks):
            a = _draw_task(test_dist, gen)
            xs = gen.standard_normal((m, d))
            ys = xs @ a.T
            moment = ys.T @ xs / m
            qs = gen.standard_normal((queries_per_task, d))
            ts = qs @ a.T
            preds = ((qs @ params.Q.T) @ moment.T) @ params.P.T
            diff = preds - ts
            sq_sum += float(np.sum(diff * diff))
            ref_sum += float(np.sum(ts * ts))
        count = tasks * queries_per_task
        errors.append(sq_sum / count if error_kind == MSE else sq_sum / ref_sum)
    if min(errors) > SLOPE_FLOOR:
        slope = float(np.polyfit(np.log(m_values), np.log(errors), 1)[0])
    else:
        slope = None
    return EvalReport(
        prompt_lengths=tuple(m_values),
        errors=tuple(errors),
        error_kind=error_kind,
        fitted_slope=slope,
        task_count=tasks,
    )


def ood_suite(
    train_spec,
    test_specs,
    hyper: TrainConfig | None,
    N: int,
    n: int,
    m_values,
    tasks: int,
    queries_per_task: int = 10,
    error_kind: str = SHIFTED_RELATIVE,
    rng: RngStream = RngStream(0),
) -> list[EvalReport]:
    """Train once on ``train_spec`` and evaluate on every member of ``test_specs``.

    Training owns stream ``rng``; evaluation i owns ``rng.offset(1 + i)``.
    """
    if not test_specs:
        raise DomainError("test_specs must be nonempty")
    d = _task_dim(train_spec)
    for spec in test_specs:
        if _task_dim(spec) != d:
            raise DomainError("all task families in an OOD suite must share d")
    params = train(train_spec, N, n, hyper, rng)
    return [
        evaluate(params, spec, m_values, tasks, queries_per_task, error_kind, rng.offset(1 + i))
        for i, spec in enumerate(test_specs)
    ]


def save_params(params: TransformerParams, directory, label: str) -> None:
    """Write P/Q in matrix text format plus a JSON metadata sidecar."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {directory}")
    write_matrix(directory / f"{label}_P.txt", params.P)
    write_matrix(directory / f"{label}_Q.txt", params.Q)
    meta = {
        "d": params.d,
        "seed": params.seed,
        "steps": params.steps,
        "learning_rate": params.learning_rate,
        "batch_size": params.batch_size,
        "final_train_loss": params.final_train_loss,
    }
    (directory / f"{label}_meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_params(directory, label: str) -> TransformerParams:
    directory = Path(directory)
    p = read_matrix(directory / f"{label}_P.txt")
    q = read_matrix(directory / f"{label}_Q.txt")
    meta = json.loads((directory / f"{label}_meta.json").read_text())
    if p.shape != q.shape or p.shape[0] != p.shape[1] or p.shape[0] != meta["d"]:
        raise DomainError(f"inconsistent checkpoint {label!r}: P {p.shape}, Q {q.shape}, d {meta['d']}")
    return TransformerParams(
        P=p,
        Q=q,
        d=int(meta["d"]),
        seed=int(meta["seed"]),
        steps=int(meta["steps"]),
        learning_rate=float(meta["learning_rate"]),
        batch_size=int(meta["batch_size"]),
        final_train_loss=float(meta["final_train_loss"]),
    )

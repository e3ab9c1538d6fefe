"""Shared parameter tensor and the training loops that touch it.

All candidate circuits read their angles from one tensor of shape
(p, c, l): layer index, pool entry index, angle slot.  A layout only ever
sees the slice (i, layout[i], :needed) for each of its layers, so training
one circuit warm-starts every other circuit that reuses an entry at the
same depth.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .simulator import loss_gradient

THREADS_ENV_VAR = "VQCSEARCH_THREADS"


@dataclass
class SharedParameters:
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ValueError(
                f"shared parameters must have shape (p, c, l), got {values.shape}"
            )
        self.values = values

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def copy(self) -> "SharedParameters":
        return SharedParameters(self.values.copy())


@dataclass
class OptimizerConfig:
    method: str = "adam"
    learning_rate: float = 0.01
    steps: int = 1
    batch_size: int = 8
    gradient_noise_sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.method not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer method {self.method!r}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.gradient_noise_sigma < 0:
            raise ValueError("gradient_noise_sigma must be >= 0")


def init_params(
    p: int,
    c: int,
    l: int,
    scheme: str = "uniform",
    seed: int | None = None,
    uniform_bound: float = 0.1,
) -> SharedParameters:
    """Fresh (p, c, l) tensor, either all zeros or uniform(-bound, +bound)."""
    if p < 1 or c < 1 or l < 0:
        raise ValueError(f"invalid parameter tensor shape ({p}, {c}, {l})")
    shape = (p, c, max(l, 1) if l == 0 else l)
    # an all-placeholder pool still gets a width-1 tensor so downstream
    # shape checks stay uniform
    if scheme == "zeros":
        values = np.zeros(shape, dtype=np.float64)
    elif scheme == "uniform":
        rng = np.random.default_rng(seed)
        values = rng.uniform(-uniform_bound, uniform_bound, size=shape)
    else:
        raise ValueError(f"unknown init scheme {scheme!r}")
    return SharedParameters(values)


def param_slice(params: SharedParameters, pool, layout, layer: int) -> np.ndarray:
    """Copy of the angle slice read by ``layer`` of ``layout``."""
    if not 0 <= layer < len(layout):
        raise ValueError(f"layer {layer} outside layout of length {len(layout)}")
    idx = layout[layer]
    need = pool.entries[idx].num_params
    return params.values[layer, idx, :need].copy()


class _Optimizer:
    """Adam or plain SGD over the full shared tensor.

    Adam keeps per-slot moments, so slots that only ever see zero gradient
    are never moved; updates stay local to the slots a layout touches.
    """

    def __init__(self, cfg: OptimizerConfig, shape: tuple[int, int, int]):
        self.cfg = cfg
        self.t = 0
        if cfg.method == "adam":
            self.m = np.zeros(shape, dtype=np.float64)
            self.v = np.zeros(shape, dtype=np.float64)

    def step(self, values: np.ndarray, grad: np.ndarray) -> np.ndarray:
        lr = self.cfg.learning_rate
        if self.cfg.method == "sgd":
            return values - lr * grad
        self.t += 1
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        self.m = beta1 * self.m + (1 - beta1) * grad
        self.v = beta2 * self.v + (1 - beta2) * grad * grad
        m_hat = self.m / (1 - beta1**self.t)
        v_hat = self.v / (1 - beta2**self.t)
        return values - lr * m_hat / (np.sqrt(v_hat) + eps)


def _batch_gradients(task, pool, layouts, params) -> list[np.ndarray]:
    """Per-layout loss gradients, optionally fanned out over worker threads."""
    workers = int(os.environ.get(THREADS_ENV_VAR, "1") or "1")
    if workers > 1 and len(layouts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [
                ex.submit(loss_gradient, task, pool, layout, params)
                for layout in layouts
            ]
            return [f.result() for f in futures]
    return [loss_gradient(task, pool, layout, params) for layout in layouts]


def warmup(task, pool, sampler, params: SharedParameters,
           cfg: OptimizerConfig) -> SharedParameters:
    """Pre-train the shared tensor on randomly drawn layouts.

    Each step draws ``batch_size`` layouts from ``sampler``, averages their
    loss gradients elementwise, optionally perturbs the average with
    Gaussian noise, and applies one optimizer update.  The input tensor is
    not modified.
    """
    values = params.values.copy()
    opt = _Optimizer(cfg, values.shape)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.steps):
        layouts = [list(sampler()) for _ in range(cfg.batch_size)]
        grads = _batch_gradients(task, pool, layouts, SharedParameters(values))
        grad = np.mean(grads, axis=0)
        if cfg.gradient_noise_sigma > 0:
            grad = grad + rng.normal(0.0, cfg.gradient_noise_sigma, size=grad.shape)
        values = opt.step(values, grad)
    return SharedParameters(values)


def finetune(task, pool, layout, params: SharedParameters,
             cfg: OptimizerConfig) -> tuple[SharedParameters, list[float]]:
    """Polish one fixed layout; returns new params and the loss trace.

    The trace has ``steps + 1`` entries: the loss before any update, then
    the loss after each step.  Gradients vanish off the layout's slots, so
    the rest of the tensor is untouched.
    """
    values = params.values.copy()
    opt = _Optimizer(cfg, values.shape)
    trace = [float(task.loss(pool, layout, SharedParameters(values)))]
    if not math.isfinite(trace[0]):
        raise ArithmeticError(f"non-finite loss for layout {list(layout)}")
    for _ in range(cfg.steps):
        grad = loss_gradient(task, pool, layout, SharedParameters(values))
        values = opt.step(values, grad)
        loss = float(task.loss(pool, layout, SharedParameters(values)))
        if not math.isfinite(loss):
            raise ArithmeticError(f"non-finite loss for layout {list(layout)}")
        trace.append(loss)
    return SharedParameters(values), trace


# ---------------------------------------------------------------------------
# checkpoint format


def save_params(params: SharedParameters, path) -> None:
    data = {
        "shape": list(params.values.shape),
        "values": params.values.reshape(-1).tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
        fh.write("\n")


def load_params(path) -> SharedParameters:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    shape = tuple(data["shape"])
    values = np.asarray(data["values"], dtype=np.float64)
    if len(shape) != 3 or values.size != shape[0] * shape[1] * shape[2]:
        raise ValueError(f"{path}: checkpoint shape header {shape} does not match data")
    return SharedParameters(values.reshape(shape))

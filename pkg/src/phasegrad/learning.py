"""Per-sample equilibrium-propagation training.

A training step clamps one sample's normalized features onto the input
nodes' natural frequencies, solves the free and the nudged equilibria,
reads gradients from the phase differences, and applies a clipped,
projected SGD update. Four parameter regimes are supported: frequencies
only, all couplings, a fixed random coupling subset, and joint.

The heavy lifting happens in compiled kernels (_kernels.ep_step and
_kernels.train_run). train() and a fold over train_step() execute the
same compiled code path, so the two produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import CouplingGraph
from .rng import substream

MODES = ("omega", "k", "k_matched", "joint")
GRAD_RULES = ("two_phase", "finite_difference")
NUDGE_SCHEMES = ("both", "correct")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    nudge_outputs selects which outputs feel the nudging force on a
    sample of class c: "both" nudges every output (the correct one
    toward 0, the other toward target_other), "correct" nudges only
    output c toward 0 and leaves the other free.

    input_scale multiplies the normalized features before they are
    written into the input-node frequencies, setting the size of the
    data-driven phase swing relative to the initialization.
    """

    mode: str
    lr: float = 1e-3
    epochs: int = 150
    beta: float = 0.1
    clip: float = 2.0
    omega_bounds: tuple[float, float] = (-3.0, 3.0)
    k_bounds: tuple[float, float] = (0.01, 8.0)
    recenter: bool = False
    seed: int = 0
    k_matched_size: int = 0
    grad_rule: str = "two_phase"
    fd_h: float = 1e-5
    nudge_outputs: str = "correct"
    target_other: float = np.pi
    input_scale: float = 0.5

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.grad_rule not in GRAD_RULES:
            raise ValueError(f"unknown grad_rule {self.grad_rule!r}")
        if self.nudge_outputs not in NUDGE_SCHEMES:
            raise ValueError(f"unknown nudge_outputs {self.nudge_outputs!r}")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.clip > 0:
            raise ValueError("clip must be positive")
        if not self.omega_bounds[0] < self.omega_bounds[1]:
            raise ValueError("empty omega_bounds")
        if not 0 < self.k_bounds[0] < self.k_bounds[1]:
            raise ValueError("k_bounds must be positive and nonempty")
        if self.mode == "k_matched" and self.k_matched_size < 1:
            raise ValueError("k_matched mode needs k_matched_size >= 1")
        if not self.fd_h > 0:
            raise ValueError("fd_h must be positive")
        if not self.input_scale > 0:
            raise ValueError("input_scale must be positive")


@dataclass(frozen=True, eq=False)
class Model:
    """Trainable state: a coupling graph plus natural frequencies.

    omega holds one entry per node; input entries stay zero because the
    data overwrites them each sample. learnable_edges lists the edge
    indices a coupling-training mode may update.
    """

    graph: CouplingGraph
    omega: np.ndarray
    learnable_edges: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=np.float64)
        g = self.graph
        if omega.shape != (g.n,):
            raise ValueError("omega must have one entry per node")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega must be finite")
        if 0 not in g.input_nodes:
            raise ValueError(
                "node 0 (the pinned phase reference) must be an input node for training"
            )
        for node in g.input_nodes:
            if omega[node] != 0.0:
                raise ValueError("input-node frequencies must be zero; data sets them")
        if g.directed_overrides:
            raise ValueError("training requires a symmetric coupling graph")
        edges = tuple(sorted(self.learnable_edges))
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate learnable edge index")
        if edges and not (0 <= edges[0] and edges[-1] < len(g.edges)):
            raise ValueError("learnable edge index out of range")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "learnable_edges", edges)

    def learnable_nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.graph.hidden_nodes + self.graph.output_nodes))


@dataclass(frozen=True, eq=False)
class StepDiag:
    """Diagnostics of one training step."""

    skipped: bool
    residual_inf: float
    cond: float
    free_theta: np.ndarray


@dataclass(frozen=True, eq=False)
class TrainingTrace:
    """Per-epoch training record plus the final model."""

    train_acc: np.ndarray
    test_acc: np.ndarray
    mean_residual: np.ndarray
    mean_cond: np.ndarray
    skip_count: np.ndarray
    model: Model
    converged_flag: bool

    def __post_init__(self) -> None:
        for arr in (self.train_acc, self.test_acc):
            if np.any((arr < 0) | (arr > 1)):
                raise ValueError("accuracy outside [0, 1]")

    @property
    def final_train_accuracy(self) -> float:
        return float(self.train_acc[-1])

    @property
    def test_accuracy(self) -> float:
        return float(self.test_acc[-1])

    @property
    def total_skips(self) -> int:
        return int(self.skip_count.sum())


def predict(theta_star: np.ndarray, outputs) -> int:
    """Class whose output phase is closest to zero on the circle.

    Exact cosine ties go to the lowest class index.
    """
    if len(outputs) < 2:
        raise ValueError("need at least two output nodes")
    values = np.cos([theta_star[node] for node in outputs])
    return int(np.argmax(values))


def targets_for_class(c: int, outputs, other: float = np.pi) -> np.ndarray:
    """Phase targets: zero for the correct output, `other` for the rest."""
    if not 0 <= c < len(outputs):
        raise ValueError(f"class index {c} out of range")
    targets = np.full(len(outputs), float(other))
    targets[c] = 0.0
    return targets


def _nudge_tables(cfg: TrainConfig, outputs) -> tuple[np.ndarray, np.ndarray]:
    """Per-class nudged-node and target-phase tables.

    Row c lists the nodes nudged on a class-c sample and their targets.
    """
    n_classes = len(outputs)
    if cfg.nudge_outputs == "correct":
        nodes = np.array([[outputs[c]] for c in range(n_classes)], dtype=np.int64)
        targets = np.zeros((n_classes, 1))
        return nodes, targets
    nodes = np.array([list(outputs)] * n_classes, dtype=np.int64)
    targets = np.stack(
        [targets_for_class(c, outputs, cfg.target_other) for c in range(n_classes)]
    )
    return nodes, targets


def draw_matched_edges(g: CouplingGraph, size: int, rng) -> tuple[int, ...]:
    """Uniform random subset of edge indices, for K-matched training."""
    if not 1 <= size <= len(g.edges):
        raise ValueError("subset size out of range")
    perm = rng.permutation(len(g.edges))
    return tuple(sorted(int(e) for e in perm[:size]))


def _mode_flags(model: Model, cfg: TrainConfig) -> tuple[bool, bool]:
    train_omega = cfg.mode in ("omega", "joint")
    train_k = cfg.mode in ("k", "k_matched", "joint")
    n_edges = len(model.graph.edges)
    if cfg.mode in ("k", "joint") and model.learnable_edges != tuple(range(n_edges)):
        raise ValueError(f"mode {cfg.mode!r} trains every edge; "
                         "model.learnable_edges must list all edges")
    if cfg.mode == "k_matched" and len(model.learnable_edges) != cfg.k_matched_size:
        raise ValueError("model.learnable_edges size does not match k_matched_size")
    return train_omega, train_k


def _model_arrays(model: Model):
    g = model.graph
    edge_i = np.array([e[0] for e in g.edges], dtype=np.int64)
    edge_j = np.array([e[1] for e in g.edges], dtype=np.int64)
    weights = np.array(g.edge_weights(), dtype=np.float64)
    node_mask = np.zeros(g.n, dtype=np.bool_)
    for node in model.learnable_nodes():
        node_mask[node] = True
    edge_mask = np.zeros(len(g.edges), dtype=np.bool_)
    for e in model.learnable_edges:
        edge_mask[e] = True
    input_nodes = np.array(g.input_nodes, dtype=np.int64)
    out_nodes = np.array(g.output_nodes, dtype=np.int64)
    return edge_i, edge_j, weights, node_mask, edge_mask, input_nodes, out_nodes


SOLVE_TOL = 1e-12
SOLVE_MAX_ITER = 200


def train_step(
    model: Model,
    sample: tuple[np.ndarray, int],
    cfg: TrainConfig,
    warm_start: np.ndarray | None = None,
) -> tuple[Model, StepDiag]:
    """One online SGD step on a single normalized sample.

    A step whose free or nudged solve fails is skipped: the model comes
    back unchanged and the diagnostics mark the skip. warm_start seeds
    the free solve; passing the previous step's free_theta reproduces
    train() exactly.
    """
    features, label = sample
    features = np.asarray(features, dtype=np.float64)
    g = model.graph
    if features.shape != (len(g.input_nodes),):
        raise ValueError("feature count does not match input nodes")
    train_omega, train_k = _mode_flags(model, cfg)
    edge_i, edge_j, weights, node_mask, edge_mask, input_nodes, out_nodes = (
        _model_arrays(model)
    )
    omega = model.omega.copy()
    k_mat = g.coupling_matrix()
    nudge_nodes_table, targets_table = _nudge_tables(cfg, g.output_nodes)
    warm = np.zeros(g.n) if warm_start is None else np.asarray(warm_start, dtype=np.float64)

    applied, res_inf, cond, theta_free = _kernels.ep_step(
        omega, k_mat, weights, edge_i, edge_j, node_mask, edge_mask,
        input_nodes, features * cfg.input_scale, nudge_nodes_table[int(label)],
        targets_table[int(label)], warm,
        train_omega, train_k, cfg.grad_rule == "finite_difference", cfg.fd_h,
        cfg.lr, cfg.beta, cfg.clip,
        cfg.omega_bounds[0], cfg.omega_bounds[1],
        cfg.k_bounds[0], cfg.k_bounds[1], cfg.recenter,
        SOLVE_TOL, SOLVE_MAX_ITER)

    new_graph = g.with_weights(tuple(weights)) if train_k else g
    new_model = Model(new_graph, omega, model.learnable_edges)
    diag = StepDiag(
        skipped=not applied,
        residual_inf=float(res_inf),
        cond=float(cond),
        free_theta=theta_free,
    )
    return new_model, diag


def train(model: Model, ds, split, cfg: TrainConfig) -> TrainingTrace:
    """Full training run over a dataset split.

    Visits the training samples in a fresh seeded shuffle each epoch,
    evaluates train and test accuracy from zero-started free solves at
    every epoch end, and reports solver diagnostics averaged over the
    applied (non-skipped) steps.
    """
    train_omega, train_k = _mode_flags(model, cfg)
    g = model.graph
    edge_i, edge_j, weights, node_mask, edge_mask, input_nodes, out_nodes = (
        _model_arrays(model)
    )
    feats_train = np.ascontiguousarray(
        split.normalize(ds.features[split.train]) * cfg.input_scale
    )
    labels_train = np.ascontiguousarray(ds.labels[split.train], dtype=np.int64)
    feats_test = np.ascontiguousarray(
        split.normalize(ds.features[split.test]) * cfg.input_scale
    )
    labels_test = np.ascontiguousarray(ds.labels[split.test], dtype=np.int64)
    if feats_train.shape[1] != len(g.input_nodes):
        raise ValueError("feature count does not match input nodes")

    nudge_nodes_table, targets_table = _nudge_tables(cfg, g.output_nodes)
    shuffle_rng = substream("learning", cfg.seed, "shuffle")
    n_train = feats_train.shape[0]
    shuffles = np.stack(
        [shuffle_rng.permutation(n_train) for _ in range(cfg.epochs)]
    ).astype(np.int64)

    omega_final, weights_final, train_acc, test_acc, mean_res, mean_cond, skips = (
        _kernels.train_run(
            model.omega.copy(), g.coupling_matrix(), weights, edge_i, edge_j,
            node_mask, edge_mask, input_nodes, out_nodes,
            feats_train, labels_train, feats_test, labels_test,
            nudge_nodes_table, targets_table, shuffles,
            train_omega, train_k, cfg.grad_rule == "finite_difference", cfg.fd_h,
            cfg.lr, cfg.beta, cfg.clip,
            cfg.omega_bounds[0], cfg.omega_bounds[1],
            cfg.k_bounds[0], cfg.k_bounds[1], cfg.recenter,
            SOLVE_TOL, SOLVE_MAX_ITER)
    )

    final_graph = g.with_weights(tuple(weights_final)) if train_k else g
    final_model = Model(final_graph, omega_final, model.learnable_edges)
    return TrainingTrace(
        train_acc=train_acc,
        test_acc=test_acc,
        mean_residual=mean_res,
        mean_cond=mean_cond,
        skip_count=skips,
        model=final_model,
        converged_flag=bool(train_acc[-1] > 0.6),
    )

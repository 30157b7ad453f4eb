"""Experiment command line.

Nine subcommands drive the verification and learning experiments and
write machine-readable results: verify, asymmetry, finite-beta, ablate,
sweep, converge-diag, spectral, grad-rule, baseline. Each writes one
JSON document (sorted keys, schema documented in docs/result_schema.json)
plus a flat CSV sidecar of the per-seed records, and echoes the full
resolved configuration so a rerun reproduces the payload byte for byte;
only the wall_seconds field varies between reruns.

Seeds run in parallel worker processes when --jobs > 1. Results are
merged in seed order, so the payload does not depend on --jobs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from .data import (
    Dataset,
    load_formant_csv,
    logistic_baseline,
    resolve_data_path,
    split_and_normalize,
    synthesize_formants,
)
from .equilibrium import solve
from .gradient import (
    LossSpec,
    cosine_similarity,
    grad_analytical,
    grad_finite_difference,
    grad_two_phase,
)
from .graph import CouplingGraph, build_erdos_renyi, build_layered
from .init import multi_start_screen, output_only_init, random_init, spectral_seed, SeedSpec
from .learning import Model, TrainConfig, draw_matched_edges, train
from .rng import substream
from .stats import fisher_exact_2x2, welch_t_test

SCHEMA_VERSION = "1"
N_PER_CLASS = 138
VERIFY_SIZES = (6, 10, 15, 20, 30, 50, 100, 200)
ASYMMETRY_LEVELS = (0.0, 0.05, 0.10, 0.20, 0.50)
FINITE_BETAS = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
SWEEP_LAYERS = ((2, 3, 2), (2, 5, 2), (2, 7, 2), (2, 10, 2), (2, 15, 2))
CONVERGENCE_THRESHOLD = 0.6


def _parse_seeds(text: str) -> list[int]:
    """'12' means seeds 0..11; '3,17,42' means exactly those seeds."""
    if "," in text:
        seeds = [int(part) for part in text.split(",") if part.strip()]
        if not seeds:
            raise ValueError("empty seed list")
        return seeds
    count = int(text)
    if count < 1:
        raise ValueError("seed count must be positive")
    return list(range(count))


def _map_seeds(worker, tasks, jobs: int):
    """Run worker over tasks, in order, optionally across processes."""
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def _load_dataset(data_arg: str | None, task: tuple[str, str]) -> tuple[Dataset, str]:
    """Resolve --data into a Dataset plus a source tag for the payload."""
    if data_arg == "synthetic":
        path = None
    else:
        path = resolve_data_path(data_arg)
    if path is None:
        ds = synthesize_formants(task, N_PER_CLASS, substream("data", 0, "-".join(task)))
        return ds, "synthetic"
    return load_formant_csv(path, task), path


def _write_result(out_path: str, payload: dict) -> None:
    """JSON document plus a CSV sidecar of the per-seed records."""
    directory = os.path.dirname(out_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    records = payload.get("per_seed", [])
    csv_path = out_path[:-5] + ".csv" if out_path.endswith(".json") else out_path + ".csv"
    columns: list[str] = []
    for rec in records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)


def _payload(experiment: str, config: dict, per_seed: list[dict], summary: dict,
             started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "config": config,
        "per_seed": per_seed,
        "summary": summary,
        "wall_seconds": round(time.time() - started, 3),
    }


# --------------------------------------------------------------------
# verification commands


def _verification_network(n: int, seed: int):
    """Random test network, frequencies, and loss used by the checks."""
    g = build_erdos_renyi(n, 0.6, 5.0, substream("verify", seed, f"graph-{n}"))
    omega_rng = substream("verify", seed, f"omega-{n}")
    omega = np.array([0.3 * omega_rng.normal() for _ in range(n)])
    target_rng = substream("verify", seed, f"targets-{n}")
    out_nodes = (n - 2, n - 1)
    targets = tuple(0.3 * target_rng.normal() for _ in out_nodes)
    return g, omega, LossSpec(outputs=out_nodes, targets=targets)


def _verify_one(task) -> dict:
    n, seed, beta, h = task
    g, omega, spec = _verification_network(n, seed)
    free = solve(g, omega)
    tp = grad_two_phase(g, omega, spec, beta)
    an = grad_analytical(g, omega, spec)
    fd = grad_finite_difference(g, omega, spec, h)
    return {
        "n": n,
        "seed": seed,
        "cos_tp_fd": cosine_similarity(tp.values, fd.values),
        "cos_tp_analytical": cosine_similarity(tp.values, an.values),
        "cos_analytical_fd": cosine_similarity(an.values, fd.values),
        "residual_inf": free.residual_inf,
        "newton_iterations": free.iterations,
    }


def cmd_verify(sizes, seeds, beta, h, out_path, jobs=1) -> dict:
    started = time.time()
    tasks = [(n, s, beta, h) for n in sizes for s in seeds]
    per_seed = _map_seeds(_verify_one, tasks, jobs)
    summary = {
        "min_cos_tp_fd": min(r["cos_tp_fd"] for r in per_seed),
        "min_cos_tp_analytical": min(r["cos_tp_analytical"] for r in per_seed),
        "min_cos_analytical_fd": min(r["cos_analytical_fd"] for r in per_seed),
        "max_residual_inf": max(r["residual_inf"] for r in per_seed),
    }
    config = {"sizes": list(sizes), "seeds": list(seeds), "beta": beta, "h": h,
              "graph": {"kind": "erdos-renyi", "p": 0.6, "k_mean": 5.0},
              "omega_sigma": 0.3}
    payload = _payload("verify", config, per_seed, summary, started)
    _write_result(out_path, payload)
    return payload


def _asymmetric_graph(g: CouplingGraph, level: float, rng) -> CouplingGraph:
    """Perturb each direction of every edge by a factor in [1-level, 1+level]."""
    if level == 0.0:
        return g
    overrides = []
    for (i, j, w) in g.edges:
        overrides.append((i, j, w * (1.0 + level * rng.uniform(-1.0, 1.0))))
        overrides.append((j, i, w * (1.0 + level * rng.uniform(-1.0, 1.0))))
    return CouplingGraph(g.n, g.input_nodes, g.hidden_nodes, g.output_nodes,
                         g.edges, directed_overrides=tuple(overrides))


def _asymmetry_one(task) -> dict:
    n, seed, level, beta, h = task
    g, omega, spec = _verification_network(n, seed)
    g = _asymmetric_graph(g, level, substream("asymmetry", seed, f"level-{level}"))
    tp = grad_two_phase(g, omega, spec, beta)
    fd = grad_finite_difference(g, omega, spec, h)
    return {"level": level, "seed": seed,
            "cos_tp_fd": cosine_similarity(tp.values, fd.values)}


def cmd_asymmetry(levels, seeds, out_path, size=15, beta=1e-4, h=1e-5, jobs=1) -> dict:
    started = time.time()
    tasks = [(size, s, lv, beta, h) for lv in levels for s in seeds]
    per_seed = _map_seeds(_asymmetry_one, tasks, jobs)
    by_level = {}
    for rec in per_seed:
        by_level.setdefault(rec["level"], []).append(rec["cos_tp_fd"])
    summary = {"levels": [
        {"level": lv, "mean_cos": float(np.mean(vals)), "std_cos": float(np.std(vals))}
        for lv, vals in sorted(by_level.items())
    ]}
    config = {"size": size, "levels": list(levels), "seeds": list(seeds),
              "beta": beta, "h": h}
    payload = _payload("asymmetry", config, per_seed, summary, started)
    _write_result(out_path, payload)
    return payload


def _finite_beta_one(task) -> dict:
    n, seed, betas = task
    g, omega, spec = _verification_network(n, seed)
    an = grad_analytical(g, omega, spec)
    an_norm = float(np.linalg.norm(an.values))
    rec = {"seed": seed}
    for beta in betas:
        tp = grad_two_phase(g, omega, spec, beta)
        rec[f"cos_beta_{beta:g}"] = cosine_similarity(tp.values, an.values)
        rec[f"relerr_beta_{beta:g}"] = abs(
            float(np.linalg.norm(tp.values)) - an_norm
        ) / an_norm
    return rec


def cmd_finite_beta(betas, n_networks, out_path, size=15, jobs=1) -> dict:
    started = time.time()
    tasks = [(size, seed, tuple(betas)) for seed in range(n_networks)]
    per_seed = _map_seeds(_finite_beta_one, tasks, jobs)
    rows = []
    for beta in betas:
        cos = [r[f"cos_beta_{beta:g}"] for r in per_seed]
        err = [r[f"relerr_beta_{beta:g}"] for r in per_seed]
        rows.append({"beta": beta,
                     "mean_cos": float(np.mean(cos)),
                     "mean_relerr": float(np.mean(err))})
    summary = {"betas": rows}
    err_by_beta = {row["beta"]: row["mean_relerr"] for row in rows}
    if 1e-3 in err_by_beta and 1e-4 in err_by_beta and err_by_beta[1e-4] > 0:
        summary["relerr_ratio_1e3_over_1e4"] = err_by_beta[1e-3] / err_by_beta[1e-4]
    config = {"size": size, "betas": list(betas), "n_networks": n_networks}
    payload = _payload("finite-beta", config, per_seed, summary, started)
    _write_result(out_path, payload)
    return payload


# --------------------------------------------------------------------
# learning commands


def _layered(k0: float, layers=(2, 5, 2)) -> CouplingGraph:
    return build_layered(layers[0], layers[1], layers[2], k0)


def _shared_split(ds: Dataset, seed: int):
    return split_and_normalize(ds, 0.8, substream("split", seed, "80-20"))


def _train_arm(g: CouplingGraph, ds: Dataset, seed: int, mode: str,
               epochs: int, lr: float, omega=None, recenter=False,
               k_bounds=(0.01, 8.0), grad_rule="two_phase"):
    """One training run with the shared per-seed split and init streams."""
    split = _shared_split(ds, seed)
    if omega is None:
        omega = random_init(g, 0.3, substream("init", seed, "omega"))
    if mode == "k_matched":
        edge_rng = substream("init", seed, "edges")
        n_learn = len(g.hidden_nodes) + len(g.output_nodes)
        edges = draw_matched_edges(g, n_learn, edge_rng)
        extra = {"k_matched_size": n_learn}
    elif mode in ("k", "joint"):
        edges = tuple(range(len(g.edges)))
        extra = {}
    else:
        edges = ()
        extra = {}
    cfg = TrainConfig(mode=mode, epochs=epochs, lr=lr, seed=seed,
                      recenter=recenter, k_bounds=k_bounds,
                      grad_rule=grad_rule, **extra)
    trace = train(Model(g, omega, edges), ds, split, cfg)
    return trace, cfg


def _trace_record(seed: int, trace) -> dict:
    return {
        "seed": seed,
        "converged": bool(trace.converged_flag),
        "final_train_accuracy": trace.final_train_accuracy,
        "test_accuracy": trace.test_accuracy,
        "mean_residual": float(trace.mean_residual.mean()),
        "mean_cond": float(trace.mean_cond.mean()),
        "skips": int(trace.total_skips),
    }


def _arm_summary(records: list[dict]) -> dict:
    conv = [r for r in records if r["converged"]]
    out = {
        "n_seeds": len(records),
        "n_converged": len(conv),
        "all_seed_mean_test": float(np.mean([r["test_accuracy"] for r in records])),
    }
    if conv:
        accs = [r["test_accuracy"] for r in conv]
        out["converged_mean_test"] = float(np.mean(accs))
        out["converged_std_test"] = float(np.std(accs))
    return out


def _ablate_one(task) -> dict:
    mode, seed, epochs, lr, k0, ds = task
    g = _layered(k0)
    run_mode = "k" if mode == "k_full" else mode
    trace, _ = _train_arm(g, ds, seed, run_mode, epochs, lr)
    rec = _trace_record(seed, trace)
    rec["mode"] = mode
    return rec


def cmd_ablate(task, modes, seeds, epochs, lr, out_path, data=None, k0=3.0,
               jobs=1) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    per_seed = []
    arms = {}
    for mode in modes:
        tasks = [(mode, s, epochs, lr, k0, ds) for s in seeds]
        records = _map_seeds(_ablate_one, tasks, jobs)
        arms[mode] = records
        per_seed.extend(records)

    summary = {mode: _arm_summary(records) for mode, records in arms.items()}
    if "omega" in arms:
        for other in modes:
            if other == "omega":
                continue
            a = [r["test_accuracy"] for r in arms["omega"] if r["converged"]]
            b = [r["test_accuracy"] for r in arms[other] if r["converged"]]
            pair = {}
            if len(a) >= 2 and len(b) >= 2:
                gap = float(np.mean(a) - np.mean(b))
                pair["converged_gap"] = gap
                if np.var(a, ddof=1) + np.var(b, ddof=1) > 0:
                    t, p = welch_t_test(a, b)
                    pair["welch_t"] = t
                    pair["welch_p"] = p
            n = len(seeds)
            ca, cb = len(a), len(b)
            pair["fisher_p"] = fisher_exact_2x2(((ca, n - ca), (cb, n - cb)))
            summary[f"omega_vs_{other}"] = pair
    config = {"task": list(task), "modes": list(modes), "seeds": list(seeds),
              "epochs": epochs, "lr": lr, "k0": k0, "data": source,
              "train_config": asdict(TrainConfig(mode="omega", epochs=epochs, lr=lr))}
    payload = _payload("ablate", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


def _sweep_one(task) -> dict:
    layers, mode, seed, epochs, lr, k0, ds = task
    g = build_layered(*layers, k0)
    trace, _ = _train_arm(g, ds, seed, mode, epochs, lr)
    rec = _trace_record(seed, trace)
    rec["mode"] = mode
    rec["n"] = g.n
    return rec


def cmd_sweep(task, seeds, epochs, lr, out_path, data=None, k0=3.0,
              layer_sizes=SWEEP_LAYERS, jobs=1) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    per_seed = []
    summary_rows = []
    for layers in layer_sizes:
        g = build_layered(*layers, k0)
        row = {"layers": list(layers), "n": g.n,
               "omega_params": len(g.hidden_nodes) + len(g.output_nodes),
               "k_params": len(g.edges)}
        for mode in ("omega", "k"):
            tasks = [(layers, mode, s, epochs, lr, k0, ds) for s in seeds]
            records = _map_seeds(_sweep_one, tasks, jobs)
            per_seed.extend(records)
            row[mode] = _arm_summary(records)
        if "converged_mean_test" in row["omega"] and "converged_mean_test" in row["k"]:
            row["gap"] = row["omega"]["converged_mean_test"] - row["k"]["converged_mean_test"]
        summary_rows.append(row)
    summary = {"sizes": summary_rows}
    config = {"task": list(task), "seeds": list(seeds), "epochs": epochs,
              "lr": lr, "k0": k0, "layer_sizes": [list(ls) for ls in layer_sizes],
              "data": source}
    payload = _payload("sweep", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


DIAG_CONFIGS = (
    {"name": "joint-k3", "mode": "joint", "k0": 3.0},
    {"name": "joint-k4", "mode": "joint", "k0": 4.0},
    {"name": "joint-kfloor1.5", "mode": "joint", "k0": 3.0, "k_lo": 1.5},
    {"name": "joint-recenter", "mode": "joint", "k0": 3.0, "recenter": True},
    {"name": "omega-k3", "mode": "omega", "k0": 3.0},
)


def _diag_one(task) -> dict:
    spec, seed, epochs, lr, ds = task
    g = _layered(spec["k0"])
    trace, _ = _train_arm(
        g, ds, seed, spec["mode"], epochs, lr,
        recenter=spec.get("recenter", False),
        k_bounds=(spec.get("k_lo", 0.01), 8.0),
    )
    rec = _trace_record(seed, trace)
    rec["config"] = spec["name"]
    return rec


def cmd_converge_diag(seeds, epochs, lr, out_path, data=None, task=("a", "i"),
                      jobs=1) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    per_seed = []
    converged_sets = {}
    config_summaries = {}
    for spec in DIAG_CONFIGS:
        tasks = [(spec, s, epochs, lr, ds) for s in seeds]
        records = _map_seeds(_diag_one, tasks, jobs)
        per_seed.extend(records)
        converged_sets[spec["name"]] = {r["seed"] for r in records if r["converged"]}
        conv = [r for r in records if r["converged"]]
        fail = [r for r in records if not r["converged"]]
        entry = _arm_summary(records)
        entry["total_skips"] = int(sum(r["skips"] for r in records))
        for label, group in (("converged", conv), ("failed", fail)):
            if group:
                conds = [r["mean_cond"] for r in group]
                entry[f"{label}_cond_mean"] = float(np.mean(conds))
                entry[f"{label}_cond_std"] = float(np.std(conds))
        config_summaries[spec["name"]] = entry

    names = [spec["name"] for spec in DIAG_CONFIGS]
    jaccard = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            sa, sb = converged_sets[a], converged_sets[b]
            union = sa | sb
            jaccard[f"{a}|{b}"] = (len(sa & sb) / len(union)) if union else 1.0
    summary = {"configs": config_summaries, "jaccard": jaccard,
               "converged_seeds": {k: sorted(v) for k, v in converged_sets.items()},
               "min_jaccard": min(jaccard.values()) if jaccard else 1.0,
               "total_skips": int(sum(r["skips"] for r in per_seed))}
    config = {"task": list(task), "seeds": list(seeds), "epochs": epochs, "lr": lr,
              "configs": [dict(s) for s in DIAG_CONFIGS], "data": source}
    payload = _payload("converge-diag", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


def _spectral_omega(g: CouplingGraph) -> np.ndarray:
    out1, out2 = g.output_nodes
    return spectral_seed(g, SeedSpec(out1=out1, out2=out2))


def _spectral_one(task) -> dict:
    arm, seed, epochs, lr, k0, layers, mode, ds = task
    g = build_layered(*layers, k0)
    if arm == "random":
        omega = random_init(g, 0.3, substream("init", seed, "omega"))
    elif arm == "spectral":
        omega = _spectral_omega(g)
    elif arm == "output_only":
        omega = output_only_init(g, -0.3)
    elif arm == "multi_start":
        omega = multi_start_screen(g, 10, substream("init", seed, "multistart"))
    else:
        raise ValueError(f"unknown arm {arm!r}")
    trace, _ = _train_arm(g, ds, seed, mode, epochs, lr, omega=omega)
    rec = _trace_record(seed, trace)
    rec["arm"] = arm
    rec["success"] = bool(rec["test_accuracy"] > CONVERGENCE_THRESHOLD)
    return rec


def _success_count(records: list[dict]) -> int:
    return sum(1 for r in records if r["success"])


def cmd_spectral(task, seeds, gen_seeds, epochs, lr, out_path, data=None,
                 k0=3.0, jobs=1) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    arms = ("random", "spectral", "output_only", "multi_start")
    per_seed = []
    primary = {}
    for arm in arms:
        tasks = [(arm, s, epochs, lr, k0, (2, 5, 2), "omega", ds) for s in seeds]
        records = _map_seeds(_spectral_one, tasks, jobs)
        for rec in records:
            rec["setting"] = "primary"
        per_seed.extend(records)
        primary[arm] = records

    rescued = lost = 0
    rand_by_seed = {r["seed"]: r["success"] for r in primary["random"]}
    for rec in primary["spectral"]:
        was = rand_by_seed[rec["seed"]]
        if rec["success"] and not was:
            rescued += 1
        if was and not rec["success"]:
            lost += 1

    def _succ_summary(records):
        succ = [r for r in records if r["success"]]
        entry = {"n_seeds": len(records), "n_success": len(succ)}
        if succ:
            entry["success_mean_test"] = float(np.mean([r["test_accuracy"] for r in succ]))
        entry["all_seed_mean_test"] = float(np.mean([r["test_accuracy"] for r in records]))
        return entry

    summary = {"primary": {arm: _succ_summary(records) for arm, records in primary.items()}}
    summary["primary"]["rescued"] = rescued
    summary["primary"]["lost"] = lost

    second_task = ("o", "u") if tuple(task) == ("a", "i") else ("a", "i")
    gen_ds, gen_source = _load_dataset(data, second_task)
    generalization = [
        ("second-task", second_task, (2, 5, 2), "omega", gen_ds),
        ("k-only-frozen-seed", tuple(task), (2, 5, 2), "k", ds),
        ("larger-architecture", tuple(task), (2, 8, 2), "omega", ds),
    ]
    gen_summary = {}
    for name, gtask, layers, mode, gds in generalization:
        entry = {"task": list(gtask), "layers": list(layers), "mode": mode}
        for arm in ("random", "spectral"):
            tasks = [(arm, s, epochs, lr, k0, layers, mode, gds) for s in gen_seeds]
            records = _map_seeds(_spectral_one, tasks, jobs)
            for rec in records:
                rec["setting"] = name
            per_seed.extend(records)
            entry[arm] = _succ_summary(records)
        gen_summary[name] = entry
    summary["generalization"] = gen_summary

    config = {"task": list(task), "seeds": list(seeds), "gen_seeds": list(gen_seeds),
              "epochs": epochs, "lr": lr, "k0": k0, "data": source,
              "gen_data": gen_source, "arms": list(arms),
              "output_only_magnitude": -0.3, "multi_start_candidates": 10}
    payload = _payload("spectral", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


def _grad_rule_one(task) -> dict:
    seed, epochs, lr, k0, ds, rule = task
    g = _layered(k0)
    trace, _ = _train_arm(g, ds, seed, "omega", epochs, lr, grad_rule=rule)
    rec = _trace_record(seed, trace)
    rec["grad_rule"] = rule
    return rec


def cmd_grad_rule_check(seeds, epochs, lr, out_path, data=None, task=("a", "i"),
                        k0=3.0, jobs=1) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    per_seed = []
    by_rule = {}
    for rule in ("two_phase", "finite_difference"):
        tasks = [(s, epochs, lr, k0, ds, rule) for s in seeds]
        records = _map_seeds(_grad_rule_one, tasks, jobs)
        per_seed.extend(records)
        by_rule[rule] = {r["seed"]: r for r in records}

    gaps = []
    zero_gaps = 0
    for seed in seeds:
        gap = abs(by_rule["two_phase"][seed]["test_accuracy"]
                  - by_rule["finite_difference"][seed]["test_accuracy"])
        gaps.append(gap)
        if gap == 0.0:
            zero_gaps += 1
    summary = {"mean_abs_gap": float(np.mean(gaps)),
               "max_abs_gap": float(np.max(gaps)),
               "n_zero_gap": zero_gaps,
               "n_seeds": len(seeds)}
    config = {"task": list(task), "seeds": list(seeds), "epochs": epochs,
              "lr": lr, "k0": k0, "data": source}
    payload = _payload("grad-rule", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


def cmd_baseline(task, seeds, out_path, data=None) -> dict:
    started = time.time()
    ds, source = _load_dataset(data, task)
    per_seed = []
    for seed in seeds:
        split = _shared_split(ds, seed)
        acc = logistic_baseline(ds, split)
        per_seed.append({"seed": seed, "test_accuracy": acc})
    summary = {"mean_test_accuracy": float(np.mean([r["test_accuracy"] for r in per_seed])),
               "min_test_accuracy": float(np.min([r["test_accuracy"] for r in per_seed]))}
    config = {"task": list(task), "seeds": list(seeds), "data": source}
    payload = _payload("baseline", config, per_seed, summary, started)
    payload["data_source"] = source
    _write_result(out_path, payload)
    return payload


# --------------------------------------------------------------------
# argument parsing


def _add_common(sub, default_seeds: str):
    sub.add_argument("--seeds", default=default_seeds,
                     help="seed count, or comma-separated explicit seeds")
    sub.add_argument("--out", required=True, help="output JSON path")
    sub.add_argument("--jobs", type=int, default=1, help="parallel seed workers")


def _add_data(sub, default_task: str):
    sub.add_argument("--data", default=None,
                     help="formant CSV path, or 'synthetic' (default: "
                          "$PHASEGRAD_DATA, else data/hillenbrand.csv, else synthetic)")
    sub.add_argument("--task", default=default_task,
                     help="two comma-separated vowel classes")


def _task_tuple(text: str) -> tuple[str, str]:
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    if len(parts) != 2:
        raise ValueError("task must name two classes, e.g. a,i")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasegrad",
        description="Kuramoto equilibrium-propagation experiments",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("verify", help="gradient identity across network sizes")
    _add_common(p, "1")
    p.add_argument("--sizes", default=",".join(str(n) for n in VERIFY_SIZES))
    p.add_argument("--beta", type=float, default=1e-4)
    p.add_argument("--h", type=float, default=1e-5)

    p = subs.add_parser("asymmetry", help="gradient robustness to coupling asymmetry")
    _add_common(p, "10")
    p.add_argument("--levels", default=",".join(str(lv) for lv in ASYMMETRY_LEVELS))
    p.add_argument("--size", type=int, default=15)

    p = subs.add_parser("finite-beta", help="finite nudging error scaling")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--networks", type=int, default=20)
    p.add_argument("--size", type=int, default=15)
    p.add_argument("--betas", default=",".join(f"{b:g}" for b in FINITE_BETAS))

    p = subs.add_parser("ablate", help="parameter ablation over training modes")
    _add_common(p, "100")
    _add_data(p, "a,i")
    p.add_argument("--modes", default="omega,k,k_matched,joint")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--k0", type=float, default=3.0)

    p = subs.add_parser("sweep", help="architecture sweep, frequency vs coupling")
    _add_common(p, "50")
    _add_data(p, "a,i")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--k0", type=float, default=3.0)

    p = subs.add_parser("converge-diag", help="convergence diagnosis across configs")
    _add_common(p, "40")
    _add_data(p, "a,i")
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--lr", type=float, default=1e-3)

    p = subs.add_parser("spectral", help="initialization strategies and seeding")
    _add_common(p, "100")
    _add_data(p, "a,i")
    p.add_argument("--gen-seeds", default="50",
                   help="seeds for the generalization settings")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--k0", type=float, default=3.0)

    p = subs.add_parser("grad-rule", help="two-phase vs finite-difference training")
    _add_common(p, "10")
    _add_data(p, "a,i")
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--k0", type=float, default=3.0)

    p = subs.add_parser("baseline", help="logistic-regression reference accuracy")
    _add_common(p, "10")
    _add_data(p, "a,i")

    return parser


def _floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            cmd_verify(_ints(args.sizes), _parse_seeds(args.seeds), args.beta,
                       args.h, args.out, jobs=args.jobs)
        elif args.command == "asymmetry":
            cmd_asymmetry(_floats(args.levels), _parse_seeds(args.seeds),
                          args.out, size=args.size, jobs=args.jobs)
        elif args.command == "finite-beta":
            cmd_finite_beta(_floats(args.betas), args.networks, args.out,
                            size=args.size, jobs=args.jobs)
        elif args.command == "ablate":
            cmd_ablate(_task_tuple(args.task), args.modes.split(","),
                       _parse_seeds(args.seeds), args.epochs, args.lr,
                       args.out, data=args.data, k0=args.k0, jobs=args.jobs)
        elif args.command == "sweep":
            cmd_sweep(_task_tuple(args.task), _parse_seeds(args.seeds),
                      args.epochs, args.lr, args.out, data=args.data,
                      k0=args.k0, jobs=args.jobs)
        elif args.command == "converge-diag":
            cmd_converge_diag(_parse_seeds(args.seeds), args.epochs, args.lr,
                              args.out, data=args.data,
                              task=_task_tuple(args.task), jobs=args.jobs)
        elif args.command == "spectral":
            cmd_spectral(_task_tuple(args.task), _parse_seeds(args.seeds),
                         _parse_seeds(args.gen_seeds), args.epochs, args.lr,
                         args.out, data=args.data, k0=args.k0, jobs=args.jobs)
        elif args.command == "grad-rule":
            cmd_grad_rule_check(_parse_seeds(args.seeds), args.epochs, args.lr,
                                args.out, data=args.data,
                                task=_task_tuple(args.task), k0=args.k0,
                                jobs=args.jobs)
        elif args.command == "baseline":
            cmd_baseline(_task_tuple(args.task), _parse_seeds(args.seeds),
                         args.out, data=args.data)
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"phasegrad: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

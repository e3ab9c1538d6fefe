"""Batch command-line front end.

Exit codes: 0 success, 2 configuration or input-file problems, 3 numeric
failures during simulation or training, 4 oracle size caps.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io as cio
from .search import run_search
from .simulator import init_state, sample
from .supernet import OptimizerConfig, finetune
from .tasks import (
    DegenerateSystemError,
    evaluate,
    maxcut_hamiltonian,
    oracle_ground_energy,
    oracle_linear_solve,
    oracle_maxcut,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_SIZE_CAP = 4


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_search(args) -> int:
    try:
        cfg = cio.load_run_config(args.config, seed_override=args.seed,
                                  out_override=args.out)
    except cio.ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    os.makedirs(cfg.output_dir, exist_ok=True)
    try:
        report = run_search(cfg.task, cfg.pool, cfg.limits, cfg.search,
                            cfg.optimizer, warmup_cfg=cfg.warmup)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, str(exc))

    cio.write_reward_trace(
        os.path.join(cfg.output_dir, "reward_trace.csv"),
        report.reward_trace, report.stopped_early,
    )
    summary = {
        "best_layout": report.best_layout,
        "best_reward": report.best_reward,
        "iterations_run": len(report.reward_trace),
        "stopped_early": report.stopped_early,
        "tree_stats": report.tree_stats,
        "seed": cfg.seed,
    }
    with open(os.path.join(cfg.output_dir, "search_report.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")

    if report.best_layout is not None:
        loss, reward = evaluate(cfg.task, cfg.pool, report.best_layout,
                                report.params)
        cio.save_circuit(
            os.path.join(cfg.output_dir, "best_circuit.json"),
            cfg.task, cfg.pool, report.best_layout, report.params,
            loss=loss, reward=reward,
            extra={"stopped_early": report.stopped_early, "seed": cfg.seed},
        )
    print(
        f"search finished: best_reward="
        f"{'n/a' if report.best_reward is None else f'{report.best_reward:.6f}'} "
        f"stopped_early={report.stopped_early} -> {cfg.output_dir}"
    )
    return EXIT_OK


def cmd_finetune(args) -> int:
    try:
        circuit = cio.load_circuit(args.circuit)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"{args.circuit}: {exc}")
    out_dir = args.out or os.path.dirname(os.path.abspath(args.circuit))
    os.makedirs(out_dir, exist_ok=True)
    opt = OptimizerConfig(
        method=args.optimizer,
        learning_rate=args.learning_rate,
        steps=args.steps,
    )
    try:
        params, trace = finetune(circuit.task, circuit.pool, circuit.layout,
                                 circuit.params, opt)
        loss, reward = evaluate(circuit.task, circuit.pool, circuit.layout, params)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    cio.write_loss_trace(os.path.join(out_dir, "loss_trace.csv"), trace)
    cio.save_circuit(
        args.circuit, circuit.task, circuit.pool, circuit.layout, params,
        loss=loss, reward=reward,
        extra={"finetune_steps": args.steps},
    )
    print(f"fine-tune finished: loss={loss:.8f} reward={reward:.6f}")
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        circuit = cio.load_circuit(args.circuit)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"{args.circuit}: {exc}")
    try:
        state = circuit.task.output_state(circuit.pool, circuit.layout,
                                          circuit.params)
        histogram = sample(state, shots=args.shots, seed=args.seed)
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    top = histogram.top(args.top_k)
    out = {
        "shots": histogram.shots,
        "counts": histogram.counts,
        "top": [{"bitstring": b, "count": c} for b, c in top],
        "seed": args.seed,
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "histogram.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=1)
            fh.write("\n")
    print(json.dumps({"top": out["top"]}))
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        cfg = cio.load_run_config(args.config, out_override=args.out)
    except cio.ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    task = cfg.task
    try:
        if task.variant == "maxcut":
            value, winners = oracle_maxcut(task.payload.graph)
            report = {"oracle": "max_cut", "max_cut": value, "argmax": winners}
        elif task.variant == "chemistry":
            energy = oracle_ground_energy(task.payload.hamiltonian)
            report = {"oracle": "ground_energy", "ground_energy": energy}
        elif task.variant == "vqls":
            probs = oracle_linear_solve(task.payload)
            n = task.num_qubits
            report = {
                "oracle": "linear_solve",
                "distribution": {
                    format(i, f"0{n}b"): float(p) for i, p in enumerate(probs)
                },
            }
        else:
            return _fail(EXIT_CONFIG,
                         f"task.variant: no oracle for {task.variant!r}")
    except DegenerateSystemError as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    except ValueError as exc:
        if "capped" in str(exc):
            return _fail(EXIT_SIZE_CAP, str(exc))
        return _fail(EXIT_NUMERIC, str(exc))
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "oracle.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    print(json.dumps(report if task.variant != "vqls" else {"oracle": "linear_solve",
                                                            "written": path}))
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        circuit = cio.load_circuit(args.circuit)
        if args.format == "qasm2":
            text = cio.export_qasm2(circuit.pool, circuit.layout, circuit.params)
        else:
            text = cio.export_text(circuit.pool, circuit.layout, circuit.params)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, f"{args.circuit}: {exc}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        name = "circuit.qasm" if args.format == "qasm2" else "circuit.txt"
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqcsearch",
        description="Design variational quantum circuits by nested tree search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run architecture search from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("finetune", help="polish the parameters of a found circuit")
    p.add_argument("circuit")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("sample", help="draw measurement shots from a circuit")
    p.add_argument("circuit")
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("oracle", help="write brute-force reference values")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export", help="print a circuit as OpenQASM 2.0 or text")
    p.add_argument("circuit")
    p.add_argument("--format", choices=["qasm2", "text"], default="qasm2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

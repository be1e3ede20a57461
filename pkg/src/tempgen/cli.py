"""Command-line entry point: ``tempgen {train,generate,evaluate,walks}``.

Settings resolve as defaults < ``--config`` file (key=value lines) <
explicit flags. Every run writes the resolved settings next to its output
as ``<output>.config``. Exit codes: 0 ok, 2 usage or I/O error, 3
numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import checkpoint, pipeline
from .graph import EdgeListError, TemporalGraph, load_edge_list, save_label_map
from .inductive import InductiveConfig
from .seqmodel import NumericalError, TrainConfig
from .walker import DEFAULT_WINDOW, sample_walk_set

log = logging.getLogger("tempgen")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


# flag name -> (type, default, help); shared by every subcommand that uses it
OPTIONS = {
    "input": (str, None, "source edge list (u,v,t per line)"),
    "output": (str, None, "output path"),
    "mode": (str, "transductive", "transductive or inductive"),
    "seed": (int, 0, "random seed"),
    "threads": (int, 1, "worker threads (1 = deterministic)"),
    "walk_len": (int, 20, "training walk length"),
    "gen_len": (int, None, "generation walk length (default from graph density)"),
    "window": (int, DEFAULT_WINDOW, "temporal neighborhood window"),
    "components": (int, 128, "log-normal mixture components"),
    "clusters": (int, 300, "K-means clusters (inductive)"),
    "beta": (float, 1e-5, "KL weight (inductive)"),
    "target_edges": (int, None, "generated edge count (default: source size)"),
    "target_nodes": (int, None, "generated node count (inductive only)"),
    "snapshot_mode": (str, "at", "snapshot construction: at or upto"),
    "epochs": (int, 10, "training epochs"),
    "lr": (float, 1e-3, "learning rate"),
    "batch_size": (int, 128, "walks per minibatch"),
    "d_v": (int, None, "node representation size (default 100, inductive 128)"),
    "d_t": (int, 64, "time encoding size"),
    "d_o": (int, 200, "recurrent state size"),
    "d_z": (int, 128, "latent size (inductive)"),
    "sage_epochs": (int, 200, "embedding training epochs (inductive)"),
    "wgan_epochs": (int, 200, "WGAN rounds (inductive)"),
    "checkpoint": (str, None, "model checkpoint path"),
    "generated": (str, None, "generated edge list"),
    "num_walks": (int, None, "number of walks (default: one per source edge)"),
    "time_binning": (str, "nearest", "nearest (snap to source timestamps) or none"),
    "per_snapshot": (int, 0, "also dump per-snapshot statistics (0/1)"),
}

COMMANDS = {
    "train": ["input", "output", "mode", "seed", "threads", "walk_len", "window", "components", "clusters",
              "beta", "epochs", "lr", "batch_size", "d_v", "d_t", "d_o", "d_z", "sage_epochs", "wgan_epochs"],
    "generate": ["checkpoint", "output", "mode", "seed", "threads", "gen_len", "target_edges", "target_nodes",
                 "num_walks", "time_binning", "input"],
    "evaluate": ["input", "generated", "output", "snapshot_mode", "time_binning", "per_snapshot", "mode"],
    "walks": ["input", "output", "seed", "threads", "walk_len", "window", "num_walks"],
}
REQUIRED = {"train": ["input", "output"], "generate": ["checkpoint", "output"],
            "evaluate": ["input", "generated", "output"], "walks": ["input", "output"]}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tempgen", description="Temporal interaction graph generator.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMANDS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="key=value settings file")
        for name in opts:
            typ, default, text = OPTIONS[name]
            shown = f" (default: {default})" if default is not None else ""
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None, help=text + shown)
    return ap


def read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def resolve(args: argparse.Namespace) -> dict:
    opts = COMMANDS[args.command]
    cfg = {k: OPTIONS[k][1] for k in opts}
    if args.config:
        for k, v in read_config(args.config).items():
            if k not in OPTIONS:
                raise UsageError(f"unknown config key {k!r}")
            if k in cfg:
                try:
                    cfg[k] = OPTIONS[k][0](v)
                except ValueError as exc:
                    raise UsageError(f"bad value for {k}: {v!r}") from exc
    for k in opts:
        if getattr(args, k) is not None:
            cfg[k] = getattr(args, k)
    missing = [k for k in REQUIRED[args.command] if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    if "mode" in cfg and cfg["mode"] not in ("transductive", "inductive"):
        raise UsageError(f"unknown mode {cfg['mode']!r}")
    if cfg.get("snapshot_mode", "at") not in ("at", "upto"):
        raise UsageError(f"unknown snapshot mode {cfg['snapshot_mode']!r}")
    if cfg.get("time_binning", "nearest") not in ("nearest", "none"):
        raise UsageError(f"unknown time binning {cfg['time_binning']!r}")
    if cfg.get("threads", 1) < 1:
        raise UsageError("--threads must be >= 1")
    return cfg


def write_echo(path, command: str, cfg: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"command={command}\n")
        for k in sorted(cfg):
            if cfg[k] is not None:
                fh.write(f"{k}={cfg[k]}\n")


def _load_graph(path) -> TemporalGraph:
    g = load_edge_list(path)
    if g.skipped_self_loops or g.dropped_duplicates:
        log.warning("%s: skipped %d self-loops, %d duplicate edges", path, g.skipped_self_loops,
                    g.dropped_duplicates)
    return g


def _train_config(cfg: dict):
    common = dict(walk_len=cfg["walk_len"], d_t=cfg["d_t"], d_o=cfg["d_o"], n_components=cfg["components"],
                  lr=cfg["lr"], batch_size=cfg["batch_size"], epochs=cfg["epochs"], window=cfg["window"],
                  seed=cfg["seed"])
    if cfg["mode"] == "transductive":
        return TrainConfig(d_v=cfg["d_v"] or 100, **common)
    return InductiveConfig(d_v=cfg["d_v"] or 128, d_z=cfg["d_z"], n_clusters=cfg["clusters"], beta=cfg["beta"],
                           sage_epochs=cfg["sage_epochs"], wgan_epochs=cfg["wgan_epochs"], **common)


def cmd_train(cfg: dict) -> None:
    g = _load_graph(cfg["input"])
    tcfg = _train_config(cfg)
    fit_fn = pipeline.fit_transductive if cfg["mode"] == "transductive" else pipeline.fit_inductive
    fit = fit_fn(g, tcfg, threads=cfg["threads"])
    out = cfg["output"]
    pipeline.save_fitted(out, fit)
    with open(out + ".loss.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for e, v in enumerate(fit.history.epoch_loss):
            fh.write(f"{e},{float(v)!r}\n")
    save_label_map(g, out + ".labels.csv")
    log.info("trained %s model on %d edges; final loss %.4f", fit.kind, g.num_edges,
             fit.history.epoch_loss[-1] if fit.history.epoch_loss else float("nan"))


def cmd_generate(cfg: dict) -> None:
    fit = pipeline.load_fitted(cfg["checkpoint"])
    if cfg["_mode_explicit"] and cfg["mode"] != fit.kind:
        raise UsageError(f"checkpoint holds a {fit.kind} model, not {cfg['mode']}")
    cfg["mode"] = fit.kind
    if cfg["target_nodes"] is not None and fit.kind == "transductive" and cfg["target_nodes"] != fit.model.num_nodes:
        raise UsageError("--target-nodes differs from the source node count; only inductive mode supports that")
    gen_len = cfg["gen_len"]
    if gen_len is None:
        if cfg.get("input"):
            gen_len = pipeline.default_gen_len(_load_graph(cfg["input"]))
        else:
            gen_len = 8
    res = pipeline.generate(fit, gen_len, cfg["target_edges"], cfg["target_nodes"], cfg["num_walks"],
                            seed=cfg["seed"], threads=cfg["threads"], bin_times=cfg["time_binning"] == "nearest")
    out = cfg["output"]
    gg = res.graph
    if fit.kind == "transductive":
        gg.graph.labels = list(fit.labels)
        gg.write(out, use_labels=True)
    else:
        gg.write(out, use_labels=False)
    # wall time lives in its own file so the graph and provenance stay byte-reproducible
    with open(out + ".timing", "w", encoding="utf-8") as fh:
        fh.write(f"generation_seconds={res.seconds!r}\n")
    log.info("generated %d edges from %d walks in %.2fs", gg.graph.num_edges, res.n_walks, res.seconds)


def _relabel_to(src: TemporalGraph, gen_path) -> TemporalGraph:
    """Load a generated edge list using the source's label->index map (new labels appended)."""
    index = {lab: i for i, lab in enumerate(src.labels)}
    raw = load_edge_list(gen_path)
    labels = list(src.labels)
    remap = np.empty(raw.num_nodes, dtype=np.int64)
    for i, lab in enumerate(raw.labels):
        if lab not in index:
            index[lab] = len(labels)
            labels.append(lab)
        remap[i] = index[lab]
    return TemporalGraph(len(labels), remap[raw.src], remap[raw.dst], raw.t)


def cmd_evaluate(cfg: dict) -> None:
    from .metrics import error_report
    from .assembly import read_provenance
    src = _load_graph(cfg["input"])
    prov_path = cfg["generated"] + ".provenance"
    prov = read_provenance(prov_path) if os.path.exists(prov_path) else {}
    mode = prov.get("mode", cfg["mode"])
    gen = _relabel_to(src, cfg["generated"])
    rep = error_report(src, gen, mode=cfg["snapshot_mode"], shared_node_ids=(mode == "transductive"),
                       bin_times=cfg["time_binning"] == "nearest")
    out = cfg["output"]
    rep.write_csv(out + ".csv")
    rep.write_json(out + ".json")
    if cfg["per_snapshot"]:
        rep.write_snapshots(out + ".snapshots.csv")
    timing = cfg["generated"] + ".timing"
    if os.path.exists(timing):
        with open(timing, encoding="utf-8") as fh, open(out + ".timing", "w", encoding="utf-8") as dst:
            dst.write(fh.read())
    print(f"edge_overlap_pct={rep.overlap:.3f} mean_degree_median_err={rep.median['mean_degree']:.4f}")


def cmd_walks(cfg: dict) -> None:
    g = _load_graph(cfg["input"])
    ws = sample_walk_set(g, cfg["num_walks"], cfg["walk_len"], cfg["window"], seed=cfg["seed"],
                         threads=cfg["threads"])
    ws.dump(cfg["output"])


HANDLERS = {"train": cmd_train, "generate": cmd_generate, "evaluate": cmd_evaluate, "walks": cmd_walks}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        cfg["_mode_explicit"] = getattr(args, "mode", None) is not None or (
            bool(args.config) and "mode" in read_config(args.config))
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=cfg.get("threads", 1)):
            HANDLERS[args.command](cfg)
        echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
        write_echo(cfg["output"] + ".config", args.command, echo)
    except (UsageError, OSError, EdgeListError, checkpoint.CheckpointError) as exc:
        print(f"tempgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError) as exc:
        print(f"tempgen: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"tempgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end training and generation for both model variants."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import assembly, checkpoint, kmeans, sage, wgan
from .graph import TemporalGraph, static_projection
from .inductive import InductiveConfig, InductiveModel, generate_walks_inductive, strip_end
from .seqmodel import TrainConfig, TrainHistory, TransductiveModel, time_affine, train, walks_to_triples
from .walker import Walker, sample_walk_set

log = logging.getLogger(__name__)


def epoch_seed(seed: int, epoch: int) -> int:
    return int(np.random.SeedSequence([seed, 10, epoch]).generate_state(1)[0])


def default_gen_len(g: TemporalGraph) -> int:
    """Short walks for sparse graphs, longer ones otherwise."""
    gs = static_projection(g)
    mean_deg = 2.0 * len(gs.edges) / max(1, len(gs.nodes()))
    return 4 if mean_deg < 4.0 else 8


@dataclass
class Fitted:
    model: object
    history: TrainHistory
    seed_nodes: np.ndarray  # first tuples of the epoch-mode walks (one per edge)
    seed_times: np.ndarray
    source_times: np.ndarray
    t_max: float
    num_edges: int
    labels: list
    wgan: wgan.WganPair | None = None
    extras: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.model.kind


def _walk_resampler(g, cfg, threads, transform=None):
    walker = Walker(g, cfg.window)

    def resample(epoch):
        ws = sample_walk_set(g, None, cfg.walk_len, cfg.window, seed=epoch_seed(cfg.seed, epoch),
                             threads=threads, walker=walker)
        return transform(ws) if transform else ws
    return resample


def fit_transductive(g: TemporalGraph, cfg: TrainConfig, threads: int = 1, epoch_callback=None) -> Fitted:
    off, scale = time_affine(float(g.t.min()), g.t_max)
    model = TransductiveModel.init(g.num_nodes, cfg, np.random.SeedSequence([cfg.seed, 11]), off, scale)
    hist = train(model, None, cfg, resample=_walk_resampler(g, cfg, threads), epoch_callback=epoch_callback)
    return Fitted(model, hist, g.src.copy(), g.t.copy(), np.unique(g.t), g.t_max, g.num_edges, list(g.labels))


def fit_inductive(g: TemporalGraph, cfg: InductiveConfig, threads: int = 1, epoch_callback=None) -> Fitted:
    gs = static_projection(g)
    emb = sage.sage_embed(gs, d=cfg.d_v, Q=cfg.sage_negatives, epochs=cfg.sage_epochs, seed=cfg.seed,
                          lr=cfg.sage_lr, boost_rounds=cfg.boost_rounds)
    log.info("embeddings trained; false positives per boosting round: %s", emb.false_positives)
    clusters = kmeans.kmeans_fit(emb.table, cfg.n_clusters, seed=cfg.seed)
    off, scale = time_affine(float(g.t.min()), g.t_max)
    model = InductiveModel.init(emb.table, clusters.assignment, cfg, np.random.SeedSequence([cfg.seed, 12]),
                                off, scale)
    hist = train(model, None, cfg, resample=_walk_resampler(g, cfg, threads, strip_end),
                 epoch_callback=epoch_callback)
    pair = wgan.wgan_train(emb.table, epochs=cfg.wgan_epochs, clip=cfg.wgan_clip, seed=cfg.seed, lr=cfg.wgan_lr)
    return Fitted(model, hist, g.src.copy(), g.t.copy(), np.unique(g.t), g.t_max, g.num_edges, list(g.labels),
                  wgan=pair, extras={"sage_false_positives": emb.false_positives})


@dataclass
class Generation:
    graph: assembly.GeneratedGraph
    seconds: float
    n_triples: int
    n_walks: int


def generate(fit: Fitted, gen_len: int, target_edges: int | None = None, target_nodes: int | None = None,
             num_walks: int | None = None, seed: int = 0, threads: int = 1, bin_times: bool = True) -> Generation:
    """Sample walks, count triples and assemble a graph of ``target_edges`` edges."""
    if gen_len < 2:
        raise ValueError("generation length must be >= 2")
    M = target_edges or fit.num_edges
    n_walks = num_walks or fit.num_edges
    rng = np.random.default_rng(np.random.SeedSequence([seed, 13]))
    pick = rng.integers(0, len(fit.seed_nodes), n_walks)
    s_nodes, s_times = fit.seed_nodes[pick], fit.seed_times[pick]
    start = time.perf_counter()
    if fit.kind == "transductive":
        if target_nodes not in (None, fit.model.num_nodes):
            raise ValueError("a different node count is only supported in inductive mode")
        n_nodes = fit.model.num_nodes
        u, v, t = fit.model.generate(s_nodes, s_times, gen_len, seed=seed, threads=threads)
    else:
        n_nodes = target_nodes or fit.model.num_nodes
        table = wgan.wgan_sample(fit.wgan, n_nodes, np.random.SeedSequence([seed, 14]))
        ws = generate_walks_inductive(fit.model, table, s_nodes, s_times, gen_len, seed=seed, threads=threads)
        u, v, t = walks_to_triples(ws)
    keep = t <= fit.t_max
    u, v, t = u[keep], v[keep], t[keep]
    if bin_times and len(t):
        t = assembly.bin_to_timestamps(t, fit.source_times)
    alpha = assembly.count_alpha(u, v, t, fit.t_max, truncate=True)
    alpha.dropped_late = int((~keep).sum())
    asm = assembly.assemble(alpha, M, seed=seed)
    seconds = time.perf_counter() - start
    prov = {"mode": fit.kind, "seed": seed, "gen_len": gen_len, "num_walks": n_walks,
            "target_edges": M, "num_nodes": n_nodes, "edges": len(asm.u), "triples": alpha.total(),
            "distinct_triples": len(alpha), "dropped_late": alpha.dropped_late,
            "dropped_self_loops": alpha.dropped_self_loops, "spilled": asm.spilled,
            "binned": int(bin_times), "model_hash": assembly.model_hash(fit.model.params)}
    gg = assembly.build_graph(asm, n_nodes, prov)
    return Generation(gg, seconds, alpha.total(), n_walks)


# ------------------------------------------------------------- checkpoints

def save_fitted(path, fit: Fitted) -> None:
    m = fit.model
    tensors = {f"p/{k}": v for k, v in m.params.items()}
    tensors.update(seed_nodes=fit.seed_nodes, seed_times=fit.seed_times, source_times=fit.source_times,
                   loss=np.asarray(fit.history.epoch_loss, dtype=np.float64))
    header = {"kind": m.kind, "config": m.cfg.to_dict(), "time_offset": m.time_offset,
              "time_scale": m.time_scale, "t_max": fit.t_max, "num_edges": fit.num_edges,
              "labels": fit.labels}
    if m.kind == "transductive":
        header["num_nodes"] = m.num_nodes
    else:
        tensors.update(emb=m.emb, clusters=m.clusters)
        tensors.update({f"g/{k}": v for k, v in fit.wgan.gen.items()})
        tensors.update({f"c/{k}": v for k, v in fit.wgan.critic.items()})
        header["wgan"] = {"noise_dim": fit.wgan.noise_dim, "clip": fit.wgan.clip}
    checkpoint.save(path, tensors, header)


def _cfg_from(cls, d: dict):
    names = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in d.items() if k in names})


def load_fitted(path) -> Fitted:
    tensors, header = checkpoint.load(path)
    params = {k[2:]: v for k, v in tensors.items() if k.startswith("p/")}
    kind = header.get("kind")
    if kind == "transductive":
        cfg = _cfg_from(TrainConfig, header["config"])
        model = TransductiveModel(params, header["num_nodes"], cfg, header["time_offset"], header["time_scale"])
        pair = None
    elif kind == "inductive":
        cfg = _cfg_from(InductiveConfig, header["config"])
        model = InductiveModel(params, tensors["emb"], tensors["clusters"], cfg,
                               header["time_offset"], header["time_scale"])
        pair = wgan.WganPair({k[2:]: v for k, v in tensors.items() if k.startswith("g/")},
                             {k[2:]: v for k, v in tensors.items() if k.startswith("c/")},
                             header["wgan"]["noise_dim"], header["wgan"]["clip"])
    else:
        raise checkpoint.CheckpointError(f"{path}: unknown model kind {kind!r}")
    hist = TrainHistory(epoch_loss=tensors["loss"].tolist())
    return Fitted(model, hist, tensors["seed_nodes"], tensors["seed_times"], tensors["source_times"],
                  float(header["t_max"]), int(header["num_edges"]), header["labels"], wgan=pair)

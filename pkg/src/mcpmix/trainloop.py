"""Training orchestration, evaluation and the schedule/gradient studies.

One batch of the default ``rla`` mode does, in order: mix real and freshly
drawn synthetic images at the current ``s``; BCE on both streams; frozen
features and their MMD; hinge and prior terms; a model step on
``(1 - rho) L_real + rho L_mix`` and a gate step on the closed-form gate
gradients.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import featspace, metrics, mixer, rla, segnet
from .core import RngStream, rng_split
from .synthgen import GenConfig, PairedTriplet, generate_triplet, load_manifest, synthesize

log = logging.getLogger(__name__)

MODES = ("rla", "stepwise", "cosine-fixed", "none", "classical-mixup")
MIXING_MODES = ("rla", "stepwise", "cosine-fixed")
N_CHECKPOINTS = 9


class TrainingDiverged(RuntimeError):
    def __init__(self, record):
        super().__init__(f"non-finite loss at epoch {record.epoch}, batch {record.batch}: {record}")
        self.record = record


@dataclass
class DataConfig:
    """Dataset to synthesise in memory when no manifest is given."""

    gen: GenConfig = field(default_factory=GenConfig)
    n_train: int = 64
    n_test: int = 16
    seed: int = 1234


@dataclass
class TrainConfig:
    manifest: str | None = None
    test_manifest: str | None = None
    data: DataConfig = field(default_factory=DataConfig)
    epochs: int = 60
    extension_epochs: int = 0
    batch_size: int = 8
    lr: float = 0.5
    weight_decay: float = 1e-4
    rla: rla.RlaConfig = field(default_factory=rla.RlaConfig)
    mode: str = "rla"
    seed: int = 0
    log_path: str | None = None
    hidden: int = 8
    feature_seed: int = 0
    fixed_r: float | None = None
    probe_size: int = 16

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.batch_size < 1 or self.epochs < 1 or self.extension_epochs < 0:
            raise ValueError("batch_size and epochs must be >= 1, extension >= 0")
        if self.lr <= 0 or self.weight_decay < 0:
            raise ValueError("lr must be positive and weight_decay non-negative")
        if self.fixed_r is not None and not 0.0 <= self.fixed_r <= 1.0:
            raise ValueError("fixed_r must lie in [0, 1]")
        if self.rla.total_epochs != self.epochs:
            self.rla = replace(self.rla, total_epochs=self.epochs)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "data" in d:
            data = dict(d["data"])
            if "gen" in data:
                data["gen"] = GenConfig.from_dict(data["gen"])
            d["data"] = DataConfig(**data)
        if "rla" in d:
            d["rla"] = rla.RlaConfig(**{k: v for k, v in d["rla"].items()
                                        if k != "total_epochs"},
                                     total_epochs=d.get("epochs", 60))
        return cls(**d)


LOG_COLUMNS = ("epoch", "batch", "s_t", "rho_t", "s_prior", "rho_prior", "D_t", "tau_t",
               "l_real", "l_mix", "penalty", "prior_rho", "prior_s", "total",
               "centroid_distance")


@dataclass(frozen=True)
class TrainLogRecord:
    epoch: int
    batch: int
    s_t: float
    rho_t: float
    s_prior: float
    rho_prior: float
    D_t: float
    tau_t: float
    l_real: float
    l_mix: float
    penalty: float
    prior_rho: float
    prior_s: float
    total: float
    centroid_distance: float
    wall_time: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class DistributionPoint:
    epoch: int
    s: float
    centroid_distance: float
    mmd: float


@dataclass
class TrainResult:
    model: segnet.SegModel
    log: list[TrainLogRecord]
    checkpoints: list[DistributionPoint]
    gates: rla.GateState
    tau0: float
    bandwidth: float
    fixed_r: float | None
    test: list[PairedTriplet]


def materialize(gen: GenConfig, n: int, seed: int) -> list[PairedTriplet]:
    """In-memory twin of ``generate_dataset``: same streams, float32-rounded images."""
    out = []
    for stream in rng_split(RngStream(seed), n):
        t = generate_triplet(gen, stream)
        out.append(PairedTriplet(t.real.astype(np.float32).astype(np.float64),
                                 t.synthetic.astype(np.float32).astype(np.float64),
                                 t.mask))
    return out


def load_data(cfg: TrainConfig):
    """(generator config, train triplets, test triplets)."""
    if cfg.manifest:
        manifest, train_set = load_manifest(cfg.manifest)
        gen = GenConfig.from_dict(manifest["config"])
    else:
        gen = cfg.data.gen
        train_set = materialize(gen, cfg.data.n_train, cfg.data.seed)
    if cfg.test_manifest:
        _, test_set = load_manifest(cfg.test_manifest)
    elif cfg.manifest:
        test_set = []
    else:
        test_set = materialize(gen, cfg.data.n_test, cfg.data.seed + 1)
    if not train_set:
        raise ValueError("training set is empty")
    return gen, train_set, test_set


def checkpoint_epochs(T: int) -> list[int]:
    return [round(k * T / (N_CHECKPOINTS - 1)) for k in range(N_CHECKPOINTS)]


def _stack(triplets, idx, attr):
    return np.stack([getattr(triplets[i], attr) for i in idx])


def _derangement(gen: np.random.Generator, n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("classical mixup needs at least two samples")
    while True:
        p = gen.permutation(n)
        if not np.any(p == np.arange(n)):
            return p


class _Calibration:
    """Kernel bandwidth and tau0 from the stored pairs, in dataset order."""

    def __init__(self, cfg, extractor, triplets):
        B = cfg.batch_size
        first = range(min(B, len(triplets)))
        self.bandwidth = featspace.median_bandwidth(
            featspace.extract(extractor, _stack(triplets, first, "real")))
        if cfg.rla.tau0 is not None:
            self.tau0 = float(cfg.rla.tau0)
            return
        s0 = cfg.rla.initial_gates().s
        ds = []
        for start in range(0, len(triplets), B):
            idx = range(start, min(start + B, len(triplets)))
            real = _stack(triplets, idx, "real")
            mixed = mixer.mix_images(real, _stack(triplets, idx, "synthetic"), s0)
            ds.append(featspace.mmd(featspace.extract(extractor, mixed),
                                    featspace.extract(extractor, real), self.bandwidth))
        self.tau0 = float(np.median(ds))


def train(cfg: TrainConfig, data=None) -> TrainResult:
    """Run the configured schedule; deterministic in ``cfg`` (and ``data``)."""
    gen_cfg, triplets, test_set = data if data is not None else load_data(cfg)
    n = len(triplets)
    channels = triplets[0].real.shape[2]
    T = cfg.epochs
    total_epochs = T + cfg.extension_epochs
    s_init, s_shuffle, s_synth, s_sched, s_cls = rng_split(RngStream(cfg.seed), 5)
    model = segnet.init_model(channels, s_init, hidden=cfg.hidden)
    shuffle = s_shuffle.generator()
    mixing = cfg.mode in MIXING_MODES

    rcfg = cfg.rla
    gates = rcfg.initial_gates()
    tau0, bandwidth, fixed_r = 0.0, 0.0, None
    extractor = real_feats = None
    if mixing:
        extractor = featspace.make_extractor(channels, seed=cfg.feature_seed)
        calib = _Calibration(cfg, extractor, triplets)
        tau0, bandwidth = calib.tau0, calib.bandwidth
        rcfg = replace(rcfg, tau0=tau0)
        log.info("calibrated bandwidth=%.6g tau0=%.6g", bandwidth, tau0)
        real_feats = featspace.extract(extractor, np.stack([t.real for t in triplets]))
        epoch_streams = rng_split(s_synth, total_epochs)
        if cfg.mode != "rla":
            fixed_r = cfg.fixed_r if cfg.fixed_r is not None else float(s_sched.generator().uniform())
    cls_gen = s_cls.generator() if cfg.mode == "classical-mixup" else None

    probe_idx = range(min(cfg.probe_size, n))
    ck_epochs = checkpoint_epochs(T)
    ck_values: dict[int, DistributionPoint] = {}

    def current_s(t):
        if cfg.mode == "rla":
            return gates.s
        if cfg.mode == "stepwise":
            return rla.fixed_schedule("stepwise", fixed_r, t, T)
        if cfg.mode == "cosine-fixed":
            return rla.fixed_schedule("cosine", fixed_r, t, T)
        return 0.0

    def record_checkpoint(epoch):
        if epoch in ck_values:
            return
        s = current_s(epoch)
        if not mixing:
            ck_values[epoch] = DistributionPoint(epoch, s, 0.0, 0.0)
            return
        real = _stack(triplets, probe_idx, "real")
        mixed = mixer.mix_images(real, _stack(triplets, probe_idx, "synthetic"), s)
        fm = featspace.extract(extractor, mixed)
        fr = real_feats[list(probe_idx)]
        ck_values[epoch] = DistributionPoint(epoch, s, featspace.centroid_distance(fm, fr),
                                             featspace.mmd(fm, fr, bandwidth))

    record_checkpoint(0)
    records: list[TrainLogRecord] = []
    t_start = time.perf_counter()
    B = cfg.batch_size
    for t in range(1, total_epochs + 1):
        perm = shuffle.permutation(n)
        synth = None
        if mixing:
            streams = rng_split(epoch_streams[t - 1], n)
            synth = [synthesize(tr.real, tr.mask, gen_cfg, streams[i])
                     for i, tr in enumerate(triplets)]
        if cls_gen is not None:
            partner = _derangement(cls_gen, n)
            lams = cls_gen.uniform(size=n)
        for b, start in enumerate(range(0, n, B)):
            idx = perm[start:start + B]
            real = _stack(triplets, idx, "real")
            masks = _stack(triplets, idx, "mask").astype(np.float64)
            if cfg.mode == "none":
                l_real, g_real = segnet.backward(model, real, masks, need_input=False)
                rec = TrainLogRecord(t, b, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, l_real, 0.0,
                                     0.0, 0.0, 0.0, l_real, 0.0)
                step = g_real
            elif cfg.mode == "classical-mixup":
                rho = rla.prior_schedules(rcfg, t)[0]
                pairs = [mixer.classical_mixup((triplets[i].real, triplets[i].mask),
                                               (triplets[partner[i]].real, triplets[partner[i]].mask),
                                               float(lams[i])) for i in idx]
                l_real, g_real = segnet.backward(model, real, masks, need_input=False)
                l_mix, g_mix = segnet.backward(model, np.stack([p[0] for p in pairs]),
                                               np.stack([p[1] for p in pairs]), need_input=False)
                total = (1.0 - rho) * l_real + rho * l_mix
                rec = TrainLogRecord(t, b, 0.0, rho, 0.0, rho, 0.0, 0.0, l_real, l_mix,
                                     0.0, 0.0, 0.0, total, 0.0)
                step = segnet.combine(g_real, 1.0 - rho, g_mix, rho)
            else:
                syn = np.stack([synth[i] for i in idx])
                if cfg.mode == "rla":
                    rho, s = gates.rho, gates.s
                else:
                    rho, s = rla.prior_schedules(rcfg, t)[0], current_s(t)
                mixed = mixer.mix_images(real, syn, s)
                l_real, g_real = segnet.backward(model, real, masks, need_input=False)
                l_mix, g_mix = segnet.backward(model, mixed, masks, need_input=cfg.mode == "rla")
                tau = rla.tau_schedule(rcfg, t)
                fr = real_feats[idx]
                want_grad = cfg.mode == "rla"
                d, fm, gd = featspace.discrepancy(extractor, mixed, fr, bandwidth, want_grad)
                lb = rla.assemble_loss(l_real, l_mix, d, t, rho, s, rcfg)
                rec = TrainLogRecord(t, b, s, rho, lb.s_prior, lb.rho_prior, d, lb.tau,
                                     l_real, l_mix, lb.penalty, lb.prior_rho, lb.prior_s,
                                     lb.total, featspace.centroid_distance(fm, fr))
                step = segnet.combine(g_real, 1.0 - rho, g_mix, rho)
                if cfg.mode == "rla":
                    mix_dot = segnet.mix_input_dot(g_mix.input, syn, real)
                    mmd_dot = segnet.mix_input_dot(gd, syn, real) if d > tau else 0.0
                    grads = rla.gate_gradients(l_real, l_mix, d, t, gates, rcfg, mix_dot, mmd_dot)
                    gates = rla.gate_step(gates, grads, rcfg.gate_lr)
            rec = replace(rec, wall_time=time.perf_counter() - t_start)
            if not math.isfinite(rec.total):
                raise TrainingDiverged(rec)
            records.append(rec)
            model = segnet.sgd_step(model, step, cfg.lr, cfg.weight_decay)
        if t in ck_epochs:
            record_checkpoint(t)
        if t == 1 or t % 10 == 0 or t == total_epochs:
            last = records[-1]
            log.info("epoch %d/%d total=%.4f s=%.4f rho=%.4f D=%.4f tau=%.4f", t,
                     total_epochs, last.total, last.s_t, last.rho_t, last.D_t, last.tau_t)
    if cfg.log_path:
        write_log_csv(records, cfg.log_path)
    return TrainResult(model, records, [ck_values[e] for e in ck_epochs], gates,
                       tau0, bandwidth, fixed_r, test_set)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def log_csv_text(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in LOG_COLUMNS])
    return buf.getvalue()


def write_log_csv(records, path) -> None:
    Path(path).write_text(log_csv_text(records))


def write_timing_json(records, path) -> None:
    """Cumulative wall time per batch; kept out of every CSV so those stay reproducible."""
    rows = [{"epoch": r.epoch, "batch": r.batch, "wall_time": round(r.wall_time, 6)} for r in records]
    Path(path).write_text(json.dumps(rows) + "\n")


def read_log_csv(path) -> list[TrainLogRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != LOG_COLUMNS:
        raise ValueError(f"{path}: missing or unexpected header")
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(LOG_COLUMNS):
            raise ValueError(f"{path}: line {i} has {len(row)} fields, expected {len(LOG_COLUMNS)}")
        vals = [int(row[0]), int(row[1])] + [float(v) for v in row[2:]]
        out.append(TrainLogRecord(*vals))
    return out


DIST_COLUMNS = ("epoch", "s", "centroid_distance", "mmd")


def write_distribution_csv(points, path) -> None:
    lines = [",".join(DIST_COLUMNS)]
    lines += [f"{p.epoch},{p.s!r},{p.centroid_distance!r},{p.mmd!r}" for p in points]
    Path(path).write_text("\n".join(lines) + "\n")


def track_distribution(run) -> list[float]:
    """Centroid-distance series at the nine checkpoints of a run.

    ``run`` is a :class:`TrainResult` or a path to its distribution CSV.
    """
    if isinstance(run, TrainResult):
        points = run.checkpoints
    else:
        with open(run, newline="") as fh:
            rows = list(csv.DictReader(fh))
        points = [DistributionPoint(int(r["epoch"]), float(r["s"]),
                                    float(r["centroid_distance"]), float(r["mmd"]))
                  for r in rows]
    if len(points) != N_CHECKPOINTS:
        raise ValueError(f"expected {N_CHECKPOINTS} checkpoints, found {len(points)}")
    return [p.centroid_distance for p in points]


def predict_mask(model: segnet.SegModel, image, threshold: float = 0.5) -> np.ndarray:
    """Threshold probabilities; exactly ``threshold`` counts as foreground."""
    return (segnet.forward(model, image) >= threshold).astype(np.uint8)


def evaluate_predictions(preds, gts) -> list[dict]:
    """Per-image metric rows followed by their mean, labelled in the ``image`` field."""
    rows = []
    for i, (p, g) in enumerate(zip(preds, gts)):
        rows.append({"image": str(i), **metrics.evaluate_pair(p, g)})
    if rows:
        mean = {c: float(np.mean([r[c] for r in rows])) for c in metrics.METRIC_COLUMNS}
        rows.append({"image": "mean", **mean})
    return rows


def evaluate(checkpoint, test, threshold: float = 0.5) -> list[dict]:
    """Metric rows for a model (or checkpoint directory) on real test images.

    ``test`` is a manifest path or a list of triplets.
    """
    model = checkpoint if isinstance(checkpoint, segnet.SegModel) else segnet.load_checkpoint(checkpoint)
    triplets = test if isinstance(test, list) else load_manifest(test)[1]
    preds = [predict_mask(model, t.real, threshold) for t in triplets]
    return evaluate_predictions(preds, [t.mask for t in triplets])


def metrics_csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image", *metrics.METRIC_COLUMNS])
    for r in rows:
        w.writerow([r["image"]] + [f"{r[c]:.6f}" for c in metrics.METRIC_COLUMNS])
    return buf.getvalue()


COMPARE_METRICS = ("miou", "pa", "recall", "precision", "dsc", "hd95", "assd",
                   "bf1_d2", "biou_r2")


@dataclass
class ComparisonTable:
    modes: list[str]
    seeds: list[int]
    # mode -> metric -> per-seed values
    values: dict[str, dict[str, list[float]]]
    runs: dict[tuple[str, int], TrainResult] = field(default_factory=dict, repr=False)

    def stats(self, mode, metric) -> tuple[float, float]:
        v = np.asarray(self.values[mode][metric])
        std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
        return float(v.mean()), std

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode"] + [f"{m}_{k}" for m in COMPARE_METRICS for k in ("mean", "std")])
        for mode in self.modes:
            row = [mode]
            for m in COMPARE_METRICS:
                mu, sd = self.stats(mode, m)
                row += [f"{mu:.4f}", f"{sd:.4f}"]
            w.writerow(row)
        return buf.getvalue()

    def text(self) -> str:
        head = ["mode"] + list(COMPARE_METRICS)
        body = [[mode] + ["{:.2f}±{:.2f}".format(*self.stats(mode, m)) for m in COMPARE_METRICS]
                for mode in self.modes]
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        lines = ["  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() for r in [head] + body]
        return "\n".join(lines) + "\n"


def schedule_compare(base: TrainConfig, modes, seeds) -> ComparisonTable:
    """Train and evaluate every (mode, seed); one table row per listed mode."""
    modes, seeds = list(modes), list(seeds)
    if not modes or not seeds:
        raise ValueError("schedule_compare needs at least one mode and one seed")
    data = load_data(base)
    if not data[2]:
        raise ValueError("schedule_compare needs a test set")
    cache: dict[tuple[str, int], TrainResult] = {}
    values: dict[str, dict[str, list[float]]] = {}
    for mode in modes:
        per_metric: dict[str, list[float]] = {m: [] for m in COMPARE_METRICS}
        for seed in seeds:
            key = (mode, seed)
            if key not in cache:
                log.info("compare: training mode=%s seed=%d", mode, seed)
                cache[key] = train(replace(base, mode=mode, seed=seed, log_path=None), data)
            mean_row = evaluate(cache[key].model, data[2])[-1]
            for m in COMPARE_METRICS:
                per_metric[m].append(mean_row[m])
        values[mode] = per_metric
    return ComparisonTable(modes, seeds, values, cache)


@dataclass
class RegimeStats:
    mean_abs: float
    variance: float
    sign_flip_rate: float
    fractional_target_rate: float
    n_draws: int
    n_pixels: int


@dataclass
class ProbeReport:
    classical: RegimeStats
    mcpmix: RegimeStats
    seeds: list[int]

    def text(self) -> str:
        lines = ["regime     mean|g|     variance    sign_flip  frac_targets"]
        for name in ("classical", "mcpmix"):
            r = getattr(self, name)
            lines.append(f"{name:<10} {r.mean_abs:.6e} {r.variance:.6e} {r.sign_flip_rate:.6f}"
                         f"   {r.fractional_target_rate:.6f}")
        return "\n".join(lines) + "\n"


def _regime_stats(series, targets) -> RegimeStats:
    g = np.concatenate(series, axis=1)  # (draws, pixels)
    y = np.concatenate(targets, axis=1)
    sign = np.sign(g)
    flips = (sign[1:] != sign[:-1]).mean()
    frac = np.mean((y > 0) & (y < 1))
    return RegimeStats(float(np.abs(g).mean()), float(g.var(axis=0).mean()), float(flips),
                       float(frac), g.shape[0], g.shape[1])


def gradient_instability_probe(manifest, seeds, draws: int = 120, anchors: int = 4,
                               warmup_epochs: int = 3, s_max: float = 0.7,
                               band: float = 2.0, model: segnet.SegModel | None = None,
                               base: TrainConfig | None = None) -> ProbeReport:
    """Per-pixel BCE logit gradients at boundary-band pixels across mixing draws.

    For each seed a few anchor samples are chosen; every draw mixes the anchor
    either with a random partner whose mask differs (classical, soft label,
    lambda ~ U(0, 1)) or with a fresh same-mask counterpart (MCPMix, hard
    label, s ~ U(0, s_max)). The scorer is a short warm-up run on real data
    unless ``model`` is given.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("probe needs at least one seed")
    if isinstance(manifest, list):
        triplets, gen_cfg = manifest, (base.data.gen if base else GenConfig())
    else:
        m, triplets = load_manifest(manifest)
        gen_cfg = GenConfig.from_dict(m["config"])
    masks = [t.mask for t in triplets]
    if len(triplets) < 2 or all(np.array_equal(masks[0], mk) for mk in masks[1:]):
        raise ValueError("probe needs at least two samples with differing masks")
    if model is None:
        cfg = replace(base or TrainConfig(), mode="none", epochs=warmup_epochs,
                      extension_epochs=0, seed=seeds[0], log_path=None)
        model = train(cfg, (gen_cfg, triplets, [])).model
    cls_g, cls_y, mcp_g, mcp_y = [], [], [], []
    for seed in seeds:
        gen = RngStream(seed, 0x9B0BE).generator()
        for a in gen.choice(len(triplets), size=min(anchors, len(triplets)), replace=False):
            ta = triplets[a]
            partners = [j for j in range(len(triplets)) if not np.array_equal(masks[j], ta.mask)]
            sel = metrics.distance_field(metrics.boundary_extract(ta.mask), *ta.mask.shape) <= band
            streams = rng_split(RngStream(seed, int(a)), draws)
            gc, yc, gm, ym = [], [], [], []
            for k in range(draws):
                tb = triplets[partners[gen.integers(len(partners))]]
                lam = float(gen.uniform())
                img, soft = mixer.classical_mixup((ta.real, ta.mask), (tb.real, tb.mask), lam)
                gc.append(segnet.bce_logit_grad(segnet.forward(model, img), soft)[sel])
                yc.append(soft[sel])
                syn = synthesize(ta.real, ta.mask, gen_cfg, streams[k])
                mixed = mixer.mcpmix(PairedTriplet(ta.real, syn, ta.mask), float(gen.uniform(0, s_max)))
                label = mixed.label.astype(np.float64)
                gm.append(segnet.bce_logit_grad(segnet.forward(model, mixed.image), label)[sel])
                ym.append(label[sel])
            cls_g.append(np.stack(gc))
            cls_y.append(np.stack(yc))
            mcp_g.append(np.stack(gm))
            mcp_y.append(np.stack(ym))
    return ProbeReport(_regime_stats(cls_g, cls_y), _regime_stats(mcp_g, mcp_y), seeds)

"""Command-line entry point: ``mcpmix <command> [options]``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command that
takes ``--out`` finishes by writing ``run_manifest.json`` there. Wall-clock
time only ever lands in that manifest and in ``timing.json``; every other
output is a pure function of the flags and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, gradcheck, report, segnet, trainloop
from .core import TensorFileError, atomic_write_text
from .synthgen import GenConfig, GenConfigError, generate_dataset, load_manifest

log = logging.getLogger("mcpmix")

MANIFEST_NAME = "run_manifest.json"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    version: str = __version__
    outputs: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def add_outputs(self, out_dir: Path, paths) -> None:
        for p in sorted(Path(x) for x in paths):
            data = p.read_bytes()
            self.outputs.append({"path": p.relative_to(out_dir).as_posix(),
                                 "sha256": hashlib.sha256(data).hexdigest(),
                                 "bytes": len(data)})

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / MANIFEST_NAME
        atomic_write_text(path, json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


# -- argument types ---------------------------------------------------------

def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def unit_float(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return v


_RANGE = re.compile(r"(-?\d+)(?:-(-?\d+))?")


def int_list(text: str) -> list[int]:
    """'1,2,3' or '0-9' (inclusive) or a mix of both."""
    out = []
    for part in text.split(","):
        m = _RANGE.fullmatch(part.strip())
        if m is None:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) is not None else lo
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {part!r}")
        out.extend(range(lo, hi + 1))
    return out


def mode_list(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in trainloop.MODES]
    if not modes or bad:
        raise argparse.ArgumentTypeError(f"unknown modes {bad}; choose from {trainloop.MODES}")
    return modes


# -- config resolution ------------------------------------------------------

# flag dest -> (section, key); section None means top-level TrainConfig
_OVERRIDES = {
    "manifest": (None, "manifest"), "test_manifest": (None, "test_manifest"),
    "epochs": (None, "epochs"), "extension_epochs": (None, "extension_epochs"),
    "batch_size": (None, "batch_size"), "lr": (None, "lr"),
    "weight_decay": (None, "weight_decay"), "mode": (None, "mode"), "seed": (None, "seed"),
    "fixed_r": (None, "fixed_r"), "feature_seed": (None, "feature_seed"),
    "tau0": ("rla", "tau0"), "mu": ("rla", "mu"), "gate_lr": ("rla", "gate_lr"),
    "s_max": ("rla", "s_max"), "rho_max": ("rla", "rho_max"),
    "lambda_rho": ("rla", "lambda_rho"), "lambda_s": ("rla", "lambda_s"),
    "n_train": ("data", "n_train"), "n_test": ("data", "n_test"), "data_seed": ("data", "seed"),
}


def resolve_config(args) -> trainloop.TrainConfig:
    """JSON config file (if any) with explicitly given flags layered on top."""
    raw: dict = {}
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
    for dest, (section, key) in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is None:
            continue
        if section is None:
            raw[key] = v
        else:
            raw.setdefault(section, {})[key] = v
    return trainloop.TrainConfig.from_dict(raw)


def _add_train_flags(p: argparse.ArgumentParser, with_mode: bool = True) -> None:
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--manifest", help="training dataset manifest (default: in-memory data)")
    p.add_argument("--test-manifest", dest="test_manifest")
    p.add_argument("--epochs", type=positive_int)
    p.add_argument("--extension-epochs", dest="extension_epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=positive_int)
    p.add_argument("--lr", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    if with_mode:
        p.add_argument("--mode", choices=trainloop.MODES)
        p.add_argument("--seed", type=int)
    p.add_argument("--fixed-r", dest="fixed_r", type=unit_float)
    p.add_argument("--feature-seed", dest="feature_seed", type=int)
    p.add_argument("--tau0", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--gate-lr", dest="gate_lr", type=float)
    p.add_argument("--s-max", dest="s_max", type=unit_float)
    p.add_argument("--rho-max", dest="rho_max", type=unit_float)
    p.add_argument("--lambda-rho", dest="lambda_rho", type=float)
    p.add_argument("--lambda-s", dest="lambda_s", type=float)
    p.add_argument("--n-train", dest="n_train", type=positive_int)
    p.add_argument("--n-test", dest="n_test", type=positive_int)
    p.add_argument("--data-seed", dest="data_seed", type=int)


# -- commands ---------------------------------------------------------------

def cmd_datagen(args, out: Path) -> tuple[RunManifest, list]:
    cfg = GenConfig(size=args.size, channels=args.channels, strength=args.strength,
                    noise=args.noise)
    try:
        cfg.validate()
    except GenConfigError as exc:
        raise UsageError(str(exc)) from exc
    manifest = generate_dataset(cfg, args.n, args.seed, out)
    files = [out / "manifest.json"] + [out / f for it in manifest["items"] for f in it.values()]
    print(f"wrote {args.n} triplets ({cfg.size}x{cfg.size}x{cfg.channels}) to {out}")
    return RunManifest("datagen", {"gen": asdict(cfg), "n": args.n}, args.seed), files


def _train_outputs(result: trainloop.TrainResult, cfg, out: Path) -> list[Path]:
    files = [out / "log.csv", out / "distribution.csv", out / "timing.json"]
    trainloop.write_log_csv(result.log, files[0])
    trainloop.write_distribution_csv(result.checkpoints, files[1])
    trainloop.write_timing_json(result.log, files[2])
    files += segnet.save_checkpoint(result.model, out / "checkpoint", cfg.seed)
    summary = {"tau0": result.tau0, "bandwidth": result.bandwidth, "fixed_r": result.fixed_r,
               "final_psi": result.gates.psi, "final_zeta": result.gates.zeta,
               "final_rho": result.gates.rho, "final_s": result.gates.s}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files.append(out / "summary.json")
    if result.test:
        rows = trainloop.evaluate(result.model, result.test)
        (out / "metrics.csv").write_text(trainloop.metrics_csv_text(rows))
        files.append(out / "metrics.csv")
        mean = rows[-1]
        print(f"test mIoU={mean['miou']:.2f} DSC={mean['dsc']:.2f} HD95={mean['hd95']:.2f}")
    return files


def cmd_train(args, out: Path):
    cfg = resolve_config(args)
    result = trainloop.train(cfg)
    last = result.log[-1]
    print(f"trained mode={cfg.mode} seed={cfg.seed} epochs={cfg.epochs}: "
          f"final total={last.total:.4f} s={last.s_t:.4f} rho={last.rho_t:.4f}")
    files = _train_outputs(result, cfg, out)
    return RunManifest("train", cfg.to_dict(), cfg.seed), files


def cmd_eval(args, out: Path):
    if (args.checkpoint is None) == (args.pred_manifest is None):
        raise UsageError("give exactly one of --checkpoint or --pred-manifest")
    _, triplets = load_manifest(args.manifest)
    if args.checkpoint is not None:
        rows = trainloop.evaluate(args.checkpoint, triplets, args.threshold)
    else:
        _, preds = load_manifest(args.pred_manifest)
        if len(preds) != len(triplets):
            raise ValueError("prediction and ground-truth manifests differ in length")
        rows = trainloop.evaluate_predictions([p.mask for p in preds], [t.mask for t in triplets])
    path = out / "metrics.csv"
    path.write_text(trainloop.metrics_csv_text(rows))
    mean = rows[-1]
    print(f"evaluated {len(triplets)} images: mIoU={mean['miou']:.2f} DSC={mean['dsc']:.2f} "
          f"HD95={mean['hd95']:.2f} B-F1@2={mean['bf1_d2']:.2f}")
    config = {"manifest": args.manifest, "checkpoint": args.checkpoint,
              "pred_manifest": args.pred_manifest, "threshold": args.threshold}
    return RunManifest("eval", config, None), [path]


def cmd_compare(args, out: Path):
    base = resolve_config(args)
    table = trainloop.schedule_compare(base, args.modes, args.seeds)
    files = [out / "compare.csv", out / "compare.txt"]
    files[0].write_text(table.csv_text())
    files[1].write_text(table.text())
    for (mode, seed), run in sorted(table.runs.items()):
        path = out / "logs" / f"{mode}_seed{seed}.csv"
        path.parent.mkdir(exist_ok=True)
        trainloop.write_log_csv(run.log, path)
        files.append(path)
    print(table.text(), end="")
    config = {"base": base.to_dict(), "modes": args.modes, "seeds": args.seeds}
    return RunManifest("compare", config, None), files


def cmd_probe(args, out: Path):
    base = resolve_config(args)
    data = base.manifest or trainloop.load_data(base)[1]
    rep = trainloop.gradient_instability_probe(data, args.seeds, draws=args.draws,
                                               anchors=args.anchors, base=base)
    files = [out / "probe.txt", out / "probe.csv"]
    files[0].write_text(rep.text())
    lines = ["regime,mean_abs,variance,sign_flip_rate,fractional_target_rate,n_draws,n_pixels"]
    for name in ("classical", "mcpmix"):
        r = getattr(rep, name)
        lines.append(f"{name},{r.mean_abs!r},{r.variance!r},{r.sign_flip_rate!r},"
                     f"{r.fractional_target_rate!r},{r.n_draws},{r.n_pixels}")
    files[1].write_text("\n".join(lines) + "\n")
    print(rep.text(), end="")
    config = {"base": base.to_dict(), "seeds": args.seeds, "draws": args.draws,
              "anchors": args.anchors}
    return RunManifest("probe", config, None), files


def cmd_gradcheck(args, out: Path | None):
    ok = True
    rows = ["seed,suite,max_rel_error,n_checked,worst,passed"]
    for seed in args.seeds:
        for res in gradcheck.run_all(seed, corrupt=args.corrupt, n_configs=args.configs):
            print(f"seed={seed} {res.line()}")
            ok &= res.passed()
            rows.append(f"{seed},{res.name},{res.max_rel_error!r},{res.n_checked},"
                        f"\"{res.worst}\",{int(res.passed())}")
    print("gradcheck PASS" if ok else "gradcheck FAIL")
    files = []
    if out is not None:
        files.append(out / "gradcheck.csv")
        files[0].write_text("\n".join(rows) + "\n")
    config = {"seeds": args.seeds, "configs": args.configs, "corrupt": args.corrupt,
              "step": gradcheck.STEP, "tol": gradcheck.TOL}
    return RunManifest("gradcheck", config, None), files, ok


def cmd_report(args, out: Path):
    files = report.render_report(args.log, out, args.distribution)
    print(f"wrote {len(files)} charts to {out}")
    config = {"log": args.log, "distribution": args.distribution}
    return RunManifest("report", config, None), files


# -- parser and dispatch ----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcpmix", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mcpmix {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("datagen", help="write a procedural paired dataset")
    d.add_argument("--out", required=True)
    d.add_argument("--n", type=positive_int, default=64)
    d.add_argument("--size", type=int, default=64)
    d.add_argument("--channels", type=positive_int, default=3)
    d.add_argument("--strength", type=unit_float, default=0.6)
    d.add_argument("--noise", type=unit_float, default=0.03)
    d.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="train one schedule and checkpoint it")
    t.add_argument("--out", required=True)
    _add_train_flags(t)

    e = sub.add_parser("eval", help="metric battery on a test manifest")
    e.add_argument("--out", required=True)
    e.add_argument("--manifest", required=True, help="ground-truth test manifest")
    e.add_argument("--checkpoint", help="checkpoint directory written by train")
    e.add_argument("--pred-manifest", dest="pred_manifest",
                   help="score this manifest's masks as predictions instead of a model")
    e.add_argument("--threshold", type=unit_float, default=0.5)

    c = sub.add_parser("compare", help="schedule comparison over modes x seeds")
    c.add_argument("--out", required=True)
    c.add_argument("--modes", type=mode_list, default=["rla", "stepwise", "cosine-fixed", "none"])
    c.add_argument("--seeds", type=int_list, default=[1, 2, 3, 4])
    _add_train_flags(c, with_mode=False)

    pr = sub.add_parser("probe", help="boundary gradient instability probe")
    pr.add_argument("--out", required=True)
    pr.add_argument("--seeds", type=int_list, default=[0, 1])
    pr.add_argument("--draws", type=positive_int, default=120)
    pr.add_argument("--anchors", type=positive_int, default=4)
    _add_train_flags(pr, with_mode=False)

    g = sub.add_parser("gradcheck", help="finite-difference checks of all gradients")
    g.add_argument("--out")
    g.add_argument("--seed", dest="seeds", type=int_list, default=[0],
                   help="seed or list/range such as 0-9")
    g.add_argument("--configs", type=positive_int, default=20,
                   help="random gate configurations per seed")
    g.add_argument("--corrupt", choices=gradcheck.SUITES, help=argparse.SUPPRESS)

    r = sub.add_parser("report", help="SVG trajectory charts from a log CSV")
    r.add_argument("--out", required=True)
    r.add_argument("--log", required=True)
    r.add_argument("--distribution", help="checkpoint CSV written by train")
    return p


_COMMANDS = {"datagen": cmd_datagen, "train": cmd_train, "eval": cmd_eval,
             "compare": cmd_compare, "probe": cmd_probe, "gradcheck": cmd_gradcheck,
             "report": cmd_report}

_RUNTIME_ERRORS = (OSError, ValueError, KeyError, TensorFileError, report.ReportError,
                   trainloop.TrainingDiverged, json.JSONDecodeError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    out = Path(args.out) if args.out else None
    start = time.perf_counter()
    ok = True
    try:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
        res = _COMMANDS[args.command](args, out)
        if len(res) == 3:
            manifest, files, ok = res
        else:
            manifest, files = res
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mcpmix {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"mcpmix {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if out is not None:
        manifest.add_outputs(out, files)
        manifest.wall_time = time.perf_counter() - start
        manifest.write(out)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line interface.

Subcommands: ``gen``, ``density``, ``train``, ``predict``, ``experiment`` and
``selftest``. Every run that writes files also writes a ``*.manifest.json``
next to them (``manifest.json`` inside a directory output) holding the fully
resolved parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import DEFAULT_K_PRIME, ClassifierModel, likelihoods, train
from .dataio import DataFormatError, Dataset, LabeledDataset, format_float, validate_csv, write_csv
from .estimator import FixedEstimator, build_srkde, default_k, srkde_with_sigmas
from .experiment import ConvergenceConfig, emit_result, run_convergence
from .neighbors import default_threads
from .selftest import run_selftest
from .synthetic import make_rng, reference_mixture, sample_mixture, standard_normal_mixture


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: Path, command: str, params: dict, seed, started: str):
    manifest = {
        "command": command,
        "params": params,
        "seed": seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _parse_point(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise CliError(f"cannot parse point {text!r}; expected comma-separated numbers") from None


def _load(path) -> Dataset:
    return validate_csv(path)


# -- gen --------------------------------------------------------------------

def cmd_gen(args) -> dict:
    if args.mixture in ("reference", "paper"):
        g = reference_mixture()
        pts = sample_mixture(g, args.n, make_rng(args.seed))
        write_csv(args.out, pts)
    elif args.mixture == "normal":
        g = standard_normal_mixture(args.m)
        pts = sample_mixture(g, args.n, make_rng(args.seed))
        write_csv(args.out, pts)
    else:
        # Two unit-covariance classes with means -sep/2 and +sep/2 on axis 1.
        rng = make_rng(args.seed)
        half = np.zeros(args.m)
        half[0] = args.separation / 2.0
        labels = rng.integers(0, 2, size=args.n)
        pts = rng.standard_normal((args.n, args.m)) + np.where(labels[:, None] == 1, half, -half)
        write_csv(args.out, pts, [f"c{lab}" for lab in labels])
        g = None
    params = {"mixture": args.mixture, "n": args.n, "m": pts.shape[1], "out": str(args.out)}
    if g is not None:
        params["mixture_spec"] = g.to_dict()
    else:
        params["separation"] = args.separation
    return params


# -- density ----------------------------------------------------------------

def cmd_density(args) -> dict:
    data = _load(args.data).points
    if args.at:
        queries = np.array([_parse_point(p) for p in args.at], dtype=float)
    elif args.points:
        queries = _load(args.points).points
    else:
        raise CliError("density needs --at or --points")
    if queries.shape[1] != data.shape[1]:
        raise CliError(f"query points have dimension {queries.shape[1]}, data has {data.shape[1]}")
    params = {"data": str(args.data), "n": len(data), "m": data.shape[1]}
    if args.srkde:
        if args.equal_sigma is not None:
            model = srkde_with_sigmas(data, args.equal_sigma)
            params.update(method="srkde", equal_sigma=args.equal_sigma)
        else:
            model = build_srkde(data, args.k, args.beta, beta0=args.beta0, threads=args.threads)
            params.update(method="srkde", k=model.k, beta=model.beta, eps_clamp=model.eps_clamp)
        params["k_prime"] = args.k_prime
        values = model(queries, args.k_prime)
    else:
        if args.sigma is not None:
            est = FixedEstimator.from_sigma(data, args.sigma)
        elif args.lam is not None:
            est = FixedEstimator(data, args.lam)
        else:
            raise CliError("density --fixed needs --lam or --sigma")
        params.update(method="fixed", lam=est.lam, sigma=est.sigma)
        values = est(queries)
    values = np.atleast_1d(values)
    rows = [",".join([*(format_float(x) for x in q), format_float(y)]) for q, y in zip(queries, values)]
    header = ",".join([*(f"x{j + 1}" for j in range(data.shape[1])), "density"])
    text = header + "\n" + "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        params["out"] = str(args.out)
    else:
        sys.stdout.write(text)
    return params


# -- train / predict --------------------------------------------------------

def cmd_train(args) -> dict:
    ds = _load(args.data)
    if not isinstance(ds, LabeledDataset):
        raise CliError(f"{args.data}: training data needs a label column")
    k = args.k if args.k is not None else default_k(min(ds.counts().values()))
    model = train(ds.points, ds.labels, k, args.beta, args.k_prime, beta0=args.beta0, threads=args.threads)
    Path(args.out).write_text(json.dumps(model.to_dict()) + "\n")
    return {
        "data": str(args.data), "k": k, "beta": args.beta, "beta0": args.beta0,
        "k_prime": args.k_prime, "classes": dict(zip(model.classes, model.counts)),
        "out": str(args.out),
    }


def cmd_predict(args) -> dict:
    try:
        model = ClassifierModel.from_dict(json.loads(Path(args.model).read_text()), verify=args.verify)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise CliError(f"cannot load model {args.model}: {exc}") from None
    ds = _load(args.data)
    if ds.m != model.m:
        raise CliError(f"{args.data}: points have dimension {ds.m}, model has {model.m}")
    lines = ["prediction," + ",".join(f"L_{c}" for c in model.classes) + ",fallback"]
    preds = []
    for v in ds.points:
        lk = likelihoods(model, v)
        preds.append(lk.best())
        lines.append(",".join([str(lk.best()), *(format_float(x) for x in lk.values), str(int(lk.fallback))]))
    text = "\n".join(lines) + "\n"
    params = {"model": str(args.model), "data": str(args.data), "verify": args.verify}
    if args.out:
        Path(args.out).write_text(text)
        params["out"] = str(args.out)
    else:
        sys.stdout.write(text)
    if isinstance(ds, LabeledDataset):
        acc = float(np.mean([p == t for p, t in zip(preds, ds.labels)]))
        print(f"accuracy {acc:.4f} ({len(preds)} points)", file=sys.stderr if not args.out else sys.stdout)
        params["accuracy"] = acc
    return params


# -- experiment / selftest --------------------------------------------------

def cmd_experiment(args) -> dict:
    if args.config:
        cfg = ConvergenceConfig.load(args.config)
    elif args.full_scale:
        cfg = ConvergenceConfig.full_scale()
    else:
        cfg = ConvergenceConfig()
    if args.seed is not None:
        cfg = ConvergenceConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_convergence(cfg, threads=args.threads)
    emit_result(res, "csv", out / "convergence.csv")
    emit_result(res, "json", out / "convergence.json")
    print(emit_result(res, "csv"), end="")
    return {"config": cfg.to_dict(), "out": str(out), "wall_time": res.wall_time}


def cmd_selftest(args) -> dict:
    results = run_selftest(args.seed or 0)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    if not all(ok for _, ok, _ in results):
        raise CliError("selftest failed")
    return {}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srkde", description="Super-radius kernel density estimation toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_required=True):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $SRKDE_THREADS or 1)")
        sp.add_argument("--out", required=out_required, type=Path)

    g = sub.add_parser("gen", help="sample a synthetic dataset to CSV")
    common(g)
    g.add_argument("--mixture", choices=["reference", "paper", "normal", "twoclass"],
                   default="reference", help="'paper' is an alias for 'reference'")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=4, help="dimension for normal/twoclass")
    g.add_argument("--separation", type=float, default=4.0, help="class mean distance for twoclass")

    d = sub.add_parser("density", help="evaluate a density estimate")
    common(d, out_required=False)
    d.add_argument("--data", required=True, type=Path)
    d.add_argument("--at", action="append", help="query point 'x1,...,xm' (repeatable)")
    d.add_argument("--points", type=Path, help="CSV of query points")
    mode = d.add_mutually_exclusive_group(required=True)
    mode.add_argument("--fixed", action="store_true")
    mode.add_argument("--srkde", action="store_true")
    d.add_argument("--lam", type=float)
    d.add_argument("--sigma", type=float)
    d.add_argument("--k", type=int)
    d.add_argument("--beta", type=float)
    d.add_argument("--beta0", type=float, default=1.0)
    d.add_argument("--k-prime", type=int, default=None)
    d.add_argument("--equal-sigma", type=float, default=None,
                   help="give every SRKDE instance this bandwidth")

    t = sub.add_parser("train", help="fit the SRKDE classifier")
    common(t)
    t.add_argument("--data", required=True, type=Path)
    t.add_argument("--k", type=int)
    t.add_argument("--beta", type=float)
    t.add_argument("--beta0", type=float, default=1.0)
    t.add_argument("--k-prime", type=int, default=DEFAULT_K_PRIME)

    pr = sub.add_parser("predict", help="classify points with a trained model")
    common(pr, out_required=False)
    pr.add_argument("--model", required=True, type=Path)
    pr.add_argument("--data", required=True, type=Path)
    pr.add_argument("--verify", action="store_true", help="recompute and check stored bandwidths")

    e = sub.add_parser("experiment", help="run the MSE convergence experiment")
    common(e)
    e.add_argument("--config", type=Path)
    e.add_argument("--full-scale", action="store_true")

    s = sub.add_parser("selftest", help="run internal consistency checks")
    s.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {
    "gen": cmd_gen, "density": cmd_density, "train": cmd_train,
    "predict": cmd_predict, "experiment": cmd_experiment, "selftest": cmd_selftest,
}


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_threads()
    if args.command == "gen" and args.seed is None:
        args.seed = 0
    started = _now()
    try:
        params = COMMANDS[args.command](args)
    except (CliError, DataFormatError, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"srkde {args.command}: error: {msg}", file=sys.stderr)
        return 1
    out = getattr(args, "out", None)
    if out is not None:
        params.setdefault("threads", getattr(args, "threads", None))
        _write_manifest(_manifest_path(Path(out)), args.command, params, getattr(args, "seed", None), started)
    return 0


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()

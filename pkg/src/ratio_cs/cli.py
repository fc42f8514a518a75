"""Command-line interface: ``ratio-cs <subcommand> ...``.

Exit codes: 0 success, 1 domain error (an error JSON is printed), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import certificates as cert
from . import harness as hs
from . import numerics as nx
from . import oracle as orc
from . import solvers as sv
from .errors import KernelTooLarge, RatioCSError
from .model import (CoefficientDistribution, ProblemInstance, SparseSignal, load_bundle,
                    random_instance, recovery_success, save_bundle)

CONDITIONS = ("nsp", "local-opt", "uniform", "robustness", "width", "kappa-conc")
TOYS = ("kernel4", "kernel4-pair", "row4")


class UsageError(Exception):
    pass


def _default_parallelism() -> int:
    env = os.environ.get("RATIO_CS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"RATIO_CS_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _toy(name: str) -> ProblemInstance:
    """Tiny reference instances.

    ``kernel4``: 3x4 matrix whose kernel is spanned by (1, 1, 1, -1), x0 = 5 e1.
    ``kernel4-pair``: same matrix, x0 = (5, 5, 0, 0).  ``row4``: A = [1 1 1 -1], x0 = 5 e1.
    """
    if name == "row4":
        A = np.array([[1.0, 1.0, 1.0, -1.0]])
        x0 = np.array([5.0, 0.0, 0.0, 0.0])
    else:
        A = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 1.0, -1.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
        x0 = np.array([5.0, 5.0, 0.0, 0.0]) if name == "kernel4-pair" else 5.0 * np.eye(4)[0]
    return ProblemInstance(A, A @ x0, SparseSignal(x0))


def _load_config(path) -> sv.SolverConfig:
    if not path:
        return sv.SolverConfig()
    return sv.SolverConfig.from_json(Path(path).read_text())


def _emit(obj, out) -> None:
    text = hs.dumps_json(obj)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(a) -> int:
    if a.toy:
        inst = _toy(a.toy)
        meta = {"toy": a.toy}
    else:
        if a.m is None or a.n is None or a.s is None:
            raise UsageError("gen needs --m, --n and --s (or --toy)")
        dist = (CoefficientDistribution.uniform_annulus() if a.dist == "annulus"
                else CoefficientDistribution.uniform_sym())
        rng = nx.seeded_rng(a.seed)
        if a.noise_rel > 0:
            inst = hs.noisy_instance(rng, a.m, a.n, a.s, dist, a.noise_rel)
        else:
            inst = random_instance(rng, a.m, a.n, a.s, dist)
        meta = {"seed": a.seed, "dist": dist.to_dict(), "noise_rel": a.noise_rel}
    save_bundle(a.out, inst, meta)
    print(f"wrote {a.out} (m={inst.m}, n={inst.n}, digest={inst.digest()})")
    return 0


def cmd_solve(a) -> int:
    try:
        method = sv.canonical_method(a.method)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    inst, meta = load_bundle(a.instance)
    cfg = _load_config(a.config)
    s = a.s if a.s is not None else meta.get("s")
    if method in ("l1l2+ss", "cosamp") and s is None:
        raise UsageError(f"{method} needs --s (or s in meta.json)")
    if a.init:
        x0 = nx.read_vector(a.init)
        if method != "l1l2":
            raise UsageError("--init is only supported for l1l2")
        res = sv.solve_l1l2(inst, cfg, x_init=x0)
        res.method = "l1l2"
    elif a.noisy:
        res = sv.solve_l1l2_noisy(inst, cfg)
    else:
        res = sv.run_method(method, inst, cfg, s=s)
    feas = float(np.linalg.norm(inst.A @ res.x - inst.b))
    d = res.to_dict(traces=True)
    d.update(ratio=sv.l1_l2(res.x) if np.any(res.x) else math.inf, feasibility=feas,
             instance=inst.digest())
    if inst.truth is not None:
        d["recovered"] = recovery_success(res.x, inst.truth, inst.m)
    _emit(d, a.out)
    print(f"method={res.method} ratio={d['ratio']:.6g} feasibility={feas:.3e} "
          f"time={res.wall_time:.3f}s termination={res.termination}",
          file=sys.stdout if a.out else sys.stderr)
    return 0


def _need(a, *names):
    missing = [f"--{nm.replace('_', '-')}" for nm in names if getattr(a, nm) is None]
    if missing:
        raise UsageError(f"--condition {a.condition} needs {', '.join(missing)}")


def cmd_certify(a) -> int:
    rng = nx.seeded_rng(a.seed)
    cond = a.condition
    if cond in ("nsp", "local-opt", "uniform", "robustness"):
        _need(a, "instance")
        inst, meta = load_bundle(a.instance)
    if cond == "nsp":
        _need(a, "s", "c")
        if a.exact:
            rep = cert.check_nsp_exact(inst.A, a.s, a.c, a.q)
        else:
            rep = cert.check_nsp_falsify(inst.A, a.s, a.c, a.q, rng, a.samples)
    elif cond == "local-opt":
        x0 = _truth_or_vector(inst, a.x)
        rep = cert.check_local_optimality(x0, inst.A, rng=rng, samples=a.samples)
    elif cond == "uniform":
        _need(a, "s")
        est = cert.kernel_ratio_minimize(inst.A, a.q, restarts=a.restarts, rng=rng)
        rep = cert.check_uniform_recovery_condition(inst.A, a.s, a.q, est)
    elif cond == "robustness":
        x0 = _truth_or_vector(inst, None)
        if a.x is not None:
            xs = nx.read_vector(a.x)
        else:
            if inst.noise_level <= 0:
                raise UsageError("robustness needs a noisy bundle or --x")
            xs = hs.robust_solution(inst, _load_config(a.config), int(np.count_nonzero(x0)))
        rep = cert.check_robustness_dichotomy(x0, xs, inst.A, alpha=a.alpha)
    elif cond == "width":
        _need(a, "n")
        est = cert.gaussian_width_l1ball(a.n, a.samples, rng)
        ok = est.mean <= est.bound + 3 * est.stderr
        rep = cert.CertificateReport("width", cert.HOLDS if ok else cert.FAILS,
                                     {"n": a.n, "samples": a.samples, "mean": est.mean,
                                      "stderr": est.stderr, "bound": est.bound})
    else:
        s_list = [int(t) for t in (a.s_list or "4,16,64,256").split(",")]
        rep = cert.kappa_concentration_experiment(rng, s_list, a.trials)
    rep.seed = a.seed
    _emit(rep.to_dict(), a.out)
    print(f"{rep.condition}: {rep.verdict}", file=sys.stdout if a.out else sys.stderr)
    return 0


def _truth_or_vector(inst, path):
    if path is not None:
        return nx.read_vector(path)
    if inst.truth is None:
        raise UsageError("bundle has no truth.vec; pass --x")
    return inst.truth.values


def cmd_oracle(a) -> int:
    inst, _ = load_bundle(a.instance)
    budget = orc.OracleBudget()
    out = {"instance": inst.digest()}
    out["sparsest"] = [float(v) for v in orc.sparsest_solution(inst, budget).values]
    try:
        land = orc.ratio_landscape(inst, budget)
    except KernelTooLarge as exc:
        out["ratio_min"] = {"skipped": str(exc)}
        _emit(out, a.out)
        return 0
    out["ratio_min"] = {"x": None if land.x is None else [float(v) for v in land.x],
                        "ratio": land.ratio, "runner_up": land.runner_up,
                        "at_infinity": land.at_infinity, "grid_ratio": land.grid_ratio,
                        "unique": land.is_unique(), "kernel_dim": land.kernel_dim}
    _emit(out, a.out)
    return 0


def cmd_experiment(a) -> int:
    if not a.spec and not a.paper_scale:
        raise UsageError("experiment needs a spec file or --paper-scale")
    d = json.loads(Path(a.spec).read_text()) if a.spec else {}
    if a.paper_scale:
        d.update(hs.PAPER_SCALE)
    spec = hs.ExperimentSpec.from_dict(d)
    if a.seed is not None:
        spec.seed = a.seed
    par = a.parallelism if a.parallelism is not None else _default_parallelism()
    out = Path(a.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise RatioCSError(f"output directory not writable: {exc}")

    def progress(*args):
        _info("progress " + " ".join(str(t) for t in args))

    recs, summary = hs.run_experiment(spec, parallelism=par, progress=progress)
    if spec.kind == "timing":
        (out / "timing.csv").write_text(hs.timing_to_csv(recs))
    elif recs:
        hs.write_records_csv(out / "records.csv", recs)
    hs.write_json(out / "summary.json", summary)
    (out / "spec.json").write_text(spec.to_json() + "\n")
    print(f"wrote {out} ({spec.kind}, {len(recs)} rows)")
    return 0


def cmd_version(a) -> int:
    print(f"ratio-cs {__version__} (kernels: {'numba' if sv._kernels.USE_NUMBA else 'numpy'})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratio-cs", description="l1/l2 sparse recovery toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance bundle")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--s", type=int)
    g.add_argument("--dist", choices=("annulus", "sym"), default="annulus")
    g.add_argument("--noise-rel", type=float, default=0.0)
    g.add_argument("--toy", choices=TOYS)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run one solver on a bundle")
    s.add_argument("instance")
    s.add_argument("--method", required=True)
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--s", type=int)
    s.add_argument("--init", help="initial vector file (l1l2 only)")
    s.add_argument("--noisy", action="store_true", help="solve over the residual ball")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--parallelism", type=int, default=1)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="evaluate a certificate")
    c.add_argument("instance", nargs="?")
    c.add_argument("--condition", required=True, choices=CONDITIONS)
    c.add_argument("--exact", action="store_true")
    c.add_argument("--s", type=int)
    c.add_argument("--c", type=float)
    c.add_argument("--q", type=float, default=1.0)
    c.add_argument("--n", type=int)
    c.add_argument("--x", help="vector file (x0 for local-opt, x* for robustness)")
    c.add_argument("--alpha", type=float)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--trials", type=int, default=20_000)
    c.add_argument("--s-list")
    c.add_argument("--config")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.add_argument("--parallelism", type=int, default=1)
    c.set_defaults(func=cmd_certify)

    o = sub.add_parser("oracle", help="brute-force ground truth for a tiny bundle")
    o.add_argument("instance")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("experiment", help="run an experiment spec")
    e.add_argument("spec", nargs="?")
    e.add_argument("--out", required=True)
    e.add_argument("--parallelism", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--paper-scale", action="store_true")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("version")
    v.set_defaults(func=cmd_version)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return a.func(a)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ratio-cs: error: {exc}", file=sys.stderr)
        return 2
    except (RatioCSError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())

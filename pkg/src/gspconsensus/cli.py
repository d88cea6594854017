"""Command-line front end.

Subcommands: ``generate``, ``design``, ``simulate``, ``verify``, ``report``.
Exit codes: 0 success, 1 usage or input error, 2 numerical or hypothesis
failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import filter as flt
from . import graph as gr
from . import simulate as sim
from . import spectral as sp
from . import uncertainty as unc
from .plot import trajectory_plots

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2
ZERO_TOL = 1e-10

DEFAULTS = {
    "seed": None,
    "out": ".",
    "config": None,
    "quiet": False,
    "graph": None,
    "generate": None,
    "eigs": None,
    "delta": None,
    "mode": unc.SHARED_EIGENVECTORS,
    "uncertainty": None,
    "dbar": None,
    "t0": None,
    "alpha": None,
    "lambda2": None,
    "target": None,
    "x0_norm2": 1.0,
    "schedule": None,
    "design": None,
    "x0": None,
    "dist": "uniform",
    "steps": None,
    "max_steps": 1000,
    "stride": 1,
    "method": "matrix",
    "linear_error": False,
    "p": None,
    "name": "graph.json",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, help="seed for every random draw")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--config", help="JSON file of option values; flags take precedence")
    p.add_argument("--quiet", action="store_true", help="suppress the console summary")
    return p


def _graph_source(p):
    p.add_argument("--graph", help="graph JSON file")
    p.add_argument("--generate", nargs="+", metavar="SPEC",
                   help="generator spec instead of a file: KIND N [P]")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    common = _common()
    parser = _Parser(prog="gspconsensus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], argument_default=argparse.SUPPRESS,
                       help="write a graph JSON file")
    g.add_argument("kind", choices=["cycle", "path", "complete", "star", "er", "erdos_renyi"])
    g.add_argument("n", type=int)
    g.add_argument("p", type=float, nargs="?", default=None, help="edge probability (er only)")
    g.add_argument("--name", help="output file name (default graph.json)")

    d = sub.add_parser("design", parents=[common], argument_default=argparse.SUPPRESS,
                       help="synthesize a gain schedule and its bound report")
    d.add_argument("kind", choices=["finite", "estimated", "unknown"])
    _graph_source(d)
    d.add_argument("--eigs", type=_floats, help="comma-separated Laplacian eigenvalues")
    d.add_argument("--delta", type=float, help="eigenvalue deviation bound")
    d.add_argument("--dbar", type=float, help="maximum degree")
    d.add_argument("--t0", type=int, help="intervals per period (unknown topology)")
    d.add_argument("--alpha", type=float, help="connectivity ratio for the refined bound")
    d.add_argument("--lambda2", type=float, help="claimed lower bound on lambda_2")
    d.add_argument("--target", type=float, help="target squared error for the period count")
    d.add_argument("--x0-norm2", type=float, dest="x0_norm2", help="||x(0)||^2 used with --target")

    s = sub.add_parser("simulate", parents=[common], argument_default=argparse.SUPPRESS,
                       help="run the closed loop and write CSV and SVG output")
    _graph_source(s)
    s.add_argument("--schedule", help="gain schedule JSON file")
    s.add_argument("--design", choices=["finite", "estimated", "unknown"],
                   help="design the schedule from the graph instead of reading one")
    s.add_argument("--dbar", type=float, help="degree bound for --design unknown (default: from graph)")
    s.add_argument("--t0", type=int, help="intervals per period for --design unknown")
    s.add_argument("--x0", help="initial state: JSON list file")
    s.add_argument("--dist", choices=["uniform", "gaussian"],
                   help="distribution of seeded random x(0)")
    s.add_argument("--steps", type=int, help="horizon T")
    s.add_argument("--target", type=float, help="stop at the first k with e(k) <= target")
    s.add_argument("--max-steps", type=int, dest="max_steps")
    s.add_argument("--stride", type=int, help="record every s-th state plus period ends")
    s.add_argument("--method", choices=["matrix", "local", "spectral"], help="simulator backend")
    s.add_argument("--delta", type=float, help="perturb the graph's Laplacian by this bound")
    s.add_argument("--mode", choices=list(unc.MODES))
    s.add_argument("--uncertainty", help="uncertainty model JSON file")
    s.add_argument("--linear-error", action="store_true", dest="linear_error",
                   help="linear instead of log scale for the error plot")

    v = sub.add_parser("verify", parents=[common], argument_default=argparse.SUPPRESS,
                       help="check filter zeros and bound hypotheses")
    _graph_source(v)
    v.add_argument("--schedule", help="gain schedule JSON file")
    v.add_argument("--delta", type=float)
    v.add_argument("--mode", choices=list(unc.MODES))
    v.add_argument("--uncertainty")
    v.add_argument("--dbar", type=float, help="degree bound for the psi check (default: from graph)")
    v.add_argument("--alpha", type=float)
    v.add_argument("--lambda2", type=float)

    r = sub.add_parser("report", parents=[common], argument_default=argparse.SUPPRESS,
                       help="write the Laplacian spectrum and graph summary")
    _graph_source(r)
    return parser


def resolve_options(argv):
    """Parse ``argv`` and merge: explicit flags > config file > defaults."""
    ns = vars(build_parser().parse_args(argv))
    opts = dict(DEFAULTS)
    cfg_path = ns.get("config")
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): val for k, val in cfg.items()})
    opts.update(ns)
    if isinstance(opts.get("eigs"), str):
        opts["eigs"] = _floats(opts["eigs"])
    return opts


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _say(opts, *lines):
    if not opts["quiet"]:
        for line in lines:
            print(line)


def _load_graph(opts, required=True):
    if opts["graph"] and opts["generate"]:
        raise UsageError("give either --graph or --generate, not both")
    if opts["graph"]:
        try:
            return gr.load_graph(opts["graph"])
        except OSError as exc:
            raise UsageError(f"cannot read graph: {exc}") from None
    if opts["generate"]:
        spec = list(opts["generate"])
        if len(spec) < 2:
            raise UsageError("--generate needs KIND N [P]")
        p = float(spec[2]) if len(spec) > 2 else None
        return gr.generate(spec[0], int(spec[1]), p, opts["seed"])
    if required:
        raise UsageError("a graph source is required (--graph or --generate)")
    return None


def _outdir(opts):
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(opts):
    if opts["kind"] in ("er", "erdos_renyi"):
        if opts["p"] is None or opts["seed"] is None:
            raise UsageError("erdos_renyi needs P and --seed")
    g = gr.generate(opts["kind"], opts["n"], opts["p"], opts["seed"])
    path = _outdir(opts) / opts["name"]
    gr.save_graph(g, path)
    lam2 = sp.laplacian_spectrum(g).algebraic_connectivity
    _say(opts,
         f"wrote {path}",
         f"N = {g.n}",
         f"edges = {len(g.edges())}",
         f"d_bar = {gr.max_degree(g):.10g}",
         f"lambda_2 = {lam2:.10g}",
         f"connected = {gr.is_connected(g)}")
    if "retries" in g.meta:
        _say(opts, f"retries = {g.meta['retries']}")
    return EXIT_OK


def _estimate_eigs(opts):
    if opts["eigs"] is not None:
        return np.sort(np.asarray(opts["eigs"], dtype=float))
    g = _load_graph(opts, required=False)
    if g is None:
        raise UsageError("need --eigs or a graph source")
    return sp.laplacian_spectrum(g).eigenvalues


def design_schedule(opts, kind, eigs=None, graph=None):
    """Return ``(schedule, BoundReport)`` for the selected construction."""
    target, x0n = opts["target"], opts["x0_norm2"]
    if kind == "finite":
        lam = eigs if eigs is not None else _estimate_eigs(opts)
        distinct = sp.distinct_nonzero_eigs(lam)
        sched = flt.design_finite_time(distinct)
        p = len(distinct)
        h = flt.filter_response(sched, np.asarray(lam[1:]), p)
        resid = float(np.max(h ** 2)) if h.size else 0.0
        report = flt.BoundReport(
            phi=resid, contractive=resid < 1,
            per_period_exponent=1 if resid <= ZERO_TOL ** 2 else None,
            checks={"filter_zeros": resid <= ZERO_TOL ** 2},
            values={"p": p, "consensus_time": p, "distinct_nonzero": distinct},
        )
        return sched, report
    if kind == "estimated":
        lam = eigs if eigs is not None else _estimate_eigs(opts)
        if lam[1] <= 0 or sp.eigen_clusters(lam)[0].size > 1:
            raise ValueError("estimated Laplacian is not connected")
        sched = flt.design_estimated_periodic(lam)
        if opts["delta"] is None:
            raise UsageError("design estimated needs --delta")
        phi = flt.phi_bound(lam, opts["delta"])
        exponent = flt.per_period_exponent(phi, target, x0n) if target is not None else None
        report = flt.BoundReport(
            phi=phi, contractive=phi < 1, per_period_exponent=exponent,
            checks={"phi_below_one": phi < 1},
            values={"delta_bar": opts["delta"], "period": sched.period},
        )
        return sched, report
    d_bar = opts["dbar"]
    if d_bar is None:
        g = graph if graph is not None else _load_graph(opts, required=False)
        if g is None:
            raise UsageError("design unknown needs --dbar (or a graph to read it from)")
        d_bar = gr.max_degree(g)
    if opts["t0"] is None:
        raise UsageError("design unknown needs --t0")
    sched = flt.design_unknown_topology(d_bar, opts["t0"])
    psi = flt.psi_bound(d_bar, opts["t0"])
    checks = {"psi_below_one": psi < 1}
    values = {"d_bar": d_bar, "t0": opts["t0"], "period": sched.period}
    phi = psi
    if opts["alpha"] is not None:
        phi = flt.varphi_alpha_bound(opts["t0"], opts["alpha"])
        checks["alpha_contractive"] = flt.varphi_alpha_contractive(opts["t0"], opts["alpha"])
        values["alpha"] = opts["alpha"]
        values["lambda2_required"] = 2 * d_bar / (opts["alpha"] * opts["t0"])
        if opts["lambda2"] is not None:
            checks["lambda2_hypothesis"] = opts["lambda2"] >= values["lambda2_required"]
    contractive = abs(phi) < 1 and all(checks.values())
    exponent = None
    if target is not None and contractive:
        exponent = flt.per_period_exponent(phi ** 2, target, x0n)
    report = flt.BoundReport(phi=phi, psi=psi, contractive=contractive,
                             per_period_exponent=exponent, checks=checks, values=values)
    return sched, report


def _check_positive(opts, *names):
    for name in names:
        if opts[name] is not None and not opts[name] > 0:
            raise UsageError(f"--{name} must be positive")


def cmd_design(opts):
    _check_positive(opts, "delta", "dbar", "t0", "alpha", "target", "x0_norm2")
    sched, report = design_schedule(opts, opts["kind"])
    out = _outdir(opts)
    flt.save_schedule(sched, out / "schedule.json")
    _dump(report.to_dict(), out / "bounds.json")
    _say(opts,
         f"provenance = {sched.provenance}",
         "gains = " + ", ".join(f"{e:.10g}" for e in sched.prefix),
         f"period = {sched.period}",
         f"phi = {report.phi:.6e}")
    if report.psi is not None:
        _say(opts, f"psi = {report.psi:.12g}")
    for name, ok in report.checks.items():
        _say(opts, f"{name}: {'ok' if ok else 'FAILED'}")
    return EXIT_OK if report.ok else EXIT_FAILURE


def _uncertainty(opts, g):
    """System matrix and model for a perturbed run, or ``(None, None, None)``."""
    if opts["uncertainty"]:
        model, seed = unc.load_model(opts["uncertainty"])
        seed = opts["seed"] if seed is None else seed
    elif opts["delta"] is not None:
        model, seed = unc.UncertaintyModel.from_graph(g, opts["delta"], opts["mode"]), opts["seed"]
    else:
        return None, None, None
    if model.mode == unc.SPECTRAL_JITTER and seed is None:
        raise UsageError("spectral_jitter perturbation needs --seed")
    return unc.perturb(model, seed), model, seed


def _initial_state(opts, n):
    if opts["x0"]:
        try:
            x0 = np.asarray(json.loads(Path(opts["x0"]).read_text()), dtype=float)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read x0: {exc}") from None
        if x0.shape != (n,):
            raise UsageError(f"x0 has shape {x0.shape}, expected ({n},)")
        return x0, {"source": opts["x0"]}
    if opts["seed"] is None:
        raise UsageError("random initial state needs --seed")
    rng = np.random.default_rng(opts["seed"])
    if opts["dist"] == "gaussian":
        x0 = rng.normal(0.0, 1.0, n)
    else:
        x0 = rng.uniform(0.0, 1.0, n)
    return x0, {"source": "random", "dist": opts["dist"], "seed": opts["seed"]}


def _schedule_for_graph(opts, g):
    lam = sp.laplacian_spectrum(g).eigenvalues
    if opts["design"] == "finite":
        return flt.design_finite_time(sp.distinct_nonzero_eigs(lam))
    if opts["design"] == "estimated":
        return flt.design_estimated_periodic(lam)
    if opts["t0"] is None:
        raise UsageError("--design unknown needs --t0")
    d_bar = opts["dbar"] if opts["dbar"] is not None else gr.max_degree(g)
    return flt.design_unknown_topology(d_bar, opts["t0"])


def cmd_simulate(opts):
    _check_positive(opts, "delta", "dbar", "t0", "target", "max_steps", "stride")
    if opts["steps"] is not None and opts["steps"] < 0:
        raise UsageError("--steps must be nonnegative")
    g = _load_graph(opts)
    if bool(opts["schedule"]) == bool(opts["design"]):
        raise UsageError("give exactly one of --schedule or --design")
    system, model, pseed = _uncertainty(opts, g)
    if opts["schedule"]:
        sched = flt.load_schedule(opts["schedule"])
    else:
        sched = _schedule_for_graph(opts, g)
    x0, x0_info = _initial_state(opts, g.n)
    if opts["steps"] is None and opts["target"] is None:
        raise UsageError("give --steps or --target")
    t_end = opts["steps"] if opts["steps"] is not None else opts["max_steps"]
    target = system if system is not None else g
    method = opts["method"]
    if method == "matrix":
        traj = sim.run_matrix(x0, sched, target, t_end, opts["stride"])
    elif method == "local":
        traj = sim.run_local(x0, sched, target, t_end, opts["stride"])
    else:
        spec = sp.eig_sym(system) if system is not None else sp.laplacian_spectrum(g)
        traj = sim.run_spectral(x0, sched, spec, t_end, opts["stride"])
    status = EXIT_OK
    if opts["steps"] is None:
        hit = np.flatnonzero(traj.errors <= opts["target"])
        if hit.size:
            cut = hit[0] + 1
            traj = sim.Trajectory(traj.steps[:cut], traj.states[:cut], traj.errors[:cut],
                                  traj.schedule, traj.graph)
        else:
            status = EXIT_FAILURE

    out = _outdir(opts)
    sim.write_trajectory_csv(traj, out / "trajectory.csv")
    states_svg, errors_svg = trajectory_plots(traj, logy=not opts["linear_error"])
    (out / "states.svg").write_text(states_svg)
    (out / "errors.svg").write_text(errors_svg)
    ends = traj.period_end_errors()
    summary = {
        "n": g.n,
        "t_end": traj.t_end,
        "method": method,
        "schedule": sched.to_dict(),
        "x0": x0_info,
        "x0_norm2": float(x0 @ x0),
        "period_end_errors": [[k, e] for k, e in ends],
        "final_error": float(traj.errors[-1]),
    }
    if model is not None:
        summary["perturbation"] = {"mode": model.mode, "delta_bar": model.delta_bar, "seed": pseed}
    _dump(summary, out / "run.json")
    _say(opts, f"wrote {out / 'trajectory.csv'}, states.svg, errors.svg, run.json",
         f"seed = {opts['seed']}")
    for k, e in ends:
        _say(opts, f"e({k}) = {e:.6e}")
    if status != EXIT_OK:
        _say(opts, f"target {opts['target']} not reached within {t_end} steps")
    return status


def cmd_verify(opts):
    g = _load_graph(opts)
    if not opts["schedule"]:
        raise UsageError("verify needs --schedule")
    sched = flt.load_schedule(opts["schedule"])
    system, model, pseed = _uncertainty(opts, g)
    spec = sp.eig_sym(system) if system is not None else sp.laplacian_spectrum(g)
    lam = spec.eigenvalues
    horizon = sched.horizon
    h = flt.filter_response(sched, lam, horizon)
    zero = np.abs(h[1:]) <= ZERO_TOL
    consensus_time = None
    for t in range(horizon + 1):
        ht = np.atleast_1d(flt.filter_response(sched, lam[1:], t))
        if np.all(np.abs(ht) <= ZERO_TOL):
            consensus_time = t
            break
    report = {
        "eigenvalues": lam.tolist(),
        "horizon": horizon,
        "filter_at_zero": flt.filter_response(sched, 0.0, horizon),
        "filter_values": h.tolist(),
        "zeros": [True] + zero.tolist(),
        "consensus_time": consensus_time,
    }
    checks = {}
    if consensus_time is not None:
        report["verdict"] = f"consensus at T = {consensus_time}"
    else:
        amp = float(np.max(np.abs(h[1:])))
        report["per_period_contraction"] = amp
        report["per_period_error_factor"] = amp ** 2
        report["verdict"] = (f"asymptotic consensus, error factor {amp ** 2:.6e} per period"
                             if sched.period is not None and amp < 1
                             else "no finite-time consensus")
    if model is not None:
        t2 = unc.check_theorem2(model, system)
        report["estimated_bound"] = t2.to_dict()
        report["perturbation"] = {"mode": model.mode, "delta_bar": model.delta_bar, "seed": pseed}
        checks.update(t2.checks)
    if opts["alpha"] is not None:
        if sched.provenance != flt.UNKNOWN_TOPOLOGY:
            raise UsageError("--alpha applies to unknown-topology schedules only")
        t0 = sched.period
        d_bar = opts["dbar"] if opts["dbar"] is not None else gr.max_degree(g)
        lam2 = opts["lambda2"] if opts["lambda2"] is not None else float(lam[1])
        required = 2 * d_bar / (opts["alpha"] * t0)
        varphi = flt.varphi_alpha_bound(t0, opts["alpha"])
        report["degree_bound"] = {
            "varphi": varphi,
            "contractive": flt.varphi_alpha_contractive(t0, opts["alpha"]),
            "lambda2": lam2,
            "lambda2_required": required,
        }
        checks["alpha_contractive"] = report["degree_bound"]["contractive"]
        checks["lambda2_hypothesis"] = lam2 >= required
    report["checks"] = checks
    _dump(report, _outdir(opts) / "verify.json")
    _say(opts, report["verdict"])
    for name, ok in checks.items():
        _say(opts, f"{name}: {'ok' if ok else 'FAILED'}")
    return EXIT_OK if all(checks.values()) else EXIT_FAILURE


def cmd_report(opts):
    g = _load_graph(opts)
    spec = sp.laplacian_spectrum(g)
    out = _outdir(opts)
    sp.save_spectrum(spec, out / "spectrum.json")
    connected = gr.is_connected(g)
    summary = {
        "n": g.n,
        "edges": len(g.edges()),
        "d_bar": gr.max_degree(g),
        "lambda_2": spec.algebraic_connectivity,
        "lambda_max": float(spec.eigenvalues[-1]),
        "connected": connected,
        "distinct_nonzero": sp.distinct_nonzero_eigs(spec) if connected else None,
    }
    _dump(summary, out / "report.json")
    _say(opts, *(f"{k} = {v}" for k, v in summary.items()))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "design": cmd_design,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None):
    try:
        opts = resolve_options(argv)
        return COMMANDS[opts["command"]](opts)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except gr.GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (UsageError, gr.GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (sp.ConvergenceError, unc.PerturbationError, ValueError) as exc:
        # remaining ValueErrors come from numerical preconditions (e.g. a disconnected estimate)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

    dnlswave solve --potential cubic --setting onsite --n 6 --beta 0.25
    dnlswave sweep --n-list 4,8,16,32 --beta 1
    dnlswave continuum --eps-list 0.8,0.4,0.2 --window 6
    dnlswave analyze out/onsite_beta1_profile.json
    dnlswave evolve out/onsite_beta0.25_profile.json --t-final 10 --dt 1e-3
    dnlswave presets [--preset fig1]

Exit status: 0 converged, 2 not converged, 1 configuration or domain error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, continuum, dynamics, export, lattice, minimizer, potential
from .errors import (ConfigError, DegenerateTail, DNLSError, NoExponentialTail,
                     NotConverged, WindowTooSmall)

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

# max_steps when the user gives none; eps runs need many small steps
DEFAULT_STEPS = {"continuum": 400_000}
SOLVE_STEPS = 5000


@dataclass
class RunConfig:
    potential: str = "cubic"
    setting: str = "onsite"
    n: int = 12
    beta: float = 1.0
    tau: float = 0.1
    max_steps: int | None = None
    residual_tol: float = 1e-10
    output_dir: str = "out"
    eps_list: tuple[float, ...] = (0.8, 0.4, 0.2, 0.1, 0.05)
    window: float = 6.0
    margin: float = 6.0
    t_final: float = 10.0
    dt: float = 1e-3
    n_list: tuple[int, ...] = (4, 8, 16, 32)
    beta_list: tuple[float, ...] | None = None
    workers: int = 1
    plots: bool = True
    explicit: frozenset = field(default_factory=frozenset, repr=False)

    def steps_for(self, command: str) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return DEFAULT_STEPS.get(command, SOLVE_STEPS)

    def settings(self) -> list[lattice.Setting]:
        if self.setting == "both":
            return [lattice.Setting.ON_SITE, lattice.Setting.INTER_SITE]
        return [lattice.Setting.parse(self.setting)]

    def betas(self) -> list[float]:
        return list(self.beta_list) if self.beta_list else [self.beta]


ALIASES = {"steps": "max_steps", "tol": "residual_tol", "out": "output_dir"}
FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "explicit"}


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(x) for x in text)
    items = [s for s in str(text).replace(" ", "").split(",") if s]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


CONVERTERS = {
    "potential": str, "setting": str, "output_dir": str,
    "n": int, "max_steps": int, "workers": int,
    "beta": float, "tau": float, "residual_tol": float, "window": float,
    "margin": float, "t_final": float, "dt": float,
    "eps_list": _floats, "beta_list": _floats,
    "n_list": lambda s: tuple(int(x) for x in _floats(s)),
    "plots": _bool,
}


def canonical_key(key: str) -> str:
    k = key.strip().replace("-", "_")
    k = ALIASES.get(k, k)
    if k not in FIELDS:
        raise ConfigError(f"unknown configuration key {key!r}")
    return k


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[canonical_key(key)] = value
    return out


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Defaults, then the config file, then command line flags."""
    merged = {**file_values, **flag_values}
    kw = {}
    for key, value in merged.items():
        key = canonical_key(key)
        try:
            kw[key] = CONVERTERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    cfg = RunConfig(**kw, explicit=frozenset(kw))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    for key in ("n", "beta", "tau", "residual_tol", "window", "t_final", "dt", "workers"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key} must be positive, got {getattr(cfg, key)}")
    if cfg.margin < 0:
        raise ConfigError("margin must be non-negative")
    if cfg.max_steps is not None and cfg.max_steps <= 0:
        raise ConfigError("steps must be positive")
    for name in ("eps_list", "n_list", "beta_list"):
        vals = getattr(cfg, name) or ()
        if any(not v > 0 or not math.isfinite(v) for v in vals):
            raise ConfigError(f"{name} entries must be positive")
    if any(b <= a for a, b in zip(cfg.n_list, cfg.n_list[1:])):
        raise ConfigError("n_list must be strictly increasing")
    if cfg.setting != "both":
        try:
            lattice.Setting.parse(cfg.setting)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# -- presets ---------------------------------------------------------------------

PRESETS = {
    "fig1": ("solve", "qualitative: convex potential, both settings, 150 steps",
             dict(potential="cubic", setting="both", beta=0.25, tau=0.1, max_steps=150, n=6)),
    "fig2": ("solve", "qualitative: convex potential, larger coupling, 600 steps",
             dict(potential="cubic", setting="both", beta_list=(1.0, 5.0), tau=0.01,
                  max_steps=600, n=12)),
    "fig3": ("solve", "qualitative: non-convex potential with plateaus, 1000 steps",
             dict(potential="doublewell", setting="both", beta_list=(0.5, 2.0), tau=0.05,
                  max_steps=1000, n=40)),
    "fig4": ("continuum", "qualitative: inter-site continuum limit, |xi| <= 6",
             dict(potential="cubic", setting="intersite", beta=1.0,
                  eps_list=(0.8, 0.4, 0.2, 0.1, 0.05), window=6.0)),
}


def apply_preset(name: str, file_values: dict, flag_values: dict) -> tuple[str, RunConfig]:
    try:
        command, _, values = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    base = {k: v for k, v in values.items()}
    merged = {**base, **file_values, **flag_values}
    if "output_dir" not in file_values and "output_dir" not in flag_values:
        merged["output_dir"] = str(Path("out") / name)
    return command, build_config({}, merged)


# -- helpers ---------------------------------------------------------------------

def _say(msg: str) -> None:
    print(msg, flush=True)


def _resolve(cfg: RunConfig) -> potential.NormalizedPotential:
    return potential.get_potential(cfg.potential)


def _tag(setting: lattice.Setting, beta: float) -> str:
    return f"{setting.value}_beta{beta:g}"


def write_psi_table(out: Path, pot, plots: bool) -> None:
    eta = np.linspace(-1.0, 1.0, 201)
    psi = pot.psi_nonlinearity(eta)
    big = pot.psi_hat(eta * eta)
    export.write_csv(out / "psi.csv", ["eta", "psi", "Psi", "F"],
                     zip(eta, psi, big, pot.F(eta)))
    if plots:
        from . import plotting
        plotting.psi_figure(out / "psi.png", eta, psi, big, title=pot.name)


def _tail_outputs(out: Path, tag: str, prof, pot, beta) -> dict | None:
    try:
        est = analysis.decay_report(prof, pot, beta)
    except (DegenerateTail, WindowTooSmall, NoExponentialTail) as exc:
        return {"kind": "decay", "available": False, "reason": str(exc)}
    export.write_csv(out / f"{tag}_tail.csv", ["j", "w", "kappa"], export.tail_rows(prof))
    doc = export.decay_document(est)
    export.write_json(out / f"{tag}_decay.json", doc)
    return doc


def _plateau_doc(prof, pot) -> dict:
    try:
        rep = analysis.plateau_diagnostics(prof, pot)
    except DNLSError as exc:
        return {"kind": "plateau", "found": False, "reason": str(exc)}
    return {
        "kind": "plateau",
        "eta_stars": list(rep.eta_stars),
        "found": rep.found,
        "plateaus": [dataclasses.asdict(pl) for pl in rep.plateaus],
        "f_at_eta_star": [float(pot.F(e)) for e in rep.eta_stars],
    }


# -- commands --------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    pot = _resolve(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    hyp = potential.check_hypotheses(pot)
    if not hyp.holds:
        _say(f"warning: hypotheses fail for {pot.name} (min F = {hyp.min_f_interior:.6g}); "
             "the flow may stop at a local minimizer")
    write_psi_table(out, pot, cfg.plots)
    flow = minimizer.FlowConfig(cfg.tau, cfg.steps_for("solve"), cfg.residual_tol)
    status = EXIT_OK
    for beta_in in cfg.betas():
        beta = beta_in * pot.beta_factor
        for setting in cfg.settings():
            res = minimizer.minimize(setting, cfg.n, pot, beta, flow)
            tag = _tag(setting, beta_in)
            extra = {"hypotheses_hold": hyp.holds}
            tail = _tail_outputs(out, tag, res.profile, pot, beta)
            extra["decay"] = tail
            if not hyp.holds:
                plateau = _plateau_doc(res.profile, pot)
                export.write_json(out / f"{tag}_plateau.json", plateau)
                extra["plateau"] = plateau
            export.write_profile_csv(out / f"{tag}_profile.csv", res.profile)
            export.write_json(out / f"{tag}_profile.json",
                              export.profile_document(res, pot.name, beta_in, extra))
            export.write_trace_csv(out / f"{tag}_trace.csv", res)
            if cfg.plots:
                from . import plotting
                j, u = res.profile.full(4)
                plotting.profile_figure(out / f"{tag}_profile.png", j, u,
                                        title=f"{setting.value}, beta={beta_in:g}")
                plotting.trace_figure(out / f"{tag}_trace.png", res.energy_trace,
                                      res.residual_trace, title=tag)
            _say(f"{setting.value} beta={beta_in:g} N={cfg.n} steps={res.steps_taken} "
                 f"residual={res.residual:.3e} energy={res.energy.total:.12g} "
                 f"strict={'yes' if res.strictly_increasing else 'no'} "
                 f"converged={'yes' if res.converged else 'no'}")
            if not res.converged:
                status = EXIT_NOT_CONVERGED
    if status == EXIT_NOT_CONVERGED:
        print(f"not converged: residual above tol={cfg.residual_tol:g} after "
              f"{flow.max_steps} steps", file=sys.stderr)
    return status


def cmd_sweep(cfg: RunConfig) -> int:
    pot = _resolve(cfg)
    out = Path(cfg.output_dir)
    flow = minimizer.FlowConfig(cfg.tau, cfg.steps_for("sweep"), cfg.residual_tol)
    status = EXIT_OK
    summary = []
    for setting in cfg.settings():
        if cfg.beta_list:
            rows = []
            for b in cfg.beta_list:
                res = minimizer.minimize(setting, cfg.n, pot, b * pot.beta_factor, flow)
                rows.append((b, res.energy.total, res.residual, int(res.converged)))
                status = status if res.converged else EXIT_NOT_CONVERGED
                _say(f"{setting.value} beta={b:g} energy={res.energy.total:.15g} "
                     f"converged={'yes' if res.converged else 'no'}")
            export.write_csv(out / f"sweep_beta_{setting.value}.csv",
                             ["beta", "energy", "residual", "converged"], rows)
            summary.append({"setting": setting.value, "kind": "beta",
                            "rows": [list(map(float, r)) for r in rows]})
            continue
        beta = cfg.beta * pot.beta_factor
        sw = minimizer.n_sweep(setting, cfg.n_list, pot, beta, flow, workers=cfg.workers)
        diffs = [""] + sw.differences
        rows = [(n, e, d, r.residual, int(r.converged))
                for n, e, d, r in zip(sw.ns, sw.energies, diffs, sw.results)]
        export.write_csv(out / f"sweep_{setting.value}.csv",
                         ["n", "energy", "difference", "residual", "converged"], rows)
        if cfg.plots:
            from . import plotting
            plotting.sweep_figure(out / f"sweep_{setting.value}.png", sw.ns, sw.energies,
                                  title=f"{setting.value}, beta={cfg.beta:g}")
        for n, e in sw.rows:
            _say(f"{setting.value} N={n} energy={e:.15g}")
        _say(f"{setting.value} monotone={'yes' if sw.monotone else 'no'}")
        summary.append({"setting": setting.value, "kind": "n", "beta": cfg.beta,
                        "ns": sw.ns, "energies": sw.energies,
                        "differences": sw.differences, "monotone": sw.monotone,
                        "converged": [r.converged for r in sw.results]})
        if not all(r.converged for r in sw.results):
            status = EXIT_NOT_CONVERGED
    export.write_json(out / "sweep.json", {"kind": "sweep", "potential": pot.name,
                                           "runs": summary})
    return status


def cmd_continuum(cfg: RunConfig) -> int:
    pot = _resolve(cfg)
    out = Path(cfg.output_dir)
    beta = cfg.beta * pot.beta_factor
    setting = cfg.settings()[0]
    limit = continuum.limit_profile(pot, beta)
    flow = minimizer.FlowConfig(cfg.tau, cfg.steps_for("continuum"), cfg.residual_tol)
    runs = continuum.eps_sweep(pot, beta, cfg.eps_list, flow, cfg.window, cfg.margin,
                               setting, workers=cfg.workers)
    xi = np.linspace(-cfg.window, cfg.window, 481)
    export.write_csv(out / "limit.csv", ["xi", "u"], zip(xi, limit(xi)))
    rows, docs = [], []
    status = EXIT_OK
    for run in runs:
        bound = continuum.energy_bound_check(run, pot, beta)
        export.write_csv(out / f"overlay_eps{run.eps:g}.csv", ["xi", "u_eps", "u_limit", "error"],
                         zip(run.positions, run.u_eps, run.u_limit,
                             np.abs(run.u_eps - run.u_limit)))
        conv = run.result.converged
        rows.append((run.eps, run.profile.n, run.sup_error_on_window, bound.f_part,
                     bound.d_eps_part, bound.total, bound.competitor_total,
                     run.result.steps_taken, int(conv)))
        docs.append({"eps": run.eps, "n": run.profile.n,
                     "sup_error": run.sup_error_on_window,
                     "f_part": bound.f_part, "d_eps_part": bound.d_eps_part,
                     "total": bound.total, "competitor_total": bound.competitor_total,
                     "below_competitor": bound.below_competitor,
                     "steps": run.result.steps_taken, "converged": conv})
        _say(f"eps={run.eps:g} N={run.profile.n} sup_error={run.sup_error_on_window:.6e} "
             f"energy={bound.total:.10g} converged={'yes' if conv else 'no'}")
        if not conv:
            status = EXIT_NOT_CONVERGED
    errs = [r.sup_error_on_window for r in runs]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    export.write_csv(out / "continuum_summary.csv",
                     ["eps", "n", "sup_error", "f_part", "d_eps_part", "total",
                      "competitor_total", "steps", "converged"], rows)
    export.write_json(out / "continuum.json", {
        "kind": "continuum", "potential": pot.name, "beta": cfg.beta,
        "setting": setting.value, "window": cfg.window, "runs": docs,
        "strictly_decreasing": decreasing})
    _say(f"sup error strictly decreasing: {'yes' if decreasing else 'no'}")
    if cfg.plots:
        from . import plotting
        plotting.overlay_figure(out / "overlay.png",
                                [(r.eps, r.positions, r.u_eps) for r in runs],
                                xi, limit(xi), title=f"beta={cfg.beta:g}")
        if len(runs) > 1:
            plotting.convergence_figure(out / "convergence.png", cfg.eps_list, errs)
    return status


def _profile_context(path: str, cfg: RunConfig):
    prof, doc = export.load_profile(path)
    name = cfg.potential if "potential" in cfg.explicit else doc.get("potential", cfg.potential)
    pot = potential.get_potential(name)
    if "beta" in cfg.explicit:
        beta = cfg.beta * pot.beta_factor
    else:
        beta = float(doc["beta"])
    stem = Path(path).name.removesuffix(".json").removesuffix("_profile")
    return prof, doc, pot, beta, stem


def cmd_analyze(path: str, cfg: RunConfig) -> int:
    prof, doc, pot, beta, stem = _profile_context(path, cfg)
    out = Path(cfg.output_dir)
    est = analysis.decay_report(prof, pot, beta)
    export.write_csv(out / f"{stem}_tail.csv", ["j", "w", "kappa"], export.tail_rows(prof))
    dec = export.decay_document(est)
    export.write_json(out / f"{stem}_decay.json", dec)
    _say(f"lambda_exact={est.lambda_exact:.12g} lambda_fit={est.lambda_fit:.12g} "
         f"relative_error={dec['relative_error']:.3e} window={est.fit_window} r2={est.fit_r2:.12f}")
    if not potential.check_hypotheses(pot).holds:
        plateau = _plateau_doc(prof, pot)
        export.write_json(out / f"{stem}_plateau.json", plateau)
        _say(f"plateau found: {'yes' if plateau['found'] else 'no'}")
    return EXIT_OK


def cmd_evolve(path: str, cfg: RunConfig) -> int:
    prof, doc, pot, beta, stem = _profile_context(path, cfg)
    out = Path(cfg.output_dir)
    state, rep = dynamics.evolve(prof, pot, beta, cfg.t_final, cfg.dt)
    export.write_csv(out / f"{stem}_dynamics.csv",
                     ["t", "max_amp_deviation", "phase_error", "h_window", "n_window"],
                     rep.trace)
    export.write_json(out / f"{stem}_dynamics.json", {
        "kind": "dynamics", "beta": beta, "t_final": cfg.t_final, "dt": cfg.dt,
        "h_window": rep.h_window, "n_window": rep.n_window,
        "h_drift": rep.h_drift, "n_drift": rep.n_drift,
        "max_amp_deviation": rep.max_amp_deviation, "phase_error": rep.phase_error})
    if cfg.plots:
        from . import plotting
        t = [row[0] for row in rep.trace]
        plotting.dynamics_figure(out / f"{stem}_dynamics.png", t,
                                 [row[1] for row in rep.trace], [row[2] for row in rep.trace],
                                 title=stem)
    _say(f"t={cfg.t_final:g} max_amp_deviation={rep.max_amp_deviation:.3e} "
         f"phase_error={rep.phase_error:.3e} h_drift={rep.h_drift:.3e} "
         f"n_drift={rep.n_drift:.3e}")
    return EXIT_OK


def cmd_presets(cfg_parts) -> int:
    file_values, flag_values, preset = cfg_parts
    if preset is None:
        for name, (command, label, values) in PRESETS.items():
            _say(f"{name}: {command} [{label}] " +
                 " ".join(f"{k}={v}" for k, v in values.items()))
        return EXIT_OK
    command, cfg = apply_preset(preset, file_values, flag_values)
    return COMMANDS[command](cfg)


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "continuum": cmd_continuum}


# -- argument parsing --------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--potential", help="cubic, power:d, doublewell or a table file")
    g.add_argument("--setting", help="onsite, intersite or both")
    g.add_argument("--n", type=str)
    g.add_argument("--beta", type=str)
    g.add_argument("--tau", type=str)
    g.add_argument("--steps", type=str)
    g.add_argument("--tol", type=str)
    g.add_argument("--out", type=str)
    g.add_argument("--eps-list", type=str)
    g.add_argument("--window", type=str)
    g.add_argument("--margin", type=str)
    g.add_argument("--n-list", type=str)
    g.add_argument("--beta-list", type=str)
    g.add_argument("--t-final", type=str)
    g.add_argument("--dt", type=str)
    g.add_argument("--workers", type=str)
    g.add_argument("--no-plots", action="store_true")
    g.add_argument("--preset", help="fig1, fig2, fig3 or fig4")

    parser = _Parser(prog="dnlswave", description="Heteroclinic lattice waves by energy minimization")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "minimize the energy from the shock profile"),
                        ("sweep", "minimum energy over N (or beta)"),
                        ("continuum", "eps-scaled lattices against the continuum limit"),
                        ("presets", "list or run the figure presets")):
        sub.add_parser(name, parents=[common], help=help_)
    for name, help_ in (("analyze", "decay and plateau analysis of a profile JSON"),
                        ("evolve", "time integration of a profile JSON")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("profile")
    return parser


FLAG_KEYS = ("potential", "setting", "n", "beta", "tau", "steps", "tol", "out", "eps_list",
             "window", "margin", "n_list", "beta_list", "t_final", "dt", "workers")


def _gather(args) -> tuple[dict, dict]:
    file_values = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        file_values = parse_config_text(text, args.config)
    flags = {canonical_key(k): getattr(args, k) for k in FLAG_KEYS
             if getattr(args, k) is not None}
    if args.no_plots:
        flags["plots"] = False
    return file_values, flags


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    file_values, flags = _gather(args)
    if args.command == "presets":
        return cmd_presets((file_values, flags, args.preset))
    if args.preset:
        command, cfg = apply_preset(args.preset, file_values, flags)
        if command != args.command:
            raise ConfigError(f"preset {args.preset} belongs to '{command}', not '{args.command}'")
        return COMMANDS[command](cfg)
    cfg = build_config(file_values, flags)
    if args.command in ("analyze", "evolve"):
        fn = cmd_analyze if args.command == "analyze" else cmd_evolve
        return fn(args.profile, cfg)
    return COMMANDS[args.command](cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (DNLSError, ValueError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

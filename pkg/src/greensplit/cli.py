"""Command-line runner: validate plans, analyze single specs, sweep families.

Plan files use the same ``key = value`` format as manifold configs::

    [plan]
    tasks = green monotone hessian splitting gh
    L = 48

    [manifold]
    n = 3
    kind = warped
    warp.id = smoothed-cone
    warp.params = 0.8 0.1

    [scales]
    radii = 0.5 1 2 4 8 16
    r = 1
    s = 4
    delta = 0.25
    gh = 1 2

    [poles]
    offcenter = 0.5          # rho[:side] tokens; the center pole is always included
    splitting = 0.5:-1 0.5:1

    [family]                 # optional: one member per comma-separated value
    key = warp.params
    values = 0.8 0.4, 0.8 0.2, 0.8 0.1, 0.8 0.05
    param = 0.4 0.2 0.1 0.05

Outputs are ``<task>_<spec-hash>.csv`` per member, ``sweep_<task>_<family-hash>.csv``
summaries for families and a MANIFEST listing every task with its status.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, GreensplitError
from .ghdist import pinching_vs_gh_sweep
from .green import field_for_pole, radial_green, uniform_estimates
from .hessian import pinching_inequality_check
from .manifold import ball_sampler, CENTER, load_spec, parse_config, validate_spec
from .monotone import monotone_profile, pinching
from .splitting import (AxisPole, PoleConfig, _check_config, orthonormalize, pole_pinchings,
                        raw_splitting, splitting_report)

TASKS = ("green", "monotone", "hessian", "splitting", "gh")


@dataclass
class RunPlan:
    manifold: dict
    tasks: tuple = TASKS
    radii: tuple = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
    r: float = 1.0
    s: float = 4.0
    delta: float = 0.25
    gh_scales: tuple = (1.0, 2.0)
    offcenter: tuple = ()  # AxisPole list
    splitting: tuple = ()
    family_key: str | None = None
    family_values: tuple = ()
    family_params: tuple = ()
    seed: int = 0
    grid_scale: float = 1.0
    L: int = 48
    n_theta: int = 128
    n_nodes: int = 16
    count: int = 16384
    gh_count: int = 256
    raw: dict = dc_field(default_factory=dict)

    @property
    def grid(self):
        g = self.grid_scale
        return dict(L=max(8, int(round(self.L * g))), n_theta=max(16, int(round(self.n_theta * g))),
                    n_nodes=max(4, int(round(self.n_nodes * g))),
                    count=max(256, int(round(self.count * g))),
                    gh_count=max(32, int(round(self.gh_count * g))))

    @property
    def grid_label(self):
        return ";".join(f"{k}={v}" for k, v in self.grid.items())

    def members(self):
        """(param, manifold mapping) per family member, or the single spec."""
        if self.family_key is None:
            return [(math.nan, dict(self.manifold))]
        out = []
        for i, val in enumerate(self.family_values):
            cfg = dict(self.manifold)
            cfg[self.family_key] = val
            p = self.family_params[i] if self.family_params else _last_number(val)
            out.append((p, cfg))
        return out

    @property
    def family_hash(self):
        text = repr(sorted(self.manifold.items())) + repr((self.family_key, self.family_values))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _last_number(text):
    try:
        return float(str(text).split()[-1])
    except (IndexError, ValueError):
        return math.nan


def _floats(section, key, text):
    try:
        return tuple(float(x) for x in str(text).replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"[{section}] {key}", f"expected numbers, got {text!r}") from None


def _poles(key, text):
    out = []
    for tok in str(text).split():
        rho, _, side = tok.partition(":")
        try:
            out.append(AxisPole(float(rho), int(side) if side else 1))
        except ValueError:
            raise ConfigError(f"[poles] {key}", f"bad pole token {tok!r}") from None
    return tuple(out)


def parse_plan(text) -> RunPlan:
    sec = parse_config(text)
    if "manifold" not in sec:
        raise ConfigError("[manifold]", "missing section")
    kw = {"manifold": sec["manifold"], "raw": sec}
    plan = sec.get("plan", {})
    if "tasks" in plan:
        tasks = tuple(plan["tasks"].replace(",", " ").split())
        bad = [t for t in tasks if t not in TASKS]
        if bad:
            raise ConfigError("[plan] tasks", f"unknown task(s) {bad}; expected a subset of {TASKS}")
        kw["tasks"] = tasks
    for key in ("seed", "L", "n_theta", "n_nodes", "count", "gh_count"):
        if key in plan:
            try:
                kw[key] = int(plan[key])
            except ValueError:
                raise ConfigError(f"[plan] {key}", f"not an integer: {plan[key]!r}") from None
    sc = sec.get("scales", {})
    if "radii" in sc:
        kw["radii"] = _floats("scales", "radii", sc["radii"])
    for key in ("r", "s", "delta"):
        if key in sc:
            kw[key] = _floats("scales", key, sc[key])[0]
    if "gh" in sc:
        kw["gh_scales"] = _floats("scales", "gh", sc["gh"])
    po = sec.get("poles", {})
    if "offcenter" in po:
        kw["offcenter"] = _poles("offcenter", po["offcenter"])
    if "splitting" in po:
        kw["splitting"] = _poles("splitting", po["splitting"])
    fam = sec.get("family")
    if fam:
        if "key" not in fam or "values" not in fam:
            raise ConfigError("[family]", "needs key and values")
        kw["family_key"] = fam["key"].lower()
        kw["family_values"] = tuple(v.strip() for v in fam["values"].split(","))
        if "param" in fam:
            params = _floats("family", "param", fam["param"])
            if len(params) != len(kw["family_values"]):
                raise ConfigError("[family] param", "length differs from values")
            kw["family_params"] = params
    return RunPlan(**kw)


def validate_plan(plan: RunPlan):
    """Check every member spec and the scale hypotheses of the requested tasks; returns specs."""
    radii = np.asarray(plan.radii)
    if radii.size < 2 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ConfigError("[scales] radii", "need at least two positive increasing radii")
    if not (plan.r > 0 and plan.s > 0 and plan.delta > 0):
        raise ConfigError("[scales]", "r, s and delta must be positive")
    if any(x.rho < 0 for x in plan.offcenter + plan.splitting):
        raise ConfigError("[poles]", "pole distances must be nonnegative")
    specs = []
    for param, cfg in plan.members():
        spec = validate_spec(load_spec(cfg))
        if "hessian" in plan.tasks and plan.s < 2 * plan.r / spec.b_inf:
            raise DomainError(f"s={plan.s:g} below 2 r / b_inf = {2 * plan.r / spec.b_inf:.6g} "
                              f"for {spec.label}")
        if "splitting" in plan.tasks:
            if len(plan.splitting) != 2:
                raise ConfigError("[poles] splitting", "need exactly two axis poles (k = 1)")
            _check_config(spec, PoleConfig(plan.r, plan.splitting))
        specs.append((param, spec))
    return specs


# ---------------------------------------------------------------------------
# per-member pipeline


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10e}"
    return x


def _pole_fields(spec, plan, grid):
    fields = [(0.0, 1, radial_green(spec))]
    for x in plan.offcenter:
        if x.rho > 0:
            fields.append((x.rho, x.side, field_for_pole(spec, x.rho, x.side, grid["L"])))
    return fields


def run_member(param, spec, plan: RunPlan, out: Path, tasks):
    """Run tasks on one spec; returns (status per task, summary rows per task)."""
    grid = plan.grid
    tag = plan.grid_label
    h = spec.hash
    status, summary = {}, {}
    fields = None
    try:
        for task in tasks:
            status[task] = "incomplete"
            if task != "gh" and fields is None:
                fields = _pole_fields(spec, plan, grid)
            path = out / f"{task}_{h}.csv"
            if task == "green":
                rows = []
                for rho, side, f in fields:
                    u = uniform_estimates(f, plan.r, count=grid["count"] // 4)
                    S = ball_sampler(spec, CENTER, plan.r, grid["count"] // 4)
                    gmax = float(np.sqrt(np.max(f.values(S.r, S.phi).grad2)))
                    tail = 0.0
                    if rho > 0:
                        ph = np.linspace(0.1, np.pi, 16)
                        tail = f.mode_tail(np.full_like(ph, rho), ph)
                    rows.append([h, tag, rho, side, spec.b_inf, gmax * spec.b_inf, u.sup_ratio,
                                 u.grad_defect, u.sup_c0, u.excluded, tail])
                _write(path, ["spec_hash", "grid", "rho", "side", "b_inf", "max_grad_times_binf",
                              "sup_b2_d2_ratio", "grad_defect", "sup_c0", "excluded",
                              "mode_tail"], rows)
            elif task == "monotone":
                rows, summ = [], []
                for rho, side, f in fields:
                    prof = monotone_profile(f, plan.radii, grid["n_theta"], grid["n_nodes"])
                    for i in range(prof.radii.size):
                        rows.append([h, tag, rho, side, prof.radii[i], prof.A[i], prof.V[i],
                                     prof.F[i], prof.errA[i], prof.errV[i]])
                    vA, vF = prof.violations()
                    p = pinching(prof, prof.radii[-2], prof.radii[-1])
                    summ.append([param, h, rho, side, vA, vF, p.s, p.t, p.W, p.F, p.errW, p.errF])
                _write(path, ["spec_hash", "grid", "rho", "side", "r", "A", "V", "F", "errA",
                              "errV"], rows)
                summary[task] = summ
            elif task == "hessian":
                rows = []
                for rho, side, f in fields:
                    chk = pinching_inequality_check(f, plan.s, plan.r, count=grid["count"],
                                                    n_theta=grid["n_theta"],
                                                    n_nodes=grid["n_nodes"])
                    for m in chk.rows:
                        rows.append([h, tag, rho, side, m.id, m.params, m.lhs, m.rhs, m.ratio,
                                     m.err, m.asserted, m.margin, m.holds])
                _write(path, ["spec_hash", "grid", "rho", "side", "inequality", "params", "lhs",
                              "rhs", "ratio", "err", "asserted", "margin", "holds"], rows)
            elif task == "splitting":
                cfg = PoleConfig(plan.r, plan.splitting)
                sf = [field_for_pole(spec, x.rho, x.side, grid["L"]) for x in cfg.poles]
                F1, _ = pole_pinchings(sf, plan.delta, grid["n_theta"], grid["n_nodes"])
                bundle = orthonormalize(raw_splitting(spec, cfg, grid["L"], grid["count"],
                                                      fields=sf))
                rep = splitting_report(bundle, [p.F for p in F1], plan.delta, spec.b_inf)
                errF = max(p.errF for p in F1)
                row = [h, tag, plan.delta, plan.r, float(rep.hess_lhs.max()), rep.gram_lhs,
                       float(rep.sup_grad.max()), float(rep.sup_lap.max()),
                       float(np.mean(rep.F_pinch)), errF, float(rep.rhs_energy.max()),
                       float(rep.rhs_pinching.max()), rep.grad_bound_ok]
                header = ["spec_hash", "grid", "delta", "r", "hess_lhs", "gram_lhs", "sup_grad",
                          "sup_lap", "F_pinch", "errF", "rhs_energy", "rhs_pinching", "grad_bound_ok"]
                _write(path, header, [row])
                summary[task] = [[param] + row]
            elif task == "gh":
                tab = pinching_vs_gh_sweep([(param, spec)], plan.gh_scales, grid["gh_count"],
                                           plan.seed, grid["n_nodes"])
                tab.write_csv(path)
                summary[task] = [[r.param, r.s, r.W, r.F, r.errW, r.errF, r.gh_ball,
                                  r.gh_annulus, r.spec_hash] for r in tab.rows]
            status[task] = "complete"
    except GreensplitError as exc:
        status["error"] = f"{type(exc).__name__}: {exc}"
    return status, summary


def _member_job(args):
    param, spec_cfg, plan, out, tasks = args
    spec = load_spec(spec_cfg)
    return spec.hash, run_member(param, spec, plan, Path(out), tasks)


SUMMARY_HEADERS = {
    "monotone": ["param", "spec_hash", "rho", "side", "violation_A", "violation_F", "s", "t",
                 "W_pinch", "F_pinch", "errW", "errF"],
    "splitting": ["param", "spec_hash", "grid", "delta", "r", "hess_lhs", "gram_lhs",
                  "sup_grad", "sup_lap", "F_pinch", "errF", "rhs_energy", "rhs_pinching",
                  "grad_bound_ok"],
    "gh": ["param", "s", "W_pinch", "F_pinch", "errW", "errF", "gh_bound_ball",
           "gh_bound_annulus", "spec_hash"],
}


def run(plan: RunPlan, out, tasks=None, jobs=1):
    """Execute a plan; returns the process exit status."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = tuple(t for t in (tasks or plan.tasks))
    manifest = [f"started {time.strftime('%Y-%m-%dT%H:%M:%S')}", f"seed {plan.seed}",
                f"grid {plan.grid_label}", f"tasks {' '.join(tasks)}"]
    try:
        specs = validate_plan(replace(plan, tasks=tasks))
    except GreensplitError as exc:
        _finish(out, manifest + [f"validation failed: {exc}"])
        print(f"error: {exc}", file=sys.stderr)
        return 2
    members = [(p, cfg) for p, cfg in plan.members()]
    jobs_args = [(p, cfg, plan, str(out), tasks) for p, cfg in members]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_member_job, jobs_args))
    else:
        results = [(spec.hash, run_member(p, spec, plan, out, tasks)) for p, spec in specs]
    failed = False
    summaries = {t: [] for t in SUMMARY_HEADERS}
    for (param, _), (h, (status, summ)) in zip(members, results):
        for t in tasks:
            manifest.append(f"{t} {h} param={_fmt(param)} {status.get(t, 'incomplete')}")
        if "error" in status:
            failed = True
            manifest.append(f"error {h}: {status['error']}")
            print(f"error ({h}): {status['error']}", file=sys.stderr)
        for t, rows in summ.items():
            summaries[t].extend(rows)
    if plan.family_key is not None:
        for t, rows in summaries.items():
            if t in tasks and rows:
                _write(out / f"sweep_{t}_{plan.family_hash}.csv", SUMMARY_HEADERS[t], rows)
    _finish(out, manifest)
    return 1 if failed else 0


def _finish(out, lines):
    lines = lines + [f"finished {time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    (Path(out) / "MANIFEST").write_text("\n".join(lines) + "\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="greensplit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("validate", "check a plan without solving"),
                        ("analyze", "run the plan's tasks on its spec"),
                        ("sweep", "run the plan's tasks over its family"),
                        ("splitting", "run only the splitting task"),
                        ("gh", "run only the GH task")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--plan", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid-scale", type=float, default=1.0)
        p.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        plan = parse_plan(args.plan.read_text())
    except OSError as exc:
        print(f"error: cannot read plan: {exc}", file=sys.stderr)
        return 2
    except GreensplitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
            return 2
        plan.seed = args.seed
    if not args.grid_scale > 0:
        print("error: grid scale must be positive", file=sys.stderr)
        return 2
    plan.grid_scale = args.grid_scale
    if args.command == "validate":
        try:
            specs = validate_plan(plan)
        except GreensplitError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for p, spec in specs:
            print(f"ok {spec.hash} {spec.label} b_inf={spec.b_inf:.6g}")
        return 0
    if args.command == "analyze" and plan.family_key is not None:
        print("error: plan has a [family] section; use 'sweep'", file=sys.stderr)
        return 2
    if args.command == "sweep" and plan.family_key is None:
        print("error: plan has no [family] section", file=sys.stderr)
        return 2
    tasks = {"splitting": ("splitting",), "gh": ("gh",)}.get(args.command)
    return run(plan, args.out, tasks, args.jobs)


if __name__ == "__main__":
    sys.exit(main())

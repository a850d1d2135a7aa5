"""Command-line front end: load a domain config, run one task, write JSON and CSV.

    hardy-spectral <task> --config <file|corpus name> [--out DIR] [--seed N] [--h H]
                   [--lambda L] [--theta T] [--rho R ...] [--gamma G] [--mu M] ...

Exit status: 0 when every evaluated bound passes, 1 when one fails or a
numerical step breaks down, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from hardy_spectral import __version__
from hardy_spectral.geometry import Domain, DomainError, domain_from_config
from hardy_spectral.hardy_field import delta_field, superlevel_E, write_field_csv
from hardy_spectral.measure import DEFAULT_SAMPLES, domain_volume, rho_theta
from hardy_spectral.packing import lattice_variant, rozenblum_extract, verify_packing, write_packing
from hardy_spectral.quadrature import sphere_rule
from hardy_spectral.reports import BoundReport, dumps
from hardy_spectral.spectral import (
    SolverError,
    assemble,
    count_leq,
    eigenvalues,
    eigenvalues_covering,
    floss_rhs,
    hardy_family_check,
    lambda_min,
    lieb_bound,
    remark2_witness_check,
    riesz_bound_rhs_2d,
    riesz_mean,
    weyl_prediction,
)

TASKS = ("delta", "hardy-check", "lieb", "rho-theta", "spectrum", "count", "riesz", "floss", "rozenblum", "report")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULTS = {
    "h": None,
    "n": None,
    "lambda": None,
    "theta": 0.5,
    "gamma": 1.0,
    "mu": None,
    "rho": None,
    "rho_grid": None,
    "lieb_points": 20,
    "samples": DEFAULT_SAMPLES,
    "packing_samples": 10_000,
    "k": 20,
    "eigenfunctions": 5,
    "functions": 20,
    "constant": None,
    "riesz_constant": None,
}

# parameters each task cannot run without
REQUIRED = {
    "delta": ("h",),
    "hardy-check": ("h",),
    "lieb": ("h",),
    "rho-theta": ("rho_grid",),
    "spectrum": ("h",),
    "count": ("h", "lambda"),
    "riesz": ("h", "lambda"),
    "floss": ("h", "lambda"),
    "rozenblum": ("h", "lambda"),
    "report": ("h", "lambda", "rho_grid"),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    task: str
    domain: dict
    params: dict
    seed: int = 0
    out: Path = Path(".")
    source: str = ""
    name: str = "domain"
    _dom: Domain | None = field(default=None, repr=False)

    @property
    def dom(self) -> Domain:
        if self._dom is None:
            self._dom = domain_from_config(self.domain, name=self.name)
        return self._dom

    def get(self, key):
        return self.params.get(key, DEFAULTS.get(key))


def _read_config(ref: str) -> tuple[dict, str]:
    path = Path(ref)
    if not path.exists():
        stem = ref[len("corpus:"):] if ref.startswith("corpus:") else ref
        packaged = resources.files("hardy_spectral") / "corpus" / f"{stem}.json"
        if not packaged.is_file():
            raise ConfigError(f"config file {ref!r} not found (and no corpus domain of that name)")
        text, source = packaged.read_text(), f"corpus:{stem}"
    else:
        text, source = path.read_text(), str(path)
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    return cfg, source


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg, source = _read_config(args.config)
    domain = cfg.get("domain", cfg)
    if not isinstance(domain, dict):
        raise ConfigError("field 'domain' must be an object")
    params = dict(cfg.get("params", {}))
    overrides = {"h": args.h, "n": args.n, "lambda": args.lam, "theta": args.theta, "gamma": args.gamma,
                 "mu": args.mu, "rho": args.rho, "samples": args.samples, "k": args.k,
                 "constant": args.constant, "functions": args.functions}
    if args.rho_grid is not None:
        overrides["rho_grid"] = args.rho_grid
    params.update({k: v for k, v in overrides.items() if v is not None})
    seed = args.seed if args.seed is not None else int(cfg.get("seed", params.pop("seed", 0)))
    params.pop("seed", None)
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    run = RunConfig(task=args.task, domain=domain, params=params, seed=seed, out=Path(args.out), source=source,
                    name=str(domain.get("name", Path(source).stem)))
    _validate(run)
    return run


def _validate(run: RunConfig) -> None:
    run.dom  # parses the geometry; DomainError names the bad field
    missing = [k for k in REQUIRED[run.task] if run.get(k) is None]
    if run.task == "lieb" and run.get("rho") is None and run.get("rho_grid") is None and not run.dom.has_window:
        missing.append("rho")
    if missing:
        raise ConfigError(f"task {run.task!r} needs parameter(s): {', '.join(missing)}")
    for key in ("h", "lambda", "mu", "samples"):
        v = run.get(key)
        if v is not None and not v > 0:
            raise ConfigError(f"parameter {key!r} must be positive, got {v}")
    theta = run.get("theta")
    if not 0 < theta <= 1:
        raise ConfigError(f"parameter 'theta' must lie in (0, 1], got {theta}")


def rho_values(spec) -> np.ndarray:
    """[start, stop, step] (inclusive stop) or an explicit list of 4+ values."""
    spec = [float(v) for v in spec]
    if len(spec) == 3 and spec[2] < spec[1] - spec[0]:
        start, stop, step = spec
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 12)
    return np.asarray(spec)


def lieb_rhos(run: RunConfig) -> np.ndarray:
    if run.get("rho") is not None:
        return np.asarray(run.get("rho"), dtype=float)
    dom = run.dom
    return np.geomspace(dom.diam / 40, dom.diam / 2, int(run.get("lieb_points")))


def _rule(run: RunConfig):
    n = run.get("n")
    return None if n is None else sphere_rule(run.dom.dim, int(n))


def _mu(run: RunConfig) -> float:
    return run.get("mu") if run.get("mu") is not None else 2.0 * run.get("lambda")


# ---------------------------------------------------------------------------
# Tasks. Each returns (payload, reports) and writes its own CSVs.
# ---------------------------------------------------------------------------


def _field(run: RunConfig, h: float | None = None):
    return delta_field(run.dom, run.get("h") if h is None else h, rule=_rule(run))


def task_delta(run: RunConfig, fld=None):
    fld = fld or _field(run)
    write_field_csv(fld, run.out / "delta.csv")
    _, vals = fld.interior()
    payload = {"interior_points": fld.interior_count, "rule_size": fld.rule.n, "quadrature_error": fld.quadrature_error,
               "delta_max": float(vals.max()) if vals.size else math.nan,
               "delta_min": float(vals.min()) if vals.size else math.nan, "csv": "delta.csv"}
    return payload, []


def task_hardy(run: RunConfig, fld=None):
    h = run.get("h")
    fld, fld2 = fld or _field(run), _field(run, h / 2)
    reps = hardy_family_check(run.dom, fld, fld2, n_eigen=int(run.get("eigenfunctions")),
                              n_random=int(run.get("functions")), seed=run.seed)
    return {"h": h, "h_half": h / 2}, reps


def task_lieb(run: RunConfig):
    h = run.get("h")
    lam1 = lambda_min(run.dom, h)
    reps = [lieb_bound(run.dom, float(r), lam1=lam1, h=h, samples=int(run.get("samples")), seed=run.seed)
            for r in lieb_rhos(run)]
    ratios = [r.bound_value / lam1 for r in reps]
    return {"lambda1": lam1, "max_bound_over_lambda1": max(ratios)}, reps


def task_rho_theta(run: RunConfig):
    rt = rho_theta(run.dom, run.get("theta"), rho_values(run.get("rho_grid")),
                   samples=int(run.get("samples")), seed=run.seed)
    return rt.to_dict(), []


def _spectrum(run: RunConfig, lam: float | None = None, vectors: bool = False):
    opr = assemble(run.dom, run.get("h"))
    if lam is None:
        return eigenvalues(opr, min(int(run.get("k")), opr.size), vectors=vectors)
    return eigenvalues_covering(opr, lam, vectors=vectors)


def _write_spectrum(run: RunConfig, res) -> str:
    with open(run.out / "spectrum.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, v in enumerate(res.eigenvalues, start=1):
            writer.writerow([i, f"{v:.12g}"])
    return "spectrum.csv"


def task_spectrum(run: RunConfig):
    res = _spectrum(run)
    return {"eigenvalues": res.eigenvalues, "max_residual": float(res.residuals.max()), "unknowns": res.opr.size,
            "csv": _write_spectrum(run, res)}, []


def _count_payload(run: RunConfig, res) -> dict:
    lam = run.get("lambda")
    vol, vol_err = domain_volume(run.dom, seed=run.seed)
    return {"lambda": lam, "count": count_leq(res, lam), "weyl": weyl_prediction(run.dom, lam, vol),
            "volume": vol, "volume_stderr": vol_err}


def task_count(run: RunConfig):
    res = _spectrum(run, run.get("lambda"))
    out = _count_payload(run, res)
    out["csv"] = _write_spectrum(run, res)
    return out, []


def task_riesz(run: RunConfig):
    mu, gamma = _mu(run), run.get("gamma")
    res = _spectrum(run, mu)
    payload = {"mu": mu, "gamma": gamma, "riesz_mean": riesz_mean(res, mu, gamma)}
    reps = []
    if run.dom.dim == 2:
        fld = _field(run)
        reps.append(riesz_bound_rhs_2d(fld, mu, gamma, constant=run.get("riesz_constant"), res=res,
                                       mu_factor=mu / run.get("lambda")))
    return payload, reps


def task_floss(run: RunConfig):
    lam = run.get("lambda")
    res = _spectrum(run, lam)
    fld = _field(run)
    return {"lambda": lam}, [floss_rhs(fld, lam, constant=run.get("constant"), res=res)]


def _packing_reports(run: RunConfig, fld, res):
    lam, theta = run.get("lambda"), run.get("theta")
    samples = int(run.get("packing_samples"))
    pk = rozenblum_extract(run.dom, fld, lam, theta, samples=samples, seed=run.seed)
    rep = verify_packing(pk, run.dom, res, fld)
    write_packing(pk, run.out / "packing.csv", run.out / "packing.json", rep)
    lv = lattice_variant(run.dom, fld, lam, theta, samples=samples, seed=run.seed)
    rep_lattice = verify_packing(lv, run.dom, res, fld)
    write_packing(lv, run.out / "packing_lattice.csv", run.out / "packing_lattice.json", rep_lattice)
    payload = {"E_points": len(superlevel_E(fld, lam)), "M": pk.M, "M_lattice": lv.M, "rho": pk.radius,
               "csv": ["packing.csv", "packing_lattice.csv"]}
    return payload, [rep, rep_lattice]


def task_rozenblum(run: RunConfig):
    res = _spectrum(run, run.get("lambda"))
    return _packing_reports(run, _field(run), res)


def report_all(run: RunConfig):
    """Every task on one domain; one section per task with its own status."""
    dom, h, lam = run.dom, run.get("h"), run.get("lambda")
    if not dom.grid(h).mask.any():
        raise DomainError("the domain has no grid point inside it at this h")
    sections: dict[str, dict] = {}
    reports: list[BoundReport] = []

    def section(name, fn):
        try:
            payload, reps = fn()
        except (SolverError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            sections[name] = {"status": "error", "error": f"{_origin(exc)}: {exc}"}
            return None
        reports.extend(reps)
        verdicts = [r.passed for r in reps if r.passed is not None]
        status = "fail" if False in verdicts else "pass" if verdicts else "info"
        sections[name] = {"status": status, "result": payload, "reports": [r.to_dict() for r in reps]}
        return payload

    fld = _field(run)
    section("delta", lambda: task_delta(run, fld))
    section("hardy", lambda: task_hardy(run, fld))
    section("lieb", lambda: task_lieb(run))
    section("rho_theta", lambda: task_rho_theta(run))
    mu = _mu(run)
    holder = {}

    def spectrum():
        holder["res"] = res = _spectrum(run, max(lam, mu), vectors=True)
        payload = {"eigenvalues": res.eigenvalues, "max_residual": float(res.residuals.max()),
                   "unknowns": res.opr.size, "csv": _write_spectrum(run, res)}
        reps = []
        if res.opr.grid.same_as(fld.grid):
            reps = [remark2_witness_check(dom, fld, res, j) for j in range(1, min(5, res.k) + 1)]
        return payload, reps

    section("spectrum", spectrum)
    if "res" in holder:
        res = holder["res"]
        section("count", lambda: (_count_payload(run, res), []))
        section("floss", lambda: ({"lambda": lam}, [floss_rhs(fld, lam, constant=run.get("constant"), res=res)]))
        if dom.dim == 2:
            section("riesz", lambda: ({"mu": mu, "gamma": run.get("gamma")},
                                      [riesz_bound_rhs_2d(fld, mu, run.get("gamma"),
                                                          constant=run.get("riesz_constant"), res=res,
                                                          mu_factor=mu / lam)]))
        section("rozenblum", lambda: _packing_reports(run, fld, res))
    return {"sections": sections}, reports


HANDLERS = {
    "delta": task_delta,
    "hardy-check": task_hardy,
    "lieb": task_lieb,
    "rho-theta": task_rho_theta,
    "spectrum": task_spectrum,
    "count": task_count,
    "riesz": task_riesz,
    "floss": task_floss,
    "rozenblum": task_rozenblum,
    "report": report_all,
}


def run(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    payload, reports = HANDLERS[cfg.task](cfg)
    verdicts = [r.passed for r in reports if r.passed is not None]
    if cfg.task == "report":
        failed = any(s["status"] in ("fail", "error") for s in payload["sections"].values())
    else:
        failed = False in verdicts
    doc = {
        # the only run-dependent fields; mask this object when diffing reports
        "header": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                   "elapsed_s": round(time.perf_counter() - start, 1)},
        "version": __version__,
        "task": cfg.task,
        "config": cfg.source,
        "domain": cfg.domain,
        "domain_digest": cfg.dom.digest(),
        "seed": cfg.seed,
        "params": cfg.params,
        "result": payload,
        "reports": [r.to_dict() for r in reports] if cfg.task != "report" else None,
        "status": "fail" if failed else "pass",
    }
    name = "report.json" if cfg.task == "report" else f"{cfg.task}.json"
    (cfg.out / name).write_text(dumps(doc))
    for r in reports:
        print(r.summary())
    print(f"{cfg.task}: {'FAIL' if failed else 'ok'} -> {cfg.out / name}")
    return EXIT_FAIL if failed else EXIT_OK


def mask_header(text: str) -> str:
    """Blank the run-dependent header so two report files can be compared byte for byte."""
    doc = json.loads(text)
    doc["header"] = None
    return dumps(doc)


def _origin(exc: BaseException) -> str:
    """Module of the innermost traceback frame."""
    tb = exc.__traceback__
    while tb is not None and tb.tb_next is not None:
        tb = tb.tb_next
    return tb.tb_frame.f_globals.get("__name__", "?") if tb is not None else "?"


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardy-spectral", description=__doc__.splitlines()[0])
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", required=True, help="JSON config file, or a corpus domain name (e.g. square)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--h", type=float, help="grid spacing")
    p.add_argument("--n", type=int, help="sphere rule size")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--rho", type=float, nargs="+", help="explicit rho values for the Lieb sweep")
    p.add_argument("--rho-grid", type=float, nargs="+", help="start stop step for the rho_theta scan")
    p.add_argument("--samples", type=int)
    p.add_argument("--k", type=int, help="number of eigenvalues for 'spectrum'")
    p.add_argument("--functions", type=int, help="random test functions for 'hardy-check'")
    p.add_argument("--constant", type=float, help="value of L_d for 'floss'")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        return run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"error in hardy_spectral.spectral: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error in {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

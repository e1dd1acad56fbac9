"""Command-line front end.

Subcommands: construct, verify, growth, render, dimension, orbit.  Every
output embeds the full run configuration and a format version and carries no
timestamps, so re-running a command with the same configuration reproduces
its outputs byte for byte.

Exit codes: 0 success, 1 check failures, 2 configuration or validation
errors, 3 degenerate data (empty mask, too few scales).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from . import checks as chk
from . import dynamics as dyn
from .builder import FORMAT_VERSION, Construction, SequenceRule, build
from .errors import DegenerateFit, EmptySet, OutOfRange, TranscendError, ValidationFailure
from .result import FAIL, SKIPPED
from .seedpoly import PolySpec, make_head

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3


@dataclass
class RunConfig:
    roots: List[float] = field(default_factory=lambda: [1.0])
    lam: float = 10.0
    N: int = 4
    R: Optional[float] = None
    n_kind: str = "constant"
    n_param: float = 8.0
    l_kind: str = "one"
    depth: int = 5
    seed: int = chk.DEFAULT_SEED
    samples: int = 4096
    b_samples: int = 1000
    window: str = "a1"
    res: List[int] = field(default_factory=lambda: [512, 512])
    budget: int = dyn.DEFAULT_BUDGET
    min_exp: int = 3
    max_exp: Optional[int] = None
    z0: List[float] = field(default_factory=lambda: [0.0, 0.0])
    out: str = "."
    construction: Optional[str] = None
    strict_no_skip: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out")  # where files go does not affect their content
        return d

    def rule(self) -> SequenceRule:
        return SequenceRule(self.n_kind, self.n_param, self.l_kind)

    def parsed_window(self, c: Construction) -> dyn.Window:
        if self.window == "a1":
            return dyn.a1_window(c)
        parts = [float(x) for x in self.window.split(",")]
        if len(parts) != 4:
            raise ValueError("window must be 'a1' or 're,im,width,height'")
        return dyn.Window(complex(parts[0], parts[1]), parts[2], parts[3])


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _floats(s: str) -> List[float]:
    return [float(x) for x in s.replace(" ", "").split(",") if x]


def _res(s: str) -> List[int]:
    s = str(s).lower()
    if "x" in s:
        a, b = s.split("x")
        return [int(a), int(b)]
    return [int(s), int(s)]


_CONVERT = {
    "roots": _floats, "spec_roots": _floats, "lam": float, "lambda": float, "N": int,
    "R": float, "n_kind": str, "n_param": float, "l_kind": str, "lrule": str,
    "depth": int, "seed": lambda x: int(str(x), 0), "samples": int, "b_samples": int,
    "window": str, "res": _res, "budget": int, "min_exp": int, "max_exp": int,
    "z0": _floats, "out": str, "construction": str,
    "strict_no_skip": lambda x: str(x).strip().lower() in ("1", "true", "yes", "on"),
}
_ALIAS = {"spec_roots": "roots", "lambda": "lam", "lrule": "l_kind"}


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value")
            k, v = (x.strip() for x in line.split("=", 1))
            k = k.replace("-", "_")
            if k in ("npow", "nconst", "nlogpow", "ntower"):
                out.update(_rule_from_flag(k, v))
                continue
            if k not in _CONVERT:
                raise ValueError(f"{path}:{ln}: unknown key {k!r}")
            out[_ALIAS.get(k, k)] = _CONVERT[k](v)
    return out


def _rule_from_flag(name: str, value) -> dict:
    kind = {"npow": "power", "nconst": "constant", "nlogpow": "logpower", "ntower": "tower"}[name]
    if kind == "tower":
        return {"n_kind": kind, "n_param": 0.0}
    return {"n_kind": kind, "n_param": float(value)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transcend", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("construction")
    g.add_argument("--config", help="flat key=value file; flags override it")
    g.add_argument("--spec-roots", dest="roots", type=_floats, help="comma-separated a_i")
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--N", dest="N", type=int)
    g.add_argument("--R", dest="R", type=float, help="override the leading-term radius")
    rule = g.add_mutually_exclusive_group()
    rule.add_argument("--nconst", type=float, metavar="C", help="n_k = C")
    rule.add_argument("--npow", type=float, metavar="S", help="n_k = floor(R_k^S)")
    rule.add_argument("--ntower", action="store_true", help="n_k = floor(R_k)^k")
    rule.add_argument("--nlogpow", type=float, metavar="S", help="n_k = floor((log R_k)^S)")
    g.add_argument("--lrule", dest="l_kind", choices=["one", "maxlog"])
    g.add_argument("--depth", type=int)
    g.add_argument("--construction", help="load a construction JSON instead of building")
    s = common.add_argument_group("sampling and output")
    s.add_argument("--seed", type=lambda x: int(x, 0))
    s.add_argument("--samples", type=int)
    s.add_argument("--b-samples", dest="b_samples", type=int)
    s.add_argument("--window", help="'a1' or re,im,width,height")
    s.add_argument("--res", type=_res, help="N or NXxNY")
    s.add_argument("--budget", type=int)
    s.add_argument("--min-exp", dest="min_exp", type=int)
    s.add_argument("--max-exp", dest="max_exp", type=int)
    s.add_argument("--z0", type=_floats, help="re,im for the orbit command")
    s.add_argument("--out", help="output directory")
    s.add_argument("--strict-no-skip", dest="strict_no_skip", action="store_true", default=None)
    for name, hlp in (("construct", "build the radius ladder"), ("verify", "run the check suite"),
                      ("growth", "order-of-growth table"), ("render", "escape-class image"),
                      ("dimension", "render, mask and box-count"), ("orbit", "classify one orbit")):
        sub.add_parser(name, parents=[common], help=hlp)
    return p


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    vals = {}
    if ns.config:
        vals.update(read_config_file(ns.config))
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            vals[f.name] = v
    if ns.nconst is not None:
        vals.update(_rule_from_flag("nconst", ns.nconst))
    elif ns.npow is not None:
        vals.update(_rule_from_flag("npow", ns.npow))
    elif ns.ntower:
        vals.update(_rule_from_flag("ntower", 0))
    elif ns.nlogpow is not None:
        vals.update(_rule_from_flag("nlogpow", ns.nlogpow))
    return RunConfig(**vals)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _construction(cfg: RunConfig) -> Construction:
    if cfg.construction:
        with open(cfg.construction) as fh:
            return Construction.from_json(json.load(fh))
    spec = PolySpec(cfg.roots)
    head = make_head(spec, cfg.lam, cfg.N, cfg.R)
    return build(spec, head, cfg.rule(), cfg.depth, samples=cfg.samples)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _provenance(cfg: RunConfig) -> str:
    return json.dumps({"format_version": FORMAT_VERSION, "config": cfg.to_json()}, sort_keys=True)


def ledger_table(c: Construction) -> str:
    lines = [f"{'k':>3}  {'log R_k':>24}  {'n_k':>26}  {'l_k':>6}  {'m_k':>26}"]
    for lv in c.levels:
        lines.append(f"{lv.k:>3}  {lv.logR:>24.17g}  {str(lv.n):>26}  {lv.l:>6}  {str(lv.m_k):>26}")
    nxt = "unknown (capped)" if c.logR_next is None else f"{c.logR_next:.17g}"
    lines.append(f"log R_{c.K + 1} = {nxt}")
    return "\n".join(lines)


def cmd_construct(cfg: RunConfig) -> int:
    c = _construction(cfg)
    doc = c.to_json()
    doc["config"] = cfg.to_json()
    with open(_path(cfg, "construction.json"), "w") as fh:
        fh.write(_dump(doc))
    print(ledger_table(c))
    if c.capped:
        print(f"capped: construction stopped at depth {c.K}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    c = _construction(cfg)
    results = chk.run_suite(c, cfg.samples, cfg.b_samples, cfg.seed)
    meta = {"config": cfg.to_json(), "depth": c.K, "capped": c.capped,
            "rule": c.rule.describe(), "seed": cfg.seed, "samples": cfg.samples,
            "b_samples": cfg.b_samples}
    with open(_path(cfg, "report.json"), "w") as fh:
        fh.write(chk.report_json(results, meta))
    print(chk.format_table(results))
    summ = chk.summarize(results)
    print(f"pass {summ['pass']}  fail {summ['fail']}  skipped {summ['skipped']}")
    bad = [r for r in results if r.verdict == FAIL]
    if cfg.strict_no_skip:
        bad += [r for r in results if r.verdict == SKIPPED]
    for r in bad:
        print(f"FAILED: {r.name} ({r.verdict}{': ' + r.reason if r.reason else ''})")
    return EXIT_FAIL if bad else EXIT_OK


def cmd_growth(cfg: RunConfig) -> int:
    c = _construction(cfg)
    if c.K < 3:
        print(f"growth needs at least 3 levels; ledger has {c.K}", file=sys.stderr)
        return EXIT_CONFIG
    rho_hat, rho_lower = chk.growth_order(c)
    ratio = chk.liminf_criterion(c)
    buf = io.StringIO()
    buf.write(f"# {_provenance(cfg)}\n")
    buf.write("# rho_hat = log(log M(2R_k)) / log(2R_k), with M(2R_k) = R_{k+1}: order-of-growth estimate\n")
    buf.write("# rho_lower = log(n_k log 2) / log(2R_k): from min |f| >= 2^n_k on |z| = 2R_k\n")
    buf.write("# liminf_ratio = log(log M(2R_k)) / log(log 2R_k): liminf growth criterion\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "logR_k", "n_k", "rho_hat", "rho_lower", "liminf_ratio"])
    for lv, a, b, r in zip(c.levels, rho_hat, rho_lower, ratio):
        w.writerow([lv.k, repr(lv.logR), str(lv.n), repr(a), repr(b), repr(r)])
    text = buf.getvalue()
    with open(_path(cfg, "growth.csv"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def _render(cfg: RunConfig):
    c = _construction(cfg)
    win = cfg.parsed_window(c)
    grid = dyn.render(c, win, tuple(cfg.res), cfg.budget)
    rgb = dyn.grid_rgb(grid)
    prov = _provenance(cfg)
    dyn.write_ppm(_path(cfg, "render.ppm"), rgb, prov)
    dyn.write_png(_path(cfg, "render.png"), rgb, {"transcend": prov})
    mask = dyn.julia_mask(grid)
    dyn.write_pbm(_path(cfg, "mask.pbm"), mask, prov)
    fr = grid.class_fractions()
    print("  ".join(f"{k}: {v:.4f}" for k, v in fr.items()))
    return grid, mask


def cmd_render(cfg: RunConfig) -> int:
    _render(cfg)
    return EXIT_OK


def cmd_dimension(cfg: RunConfig) -> int:
    _, mask = _render(cfg)
    res = dyn.box_count(mask, cfg.min_exp, cfg.max_exp)
    buf = io.StringIO()
    buf.write(f"# {_provenance(cfg)}\n")
    buf.write(f"# slope = {res.slope!r}, stderr = {res.slope_stderr!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "count"])
    for e, n in zip(res.epsilons, res.counts):
        w.writerow([repr(float(e)), int(n)])
    with open(_path(cfg, "boxcount.csv"), "w") as fh:
        fh.write(buf.getvalue())
    print(f"box-counting slope {res.slope:.4f} +/- {res.slope_stderr:.4f}")
    return EXIT_OK


def cmd_orbit(cfg: RunConfig) -> int:
    c = _construction(cfg)
    z0 = complex(cfg.z0[0], cfg.z0[1] if len(cfg.z0) > 1 else 0.0)
    rec = dyn.iterate_orbit(c, z0, cfg.budget)
    doc = {"format_version": FORMAT_VERSION, "config": cfg.to_json(),
           "start": [repr(z0.real), repr(z0.imag)], "final_class": rec.final_class,
           "steps": [{"region": str(r), "log_modulus": None if math.isnan(x) else
                      (float.hex(x) if math.isfinite(x) else str(x))} for r, x in rec.steps]}
    with open(_path(cfg, "orbit.json"), "w") as fh:
        fh.write(_dump(doc))
    for r, x in rec.steps:
        print(f"{str(r):>14}  log|z| = {x:.17g}")
    print(rec.final_class)
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "growth": cmd_growth,
            "render": cmd_render, "dimension": cmd_dimension, "orbit": cmd_orbit}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg)
    except ValidationFailure as e:
        for v in e.violations:
            print(f"invalid parameters: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmptySet, DegenerateFit) as e:
        print(f"degenerate data: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OutOfRange, ValueError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TranscendError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

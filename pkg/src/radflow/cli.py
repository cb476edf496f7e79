"""Scenario-driven command line front end.

Usage::

    radflow CONFIG.toml [--mode M] [--seed N] [--out DIR]

Exit codes: 0 all checks within tolerance, 1 a verification failed (reports
are still written), 2 configuration error, 3 runtime failure.

The scenario schema is documented in README.md. Every table rejects keys it
does not know, and validation finishes before any computation starts.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import conslaws as cl
from . import diagnostics as dg
from . import invariants as iv
from . import profiles as prof
from . import scaling as sc
from . import solver as sv
from .eos import EosModel
from .errors import ConfigError, IncompatibleScalingError, RadflowError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
MODES = ("verify-jets", "simulate", "scaling-check")
RESIDUALS_HEADER = ("law_or_invariant", "params", "eos", "n", "jet_seed", "max_residual", "scale")
INVARIANT_FORMS = ("scalar", "oneform", "vector")

_TOP_KEYS = {"name", "mode", "n", "seed", "out", "eos", "laws", "invariants", "jets", "grid",
             "initial", "simulate", "transform", "scaling"}
_SECTION_KEYS = {
    "jets": {"count", "invariant_count", "tol"},
    "grid": {"r_min", "r_max", "N", "bc_left", "with_mu"},
    "initial": {"U", "rho", "S", "mu"},
    "simulate": {"t_end", "cfl", "sample_every", "tracers", "domain", "balance_tol", "drift_tol",
                 "monotonicity", "monotonicity_tol"},
    "transform": {"kind", "lambda", "exponents"},
    "scaling": {"domain", "t0", "tol", "corrected"},
}
_DEFAULTS = {
    "jets": {"count": 200, "invariant_count": 100, "tol": 1e-9},
    "grid": {"bc_left": "outflow", "with_mu": True},
    "simulate": {"cfl": 0.4, "sample_every": 4, "balance_tol": 5e-3, "drift_tol": 1e-3,
                 "monotonicity": False, "monotonicity_tol": 1e-2},
    "scaling": {"domain": [1.0, 2.0], "t0": 0.7, "tol": 1e-8, "corrected": False},
}
_REQUIRED = {
    "grid": {"r_min", "r_max", "N"},
    "initial": {"U", "rho", "S"},
    "simulate": {"t_end", "tracers"},
    "transform": {"kind", "lambda"},
}
_MODE_SECTIONS = {"verify-jets": (), "simulate": ("eos", "grid", "initial", "simulate"),
                  "scaling-check": ("initial", "transform")}


@dataclass
class Scenario:
    """A validated scenario; ``sections`` holds the nested tables with defaults filled in."""
    name: str
    mode: str
    n: int
    seed: int
    out: Path
    eos: EosModel | None
    laws: list
    invariants: list
    sections: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.sections[key]


# -- validation ----------------------------------------------------------------------------
def _number(value, key, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if kind is int and value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return kind(value)


def _section(raw, name):
    if name not in raw:
        return dict(_DEFAULTS.get(name, {}))
    table = raw[name]
    if not isinstance(table, dict):
        raise ConfigError(f"{name}: expected a table")
    extra = set(table) - _SECTION_KEYS[name]
    if extra:
        raise ConfigError(f"{name}.{sorted(extra)[0]}: unknown key")
    missing = _REQUIRED.get(name, set()) - set(table)
    if missing:
        raise ConfigError(f"{name}.{sorted(missing)[0]}: required key is missing")
    return {**_DEFAULTS.get(name, {}), **table}


def _laws(raw):
    out = []
    for k, entry in enumerate(raw.get("laws", [])):
        key = f"laws[{k}]"
        if not isinstance(entry, dict) or set(entry) - {"name", "params"} or "name" not in entry:
            raise ConfigError(f"{key}: expected a table with 'name' and optional 'params'")
        params = dict(entry.get("params", {}))
        try:
            out.append(cl.make_law(entry["name"], **params))
        except KeyError:
            raise ConfigError(f"{key}.name: unknown conservation law {entry['name']!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}.params: {exc}") from None
    return out


def _profiles(table, key):
    try:
        return prof.profile_set(table)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def validate(raw: dict, *, mode=None, seed=None, out=None) -> Scenario:
    """Check a parsed config (plus command line overrides) and build a Scenario."""
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise ConfigError(f"{sorted(extra)[0]}: unknown key")
    mode = mode or raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")
    if "n" not in raw:
        raise ConfigError("n: required key is missing")
    n_dim = _number(raw["n"], "n", int)
    if n_dim < 2:
        raise ConfigError("n: dimension must be >= 2")
    seed = _number(raw.get("seed", 0) if seed is None else seed, "seed", int)
    for name in _MODE_SECTIONS[mode]:
        if name not in raw:
            raise ConfigError(f"{name}: section required by mode {mode!r}")

    eos = None
    if "eos" in raw:
        if not isinstance(raw["eos"], dict):
            raise ConfigError("eos: expected a table")
        try:
            eos = EosModel.from_spec(raw["eos"], n=n_dim)
        except RadflowError as exc:
            raise ConfigError(f"eos: {exc}") from None

    laws = _laws(raw)
    invariants = list(raw.get("invariants", []))
    for k, name in enumerate(invariants):
        if name not in iv.CATALOG_NAMES:
            raise ConfigError(f"invariants[{k}]: unknown invariant {name!r}")
    if eos is not None:
        for k, law in enumerate(laws):
            if not law.valid_for(eos):
                raise ConfigError(f"laws[{k}]: {law.label} is not valid for {eos.describe()}")
        for k, name in enumerate(invariants):
            if not iv.catalog_invariant(name).valid_for(eos):
                raise ConfigError(f"invariants[{k}]: {name} needs an entropic EOS")

    sections = {name: _section(raw, name) for name in _SECTION_KEYS if name in raw or name in _DEFAULTS}
    if "initial" in raw:
        _profiles(sections["initial"], "initial")
    if mode == "verify-jets":
        j = sections["jets"]
        for key in ("count", "invariant_count"):
            if _number(j[key], f"jets.{key}", int) < 1:
                raise ConfigError(f"jets.{key}: must be positive")
    if mode == "simulate":
        _validate_simulate(sections, n_dim, eos, laws)
    if mode == "scaling-check":
        _validate_scaling(sections, n_dim, eos, laws)

    return Scenario(name=str(raw.get("name", "scenario")), mode=mode, n=n_dim, seed=seed,
                    out=Path(out if out is not None else raw.get("out", "out")), eos=eos,
                    laws=laws, invariants=invariants, sections=sections)


def _validate_simulate(sections, n_dim, eos, laws):
    g, s = sections["grid"], sections["simulate"]
    for key in ("r_min", "r_max"):
        _number(g[key], f"grid.{key}")
    _number(g["N"], "grid.N", int)
    if _number(s["t_end"], "simulate.t_end") <= 0:
        raise ConfigError("simulate.t_end: must be positive")
    every = s["sample_every"]
    if isinstance(every, bool) or not isinstance(every, (int, float)) or every <= 0:
        raise ConfigError("simulate.sample_every: expected a positive step count (int) or time (float)")
    tracers = s["tracers"]
    if not isinstance(tracers, list) or len(tracers) < 2:
        raise ConfigError("simulate.tracers: need a list of at least two positions")
    domain = s.setdefault("domain", [0, len(tracers) - 1])
    if (not isinstance(domain, list) or len(domain) != 2 or not all(isinstance(i, int) for i in domain)
            or not 0 <= domain[0] < domain[1] < len(tracers)):
        raise ConfigError("simulate.domain: expected two increasing tracer indices")
    if not laws and not s["monotonicity"]:
        raise ConfigError("laws: simulate needs at least one law (or monotonicity = true)")
    try:
        sv.init(_grid_config(n_dim, sections), eos)
    except ConfigError as exc:
        msg = str(exc)
        prefix = "simulate." if msg.startswith("tracers") else "grid." if not msg.startswith("initial") else ""
        raise ConfigError(prefix + msg) from None
    except RadflowError as exc:
        raise ConfigError(f"initial: {exc}") from None


def _validate_scaling(sections, n_dim, eos, laws):
    tr = sections["transform"]
    if not laws:
        raise ConfigError("laws: scaling-check needs at least one law")
    try:
        transform = _transform(tr)
    except (ValueError, RadflowError) as exc:
        raise ConfigError(f"transform: {exc}") from None
    sc_sec = sections["scaling"]
    dom = sc_sec["domain"]
    if not isinstance(dom, list) or len(dom) != 2 or not 0 < dom[0] < dom[1]:
        raise ConfigError("scaling.domain: expected [a, b] with 0 < a < b")
    for k, law in enumerate(laws):
        try:
            sc.expected_weight(law.name, transform, n_dim, law.params, corrected=sc_sec["corrected"])
            law_eos = eos or sc.representative_eos(law, transform, n_dim)
            law.check_validity(law_eos)
            sc.check_eos(transform, law_eos, require_energy=dg._uses_energy(law))
        except (RadflowError, ValueError, KeyError) as exc:
            raise ConfigError(f"laws[{k}]: {exc}") from None


def _transform(table):
    exps = table.get("exponents", {})
    if not isinstance(exps, dict):
        raise ConfigError("transform.exponents: expected a table")
    return sc.ScalingTransform(table["kind"], {k: float(v) for k, v in exps.items()},
                               float(table["lambda"]))


def _grid_config(n_dim, sections):
    g, s = sections["grid"], sections["simulate"]
    return {"n": n_dim, "r_min": g["r_min"], "r_max": g["r_max"], "N": g["N"],
            "bc_left": g["bc_left"], "with_mu": g["with_mu"], "initial": sections["initial"],
            "tracers": s["tracers"]}


def load(path, *, mode=None, seed=None, out=None) -> Scenario:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: {exc}") from None
    return validate(raw, mode=mode, seed=seed, out=out)


# -- suites ----------------------------------------------------------------------------------
@dataclass
class Outcome:
    """Rows destined for the CSV files plus the overall verdict."""
    passed: bool = True
    residuals: list = field(default_factory=list)
    report: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def fail(self, msg):
        self.passed = False
        self.failures.append(msg)


def _worst(values, scale):
    rel = abs(values) / scale
    k = int(rel.argmax())
    return float(abs(values.flat[k])), float(scale.flat[k])


def verify_jets(scn: Scenario) -> Outcome:
    """Residuals of the selected laws and invariants (defaults: the full catalog) at random jets."""
    out = Outcome()
    j = scn["jets"]
    eos_list = [scn.eos] if scn.eos is not None else [
        EosModel.polytropic(1.3, 1.0, 0.4), EosModel.barotropic(1.0, 2.0),
        EosModel.ideal_gas(scn.n), EosModel.entropic(1.3, 1.0)]
    for eos in eos_list:
        laws = scn.laws or cl.catalog(eos)
        for law in laws:
            if not law.valid_for(eos):
                continue
            jets = cl.sample_for(law, eos, scn.n, int(j["count"]), scn.seed)
            val, scale = cl.conslaw_residual(law, jets, eos, return_scale=True)
            worst, s = _worst(val, scale)
            out.residuals.append((law.name, law.params_str, eos.describe(), scn.n, scn.seed, worst, s))
            if worst > j["tol"] * s:
                out.fail(f"{law.label} under {eos.describe()}: residual {worst:.3e} (scale {s:.3e})")
        names = scn.invariants or [m for m in iv.CATALOG_NAMES if iv.catalog_invariant(m).valid_for(eos)]
        for name in names:
            inv = iv.catalog_invariant(name)
            if not inv.valid_for(eos):
                continue
            jets = iv.sample_for(inv, eos, scn.n, int(j["invariant_count"]), scn.seed)
            for form in INVARIANT_FORMS:
                build, residual = iv._RESIDUALS[form]
                val, scale = residual(build(inv), jets, eos, return_scale=True)
                worst, s = _worst(val, scale)
                out.residuals.append((name, f"form={form}", eos.describe(), scn.n, scn.seed, worst, s))
                if worst > j["tol"] * s:
                    out.fail(f"{name} ({form}) under {eos.describe()}: residual {worst:.3e}")
    return out


def run_simulation(scn: Scenario, N=None):
    """Evolve the scenario's initial state; returns the list of snapshots."""
    cfg = _grid_config(scn.n, scn.sections)
    if N is not None:
        cfg["N"] = N
    state = sv.init(cfg, scn.eos)
    s = scn["simulate"]
    return sv.run(state, scn.eos, float(s["t_end"]), sample_every=s["sample_every"], cfl=float(s["cfl"]))


def _domain_str(domain):
    return f"{domain[0]}:{domain[1]}"


def simulate(scn: Scenario, snapshots=None) -> Outcome:
    """Moving-integral diagnostics for every selected law over the transported domain."""
    out = Outcome()
    s = scn["simulate"]
    eos = scn.eos
    snaps = snapshots if snapshots is not None else run_simulation(scn)
    domain = tuple(s["domain"])
    for k, law in enumerate(scn.laws):
        cls = cl.classify(law, eos, n_dim=scn.n, seed=scn.seed)
        series = dg.integral_series(snaps, law, eos, domain)
        bal, drift = dg.balance_report(series), dg.invariance_report(series)
        out.series[f"series_{k:02d}_{law.name}.csv"] = series
        out.report.append((law.name, law.params_str, _domain_str(domain), cls, bal, drift, None, None))
        if cls == cl.NOT_CONSERVED:
            out.fail(f"{law.label}: not conserved under {eos.describe()}")
        elif cls == cl.INTEGRAL_INVARIANT and drift >= s["drift_tol"]:
            out.fail(f"{law.label}: drift {drift:.3e} >= {s['drift_tol']:g}")
        elif cls == cl.NON_ADVECTED and bal >= s["balance_tol"]:
            out.fail(f"{law.label}: balance error {bal:.3e} >= {s['balance_tol']:g}")
    if s["monotonicity"]:
        res = dg.monotonicity_report(snaps, eos, domain)
        verdict = "nondecreasing" if res.nondecreasing else "decreasing"
        out.report.append(("A_quantity", "", _domain_str(domain), verdict, res.rel_err, res.mass_drift,
                           None, None))
        out.series["monotonicity.csv"] = (("t", "A", "M"), list(zip(res.t, res.A, res.M)))
        if not res.nondecreasing or res.rel_err >= s["monotonicity_tol"]:
            out.fail(f"A monotonicity: slope error {res.rel_err:.3e}, nondecreasing={res.nondecreasing}")
    return out


def scaling_check(scn: Scenario) -> Outcome:
    """Measured scaling weights of the selected laws on the scenario's analytic profiles."""
    out = Outcome()
    sec = scn["scaling"]
    transform = _transform(scn["transform"])
    fields = _profiles(scn["initial"], "initial")
    for law in scn.laws:
        chk = dg.scaling_weight_check(fields, law, transform, scn.eos, n_dim=scn.n,
                                      domain=tuple(sec["domain"]), t0=float(sec["t0"]),
                                      corrected=bool(sec["corrected"]))
        a, b = sec["domain"]
        out.report.append((law.name, law.params_str, f"{a!r}:{b!r}", transform.kind, None, None,
                           chk.expected, chk.measured))
        if chk.error >= sec["tol"]:
            out.fail(f"{law.label} under {transform.kind}: weight {chk.measured!r}, expected {chk.expected!r}")
    return out


def write_outputs(scn: Scenario, outcome: Outcome):
    scn.out.mkdir(parents=True, exist_ok=True)
    if scn.mode == "verify-jets":
        dg.write_csv(scn.out / "residuals.csv", RESIDUALS_HEADER, outcome.residuals, scn.seed)
        return
    dg.write_csv(scn.out / "report.csv", dg.REPORT_HEADER, outcome.report, scn.seed)
    for fname, series in outcome.series.items():
        if isinstance(series, dg.IntegralSeries):
            dg.write_series_csv(scn.out / fname, series, scn.seed)
        else:
            header, rows = series
            dg.write_csv(scn.out / fname, header, rows, scn.seed)


SUITES = {"verify-jets": verify_jets, "simulate": simulate, "scaling-check": scaling_check}


def execute(scn: Scenario) -> Outcome:
    outcome = SUITES[scn.mode](scn)
    write_outputs(scn, outcome)
    return outcome


def _parser():
    p = argparse.ArgumentParser(prog="radflow", description="Radial Euler conservation-law verification lab.")
    p.add_argument("config", help="scenario TOML file")
    p.add_argument("--mode", choices=MODES, help="override the scenario mode")
    p.add_argument("--seed", type=int, help="override the jet-sampling seed")
    p.add_argument("--out", help="override the output directory")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        scn = load(args.config, mode=args.mode, seed=args.seed, out=args.out)
    except (ConfigError, IncompatibleScalingError) as exc:
        print(f"radflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outcome = execute(scn)
    except RadflowError as exc:
        print(f"radflow: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"radflow: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for msg in outcome.failures:
        print(f"radflow: FAILED {msg}", file=sys.stderr)
    return EXIT_OK if outcome.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Usage: ``gravamp SCENARIO [--key value ...] [--config FILE] [--format csv|json|svg] [--out PATH]``.

Exit status: 0 on success, 1 on invalid parameters or configuration, 2 on
I/O errors. ``--check FILE`` re-runs the configuration embedded in a JSON
report and exits 0 only if every value is reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bmv, classical, criterion, oscillator, sampler
from .emit import EMITTERS, jsonable
from .quantum import DepolarizingNoise

log = logging.getLogger("gravamp")

OUTPUT_DIR_ENV = "GRAVAMP_OUTPUT_DIR"
SCENARIOS = ("bmv", "classical", "criterion", "sweep", "decoherence", "resolution", "budget", "oscillator", "montecarlo")
FORMATS = ("csv", "json", "svg")

G_SI = 6.67430e-11
HBAR_SI = 1.054571817e-34


class ConfigError(ValueError):
    """Invalid or missing configuration key."""


# key -> (kind, default, help); kind is "float", "int", "str", "bool", "grid" or "list"
_COUPLING = {
    "theta": ("float", None, "coupling phase theta (default 1e-2 unless SI keys are given)"),
    "epsilon": ("float", None, "post-selection parameter"),
    "a_w": ("float", None, "weak value"),
    "k": ("float", None, "amplification k = theta * a_w (default 1)"),
    "G": ("float", None, "SI mode: gravitational constant"),
    "m1": ("float", None, "SI mode: mass 1 (kg)"),
    "m2": ("float", None, "SI mode: mass 2 (kg)"),
    "d": ("float", None, "SI mode: near separation (m)"),
    "L": ("float", None, "SI mode: arm length (m)"),
    "tau": ("float", None, "SI mode: interaction time (s)"),
    "hbar": ("float", None, "SI mode: reduced Planck constant"),
}
_DEVICE = {
    "gamma": ("float", 1e-4, "detector resolution"),
    "rate": ("float", 1e6, "shots per second"),
    "duration": ("float", 86400.0, "run duration (s)"),
    "basis_prob": ("float", 0.5, "probability of choosing basis b"),
}
_SI_KEYS = ("m1", "m2", "d", "L", "tau")

PARAMETERS: dict[str, dict] = {
    "bmv": dict(_COUPLING),
    "classical": dict(_COUPLING),
    "criterion": {**_COUPLING, **_DEVICE, "q": ("float", 0.0, "depolarising degree")},
    "sweep": {
        "theta": ("grid", "1e-4:1e-2:log10", "theta grid: min:max:scale[:n] or comma list"),
        "k": ("list", "1", "comma list of k values"),
        **{k: v for k, v in _DEVICE.items()},
        "q": ("float", 0.0, "depolarising degree"),
    },
    "decoherence": {**_COUPLING, **_DEVICE, "q": ("grid", "0:1:lin:21", "q grid")},
    "resolution": {"gamma": ("float", 1e-4, "detector resolution")},
    "budget": {**_COUPLING, **_DEVICE, "p_herald": ("float", None, "heralding probability (overrides theta/k)")},
    "oscillator": {
        "lambda": ("float", 0.05, "coupling ratio g/omega"),
        "omega": ("float", 1.0, "oscillator frequency (rad/s)"),
        "t": ("float", None, "evolution time (s); default pi/omega"),
        "theta_v": ("float", None, "steering-basis angle; default balanced angle"),
        "nbar": ("float", 0.0, "thermal occupation"),
        "gamma": ("float", 1e-4, "detector resolution"),
        "order": ("int", oscillator.QUAD_ORDER, "Gauss-Hermite order per axis"),
        "max_lambda": ("float", 0.1, "weak-coupling ceiling on lambda"),
    },
    "montecarlo": {
        **_COUPLING,
        **_DEVICE,
        "q": ("float", 0.0, "depolarising degree for the noisy model"),
        "models": ("str", "quantum,classical,product", "comma list from quantum, classical, product, noisy"),
        "shots": ("int", 1_000_000, "number of shots"),
        "seed": ("int", 1, "random seed"),
        "heralded_equivalent": ("bool", False, "scale the run so the amplified cell expects `shots` events"),
        "block_size": ("int", sampler.DEFAULT_BLOCK, "shots per block"),
        "method": ("str", "counts", "counts (multinomial) or shots (per-shot draws)"),
    },
}


@dataclass
class RunConfig:
    scenario: str
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "json"


def _parse_bool(s: str) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _coerce(key: str, kind: str, raw):
    try:
        if raw is None:
            return None
        if kind == "float":
            return float(raw)
        if kind == "int":
            f = float(raw)
            if f != int(f):
                raise ValueError
            return int(f)
        if kind == "bool":
            return raw if isinstance(raw, bool) else _parse_bool(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r}: cannot read {raw!r} as {kind}") from None


def _norm_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def load_config_file(path: str) -> dict:
    """``key = value`` per line; ``#`` starts a comment. Raises OSError on I/O failure."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[_norm_key(k)] = v.strip()
    return out


def resolve_parameters(scenario: str, raw: dict) -> dict:
    """Validate keys, coerce types and fill defaults."""
    if scenario not in PARAMETERS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    spec = PARAMETERS[scenario]
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ConfigError(
            f"unknown key(s) {', '.join(unknown)} for scenario {scenario!r}; valid keys: {', '.join(sorted(spec))}"
        )
    return {k: _coerce(k, kind, raw.get(k, default)) for k, (kind, default, _) in spec.items()}


# grids ---------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """``min:max:scale[:n]`` with scale ``log10`` or ``lin``, or a comma list.

    ``log10`` defaults to one point per decade, ``lin`` to 11 points.
    """
    text = str(text).strip()
    if not text:
        return []
    if ":" not in text:
        try:
            return [float(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad list {text!r}") from None
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"grid {text!r} must be min:max:scale[:n]")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[3]) if len(parts) == 4 else None
    except ValueError:
        raise ConfigError(f"bad grid {text!r}") from None
    scale = parts[2]
    if scale == "log10":
        if not (lo > 0 and hi > 0):
            raise ConfigError(f"log10 grid needs positive bounds, got {text!r}")
        if n is None:
            n = int(round(abs(math.log10(hi / lo)))) + 1
        pts = np.logspace(math.log10(lo), math.log10(hi), n) if n > 1 else np.array([lo])
    elif scale == "lin":
        n = 11 if n is None else n
        pts = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    else:
        raise ConfigError(f"grid scale must be log10 or lin, got {scale!r}")
    if n < 1:
        raise ConfigError(f"grid needs at least one point, got {text!r}")
    return [float(x) for x in pts]


# parameter helpers --------------------------------------------------------

def resolve_theta(p: dict, echo: dict) -> float:
    si_given = [k for k in _SI_KEYS if p.get(k) is not None]
    if si_given:
        if p.get("theta") is not None:
            raise ConfigError("give either theta or the SI keys, not both")
        missing = [k for k in _SI_KEYS if p.get(k) is None]
        if missing:
            raise ConfigError(f"SI mode needs keys {', '.join(missing)}")
        gp = bmv.GravityParams(
            G=p["G"] if p.get("G") is not None else G_SI,
            m1=p["m1"], m2=p["m2"], d=p["d"], L=p["L"], tau=p["tau"],
            hbar=p["hbar"] if p.get("hbar") is not None else HBAR_SI,
        )
        dphi, theta = bmv.gravitational_phase(gp)
        echo.update(G=gp.G, hbar=gp.hbar, delta_phi=dphi, theta=theta)
        return theta
    theta = 1e-2 if p.get("theta") is None else p["theta"]
    echo["theta"] = theta
    return theta


def resolve_bmv(p: dict, echo: dict) -> bmv.BmvParams:
    theta = resolve_theta(p, echo)
    given = [k for k in ("epsilon", "a_w", "k") if p.get(k) is not None]
    if len(given) > 1:
        raise ConfigError(f"give only one of epsilon, a_w, k (got {', '.join(given)})")
    keys = ", ".join(["theta"] + (given or ["k (default 1)"]))
    try:
        if not given or given == ["k"]:
            k = 1.0 if not given else p["k"]
            params = bmv.BmvParams.from_k(theta, k)
        elif given == ["a_w"]:
            params = bmv.BmvParams.from_weak_value(theta, p["a_w"])
        else:
            params = bmv.BmvParams(theta, p["epsilon"])
    except ValueError as exc:
        raise ConfigError(f"invalid {keys}: {exc}") from exc
    echo.update(epsilon=params.epsilon, a_w=params.weak.a_w, k=params.k)
    return params


def device_from(p: dict) -> criterion.DeviceModel:
    return criterion.DeviceModel(p["gamma"], p["rate"], p["duration"], p["basis_prob"])


def _noise(q: float) -> DepolarizingNoise | None:
    return None if q == 0 else DepolarizingNoise(q)


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# scenarios ----------------------------------------------------------------

def run_bmv(p, echo, workers):
    params = resolve_bmv(p, echo)
    _, _, rep = bmv.quantum_predictions(params)
    w = params.weak
    return {
        "weak_value": w.a_w,
        "weak_value_perp": w.a_w_perp,
        "k": params.k,
        "probabilities": list(rep.probabilities),
        "closed_form_probabilities": list(bmv.closed_form_probabilities(params)),
        "v_quantum": list(rep.values),
    }


def run_classical(p, echo, workers):
    params = resolve_bmv(p, echo)
    mix = classical.classical_visibilities(classical.build_separable(params), params)
    prod = classical.classical_visibilities(classical.product_simulator(params, True), params)
    return {
        "v_classical": list(mix.values),
        "probabilities": list(mix.probabilities),
        "v_classical_displayed": list(classical.displayed_classical_visibilities(params)),
        "v_product_matched": list(prod.values),
        "classical_limit": classical.classical_visibility_limit(params.k),
        "weight_deficit": mix.diagnostics["weight_deficit"],
    }


def run_criterion(p, echo, workers):
    params = resolve_bmv(p, echo)
    rep = criterion.evaluate_criterion(params, device_from(p), _noise(p["q"]))
    return rep.as_dict()


SWEEP_COLUMNS = [
    "theta", "k", "epsilon", "a_w", "v_quantum_2", "v_classical_2", "visibility_gap",
    "prob_tv_distance", "distinguishable_by_probability", "distinguishable_by_visibility",
]


def run_sweep(p, echo, workers):
    thetas = parse_grid(p["theta"])
    ks = parse_grid(p["k"])
    device = device_from(p)
    noise = _noise(p["q"])
    grid = [(t, k) for t in thetas for k in ks]  # row-major: theta outer, k inner

    def point(tk):
        params = bmv.BmvParams.from_k(*tk)
        r = criterion.evaluate_criterion(params, device, noise)
        return {
            "theta": tk[0], "k": tk[1], "epsilon": params.epsilon, "a_w": params.weak.a_w,
            "v_quantum_2": r.v_quantum[2], "v_classical_2": r.v_classical[2],
            "visibility_gap": r.visibility_gap, "prob_tv_distance": r.prob_tv_distance,
            "distinguishable_by_probability": r.distinguishable_by_probability,
            "distinguishable_by_visibility": r.distinguishable_by_visibility,
        }

    rows = _pmap(point, grid, workers)
    return {"columns": SWEEP_COLUMNS, "rows": rows, "plot": {"x": "theta", "y": "visibility_gap", "group": "k", "logx": True}}


def run_decoherence(p, echo, workers):
    params = resolve_bmv(p, echo)
    qs = parse_grid(p["q"])
    device = device_from(p)
    cols = ["q"] + [f"v_{i}" for i in range(4)] + [f"v_printed_{i}" for i in range(4)] + ["max_abs_exact_minus_printed"]

    def point(q):
        r = criterion.noisy_visibilities(params, DepolarizingNoise(q))
        row = {"q": q}
        row.update({f"v_{i}": v for i, v in enumerate(r.values)})
        row.update({f"v_printed_{i}": v for i, v in enumerate(r.diagnostics["printed"])})
        row["max_abs_exact_minus_printed"] = r.diagnostics["max_abs_exact_minus_printed"]
        return row

    rows = _pmap(point, qs, workers)
    echo["decoherence_threshold"] = criterion.decoherence_threshold(params, device)
    return {"columns": cols, "rows": rows, "plot": {"x": "q", "y": "v_2"}}


def run_resolution(p, echo, workers):
    gamma = p["gamma"]
    ceiling = criterion.resolution_ceiling(gamma)
    theta = math.sqrt(gamma)
    params = bmv.BmvParams.from_weak_value(theta, ceiling)
    return {
        "max_weak_value": ceiling,
        "theta": theta,
        "k": params.k,
        "expectation_shift": criterion.expectation_shift(params),
        "exact_expectation_shift": criterion.exact_expectation_shift(params),
    }


def run_budget(p, echo, workers):
    device = device_from(p)
    if p.get("p_herald") is not None:
        params = None
        if any(p.get(k) is not None for k in ("theta", "epsilon", "a_w", "k", *_SI_KEYS)):
            raise ConfigError("give either p_herald or the coupling keys, not both")
    else:
        params = resolve_bmv(p, echo)
    rep = criterion.experiment_budget(params, device, p.get("p_herald"))
    return {
        "p_herald": rep.p_herald,
        "heralded_events": rep.heralded_events,
        "heralds_per_day": rep.heralds_per_day,
        "unweighted_events": rep.unweighted_events,
        "saving_factor": rep.saving_factor,
    }


def run_oscillator(p, echo, workers):
    omega = p["omega"]
    t = math.pi / omega if p["t"] is None else p["t"]
    lam = p["lambda"]
    g = lam * omega
    theta_v = p["theta_v"]
    if theta_v is None:
        eta = lam * (complex(math.cos(omega * t), -math.sin(omega * t)) - 1.0)
        if eta == 0:
            raise ConfigError("no balanced theta_v at eta = 0; give theta_v explicitly")
        theta_v = oscillator.balanced_theta_v(eta)
    echo.update(t=t, theta_v=theta_v)
    params = oscillator.OscillatorParams(omega=omega, g=g, t=t, theta_v=theta_v, nbar=p["nbar"], max_lambda=p["max_lambda"])
    eta = oscillator.displaced_amplitude(params)
    pure = oscillator.oscillator_visibility(params, gamma=p["gamma"])
    out = {
        "eta": eta,
        "branch_weights": list(oscillator.branch_weights(eta)),
        "heralding_prob": pure.heralding_prob,
        "visibility": pure.visibility,
        "classical_visibility": pure.classical_visibility,
        "k_factor": pure.k_factor,
    }
    if params.nbar > 0:
        th = oscillator.thermal_visibility(params, order=p["order"])
        out.update(
            thermal_heralding_prob=th.heralding_prob,
            thermal_visibility=th.visibility,
            quadrature_convergence=th.convergence,
        )
    return out


def run_montecarlo(p, echo, workers):
    params = resolve_bmv(p, echo)
    device = device_from(p)
    noise = DepolarizingNoise(p["q"])
    models = [m.strip() for m in p["models"].split(",") if m.strip()]
    for m in models:
        if m not in sampler.MODELS:
            raise ConfigError(f"unknown model {m!r}; choose from {', '.join(sampler.MODELS)}")
    if p["shots"] <= 0:
        raise ConfigError("shots must be positive")
    if p["method"] not in ("counts", "shots"):
        raise ConfigError(f"method must be counts or shots, got {p['method']!r}")
    if p["method"] == "shots" and p["heralded_equivalent"]:
        raise ConfigError("heralded_equivalent needs method = counts")
    out = {}
    for m in models:
        if p["method"] == "counts":
            counts = sampler.sample_counts(m, params, device, p["shots"], p["seed"], noise, p["heralded_equivalent"])
        else:
            counts = sampler.sample_blocks(
                m, params, device, p["shots"], p["seed"], noise, block_size=p["block_size"], workers=workers
            )
        rep = sampler.estimate(counts, seed=p["seed"])
        exact_v, exact_p = sampler.exact_expectations(m, params, device, noise)
        out[m] = {**rep.as_dict(), "exact_visibilities": list(exact_v), "exact_probabilities": list(exact_p)}
    return out


RUNNERS = {
    "bmv": run_bmv,
    "classical": run_classical,
    "criterion": run_criterion,
    "sweep": run_sweep,
    "decoherence": run_decoherence,
    "resolution": run_resolution,
    "budget": run_budget,
    "oscillator": run_oscillator,
    "montecarlo": run_montecarlo,
}


def build_report(config: RunConfig, workers: int = 1) -> dict:
    """Run a scenario and return the report dict with the resolved config embedded."""
    params = resolve_parameters(config.scenario, config.parameters)
    echo: dict = {}
    body = RUNNERS[config.scenario](params, echo, workers)
    resolved = {k: v for k, v in params.items()}
    resolved.update(echo)
    report = {"scenario": config.scenario, "config": resolved}
    if "rows" in body:
        report.update(body)
    else:
        report["result"] = body
    return report


def render(report: dict, fmt: str) -> bytes:
    if fmt not in EMITTERS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    return EMITTERS[fmt](report)


def check(path: str, workers: int = 1) -> tuple[bool, list[str]]:
    """Re-run the configuration stored in a JSON report and compare values exactly."""
    with open(path, encoding="utf-8") as fh:
        stored = json.load(fh)
    if not isinstance(stored, dict) or stored.get("scenario") not in RUNNERS or "input" not in stored:
        raise ConfigError(f"{path} is not a JSON report produced by this tool")
    config = RunConfig(stored["scenario"], dict(stored["input"]))
    fresh = json.loads(render(_with_input(build_report(config, workers), config.parameters), "json"))
    diffs = _diff(stored, fresh)
    return not diffs, diffs


def _with_input(report: dict, raw: dict) -> dict:
    """Store the user-supplied keys so ``--check`` can separate them from derived echoes."""
    report = dict(report)
    report["input"] = {k: v for k, v in raw.items() if v is not None}
    return report


def _diff(a, b, path="") -> list[str]:
    if isinstance(a, dict) and isinstance(b, dict):
        out = []
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                out.append(f"{path}/{k}: present in only one report")
            else:
                out.extend(_diff(a[k], b[k], f"{path}/{k}"))
        return out
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path}: length {len(a)} != {len(b)}"]
        out = []
        for i, (x, y) in enumerate(zip(a, b)):
            out.extend(_diff(x, y, f"{path}/{i}"))
        return out
    if type(a) is not type(b) or a != b:
        return [f"{path}: {a!r} != {b!r}"]
    return []


# argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gravamp", description="Weak-value amplified entanglement criterion toolkit.")
    parser.add_argument("--check", metavar="FILE", help="verify a JSON report by re-running its config")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="scenario", parser_class=_Parser)
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        sp.add_argument("--config", metavar="FILE", help="key = value parameter file")
        sp.add_argument("--format", choices=FORMATS, default=None, help="output format (default json, or from --out suffix)")
        sp.add_argument("--out", metavar="PATH", help=f"output file (default stdout, or ${OUTPUT_DIR_ENV}/<scenario>.<fmt>)")
        sp.add_argument("--workers", type=int, default=1, help="threads for sweeps and block sampling")
        for key, (kind, default, help_) in PARAMETERS[name].items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=f"param_{key}", default=None, metavar=kind.upper(), help=f"{help_} [default: {default}]")
    return parser


def _pick_format(fmt: str | None, out: str | None) -> str:
    if fmt:
        return fmt
    if out:
        ext = os.path.splitext(out)[1].lstrip(".").lower()
        if ext in FORMATS:
            return ext
    return "json"


def config_from_args(args) -> RunConfig:
    raw = load_config_file(args.config) if args.config else {}
    for key in PARAMETERS[args.scenario]:
        v = getattr(args, f"param_{key}")
        if v is not None:
            raw[key] = v
    fmt = _pick_format(args.format, args.out)
    out = args.out
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{args.scenario}.{fmt}")
    return RunConfig(args.scenario, raw, out, fmt)


def run(config: RunConfig, workers: int = 1) -> bytes:
    report = _with_input(build_report(config, workers), config.parameters)
    return render(report, config.output_format)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args, extra = make_parser().parse_known_args(argv)
        if extra:
            keys = sorted(PARAMETERS.get(args.scenario, {}))
            listing = f"; valid keys: {', '.join(keys)}" if keys else ""
            raise ConfigError(f"unknown argument(s) {' '.join(extra)}{listing}")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        if args.check:
            ok, diffs = check(args.check)
            if ok:
                print(f"{args.check}: all values reproduced exactly")
                return 0
            for d in diffs[:20]:
                print(f"mismatch {d}", file=sys.stderr)
            return 1
        if args.scenario is None:
            raise ConfigError("a scenario is required (or --check FILE)")
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        config = config_from_args(args)
        data = run(config, args.workers)
        if config.output_path:
            with open(config.output_path, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        return 0
    except OSError as exc:
        print(f"gravamp: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"gravamp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

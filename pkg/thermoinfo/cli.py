"""
Batch front end: one job document in, one result document out.

A job is a JSON object

    {"schema_version": 1, "command": "entropy", "input": {...}, "options": {...}}

and the result document records every number together with the operation that
produced it and the effective seed. Command-line flags override job options.
"""

import argparse
import logging
import sys

import numpy as np

from thermoinfo import config
from thermoinfo import finite_thermo as ft
from thermoinfo import info_gain as ig
from thermoinfo import involution_ep as iep
from thermoinfo import tfca_quadrature as tq
from thermoinfo.errors import InvalidInput, SchemaError, ThermoInfoError
from thermoinfo.job_store import load_job, save_result, save_table
from thermoinfo.symbolic_core import MarkovMeasure, ks_entropy

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
DEFAULT_TRIALS = 200
DEFAULT_DEPTH = 8

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _entry(name, value, operation):
    return {"name": name, "value": value, "operation": operation}


def _require(obj, key, where="input"):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where} is missing required field {key!r}")
    return obj[key]


def _parsed(build, what):
    """Run a constructor on job data; invariant violations become schema errors."""
    try:
        return build()
    except (InvalidInput, TypeError, ValueError) as e:
        raise SchemaError(f"invalid {what}: {e}") from None


def _option(options, key, default, cast=int):
    """Coerce an option (int by default); a badly typed value is a schema error."""
    return _parsed(lambda: cast(options.get(key, default)), f"option {key!r}")


def parse_chain(spec, what="chain"):
    """A chain is {"transition": [[...]]}, optionally with "stationary", or the bare matrix."""
    if isinstance(spec, list):
        spec = {"transition": spec}
    transition = _require(spec, "transition", what)
    if "stationary" in spec:
        return _parsed(lambda: MarkovMeasure(np.asarray(transition, dtype=float),
                                             np.asarray(spec["stationary"], dtype=float)), what)
    return _parsed(lambda: MarkovMeasure.from_transition(np.asarray(transition, dtype=float)), what)


def parse_potential(spec, what="potential"):
    """A potential is {"table": nested (d,)*k list} or {"values": flat list, "alphabet_size": d}."""
    if isinstance(spec, list):
        spec = {"table": spec}
    if isinstance(spec, dict) and "table" in spec:
        return _parsed(lambda: ft.Potential(np.asarray(spec["table"], dtype=float)), what)
    values = _require(spec, "values", what)
    d = _require(spec, "alphabet_size", what)
    return _parsed(lambda: ft.Potential.from_flat(values, int(d)), what)


def parse_weights(spec, d):
    """A priori weights: "counting", "uniform" or an explicit list."""
    if spec is None or spec == "counting":
        return ft.AprioriWeights.counting(d)
    if spec == "uniform":
        return ft.AprioriWeights.uniform(d)
    if isinstance(spec, str):
        raise SchemaError(f"unknown a priori weights {spec!r}")
    weights = _parsed(lambda: ft.AprioriWeights(spec), "a priori weights")
    if weights.size != d:
        raise SchemaError(f"a priori weights have {weights.size} entries for an alphabet of {d}")
    return weights


def parse_joint(spec):
    if isinstance(spec, dict):
        spec = _require(spec, "table", "joint")
    return _parsed(lambda: ig.JointDistribution(spec), "joint distribution")


def parse_quadrature(spec, options):
    """Named rule {"rule", "nodes": n} or explicit {"nodes": [...], "weights": [...]}."""
    spec = dict(spec or {})
    if "rule" in options:
        spec["rule"] = options["rule"]
    if "nodes" in options:
        spec["nodes"] = options["nodes"]
    nodes = spec.get("nodes", 32)
    if isinstance(nodes, list):
        weights = _require(spec, "weights", "quadrature")
        return _parsed(lambda: tq.QuadratureMeasure(nodes, weights, "custom"), "quadrature")
    rule = spec.get("rule", "gauss-legendre")
    return _parsed(lambda: tq.quadrature_measure(rule, int(nodes)), "quadrature")


def parse_continuous(spec):
    family = _require(spec, "family", "continuous potential")
    params = dict(spec.get("params", {}))
    return _parsed(lambda: tq.ContinuousPotential(family, params), "continuous potential")


def _scaled(value, options):
    return ig.to_base(value, options.get("base", "e"))


def _potential_and_weights(inp):
    A = parse_potential(_require(inp, "potential"))
    return A, parse_weights(inp.get("weights"), A.alphabet_size)


def cmd_entropy(inp, options):
    P = _require(inp, "P")
    value = _parsed(lambda: ig.shannon_entropy(P, options.get("base", "e")), "probability vector")
    return [_entry("entropy", value, "shannon_entropy")]


def cmd_infogain(inp, options):
    pi = parse_joint(_require(inp, "joint"))
    base = options.get("base", "e")
    return [
        _entry("information_gain", ig.information_gain(pi, base), "information_gain"),
        _entry("entropy_P", ig.shannon_entropy(pi.P, base), "shannon_entropy"),
        _entry("conditional_entropy", ig.conditional_entropy(pi, base), "conditional_entropy"),
        _entry("mutual_information", ig.mutual_information(pi, base), "mutual_information"),
    ]


def cmd_kl(inp, options):
    P, nu = _require(inp, "P"), _require(inp, "nu")
    value = _parsed(lambda: ig.kl_divergence(P, nu, options.get("base", "e")), "kl input")
    return [_entry("kl_divergence", value, "kl_divergence")]


def cmd_kernel_ig(inp, options):
    pi = parse_joint(_require(inp, "joint"))
    base = options.get("base", "e")
    if "phi0" in inp:
        nu = _require(inp, "nu")
        tol = options.get("tol", config.CONTRACT_TOL)
        value = _parsed(lambda: ig.ig_shift(pi, nu, inp["phi0"], base, tol), "phi0")
        return [_entry("information_gain", value, "ig_shift")]
    kernel = _parsed(lambda: ig.ProbabilityKernel(_require(inp, "kernel")), "probability kernel")
    return [_entry("information_gain", ig.kernel_information_gain(pi, kernel, base), "kernel_information_gain")]


def cmd_spectral(inp, options):
    A, nu = _potential_and_weights(inp)
    s = ft.spectral_data(A, nu, tol=options.get("tol", config.POWER_ITERATION_TOL))
    return [
        _entry("lambda", s.lam, "spectral_data"),
        _entry("pressure", s.pressure, "spectral_data"),
        _entry("eigenfunction", s.h, "spectral_data"),
        _entry("eigenprobability", s.rho, "spectral_data"),
    ]


def cmd_equilibrium(inp, options):
    A, nu = _potential_and_weights(inp)
    s = ft.spectral_data(A, nu)
    mu = ft.equilibrium_measure(A, nu, s)
    normalized = ft.normalize_potential(A, s)
    return [
        _entry("transition", mu.transition, "equilibrium_measure"),
        _entry("stationary", mu.stationary, "equilibrium_measure"),
        _entry("block_length", mu.block_length, "equilibrium_measure"),
        _entry("normalized_potential", normalized.table, "normalize_potential"),
        _entry("is_normalized", ft.is_normalized(normalized, nu), "is_normalized"),
    ]


def cmd_relent(inp, options):
    mu = parse_chain(_require(inp, "chain"))
    nu = parse_weights(inp.get("weights"), mu.alphabet_size)
    return [
        _entry("relative_entropy", _scaled(ft.relative_entropy(mu, nu), options), "relative_entropy"),
        _entry("ks_entropy", _scaled(ks_entropy(mu), options), "ks_entropy"),
    ]


def _gain_entry(report, options):
    entries = [_entry("specific_gain", _scaled(report.value, options), report.route.value)]
    if report.route == iep.GainRoute.ORBIT_MONTE_CARLO:
        entries.append(_entry("stderr", _scaled(report.stderr, options), report.route.value))
    return entries


def cmd_specgain(inp, options):
    """
    Specific information gain h(eta, mu).

    mode "formula" takes eta and the potential (or mu, whose counting-weight
    Jacobian is used); "cylinder" and "orbit" take eta and mu.
    """
    mode = options.get("mode", inp.get("mode", "formula"))
    eta = parse_chain(_require(inp, "eta"), "eta")

    if mode == "formula":
        if "potential" in inp:
            A, nu = _potential_and_weights(inp)
        else:
            mu = parse_chain(_require(inp, "mu"), "mu")
            nu = ft.AprioriWeights.counting(mu.n_states)
            A = ft.jacobian_potential(mu, nu)
        value = iep.specific_gain(eta, A, nu)
        return [_entry("specific_gain", _scaled(value, options), iep.GainRoute.PRESSURE_FORMULA.value)], None

    mu = parse_chain(_require(inp, "mu"), "mu")
    if mode == "cylinder":
        depths = options.get("depths") or [options.get("depth", DEFAULT_DEPTH)]
        reports = [iep.cylinder_gain_estimate(eta, mu, _parsed(lambda: int(n), "depth")) for n in depths]
    elif mode == "orbit":
        depths = options.get("depths") or [options.get("depth", DEFAULT_DEPTH)]
        trials = _option(options, "trials", DEFAULT_TRIALS)
        seed = _option(options, "seed", DEFAULT_SEED)
        workers = _option(options, "workers", 1)
        reports = [iep.orbit_gain_estimate(eta, mu, _parsed(lambda: int(n), "depth"), trials, seed, workers)
                   for n in depths]
    else:
        raise SchemaError(f"unknown specgain mode {mode!r}; expected formula, cylinder or orbit")

    results = []
    for report in reports:
        for entry in _gain_entry(report, options):
            entry["n"] = report.n
            results.append(entry)
    table = (["n", "value", "stderr"],
             [(r.n, _scaled(r.value, options), _scaled(r.stderr, options)) for r in reports])
    return results, table


def cmd_ep(inp, options):
    mode = options.get("mode", inp.get("mode", "markov"))
    if mode == "markov":
        mu = parse_chain(_require(inp, "chain"))
        return [_entry("entropy_production", _scaled(iep.entropy_production_markov(mu), options),
                       "entropy_production_markov")]
    if mode == "potential":
        A, nu = _potential_and_weights(inp)
        return [_entry("entropy_production", _scaled(iep.entropy_production_potential(A, nu), options),
                       "entropy_production_potential")]
    raise SchemaError(f"unknown ep mode {mode!r}; expected markov or potential")


def cmd_involution(inp, options):
    A = parse_potential(_require(inp, "potential"))
    data = iep.involution_kernel(A, inp.get("gauge"))
    results = [
        _entry("W", data.W, "involution_kernel"),
        _entry("dual_potential", data.a_minus.table, "involution_kernel"),
        _entry("gauge", data.gauge, "involution_kernel"),
        _entry("cocycle_defect", data.cocycle_defect(A), "involution_kernel"),
    ]
    if "weights" in inp:
        nu = parse_weights(inp["weights"], A.alphabet_size)
        lam, lam_dual = iep.dual_eigenvalue_check(A, nu)
        results.append(_entry("lambda", lam, "dual_eigenvalue_check"))
        results.append(_entry("lambda_dual", lam_dual, "dual_eigenvalue_check"))
    return results


def cmd_symmetric(inp, options):
    A = parse_potential(_require(inp, "potential"))
    report = iep.is_symmetric(A, tol=options.get("tol", config.CONTRACT_TOL))
    return [
        _entry("symmetric", report.symmetric, "is_symmetric"),
        _entry("strict", report.strict, "is_symmetric"),
        _entry("gauge", report.gauge, "is_symmetric"),
    ]


def _tfca_inputs(inp, options):
    return parse_continuous(_require(inp, "potential")), parse_quadrature(inp.get("quadrature"), options)


def cmd_tfca_spectral(inp, options):
    A, q = _tfca_inputs(inp, options)
    s = tq.nystrom_spectral(A, q)
    return [
        _entry("nodes", q.nodes, "quadrature_measure"),
        _entry("lambda", s.lam, "nystrom_spectral"),
        _entry("pressure", s.pressure, "nystrom_spectral"),
        _entry("eigenfunction", s.h, "nystrom_spectral"),
        _entry("eigenprobability", s.rho, "nystrom_spectral"),
    ]


def cmd_tfca_ep(inp, options):
    A, q = _tfca_inputs(inp, options)
    return [_entry("entropy_production", _scaled(tq.tfca_entropy_production(A, q), options),
                   "tfca_entropy_production")]


def cmd_tfca_entropy(inp, options):
    A, q = _tfca_inputs(inp, options)
    return [_entry("relative_entropy", _scaled(tq.tfca_entropy(A, q), options), "tfca_entropy")]


def cmd_tfca_equilibrium(inp, options):
    A, q = _tfca_inputs(inp, options)
    eq = tq.tfca_equilibrium(A, q)
    return [
        _entry("nodes", q.nodes, "quadrature_measure"),
        _entry("kernel", eq.kernel, "tfca_equilibrium"),
        _entry("density", eq.density, "tfca_equilibrium"),
    ]


def cmd_variational_oracle(inp, options):
    pi = parse_joint(_require(inp, "joint"))
    value = ig.variational_entropy_oracle(pi, _option(options, "iters", 100), _option(options, "step", 1.0, float))
    return [
        _entry("supremum", value, "variational_entropy_oracle"),
        _entry("negative_conditional_entropy", -ig.conditional_entropy(pi), "conditional_entropy"),
    ]


COMMANDS = {
    "entropy": cmd_entropy,
    "infogain": cmd_infogain,
    "kl": cmd_kl,
    "kernel-ig": cmd_kernel_ig,
    "spectral": cmd_spectral,
    "equilibrium": cmd_equilibrium,
    "relent": cmd_relent,
    "specgain": cmd_specgain,
    "ep": cmd_ep,
    "involution": cmd_involution,
    "symmetric": cmd_symmetric,
    "tfca-spectral": cmd_tfca_spectral,
    "tfca-ep": cmd_tfca_ep,
    "tfca-entropy": cmd_tfca_entropy,
    "tfca-equilibrium": cmd_tfca_equilibrium,
    "variational-oracle": cmd_variational_oracle,
}


def _validate_job(job):
    if not isinstance(job, dict):
        raise SchemaError("job document must be a JSON object")
    version = job.get("schema_version", config.SCHEMA_VERSION)
    if version != config.SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}; expected {config.SCHEMA_VERSION}")
    command = _require(job, "command", "job")
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}")
    options = job.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    if "base" in options:
        _parsed(lambda: ig.log_base(options["base"]), "base")
    return command, job.get("input", {}), options


def _failed(document, name, error, status):
    logger.error("%s failed: %s: %s", document["command"], name, error)
    document.update({"success": False, "error": {"name": name, "message": str(error)}})
    return document, status


def run(job):
    """
    Execute one job.

    Args:
        job: parsed job document (dict).

    Returns:
        (result document, exit status): 0 on success, 2 for schema errors and
        invalid input (including badly typed job fields) and 1 for any other
        library error.
    """
    document = {"schema_version": config.SCHEMA_VERSION, "command": job.get("command") if isinstance(job, dict) else None}
    try:
        command, inp, options = _validate_job(job)
        document["seed"] = _option(options, "seed", DEFAULT_SEED)
        document["base"] = str(options.get("base", "e"))
        outcome = COMMANDS[command](inp, options)
        results, table = outcome if isinstance(outcome, tuple) else (outcome, None)
    except ThermoInfoError as e:
        return _failed(document, type(e).__name__, e, 2 if isinstance(e, (SchemaError, InvalidInput)) else 1)
    except (TypeError, ValueError) as e:
        return _failed(document, SchemaError.__name__, f"invalid job data: {e}", 2)

    document.update({"success": True, "results": results})
    if table is not None:
        document["table"] = {"header": table[0], "rows": table[1]}
    return document, 0


def build_parser():
    parser = argparse.ArgumentParser(prog="thermoinfo", description="Information gain and thermodynamic formalism jobs")
    parser.add_argument("job", help="job document (JSON), or - for stdin")
    parser.add_argument("--output", "-o", help="write the result document here instead of stdout")
    parser.add_argument("--table", help="write the estimator table (CSV) here when the command produces one")
    parser.add_argument("--base", choices=["e", "2", "10"], help="logarithm base of reported information quantities")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--rule", choices=["midpoint", "gauss-legendre"])
    parser.add_argument("--tol", type=float)
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        job = load_job(args.job)
    except SchemaError as e:
        document = {"schema_version": config.SCHEMA_VERSION, "command": None, "success": False,
                    "error": {"name": "SchemaError", "message": str(e)}}
        save_result(document, args.output)
        return 2

    if isinstance(job, dict) and isinstance(job.get("options", {}), dict):
        options = dict(job.get("options", {}))
        for flag in ("base", "seed", "trials", "depth", "nodes", "rule", "tol"):
            value = getattr(args, flag)
            if value is not None:
                options[flag] = value
        job = {**job, "options": options}

    document, status = run(job)
    table = document.pop("table", None)
    save_result(document, args.output)
    if args.table and table is not None:
        save_table(table["header"], table["rows"], args.table)
    return status


if __name__ == "__main__":
    sys.exit(main())

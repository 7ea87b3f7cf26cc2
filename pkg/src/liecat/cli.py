"""Command-line front end.

Reports are ``key=value`` lines on stdout; reals use 17 significant digits.
Exit status: 0 success, 1 domain error, 2 parse or validation error.
Negative leading numbers must be attached with ``=``: ``--g=-1,2``.
"""

import argparse
import os
import sys

import numpy as np

from . import flows, ranks, thermo
from . import categories as cat
from .errors import DomainError, LieCatError, SpecError
from .numerics import ToleranceConfig, numerical_rank
from .specfile import fmt, fmt_list, load_energy_model, load_realization, parse_floats

ENV_RANK_TOL = "LIECAT_TOL_RANK"


class UsageError(SpecError):
    pass


def _tolerance(args):
    rank_tol = args.rank_tol
    if rank_tol is None and os.environ.get(ENV_RANK_TOL):
        try:
            rank_tol = float(os.environ[ENV_RANK_TOL])
        except ValueError:
            raise UsageError(f"{ENV_RANK_TOL} is not a number") from None
    try:
        return ToleranceConfig(
            rank_rel_tol=1e-8 if rank_tol is None else rank_tol,
            fd_step=args.fd_step,
            ode_steps=args.ode_steps,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _floats(text, what):
    if text is None:
        raise UsageError(f"missing --{what}")
    try:
        return parse_floats(text)
    except SpecError as exc:
        raise UsageError(f"--{what}: {exc}") from None


def _object(C, text, what="object"):
    if text is None:
        if C.dim_objects:
            raise UsageError(f"missing --{what}")
        return np.zeros(0)
    x = _floats(text, what)
    if isinstance(C, cat.EntropyCategory) and x.size == C.n + 1:
        x = thermo.to_chart(x)
    return x


def _morphism(C, text, what="morphism"):
    g = _floats(text, what)
    if isinstance(C, cat.EntropyCategory) and g.size == 2 * (C.n + 1):
        k = C.n + 1
        g = np.concatenate((thermo.to_chart(g[:k]), thermo.to_chart(g[k:])))
    return g


def _bool(b):
    return "true" if b else "false"


def _emit(pairs):
    for key, value in pairs:
        if isinstance(value, bool):
            value = _bool(value)
        elif isinstance(value, (float, np.floating)):
            value = fmt(value)
        elif isinstance(value, np.ndarray):
            value = fmt_list(value) if value.size else ""
        print(f"{key}={value}")


def _spec(args):
    if not args.spec:
        raise UsageError("missing --spec")
    try:
        return load_realization(args.spec)
    except OSError as exc:
        raise UsageError(f"cannot read {args.spec}: {exc.strerror}") from None


def cmd_compose(args, tol):
    C = _spec(args)
    g, h = _morphism(C, args.g, "g"), _morphism(C, args.h, "h")
    return [("composite", cat.compose(C, g, h))]


def cmd_rank(args, tol):
    C = _spec(args)
    r = ranks.rank_report(C, _morphism(C, args.morphism), tol)
    return [("left_rank", r.left_rank), ("right_rank", r.right_rank), ("delta", r.delta),
            ("regular", r.regular), ("rank_rel_tol", tol.rank_rel_tol)]


def cmd_invertible(args, tol):
    C = _spec(args)
    return [("invertible", ranks.is_invertible(C, _morphism(C, args.morphism), tol))]


def cmd_core_probe(args, tol):
    C = _spec(args)
    g = _morphism(C, args.morphism)
    frac = ranks.core_probe(C, g, args.radius, args.samples, args.seed, tol)
    return [("fraction", float(frac)), ("samples", args.samples), ("radius", args.radius), ("seed", args.seed)]


def cmd_exp(args, tol):
    C = _spec(args)
    return [("element", flows.exp_monoid(C, _floats(args.vector, "vector"), tol))]


def cmd_flow(args, tol):
    C = _spec(args)
    res = flows.flow_left_invariant(C, _floats(args.coeffs, "coeffs"), _morphism(C, args.morphism), args.t, tol)
    return [("endpoint", res.endpoint), ("t_reached", res.t_reached), ("exited", res.exited)]


def cmd_bracket(args, tol):
    C = _spec(args)
    x = _object(C, args.object)
    b = flows.bracket_at_unit(C, _floats(args.alpha, "alpha"), _floats(args.beta, "beta"), x, tol)
    return [("bracket", b)]


def cmd_anchor(args, tol):
    C = _spec(args)
    A = flows.anchor_matrix(C, _object(C, args.object), tol)
    return [("rows", A.shape[0]), ("cols", A.shape[1]), ("rank", numerical_rank(A, tol) if A.size else 0),
            ("matrix", A.reshape(-1))]


def cmd_entropy(args, tol):
    return [("entropy", thermo.entropy(_floats(args.p, "p")))]


def _energy_model(args):
    try:
        if args.energy_file:
            return load_energy_model(args.energy_file)
        energies = tuple(_floats(args.energies, "energies"))
        if args.kT is not None:
            return thermo.EnergyModel(energies, args.kT, 1.0)
        if args.temperature is None:
            raise UsageError("give --kT, --temperature or --energy-file")
        return thermo.EnergyModel(energies, args.temperature, args.boltzmann)
    except OSError as exc:
        raise UsageError(f"cannot read {args.energy_file}: {exc.strerror}") from None
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_gibbs(args, tol):
    sol = thermo.gibbs_equilibrium(_energy_model(args))
    return [("p", sol.p_eq), ("Z", sol.Z), ("lambda1", sol.lambda1), ("entropy", thermo.entropy(sol.p_eq))]


def cmd_feasible(args, tol):
    q, p = _floats(args.q, "q"), _floats(args.p, "p")
    return [("delta_S", thermo.delta_S(q, p)), ("feasible", thermo.is_feasible(q, p, args.slack))]


def cmd_reachable(args, tol):
    target, p = _floats(args.target, "target"), _floats(args.p, "p")
    return [("reachable", thermo.can_reach(target, p)),
            ("entropy_target", thermo.entropy(target)), ("entropy_p", thermo.entropy(p))]


def cmd_validate(args, tol):
    if args.energy_file:
        m = _energy_model(args)
        return [("valid", True), ("microstates", len(m.energies)), ("kT", m.kT)]
    C = _spec(args)
    return [("valid", True), ("family", C.family), ("dim_morphisms", C.dim_morphisms),
            ("dim_objects", C.dim_objects), ("delta", C.delta)]


COMMANDS = {
    "compose": cmd_compose,
    "rank": cmd_rank,
    "invertible": cmd_invertible,
    "core-probe": cmd_core_probe,
    "exp": cmd_exp,
    "flow": cmd_flow,
    "bracket": cmd_bracket,
    "anchor": cmd_anchor,
    "entropy": cmd_entropy,
    "gibbs": cmd_gibbs,
    "feasible": cmd_feasible,
    "reachable": cmd_reachable,
    "validate": cmd_validate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=None,
                        help=f"relative singular-value cutoff (default 1e-8, or ${ENV_RANK_TOL})")
    common.add_argument("--fd-step", type=float, default=1e-6)
    common.add_argument("--ode-steps", type=int, default=1000)

    parser = argparse.ArgumentParser(prog="liecat", description="Computations in concrete Lie categories.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, help_text, spec=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if spec:
            p.add_argument("--spec", required=name != "validate", help="realization spec file")
        return p

    p = add("compose", "compose two morphisms")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)

    for name, text in (("rank", "left/right rank report"), ("invertible", "invertibility test")):
        add(name, text).add_argument("--morphism", required=True)

    p = add("core-probe", "fraction of invertible morphisms near an invertible one")
    p.add_argument("--morphism", required=True)
    p.add_argument("--radius", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)

    add("exp", "exponential map of a monoid").add_argument("--vector", required=True)

    p = add("flow", "flow of a left-invariant field")
    p.add_argument("--coeffs", required=True, help="section coefficients in the ker dt frame")
    p.add_argument("--morphism", required=True)
    p.add_argument("--t", type=float, required=True)

    p = add("bracket", "Lie bracket of two sections at a unit")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--object")

    add("anchor", "anchor matrix at a unit").add_argument("--object")

    add("entropy", "entropy of a configuration", spec=False).add_argument("--p", required=True)

    p = add("gibbs", "Gibbs equilibrium", spec=False)
    p.add_argument("--energies")
    p.add_argument("--kT", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--boltzmann", type=float, default=1.0)
    p.add_argument("--energy-file")

    p = add("feasible", "second-law feasibility of p -> q", spec=False)
    p.add_argument("--q", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--slack", type=float, default=0.0)

    p = add("reachable", "whether target is reachable from p", spec=False)
    p.add_argument("--target", required=True)
    p.add_argument("--p", required=True)

    p = add("validate", "parse and validate a spec or energy file")
    p.add_argument("--energy-file")
    p.add_argument("--energies")
    p.add_argument("--kT", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--boltzmann", type=float, default=1.0)
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        tol = _tolerance(args)
        pairs = COMMANDS[args.verb](args, tol)
    except DomainError as exc:
        _emit([("error", exc.name), ("detail", str(exc))])
        return 1
    except (SpecError, ValueError) as exc:
        name = exc.name if isinstance(exc, LieCatError) else "InvalidArgument"
        _emit([("error", name), ("detail", str(exc))])
        return 2
    _emit(pairs)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

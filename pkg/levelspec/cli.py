import argparse
from fractions import Fraction

from .argtypes import parse_n_range, parse_positive, parse_probability, parse_seed
from .orthogonal import MAX_ENUM_LEVEL, MAX_ENUM_ORDER, LevelMode


def add_common_arguments(
    parser: argparse.ArgumentParser, quotient_default: bool = True
) -> None:
    orders = parser.add_mutually_exclusive_group()
    orders.add_argument("--n", type=parse_positive, help="Number of vertices")
    orders.add_argument(
        "--n-range",
        type=parse_n_range,
        metavar="A:B",
        help="Inclusive range of orders (A:B or A-B)",
    )
    parser.add_argument(
        "--p",
        type=parse_probability,
        default=Fraction(1, 2),
        metavar="NUM/DEN",
        help="Exact edge probability",
    )
    parser.add_argument(
        "--level", type=parse_positive, default=2, help="Level bound l"
    )
    parser.add_argument(
        "--trials", type=parse_positive, default=100, help="Monte Carlo trials"
    )
    parser.add_argument(
        "--seed", type=parse_seed, default=0, help="64-bit master seed"
    )
    parser.add_argument("--out", metavar="PATH", help="Output file (default: stdout)")
    parser.add_argument(
        "--format", choices=["csv", "json"], default="csv", help="Output format"
    )
    parser.add_argument(
        "--quotient-signed-perms",
        action=argparse.BooleanOptionalAction,
        default=quotient_default,
        help="Enumerate one matrix per orbit of right signed permutations",
    )
    parser.add_argument(
        "--workers", type=parse_positive, default=4, help="Concurrent trial workers"
    )
    parser.add_argument(
        "--max-order",
        type=parse_positive,
        default=MAX_ENUM_ORDER,
        help="Largest order the enumerations accept",
    )
    parser.add_argument(
        "--max-level",
        type=parse_positive,
        default=MAX_ENUM_LEVEL,
        help="Largest level the enumerations accept",
    )
    parser.add_argument(
        "--verbose", action="store_true", help="Log every trial (DEBUG level)"
    )


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelspec",
        description="Cospectral mates of bounded level: searches, audits and bounds",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    sweep = subparsers.add_parser(
        "sweep-controllability", help="Frequency of controllable graphs in G(n, p)"
    )
    add_common_arguments(sweep)

    lemma = subparsers.add_parser(
        "lemma-mc", help="Monte Carlo check of the integral-conjugation bound"
    )
    add_common_arguments(lemma)
    lemma.add_argument(
        "--matrix",
        metavar="PATH",
        help="Matrix text file (default: diag((1/5)[[3,-4],[4,3]], I))",
    )

    scan = subparsers.add_parser(
        "mate-scan", help="Search sampled graphs for mates of bounded level"
    )
    add_common_arguments(scan)
    scan.add_argument(
        "--graphs", metavar="PATH", help="Scan the graph6 lines of PATH instead"
    )
    scan.add_argument(
        "--verify",
        action="store_true",
        help="Cross-check every trial against the brute-force search",
    )

    census = subparsers.add_parser(
        "census", help="Exhaustive cospectral census of small orders"
    )
    add_common_arguments(census)

    enum = subparsers.add_parser(
        "enum-ortho", help="Count rational orthogonal matrices of a given level"
    )
    add_common_arguments(enum, quotient_default=False)
    enum.add_argument(
        "--mode",
        choices=[mode.value for mode in LevelMode],
        default=LevelMode.DIVIDES.value,
        help="Keep exact levels or levels dividing --level",
    )
    enum.add_argument(
        "--audit",
        action="store_true",
        help="Audit every matrix of level 2..l against the structural claims",
    )

    bounds = subparsers.add_parser(
        "bounds", help="Tabulate epsilon_n, the series bound and n*"
    )
    add_common_arguments(bounds)
    bounds.add_argument(
        "--union",
        action="store_true",
        help="Add the finite union-bound sums to the JSON output",
    )

    verify = subparsers.add_parser(
        "verify-certs", help="Re-verify certificates from a JSON document"
    )
    verify.add_argument("path", help="JSON document with a 'certificates' list")
    add_common_arguments(verify)

    return parser


def parse_args(argv):
    parser = create_parser()
    return parser.parse_args(argv)

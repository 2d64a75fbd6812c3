"""Command-line front end.

Every subcommand reads one JSON document (a file path, or ``-`` for
stdin) and writes one JSON document to stdout.  Exit status is 0 on
success, 2 when the input violates a precondition and 3 when the given
precision cannot decide the answer.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Callable

from .assembler import CuspidalDatum, assemble_full_char, enumerate_classes
from .ffield import FqField
from .forms import SesquiForm
from .gauss import gauss_bruteforce, gauss_closed
from .padic import PadicMatrix, PrecisionError, TameElement, get_tower
from .rootsets import (
    GenericCharacterData,
    TameTorus,
    classify_roots,
    gauss_sum_bruteforce,
    gauss_sum_closed,
    gauss_sum_sign,
)
from .selfcheck import run_checks
from .tame import normal_approx
from .weil import SymplecticSpace, WeilModel, epsilon_cardinality, epsilon_check, epsilon_sign, weil_char_formula

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_INDETERMINATE = 3


def _read(path: str) -> Any:
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _element(tower, data, precision: int) -> TameElement:
    if isinstance(data, int):
        return tower.from_int(data, precision)
    digits = data["digits"] if isinstance(data, dict) and "digits" in data else data
    return tower.from_json_digits(digits, precision)


def _torus_input(data) -> tuple[TameTorus, list[TameElement], GenericCharacterData]:
    torus = TameTorus.from_json(data["torus"])
    K = int(data.get("precision", 24))
    gamma = [_element(T, g, K) for T, g in zip(torus.towers, data["gamma"])]
    xstar = [_element(T, y, K) for T, y in zip(torus.towers, data["xstar"])]
    return torus, gamma, GenericCharacterData(torus, Fraction(data["r"]), xstar)


def cmd_gauss(data) -> dict:
    B = SesquiForm.from_json(data)
    closed = gauss_closed(B)
    out = {"closed": closed.to_json()}
    brute = gauss_bruteforce(B)
    out["bruteforce"] = brute.to_json()
    out["agree"] = brute.normalised_equals(closed)
    return out


def cmd_weil_char(data) -> dict:
    F = FqField.from_json(data["field"])
    if "gram" in data:
        space = SymplecticSpace(F, data["gram"])
    else:
        space = SymplecticSpace.standard(F, len(data["matrix"]) // 2)
    g = [[int(a) for a in row] for row in data["matrix"]]
    space.require_symplectic(g)
    formula = weil_char_formula(space, g)
    out = {"formula": formula.value.to_json(), "case": formula.case}
    if data.get("bruteforce", True):
        brute = WeilModel(space).trace(g)
        out["bruteforce"] = brute.to_json()
        out["agree"] = brute == formula.value
    return out


def cmd_approx(data) -> dict:
    tower_data = data.get("tower", {})
    T = get_tower(int(data["p"]), int(tower_data.get("f", 1)), int(tower_data.get("e", 1)))
    K = int(data.get("precision", 24))
    M = PadicMatrix.from_json(T, data["matrix"], K)
    x = data.get("x")
    approx = normal_approx(M, [Fraction(c) for c in x] if x is not None else None)
    out = approx.to_json()
    out["reconstructs"] = approx.reconstructs()
    return out


def cmd_xi(data) -> dict:
    torus, gamma, char = _torus_input(data)
    return classify_roots(torus, gamma, char).to_json()


def cmd_epsilon(data) -> dict:
    torus, gamma, char = _torus_input(data)
    cls = classify_roots(torus, gamma, char)
    out = {"xi": cls.to_json()["xi"], "sign": epsilon_sign(cls.xi_data), "cardinality": cls.xi_data.fixed_dim}
    predicted, trace, agree = epsilon_check(cls.xi_data)
    out.update({"predicted": predicted.to_json(), "oracle": trace.to_json(), "agree": agree})
    out["cardinality_sqrt"] = epsilon_cardinality(cls.xi_data).to_json()
    return out


def cmd_gsum(data) -> dict:
    torus, gamma, char = _torus_input(data)
    char.check_generic()
    cls = classify_roots(torus, gamma, char)
    closed = gauss_sum_closed(cls)
    out = {"upsilon": cls.to_json()["upsilon"], "sign": gauss_sum_sign(cls).to_json(), "closed": closed.to_json()}
    if data.get("bruteforce", True):
        brute = gauss_sum_bruteforce(cls, limit=int(data.get("limit", 200_000)))
        out["bruteforce"] = brute.to_json()
        out["agree"] = closed.equals_cyc(brute.value)
    return out


def cmd_char(data) -> dict:
    K = int(data.get("precision", 24))
    datum = CuspidalDatum.from_json(data["datum"], K)
    g = data["gamma"]
    if "torus" in g:
        gamma: PadicMatrix | TameElement = _element(datum.torus.towers[0], g["torus"], K)
    else:
        gamma = PadicMatrix.from_json(get_tower(datum.p), g["matrix"], K)
    mode = data.get("mode", "tau")
    formula = assemble_full_char(gamma, datum, mode)
    out = formula.to_json()
    out["class_count"] = len(enumerate_classes(gamma, datum))
    return out


COMMANDS: dict[str, Callable[[Any], dict]] = {
    "gauss": cmd_gauss,
    "weil-char": cmd_weil_char,
    "approx": cmd_approx,
    "xi": cmd_xi,
    "epsilon": cmd_epsilon,
    "gsum": cmd_gsum,
    "char": cmd_char,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tamechar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("input", help="JSON input file, or - for stdin")
        if name == "char":
            sp.add_argument("--text", action="store_true", help="print the rendered formula instead of JSON")
    sub.add_parser("check", help="run the oracle suite")
    args = parser.parse_args(argv)

    if args.command == "check":
        results = run_checks()
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.ok for r in results) else 1

    try:
        data = _read(args.input)
        out = COMMANDS[args.command](data)
    except PrecisionError as exc:
        print(json.dumps({"error": "indeterminate", "message": str(exc)}), file=sys.stderr)
        return EXIT_INDETERMINATE
    except (ValueError, KeyError, TypeError, json.JSONDecodeError, OSError) as exc:
        print(json.dumps({"error": "precondition", "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_PRECONDITION
    if getattr(args, "text", False):
        print(out["rendering"])
    else:
        print(json.dumps(out, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

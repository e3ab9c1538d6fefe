"""Command line entry point: chem-export MOLECULE|--spec FILE --out PATH."""

from __future__ import annotations

import argparse
import sys

from .export import export_hamiltonian
from .fermion import diagonal_expectation
from .molecules import PRESETS, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chem-export",
        description="write a molecular qubit Hamiltonian as Pauli-sum JSON")
    parser.add_argument("molecule", nargs="?", choices=sorted(PRESETS),
                        help="built-in molecule preset")
    parser.add_argument("--spec", help="molecule spec JSON file")
    parser.add_argument("--out", help="output path "
                        "(default <molecule>_sto3g.json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if (args.molecule is None) == (args.spec is None):
        print("error: give exactly one of MOLECULE or --spec", file=sys.stderr)
        return 1
    try:
        if args.spec:
            spec = load_spec(args.spec)
        else:
            spec = PRESETS[args.molecule]
        out = args.out or f"{spec.name or 'molecule'}_sto3g.json"
        document = export_hamiltonian(spec, out)
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    terms = [(t["coeff"], t["pauli"]) for t in document["terms"]]
    vacuum = diagonal_expectation(terms, "0" * document["num_qubits"])
    print(f"wrote {out}: {document['num_qubits']} qubits, "
          f"{len(terms)} terms, "
          f"HF energy {document['metadata']['hf_energy']:.8f} Ha, "
          f"vacuum energy {vacuum:.8f} Ha")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

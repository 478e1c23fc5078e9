"""Serve a built-in subject over the wire protocol: ``python3 -m crpkit.external ROLE NAME``.

ROLE is ``solver``, ``checker`` or ``ptm``. Used to check that external
subjects behave exactly like their in-process twins.
"""

from __future__ import annotations

import sys

from . import catalog, protocol


def main(argv=None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    if len(args) != 2:
        print("usage: python -m crpkit.external {solver,checker,ptm} NAME", file=sys.stderr)
        return 2
    role, name = args
    if role == "solver":
        protocol.serve_solver(catalog.lookup_solver(name))
    elif role == "checker":
        protocol.serve_checker(catalog.lookup_checker(name))
    elif role == "ptm" and name == "Flag34":
        protocol.serve_flag34()
    else:
        print(f"unknown subject {role} {name}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

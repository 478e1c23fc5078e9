"""Line-delimited JSON protocol between the harness and external subjects.

Harness to subject::

    {"type": "problem", "family": "LP", "kappa": "1/10", "p": "inf", "theta": "1/4", "N1": 2, "N2": 1}
    {"type": "value", "q": "1/2"}
    {"type": "bits", "s": "0110"}

Subject to harness::

    {"type": "query", "coord": 1, "precision": 4}
    {"type": "need_bits", "count": 2}
    {"type": "answer", "vector": [["2", "5"], ["0", "1"]]}
    {"type": "flag", "value": 1}
    {"type": "output", "value": ...}

Rationals must be canonical. The wall-clock timeout only guards against
hung subjects; fuel is still charged per query by the engine.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import sys
import threading
from fractions import Fraction
from typing import Callable, Optional, TextIO

from .errors import ProtocolError
from .exactnum import PNorm, format_rational, parse_rational
from .problems import Dims, Family
from .randomized import PTM, NeedsMoreBits
from .subjects import CheckerHandle, SolverHandle

DEFAULT_TIMEOUT = 30.0


def problem_record(family: Family, dims: Dims) -> dict:
    rec = {
        "type": "problem",
        "family": family.kind,
        "kappa": format_rational(family.kappa),
        "p": str(family.p),
        "theta": format_rational(family.theta),
        "N1": dims.N1,
        "N2": dims.N2,
    }
    if family.kind == "BP":
        rec["eta"] = format_rational(family.eta)
    if family.kind == "LASSO":
        rec["lambda"] = format_rational(family.lam)
    return rec


def parse_problem(rec: dict) -> tuple:
    if rec.get("type") != "problem":
        raise ProtocolError(f"expected a problem record, got {rec!r}")
    try:
        family = Family(
            rec["family"],
            kappa=parse_rational(rec["kappa"]),
            eta=parse_rational(rec["eta"]) if "eta" in rec else None,
            lam=parse_rational(rec["lambda"]) if "lambda" in rec else None,
            p=PNorm.parse(rec["p"]),
            theta=parse_rational(rec["theta"]),
        )
        return family, Dims(int(rec["N1"]), int(rec["N2"]))
    except (KeyError, ValueError) as e:
        raise ProtocolError(f"malformed problem record: {e}") from None


def _canonical_int(s) -> int:
    if not isinstance(s, str) or s != str(_to_int(s)):
        raise ProtocolError(f"non-canonical integer {s!r}")
    return int(s)


def _to_int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ProtocolError(f"not an integer: {s!r}") from None


def parse_vector(items, length: int) -> tuple:
    if not isinstance(items, list) or len(items) != length:
        raise ProtocolError(f"answer vector must have {length} entries")
    out = []
    for pair in items:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ProtocolError(f"vector entries are [num, den] pairs, got {pair!r}")
        num, den = _canonical_int(pair[0]), _canonical_int(pair[1])
        if den <= 0 or math.gcd(num, den) != 1:
            raise ProtocolError(f"non-canonical rational {pair[0]}/{pair[1]}")
        out.append(Fraction(num, den))
    return tuple(out)


def vector_record(v) -> list:
    return [[str(Fraction(x).numerator), str(Fraction(x).denominator)] for x in v]


def parse_value(q) -> Fraction:
    if not isinstance(q, str):
        raise ProtocolError(f"value must be a 'num/den' string, got {q!r}")
    try:
        return parse_rational(q, strict=True)
    except ValueError as e:
        raise ProtocolError(str(e)) from None


def _decode(line: str) -> dict:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError(f"malformed record {line.strip()!r}") from None
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError(f"record lacks a type: {line.strip()!r}")
    return msg


def _encode(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":")) + "\n"


class _Session:
    """One subprocess conversation. Lines are read on a helper thread so the timeout can fire."""

    def __init__(self, command: str, timeout: float):
        self.timeout = timeout
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
        self.lines: queue.Queue = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self):
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(None)

    def send(self, msg: dict) -> None:
        try:
            self.proc.stdin.write(_encode(msg))
            self.proc.stdin.flush()
        except BrokenPipeError:
            raise ProtocolError("subject closed its input") from None

    def recv(self) -> dict:
        try:
            line = self.lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ProtocolError(f"subject silent for {self.timeout}s") from None
        if line is None:
            raise ProtocolError("subject exited without a final record")
        return _decode(line)

    def close(self):
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()
        for f in (self.proc.stdin, self.proc.stdout):
            try:
                f.close()
            except OSError:
                pass


def _converse(command: str, family: Family, dims: Dims, oracle, final: str, timeout: float):
    session = _Session(command, timeout)
    try:
        session.send(problem_record(family, dims))
        while True:
            msg = session.recv()
            kind = msg["type"]
            if kind == "query":
                i, n = msg.get("coord"), msg.get("precision")
                if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= dims.k:
                    raise ProtocolError(f"query coordinate {i!r} outside 1..{dims.k}")
                if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                    raise ProtocolError(f"query precision {n!r} must be a positive integer")
                session.send({"type": "value", "q": format_rational(oracle(i, n))})
            elif kind == final == "answer":
                return parse_vector(msg.get("vector"), dims.N1)
            elif kind == final == "flag":
                if msg.get("value") not in (0, 1) or isinstance(msg.get("value"), bool):
                    raise ProtocolError(f"flag must be 0 or 1, got {msg.get('value')!r}")
                return msg["value"]
            else:
                raise ProtocolError(f"unexpected record type {kind!r}")
    finally:
        session.close()


def external_solver(name: str, command: str, declared_size: int, timeout: float = DEFAULT_TIMEOUT) -> SolverHandle:
    def run(oracle, family, dims):
        return _converse(command, family, dims, oracle, "answer", timeout)

    return SolverHandle(name, run, "external", declared_size, command)


def external_checker(name: str, command: str, declared_size: int, timeout: float = DEFAULT_TIMEOUT) -> CheckerHandle:
    def run(oracle, family, dims):
        return _converse(command, family, dims, oracle, "flag", timeout)

    return CheckerHandle(name, run, "external", declared_size, command)


def external_ptm(name: str, command: str, timeout: float = DEFAULT_TIMEOUT) -> PTM:
    """PTM whose input must be JSON-serialisable; tape bits are handed out on request."""

    def run(inp, bits: str):
        session = _Session(command, timeout)
        used = 0
        try:
            session.send({"type": "problem", "input": inp})
            while True:
                msg = session.recv()
                if msg["type"] == "need_bits":
                    c = msg.get("count")
                    if not isinstance(c, int) or isinstance(c, bool) or c < 1:
                        raise ProtocolError(f"bad bit request {c!r}")
                    if used + c > len(bits):
                        return NeedsMoreBits
                    session.send({"type": "bits", "s": bits[used : used + c]})
                    used += c
                elif msg["type"] in ("output", "flag"):
                    return msg.get("value")
                else:
                    raise ProtocolError(f"unexpected record type {msg['type']!r}")
        finally:
            session.close()

    return PTM(name, run)


# --- subject side --------------------------------------------------------------


class SubjectChannel:
    """The subject's end of the protocol, over arbitrary text streams."""

    def __init__(self, stdin: TextIO = sys.stdin, stdout: TextIO = sys.stdout):
        self.stdin, self.stdout = stdin, stdout

    def send(self, msg: dict) -> None:
        self.stdout.write(_encode(msg))
        self.stdout.flush()

    def recv(self) -> dict:
        line = self.stdin.readline()
        if not line:
            raise ProtocolError("harness closed the channel")
        return _decode(line)

    def problem(self) -> tuple:
        return parse_problem(self.recv())

    def query(self, i: int, n: int) -> Fraction:
        self.send({"type": "query", "coord": i, "precision": n})
        msg = self.recv()
        if msg["type"] != "value":
            raise ProtocolError(f"expected a value record, got {msg!r}")
        return parse_value(msg.get("q"))

    def bits(self, count: int) -> str:
        self.send({"type": "need_bits", "count": count})
        msg = self.recv()
        if msg["type"] != "bits":
            raise ProtocolError(f"expected a bits record, got {msg!r}")
        return msg["s"]


def serve_solver(solve: Callable, channel: Optional[SubjectChannel] = None) -> None:
    ch = channel or SubjectChannel()
    family, dims = ch.problem()
    ch.send({"type": "answer", "vector": vector_record(solve(ch.query, family, dims))})


def serve_checker(check: Callable, channel: Optional[SubjectChannel] = None) -> None:
    ch = channel or SubjectChannel()
    family, dims = ch.problem()
    ch.send({"type": "flag", "value": int(check(ch.query, family, dims))})


def builtin_command(role: str, name: str) -> str:
    """Command line that serves a built-in subject over this protocol."""
    return f"{shlex.quote(sys.executable)} -m crpkit.external {role} {shlex.quote(name)}"


def serve_flag34(channel: Optional[SubjectChannel] = None) -> None:
    """Bit-consuming checker that says 1 unless its first two bits are both 1."""
    ch = channel or SubjectChannel()
    ch.recv()
    value = 1 if ch.bits(1) == "0" or ch.bits(1) == "0" else 0
    ch.send({"type": "output", "value": value})

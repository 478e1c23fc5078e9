import io
import json
import sys
import textwrap
from fractions import Fraction as F

import pytest

from crpkit import catalog, protocol
from crpkit.adversary import attack_checker, attack_solver, verify_certificate
from crpkit.errors import ProtocolError
from crpkit.markov import Diagonal, metered_run, parse_descriptor, serialize
from crpkit.problems import Dims, Family
from crpkit.randomized import FAIR_COIN, NeedsMoreBits, derandomize_multi_valued
from crpkit.store import payload

LP = Family.lp()
D2 = Dims(2)
IDENTITY = ("solver", "checker", "descriptor", "descriptor_bytes")


def _strip_identity(cert) -> dict:
    rec = cert.record()
    return {k: v for k, v in rec.items() if k not in IDENTITY}


def _ext_solver(name):
    return protocol.external_solver(f"ext-{name}", protocol.builtin_command("solver", name), 999, timeout=60)


@pytest.mark.parametrize("name", ["Blind", "AlwaysY2", "OneQuery", "SnapAt(4)"])
def test_external_twin_gives_identical_certificate(name):
    internal = attack_solver(catalog.SOLVERS[name], LP, D2)
    external = attack_solver(_ext_solver(name), LP, D2)
    assert json.dumps(_strip_identity(internal), sort_keys=True) == json.dumps(_strip_identity(external), sort_keys=True)


def test_external_checker_twin():
    ext = protocol.external_checker("ext-Always0", protocol.builtin_command("checker", "Always0"), 10, timeout=60)
    a = attack_checker(catalog.SOLVERS["Blind"], catalog.CHECKERS["Always0"], LP, D2)
    b = attack_checker(catalog.SOLVERS["Blind"], ext, LP, D2)
    assert _strip_identity(a) == _strip_identity(b)


def test_external_descriptor_round_trip_and_rerun():
    ext = _ext_solver("Blind")
    d = Diagonal.plain(LP, Dims(3), ext)
    back = parse_descriptor(serialize(d))
    assert back == d
    verify_certificate(attack_solver(ext, LP, Dims(3)), rerun=True)


def _script(tmp_path, body: str) -> str:
    path = tmp_path / "subject.py"
    path.write_text(textwrap.dedent(body))
    return f"{sys.executable} {path}"


def _run_script(tmp_path, body):
    cmd = _script(tmp_path, body)
    return protocol.external_solver("script", cmd, 1, timeout=30)


def test_non_canonical_answer_is_a_protocol_error(tmp_path):
    solver = _run_script(
        tmp_path,
        """
        import json, sys
        sys.stdin.readline()
        print(json.dumps({"type": "answer", "vector": [["2", "4"], ["0", "1"]]}), flush=True)
        """,
    )
    with pytest.raises(ProtocolError):
        metered_run(Diagonal.plain(LP, D2, solver))


def test_out_of_range_query_is_a_protocol_error(tmp_path):
    solver = _run_script(
        tmp_path,
        """
        import json, sys
        sys.stdin.readline()
        print(json.dumps({"type": "query", "coord": 99, "precision": 1}), flush=True)
        sys.stdin.readline()
        """,
    )
    with pytest.raises(ProtocolError):
        metered_run(Diagonal.plain(LP, D2, solver))


def test_silent_subject_times_out(tmp_path):
    cmd = _script(tmp_path, "import time\ntime.sleep(30)\n")
    solver = protocol.external_solver("sleepy", cmd, 1, timeout=0.5)
    with pytest.raises(ProtocolError):
        metered_run(Diagonal.plain(LP, D2, solver))


def test_garbage_and_early_exit(tmp_path):
    solver = _run_script(tmp_path, "import sys\nsys.stdin.readline()\nprint('hello', flush=True)\n")
    with pytest.raises(ProtocolError):
        metered_run(Diagonal.plain(LP, D2, solver))
    solver = protocol.external_solver("quits", _script(tmp_path, "pass\n"), 1, timeout=10)
    with pytest.raises(ProtocolError):
        metered_run(Diagonal.plain(LP, D2, solver))


def test_parse_vector_and_value():
    assert protocol.parse_vector([["2", "5"], ["0", "1"]], 2) == (F(2, 5), 0)
    for bad in ([["2", "4"], ["0", "1"]], [["1", "-2"], ["0", "1"]], [["01", "2"], ["0", "1"]], [["1", "2"]], [[1, 2], ["0", "1"]]):
        with pytest.raises(ProtocolError):
            protocol.parse_vector(bad, 2)
    assert protocol.parse_value("-1/2") == F(-1, 2)
    for bad in ("2/4", "1", 0.5):
        with pytest.raises(ProtocolError):
            protocol.parse_value(bad)


def test_problem_record_round_trip():
    for fam in (LP, Family.bp(), Family.lasso(p=2)):
        rec = protocol.problem_record(fam, Dims(4, 2))
        assert protocol.parse_problem(json.loads(json.dumps(rec))) == (fam, Dims(4, 2))
    with pytest.raises(ProtocolError):
        protocol.parse_problem({"type": "value"})


def test_subject_channel_in_memory():
    inbound = io.StringIO(
        json.dumps(protocol.problem_record(LP, D2)) + "\n" + json.dumps({"type": "value", "q": "1/2"}) + "\n"
    )
    out = io.StringIO()
    protocol.serve_solver(catalog.one_query, protocol.SubjectChannel(inbound, out))
    lines = [json.loads(x) for x in out.getvalue().splitlines()]
    assert lines[0] == {"type": "query", "coord": 1, "precision": 1}
    assert lines[1] == {"type": "answer", "vector": [["2", "5"], ["0", "1"]]}


def test_external_ptm_bits():
    ptm = protocol.external_ptm("ext-Flag34", protocol.builtin_command("ptm", "Flag34"), timeout=60)
    assert ptm(None, "") is NeedsMoreBits
    assert ptm(None, "0") == 1
    assert ptm(None, "10") == 1
    assert ptm(None, "11") == 0
    assert derandomize_multi_valued(ptm, FAIR_COIN, None, F(3, 4), 1) == (1, 2)


def test_payload_is_stable():
    a = payload(attack_solver(catalog.SOLVERS["OneQuery"], LP, D2))
    b = payload(attack_solver(catalog.SOLVERS["OneQuery"], LP, D2))
    assert a == b

"""Smoke tests for the python module: load the reference bundle, run it,
poke the helpers. Plain asserts, no test framework."""

import os
import sys

import mcastsim


def fixtures(rel):
    root = os.environ.get(
        "MCASTSIM_FIXTURES",
        os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"),
    )
    return os.path.join(root, rel)


def test_addressing():
    assert mcastsim.is_multicast("224.224.224.224")
    assert not mcastsim.is_multicast("10.10.10.10")
    assert mcastsim.broadcast_of("10.10.10.0/24") == "10.10.10.255"
    assert mcastsim.prefix_contains("172.16.1.0/24", "172.16.1.1")
    assert not mcastsim.prefix_contains("172.16.1.0/24", "172.16.2.245")
    try:
        mcastsim.is_multicast("not-an-address")
    except ValueError:
        pass
    else:
        raise AssertionError("bad address must raise")


def test_checksum():
    assert mcastsim.internet_checksum(b"") == 0xFFFF
    assert mcastsim.internet_checksum(b"\x00\x01") == 0xFFFE


def test_decode():
    hello = bytes.fromhex("3000cf960069")
    msg = mcastsim.decode_message(hello)
    assert msg["protocol"] == "pim"
    assert msg["kind"] == "hello"
    assert msg["holdtime_ms"] == 105000
    corrupted = bytes.fromhex("3000cf960068")
    assert mcastsim.decode_message(corrupted)["error"] == "BadChecksum"


def test_check_config():
    with open(fixtures("reference/r1.boot")) as f:
        assert mcastsim.check_config(f.read()) == []
    errors = mcastsim.check_config("interfaces { interface a { mtu: 1500 } }")
    assert errors and "mtu" in errors[0]


def load_reference():
    return mcastsim.Sim.load(
        fixtures("reference/topology.topo"),
        {
            "R1": fixtures("reference/r1.boot"),
            "R2": fixtures("reference/r2.boot"),
        },
        fixtures("reference/scenario.events"),
        until=40000,
    )


def test_run_reference():
    sim = load_reference()
    report = sim.run()
    assert report["passed"]
    assert len(report["assertions"]) == 16
    assert all(a["pass"] for a in report["assertions"])
    assert sim.delivered("U1", "224.224.224.224") > 0
    assert sim.delivered("U2", "224.224.224.224") > 0

    mfib = sim.show("mfib", "R2")
    assert "(*,224.224.224.224)" in mfib
    routes = sim.show("route", "R1")
    assert "172.16.1.0/24 via 172.16.2.240 dev eth1" in routes


def test_mid_run_state():
    sim = load_reference()
    sim.run_until(15000)
    join = sim.show("pim join", "R2")
    assert "iif=sis1 oifs={sis0} upstream=172.16.2.245" in join


def test_determinism():
    sim_a = load_reference()
    sim_a.run()
    sim_b = load_reference()
    sim_b.run()
    assert sim_a.event_log() == sim_b.event_log()
    assert len(sim_a.event_log()) > 0


def test_load_errors():
    try:
        mcastsim.Sim.load(
            fixtures("reference/topology.topo"),
            {"R1": fixtures("reference/r1.boot")},
            "/nonexistent/scenario.events",
        )
    except ValueError as e:
        assert "cannot read" in str(e)
    else:
        raise AssertionError("missing file must raise")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())

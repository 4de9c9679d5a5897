"""Smoke test for the pyicn5gc extension.

Build and install first, e.g. ``pip install maturin && maturin develop -m crates/py/Cargo.toml``,
or ``cargo build --release -p icn5gc-py --features extension-module`` and put
``target/release/libpyicn5gc.so`` on the path as ``pyicn5gc.so``.
"""

import sys

import pyicn5gc


def main() -> int:
    names = pyicn5gc.bundled()
    assert "handover" in names and "mec_icn" in names, names

    icn = pyicn5gc.run("mec_icn")
    ip = pyicn5gc.run("mec_ip")
    assert icn["quiescent"] and ip["quiescent"]
    assert icn["counters"]["upstream_fetches"] == 1
    assert icn["counters"]["cache_hits"] == icn["counters"]["requests_served"] - 1
    assert ip["counters"]["upstream_fetches"] == ip["counters"]["requests_served"]
    assert not icn["inconsistencies"], icn["inconsistencies"]

    ho = pyicn5gc.run("handover")
    assert ho["counters"]["handovers_completed"] == 1
    assert [s[0] for s in ho["steps"]] == list(range(1, 13))
    assert ho["residue"] == []

    again = pyicn5gc.run("handover")
    assert again["trace"] == ho["trace"] and again["metrics"] == ho["metrics"]

    small = pyicn5gc.run_text(pyicn5gc.generate("icn-mec", vehicles=3, seed=1))
    assert small["counters"]["requests_served"] == 3

    try:
        pyicn5gc.run_text('mode = "handover"\n[[link]]\na = "x"\nb = "y"\nlatency_ms = 1\n')
    except ValueError as e:
        assert "link[0]" in str(e)
    else:
        raise AssertionError("invalid scenario accepted")

    print(f"ok: {len(names)} bundled scenarios, "
          f"icn hits {icn['counters']['cache_hits']}, handover {ho['handover_duration']} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())

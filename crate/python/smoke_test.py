"""Smoke test for the spi_boxpush extension module.

Build with `cargo build -p spi-py --release`, then copy or symlink
`target/release/libspi_boxpush.so` to `spi_boxpush.so` somewhere on
PYTHONPATH (this script also looks in target/{release,debug}).
"""

import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def import_module():
    try:
        import spi_boxpush
        return spi_boxpush
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = os.path.join(ROOT, "target", profile, "libspi_boxpush.so")
        if os.path.exists(lib):
            dest = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(dest, "spi_boxpush.so"))
            sys.path.insert(0, dest)
            import spi_boxpush
            return spi_boxpush
    sys.exit("spi_boxpush not built; run `cargo build -p spi-py` first")


def main():
    spi = import_module()

    scenario = spi.Scenario()
    world = spi.World(scenario)
    state = world.initial_state()
    state, info = world.step(state, [1] * 15, 1.0)
    assert math.isclose(info["displacement"][0], 15.0)
    assert not info["collided"] and state.step_index == 1

    bits = spi.encode_state(scenario, *scenario.box_start, 0.0)
    assert len(bits) == 9 and -1.0 <= bits[8] < 1.0

    m = spi.SpiMap.build(40, 0.1, 0.3, seed=1)
    m.check()
    assert len(m) == 40 and math.isclose(sum(m.pdl(0)), 1.0)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "map.txt")
        m.save(path)
        assert spi.SpiMap.load(path).pdl(7) == m.pdl(7)

    rnd = spi.fitness_report(None, n_sims=20000, seed=3)
    sp = spi.fitness_report(m, n_sims=20000, seed=3)
    assert sp["origin_avoidance"] > rnd["origin_avoidance"]

    assert spi.total_reward(100.0, 95.0, 0.5, 0.5) > 25.0
    assert spi.collision_reward(True) == -900.0

    log = spi.train("random", episodes=5, seed=2)
    assert len(log) == 5 and log[0]["outcome"] in {"success", "collision", "timeout"}

    try:
        spi.SpiMap.build(40, 0.9, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("infeasible parameters accepted")

    print("smoke test ok:", repr(m), "random", round(rnd["origin_avoidance"], 3), "spi", round(sp["origin_avoidance"], 3))


if __name__ == "__main__":
    main()

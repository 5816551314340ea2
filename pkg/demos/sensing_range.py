"""Sensing range and fragmentation.

With limited sensing each agent only links to neighbors it can see, so the
swarm can settle as several separate discs instead of one connected disc.
In the dense 100 x 100 field all ranges tried give one component; in a sparse
400 x 400 field the count falls steadily as the range grows.
"""

from swarmform import ScenarioConfig, run

RANGES = (20.0, 30.0, 40.0, 60.0)


def sweep(region, seeds):
    for seed in seeds:
        row = []
        for r in RANGES:
            cfg = ScenarioConfig(n_agents=100, region=region, seed=seed, sensing_range=r, max_steps=3000)
            row.append(run(cfg).summary["final_component_count"])
        print(f"  seed {seed}: " + "  ".join(f"R={r:g}: {c:>3}" for r, c in zip(RANGES, row)))


if __name__ == "__main__":
    print("dense field 100 x 100")
    sweep((100.0, 100.0), range(2))
    print("sparse field 400 x 400")
    sweep((400.0, 400.0), range(3))

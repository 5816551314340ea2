"""Line formation from paired elements.

Twenty agents first pair up at a tiny spacing, the pairs are chained into a
single path at the desired spacing, and finally the two agents at the ends of
the chain are pushed apart so the chain straightens. Only those two agents
ever receive an outside force.
"""

import numpy as np

from swarmform import ScenarioConfig, run
from swarmform.behaviors import phase_rank

from _plot import draw_links, figure

if __name__ == "__main__":
    cfg = ScenarioConfig(behavior="line", n_agents=20, seed=3, max_steps=3000)
    result = run(cfg)

    labels = [rec["phase_label"] for rec in result.metrics_series]
    ranks = [phase_rank(lab) for lab in labels]
    for phase in ("Pairing", "Chaining", "Stretching"):
        first = next((i for i, lab in enumerate(labels) if lab.startswith(phase)), None)
        print(f"{phase:<10} entered at step {result.sample_steps[first] if first is not None else '-'}")
    assert ranks == sorted(ranks)

    s = result.summary
    print(f"final eigenvalue ratio {s['final_eigen_ratio']:.2e}; forced agents {s['forced_agents']}")
    ratios = np.array([rec["eigen_ratio"] for rec in result.metrics_series])
    for step in (0, 250, 500, 1000, 2000, len(ratios) - 1):
        if step < len(ratios):
            print(f"  step {result.sample_steps[step]:>5}  eigen ratio {ratios[step]:.3e}")

    def draw(ax):
        pos = result.final_world.positions
        draw_links(ax, pos, result.final_links)
        ax.scatter(*pos.T, s=14, zorder=2)
        ax.scatter(*pos[s["forced_agents"]].T, s=40, color="tab:red", zorder=3, label="leaders")
        ax.set_aspect("equal")
        ax.legend()

    figure("line_formation", draw)

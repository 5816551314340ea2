"""Leaderless dispersion: every agent springs to its three nearest neighbors.

Fifty agents dropped uniformly into a 100 x 100 field spread out until each
link sits at the desired spacing. Prints the settling trace and writes the
final formation (with its links) as a figure when matplotlib is present.
"""

from swarmform import ScenarioConfig, run

from _plot import draw_links, figure

if __name__ == "__main__":
    cfg = ScenarioConfig(n_agents=50, seed=1, L_d=10.0)
    result = run(cfg)
    s = result.summary
    print(f"converged={s['converged']} after {s['steps']} steps")
    print(f"mean |link length - {cfg.L_d}| = {s['final_mean_abs_error']:.4f}")
    for rec in result.metrics_series[:: max(1, len(result.metrics_series) // 8)]:
        print(f"  step {rec['step']:>5}  max speed {rec['max_speed']:.4f}  "
              f"mean |error| {rec['mean_abs_error']:.4f}")

    def draw(ax):
        pos = result.final_world.positions
        draw_links(ax, pos, result.final_links)
        ax.scatter(*result.positions[0].T, s=8, color="tab:gray", label="start")
        ax.scatter(*pos.T, s=14, color="tab:blue", label="final", zorder=2)
        ax.set_aspect("equal")
        ax.legend()

    figure("dispersion", draw)

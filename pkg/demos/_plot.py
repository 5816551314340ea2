"""Optional plotting helper shared by the demos; silently skipped without matplotlib."""

from pathlib import Path

OUT = Path(__file__).parent / "out"


def figure(name, draw):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("(matplotlib not installed, skipping figure)")
        return None
    OUT.mkdir(exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 5))
    draw(ax)
    path = OUT / f"{name}.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    print(f"figure written to {path}")
    return path


def draw_links(ax, positions, links, **kw):
    for s, d in zip(links.src, links.dst):
        if s < d:
            ax.plot(*positions[[s, d]].T, color="0.7", lw=0.6, zorder=1, **kw)

"""Delimited output, plot-script emission and figure rendering.

CSV files carry one row per full grid node (half-step samples stay
internal), real and imaginary parts in separate columns, 17 significant
digits so values round-trip binary doubles exactly, LF line endings and a
final newline.
"""

import csv

import numpy as np

from .errors import InvalidProblemError
from .numerics import Trajectory

__all__ = ["emit_csv", "emit_sweep_csv", "read_csv", "emit_plot_script",
           "render_figure", "render_sweep_figure"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def emit_csv(trajectory: Trajectory, path) -> None:
    """Write `x,re_u1,im_u1[,re_u2,im_u2]` rows for the full grid nodes."""
    xs = trajectory.grid.nodes()
    vals = trajectory.at_full_nodes()
    two = trajectory.components == 2
    header = "x,re_u1,im_u1,re_u2,im_u2" if two else "x,re_u1,im_u1"
    lines = [header]
    for k, x in enumerate(xs):
        v = vals[k]
        if two:
            row = (x, v[0].real, v[0].imag, v[1].real, v[1].imag)
        else:
            row = (x, v.real, v.imag)
        lines.append(",".join(_fmt(c) for c in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_sweep_csv(slices, path) -> None:
    """Write per-parameter trajectory slices with a leading xi column.

    ``slices`` is a sequence of (xi, Trajectory) pairs, emitted in order.
    """
    if not slices:
        raise InvalidProblemError("sweep produced no slices")
    two = slices[0][1].components == 2
    header = "xi,x,re_u1,im_u1,re_u2,im_u2" if two else "xi,x,re_u1,im_u1"
    lines = [header]
    for xi, traj in slices:
        xs = traj.grid.nodes()
        vals = traj.at_full_nodes()
        for k, x in enumerate(xs):
            v = vals[k]
            if two:
                row = (xi, x, v[0].real, v[0].imag, v[1].real, v[1].imag)
            else:
                row = (xi, x, v.real, v.imag)
            lines.append(",".join(_fmt(c) for c in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read an emitted CSV back as (x, values); inverse of :func:`emit_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    ncomp = (len(header) - 1) // 2
    xs = np.array([float(r[0]) for r in data])
    if ncomp == 1:
        vals = np.array([complex(float(r[1]), float(r[2])) for r in data])
    else:
        vals = np.array([[complex(float(r[1]), float(r[2])),
                          complex(float(r[3]), float(r[4]))] for r in data])
    return xs, vals


def _csv_components(csv_path) -> int:
    with open(csv_path, newline="") as fh:
        header = fh.readline().strip()
    return (len(header.split(",")) - 1) // 2


def emit_plot_script(csv_path: str, out_path) -> None:
    """Write a gnuplot script that plots the named CSV; never runs gnuplot.

    The script references the CSV by the (relative or absolute) path it was
    given, with re/im/abs curves per component.
    """
    ncomp = _csv_components(csv_path)
    lines = [
        "set datafile separator ','",
        "set key outside",
        "set xlabel 'x'",
        "plot \\",
    ]
    curves = []
    for c in range(ncomp):
        re_col, im_col = 2 + 2 * c, 3 + 2 * c
        suffix = f"_u{c + 1}" if ncomp > 1 else ""
        curves.append(f"  '{csv_path}' skip 1 using 1:{re_col} with lines title 're{suffix}'")
        curves.append(f"  '{csv_path}' skip 1 using 1:{im_col} with lines title 'im{suffix}'")
        curves.append(f"  '{csv_path}' skip 1 using 1:(sqrt(${re_col}**2+${im_col}**2)) "
                      f"with lines title 'abs{suffix}'")
    lines.append(", \\\n".join(curves))
    with open(out_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def render_figure(csv_path, out_path, title: str | None = None) -> None:
    """Render the emitted CSV to an image file next to the delimited output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs, vals = read_csv(csv_path)
    if vals.ndim == 1:
        vals = vals[:, None]
    fig, axes = plt.subplots(1, vals.shape[1], figsize=(6 * vals.shape[1], 4),
                             squeeze=False)
    for c in range(vals.shape[1]):
        ax = axes[0, c]
        ax.plot(xs, vals[:, c].real, label="re")
        ax.plot(xs, vals[:, c].imag, label="im")
        ax.plot(xs, np.abs(vals[:, c]), label="abs", linestyle="--")
        ax.set_xlabel("x")
        if vals.shape[1] > 1:
            ax.set_title(f"component {c + 1}")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_sweep_figure(slices, out_path) -> None:
    """Plot the end-of-interval state against the swept parameter."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xis = np.array([xi for xi, _ in slices])
    finals = np.array([traj.values[-1] for _, traj in slices])
    if finals.ndim == 1:
        finals = finals[:, None]
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in range(finals.shape[1]):
        ax.plot(xis, np.abs(finals[:, c]), marker=".", label=f"|u{c + 1}(x0)|")
    ax.set_xlabel("xi")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)

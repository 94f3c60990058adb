"""
Original vs attacked series overlays (SVG)
"""

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_STYLE = {
    "path.simplify": False,
    "svg.hashsalt": "concealed-attacks",
    "svg.fonttype": "none",
}


def emit_plot(original, attacked, path: Union[str, Path], truncate: Optional[int] = None,
              title: Optional[str] = None) -> Path:
    """
    Draw the attacked series over the original one

    Args:
        original: clean series (1-D)
        attacked: perturbed series, same length
        path: output .svg file
        truncate: keep only the first `truncate` points (e.g. 50 or 100 for long series)
        title: optional axes title

    Returns:
        Path of the written file
    """
    original = np.asarray(original, dtype=np.float64).ravel()
    attacked = np.asarray(attacked, dtype=np.float64).ravel()
    if original.shape != attacked.shape:
        raise ValueError(f"series lengths differ: {original.shape[0]} vs {attacked.shape[0]}")
    if truncate is not None:
        original, attacked = original[:truncate], attacked[:truncate]

    path = Path(path)
    steps = np.arange(original.shape[0])
    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(8, 3))
        try:
            ax.plot(steps, original, color="tab:blue", linewidth=1.5, label="original")
            ax.plot(steps, attacked, color="tab:red", linewidth=1.0, linestyle="--", label="attacked")
            ax.set_xlabel("time step")
            ax.set_ylabel("value")
            if title:
                ax.set_title(title)
            ax.legend(loc="upper right")
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path

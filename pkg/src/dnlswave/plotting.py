"""Matplotlib figures written next to the tabular outputs (PNG, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def profile_figure(path, j, u, title=""):
    """Lattice profile as markers on stems, the usual way to draw a kink."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.plot(j, u, "o-", ms=3, color="k")
        ax.set_xlabel("j")
        ax.set_ylabel("u_j")
        ax.set_ylim(-1.1, 1.1)
        ax.set_title(title)
        return _save(fig, path)


def trace_figure(path, energy, residual, title=""):
    with plt.rc_context(STYLE):
        fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(5.0, 4.2))
        steps = np.arange(len(energy))
        a1.plot(steps, energy, color="k")
        a1.set_ylabel("E")
        a2.semilogy(steps, np.maximum(residual, 1e-300), color="k")
        a2.set_ylabel("residual")
        a2.set_xlabel("step")
        a1.set_title(title)
        return _save(fig, path)


def psi_figure(path, eta, psi, big_psi, title=""):
    """psi (black) and Psi (gray) against eta."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(eta, psi, color="k", label="psi")
        ax.plot(eta, big_psi, color="0.55", label="Psi")
        ax.set_xlabel("eta")
        ax.legend(frameon=False)
        ax.set_title(title)
        return _save(fig, path)


def overlay_figure(path, runs, xi, u_limit, title=""):
    """Continuum profile with the eps-lattice samples on top.

    ``runs`` is a list of (eps, positions, values).
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(xi, u_limit, color="0.4", lw=2, label="limit")
        for eps, pos, vals in runs:
            ax.plot(pos, vals, ".", ms=3, label=f"eps={eps:g}")
        ax.set_xlabel("xi")
        ax.set_ylabel("u")
        ax.legend(frameon=False, fontsize=7)
        ax.set_title(title)
        return _save(fig, path)


def convergence_figure(path, eps, errors, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(eps, errors, "o-", color="k")
        ax.set_xlabel("eps")
        ax.set_ylabel("sup error")
        ax.set_title(title)
        return _save(fig, path)


def dynamics_figure(path, t, amp, phase, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(t, np.maximum(amp, 1e-300), color="k", label="amplitude")
        ax.semilogy(t, np.maximum(phase, 1e-300), color="0.55", label="phase")
        ax.set_xlabel("t")
        ax.legend(frameon=False)
        ax.set_title(title)
        return _save(fig, path)


def sweep_figure(path, ns, energies, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(ns, energies, "o-", color="k")
        ax.set_xlabel("N")
        ax.set_ylabel("min E")
        ax.set_title(title)
        return _save(fig, path)

"""SVG plot emission (optional: degrades to a warning when matplotlib is
missing, since every figure duplicates data already in a CSV)."""

from __future__ import annotations

import os
import tempfile

import numpy as np

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    HAVE_MPL = True
except ImportError:
    HAVE_MPL = False


def _save_atomic(fig, path) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".svg")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    finally:
        plt.close(fig)


def density_plot(h, path) -> bool:
    if not HAVE_MPL:
        return False
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(h.midpoints(), h.values, where="mid", lw=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("h(x)")
    ax.set_title("invariant density")
    _save_atomic(fig, path)
    return True


def spectrum_plot(report, path) -> bool:
    if not HAVE_MPL:
        return False
    fig, ax = plt.subplots(figsize=(5, 5))
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="0.8", lw=0.8)
    vals = np.asarray(report.eigenvalues, dtype=complex)
    ax.scatter(vals.real, vals.imag, s=24, zorder=3)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    ax.set_title(f"leading eigenvalues (gap {report.spectral_gap:.4g})")
    _save_atomic(fig, path)
    return True


def correlation_plot(series, path) -> bool:
    if not HAVE_MPL:
        return False
    fig, ax = plt.subplots(figsize=(7, 4))
    C = np.maximum(series.C_values, 1e-17)
    ax.semilogy(series.N_values, C, marker="o", ms=3, lw=1.0)
    if series.fitted_rate is not None:
        ax.set_title(f"correlation decay, rate ≈ {series.fitted_rate:.4g}")
    else:
        ax.set_title("correlation decay (at noise floor)")
    ax.set_xlabel("N")
    ax.set_ylabel("C(N)")
    _save_atomic(fig, path)
    return True

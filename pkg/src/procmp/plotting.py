"""Static figures: channel values, minimal distances, attack indicator.

Three stacked panels on a shared sample axis. The top panel draws raw
channel values (step rendering for discrete channels), the middle panel
draws one distance trace per profile with an optional threshold line,
the bottom panel shows where attacks are active, taken from a label
track or a ground-truth attack list.

Figures are deterministic: a fixed svg.hashsalt and stripped timestamps
make repeated renders of the same inputs byte-identical for SVG and PDF.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .distances import DISCRETE, Channel
from .errors import InvalidDataError
from .ioutil import atomic_write_bytes
from .profile import MatrixProfile

plt.rcParams["svg.hashsalt"] = "procmp"

# timestamp-bearing metadata per format, blanked for reproducible bytes
_METADATA = {
    "svg": {"Date": None},
    "pdf": {"CreationDate": None},
    "png": {},
}


def _attack_track(n: int, labels, attacks) -> np.ndarray:
    if labels is not None:
        track = np.asarray(labels, dtype=bool)
        if track.size != n:
            raise InvalidDataError(
                f"label track has {track.size} entries, channels have {n}"
            )
        return track
    track = np.zeros(n, dtype=bool)
    for a in attacks or []:
        if a.end >= n:
            raise InvalidDataError(
                f"attack [{a.start}, {a.end}] runs past the {n}-sample log"
            )
        track[a.start:a.end + 1] = True
    return track


def detection_figure(
    channels: list[Channel],
    profiles: list[MatrixProfile],
    labels=None,
    attacks=None,
    threshold: float | None = None,
    title: str | None = None,
):
    """Build the three-panel figure; caller owns (and closes) it."""
    if not channels:
        raise InvalidDataError("no channels to plot")
    if len(profiles) != len(channels):
        raise InvalidDataError(
            f"{len(channels)} channels but {len(profiles)} profiles"
        )
    n = len(channels[0])
    for ch in channels[1:]:
        if len(ch) != n:
            raise InvalidDataError(
                f"channel {ch.name!r} has {len(ch)} samples, expected {n}"
            )
    for ch, prof in zip(channels, profiles):
        if len(prof) != n - prof.window + 1:
            raise InvalidDataError(
                f"profile for {ch.name!r} has {len(prof)} positions, "
                f"expected {n - prof.window + 1}"
            )
    track = _attack_track(n, labels, attacks)

    fig, (ax_val, ax_dist, ax_att) = plt.subplots(
        3,
        1,
        sharex=True,
        figsize=(11.0, 6.0),
        gridspec_kw={"height_ratios": [3, 3, 1]},
    )
    t = np.arange(n)
    for ch in channels:
        if ch.kind == DISCRETE:
            ax_val.step(t, ch.values, where="post", linewidth=0.9, label=ch.name)
        else:
            ax_val.plot(t, ch.values, linewidth=0.9, label=ch.name)
    ax_val.set_ylabel("value")
    ax_val.legend(loc="upper right", fontsize="small")
    if title:
        ax_val.set_title(title)

    for ch, prof in zip(channels, profiles):
        pos = np.arange(len(prof))
        ax_dist.plot(
            pos, prof.distances, linewidth=0.9, label=f"{ch.name} ({prof.metric})"
        )
    if threshold is not None:
        ax_dist.axhline(threshold, color="black", linestyle="--", linewidth=0.8)
    ax_dist.set_ylabel("min distance")
    ax_dist.legend(loc="upper right", fontsize="small")

    ax_att.fill_between(t, 0, track.astype(float), step="post", color="#d62728")
    ax_att.set_ylim(-0.1, 1.1)
    ax_att.set_yticks([0, 1])
    ax_att.set_ylabel("attack")
    ax_att.set_xlabel("sample")

    fig.align_ylabels()
    fig.tight_layout()
    return fig


def save_figure(fig, path) -> None:
    """Render to SVG/PDF/PNG by suffix, write atomically, close the figure."""
    suffix = str(path).rsplit(".", 1)[-1].lower()
    if suffix not in _METADATA:
        raise InvalidDataError(
            f"unsupported figure format {suffix!r}; use svg, pdf, or png"
        )
    buf = io.BytesIO()
    try:
        fig.savefig(buf, format=suffix, metadata=_METADATA[suffix] or None)
    finally:
        plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())

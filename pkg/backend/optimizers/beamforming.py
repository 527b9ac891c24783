from typing import Tuple, Union

import numpy as np

from backend.models import ChannelMatrix


def update_beamformers(h_eff: Union[ChannelMatrix, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Dominant right/left singular vectors of H as (w, g), so |g H w| = σ_max.

    The phase is fixed by making the first nonzero entry of w real positive.
    A zero channel returns the first canonical vectors.
    """
    h = np.atleast_2d(h_eff.h if isinstance(h_eff, ChannelMatrix) else np.asarray(h_eff, dtype=complex))
    n_r, n_t = h.shape
    if not np.any(h):
        return np.eye(n_t, dtype=complex)[0], np.eye(n_r, dtype=complex)[0]

    u, _, vh = np.linalg.svd(h)
    w = vh[0].conj()
    g = u[:, 0].conj()

    lead = w[np.flatnonzero(np.abs(w) > 1e-14 * np.abs(w).max())[0]]
    rotation = np.exp(-1j * np.angle(lead))
    return w * rotation, g / rotation

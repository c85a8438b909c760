"""Pure NumPy decision kernel.

Mirrors _kernel.pyx operation for operation: every arithmetic step is the
same elementwise IEEE-754 double operation in the same order, so both
backends produce bit-identical scores and therefore identical choices.
"""

import numpy as np


def decide_round(
    liking: np.ndarray,        # float64 (n, cap)
    tolerance: np.ndarray,     # float64 (n,)
    advertisement: np.ndarray, # float64 (cap,)
    pen: np.ndarray,           # float64 (m,) per-item penalty this round
    nbr_counts: np.ndarray,    # int64 (n, cap)
    degrees: np.ndarray,       # int64 (n,)
    consumed: np.ndarray,      # uint8 (n, cap)
    gamma: float,
    blend_liking: bool,
    n_items: int,
    min_utility: float,
    has_min: bool,
    out: np.ndarray,           # int64 (n,)
) -> None:
    """Fill out[i] with agent i's chosen item id, or -1 for abstention.

    Scores only the first n_items columns. Ties go to the lowest item id.
    """
    n = tolerance.shape[0]
    m = n_items
    deg = degrees[:, None]

    pressure = np.zeros((n, m), dtype=np.float64)
    np.divide(nbr_counts[:, :m], deg, out=pressure, where=deg > 0)

    score = gamma * pressure
    if blend_liking:
        score += (1.0 - gamma) * liking[:, :m]
    score += tolerance[:, None] * advertisement[None, :m]
    score -= pen[None, :m]

    taken = consumed[:, :m] != 0
    score[taken] = -np.inf
    choice = np.argmax(score, axis=1).astype(np.int64)  # first max = lowest id
    open_slots = m - taken.sum(axis=1)
    if has_min:
        best = score[np.arange(n), choice]
        choice[best < min_utility] = -1
    choice[open_slots == 0] = -1
    out[:] = choice

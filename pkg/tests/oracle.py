"""Brute-force reference for one- and two-photon detector statistics.

Kept independent of the package's state engine: elements become dense
single-photon transfer matrices over the full mode list, compositions are
plain matrix products, and two-photon outputs are expanded term by term over
ordered mode pairs. Anything the sparse polynomial engine computes can be
cross-checked against this path.
"""

import math

import numpy as np


def full_transfer_matrix(element, registry) -> np.ndarray:
    """Embed an element's block into the identity on the whole registry."""
    n = len(registry)
    mat = np.eye(n, dtype=complex)
    idx = [registry.index(m) for m in element.target_modes]
    for r, i in enumerate(idx):
        for c, j in enumerate(idx):
            mat[i, j] = element.matrix[r, c]
    return mat


def compose(elements, registry) -> np.ndarray:
    """Net single-photon transfer of a sequence of elements (first applied first)."""
    n = len(registry)
    total = np.eye(n, dtype=complex)
    for element in elements:
        total = full_transfer_matrix(element, registry) @ total
    return total


def one_photon_distribution(transfer, mode_in: int) -> dict[int, float]:
    """P(photon out at mode k) for one photon injected at mode_in."""
    col = transfer[:, mode_in]
    return {k: float(abs(col[k]) ** 2) for k in range(len(col)) if abs(col[k]) ** 2 > 1e-20}


def two_photon_amplitudes(transfer, mode_i: int, mode_j: int) -> dict[tuple[int, int], complex]:
    """Output amplitudes over unordered mode pairs (k <= l) for a†_i a†_j input.

    Input and output kets are Fock-normalized, so a doubly occupied mode picks
    up the usual sqrt(2) factors.
    """
    n = transfer.shape[0]
    coeff: dict[tuple[int, int], complex] = {}
    for k in range(n):
        for l in range(n):
            c = transfer[k, mode_i] * transfer[l, mode_j]
            if c == 0:
                continue
            key = (k, l) if k <= l else (l, k)
            coeff[key] = coeff.get(key, 0j) + c
    norm_in = math.sqrt(2.0) if mode_i == mode_j else 1.0
    amps = {}
    for (k, l), c in coeff.items():
        amp = c * (math.sqrt(2.0) if k == l else 1.0) / norm_in
        if abs(amp) > 1e-14:
            amps[(k, l)] = amp
    return amps


def two_photon_distribution(transfer, mode_i: int, mode_j: int) -> dict[tuple[int, int], float]:
    return {
        pair: float(abs(amp) ** 2)
        for pair, amp in two_photon_amplitudes(transfer, mode_i, mode_j).items()
    }


def superposed_two_photon_distribution(transfer, terms) -> dict[tuple[int, int], float]:
    """Distribution for sum of weighted two-photon inputs [(coeff, i, j), ...]."""
    amps: dict[tuple[int, int], complex] = {}
    for coeff, i, j in terms:
        for pair, amp in two_photon_amplitudes(transfer, i, j).items():
            amps[pair] = amps.get(pair, 0j) + coeff * amp
    return {pair: float(abs(a) ** 2) for pair, a in amps.items() if abs(a) > 1e-14}

"""
Intensity data and the closed-form phase retrieval on the measurement plane.

With A(x) = sqrt(f(x, k_bar)) and g = (f(x, k) + 1) / (2 A(x)), the retrieved field is
u(x, k) = A(x) exp(i arccos(g) + i k R) on the principal branch. Nodes where |g| > 1, or
where the denominator vanishes, are clamped to the phase k R.
"""

import logging
from collections import namedtuple

import numpy as np

from .errors import InvalidInput
from .forward import phi_of_k
from .grid import ComplexPlaneData, IntensityData
from .libs.constants import MODULUS_FLOOR

logger = logging.getLogger("rainbow")

DENOMINATOR_FLOOR = 1e-12

TravelTime = namedtuple('TravelTime', ['tau', 'clamped', 'clamp_fraction'])
ClampStatistics = namedtuple('ClampStatistics', ['per_k', 'overall'])


def synthesize_intensity(u):
    return IntensityData(u.plane, u.k_values, np.abs(u.values) ** 2)


def add_noise(f, level, seed):
    "multiplicative uniform noise f * (1 + level * xi), xi ~ U[-1, 1], clipped at zero"
    if level < 0:
        raise InvalidInput('noise level must be >= 0, got %r' % (level,))
    if level == 0:
        return IntensityData(f.plane, f.k_values, f.values)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=f.values.shape)
    return IntensityData(f.plane, f.k_values, np.maximum(f.values * (1.0 + level * xi), 0.0))


def interpolate_in_k(measured, targets):
    """
    Linear interpolation in k of intensity measured at a few wavenumbers onto the
    target wavenumbers (a partition or any sequence), in the targets' order.
    """
    k_targets = targets.k_values if hasattr(targets, 'k_values') else tuple(targets)
    order = np.argsort(measured.k_values)
    k_measured = measured.k_values[order]
    values = measured.values[order]
    if k_measured.size < 2 and not all(np.isclose(k, k_measured[0], rtol=1e-12, atol=0) for k in k_targets):
        raise InvalidInput('interpolation needs intensity at two wavenumbers at least')
    slack = 1e-12 * max(abs(k_measured[-1]), 1.0)
    out = []
    for k in k_targets:
        if k < k_measured[0] - slack or k > k_measured[-1] + slack:
            raise InvalidInput('wavenumber %r lies outside the measured band [%r, %r]' % (
                k, k_measured[0], k_measured[-1]))
        hit = np.flatnonzero(np.abs(k_measured - k) <= slack)
        if hit.size:
            out.append(values[hit[0]])
            continue
        right = int(np.searchsorted(k_measured, k))
        left = right - 1
        t = (k - k_measured[left]) / (k_measured[right] - k_measured[left])
        out.append((1.0 - t) * values[left] + t * values[right])
    return IntensityData(measured.plane, k_targets, np.array(out))


def retrieve_amplitude(f):
    "A = sqrt(max(f(., k_bar), floor)) on the plane"
    return np.sqrt(np.maximum(f.at(f.k_bar), MODULUS_FLOOR))


def _arccos_argument(f, k):
    denominator = 2.0 * np.sqrt(f.at(f.k_bar))
    g = np.divide(f.at(k) + 1.0, denominator, out=np.full(denominator.shape, np.inf),
                  where=denominator >= DENOMINATOR_FLOOR)
    clamped = (np.abs(g) > 1.0) | (denominator < DENOMINATOR_FLOOR)
    return g, clamped


def retrieve_travel_time(f, k):
    """
    tau = arccos(g) / k + R on the branch m = 0, with tau = R where clamped.
    tau is only defined modulo 2 pi / k.
    """
    if not (f.k_lower - 1e-12 * abs(f.k_lower) <= k <= f.k_bar + 1e-12 * abs(f.k_bar)):
        raise InvalidInput('k=%r is outside the data band [%r, %r]' % (k, f.k_lower, f.k_bar))
    R = f.plane.z
    g, clamped = _arccos_argument(f, k)
    tau = np.full(g.shape, R)
    tau[~clamped] += np.arccos(g[~clamped]) / k
    return TravelTime(tau, clamped, float(np.mean(clamped)))


def retrieve_phased(f):
    "complex field on the plane for every wavenumber held by f"
    R = f.plane.z
    amplitude = retrieve_amplitude(f)
    values = np.empty(f.values.shape, dtype=complex)
    for index, k in enumerate(f.k_values):
        g, clamped = _arccos_argument(f, k)
        phase = np.zeros(g.shape)
        phase[~clamped] = np.arccos(g[~clamped])
        values[index] = amplitude * np.exp(1j * (phase + k * R))
    return ComplexPlaneData(f.plane, f.k_values, values)


def clamp_fraction(f):
    """
    Share of clamped plane nodes per wavenumber, and over every wavenumber below k_bar
    (at k_bar the argument is >= 1 by construction).
    """
    per_k = []
    below = []
    for k in f.k_values:
        _, clamped = _arccos_argument(f, k)
        per_k.append((float(k), float(np.mean(clamped))))
        if k < f.k_bar:
            below.append(clamped)
    overall = float(np.mean(below)) if below else 0.0
    for k, fraction in per_k:
        logger.info('clamp fraction at k=%.4f: %.4f' % (k, fraction))
    return ClampStatistics(per_k, overall)


def retrieved_phi(phased):
    "phi(k) recomputed from a retrieved field, per wavenumber"
    return [(float(k), phi_of_k(phased, k)) for k in phased.k_values]


def retrieval_error(true, retrieved, part='imag'):
    "relative L2 error of one part of the retrieved field against the true one, per wavenumber"
    pick = np.imag if part == 'imag' else np.real
    errors = []
    for k in retrieved.k_values:
        reference = pick(true.at(k))
        deviation = pick(retrieved.at(k)) - reference
        errors.append((float(k), float(np.linalg.norm(deviation) / max(np.linalg.norm(reference), 1e-300))))
    return errors

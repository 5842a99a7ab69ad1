"""
Stage orchestration shared by the management commands: simulation of intensity data
from a phantom, phase retrieval, propagation and reconstruction, and the run summary.
"""

import json
import logging
import os
from collections import namedtuple

import numpy as np
from django.conf import settings

from .forward import analytic_bound, evaluate_exterior, phi_of_k, solve_ls
from .grid import ComplexPlaneData, make_grid
from .libs.field_io import write_field, write_plane_data, write_result_bundle
from .libs.ingest_utils import write_intensity_csv
from .phantom import build_refractive_field
from .phase import add_noise, clamp_fraction, retrieval_error, retrieve_phased, synthesize_intensity
from .propagate import angular_spectrum, noise_statistics
from .reconstruct import Geometry, IterationLog, run_phased, stage
from .util import ensure_directory, setting

logger = logging.getLogger("rainbow")

SUMMARY_FILE = 'summary.json'
INTENSITY_FILE = 'intensity.csv'
TRUE_FIELD_FILE = 'field.psf'
PHASED_FILE = 'phased.psf'
PROPAGATED_FILE = 'propagated.psf'
ITERATION_LOG = 'iterations.jsonl'
C_FILE = 'c.psf'
N_FILE = 'n.psf'
BUNDLE_FILE = 'result.h5'

Simulation = namedtuple('Simulation', ['field', 'intensity', 'phi', 'grid'])


def memory_budget(config):
    return config.solver['memory_budget'] or setting('PHASELESS_MEMORY_BUDGET')


def simulate(config, workers=None):
    """
    Intensity on the measurement plane for every wavenumber of the configured partition,
    from Lippmann-Schwinger solves on the phantom.
    """
    partition = config.partition()
    plane = config.plane()
    grid = make_grid(config.bbox, config.solver['ppw'], partition.k_bar, memory_budget(config))
    n2 = build_refractive_field(config.phantom_spec(), grid)
    solver = config.solver_settings(workers)
    values = []
    phi = []
    count = len(config.phantom['spheres'])
    with stage('forward'):
        for k in partition.k_values:
            solution = solve_ls(n2, k, solver)
            if not solution.converged:
                logger.warning('forward solve at k=%.4f stopped at residual %.2e' % (k, solution.residual))
            values.append(evaluate_exterior(solution, n2, plane).at(k))
            phi.append({'k': float(k), 'phi': phi_of_k(ComplexPlaneData(plane, [k], values[-1]), k),
                        'bound': analytic_bound(k, plane.z, max(count, 1))})
            logger.info('simulated k=%.4f on a %s grid (%d GMRES iterations)' % (
                k, grid.counts, solution.iterations))
    field = ComplexPlaneData(plane, partition.k_values, np.array(values))
    return Simulation(field, synthesize_intensity(field), phi, grid)


def retrieve(intensity):
    with stage('retrieve'):
        phased = retrieve_phased(intensity)
        clamp = clamp_fraction(intensity)
    return phased, clamp


def reconstruction_geometry(config):
    partition = config.partition()
    grid = make_grid(config.bbox, config.pipeline['reconstruction_ppw'], partition.k_bar, memory_budget(config))
    return Geometry(grid, partition)


def propagated_noise(clean, noisy, config, workers=None):
    "relative noise of phased data on the measurement plane and after propagation to the top of Omega"
    top = config.bbox[5]
    pad = config.pipeline['pad']
    before = noise_statistics(clean, noisy)
    after = noise_statistics(angular_spectrum(clean, top, pad=pad, workers=workers),
                             angular_spectrum(noisy, top, pad=pad, workers=workers))
    return [{'k': k, 'plane': b, 'propagated': a} for (k, b), (_, a) in zip(before, after)]


def reconstruct(phased, config, out, workers=None):
    geometry = reconstruction_geometry(config)
    with IterationLog(os.path.join(out, ITERATION_LOG)) as log:
        result = run_phased(phased, geometry, config.algorithm_settings(workers), log)
    write_field(os.path.join(out, C_FILE), result.c)
    write_field(os.path.join(out, N_FILE), result.n_rel)
    write_result_bundle(os.path.join(out, BUNDLE_FILE), result, config.to_dict())
    return result


def run_pipeline(config, out, workers=None):
    "every stage from the phantom to the reconstruction; returns the run summary"
    ensure_directory(out)
    simulation = simulate(config, workers)
    write_plane_data(os.path.join(out, TRUE_FIELD_FILE), simulation.field)
    pipeline = config.pipeline
    intensity = add_noise(simulation.intensity, pipeline['noise'], pipeline['seed'])
    write_intensity_csv(os.path.join(out, INTENSITY_FILE), intensity)
    phased, clamp = retrieve(intensity)
    write_plane_data(os.path.join(out, PHASED_FILE), phased)
    summary = base_summary(config, 'pipeline')
    summary['simulation'] = {'grid': list(simulation.grid.counts), 'phi': simulation.phi}
    summary['retrieval'] = clamp_summary(clamp)
    summary['retrieval']['imag_error'] = pairs(retrieval_error(simulation.field, phased))
    if pipeline['noise'] > 0:
        clean, _ = retrieve(simulation.intensity)
        summary['noise'] = propagated_noise(clean, phased, config, workers)
    result = reconstruct(phased, config, out, workers)
    summary['reconstruction'] = result.summary()
    write_summary(out, summary)
    return summary


def pairs(values):
    return [{'k': k, 'value': v} for k, v in values]


def clamp_summary(clamp):
    return {'clamp_fraction': clamp.overall, 'clamp_per_k': pairs(clamp.per_k)}


def base_summary(config, command):
    return {
        'command': command,
        'version': getattr(settings, 'VERSION', None) if settings.configured else None,
        'config': config.to_dict(),
    }


def write_summary(out, summary):
    "summary.json with sorted keys, so identical runs give identical files"
    path = os.path.join(ensure_directory(out), SUMMARY_FILE)
    with open(path, 'w', encoding='utf-8') as fd:
        json.dump(summary, fd, sort_keys=True, indent=2, allow_nan=True)
        fd.write('\n')
    logger.info('wrote run summary %s' % path)
    return path

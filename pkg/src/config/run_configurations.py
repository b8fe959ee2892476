# -*- coding: utf-8 -*-
"""
Run Presets for the Verification Experiments
============================================

Named presets bundle the replica count, step size, radius grids and seed an
experiment run uses when the command line does not say otherwise.
"""

# =============================================================================
# RUN PRESETS
# =============================================================================

# Quick preset: small replica counts, for smoke runs and CI
QUICK_CONFIG = {
    'name': 'quick',
    'description': 'Small replica counts and a coarse time step',
    'n_replicas': 4000,
    'dt': 1e-3,
    'seed': 20240601,
    'r_grid': [0.25, 1.0, 4.0],
    'shrink_grid': [1.0, 0.5, 0.25],   # fractions of r0
    'holder_radius': 1.0,
    'jump_start_radius': 0.5,
    'jump_r_grid': [1.0, 2.0, 4.0],
}

# Acceptance preset: the replica counts the acceptance criteria are stated for
ACCEPTANCE_CONFIG = {
    'name': 'acceptance',
    'description': 'N = 1e5 replicas at dt = 1e-4',
    'n_replicas': 100_000,
    'dt': 1e-4,
    'seed': 7,
    'r_grid': [0.25, 1.0, 4.0],
    'shrink_grid': [1.0, 0.5, 0.25, 0.125],
    'holder_radius': 1.0,
    'jump_start_radius': 0.5,
    'jump_r_grid': [1.0, 2.0, 4.0],
}

PRESETS = {
    'quick': QUICK_CONFIG,
    'acceptance': ACCEPTANCE_CONFIG,
}

# Active preset (default to the quick one)
ACTIVE_CONFIG = QUICK_CONFIG


def set_active_config(name):
    """
    Changes the active preset

    Args:
        name (str): 'quick' or 'acceptance'
    """
    global ACTIVE_CONFIG
    if name not in PRESETS:
        raise KeyError(f"Unknown run preset '{name}'. Must be one of {sorted(PRESETS)}.")
    ACTIVE_CONFIG = PRESETS[name]
    return ACTIVE_CONFIG


def get_config_summary():
    """Flat summary of the active preset for logs and reports"""
    return {key: value for key, value in ACTIVE_CONFIG.items() if key != 'description'}

"""
Local Override Template
=======================

Copy this file to 'config_local.py' and adjust the values you want to change.
The 'config_local.py' file is gitignored; src/config picks up LEVY_OVERRIDES
from it on top of the environment defaults (LEVY_ENVIRONMENT).
"""

# Section -> field overrides. Sections: quadrature, grids, simulation, experiments, logging
LEVY_OVERRIDES = {
    'simulation': {
        'workers': 4,             # threads for Monte Carlo blocks (results do not depend on it)
        'block_size': 2048,       # replicas per RNG block
    },
    'logging': {
        'level': 'INFO',
    },
}

# Example overrides for different setups:

# Tighter quadrature for reference tables:
# LEVY_OVERRIDES = {
#     'quadrature': {'psi_rtol': 1e-10, 'kernel_rtol': 1e-8},
# }

# Long experiment runs with a log file:
# import os
# LEVY_OVERRIDES = {
#     'simulation': {'workers': int(os.getenv('LEVY_WORKERS', 8)), 'max_steps': 5_000_000},
#     'logging': {'file_path': os.getenv('LEVY_LOG_FILE', 'levy.log')},
# }

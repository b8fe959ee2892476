"""
Characteristic exponents, Pruitt function, Bernstein envelopes and weak lower
scaling certificates.
"""

from src.exponent.characteristic import CharacteristicExponent, psi_from_spec, psi_star
from src.exponent.pruitt import bernstein_envelope, pruitt_h, truncated_moment
from src.exponent.scaling import (
    JumpBoundReport,
    ScalingCertificate,
    check_certificate,
    check_jump_prob_bound,
    jump_probability_bound,
    wlsc_fit,
)

__all__ = [
    'CharacteristicExponent', 'psi_from_spec', 'psi_star', 'bernstein_envelope', 'pruitt_h',
    'truncated_moment', 'JumpBoundReport', 'ScalingCertificate', 'check_certificate',
    'check_jump_prob_bound', 'jump_probability_bound', 'wlsc_fit',
]

"""
Utilities Module
================

File path management, logger setup and the panel quadrature shared by the
numerical modules.
"""

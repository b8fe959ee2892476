#!/usr/bin/env python3
"""
File Path Utilities for Organized Output
========================================

Keeps generated files in predictable places:
- Experiment reports (JSON): reports/
- Logs: logs/
"""

import os

# Project root directory (this file lives in src/utils/)
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))

# Directory structure
DIRECTORIES = {
    'reports': os.path.join(PROJECT_ROOT, 'reports'),
    'logs': os.path.join(PROJECT_ROOT, 'logs'),
}


def ensure_directories():
    """Create all necessary directories if they don't exist"""
    for dir_path in DIRECTORIES.values():
        os.makedirs(dir_path, exist_ok=True)


def get_report_path(filename):
    """Get full path for a report file in reports/"""
    ensure_directories()
    return os.path.join(DIRECTORIES['reports'], filename)


def get_log_path(filename):
    """Get full path for a log file in logs/"""
    ensure_directories()
    return os.path.join(DIRECTORIES['logs'], filename)


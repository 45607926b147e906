#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration et écriture des rapports
"""

from .config import RunConfig, load_run_config
from .file_operations import report_to_json, report_to_text, save_report

__all__ = ['RunConfig', 'load_run_config', 'report_to_json', 'report_to_text', 'save_report']

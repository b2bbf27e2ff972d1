"""
Utility sub-package for nonexp_lab.

Contains shared modules used across the package:

- :mod:`error`         : custom exception hierarchy and error code catalog
- :mod:`config_manager`: JSON settings and experiment config loading
- :mod:`utility`       : logging, seeds, parallel map, float formatting
"""

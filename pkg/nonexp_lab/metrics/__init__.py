"""
Metric sub-package for nonexp_lab.

- :mod:`gauges`     : admissible gauges and their condition checks
- :mod:`dense`      : deterministic dense sequences for the pointwise metric
- :mod:`map_metrics`: series, weighted-sup and pointwise metrics on mapping space
"""

from .gauges import (
    ConditionResult, Gauge, GaugeConditionReport, check_c5, check_gauge_conditions,
    make_custom_gauge, make_log_gauge, make_porosity_power, make_power_gauge, make_table_gauge,
)
from .dense import ENUMERATION_VERSION, DenseSequence
from .map_metrics import (
    DivergenceReport, DivergenceRow, MapMetric, MetricValue, basepoint_equivalence_check,
    bounded_equivalence_check, d_n_theta, d_theta1_divergence_demo, divergence_map,
    local_from_global, local_from_global_weighted, local_within, local_within_doubled,
    pointwise_metric, series_metric, weighted_sup_metric, weighted_tail_bound,
)

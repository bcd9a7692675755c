"""scalerbench: a deterministic testbed for microservice auto-scaler evaluation.

Simulates a microservice call graph as a network of multi-server FCFS queues,
drives it with trace-shaped closed-loop load, scrapes Prometheus-style
telemetry, runs pluggable scaler policies through a register/scale/cancel
lifecycle, and reports SLA violation rate, success rate, and resource totals.
"""

__version__ = "0.1.0"

"""Figure scripts over simulator run outputs.

Read-only consumers of the published file schemas: ``consumer_daily.csv``,
``provider_cycle.csv``, ``switches.csv``, ``manifest.json``, and
``sweep_summary.json``. Nothing here imports the simulator itself.
"""

__version__ = "0.1.0"

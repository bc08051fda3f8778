"""Link prediction on user-cell association graphs for proactive handover decisions."""

__version__ = "0.1.0"

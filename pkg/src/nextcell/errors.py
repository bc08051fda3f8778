"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and usage problems exit
with 2, data problems with 3, training problems with 4.
"""


class NextcellError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NextcellError):
    """Invalid configuration; the message names the offending field."""


class GraphConstructionError(NextcellError):
    """Raw tables cannot be assembled into a graph."""


class DensityError(NextcellError):
    """Density is undefined for graphs with fewer than two nodes."""


class DataFormatError(NextcellError):
    """Malformed input file; the message carries file and line number."""


class SubsetError(NextcellError):
    """Requested subset exceeds what the graph contains."""


class SplitError(NextcellError):
    """Edge split cannot honor the requested ratios."""


class SamplingError(NextcellError):
    """Not enough candidate negative pairs exist."""


class DimensionError(NextcellError):
    """Tensor operands have incompatible shapes."""


class NonFiniteError(NextcellError):
    """A tensor op produced NaN or Inf."""


class OptimizerError(NextcellError):
    """Optimizer received invalid gradients."""


class TrainingError(NextcellError):
    """Training diverged or cannot proceed."""


class MetricError(NextcellError):
    """Metric undefined for the given scores or labels."""


class ThresholdError(NextcellError):
    """Threshold tuning is degenerate for the given scores or labels."""


class InputError(NextcellError):
    """Indices or arguments outside the valid range."""

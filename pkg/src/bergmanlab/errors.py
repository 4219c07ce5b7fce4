"""Exception types shared across the package."""


class InvalidMeasureError(ValueError):
    """A measure is malformed: nonpositive mass, bad shapes, or a node-count
    mismatch between tabulated data and the node set."""


class UnsupportedWeightError(ValueError):
    """An operation needs a closed-form weight (off-node evaluation or an
    analytic Laplacian) but the weight is tabulated-only."""


class InvalidConfigurationError(ValueError):
    """A run is configured inconsistently, e.g. a span degree that the
    quadrature rule cannot integrate."""


class InvalidScenarioError(ValueError):
    """A scenario file or dict failed to parse or validate."""

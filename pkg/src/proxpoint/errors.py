"""Exception taxonomy shared by the library and the CLI.

Every error carries a short machine tag (``code``) that reports print, and
the process exit status the CLI maps it to: 2 for schema/validation
problems, 3 for failed mathematical hypotheses.  Non-convergence (exit 4)
and oracle disagreement (exit 5) are states, not exceptions; the CLI
derives those codes from results.
"""


class ProxpointError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    code = "ERROR"


class ScenarioError(ProxpointError):
    """Scenario file cannot be used as given."""

    exit_code = 2
    code = "SCENARIO"


class SchemaError(ScenarioError):
    """Malformed document: missing/unknown field or wrong type."""

    code = "SCHEMA"


class ResolutionError(ScenarioError):
    """Well-formed document referencing things that do not resolve."""

    code = "RESOLUTION"


class MetricAxiomError(ScenarioError):
    """Explicit distance matrix violates a metric axiom."""

    code = "METRIC"


class BackendUnsupportedError(ScenarioError):
    """Requested operation needs a backend capability that is absent."""

    code = "BACKEND_UNSUPPORTED"


class HypothesisError(ProxpointError):
    """A mathematical precondition of the requested pipeline failed."""

    exit_code = 3
    code = "HYPOTHESIS"


class NotPPropertyError(HypothesisError):
    """Proximal pairs are not pairwise distance-preserving."""

    code = "NOT_P"


class NonFunctionalPairingError(HypothesisError):
    """Proximal pairing is not a well-defined bijection at this tolerance."""

    code = "NON_FUNCTIONAL"


class ImageOutsideB0Error(HypothesisError):
    """Map sends a proximal point outside the proximal part of B."""

    code = "IMAGE_OUTSIDE_B0"


class CertificationFailedError(HypothesisError):
    """Declared map class refuted on the proximal domain."""

    code = "CERTIFICATION_FAILED"

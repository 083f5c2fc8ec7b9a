"""Exception hierarchy shared by every stage of the pipeline."""


class LgotError(Exception):
    """Base class for all package errors."""


class InputError(LgotError):
    """Malformed input data (exit code 1 in the CLI)."""


class GeometryError(InputError):
    """Invalid boundary curve (not closed, not simple, wrong orientation, cusp)."""


class ParameterDomainError(InputError):
    """Arclength parameter outside ``[0, L)``."""


class DegenerateSegmentError(InputError):
    """Segment with coincident endpoints."""


class InvalidTraceError(InputError):
    """Trace that is discontinuous or otherwise malformed."""


class UnsupportedTraceError(InvalidTraceError):
    """Trace outside the representable class (e.g. singular-continuous)."""


class EmptyMeasureError(LgotError):
    """Sampling requested from a zero measure."""


class H1UnsatisfiableError(LgotError):
    """No arc decomposition found by the pairing algorithm.

    Attributes
    ----------
    violations : list of str
        Diagnostics of the last attempted decomposition.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class MapConstructionError(LgotError):
    """Transport map cannot be built from the given pairs."""


class NotInDomainError(LgotError):
    """Parameter outside every plus arc of a transport map."""


class LevelMismatchError(LgotError):
    """Ray endpoints carry different trace levels."""


class ScanError(LgotError):
    """Threshold scan with equal verdicts at both ends of the range."""


class PartitionGeometryError(InputError):
    """Partition cells overlap or fail to cover the domain."""


class RefinementError(LgotError):
    """Family cannot be sliced."""


class RefinementExhaustedError(LgotError):
    """Automatic refinement hit its cap; carries the last report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class OracleInputError(LgotError):
    """Source and target atom sets are incompatible."""


class AttributionError(LgotError):
    """Atom not attributable to any cell trace arc."""


class DomainError(LgotError):
    """Evaluation point outside the domain."""


class DegenerateRegionError(LgotError):
    """Flat region whose bounding levels disagree."""


class ConditionViolatedError(LgotError):
    """An admissibility condition failed, so the map is not certified optimal."""

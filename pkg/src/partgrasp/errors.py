"""Exception hierarchy shared across the package."""


class PartGraspError(Exception):
    """Base class for all package errors."""


class InvalidRegionError(PartGraspError):
    """A bounding box or mask region is out of range for its image."""


class InvalidInputError(PartGraspError):
    """Inputs violate a documented precondition (dimension mismatch etc.)."""


class BehindCameraError(PartGraspError):
    """Projection requested for a point with z <= 0."""


class InsufficientPointsError(PartGraspError):
    """Too few points for the requested neighborhood operation."""


class NoGraspFoundError(PartGraspError):
    """No grasp proposal survived generation or filtering."""


class NotFoundError(PartGraspError):
    """A query matched nothing (object, part, or detection below threshold)."""


class AmbiguousQueryError(NotFoundError):
    """A query matched more than one object."""


class ManifestError(PartGraspError):
    """A dataset manifest or trial log failed to load."""


class TransportError(PartGraspError):
    """Network-level failure talking to a remote stage."""


class ProtocolError(PartGraspError):
    """A remote stage returned a structured error envelope."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message

"""Exception vocabulary shared by every module in the toolkit."""


class KinesphereError(Exception):
    """Base class for all toolkit errors."""


# --- platform description ---

class MalformedXml(KinesphereError):
    pass


class SchemaViolation(KinesphereError):
    pass


class LabelingError(KinesphereError):
    pass


class DisconnectedCore(KinesphereError):
    pass


class UnknownLabel(KinesphereError):
    pass


# --- direction vocabulary ---

class ZeroDirection(KinesphereError):
    pass


class UnknownDirectionName(KinesphereError):
    pass


class UnknownOrigin(UnknownLabel):
    pass


class InvalidSizeCount(KinesphereError):
    pass


# --- pose databank ---

class DuplicateEntry(KinesphereError):
    pass


class UnknownKId(KinesphereError):
    pass


class SupportMismatch(KinesphereError):
    pass


class LimitViolation(KinesphereError):
    pass


class NoSuchEntry(KinesphereError):
    pass


class SizeOverflow(KinesphereError):
    """Requested size exceeds what is stored; carries the stored bound."""

    def __init__(self, kmax: int, message: str = ""):
        super().__init__(message or f"size exceeds stored maximum {kmax}")
        self.kmax = kmax


class JointConflict(KinesphereError):
    """Two partial poses disagree on a shared joint."""

    def __init__(self, joint_id: str, message: str = ""):
        super().__init__(message or f"conflicting values for joint {joint_id}")
        self.joint_id = joint_id


class FormatError(KinesphereError):
    pass


class IntegrityError(KinesphereError):
    pass


# --- command resolution ---

class CommandSyntaxError(KinesphereError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NoLocomotion(KinesphereError):
    pass


class GroundProjectionDegenerate(KinesphereError):
    pass


class MultipleTranslations(KinesphereError):
    pass


# --- library installation ---

class InstallFailure(KinesphereError):
    pass


# --- teleoperation service ---

class UnknownPlatform(KinesphereError):
    pass


class UnknownSession(KinesphereError):
    pass

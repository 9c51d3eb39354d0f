"""Exception hierarchy shared by every stage of the generator."""


class ForgeError(Exception):
    """Base class for all errors raised by chartdoc_forge."""


class ValidationError(ForgeError):
    """Bad input supplied by the caller (files, flags, shapes)."""


# taxonomy
class CycleDetected(ValidationError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("hypernym cycle: " + " -> ".join(self.cycle))


class InsufficientEntities(ValidationError):
    pass


class UnknownEntity(ValidationError):
    pass


class RootHasNoAncestors(ValidationError):
    pass


# tables
class InvalidShape(InsufficientEntities):
    pass


class ParseError(ValidationError):
    def __init__(self, row, col, message="non-numeric cell"):
        self.row = row
        self.col = col
        super().__init__(f"{message} at row {row}, column {col}")


class DuplicateLabel(ValidationError):
    pass


# charts
class IncompatibleShape(ValidationError):
    def __init__(self, subtype, shape, reason=""):
        self.subtype = subtype
        self.shape = shape
        msg = f"{subtype} cannot be drawn from a {shape[0]}x{shape[1]} table"
        super().__init__(msg + (f": {reason}" if reason else ""))


class RenderOverflow(ForgeError):
    pass


# questions
class RegistryParseError(ValidationError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InvariantViolation(ValidationError):
    def __init__(self, template_id, message):
        self.template_id = template_id
        super().__init__(f"template {template_id}: {message}")


class NotApplicable(ForgeError):
    pass


class EmptyFillDomain(ForgeError):
    pass


# answers
class EvaluationError(ForgeError):
    """Raised by an atomic operation that cannot produce a value."""


class TypeMismatch(EvaluationError):
    pass


class UnknownLabel(EvaluationError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"unknown label {label!r}")


class EmptyList(EvaluationError):
    def __init__(self, op):
        self.op = op
        super().__init__(f"{op} over an empty list")


class SolveError(ForgeError):
    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        super().__init__(f"step s{step}: {cause}")


# documents / pipeline
class DoesNotFit(ForgeError):
    pass


class ManifestMismatch(ValidationError):
    pass


class DocumentError(ForgeError):
    """A per-document failure; ``cause`` keeps the original error."""

    def __init__(self, doc_index, cause):
        self.doc_index = doc_index
        self.cause = cause
        super().__init__(f"document {doc_index}: {type(cause).__name__}: {cause}")
